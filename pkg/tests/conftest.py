import dataclasses

import pytest

from hypercf.gpoly import PolyD, RatD
from hypercf.scalars import set_precision, settings


@pytest.fixture(autouse=True)
def _default_settings():
    saved = dataclasses.asdict(settings)
    set_precision(50)
    yield
    for k, v in saved.items():
        setattr(settings, k, v)
    set_precision(saved["precision"])


def rat(num, den=(1,)):
    """RatD from ascending coefficient lists."""
    return RatD(PolyD(list(num)), PolyD(list(den)))
