import random

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from conftest import rat
from hypercf.gpmatrix import GPolyMatrix, Separation, separate
from hypercf.gpoly import GPoly, RatD
from hypercf.hcf import (
    Atom, Block, DdeSystem, assemble_dde, classify, emit_report, from_document,
    parse_report, residual_terms, to_document,
)
from hypercf.pipeline import run_pipeline
from hypercf.scalars import ConstField, DelayBasis, Exponent
from hypercf.system import build_H, random_system, strings_demo_matrix

B = DelayBasis({"pi": "pi"})
PI = B["pi"]
C = Exponent.const
F = ConstField.rational


@pytest.fixture(scope="module")
def demo_result():
    return run_pipeline(strings_demo_matrix())


def test_benchmark_blocks(demo_result):
    d = demo_result.description
    assert d.blocks == [(2, (-PI, PI)), (0, (C(-10), C(10)))]
    assert d.dde.Hhat_inv == [[F(1), F(0)], [F(0), F(1) / F(2)]]
    assert d.state_dimensions() == (2, 2)


def test_benchmark_is_quasi_without_input_derivatives(demo_result):
    d = demo_result.description
    assert d.classification == "quasi"
    assert all(a.coeff.deg <= 0 for b in d.dde.blocks for a in b.B)


def test_monomial_diagonal():
    D = GPolyMatrix.diag([GPoly.monomial(PI, rat([0, 1]), B), GPoly.monomial(C(3), 1, B)], B)
    dde = assemble_dde(separate(D), GPolyMatrix.identity(2, B))
    for i, blk in enumerate(dde.blocks):
        assert blk.A == []
        assert blk.B == [Atom(i, C(0), RatD.const(1))]
    assert classify(dde) == "classic"
    assert residual_terms(dde) == []


def _table(atoms):
    blk = Block(0, C(1), C(-1), [], atoms)
    I = GPolyMatrix.identity(1)
    return DdeSystem([blk], I, I, [[F(1)]])


def test_classify_cases():
    one = RatD.const(1)
    assert classify(_table([Atom(0, C(0), one)])) == "classic"
    assert classify(_table([Atom(0, C(1), one)])) == "non-causal"
    assert classify(_table([Atom(0, C(1), one), Atom(0, C(-1), one)])) == "quasi"
    assert classify(_table([Atom(0, C(0), rat([0, 1]))])) == "discontinuous"


def test_text_report(demo_result):
    text = emit_report(demo_result.description)
    # the (2,2) pivot is h22 - qstar*h12, whose top coefficient is 1 + 1
    assert "Hhat = diag(1, 2)" in text
    assert "classification = quasi" in text
    assert "residual terms:" in text


def test_no_residual_section():
    D = GPolyMatrix.diag([GPoly.monomial(PI, rat([0, 1]), B)], B)
    res = run_pipeline(D)
    assert res.description.residuals == []
    assert "residual terms" not in emit_report(res.description)


def test_report_round_trip(demo_result):
    d = demo_result.description
    assert parse_report(emit_report(d, "json")) == d
    assert from_document(to_document(d)) == d


def test_reports_deterministic(demo_result):
    d = demo_result.description
    again = run_pipeline(strings_demo_matrix()).description
    for fmt in ("text", "json", "latex"):
        assert emit_report(d, fmt) == emit_report(again, fmt)
    with pytest.raises(ValueError):
        emit_report(d, "yaml")


@hsettings(max_examples=5, deadline=None)
@given(st.integers(0, 10**4))
def test_round_trip_random(seed):
    d = run_pipeline(build_H(random_system(seed))).description
    assert parse_report(emit_report(d, "json")) == d
    assert all(a.coeff.deg <= 0 for b in d.dde.blocks for a in b.B)
