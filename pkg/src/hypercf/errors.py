"""Exception and warning classes shared by all modules."""


class HcfError(Exception):
    """Base class for all errors raised by hypercf."""


class DomainError(HcfError, ValueError):
    pass


class DivisionByZero(DomainError, ZeroDivisionError):
    pass


class DegreeOfZero(DomainError):
    pass


class PreconditionViolated(HcfError):
    pass


class EntiretyCheckFailed(HcfError):
    pass


class StructureViolation(HcfError):
    """Input matrix does not have the structure of the supported system class."""


class DegenerateMatrix(HcfError):
    pass


class ReductionDiverged(HcfError):
    pass


class NotReducible(HcfError):
    """Reduction finished but the leading coefficient matrix is singular."""


class NotControllable(HcfError):
    def __init__(self, rank, n):
        super().__init__(f"(F, B) is not controllable: rank {rank} < {n}")
        self.rank = rank
        self.n = n


class PolePointError(HcfError):
    pass


class SchemaError(HcfError, ValueError):
    """Invalid input document; message names the offending field."""


class NumericFallbackWarning(UserWarning):
    """Exact constants were replaced by high-precision floating values."""


class ExponentMergeWarning(UserWarning):
    """Two formally distinct exponents evaluated to the same number."""
