"""Exception hierarchy shared by all hasselab modules."""


class HasseLabError(Exception):
    """Base class for all library errors."""


class ValidationError(HasseLabError):
    """Configuration or input data violates a structural contract."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class NonMonic(ValidationError):
    """Minimal polynomial is not monic with integer coefficients."""


class NotIrreducible(ValidationError):
    """Minimal polynomial fails the squarefree/irreducibility pre-check."""


class NonRingBasis(ValidationError):
    """Proposed basis is not multiplicatively closed over the integers."""


class PrecisionFailure(HasseLabError):
    """Embeddings could not be separated/verified at the working precision."""


class DivisionByZero(HasseLabError):
    """Field inversion of the zero element."""


class RankDeficient(HasseLabError):
    """Generators do not span a full-rank sublattice."""


class IndexDivisor(HasseLabError):
    """Rational prime divides [O_K : Z[theta]]; Dedekind splitting refused."""

    def __init__(self, p, index):
        self.p = p
        self.index = index
        super().__init__(f"prime {p} divides the order index {index}; no factorization path")


class NonIntegral(HasseLabError):
    """Element expected to be integral has non-integer coordinates."""


class DimensionMismatch(HasseLabError):
    """Operand shapes disagree with the system dimensions."""


class BudgetExceeded(HasseLabError):
    """Enumeration cost is above the configured budget."""

    def __init__(self, message, cost=None, budget=None, partial=None):
        self.cost = cost
        self.budget = budget
        self.partial = partial
        super().__init__(message)


class SearchBudgetExceeded(BudgetExceeded):
    """Arc-classification denominator search is above budget."""


class UnsupportedField(HasseLabError):
    """Operation gated on a field property the configuration does not assert."""


class DegenerateData(HasseLabError):
    """Not enough (or degenerate) data points for a fit."""


class ResourceExceeded(HasseLabError):
    """Exact big-integer tower would exceed the memory guard."""

    def __init__(self, message, magnitude_log10=None):
        self.magnitude_log10 = magnitude_log10
        super().__init__(message)


class ErrorTargetUnmet(HasseLabError):
    """Quadrature finished below the requested accuracy; best estimate attached."""

    def __init__(self, message, estimate=None):
        self.estimate = estimate
        super().__init__(message)
