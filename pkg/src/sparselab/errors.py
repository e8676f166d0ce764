"""Exception hierarchy shared by every sparselab module."""


class SparselabError(Exception):
    """Base class for all library errors."""


class NonFinite(SparselabError, ValueError):
    pass


class ConstantColumn(SparselabError, ValueError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has zero variance")


class AlreadyStandardized(SparselabError, ValueError):
    pass


class NotStandardized(SparselabError, ValueError):
    pass


class NotPositiveDefinite(SparselabError, ValueError):
    def __init__(self, pivot):
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite (failing pivot {pivot})")


class NotSymmetric(SparselabError, ValueError):
    pass


class NoConvergence(SparselabError, RuntimeError):
    pass


class RankDeficient(SparselabError, ValueError):
    pass


class SupportTooLarge(SparselabError, ValueError):
    pass


class InvalidPenalty(SparselabError, ValueError):
    pass


class InvalidA(InvalidPenalty):
    pass


class UnsupportedKind(SparselabError, ValueError):
    pass


class DegenerateSigma(SparselabError, ArithmeticError):
    pass


class Unbounded(SparselabError, RuntimeError):
    pass


class Infeasible(SparselabError, RuntimeError):
    pass


class ConstantInput(SparselabError, ValueError):
    pass


class TooFewSamples(SparselabError, ValueError):
    pass


class SingularGram(SparselabError, ValueError):
    pass


class EmptySupport(SparselabError, ValueError):
    pass


class UnsupportedFamily(SparselabError, ValueError):
    pass


class ConfigError(SparselabError, ValueError):
    """Invalid command line or config file input."""
