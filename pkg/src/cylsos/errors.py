"""Exception hierarchy shared by the engine and mapped to CLI exit codes."""


class CylSosError(Exception):
    """Base class for all engine errors."""


class ArityError(CylSosError, ValueError):
    """Polynomials or points with mismatched numbers of variables."""


class DomainError(CylSosError, ValueError):
    """An operation was called outside its mathematical domain."""


class ParseError(CylSosError, ValueError):
    def __init__(self, message: str, text: str = "", position: int | None = None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position}\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class HypothesisRejected(CylSosError):
    """The input violates a hypothesis the construction needs (fully m-ic, odd m, ...)."""

    def __init__(self, kind: str, message: str, witness=None):
        self.kind = kind
        self.witness = witness
        super().__init__(message)


class NotCertifiedError(HypothesisRejected):
    """Positivity of a polynomial could not be certified on the sampled grid."""

    def __init__(self, message: str, witness=None):
        super().__init__("not-certified", message, witness)


class EmptySetError(HypothesisRejected):
    def __init__(self, message: str):
        super().__init__("empty-set", message)


class InfeasibleBudgetError(CylSosError):
    """The search exhausted its caps; ``report`` carries the bound report if available."""

    def __init__(self, message: str, report=None, trace=None):
        self.report = report
        self.trace = trace or []
        super().__init__(message)


class RegistryError(CylSosError):
    """Registry file is malformed, incomplete, or contains an entry that fails to verify."""

    def __init__(self, message: str, missing=None, offending=None):
        self.missing = missing or []
        self.offending = offending
        super().__init__(message)


class UnsupportedGenerators(CylSosError):
    """No builtin corner certificates exist for these generators."""
