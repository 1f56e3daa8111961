"""Exception hierarchy shared by every module of the package."""


class T2MError(Exception):
    """Base class; ``kind`` names the error for diagnostics and exit-code mapping."""

    kind = "T2MError"

    def __str__(self):
        msg = super().__str__()
        return f"{self.kind}: {msg}" if msg else self.kind


class TailNotZero(T2MError, ValueError):
    kind = "TailNotZero"


class MixedTails(T2MError, ValueError):
    kind = "MixedTails"


class DecodeError(T2MError, ValueError):
    kind = "DecodeError"


class SeqSyntaxError(T2MError, ValueError):
    kind = "SeqSyntaxError"


class MachineSyntaxError(T2MError):
    kind = "SyntaxError"

    def __init__(self, span, message):
        self.span = span
        self.message = message
        super().__init__(f"{span.line}:{span.column}: {message}")


class ValidationError(T2MError):
    kind = "ValidationError"

    def __init__(self, reason, vertex=None):
        self.reason = reason
        self.vertex = vertex
        where = f" at vertex {vertex!r}" if vertex is not None else ""
        super().__init__(f"{reason}{where}")


class PrefixUnavailable(T2MError):
    kind = "PrefixUnavailable"

    def __init__(self, requested, available):
        self.requested = requested
        self.available = available
        super().__init__(f"requested {requested} symbols, only {available} written")


class OracleDomainError(T2MError):
    kind = "OracleDomainError"


class OracleDivergence(T2MError):
    kind = "OracleDivergence"


class IndexOutOfRange(T2MError):
    kind = "IndexOutOfRange"


class _SampleError(T2MError):
    def __init__(self, sample, detail=""):
        self.sample = sample
        super().__init__(f"on {sample}" + (f": {detail}" if detail else ""))


class MultipleCalls(_SampleError):
    kind = "MultipleCalls"


class WitnessDiverged(_SampleError):
    kind = "WitnessDiverged"


class BudgetExceeded(T2MError):
    kind = "BudgetExceeded"


class CallBudgetExceeded(T2MError):
    kind = "CallBudgetExceeded"


class QueryUndecidedWithinFuel(T2MError):
    kind = "QueryUndecidedWithinFuel"


class CertificateUnverifiable(T2MError):
    kind = "CertificateUnverifiable"


class CertificateRefuted(T2MError):
    kind = "CertificateRefuted"


class CircuitError(T2MError):
    kind = "CircuitError"
