"""Typed failures. Each class carries the CLI exit code it maps to."""


class ParalabError(Exception):
    exit_code = 3
    kind = "error"

    def to_json(self):
        return {"error": type(self).__name__, "kind": self.kind, "message": str(self)}


class PreconditionError(ParalabError, ValueError):
    exit_code = 2
    kind = "precondition"


class NumericalError(ParalabError, ArithmeticError):
    exit_code = 3
    kind = "convergence"


class ResourceError(ParalabError):
    exit_code = 4
    kind = "resource"


class DomainError(PreconditionError):
    pass


class RangeError(PreconditionError):
    pass


class NotParabolicError(PreconditionError):
    pass


class BranchError(PreconditionError):
    pass


class RayError(PreconditionError):
    pass


class EscapeError(PreconditionError):
    pass


class NotInvertibleError(PreconditionError):
    pass


class ObstructionError(PreconditionError):
    pass


class DetectionError(NumericalError):
    pass


class PrecisionError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class NonMonotoneError(NumericalError):
    pass


class TruncationError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class InversionError(NumericalError):
    pass
