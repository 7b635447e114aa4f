"""Exception hierarchy.

Two families matter to callers: `PreconditionError` (bad input, guards,
violated hypotheses) and `SolverError` (a numerical routine failed to
reach its target). The CLI maps them to exit codes 2 and 3.
"""


class CqidError(Exception):
    pass


class PreconditionError(CqidError, ValueError):
    pass


class SolverError(CqidError, RuntimeError):
    pass


class NonHermitian(PreconditionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class ShapeMismatch(PreconditionError):
    pass


class SizeMismatch(PreconditionError):
    pass


class SemanticsMismatch(PreconditionError):
    pass


class DomainError(PreconditionError):
    pass


class DimGuardExceeded(PreconditionError):
    pass


class BadLetter(PreconditionError):
    pass


class NotCommuting(PreconditionError):
    pass


class PreconditionViolated(PreconditionError):
    pass


class InvariantViolation(PreconditionError):
    """A value failed one of its type invariants; `check` names which one."""

    def __init__(self, check: str, detail: str = ""):
        self.check = check
        msg = f"invariant violated: {check}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ParseError(PreconditionError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class NumericalFailure(SolverError):
    pass


class ConvergenceFailure(SolverError):
    pass


class SolverFailure(SolverError):
    pass


class NoCodeFound(SolverError):
    pass


class ConstructionExhausted(SolverError):
    pass


class ComponentCodeFailure(SolverError):
    pass
