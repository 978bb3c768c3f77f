"""Exception types raised by the solvers.

Every error carries a short ``code`` string so the CLI can map failures
onto exit codes without string matching on messages.
"""


class FptError(Exception):
    code = "FPT_ERROR"


class UnsupportedFiniteOp(FptError):
    code = "UNSUPPORTED_FINITE_OP"


class MultiDoorway(FptError):
    code = "MULTI_DOORWAY"


class Disconnected(FptError):
    code = "DISCONNECTED"


class Degenerate(FptError):
    code = "DEGENERATE"


class RepeatedPole(FptError):
    code = "REPEATED_POLE"


class UnstablePole(FptError):
    code = "UNSTABLE_POLE"


class GridTooCoarse(FptError):
    code = "GRID_TOO_COARSE"


class CallableRange(FptError):
    code = "CALLABLE_RANGE"


class NonConvergent(FptError):
    code = "NONCONVERGENT"


class DomainError(FptError, ValueError):
    code = "DOMAIN"


class Undefined(FptError):
    code = "UNDEFINED"
