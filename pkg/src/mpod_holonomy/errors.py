"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 2 for model errors,
3 for numerical aborts, 4 for frame mismatches.
"""


class HolonomyError(Exception):
    exit_code = 2


class InvalidLayer(HolonomyError, ValueError):
    pass


class InvalidHop(HolonomyError, ValueError):
    pass


class ArityMismatch(HolonomyError, ValueError):
    pass


class DecoupledSystem(HolonomyError, ValueError):
    pass


class SpectralAnomaly(HolonomyError, ArithmeticError):
    pass


class InvalidOrder(HolonomyError, ValueError):
    pass


class SingularParametrization(HolonomyError, ValueError):
    pass


class NotALoop(HolonomyError, ValueError):
    pass


class InvalidSpec(HolonomyError, ValueError):
    pass


class NoSolution(HolonomyError, ValueError):
    pass


class SingularSample(HolonomyError, ValueError):
    pass


class DegeneracyCrossing(HolonomyError, ArithmeticError):
    exit_code = 3


class StepTooCoarse(HolonomyError, ArithmeticError):
    exit_code = 3


class NotAdiabatic(HolonomyError, ArithmeticError):
    exit_code = 3


class FrameMismatch(HolonomyError, ValueError):
    exit_code = 4
