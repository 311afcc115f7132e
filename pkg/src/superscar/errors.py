"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line harness:
2 for bad input, 3 for analysis failures, 4 for broken internal invariants.
"""


class SuperscarError(Exception):
    exit_code = 3


class InputError(SuperscarError):
    exit_code = 2


class AnalysisError(SuperscarError):
    exit_code = 3


class InvariantViolation(SuperscarError):
    exit_code = 4


# polygon geometry
class AngleSumMismatch(InputError):
    pass


class NonClosing(InputError):
    pass


class SelfIntersecting(InputError):
    pass


class GluingNotTranslation(InvariantViolation):
    pass


class HitConePoint(AnalysisError):
    def __init__(self, distance_remaining, message=None):
        self.distance_remaining = float(distance_remaining)
        super().__init__(
            message or f"ray hit a cone point with {self.distance_remaining:.6g} remaining"
        )


# cylinders
class NotPeriodic(AnalysisError):
    pass


class ConePointSeed(AnalysisError):
    pass


class CapExceeded(AnalysisError):
    pass


class BoundExceeded(InputError):
    pass


class SearchExhausted(AnalysisError):
    pass


# wave packets / quasimodes
class CutoffTooTight(InputError):
    pass


class EnergyOutOfRange(InputError):
    pass


class CylinderTooNarrow(InputError):
    pass


class QuadratureUnderresolved(AnalysisError):
    pass


class ContainmentViolated(AnalysisError):
    pass


class InsufficientSpan(AnalysisError):
    pass


class GridTooCoarse(InputError):
    pass
