"""Exception hierarchy shared by every qthermo module."""


class QThermoError(Exception):
    """Base class for all library errors."""


class NonHermitianInput(QThermoError, ValueError):
    pass


class NotAState(QThermoError, ValueError):
    """Matrix fails unit trace or positivity."""


class DimensionMismatch(QThermoError, ValueError):
    pass


class WrongDimension(QThermoError, ValueError):
    pass


class BlochOutOfBall(QThermoError, ValueError):
    pass


class BoundaryState(QThermoError, ValueError):
    """Bloch vector too close to the unit sphere for arctanh to be finite."""


class SupportViolation(QThermoError, ValueError):
    """Relative entropy diverges: the second argument lacks support where the first has weight."""


class RankDeficient(QThermoError, ValueError):
    pass


class NonUniqueIFP(QThermoError):
    """Null space of the generator is not one-dimensional."""


class DefectiveGenerator(QThermoError):
    pass


class DegenerateFixedPoint(QThermoError, ValueError):
    pass


class ComplexRoot(QThermoError, ValueError):
    pass


class QuadratureFailure(QThermoError):
    pass


class DegenerateDenominator(QThermoError, ValueError):
    pass


class OutOfDomain(QThermoError, ValueError):
    pass


class StaleFixedPoint(QThermoError, ValueError):
    """Supplied fixed point is not annihilated by the generator."""


class NoPositiveEigenvalue(QThermoError):
    pass


class EpsilonUnderflow(QThermoError):
    pass


class GridTooCoarse(QThermoError):
    pass


class StepRejected(QThermoError):
    pass


class ConfigError(QThermoError, ValueError):
    pass
