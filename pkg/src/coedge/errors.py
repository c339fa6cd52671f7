"""Exception types shared across the package."""


class CoEdgeError(Exception):
    pass


class ParseError(CoEdgeError, ValueError):
    """A model, cluster, scenario or schedule document could not be read."""


class InvariantViolation(CoEdgeError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class ShapeUnderflow(CoEdgeError, ValueError):
    pass


class MissingBandwidth(CoEdgeError, KeyError):
    def __init__(self, src, dst):
        super().__init__(f"no bandwidth defined from device {src} to device {dst}")
        self.src = src
        self.dst = dst

    def __str__(self):
        return self.args[0]


class NonPositiveInput(CoEdgeError, ValueError):
    pass


class BadPartition(CoEdgeError, ValueError):
    pass


class RepairFailed(CoEdgeError):
    """Rounding could not restore the neighbour threshold without emptying a device."""


class PlanInvalid(CoEdgeError, ValueError):
    pass


class NumericalBreakdown(CoEdgeError, ArithmeticError):
    pass


class InstanceTooLarge(CoEdgeError, ValueError):
    pass


class HaloSpanViolation(CoEdgeError, ValueError):
    """A halo would have to be assembled from three or more devices."""
