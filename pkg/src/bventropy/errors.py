"""Exception hierarchy shared by all modules."""


class BVEntropyError(Exception):
    """Base class for all library-specific errors."""


# --- metric space validation ---

class AsymmetricMatrix(BVEntropyError):
    pass


class NonzeroDiagonal(BVEntropyError):
    pass


class TriangleViolation(BVEntropyError):
    def __init__(self, i, j, via, lhs, rhs):
        self.triple = (i, j, via)
        super().__init__(
            f"triangle inequality fails at ({i},{j},{via}): "
            f"d[{i}][{j}]={lhs} > d[{i}][{via}]+d[{via}][{j}]={rhs}"
        )


# --- covering / packing ---

class ExactModeTooLarge(BVEntropyError):
    pass


class EmptyWindow(BVEntropyError):
    pass


class ScaleViolation(BVEntropyError):
    pass


# --- gauges ---

class GaugeViolation(BVEntropyError):
    pass


class NotConvex(GaugeViolation):
    pass


class NotVanishingAtZero(GaugeViolation):
    pass


class NotPositive(GaugeViolation):
    pass


# --- codec ---

class EpsilonTooLarge(BVEntropyError):
    pass


class NetIncomplete(BVEntropyError):
    pass


class BudgetViolation(BVEntropyError):
    pass


class CorruptStream(BVEntropyError):
    pass


# --- witness families ---

class DegenerateBall(BVEntropyError):
    pass


class InfeasibleConstraint(BVEntropyError):
    pass


class LengthMismatch(BVEntropyError):
    pass


class SeparationFailure(BVEntropyError):
    pass


# --- ensembles ---

class DomainMismatch(BVEntropyError):
    pass


class InsufficientRows(BVEntropyError):
    pass


# --- conservation laws ---

class OutOfRange(BVEntropyError):
    pass


class UnstableConfig(BVEntropyError):
    pass


class DomainTooSmall(BVEntropyError):
    pass


class GaugeDegenerate(BVEntropyError):
    pass


class InfiniteDegeneracy(BVEntropyError):
    pass


# --- CLI ---

class ConfigError(BVEntropyError):
    pass
