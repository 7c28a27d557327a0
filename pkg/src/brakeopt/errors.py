"""Exception hierarchy. Every error carries a stable CLI exit code."""


class BrakeOptError(Exception):
    """Base class for all brakeopt errors."""

    exit_code = 20


class ParseError(BrakeOptError):
    """Config file is structurally broken (bad syntax, unknown or missing key)."""

    exit_code = 10

    def __init__(self, message, *, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class ValidationError(BrakeOptError):
    """A domain invariant is violated by an input value."""

    exit_code = 11

    def __init__(self, invariant, value):
        self.invariant = invariant
        self.value = value
        super().__init__(f"{invariant}: got {value!r}")


class SingularDenominator(BrakeOptError):
    """A closed-form denominator is too close to zero to evaluate."""

    exit_code = 12

    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(f"denominator {name} is singular: |{value!r}| below tolerance")


class SingularSystem(BrakeOptError):
    """The assembled equilibrium system is rank deficient."""

    exit_code = 13


class MeanOutOfSupport(BrakeOptError):
    """Requested mean lies outside the open support interval."""

    exit_code = 14

    def __init__(self, lo, hi, mean):
        self.lo = lo
        self.hi = hi
        self.mean = mean
        super().__init__(f"target mean {mean!r} not inside ({lo!r}, {hi!r})")


class InsufficientSamples(BrakeOptError):
    """Too few samples for the requested statistic."""

    exit_code = 15


class DegenerateSample(BrakeOptError):
    """Sample has zero spread; a density estimate is undefined."""

    exit_code = 16


class DegenerateEnsemble(BrakeOptError):
    """Ensemble has zero dispersion while the objective divides by it."""

    exit_code = 17


class NoFeasiblePoint(BrakeOptError):
    """No design in the search grid satisfies the probabilistic constraint."""

    exit_code = 18


class AllStartsFailed(BrakeOptError):
    """Every local-search start point failed to evaluate."""

    exit_code = 19
