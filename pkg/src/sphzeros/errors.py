"""Exception hierarchy shared by every module."""


class SphZerosError(Exception):
    """Base class; the CLI prints ``<ClassName>: <message>`` on one line."""


class DomainError(SphZerosError, ValueError):
    pass


class SingularityError(SphZerosError, ValueError):
    """A kernel was evaluated on (or numerically at) its diagonal singularity."""


class DegenerateConfigurationError(SphZerosError, ValueError):
    """Two points of a configuration are closer than the singularity floor."""

    def __init__(self, min_pair_chordal, floor):
        self.min_pair_chordal = float(min_pair_chordal)
        self.floor = float(floor)
        super().__init__(
            f"minimum pair chordal distance {self.min_pair_chordal:.3e} "
            f"is below the floor {self.floor:.1e}")


class UnsupportedSizeError(SphZerosError, ValueError):
    pass


class DivergenceError(SphZerosError, ValueError):
    pass


class OptimizationFailure(SphZerosError, RuntimeError):
    pass


class ConfigError(SphZerosError, ValueError):
    pass


class ParseError(SphZerosError, ValueError):
    pass
