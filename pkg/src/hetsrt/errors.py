"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A physical or numerical parameter is outside its valid domain."""


class SchemeInfeasibleError(ValueError):
    """The interference-cancelation power budget cannot be met.

    Raised when the small-to-macro power ratio exceeds the cancelation
    bound min_i sigma2_antenna_mu[i] / sigma2_sbs_mu for some antenna.
    """


class ModelAssumptionError(ValueError):
    """A closed form was requested outside its modeling assumptions
    (e.g. an i.i.d.-only expression on a non-i.i.d. antenna set)."""


class ComplexityLimitError(ValueError):
    """Exact subset enumeration was requested for an antenna set too large
    to enumerate (non-i.i.d. gains with more than 20 antennas)."""


class ConfigError(ValueError):
    """A configuration file is malformed or contains unknown keys."""
