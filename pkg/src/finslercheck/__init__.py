"""finslercheck: numerical verification of sprays, curvature tensors and
parallel 1-forms for Finsler metrics."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BadParameter,
    ConfigError,
    ConventionMismatch,
    DegenerateMetric,
    FinslerCheckError,
    InsufficientSamples,
    NonFiniteValue,
    NotPositive,
    ParseError,
    SingularDenominator,
)
