"""Statistical-CSI multi-stream precoding for cooperative multi-satellite massive MIMO."""

from .config import ConfigurationError, NumericalError, SolverOptions, SystemConfig

__all__ = ["SystemConfig", "SolverOptions", "ConfigurationError", "NumericalError"]
__version__ = "0.1.0"
