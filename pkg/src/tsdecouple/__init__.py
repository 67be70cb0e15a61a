"""Time-series econometrics for comparing two co-moving index series."""

__version__ = "0.1.0"

from .errors import EngineError  # noqa: E402
from .series_core import TimeSeries  # noqa: E402

__all__ = ["EngineError", "TimeSeries", "__version__"]
