"""City-level supply-chain network analytics from firm-to-firm wire transfers.

Pipeline stages: ingest CSVs -> per-year flow graphs -> network measures ->
concentration indices and DEA courts efficiency -> fixed-effects panel
regression. A seeded synthetic generator stands in for the confidential
source data. See the cli module (`cityflows --help`) for orchestration.
"""

from ._backend import backend_name
from .errors import CityflowsError, DataError, NumericalError

__version__ = "0.1.0"

__all__ = [
    "CityflowsError",
    "DataError",
    "NumericalError",
    "backend_name",
    "__version__",
]
