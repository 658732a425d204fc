"""Exception hierarchy shared by all cityflows modules."""


class CityflowsError(Exception):
    """Base class for all cityflows errors."""


class DataError(CityflowsError):
    """Structurally bad or inconsistent input data (fatal for the stage)."""


class NumericalError(CityflowsError):
    """A computation has no defined result or failed to converge fatally."""
