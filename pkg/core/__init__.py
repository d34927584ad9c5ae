from .errors import ConfigError, NumericError  # noqa: F401
from .grid import Grid  # noqa: F401
from .potentials import Potential, Temperature  # noqa: F401
from .logger import RunLogger  # noqa: F401
