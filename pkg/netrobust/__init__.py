# netrobust Package
from . import config, core, data, experiments, notifications, utils

__version__ = "0.1.0"
