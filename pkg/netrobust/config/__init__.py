# Config module
from .settings import *
