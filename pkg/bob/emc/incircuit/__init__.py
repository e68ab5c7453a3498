import logging

from .errors import *
from .network import *
from .characterization import *
from .extraction import *
from .simulator import *
from .touchstone import TouchstoneDocument, read_touchstone_document, parse_touchstone, write_touchstone
from .config import SessionConfig, parse_grid_spec, parse_band_spec, parse_quantity
from .auxiliary import *
from . import io

logging.getLogger("bob.emc.incircuit").addHandler(logging.NullHandler())


def get_config():
  """Returns a string containing the configuration information.
  """
  import bob.extension
  return bob.extension.get_config(__name__)

# gets sphinx autodoc done right - don't remove it
__all__ = [_ for _ in dir() if not _.startswith('_')]
