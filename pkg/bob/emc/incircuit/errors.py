#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Exceptions raised by :py:mod:`bob.emc.incircuit`.

Numerical degeneracies at single frequency points are never raised; they are
carried in per-point :py:class:`bob.emc.incircuit.Flag` arrays instead.
"""


class IncircuitError(Exception):
  """Base class of all errors raised by this package"""


class GridMismatch(IncircuitError, ValueError):
  """Two sweeps that must share a frequency grid do not

  **Attributes**

  index : int
    The first point at which the grids differ (or the length of the shorter
    grid, if one grid is a prefix of the other)
  """

  def __init__(self, index, message=None):
    self.index = index
    super(GridMismatch, self).__init__(message or
        "frequency grids differ starting at point %d" % index)


class RoleMismatch(IncircuitError, ValueError):
  """A sweep was given where a sweep of another role was expected"""


class SpanError(IncircuitError, ValueError):
  """Frequencies fall outside of the span of the available data"""


class FormatError(IncircuitError, ValueError):
  """Content of a calibration, model or CSV file is not acceptable"""


class ParseError(IncircuitError, ValueError):
  """A document could not be parsed

  **Attributes**

  line : int
    1-based line number of the offending line, 0 for problems concerning the
    whole document

  source : str or None
    The name of the file being parsed, if known
  """

  def __init__(self, message, line=0, source=None):
    self.message = message
    self.line = line
    self.source = source
    super(ParseError, self).__init__(str(self))

  def __str__(self):
    where = self.source or "<input>"
    return "%s:%d: %s" % (where, self.line, self.message)

  def located(self, source):
    """Returns a copy of this error attributed to the given file name"""
    return ParseError(self.message, self.line, source)
