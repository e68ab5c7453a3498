#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Reading and writing one-port Touchstone (version 1) documents.

Only what an instrument exports for a reflection sweep is accepted: a single
option line with parameter ``S``, one of the ``RI``, ``MA`` and ``DB`` formats,
and three numbers per data row.  Any other content raises
:py:class:`bob.emc.incircuit.ParseError` naming the offending line.
"""

import cmath
import logging
import math
import re

import numpy

from .errors import FormatError, ParseError
from .network import ComplexSweep, FrequencyGrid, ReferenceImpedance, TINY, _check_role, as_z0

logger = logging.getLogger("bob.emc.incircuit")

#: Frequency units and their scale to hertz
UNITS = {'HZ': 1., 'KHZ': 1e3, 'MHZ': 1e6, 'GHZ': 1e9}

FORMATS = ('RI', 'MA', 'DB')

_PARAMETERS = ('S', 'Y', 'Z', 'H', 'G')

_NUMBER = re.compile(r'^[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?$')


def _number(token, line, what):
  if _NUMBER.match(token) is None:
    raise ParseError("cannot read %s from %r" % (what, token), line)
  value = float(token)
  if not math.isfinite(value):
    raise ParseError("%s %r is out of range" % (what, token), line)
  return value


class TouchstoneDocument(object):
  """The content of a one-port Touchstone file

  **Parameters**

  frequencies_hz : array_like
    Strictly increasing frequencies in hertz

  values : array_like
    One complex reflection coefficient per frequency

  unit : str
    Frequency unit of the option line

  format : str
    Number format of the option line: ``'RI'``, ``'MA'`` or ``'DB'``

  z0 : float
    Reference resistance of the option line

  comments : [str]
    Comment texts (without the leading ``!``) in order of appearance
  """

  def __init__(self, frequencies_hz, values, unit='HZ', format='RI', z0=50., comments=()):
    unit, format = unit.upper(), format.upper()
    if unit not in UNITS:
      raise ValueError("unknown frequency unit %r" % (unit,))
    if format not in FORMATS:
      raise ValueError("unknown Touchstone format %r" % (format,))
    self.grid = FrequencyGrid.explicit(frequencies_hz)
    self.values = numpy.array(values, dtype=numpy.complex128).ravel()
    if len(self.values) != len(self.grid):
      raise ValueError("document has %d values for %d frequencies" % (len(self.values), len(self.grid)))
    self.unit = unit
    self.format = format
    self.z0 = ReferenceImpedance(z0)
    self.comments = [str(c) for c in comments]

  def sweep(self):
    """The data as a ``reflection`` :py:class:`bob.emc.incircuit.ComplexSweep`"""
    return ComplexSweep(self.grid, self.values, 'reflection')

  def __repr__(self):
    return "TouchstoneDocument(%d points, %s %s, R %g)" % (len(self.grid), self.unit, self.format, self.z0.z0)


def _option_line(tokens, line):
  unit, parameter, format, z0 = 'GHZ', 'S', 'MA', 50.
  i = 0
  while i < len(tokens):
    token = tokens[i].upper()
    if token in UNITS:
      unit = token
    elif token in FORMATS:
      format = token
    elif token in _PARAMETERS:
      parameter = token
    elif token == 'R':
      if i + 1 == len(tokens):
        raise ParseError("option 'R' needs a reference resistance", line)
      i += 1
      z0 = _number(tokens[i], line, "reference resistance")
      if not z0 > 0.:
        raise ParseError("reference resistance must be positive, got %r" % tokens[i], line)
    else:
      raise ParseError("unknown option %r" % tokens[i], line)
    i += 1
  if parameter != 'S':
    raise ParseError("only S-parameter documents are supported, got %r" % parameter, line)
  return unit, format, z0


def _value(format, first, second, line):
  if format == 'RI':
    return complex(first, second)
  if format == 'MA':
    magnitude = first
  else:
    try:
      magnitude = 10. ** (first / 20.)
    except OverflowError:
      raise ParseError("magnitude of %g dB is out of range" % first, line)
  value = cmath.rect(magnitude, math.radians(second))
  if not (math.isfinite(value.real) and math.isfinite(value.imag)):
    raise ParseError("value is out of range", line)
  return value


def read_touchstone_document(text, source=None):
  """read_touchstone_document(text, [source]) -> TouchstoneDocument

  Parses Touchstone version 1 content of a one-port; ``text`` may be ``str`` or
  ``bytes`` (UTF-8).  Raises :py:class:`bob.emc.incircuit.ParseError`, with
  ``source`` as file name, on any deviation.
  """
  try:
    return _read(text)
  except ParseError as e:
    raise e.located(source)


def _read(text):
  if isinstance(text, bytes):
    try:
      text = text.decode('utf-8')
    except UnicodeDecodeError as e:
      raise ParseError("not UTF-8 text (byte %d)" % e.start, 0)

  options = None
  comments = []
  frequencies = []
  values = []
  for number, raw in enumerate(text.splitlines(), 1):
    content, bang, comment = raw.partition('!')
    if bang:
      comments.append(comment.strip())
    content = content.strip()
    if not content:
      continue
    if content.startswith('['):
      raise ParseError("keyword %s belongs to Touchstone version 2, only version 1 is supported" % content.split()[0], number)
    if content.startswith('#'):
      if options is not None:
        raise ParseError("second option line", number)
      if frequencies:
        raise ParseError("option line after data", number)
      options = _option_line(content[1:].split(), number)
      continue
    if options is None:
      raise ParseError("data before the option line", number)

    tokens = content.split()
    if len(tokens) != 3:
      raise ParseError("a one-port row has 3 columns, got %d" % len(tokens), number)
    unit, format, _ = options
    frequency = _number(tokens[0], number, "frequency") * UNITS[unit]
    if not (math.isfinite(frequency) and frequency > 0.):
      raise ParseError("frequency must be positive and finite, got %r" % tokens[0], number)
    if frequencies and frequency <= frequencies[-1]:
      raise ParseError("frequencies must be strictly increasing", number)
    first = _number(tokens[1], number, "value")
    second = _number(tokens[2], number, "value")
    frequencies.append(frequency)
    values.append(_value(format, first, second, number))

  if options is None:
    raise ParseError("no option line", 0)
  if not frequencies:
    raise ParseError("no data rows", 0)
  unit, format, z0 = options
  return TouchstoneDocument(frequencies, values, unit, format, z0, comments)


def parse_touchstone(text, source=None):
  """parse_touchstone(text, [source]) -> sweep, z0

  Reads a one-port Touchstone version 1 document into a ``reflection``
  :py:class:`bob.emc.incircuit.ComplexSweep` (frequencies in hertz) and its
  :py:class:`bob.emc.incircuit.ReferenceImpedance`.
  """
  document = read_touchstone_document(text, source)
  logger.debug("read %d Touchstone rows (%s %s R %g)", len(document.grid), document.unit, document.format, document.z0.z0)
  return document.sweep(), document.z0


def _format_float(value):
  return "%.17g" % value


def write_touchstone(sweep, z0=50., format='RI', unit='HZ', comments=()):
  """write_touchstone(sweep, [z0], [format], [unit], [comments]) -> str

  Renders a ``reflection`` sweep as a one-port Touchstone version 1 document.
  Values are written with ten significant digits; frequencies exactly.
  Points without a value (``SINGULAR``) cannot be written and raise
  :py:class:`bob.emc.incircuit.FormatError`.
  """
  _check_role(sweep, 'reflection')
  format, unit = format.upper(), unit.upper()
  if format not in FORMATS:
    raise ValueError("unknown Touchstone format %r" % (format,))
  if unit not in UNITS:
    raise ValueError("unknown frequency unit %r" % (unit,))
  missing = numpy.flatnonzero(~numpy.isfinite(sweep.values))
  if missing.size:
    raise FormatError("reflection has no finite value at point %d (%g Hz)" % (missing[0], sweep.grid.points[missing[0]]))

  lines = ["! %s" % c if c else "!" for c in comments]
  lines.append("# %s S %s R %s" % (unit, format, _format_float(as_z0(z0))))
  scale = UNITS[unit]
  for f, g in zip(sweep.grid.points, sweep.values):
    if format == 'RI':
      first, second = g.real, g.imag
    elif format == 'MA':
      first, second = abs(g), math.degrees(cmath.phase(g))
    else:
      first, second = 20. * math.log10(max(abs(g), TINY)), math.degrees(cmath.phase(g))
    lines.append("%s %.9e %.9e" % (_format_float(f / scale), first, second))
  return "\n".join(lines) + "\n"
