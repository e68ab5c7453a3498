#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Session configuration shared by the command line tools."""

import collections
import json
import logging
import re

import numpy

from .errors import FormatError
from .network import Band, FrequencyGrid, check_bands

logger = logging.getLogger("bob.emc.incircuit")

_SUFFIXES = {
  'p': 1e-12, 'n': 1e-9, 'u': 1e-6, 'µ': 1e-6, 'm': 1e-3,
  'k': 1e3, 'K': 1e3, 'M': 1e6, 'G': 1e9,
}

_QUANTITY = re.compile(r'^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([pnuµmkKMG]?)\s*(?:Hz|hz|HZ|ohm|Ohm|H|F)?\s*$')


def parse_quantity(text):
  """parse_quantity(text) -> float

  Reads a number with an optional SI suffix (``p n u m k M G``) and an optional
  unit, e.g. ``'150k'``, ``'2.2uH'``, ``'1e-9'`` or ``'30 MHz'``.
  """
  match = _QUANTITY.match(text)
  if match is None:
    raise ValueError("cannot read a quantity from %r" % (text,))
  value = float(match.group(1)) * _SUFFIXES.get(match.group(2), 1.)
  if not numpy.isfinite(value):
    raise ValueError("quantity %r is not finite" % (text,))
  return value


#: Parameters of a generated frequency grid
GridSpec = collections.namedtuple('GridSpec', 'start_hz stop_hz points spacing')

SPACINGS = ('log', 'linear')


def parse_grid_spec(text):
  """parse_grid_spec(text) -> GridSpec

  Reads ``START:STOP:POINTS[:log|linear]``; the spacing defaults to ``log``.
  """
  parts = text.split(':')
  if len(parts) not in (3, 4):
    raise ValueError("grid must be given as START:STOP:POINTS[:log|linear], got %r" % (text,))
  spacing = parts[3].strip().lower() if len(parts) == 4 else 'log'
  try:
    points = int(parts[2])
  except ValueError:
    raise ValueError("number of grid points must be an integer, got %r" % (parts[2],))
  return _check_grid(GridSpec(parse_quantity(parts[0]), parse_quantity(parts[1]), points, spacing))


def _check_grid(spec):
  if spec.spacing not in SPACINGS:
    raise ValueError("grid spacing must be one of %s, got %r" % (", ".join(SPACINGS), spec.spacing))
  if not 0. < spec.start_hz < spec.stop_hz:
    raise ValueError("grid needs 0 < start < stop, got %g and %g" % (spec.start_hz, spec.stop_hz))
  if spec.points < 2:
    raise ValueError("grid needs at least 2 points, got %d" % spec.points)
  return spec


def make_grid(spec):
  """make_grid(spec) -> FrequencyGrid"""
  if spec.spacing == 'linear':
    return FrequencyGrid.linear(spec.start_hz, spec.stop_hz, spec.points)
  return FrequencyGrid.logarithmic(spec.start_hz, spec.stop_hz, spec.points)


def parse_band_spec(text):
  """parse_band_spec(text) -> [Band]

  Reads ``LO-HI[,LO-HI...]`` with frequencies in hertz (SI suffixes allowed),
  e.g. ``150k-500k,500k-5M``.
  """
  bands = []
  for item in text.split(','):
    lo, dash, hi = item.strip().partition('-')
    if not dash:
      raise ValueError("band must be given as LO-HI, got %r" % (item,))
    bands.append(Band(parse_quantity(lo), parse_quantity(hi)))
  return check_bands(bands)


class SessionConfig(object):
  """Settings shared by the ``incircuit`` commands

  All fields are keyword arguments; unspecified fields take the defaults in
  :py:attr:`DEFAULTS`.  Objects are immutable: use :py:meth:`override` to
  derive a modified configuration.
  """

  DEFAULTS = collections.OrderedDict([
    ('grid', GridSpec(150e3, 30e6, 201, 'log')),
    ('z0', 50.),
    ('z_std', 50.),
    ('tol_singular', 1e-12),
    ('tol_cond', 1e-6),
    ('consistency_db', 3.),
    ('bands', (Band(150e3, 500e3), Band(500e3, 5e6), Band(5e6, 30e6))),
    ('output_dir', '.'),
    ('verbosity', 0),
    ('seed', 0),
    ('smooth_width', 1),
  ])

  def __init__(self, **kwargs):
    unknown = sorted(set(kwargs) - set(self.DEFAULTS))
    if unknown:
      raise ValueError("unknown configuration field(s): %s" % ", ".join(unknown))
    values = collections.OrderedDict(self.DEFAULTS)
    values.update(kwargs)

    grid = values['grid']
    if isinstance(grid, str):
      grid = parse_grid_spec(grid)
    elif isinstance(grid, dict):
      grid = GridSpec(**grid)
    values['grid'] = _check_grid(GridSpec(float(grid[0]), float(grid[1]), int(grid[2]), str(grid[3])))

    bands = values['bands']
    if isinstance(bands, str):
      bands = parse_band_spec(bands)
    values['bands'] = tuple(check_bands([Band(float(lo), float(hi)) for lo, hi in bands]))

    for name in ('z0', 'z_std', 'tol_singular', 'tol_cond', 'consistency_db'):
      values[name] = float(values[name])
      if not numpy.isfinite(values[name]) or values[name] <= 0.:
        raise ValueError("%s must be finite and positive, got %r" % (name, values[name]))
    for name in ('verbosity', 'seed', 'smooth_width'):
      values[name] = int(values[name])
    if values['verbosity'] < 0 or values['seed'] < 0:
      raise ValueError("verbosity and seed must not be negative")
    if values['smooth_width'] < 1:
      raise ValueError("smooth_width must be at least 1, got %d" % values['smooth_width'])
    values['output_dir'] = str(values['output_dir'])

    self.__dict__['_values'] = values

  def __getattr__(self, name):
    try:
      return self.__dict__['_values'][name]
    except KeyError:
      raise AttributeError(name)

  def __setattr__(self, name, value):
    raise AttributeError("SessionConfig is immutable, use override()")

  def override(self, **kwargs):
    """Returns a copy with the given fields replaced; ``None`` values are ignored"""
    values = collections.OrderedDict(self._values)
    values.update((k, v) for k, v in kwargs.items() if v is not None)
    return SessionConfig(**values)

  def make_grid(self):
    """The frequency grid described by the ``grid`` field"""
    return make_grid(self.grid)

  def to_dict(self):
    values = collections.OrderedDict(self._values)
    values['grid'] = collections.OrderedDict(self.grid._asdict())
    values['bands'] = [list(b) for b in self.bands]
    return values

  def __eq__(self, other):
    return isinstance(other, SessionConfig) and self._values == other._values

  def __ne__(self, other):
    return not self == other

  __hash__ = None

  def __repr__(self):
    return "SessionConfig(%s)" % ", ".join("%s=%r" % item for item in self._values.items())

  @classmethod
  def load(cls, path):
    """Reads a configuration from a JSON document; unknown keys are rejected"""
    with open(path) as f:
      try:
        data = json.load(f)
      except ValueError as e:
        raise FormatError("%s: not a JSON document: %s" % (path, e))
    if not isinstance(data, dict):
      raise FormatError("%s: configuration must be a JSON object" % path)
    try:
      config = cls(**data)
    except (TypeError, ValueError) as e:
      raise FormatError("%s: %s" % (path, e))
    logger.debug("loaded configuration from %s", path)
    return config
