#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Two-port (ABCD) algebra and the reflection/impedance primitives.

All frequency-dependent quantities are stored as :py:class:`numpy.ndarray`
objects indexed by the points of a :py:class:`FrequencyGrid`; arrays held by the
value types in this module are made read-only on construction.
"""

import collections
import enum
import logging

import numpy

from .errors import GridMismatch, RoleMismatch, SpanError

logger = logging.getLogger("bob.emc.incircuit")

#: Magnitude below which a denominator is considered to vanish
TINY = 1e-300

#: Distance of a reflection coefficient from +1 below which the impedance is infinite
GAMMA_POLE = 1e-12


class Flag(enum.IntFlag):
  """Per-point quality flags carried by sweeps and calibrations"""

  NONE = 0
  SINGULAR = 1
  ILL_CONDITIONED = 2
  EXTRAPOLATED = 4
  INFINITE = 8
  NON_PASSIVE = 16
  NEGATIVE_REAL = 32

  @classmethod
  def render(cls, value):
    """render(value) -> str

    Returns the ``|``-separated names of the flags set in ``value``; an empty
    string if no flag is set.
    """
    value = int(value)
    return "|".join(f.name for f in cls if f.value and value & f.value)

  @classmethod
  def parse(cls, text):
    """parse(text) -> int

    Inverse of :py:meth:`render`.  Raises :py:class:`KeyError` on unknown names.
    """
    value = 0
    for name in text.split("|"):
      name = name.strip()
      if name:
        value |= cls[name].value
    return value


def _readonly(array):
  array.flags.writeable = False
  return array


class _Open(object):
  """The open-circuit termination: an exactly infinite impedance"""

  _instance = None

  def __new__(cls):
    if cls._instance is None:
      cls._instance = super(_Open, cls).__new__(cls)
    return cls._instance

  def __repr__(self):
    return "OPEN"

  def __reduce__(self):
    return (_Open, ())


#: The distinguished open-circuit value, usable wherever an impedance is expected
OPEN = _Open()


def as_z0(z0):
  """as_z0(z0) -> float

  Returns the reference impedance in ohms from a :py:class:`ReferenceImpedance`
  or a plain number, validating it on the way.
  """
  if isinstance(z0, ReferenceImpedance):
    return z0.z0
  return ReferenceImpedance(z0).z0


class ReferenceImpedance(object):
  """The (real) reference impedance of the network analyzer

  **Parameters**

  z0 : float
    Reference impedance in ohms, finite and positive
  """

  def __init__(self, z0=50.):
    if isinstance(z0, ReferenceImpedance):
      z0 = z0.z0
    z0 = float(z0)
    if not numpy.isfinite(z0) or z0 <= 0.:
      raise ValueError("reference impedance must be finite and positive, got %r" % z0)
    self.z0 = z0

  def __float__(self):
    return self.z0

  def __eq__(self, other):
    return isinstance(other, ReferenceImpedance) and self.z0 == other.z0

  def __ne__(self, other):
    return not self == other

  def __hash__(self):
    return hash(self.z0)

  def __repr__(self):
    return "ReferenceImpedance(%r)" % self.z0


class FrequencyGrid(object):
  """An ordered set of sweep frequencies

  **Parameters**

  points : array_like
    Frequencies in hertz, finite, positive and strictly increasing

  spacing : str
    One of ``'linear'``, ``'logarithmic'`` or ``'explicit'``; informational
  """

  SPACINGS = ('linear', 'logarithmic', 'explicit')

  def __init__(self, points, spacing='explicit'):
    if spacing not in self.SPACINGS:
      raise ValueError("unknown grid spacing %r, expected one of %s" % (spacing, ", ".join(self.SPACINGS)))
    points = numpy.array(points, dtype=numpy.float64).ravel()
    if points.size == 0:
      raise ValueError("a frequency grid needs at least one point")
    if not numpy.all(numpy.isfinite(points)) or numpy.any(points <= 0.):
      raise ValueError("grid frequencies must be finite and positive")
    if numpy.any(numpy.diff(points) <= 0.):
      index = int(numpy.argmax(numpy.diff(points) <= 0.)) + 1
      raise ValueError("grid frequencies must be strictly increasing (point %d)" % index)
    self.points = _readonly(points)
    self.spacing = spacing

  @classmethod
  def linear(cls, start, stop, points):
    """Grid of ``points`` frequencies equally spaced between ``start`` and ``stop``"""
    return cls(numpy.linspace(float(start), float(stop), int(points)), 'linear')

  @classmethod
  def logarithmic(cls, start, stop, points):
    """Grid of ``points`` frequencies equally spaced in log-frequency"""
    return cls(numpy.geomspace(float(start), float(stop), int(points)), 'logarithmic')

  @classmethod
  def explicit(cls, points):
    """Grid of the given frequencies, e.g. as read from a file"""
    return cls(points, 'explicit')

  @classmethod
  def default(cls):
    """The standard 201-point log sweep from 150 kHz to 30 MHz"""
    return cls.logarithmic(150e3, 30e6, 201)

  def __len__(self):
    return len(self.points)

  def __iter__(self):
    return iter(self.points)

  @property
  def start(self):
    return float(self.points[0])

  @property
  def stop(self):
    return float(self.points[-1])

  @property
  def span(self):
    """(start, stop) in hertz"""
    return (self.start, self.stop)

  @property
  def omega(self):
    """Angular frequencies in rad/s"""
    return 2. * numpy.pi * self.points

  def first_mismatch(self, other):
    """first_mismatch(other) -> int or None

    Returns the index of the first point where this grid and ``other`` differ,
    ``None`` if both are identical.
    """
    n = min(len(self), len(other))
    different = numpy.flatnonzero(self.points[:n] != other.points[:n])
    if different.size:
      return int(different[0])
    if len(self) != len(other):
      return n
    return None

  def check_same(self, other):
    """Raises :py:class:`bob.emc.incircuit.GridMismatch` unless ``other`` is identical"""
    index = self.first_mismatch(other)
    if index is not None:
      raise GridMismatch(index)

  def within(self, lo, hi):
    """within(lo, hi) -> FrequencyGrid

    The sub-grid of points inside ``[lo, hi]``; raises :py:class:`ValueError`
    if no point is left.
    """
    keep = (self.points >= lo) & (self.points <= hi)
    return FrequencyGrid(self.points[keep], 'explicit')

  def __eq__(self, other):
    return isinstance(other, FrequencyGrid) and self.first_mismatch(other) is None

  def __ne__(self, other):
    return not self == other

  __hash__ = None

  def __repr__(self):
    return "FrequencyGrid(%d points, %g Hz - %g Hz, %s)" % (len(self), self.start, self.stop, self.spacing)


class AbcdMatrix(object):
  """A single 2x2 transmission (ABCD) matrix

  ``b`` is in ohms, ``c`` in siemens, ``a`` and ``d`` are dimensionless.  When
  ``reciprocal`` is set, the determinant is checked to be one within
  ``1e-12 * (1 + |ad| + |bc|)``.
  """

  def __init__(self, a, b, c, d, reciprocal=False):
    self.a, self.b, self.c, self.d = (complex(v) for v in (a, b, c, d))
    if not all(numpy.isfinite(v) for v in (self.a, self.b, self.c, self.d)):
      raise ValueError("ABCD entries must be finite")
    self.reciprocal = bool(reciprocal)
    if self.reciprocal and not self.is_reciprocal():
      raise ValueError("matrix declared reciprocal has determinant %r" % self.determinant())

  @classmethod
  def identity(cls):
    return cls(1., 0., 0., 1., reciprocal=True)

  @classmethod
  def from_array(cls, array, reciprocal=False):
    array = numpy.asarray(array)
    return cls(array[0, 0], array[0, 1], array[1, 0], array[1, 1], reciprocal)

  def as_array(self):
    return numpy.array([[self.a, self.b], [self.c, self.d]], dtype=numpy.complex128)

  def determinant(self):
    return self.a * self.d - self.b * self.c

  def is_reciprocal(self, tolerance=1e-12):
    ad, bc = self.a * self.d, self.b * self.c
    return abs(ad - bc - 1.) <= tolerance * (1. + abs(ad) + abs(bc))

  def __matmul__(self, other):
    return AbcdMatrix(
        self.a * other.a + self.b * other.c,
        self.a * other.b + self.b * other.d,
        self.c * other.a + self.d * other.c,
        self.c * other.b + self.d * other.d,
        self.reciprocal and other.reciprocal)

  def __repr__(self):
    return "AbcdMatrix(a=%r, b=%r, c=%r, d=%r)" % (self.a, self.b, self.c, self.d)


def abcd_of_series(z):
  """abcd_of_series(z) -> AbcdMatrix

  The two-port of an impedance ``z`` (ohms) in series: ``[1, z; 0, 1]``
  """
  return AbcdMatrix(1., z, 0., 1., reciprocal=True)


def abcd_of_shunt(y):
  """abcd_of_shunt(y) -> AbcdMatrix

  The two-port of an admittance ``y`` (siemens) in shunt: ``[1, 0; y, 1]``
  """
  return AbcdMatrix(1., 0., y, 1., reciprocal=True)


def matched_twoport(gain_db, z0=50.):
  """matched_twoport(gain_db, z0) -> AbcdMatrix

  A reflectionless, reciprocal two-port with flat transmission of ``gain_db``
  decibels in a ``z0`` system.  Negative values describe attenuators.
  """
  z0 = as_z0(z0)
  t = 10. ** (float(gain_db) / 20.)
  a = (1. + t * t) / (2. * t)
  b = z0 * (1. - t * t) / (2. * t)
  return AbcdMatrix(a, b, b / (z0 * z0), a, reciprocal=True)


def input_impedance(net, z_load):
  """input_impedance(net, z_load) -> complex or OPEN

  Impedance seen at port 1 of ``net`` when port 2 is terminated by ``z_load``,
  ``(a z + b) / (c z + d)``.  ``z_load`` may be :py:data:`OPEN`, in which case
  ``a / c`` is returned.  A vanishing denominator makes the result infinite,
  which is returned as :py:data:`OPEN`.
  """
  if z_load is OPEN:
    if abs(net.c) < TINY:
      return OPEN
    return net.a / net.c
  z_load = complex(z_load)
  denominator = net.c * z_load + net.d
  if abs(denominator) < TINY:
    logger.debug("singular termination of %r by %r", net, z_load)
    return OPEN
  return (net.a * z_load + net.b) / denominator


def gamma_from_z(z, z0=50.):
  """gamma_from_z(z, z0) -> complex

  Reflection coefficient ``(z - z0) / (z + z0)`` of impedance ``z``; exactly
  ``1`` for :py:data:`OPEN`.  At ``z = -z0`` the reflection is undefined and
  ``nan`` is returned (sweeps flag such points as ``SINGULAR``).
  """
  z0 = as_z0(z0)
  if z is OPEN:
    return complex(1.)
  z = complex(z)
  if abs(z + z0) < TINY:
    return complex(numpy.nan, numpy.nan)
  return (z - z0) / (z + z0)


def z_from_gamma(gamma, z0=50.):
  """z_from_gamma(gamma, z0) -> complex or OPEN

  Impedance ``z0 (1 + gamma) / (1 - gamma)``; :py:data:`OPEN` if ``gamma`` is
  within ``1e-12`` of one.
  """
  z0 = as_z0(z0)
  gamma = complex(gamma)
  if abs(1. - gamma) < GAMMA_POLE:
    return OPEN
  return z0 * (1. + gamma) / (1. - gamma)


class ComplexSweep(object):
  """One complex value per frequency of a grid

  **Parameters**

  grid : :py:class:`FrequencyGrid`
    The frequencies

  values : array_like
    One complex value per grid point.  Impedance sweeps encode infinite
    impedances as ``inf`` (flagged ``INFINITE``); any sweep may hold ``nan`` at
    points flagged ``SINGULAR``.

  role : str
    ``'reflection'``, ``'impedance_ohm'`` or ``'k_coefficient'``

  flags : array_like or None
    Per-point :py:class:`Flag` bits; reflections with ``|values| > 1`` are
    flagged ``NON_PASSIVE`` automatically
  """

  ROLES = ('reflection', 'impedance_ohm', 'k_coefficient')

  def __init__(self, grid, values, role='reflection', flags=None):
    if role not in self.ROLES:
      raise ValueError("unknown sweep role %r" % (role,))
    values = numpy.array(values, dtype=numpy.complex128).ravel()
    if len(values) != len(grid):
      raise ValueError("sweep has %d values for %d grid points" % (len(values), len(grid)))
    if flags is None:
      flags = numpy.zeros(len(grid), dtype=numpy.uint8)
    else:
      flags = numpy.array(flags, dtype=numpy.uint8).ravel()
      if len(flags) != len(grid):
        raise ValueError("sweep has %d flags for %d grid points" % (len(flags), len(grid)))

    singular = (flags & Flag.SINGULAR) != 0
    bad = ~numpy.isfinite(values) & ~singular
    if role != 'reflection':
      bad &= ~(numpy.isinf(values) & ((flags & Flag.INFINITE) != 0))
    if numpy.any(bad):
      raise ValueError("non-finite %s value at unflagged point %d" % (role, int(numpy.flatnonzero(bad)[0])))

    if role == 'reflection':
      with numpy.errstate(invalid='ignore'):
        active = numpy.abs(values) > 1.
      flags = numpy.where(active, flags | Flag.NON_PASSIVE, flags).astype(numpy.uint8)

    self.grid = grid
    self.values = _readonly(values)
    self.role = role
    self.flags = _readonly(flags)

  def __len__(self):
    return len(self.grid)

  def replace(self, **kwargs):
    """Returns a copy of this sweep with some constructor arguments replaced"""
    arguments = dict(grid=self.grid, values=self.values, role=self.role, flags=self.flags)
    arguments.update(kwargs)
    return ComplexSweep(**arguments)

  def count(self, flag):
    """Number of points carrying ``flag``"""
    return int(numpy.count_nonzero(self.flags & flag))

  @property
  def magnitude(self):
    return numpy.abs(self.values)

  @property
  def phase_deg(self):
    return numpy.degrees(numpy.angle(self.values))

  def __repr__(self):
    return "ComplexSweep(%s, %d points)" % (self.role, len(self))


def _check_role(sweep, role):
  if sweep.role != role:
    raise RoleMismatch("expected a %s sweep, got a %s sweep" % (role, sweep.role))


def reflection_sweep(impedance, z0=50.):
  """reflection_sweep(impedance, z0) -> ComplexSweep

  Vectorised :py:func:`gamma_from_z` over an ``impedance_ohm`` sweep.  Infinite
  impedances map exactly to one; points at ``z = -z0`` are flagged ``SINGULAR``.
  """
  _check_role(impedance, 'impedance_ohm')
  z0 = as_z0(z0)
  z = impedance.values
  flags = impedance.flags & ~numpy.uint8(Flag.INFINITE)
  infinite = numpy.isinf(z)
  with numpy.errstate(invalid='ignore', divide='ignore', over='ignore'):
    denominator = z + z0
    gamma = (z - z0) / denominator
    pole = ~infinite & (numpy.abs(denominator) < TINY)
  gamma = numpy.where(infinite, 1. + 0j, gamma)
  gamma = numpy.where(pole, numpy.nan + 0j, gamma)
  flags = numpy.where(pole, flags | Flag.SINGULAR, flags)
  if numpy.any(pole):
    logger.warning("%d point(s) with z = -z0 have no reflection coefficient", int(pole.sum()))
  return ComplexSweep(impedance.grid, gamma, 'reflection', flags)


def impedance_sweep(gamma, z0=50.):
  """impedance_sweep(gamma, z0) -> ComplexSweep

  Vectorised :py:func:`z_from_gamma` over a ``reflection`` sweep; infinite
  results are stored as ``inf`` and flagged ``INFINITE``.
  """
  _check_role(gamma, 'reflection')
  z0 = as_z0(z0)
  g = gamma.values
  with numpy.errstate(invalid='ignore', divide='ignore'):
    pole = numpy.abs(1. - g) < GAMMA_POLE
    z = z0 * (1. + g) / (1. - g)
  z = numpy.where(pole, complex(numpy.inf, 0.), z)
  flags = numpy.where(pole, gamma.flags | Flag.INFINITE, gamma.flags)
  flags = flags & ~numpy.uint8(Flag.NON_PASSIVE)
  return ComplexSweep(gamma.grid, z, 'impedance_ohm', flags)


class AbcdSweep(object):
  """One ABCD matrix per frequency of a grid

  **Parameters**

  grid : :py:class:`FrequencyGrid`
    The frequencies

  matrices : array_like
    Either an array of shape ``(N, 2, 2)`` or a sequence of
    :py:class:`AbcdMatrix`

  reciprocal : bool
    Declares the network reciprocal; every determinant is then checked
  """

  def __init__(self, grid, matrices, reciprocal=False):
    if len(matrices) and isinstance(matrices[0], AbcdMatrix):
      matrices = [m.as_array() for m in matrices]
    matrices = numpy.array(matrices, dtype=numpy.complex128)
    if matrices.ndim != 3 or matrices.shape[1:] != (2, 2):
      raise ValueError("ABCD sweep must have shape (N, 2, 2), got %s" % (matrices.shape,))
    if len(matrices) != len(grid):
      raise ValueError("ABCD sweep has %d matrices for %d grid points" % (len(matrices), len(grid)))
    if not numpy.all(numpy.isfinite(matrices)):
      raise ValueError("ABCD entries must be finite")
    self.grid = grid
    self.matrices = _readonly(matrices)
    self.reciprocal = bool(reciprocal)
    if self.reciprocal:
      ad = self.a * self.d
      bc = self.b * self.c
      error = numpy.abs(ad - bc - 1.) - 1e-12 * (1. + numpy.abs(ad) + numpy.abs(bc))
      if numpy.any(error > 0.):
        raise ValueError("network declared reciprocal violates det = 1 at point %d" % int(numpy.argmax(error > 0.)))

  @property
  def a(self):
    return self.matrices[:, 0, 0]

  @property
  def b(self):
    return self.matrices[:, 0, 1]

  @property
  def c(self):
    return self.matrices[:, 1, 0]

  @property
  def d(self):
    return self.matrices[:, 1, 1]

  def __len__(self):
    return len(self.grid)

  def __getitem__(self, index):
    return AbcdMatrix.from_array(self.matrices[index])

  def determinant(self):
    return self.a * self.d - self.b * self.c

  def input_impedance(self, z_load):
    """input_impedance(z_load) -> ComplexSweep

    Vectorised :py:func:`input_impedance`.  ``z_load`` is :py:data:`OPEN`, a
    scalar, an array with one value per point (``inf`` meaning open) or an
    ``impedance_ohm`` :py:class:`ComplexSweep` on the same grid.
    """
    flags = numpy.zeros(len(self), dtype=numpy.uint8)
    if isinstance(z_load, ComplexSweep):
      self.grid.check_same(z_load.grid)
      flags = z_load.flags & ~numpy.uint8(Flag.INFINITE)
      z_load = z_load.values
    if z_load is OPEN:
      z_load = numpy.full(len(self), numpy.inf, dtype=numpy.complex128)
    z_load = numpy.broadcast_to(numpy.asarray(z_load, dtype=numpy.complex128), (len(self),))
    is_open = numpy.isinf(z_load)
    finite_load = numpy.where(is_open, 0j, z_load)

    with numpy.errstate(invalid='ignore', divide='ignore'):
      numerator = numpy.where(is_open, self.a, self.a * finite_load + self.b)
      denominator = numpy.where(is_open, self.c, self.c * finite_load + self.d)
      infinite = numpy.abs(denominator) < TINY
      z = numpy.where(infinite, complex(numpy.inf, 0.), numerator / denominator)
    z = numpy.where(numpy.isnan(z_load), numpy.nan + 0j, z)
    flags = numpy.where(infinite, flags | Flag.INFINITE, flags)
    return ComplexSweep(self.grid, z, 'impedance_ohm', flags)

  def __repr__(self):
    return "AbcdSweep(%d points, reciprocal=%s)" % (len(self), self.reciprocal)


def identity_sweep(grid):
  """The transparent two-port at every point of ``grid``"""
  matrices = numpy.zeros((len(grid), 2, 2), dtype=numpy.complex128)
  matrices[:, 0, 0] = 1.
  matrices[:, 1, 1] = 1.
  return AbcdSweep(grid, matrices, reciprocal=True)


def series_sweep(grid, z):
  """Series impedance ``z`` (scalar or one value per point) as an :py:class:`AbcdSweep`"""
  matrices = identity_sweep(grid).matrices.copy()
  matrices[:, 0, 1] = z
  return AbcdSweep(grid, matrices, reciprocal=True)


def shunt_sweep(grid, y):
  """Shunt admittance ``y`` (scalar or one value per point) as an :py:class:`AbcdSweep`"""
  matrices = identity_sweep(grid).matrices.copy()
  matrices[:, 1, 0] = y
  return AbcdSweep(grid, matrices, reciprocal=True)


def constant_sweep(grid, matrix):
  """The same :py:class:`AbcdMatrix` repeated at every point of ``grid``"""
  matrices = numpy.repeat(matrix.as_array()[numpy.newaxis], len(grid), axis=0)
  return AbcdSweep(grid, matrices, matrix.reciprocal)


def cascade(first, second):
  """cascade(first, second) -> AbcdSweep

  Per-point matrix product ``first . second``: ``first`` is the network nearer
  to the instrument.  Both sweeps must share exactly the same grid, otherwise
  :py:class:`bob.emc.incircuit.GridMismatch` names the first differing point.
  """
  first.grid.check_same(second.grid)
  return AbcdSweep(first.grid, numpy.matmul(first.matrices, second.matrices),
      first.reciprocal and second.reciprocal)


#: A frequency band ``[lo, hi)`` in hertz
Band = collections.namedtuple('Band', 'lo hi')


def check_bands(bands, span=None):
  """check_bands(bands, span=None) -> [Band]

  Validates a list of ``(lo, hi)`` frequency ranges: each must have
  ``0 < lo < hi`` and, once sorted, consecutive bands may touch but not
  overlap.  When ``span`` is given, bands are clipped to it and those falling
  completely outside are dropped; if none is left,
  :py:class:`bob.emc.incircuit.SpanError` is raised.
  """
  result = sorted(Band(float(lo), float(hi)) for lo, hi in bands)
  for band in result:
    if not (0. < band.lo < band.hi) or not numpy.isfinite(band.hi):
      raise ValueError("invalid band %g Hz - %g Hz" % band)
  for previous, current in zip(result[:-1], result[1:]):
    if current.lo < previous.hi:
      raise ValueError("bands %g-%g Hz and %g-%g Hz overlap" % (previous + current))
  if span is not None:
    lo, hi = span
    result = [Band(max(b.lo, lo), min(b.hi, hi)) for b in result if b.hi > lo and b.lo < hi]
    if not result:
      raise SpanError("no band intersects %g Hz - %g Hz" % (lo, hi))
  return result


def band_mask(grid, band):
  """Boolean mask of the grid points in ``[band.lo, band.hi)``; the grid stop
  frequency belongs to a band ending at or above it"""
  f = grid.points
  upper = (f < band.hi) | ((f <= band.hi) & (band.hi >= grid.stop))
  return (f >= band.lo) & upper
