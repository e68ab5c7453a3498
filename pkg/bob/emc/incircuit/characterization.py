#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Determination of the probe coefficients k1, k2 and k3.

The impedance beyond the characterized network relates to the reflection
coefficient measured at the instrument through the bilinear map
``Z = (k1 G + k2) / (G + k3)``.  The coefficients are obtained either from the
ABCD parameters of the network or from open, short and load standard
measurements taken at the position of the unknown impedance.
"""

import collections
import logging

import numpy
import scipy.ndimage

from .network import Flag, TINY, AbcdSweep, ComplexSweep, as_z0, band_mask, check_bands, _check_role, _readonly

logger = logging.getLogger("bob.emc.incircuit")

#: Default absolute threshold on ``|G_L - G_S|`` below which a point is singular
TOL_SINGULAR = 1e-12

#: Default absolute threshold on ``|G_L - G_S|`` below which a point is ill-conditioned
TOL_COND = 1e-6


def smooth_sweep(sweep, width):
  """smooth_sweep(sweep, width) -> ComplexSweep

  Moving average of ``width`` points over the real and imaginary parts of
  ``sweep``; the edges are extended with their nearest value.  ``width`` of one
  returns the sweep unchanged.
  """
  width = int(width)
  if width < 1:
    raise ValueError("smoothing width must be at least 1, got %d" % width)
  if width == 1:
    return sweep
  values = sweep.values
  smoothed = scipy.ndimage.uniform_filter1d(values.real, width, mode='nearest') + \
      1j * scipy.ndimage.uniform_filter1d(values.imag, width, mode='nearest')
  return sweep.replace(values=smoothed)


class OslSweeps(object):
  """The reflection coefficients measured with the open, short and load standards

  **Parameters**

  gamma_open, gamma_short, gamma_load : :py:class:`bob.emc.incircuit.ComplexSweep`
    ``reflection`` sweeps on exactly the same grid
  """

  def __init__(self, gamma_open, gamma_short, gamma_load):
    for sweep in (gamma_open, gamma_short, gamma_load):
      _check_role(sweep, 'reflection')
    gamma_open.grid.check_same(gamma_short.grid)
    gamma_open.grid.check_same(gamma_load.grid)
    self.gamma_open = gamma_open
    self.gamma_short = gamma_short
    self.gamma_load = gamma_load

  @property
  def grid(self):
    return self.gamma_open.grid

  def smoothed(self, width):
    """Returns the three sweeps passed through :py:func:`smooth_sweep`"""
    return OslSweeps(*(smooth_sweep(s, width) for s in self))

  def __iter__(self):
    return iter((self.gamma_open, self.gamma_short, self.gamma_load))

  def __len__(self):
    return len(self.grid)


class KCalibration(object):
  """The per-frequency coefficient triple of a characterized setup

  **Parameters**

  grid : :py:class:`bob.emc.incircuit.FrequencyGrid`
    The frequencies of the calibration

  k1, k2, k3 : array_like
    One complex value per point; ``k1`` and ``k2`` in ohms, ``k3``
    dimensionless.  The values at points flagged ``SINGULAR`` are replaced by
    ``nan``.

  z0 : float or :py:class:`bob.emc.incircuit.ReferenceImpedance`
    Reference impedance of the instrument

  z_std : float or None
    Value of the load standard in ohms (``None`` when derived from ABCD
    parameters)

  condition : array_like
    Non-negative conditioning metric per point

  flags : array_like or None
    Per-point ``SINGULAR`` / ``ILL_CONDITIONED`` bits

  provenance : str
    ``'from_abcd'`` or ``'from_osl'``

  metadata : dict
    Free-form description strings (probe, setup, date, ...)
  """

  PROVENANCES = ('from_abcd', 'from_osl')

  def __init__(self, grid, k1, k2, k3, z0=50., z_std=None, condition=None,
      flags=None, provenance='from_osl', metadata=None):

    if provenance not in self.PROVENANCES:
      raise ValueError("unknown calibration provenance %r" % (provenance,))
    n = len(grid)
    k = [numpy.array(v, dtype=numpy.complex128).ravel() for v in (k1, k2, k3)]
    if any(len(v) != n for v in k):
      raise ValueError("k1, k2 and k3 must have one value per grid point (%d)" % n)

    if flags is None:
      flags = numpy.zeros(n, dtype=numpy.uint8)
    flags = numpy.array(flags, dtype=numpy.uint8).ravel() & numpy.uint8(Flag.SINGULAR | Flag.ILL_CONDITIONED)
    if len(flags) != n:
      raise ValueError("calibration has %d flags for %d grid points" % (len(flags), n))

    if condition is None:
      condition = numpy.zeros(n)
    condition = numpy.array(condition, dtype=numpy.float64).ravel()
    if len(condition) != n:
      raise ValueError("calibration has %d conditioning values for %d grid points" % (len(condition), n))
    if numpy.any(~(condition >= 0.)):
      raise ValueError("conditioning metric must be non-negative")

    singular = (flags & Flag.SINGULAR) != 0
    for v in k:
      v[singular] = numpy.nan
      if not numpy.all(numpy.isfinite(v[~singular])):
        raise ValueError("non-finite k coefficient at a point not flagged SINGULAR")

    if z_std is not None:
      z_std = float(z_std)
      if not numpy.isfinite(z_std) or z_std <= 0.:
        raise ValueError("load standard must be finite and positive, got %r" % z_std)

    self.grid = grid
    self.k1, self.k2, self.k3 = (_readonly(v) for v in k)
    self.z0 = as_z0(z0)
    self.z_std = z_std
    self.condition = _readonly(condition)
    self.flags = _readonly(flags)
    self.provenance = provenance
    self.metadata = dict((str(key), str(value)) for key, value in (metadata or {}).items())

  def __len__(self):
    return len(self.grid)

  @property
  def singular(self):
    """Boolean mask of the points that carry no usable coefficients"""
    return (self.flags & Flag.SINGULAR) != 0

  def count(self, flag):
    """Number of points carrying ``flag``"""
    return int(numpy.count_nonzero(self.flags & flag))

  def sweep(self, name):
    """sweep(name) -> ComplexSweep

    One of the coefficients (``'k1'``, ``'k2'`` or ``'k3'``) as a
    ``k_coefficient`` sweep
    """
    if name not in ('k1', 'k2', 'k3'):
      raise KeyError(name)
    return ComplexSweep(self.grid, getattr(self, name), 'k_coefficient', self.flags)

  def replace(self, **kwargs):
    """Returns a copy of this calibration with some constructor arguments replaced"""
    arguments = dict(grid=self.grid, k1=self.k1, k2=self.k2, k3=self.k3, z0=self.z0,
        z_std=self.z_std, condition=self.condition, flags=self.flags,
        provenance=self.provenance, metadata=self.metadata)
    arguments.update(kwargs)
    return KCalibration(**arguments)

  def is_similar_to(self, other, r_epsilon=1e-9, a_epsilon=1e-12):
    """is_similar_to(other, [r_epsilon], [a_epsilon]) -> bool

    Compares the coefficients of both calibrations point by point, using
    relative and absolute tolerances; points singular in either calibration
    must coincide and are not compared.
    """
    if self.grid != other.grid:
      return False
    if not numpy.array_equal(self.singular, other.singular):
      return False
    usable = ~self.singular
    return all(numpy.allclose(getattr(self, k)[usable], getattr(other, k)[usable],
        rtol=r_epsilon, atol=a_epsilon) for k in ('k1', 'k2', 'k3'))

  def __repr__(self):
    return "KCalibration(%s, %d points, %d singular)" % (self.provenance, len(self), self.count(Flag.SINGULAR))


def conditioning_metric(inputs, z0=None):
  """conditioning_metric(inputs, [z0]) -> numpy.ndarray

  The per-point conditioning of the coefficient determination: ``|G_L - G_S|``
  for :py:class:`OslSweeps` and ``|z0 C + A|`` for an
  :py:class:`bob.emc.incircuit.AbcdSweep` (which requires ``z0``).
  """
  if isinstance(inputs, OslSweeps):
    return numpy.abs(inputs.gamma_load.values - inputs.gamma_short.values)
  if isinstance(inputs, AbcdSweep):
    if z0 is None:
      raise ValueError("the conditioning of an ABCD sweep depends on the reference impedance")
    return numpy.abs(as_z0(z0) * inputs.c + inputs.a)
  raise TypeError("cannot compute the conditioning of %r" % (inputs,))


def k_from_abcd(n, z0=50., metadata=None):
  """k_from_abcd(n, z0) -> KCalibration

  Coefficients of the characterized network ``n`` for reference impedance
  ``z0``::

    k1 = -(z0 D + B) / (z0 C + A)
    k2 = -(z0 D - B) / (z0 C + A)
    k3 =  (z0 C - A) / (z0 C + A)

  Points where ``|z0 C + A|`` vanishes are flagged ``SINGULAR``.
  """
  z0 = as_z0(z0)
  denominator = z0 * n.c + n.a
  condition = numpy.abs(denominator)
  singular = condition < TINY
  with numpy.errstate(invalid='ignore', divide='ignore'):
    k1 = -(z0 * n.d + n.b) / denominator
    k2 = -(z0 * n.d - n.b) / denominator
    k3 = (z0 * n.c - n.a) / denominator
  flags = numpy.where(singular, numpy.uint8(Flag.SINGULAR), numpy.uint8(0))
  if numpy.any(singular):
    logger.warning("%d point(s) of the network have |z0 C + A| = 0", int(singular.sum()))
  return KCalibration(n.grid, k1, k2, k3, z0=z0, z_std=None, condition=condition,
      flags=flags, provenance='from_abcd', metadata=metadata)


def k_from_osl(osl, z_std=50., tol_singular=TOL_SINGULAR, tol_cond=TOL_COND, z0=50.,
    smooth=1, metadata=None):
  """k_from_osl(osl, z_std, [tol_singular], [tol_cond], [z0], [smooth], [metadata]) -> KCalibration

  Coefficients from the open, short and load standards::

    k1 = z_std (G_L - G_O) / (G_L - G_S)
    k2 = z_std G_S (G_O - G_L) / (G_L - G_S)
    k3 = -G_O

  **Parameters**

  osl : :py:class:`OslSweeps`
    The three standard measurements

  z_std : float
    The value of the load standard in ohms; the result does not depend on the
    reference impedance of the instrument

  tol_singular, tol_cond : float
    Points with ``|G_L - G_S| < tol_singular`` are flagged ``SINGULAR`` and
    carry no coefficients, points with ``tol_singular <= |G_L - G_S| <
    tol_cond`` are flagged ``ILL_CONDITIONED``

  z0 : float
    Reference impedance of the instrument, recorded in the calibration

  smooth : int
    Width of the moving average applied to the standards first (1: none)
  """
  z_std = float(z_std)
  if not numpy.isfinite(z_std) or z_std <= 0.:
    raise ValueError("load standard must be finite and positive, got %r" % z_std)
  if not (tol_singular > 0. and tol_cond > 0.):
    raise ValueError("conditioning thresholds must be positive")

  if smooth != 1:
    logger.info("  -> Smoothing the standards over %d points", smooth)
    osl = osl.smoothed(smooth)

  g_open, g_short, g_load = (s.values for s in osl)
  denominator = g_load - g_short
  condition = numpy.abs(denominator)
  invalid = numpy.zeros(len(osl), dtype=bool)
  for s in osl:
    invalid |= (s.flags & Flag.SINGULAR) != 0
  invalid |= ~numpy.isfinite(condition)
  condition = numpy.where(invalid, 0., condition)

  singular = invalid | (condition < tol_singular)
  ill = ~singular & (condition < tol_cond)

  with numpy.errstate(invalid='ignore', divide='ignore'):
    k1 = z_std * (g_load - g_open) / denominator
    k2 = z_std * g_short * (g_open - g_load) / denominator
  k3 = -g_open

  flags = numpy.zeros(len(osl), dtype=numpy.uint8)
  flags[singular] |= numpy.uint8(Flag.SINGULAR)
  flags[ill] |= numpy.uint8(Flag.ILL_CONDITIONED)
  if numpy.any(singular):
    logger.warning("%d point(s) with |G_L - G_S| < %g flagged SINGULAR", int(singular.sum()), tol_singular)
  if numpy.any(ill):
    logger.warning("%d point(s) with |G_L - G_S| < %g flagged ILL_CONDITIONED", int(ill.sum()), tol_cond)
  logger.info("  -> Characterized %d points from the open/short/load standards", len(osl))

  return KCalibration(osl.grid, k1, k2, k3, z0=z0, z_std=z_std, condition=condition,
      flags=flags, provenance='from_osl', metadata=metadata)


#: Conditioning statistics of one band of a calibration
BandCondition = collections.namedtuple('BandCondition',
    'band points min_condition median_condition singular ill_conditioned')


def conditioning_summary(cal, bands):
  """conditioning_summary(cal, bands) -> [BandCondition]

  Per band: number of points, minimum and median conditioning metric, and the
  number of ``SINGULAR`` and ``ILL_CONDITIONED`` points.  Bands are clipped to
  the calibration span.
  """
  summary = []
  for band in check_bands(bands, cal.grid.span):
    mask = band_mask(cal.grid, band)
    values = cal.condition[mask]
    summary.append(BandCondition(band, int(mask.sum()),
        float(values.min()) if values.size else numpy.nan,
        float(numpy.median(values)) if values.size else numpy.nan,
        int(numpy.count_nonzero(cal.flags[mask] & Flag.SINGULAR)),
        int(numpy.count_nonzero(cal.flags[mask] & Flag.ILL_CONDITIONED))))
  return summary
