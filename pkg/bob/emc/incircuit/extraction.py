#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Impedance extraction from measured reflection coefficients, grid
alignment and comparison of several extracted runs."""

import collections
import logging

import numpy
import scipy.interpolate

from .errors import SpanError
from .network import Flag, ComplexSweep, band_mask, check_bands, _check_role, _readonly

logger = logging.getLogger("bob.emc.incircuit")

#: Distance of ``G + k3`` from zero below which the bilinear map has a pole
POLE_TOLERANCE = 1e-12

#: Comparison verdicts
CONSISTENT = 'CONSISTENT'
INCONSISTENT = 'INCONSISTENT'
NO_DATA = 'NO_DATA'

_CARRIED = numpy.uint8(Flag.SINGULAR | Flag.ILL_CONDITIONED | Flag.EXTRAPOLATED | Flag.INFINITE)


class ImpedanceSweep(ComplexSweep):
  """An extracted impedance per frequency

  Points flagged ``SINGULAR`` hold ``nan``.

  **Parameters**

  grid : :py:class:`bob.emc.incircuit.FrequencyGrid`
    The frequencies

  values : array_like
    Complex impedance in ohms per point

  flags : array_like or None
    Per-point ``SINGULAR``, ``ILL_CONDITIONED``, ``EXTRAPOLATED`` and
    ``NEGATIVE_REAL`` bits

  label : str or None
    Name of the run (e.g. the operating mode)
  """

  def __init__(self, grid, values, flags=None, label=None):
    values = numpy.array(values, dtype=numpy.complex128).ravel()
    if flags is not None:
      flags = numpy.asarray(flags, dtype=numpy.uint8).ravel()
      if len(flags) == len(values):
        values[(flags & Flag.SINGULAR) != 0] = numpy.nan
    super(ImpedanceSweep, self).__init__(grid, values, 'impedance_ohm', flags)
    self.label = label

  @classmethod
  def from_sweep(cls, sweep, label=None):
    """Wraps an ``impedance_ohm`` :py:class:`bob.emc.incircuit.ComplexSweep`"""
    _check_role(sweep, 'impedance_ohm')
    return cls(sweep.grid, sweep.values, sweep.flags, label)

  def replace(self, **kwargs):
    arguments = dict(grid=self.grid, values=self.values, flags=self.flags, label=self.label)
    kwargs.pop('role', None)
    arguments.update(kwargs)
    return ImpedanceSweep(**arguments)

  @property
  def z(self):
    return self.values

  @property
  def magnitude_ohm(self):
    return numpy.abs(self.values)

  @property
  def dbohm(self):
    """Magnitude in dB-ohm, ``20 log10 |Z|``"""
    with numpy.errstate(divide='ignore', invalid='ignore'):
      return 20. * numpy.log10(numpy.abs(self.values))

  def __repr__(self):
    return "ImpedanceSweep(%r, %d points)" % (self.label, len(self))


class RealSweep(object):
  """One real value per frequency, with per-point flags"""

  def __init__(self, grid, values, flags=None):
    values = numpy.array(values, dtype=numpy.float64).ravel()
    if len(values) != len(grid):
      raise ValueError("sweep has %d values for %d grid points" % (len(values), len(grid)))
    if flags is None:
      flags = numpy.zeros(len(grid), dtype=numpy.uint8)
    self.grid = grid
    self.values = _readonly(values)
    self.flags = _readonly(numpy.array(flags, dtype=numpy.uint8).ravel())

  def __len__(self):
    return len(self.grid)


def _poles(gamma_m, cal):
  """Mask of the points where the bilinear map cannot be evaluated"""
  _check_role(gamma_m, 'reflection')
  cal.grid.check_same(gamma_m.grid)
  with numpy.errstate(invalid='ignore'):
    denominator = gamma_m.values + cal.k3
    pole = numpy.abs(denominator) < POLE_TOLERANCE
  unusable = cal.singular | ((gamma_m.flags & Flag.SINGULAR) != 0) | ~numpy.isfinite(denominator)
  return denominator, pole | unusable


def extract_impedance(gamma_m, cal, label=None):
  """extract_impedance(gamma_m, cal, [label]) -> ImpedanceSweep

  Applies ``Z = (k1 G + k2) / (G + k3)`` to a measured reflection sweep.  The
  grids must be identical (see :py:func:`resample`).  Points singular in the
  calibration or on the pole ``G = -k3`` are flagged ``SINGULAR`` and carry no
  value, ``ILL_CONDITIONED`` calibration points and ``EXTRAPOLATED``
  measurement points keep their flags, negative resistances are flagged
  ``NEGATIVE_REAL`` and kept as they are.
  """
  denominator, singular = _poles(gamma_m, cal)
  with numpy.errstate(invalid='ignore', divide='ignore'):
    z = (cal.k1 * gamma_m.values + cal.k2) / denominator
  z[singular] = numpy.nan

  flags = (gamma_m.flags & numpy.uint8(Flag.EXTRAPOLATED)) | (cal.flags & numpy.uint8(Flag.ILL_CONDITIONED))
  flags[singular] |= numpy.uint8(Flag.SINGULAR)
  with numpy.errstate(invalid='ignore'):
    negative = ~singular & (z.real < 0.)
  flags[negative] |= numpy.uint8(Flag.NEGATIVE_REAL)

  if numpy.any(singular):
    logger.warning("%d point(s) without impedance (singular calibration or pole of the map)", int(singular.sum()))
  if numpy.any(negative):
    logger.info("  -> %d point(s) with negative resistance", int(negative.sum()))
  return ImpedanceSweep(gamma_m.grid, z, flags, label)


def sensitivity(cal, gamma_m):
  """sensitivity(cal, gamma_m) -> RealSweep

  Magnitude of the derivative of the extracted impedance with respect to the
  measured reflection coefficient, ``|k1 k3 - k2| / |G + k3|^2``, in ohms per
  unit reflection.  Pole and singular points are flagged ``SINGULAR`` and hold
  ``nan``.
  """
  denominator, singular = _poles(gamma_m, cal)
  with numpy.errstate(invalid='ignore', divide='ignore'):
    value = numpy.abs(cal.k1 * cal.k3 - cal.k2) / numpy.abs(denominator) ** 2
  value[singular] = numpy.nan
  flags = numpy.where(singular, numpy.uint8(Flag.SINGULAR), numpy.uint8(0))
  return RealSweep(gamma_m.grid, value, flags)


def resample(sweep, target, method='linear_on_log_f', extrapolate=False):
  """resample(sweep, target, [method], [extrapolate]) -> ComplexSweep

  Interpolates ``sweep`` onto the grid ``target``.  Real and imaginary parts
  are interpolated independently, either linearly in log-frequency
  (``'linear_on_log_f'``) or by taking the nearest source point
  (``'nearest'``).  Source frequencies are reproduced exactly.

  Target points outside of the source span raise
  :py:class:`bob.emc.incircuit.SpanError` unless ``extrapolate`` is set, in
  which case they take the value of the closest end of the sweep and are
  flagged ``EXTRAPOLATED``.  Flags of the contributing source points are
  carried over.
  """
  if method not in ('linear_on_log_f', 'nearest'):
    raise ValueError("unknown resampling method %r" % (method,))
  source = numpy.log(sweep.grid.points)
  wanted = numpy.log(target.points)
  outside = (target.points < sweep.grid.start) | (target.points > sweep.grid.stop)
  if numpy.any(outside) and not extrapolate:
    raise SpanError("%d target point(s) outside of the sweep span %g Hz - %g Hz" %
        (int(outside.sum()), sweep.grid.start, sweep.grid.stop))

  n = len(sweep)
  if method == 'nearest' or n == 1:
    if n == 1:
      index = numpy.zeros(len(target), dtype=int)
    else:
      nearest = scipy.interpolate.interp1d(source, numpy.arange(n), kind='nearest',
          bounds_error=False, fill_value=(0, n - 1), assume_sorted=True)
      index = nearest(wanted).astype(int)
    values = sweep.values[index]
    flags = sweep.flags[index] & _CARRIED
  else:
    values = numpy.interp(wanted, source, sweep.values.real) + \
        1j * numpy.interp(wanted, source, sweep.values.imag)
    lower = numpy.clip(numpy.searchsorted(source, wanted, side='right') - 1, 0, n - 1)
    upper = numpy.where(source[lower] == wanted, lower, numpy.minimum(lower + 1, n - 1))
    flags = (sweep.flags[lower] | sweep.flags[upper]) & _CARRIED

  flags = numpy.where(outside, flags | numpy.uint8(Flag.EXTRAPOLATED), flags)
  flags = numpy.where(numpy.isnan(values), flags | numpy.uint8(Flag.SINGULAR), flags)
  if numpy.any(outside):
    logger.warning("%d point(s) extrapolated beyond %g Hz - %g Hz", int(outside.sum()),
        sweep.grid.start, sweep.grid.stop)
  return sweep.replace(grid=target, values=values, flags=flags)


def common_grid(sweeps):
  """common_grid(sweeps) -> FrequencyGrid

  The coarsest of the sweep grids, restricted to the frequency span shared by
  all sweeps.  Raises :py:class:`bob.emc.incircuit.SpanError` if the sweeps do
  not overlap.
  """
  lo = max(s.grid.start for s in sweeps)
  hi = min(s.grid.stop for s in sweeps)
  if lo > hi:
    raise SpanError("the sweeps share no frequency span (%g Hz > %g Hz)" % (lo, hi))
  candidates = []
  for s in sweeps:
    inside = (s.grid.points >= lo) & (s.grid.points <= hi)
    if numpy.any(inside):
      candidates.append(s.grid if numpy.all(inside) else s.grid.within(lo, hi))
  if not candidates:
    raise SpanError("no grid point inside the common span %g Hz - %g Hz" % (lo, hi))
  return min(candidates, key=len)


#: Deviation statistics of one pair of runs inside one band
PairStatistics = collections.namedtuple('PairStatistics',
    'group label_a label_b band points max_db mean_db max_phase_deg verdict')


class ComparisonReport(object):
  """The result of :py:func:`compare_sweeps`

  **Attributes**

  grid : :py:class:`bob.emc.incircuit.FrequencyGrid`
    The common grid the runs were compared on

  runs : [:py:class:`ImpedanceSweep`]
    The runs, resampled onto ``grid``

  bands : [:py:class:`bob.emc.incircuit.Band`]
    The frequency bands

  threshold_db : float
    Maximum magnitude deviation of a consistent band

  statistics : [:py:class:`PairStatistics`]
    One entry per group, pair and band
  """

  def __init__(self, grid, runs, bands, threshold_db, statistics):
    self.grid = grid
    self.runs = list(runs)
    self.bands = list(bands)
    self.threshold_db = threshold_db
    self.statistics = list(statistics)

  @property
  def labels(self):
    return [r.label for r in self.runs]

  @property
  def groups(self):
    """Group names in order of appearance"""
    return list(collections.OrderedDict((s.group, None) for s in self.statistics))

  @property
  def consistent(self):
    """``True`` if no band of any pair failed the threshold"""
    return all(s.verdict != INCONSISTENT for s in self.statistics)

  def select(self, group=None, label_a=None, label_b=None):
    """Statistics matching the given group and labels (in either order)"""
    result = []
    for s in self.statistics:
      if group is not None and s.group != group:
        continue
      if label_a is not None and label_b is not None and \
          {s.label_a, s.label_b} != {label_a, label_b}:
        continue
      result.append(s)
    return result

  def rows(self):
    """rows() -> [tuple]

    One table row per statistics entry: group, run labels, band limits in
    hertz, number of points, maximum and mean deviation in dB, maximum phase
    deviation in degrees and the verdict
    """
    return [(s.group, s.label_a, s.label_b, s.band.lo, s.band.hi, s.points,
        s.max_db, s.mean_db, s.max_phase_deg, s.verdict) for s in self.statistics]

  def overlay(self):
    """overlay() -> frequencies, {label: (dbohm, phase_deg)}

    Per-run curves on the common grid, for plotting
    """
    return self.grid.points, collections.OrderedDict(
        (r.label, (r.dbohm, r.phase_deg)) for r in self.runs)


def _deviation(a, b, mask):
  """Magnitude deviation in dB and phase deviation in degrees, symmetric in a and b"""
  with numpy.errstate(divide='ignore', invalid='ignore'):
    db = numpy.abs(20. * numpy.log10(numpy.abs(a.values[mask])) - 20. * numpy.log10(numpy.abs(b.values[mask])))
  phase = numpy.abs(a.phase_deg[mask] - b.phase_deg[mask])
  phase = numpy.where(phase > 180., 360. - phase, phase)
  return db, phase


def compare_sweeps(runs, bands=None, threshold_db=3.0, groups=None):
  """compare_sweeps(runs, [bands], [threshold_db], [groups]) -> ComparisonReport

  Compares extracted impedance runs pairwise, band by band.  The runs are
  resampled onto :py:func:`common_grid`; points that are singular, infinite or
  zero in either run of a pair are skipped.  For each pair and band, the
  maximum and mean of ``|20 log10(|Za| / |Zb|)|`` and the maximum phase
  difference are reported; a band is ``CONSISTENT`` if the maximum magnitude
  deviation does not exceed ``threshold_db``.

  **Parameters**

  runs : [:py:class:`ImpedanceSweep`]
    At least two runs with distinct labels

  bands : [(float, float)] or None
    Frequency bands in hertz; the whole common span if ``None``

  threshold_db : float
    Consistency threshold in dB

  groups : [(str, [str])] or None
    Named groups of labels; only pairs inside a group are compared.  All pairs
    form a single group ``'all'`` if ``None``.
  """
  from .auxiliary import group_pairs

  runs = list(runs)
  if len(runs) < 2:
    raise ValueError("at least two runs are needed for a comparison, got %d" % len(runs))
  labels = [r.label for r in runs]
  if None in labels or len(set(labels)) != len(labels):
    raise ValueError("runs must carry distinct labels, got %r" % (labels,))
  if not threshold_db > 0.:
    raise ValueError("consistency threshold must be positive")

  grid = common_grid(runs)
  aligned = []
  for r in runs:
    if r.grid != grid:
      logger.info("  -> Resampling run %r onto the common %d point grid", r.label, len(grid))
      r = resample(r, grid)
    aligned.append(r)
  by_label = dict((r.label, r) for r in aligned)

  if bands is None:
    bands = [(grid.start, grid.stop)]
  bands = check_bands(bands, grid.span)

  if groups is None:
    groups = [('all', labels)]
  for name, members in groups:
    unknown = [m for m in members if m not in by_label]
    if unknown:
      raise ValueError("group %r names unknown run(s) %s" % (name, ", ".join(unknown)))

  statistics = []
  for name, label_a, label_b in group_pairs(groups):
    a, b = by_label[label_a], by_label[label_b]
    usable = numpy.ones(len(grid), dtype=bool)
    for run in (a, b):
      usable &= ((run.flags & numpy.uint8(Flag.SINGULAR | Flag.INFINITE)) == 0)
      usable &= numpy.isfinite(run.values) & (run.values != 0)
    for band in bands:
      mask = band_mask(grid, band) & usable
      db, phase = _deviation(a, b, mask)
      if db.size == 0:
        statistics.append(PairStatistics(name, label_a, label_b, band, 0,
            numpy.nan, numpy.nan, numpy.nan, NO_DATA))
        continue
      max_db = float(db.max())
      verdict = CONSISTENT if max_db <= threshold_db else INCONSISTENT
      statistics.append(PairStatistics(name, label_a, label_b, band, int(db.size),
          max_db, float(db.mean()), float(phase.max()), verdict))

  report = ComparisonReport(grid, aligned, bands, float(threshold_db), statistics)
  if not report.consistent:
    logger.info("  -> %d band comparison(s) exceed %g dB",
        sum(s.verdict == INCONSISTENT for s in statistics), threshold_db)
  return report
