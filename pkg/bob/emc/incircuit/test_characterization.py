#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Test the determination of the probe coefficients
"""

import numpy
import pytest

from . import (AbcdMatrix, ComplexSweep, Flag, FrequencyGrid, GridMismatch, KCalibration, OslSweeps,
    RoleMismatch, conditioning_metric, conditioning_summary, constant_sweep, identity_sweep,
    k_from_abcd, k_from_osl, network_abcd, reflection_sweep, shunt_sweep, simulate_osl, smooth_sweep)
from .test_utils import random_model

GRID = FrequencyGrid.default()


def _osl_through(network, z_std=50.):
  """Standards measured through an ABCD sweep, computed directly"""
  sweeps = []
  for load in (numpy.inf, 0., z_std):
    z = network.input_impedance(numpy.full(len(network), load, dtype=complex))
    sweeps.append(reflection_sweep(z, 50.))
  return OslSweeps(*sweeps)


def test_identity_network():
  cal = k_from_abcd(identity_sweep(GRID), 50.)
  assert cal.provenance == 'from_abcd'
  assert numpy.all(cal.k1 == -50.)
  assert numpy.all(cal.k2 == -50.)
  assert numpy.all(cal.k3 == -1.)
  assert cal.count(Flag.SINGULAR) == 0


def test_shunt_network():
  cal = k_from_abcd(constant_sweep(GRID, AbcdMatrix(1., 0., 0.02j, 1.)), 50.)
  assert numpy.allclose(cal.k1, -25. + 25j, rtol=1e-14)
  assert numpy.allclose(cal.k2, -25. + 25j, rtol=1e-14)
  assert numpy.allclose(cal.k3, 1j, rtol=1e-14)


def test_singular_network():
  # z0 C + A = 0 at every point
  cal = k_from_abcd(constant_sweep(GRID, AbcdMatrix(-1., 1., 0.02, 0.)), 50.)
  assert cal.count(Flag.SINGULAR) == len(GRID)
  assert numpy.all(numpy.isnan(cal.k1))


def test_osl_transparent():
  osl = _osl_through(identity_sweep(GRID))
  assert numpy.all(osl.gamma_open.values == 1.)
  assert numpy.all(osl.gamma_short.values == -1.)
  assert numpy.all(osl.gamma_load.values == 0.)
  cal = k_from_osl(osl, 50.)
  assert numpy.all(cal.k1 == -50.)
  assert numpy.all(cal.k2 == -50.)
  assert numpy.all(cal.k3 == -1.)
  assert numpy.all(cal.condition == 1.)


def test_equivalence():
  # the standards reproduce the coefficients of the network, whatever the load standard
  rng = numpy.random.RandomState(10)
  for trial in range(100):
    model = random_model(rng, sap=(trial % 4 == 0))
    reference = k_from_abcd(network_abcd(model, GRID), model.z0)
    for z_std in (25., 50., 100.):
      cal = k_from_osl(simulate_osl(model, z_std, GRID), z_std)
      assert cal.count(Flag.SINGULAR) == 0
      assert cal.is_similar_to(reference, 1e-9, 1e-12), "model %d with a %g ohm standard" % (trial, z_std)


def test_k3_is_negated_open():
  rng = numpy.random.RandomState(4)
  osl = simulate_osl(random_model(rng), 50., GRID)
  cal = k_from_osl(osl)
  assert numpy.array_equal(cal.k3, -osl.gamma_open.values)


def test_singular_bins():
  rng = numpy.random.RandomState(5)
  osl = simulate_osl(random_model(rng), 50., GRID)
  bins = [0, 17, 100, 150, 200]
  load = numpy.array(osl.gamma_load.values)
  load[bins] = osl.gamma_short.values[bins]
  cal = k_from_osl(OslSweeps(osl.gamma_open, osl.gamma_short, osl.gamma_load.replace(values=load)))
  assert cal.count(Flag.SINGULAR) == 5
  assert list(numpy.flatnonzero(cal.singular)) == bins
  assert numpy.all(numpy.isnan(cal.k1[bins]))
  assert numpy.all(numpy.isfinite(cal.k1[~cal.singular]))
  assert numpy.all(cal.condition[bins] == 0.)


def test_ill_conditioned_bins():
  osl = _osl_through(identity_sweep(GRID))
  load = numpy.array(osl.gamma_load.values)
  load[3] = osl.gamma_short.values[3] + 1e-8
  cal = k_from_osl(OslSweeps(osl.gamma_open, osl.gamma_short, osl.gamma_load.replace(values=load)))
  assert cal.count(Flag.ILL_CONDITIONED) == 1
  assert cal.flags[3] == Flag.ILL_CONDITIONED
  # the thresholds are configurable
  cal = k_from_osl(OslSweeps(osl.gamma_open, osl.gamma_short, osl.gamma_load.replace(values=load)), tol_singular=1e-7)
  assert cal.flags[3] == Flag.SINGULAR


def test_ill_conditioned_monotonic():
  # load standards approaching the short over several decades
  osl = _osl_through(identity_sweep(GRID))
  distance = 10. ** numpy.linspace(-2., -11., len(GRID))
  load = osl.gamma_short.values + distance * numpy.exp(1j * numpy.linspace(0., numpy.pi / 3., len(GRID)))
  osl = OslSweeps(osl.gamma_open, osl.gamma_short, osl.gamma_load.replace(values=load))
  previous = None
  for tol_cond in (1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12):
    ill = (k_from_osl(osl, tol_cond=tol_cond).flags & Flag.ILL_CONDITIONED) != 0
    if previous is not None:
      # lowering the threshold never adds flags
      assert not numpy.any(ill & ~previous), tol_cond
      assert numpy.count_nonzero(ill) < numpy.count_nonzero(previous)
    previous = ill
  assert not numpy.any(previous)


def test_conditioning_degrades():
  # a growing shunt conductance at the instrument side brings the load close to the short
  previous = None
  for g in (0., 0.01, 0.1, 1., 10.):
    osl = _osl_through(shunt_sweep(GRID, g))
    metric = conditioning_metric(osl)
    if previous is not None:
      assert numpy.all(metric < previous)
    previous = metric

  with pytest.raises(ValueError):
    conditioning_metric(identity_sweep(GRID))
  assert numpy.all(conditioning_metric(identity_sweep(GRID), 50.) == 1.)


def test_input_validation():
  osl = _osl_through(identity_sweep(GRID))
  with pytest.raises(ValueError):
    k_from_osl(osl, 0.)
  with pytest.raises(ValueError):
    k_from_osl(osl, -50.)
  with pytest.raises(RoleMismatch):
    OslSweeps(osl.gamma_open, osl.gamma_short, ComplexSweep(GRID, osl.gamma_load.values, 'impedance_ohm'))
  other = FrequencyGrid.logarithmic(150e3, 30e6, 101)
  with pytest.raises(GridMismatch):
    OslSweeps(osl.gamma_open, osl.gamma_short, ComplexSweep(other, numpy.zeros(101)))


def test_calibration_invariants():
  grid = FrequencyGrid([1e6, 2e6])
  k = numpy.ones(2, dtype=complex)
  with pytest.raises(ValueError):
    KCalibration(grid, [1., numpy.nan], k, k)
  with pytest.raises(ValueError):
    KCalibration(grid, k, k, k, condition=[-1., 1.])
  with pytest.raises(ValueError):
    KCalibration(grid, k, k, k, provenance='guessed')
  with pytest.raises(ValueError):
    KCalibration(grid, k, k, k[:1])

  cal = KCalibration(grid, [1., 5.], k, k, flags=[Flag.SINGULAR, Flag.EXTRAPOLATED])
  # only calibration flags are kept, singular points lose their values
  assert list(cal.flags) == [Flag.SINGULAR, 0]
  assert numpy.isnan(cal.k1[0]) and cal.k1[1] == 5.
  assert cal.sweep('k1').role == 'k_coefficient'
  assert cal.replace(metadata={'probe': 'clamp'}).metadata == {'probe': 'clamp'}


def test_smoothing():
  rng = numpy.random.RandomState(3)
  osl = simulate_osl(random_model(rng), 50., GRID)
  assert smooth_sweep(osl.gamma_open, 1) is osl.gamma_open
  with pytest.raises(ValueError):
    smooth_sweep(osl.gamma_open, 0)

  constant = ComplexSweep(GRID, numpy.full(len(GRID), 0.3 - 0.2j))
  assert numpy.allclose(smooth_sweep(constant, 5).values, 0.3 - 0.2j, rtol=1e-14)

  smoothed = k_from_osl(osl, smooth=3)
  raw = k_from_osl(osl)
  assert not numpy.array_equal(smoothed.k3, raw.k3)
  # interior points of a sweep linear in the point index are kept
  ramp = ComplexSweep(GRID, numpy.arange(len(GRID)) * (1e-3 + 2e-3j))
  assert numpy.allclose(smooth_sweep(ramp, 3).values[1:-1], ramp.values[1:-1], rtol=1e-12)
  assert smooth_sweep(ramp, 3).values[0] != ramp.values[0]


def test_conditioning_summary():
  rng = numpy.random.RandomState(5)
  osl = simulate_osl(random_model(rng), 50., GRID)
  load = numpy.array(osl.gamma_load.values)
  load[[0, 1]] = osl.gamma_short.values[[0, 1]]
  cal = k_from_osl(OslSweeps(osl.gamma_open, osl.gamma_short, osl.gamma_load.replace(values=load)))
  summary = conditioning_summary(cal, [(150e3, 500e3), (500e3, 5e6), (5e6, 30e6)])
  assert len(summary) == 3
  assert sum(row.points for row in summary) == len(GRID)
  assert summary[0].singular == 2 and summary[1].singular == 0
  assert summary[0].min_condition == 0.
  assert all(row.median_condition > 0. for row in summary)
