#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Tests of the circuit models and the reflection synthesis
"""

import os

import numpy
import pytest

from . import (OPEN, CircuitModel, FormatError, FrequencyGrid, ImpedanceModel, ImpedanceSweep, LisnCableModel,
    NoiseModel, Open, ParallelRLC, ProbeModel, Resistor, SeriesRLC, Short, SpanError, Tabulated, cascade,
    lisn_cable_abcd, network_abcd, parse_termination, probe_abcd, simulate_gamma, simulate_osl)
from .io import write_impedance_csv
from .test_utils import random_model, random_probe, random_termination, temporary_directory

GRID = FrequencyGrid.default()


def test_elements():
  w = GRID.omega
  assert numpy.all(numpy.isinf(Open().evaluate(GRID)))
  assert numpy.all(Short().evaluate(GRID) == 0.)
  assert numpy.all(Resistor(50.).evaluate(GRID) == 50.)
  assert numpy.allclose(SeriesRLC(10., 1e-6, 1e-9).evaluate(GRID), 10. + 1j * w * 1e-6 + 1. / (1j * w * 1e-9))
  assert numpy.allclose(SeriesRLC(10., 1e-6).evaluate(GRID), 10. + 1j * w * 1e-6)
  assert numpy.allclose(ParallelRLC(r=100., c=1e-9).evaluate(GRID), 1. / (0.01 + 1j * w * 1e-9))
  assert numpy.allclose(ParallelRLC(r=100., l=1e-5).evaluate(GRID), 1. / (0.01 + 1. / (1j * w * 1e-5)))

  for bad in (lambda: Resistor(-1.), lambda: SeriesRLC(c=0.), lambda: ParallelRLC(),
      lambda: ParallelRLC(r=0.), lambda: SeriesRLC(l=numpy.inf)):
    with pytest.raises(ValueError):
      bad()


def test_tabulated():
  values = SeriesRLC(5., 2e-6).evaluate(GRID)
  table = Tabulated(GRID.points, values)
  # table frequencies are reproduced exactly
  assert numpy.array_equal(table.evaluate(GRID), values)
  inner = FrequencyGrid.logarithmic(200e3, 20e6, 77)
  assert numpy.allclose(table.evaluate(inner), SeriesRLC(5., 2e-6).evaluate(inner), rtol=1e-3)
  with pytest.raises(SpanError):
    table.evaluate(FrequencyGrid.logarithmic(10e3, 30e6, 11))
  with pytest.raises(ValueError):
    Tabulated([1e6, 2e6], [1., 2., 3.])
  assert Tabulated.from_sweep(ImpedanceSweep(GRID, values)) == table


def test_model_dictionaries():
  for element in (Open(), Short(), Resistor(50.), SeriesRLC(1., 2e-6, 3e-9), ParallelRLC(r=100., c=1e-9),
      Tabulated([1e6, 2e6], [1. + 1j, 2. - 1j])):
    assert ImpedanceModel.from_dict(element.to_dict()) == element
  assert Resistor(50.) != Resistor(51.)
  assert Resistor(0.) != Short()

  model = CircuitModel(ProbeModel(2., 1e-4, 1e-7, 1e-11, 0.3),
      LisnCableModel(ParallelRLC(r=50., l=5e-5), SeriesRLC(0.1, 1e-6)),
      z0=75., noise=NoiseModel(0.01, 7), sap_gain_db=-10., description='bench')
  back = CircuitModel.from_dict(model.to_dict())
  assert back.to_dict() == model.to_dict()
  assert list(model.to_dict()) == ['description', 'z0', 'probe', 'lisn_cable', 'sap_gain_db', 'noise']

  with pytest.raises(FormatError):
    ImpedanceModel.from_dict({'kind': 'inductor'})
  with pytest.raises(FormatError):
    ImpedanceModel.from_dict({'kind': 'series', 'r': -1.})
  with pytest.raises(FormatError):
    CircuitModel.from_dict({'probe': {'turns_ratio': 0.}, 'lisn_cable': model.lisn_cable.to_dict()})
  with pytest.raises(FormatError):
    CircuitModel.from_dict({'z0': 50.})


def test_validation():
  with pytest.raises(ValueError):
    ProbeModel(turns_ratio=0.)
  with pytest.raises(ValueError):
    ProbeModel(magnetizing_inductance_h=0.)
  with pytest.raises(ValueError):
    ProbeModel(leakage_inductance_h=-1e-9)
  with pytest.raises(ValueError):
    LisnCableModel(Open())
  with pytest.raises(ValueError):
    CircuitModel(z0=0.)
  with pytest.raises(ValueError):
    CircuitModel(sap_gain_db=numpy.inf)
  with pytest.raises(ValueError):
    NoiseModel(-0.1)
  with pytest.raises(ValueError):
    simulate_osl(CircuitModel.transparent(), 0.)


def test_transparent():
  model = CircuitModel.transparent()
  assert numpy.all(simulate_gamma(model, Resistor(50.), GRID).values == 0.)
  osl = simulate_osl(model, 50., GRID)
  assert numpy.all(osl.gamma_open.values == 1.)
  assert numpy.all(osl.gamma_short.values == -1.)
  assert numpy.all(osl.gamma_load.values == 0.)
  # OPEN is accepted in place of an Open model
  assert numpy.array_equal(simulate_gamma(model, OPEN, GRID).values, osl.gamma_open.values)


def test_passivity():
  rng = numpy.random.RandomState(11)
  for trial in range(50):
    model = random_model(rng)
    for term in (Open(), Short(), random_termination(rng)):
      gamma = simulate_gamma(model, term, GRID)
      assert numpy.all(gamma.magnitude <= 1. + 1e-9), "model %d, %r" % (trial, term)


def test_determinism():
  rng = numpy.random.RandomState(12)
  model = random_model(rng)
  term = random_termination(rng)
  assert numpy.array_equal(simulate_gamma(model, term, GRID).values, simulate_gamma(model, term, GRID).values)


def test_noise():
  rng = numpy.random.RandomState(13)
  model = random_model(rng)
  noisy = CircuitModel(model.probe, model.lisn_cable, model.z0, NoiseModel(0.01, 3))
  term = Resistor(30.)
  clean = simulate_gamma(model, term, GRID)
  first = simulate_gamma(noisy, term, GRID)
  assert numpy.array_equal(first.values, simulate_gamma(noisy, term, GRID).values)
  assert not numpy.array_equal(first.values, simulate_gamma(noisy, term, GRID, seed=4).values)
  assert numpy.array_equal(simulate_gamma(noisy, term, GRID, noise=False).values, clean.values)
  # the perturbation is bounded by the amplitude
  ratio = first.values / clean.values
  assert numpy.all(numpy.abs(ratio - 1.) <= 0.01 * numpy.sqrt(2.) + 1e-12)
  # standards are noiseless unless asked for
  assert numpy.array_equal(simulate_osl(noisy, 50., GRID).gamma_load.values,
      simulate_osl(model, 50., GRID).gamma_load.values)
  assert not numpy.array_equal(simulate_osl(noisy, 50., GRID, noise=True).gamma_load.values,
      simulate_osl(model, 50., GRID).gamma_load.values)


def test_network_order():
  # the probe and the loop do not commute
  rng = numpy.random.RandomState(14)
  model = random_model(rng)
  probe = probe_abcd(model.probe, GRID)
  loop = lisn_cable_abcd(model.lisn_cable, GRID)
  z = numpy.full(len(GRID), 50. + 0j)
  forward = cascade(probe, loop).input_impedance(z).values
  backward = cascade(loop, probe).input_impedance(z).values
  assert not numpy.allclose(forward, backward)
  assert numpy.allclose(network_abcd(model, GRID).input_impedance(z).values, forward, rtol=1e-14)
  assert network_abcd(model, GRID).reciprocal
  assert numpy.allclose(probe.determinant(), 1.)


def test_probe_examples():
  grid = FrequencyGrid([150e3, 1e6])
  # a leakage inductance alone is a series reactance of 2 pi f L
  leaky = probe_abcd(ProbeModel(turns_ratio=1., magnetizing_inductance_h=1e3, leakage_inductance_h=159.155e-9), grid)
  assert abs(leaky.b[1] - 1j) < 1e-5

  # the transparent probe is close to the identity
  transparent = probe_abcd(ProbeModel.transparent(), grid)
  assert numpy.abs(transparent.matrices[0] - numpy.eye(2)).max() <= 1e-6

  # every probe is reciprocal
  rng = numpy.random.RandomState(15)
  full = FrequencyGrid.default()
  for trial in range(50):
    probe = probe_abcd(random_probe(rng), full)
    scale = numpy.abs(probe.a * probe.d) + numpy.abs(probe.b * probe.c)
    assert numpy.all(numpy.abs(probe.determinant() - 1.) <= 1e-12 * numpy.maximum(scale, 1.)), trial


def test_lisn_cable_example():
  grid = FrequencyGrid([1e6, 2e6])
  loop = lisn_cable_abcd(LisnCableModel(Resistor(25.), SeriesRLC(0.1, 1e-6)), grid)
  assert abs(loop.b[0] - (25.1 + 2j * numpy.pi)) < 1e-12
  assert abs(loop.b[0] - (25.1 + 6.2832j)) < 1e-4
  assert numpy.all(loop.a == 1.) and numpy.all(loop.c == 0.) and numpy.all(loop.d == 1.)
  # both impedances zero
  bare = lisn_cable_abcd(LisnCableModel(Short(), Short()), grid)
  assert numpy.all(bare.matrices == numpy.eye(2))


def test_ideal_probe():
  # a lossless unit-ratio probe with a large magnetizing inductance is nearly transparent
  model = CircuitModel(ProbeModel.transparent(), LisnCableModel())
  gamma = simulate_gamma(model, Resistor(50.), GRID)
  assert numpy.all(gamma.magnitude < 1e-3)


def test_parse_termination():
  assert parse_termination('open') == Open()
  assert parse_termination(' Short ') == Short()
  assert parse_termination('R=50') == Resistor(50.)
  assert parse_termination('r = 1k') == Resistor(1000.)
  assert parse_termination('series:R=10,L=1u,C=2n') == SeriesRLC(10., 1e-6, 2e-9)
  assert parse_termination('series:R=10,L=1uH') == SeriesRLC(10., 1e-6)
  assert parse_termination('parallel:R=100,C=1n') == ParallelRLC(r=100., c=1e-9)
  for bad in ('50', 'inductor:L=1u', 'R=50,L=1u', 'series:X=1', 'series:R=abc'):
    with pytest.raises(ValueError):
      parse_termination(bad)

  with temporary_directory() as directory:
    path = os.path.join(directory, 'table.csv')
    values = ParallelRLC(r=100., c=1e-9).evaluate(GRID)
    write_impedance_csv(path, ImpedanceSweep(GRID, values))
    table = parse_termination('table:' + path)
    assert isinstance(table, Tabulated)
    assert numpy.allclose(table.evaluate(GRID), values, rtol=1e-9)
