#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Tests of the session configuration and the textual specifications
"""

import json
import os

import pytest

from . import Band, FormatError, FrequencyGrid, SessionConfig, parse_band_spec, parse_grid_spec, parse_quantity
from .config import GridSpec, make_grid
from .test_utils import temporary_directory


def test_quantities():
  assert parse_quantity('150k') == 150e3
  assert parse_quantity('2.2uH') == 2.2 * 1e-6
  assert parse_quantity('2.2µ') == 2.2 * 1e-6
  assert parse_quantity('1e-9') == 1e-9
  assert parse_quantity(' 30 MHz ') == 30e6
  assert parse_quantity('50 ohm') == 50.
  assert parse_quantity('-3') == -3.
  for bad in ('', 'abc', '1x', '1 kk', '1e400', 'k'):
    with pytest.raises(ValueError):
      parse_quantity(bad)


def test_grid_spec():
  assert parse_grid_spec('150k:30M:201') == GridSpec(150e3, 30e6, 201, 'log')
  assert parse_grid_spec('1M:2M:11:linear') == GridSpec(1e6, 2e6, 11, 'linear')
  assert make_grid(parse_grid_spec('150k:30M:201')) == FrequencyGrid.default()
  linear = make_grid(parse_grid_spec('1M:2M:11:LINEAR'))
  assert linear.spacing == 'linear' and len(linear) == 11
  for bad in ('1M:2M', '2M:1M:11', '1M:2M:1', '1M:2M:x', '1M:2M:11:cubic', '0:1M:11', '1M:2M:11:log:x'):
    with pytest.raises(ValueError):
      parse_grid_spec(bad)


def test_band_spec():
  assert parse_band_spec('150k-500k, 500k-5M') == [Band(150e3, 500e3), Band(500e3, 5e6)]
  assert parse_band_spec('5M-30M,150k-5M') == [Band(150e3, 5e6), Band(5e6, 30e6)]
  for bad in ('150k', '1M-3M,2M-4M', '3M-1M', '1M-x'):
    with pytest.raises(ValueError):
      parse_band_spec(bad)


def test_defaults():
  config = SessionConfig()
  assert config.grid == GridSpec(150e3, 30e6, 201, 'log')
  assert config.make_grid() == FrequencyGrid.default()
  assert config.z0 == 50. and config.z_std == 50.
  assert config.tol_singular == 1e-12 and config.tol_cond == 1e-6
  assert config.consistency_db == 3.
  assert config.bands == (Band(150e3, 500e3), Band(500e3, 5e6), Band(5e6, 30e6))
  assert config.seed == 0 and config.smooth_width == 1 and config.verbosity == 0
  assert config.output_dir == '.'
  assert list(config.to_dict()) == list(SessionConfig.DEFAULTS)


def test_validation():
  with pytest.raises(ValueError):
    SessionConfig(colour='blue')
  for name, value in (('z0', 0.), ('z_std', -50.), ('tol_cond', float('nan')), ('consistency_db', 0.),
      ('smooth_width', 0), ('seed', -1), ('grid', '1M:2M:1'), ('bands', '3M-1M')):
    with pytest.raises(ValueError):
      SessionConfig(**{name: value})


def test_override():
  config = SessionConfig()
  changed = config.override(z0=75., seed=None, grid='1M:10M:11:linear', bands='1M-5M,5M-10M')
  assert changed.z0 == 75. and changed.seed == 0
  assert changed.grid == GridSpec(1e6, 10e6, 11, 'linear')
  assert changed.bands == (Band(1e6, 5e6), Band(5e6, 10e6))
  assert config.z0 == 50.
  assert changed != config
  assert config.override() == config
  with pytest.raises(AttributeError):
    config.z0 = 75.
  with pytest.raises(AttributeError):
    config.colour


def test_load():
  with temporary_directory() as directory:
    path = os.path.join(directory, 'session.json')
    with open(path, 'w') as f:
      json.dump({'z0': 75, 'grid': '1M:10M:11', 'bands': [[1e6, 5e6], [5e6, 1e7]], 'seed': 3}, f)
    config = SessionConfig.load(path)
    assert config.z0 == 75. and config.seed == 3
    assert config.grid == GridSpec(1e6, 10e6, 11, 'log')
    assert config.bands == (Band(1e6, 5e6), Band(5e6, 1e7))

    # the dictionary form loads back to the same configuration
    with open(path, 'w') as f:
      json.dump(config.to_dict(), f)
    assert SessionConfig.load(path) == config

    for content in ('{"z0": 50, "colour": "blue"}', 'not json', '[1, 2]', '{"z0": "fifty"}'):
      with open(path, 'w') as f:
        f.write(content)
      with pytest.raises(FormatError):
        SessionConfig.load(path)
