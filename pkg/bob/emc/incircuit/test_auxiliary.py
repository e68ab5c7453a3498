#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""Tests of the run organization helpers
"""

import numpy
import pytest

from . import (OPERATING_MODES, FrequencyGrid, SeriesRLC, group_pairs, mode_groupings, mode_terminations,
    modes_by, pairs_between_factors)


def test_pairs_between_factors():
  first = [['a1', 'a2'], [], ['c1']]
  second = [['A1'], ['B1', 'B2'], ['C1']]
  intra, extra = pairs_between_factors(first, second)
  assert intra == [('a1', 'A1'), ('a2', 'A1'), ('c1', 'C1')]
  assert extra == [('a1', 'B1'), ('a1', 'B2'), ('a1', 'C1'), ('a2', 'B1'), ('a2', 'B2'), ('a2', 'C1'),
      ('c1', 'A1'), ('c1', 'B1'), ('c1', 'B2')]
  with pytest.raises(ValueError):
    pairs_between_factors(first, second[:2])


def test_modes():
  assert len(OPERATING_MODES) == 6
  assert modes_by('control') == [['Mode 1', 'Mode 2', 'Mode 3'], ['Mode 4', 'Mode 5', 'Mode 6']]
  assert modes_by('output_frequency_hz') == [['Mode 1', 'Mode 4'], ['Mode 2', 'Mode 5'], ['Mode 3', 'Mode 6']]


def test_groupings():
  groups = mode_groupings()
  assert groups == [
    ('Mode 1 vs Mode 4 (10 Hz)', ['Mode 1', 'Mode 4']),
    ('Mode 2 vs Mode 5 (30 Hz)', ['Mode 2', 'Mode 5']),
    ('Mode 3 vs Mode 6 (50 Hz)', ['Mode 3', 'Mode 6']),
    ('V/F control', ['Mode 1', 'Mode 2', 'Mode 3']),
    ('SLV control', ['Mode 4', 'Mode 5', 'Mode 6']),
  ]
  # the groupings are built from the mode table itself
  assert [members for _, members in groups[:3]] == modes_by('output_frequency_hz')
  assert [members for _, members in groups[3:]] == modes_by('control')
  pairs = group_pairs(groups)
  assert len(pairs) == 3 + 3 + 3
  assert pairs[0] == ('Mode 1 vs Mode 4 (10 Hz)', 'Mode 1', 'Mode 4')
  assert ('SLV control', 'Mode 4', 'Mode 6') in pairs
  assert group_pairs({'x': ['a', 'b', 'c']}) == [('x', 'a', 'b'), ('x', 'a', 'c'), ('x', 'b', 'c')]
  assert group_pairs([('single', ['a'])]) == []


def test_mode_terminations():
  terminations = mode_terminations(seed=5)
  assert list(terminations) == [m.label for m in OPERATING_MODES]
  assert all(isinstance(t, SeriesRLC) for t in terminations.values())
  for t in terminations.values():
    assert 19. <= t.r <= 21.
    assert 1.9e-6 <= t.l <= 2.1e-6
    assert 1.9e-9 <= t.c <= 2.1e-9
  # reproducible for a seed, different across seeds
  assert mode_terminations(seed=5) == terminations
  assert mode_terminations(seed=6) != terminations
  flat = mode_terminations(spread=0.)
  grid = FrequencyGrid.default()
  assert numpy.array_equal(flat['Mode 1'].evaluate(grid), flat['Mode 6'].evaluate(grid))
