"""Auxiliary tables and functions to organize runs of a motor drive system for comparison."""

import collections

#: One operating mode of the motor drive system under test
OperatingMode = collections.namedtuple('OperatingMode', 'label control output_frequency_hz')

#: The six operating modes: two control modes of the drive at three output frequencies
OPERATING_MODES = (
  OperatingMode('Mode 1', 'V/F', 10.),
  OperatingMode('Mode 2', 'V/F', 30.),
  OperatingMode('Mode 3', 'V/F', 50.),
  OperatingMode('Mode 4', 'SLV', 10.),
  OperatingMode('Mode 5', 'SLV', 30.),
  OperatingMode('Mode 6', 'SLV', 50.),
)


def modes_by(key):
  """modes_by(key) -> [[str]]

  Collects the mode labels sharing the same value of ``key``, which is either
  ``'control'`` or ``'output_frequency_hz'``.  The classes are returned in
  order of first appearance in :py:data:`OPERATING_MODES`.
  """
  classes = collections.OrderedDict()
  for mode in OPERATING_MODES:
    classes.setdefault(getattr(mode, key), []).append(mode.label)
  return list(classes.values())


def pairs_between_factors(first_factor, second_factor):
  """pairs_between_factors(first_factor, second_factor) -> intra_pairs, extra_pairs

  Computes pairs of runs where the first element is taken from the first factor and the second from the second factor.

  Both ``first_factor`` and ``second_factor`` should be aligned in a list of sub-lists, where corresponding sub-lists contain the runs of one class.
  Both lists need to contain the same classes in the same order; empty classes (empty lists) are allowed.
  The first returned list contains the pairs of the same class, the second the pairs of different classes.

  With the control modes as factors and the output frequencies as classes, ``intra_pairs`` are the comparisons of both control modes at the same output frequency.

  **Keyword parameters**

  first_factor : [[object]]
    The runs of the first factor, where the runs of each class are enclosed in one list.

  second_factor : [[object]]
    The runs of the second factor, where the runs of each class are enclosed in one list.
    Must have the same size as ``first_factor``.

  **Return values**

  intra_pairs : [(object, object)]
    Pairs of runs of the same class, but different factors.

  extra_pairs : [(object, object)]
    Pairs of runs of different classes and different factors.
  """
  if len(first_factor) != len(second_factor):
    raise ValueError("Both factors need to contain the same number of classes, got %d and %d" % (len(first_factor), len(second_factor)))

  intra_pairs = [(c1, c2) \
                  for clazz in range(len(first_factor)) \
                  for c1 in first_factor[clazz] \
                  for c2 in second_factor[clazz]
                ]

  extra_pairs = [(c1, c2) \
                  for clazz1 in range(len(first_factor)) \
                  for c1 in first_factor[clazz1] \
                  for clazz2 in range(len(second_factor)) \
                  if clazz1 != clazz2 \
                  for c2 in second_factor[clazz2]
                ]

  return (intra_pairs, extra_pairs)


def _frequency_name(hz):
  return "%g Hz" % hz


def mode_groupings():
  """mode_groupings() -> [(str, [str])]

  The comparisons of the operating-mode study: for each output frequency both
  control modes against each other, then for each control mode all output
  frequencies against each other.
  """
  controls = list(collections.OrderedDict.fromkeys(m.control for m in OPERATING_MODES))
  frequencies = list(collections.OrderedDict.fromkeys(m.output_frequency_hz for m in OPERATING_MODES))
  by_control = modes_by('control')
  by_frequency = modes_by('output_frequency_hz')

  # the factors are the control modes, the classes the output frequencies
  first = [[label for label in labels if label in by_control[0]] for labels in by_frequency]
  second = [[label for label in labels if label in by_control[1]] for labels in by_frequency]
  intra, _ = pairs_between_factors(first, second)

  groups = [("%s vs %s (%s)" % (a, b, _frequency_name(f)), [a, b]) for (a, b), f in zip(intra, frequencies)]
  groups.extend(("%s control" % control, labels) for control, labels in zip(controls, by_control))
  return groups


def group_pairs(groups):
  """group_pairs(groups) -> [(group, label_a, label_b)]

  Expands named groups of run labels into all label pairs inside each group,
  keeping the order of the labels in the group.

  **Keyword parameters**

  groups : [(str, [str])] or {str: [str]}
    The group names with their run labels.
  """
  if isinstance(groups, dict):
    groups = groups.items()
  return [(name, members[i], members[j]) \
            for name, members in groups \
            for i in range(len(members)-1) \
            for j in range(i+1, len(members))
         ]


def mode_terminations(seed=0, spread=0.05):
  """mode_terminations([seed], [spread]) -> {str: ImpedanceModel}

  Six synthetic common-mode terminations, one per operating mode, for
  exercising the comparison workflow.  The values are placeholders, not
  measurements: a series R-L-C loop (motor frame capacitance, cable inductance
  and loss) whose elements are scaled by a factor drawn uniformly in
  ``[1 - spread, 1 + spread]`` per mode.
  """
  import numpy
  from .simulator import SeriesRLC

  generator = numpy.random.Generator(numpy.random.Philox(seed))
  result = collections.OrderedDict()
  for mode in OPERATING_MODES:
    scale = generator.uniform(1. - spread, 1. + spread, 3)
    result[mode.label] = SeriesRLC(r=20. * scale[0], l=2e-6 * scale[1], c=2e-9 * scale[2])
  return result
