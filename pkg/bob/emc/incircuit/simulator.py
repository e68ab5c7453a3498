#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""
Analytic model of the single-probe common-mode measurement setup.

The instrument sees, from its port outwards, an optional flat gain/attenuation
chain, the clamp-on inductive probe and the common-mode loop formed by the
LISN and the cables, terminated by the common-mode impedance of the system
under test.  The probe is modelled as a shunt parasitic capacitance, a series
winding resistance and leakage inductance, and an ideal transformer with a
magnetizing inductance on its primary side.  The LISN and cables form a single
series impedance in the common-mode loop.

The reflection coefficients synthesized here are exact (up to rounding) for
the modelled circuit, which makes them the reference for the characterization
and extraction routines.
"""

import collections
import logging

import numpy

from .errors import FormatError, SpanError
from .network import (OPEN, AbcdMatrix, ComplexSweep, FrequencyGrid, ReferenceImpedance,
  cascade, constant_sweep, matched_twoport, reflection_sweep, series_sweep, shunt_sweep)

logger = logging.getLogger("bob.emc.incircuit")


def _non_negative(name, value, allow_none=False):
  if value is None and allow_none:
    return None
  value = float(value)
  if not numpy.isfinite(value) or value < 0.:
    raise ValueError("%s must be finite and non-negative, got %r" % (name, value))
  return value


class ImpedanceModel(object):
  """Base class of the one-port impedance models

  Derived classes implement :py:meth:`evaluate`, returning one complex
  impedance per grid frequency (``inf`` for an open circuit), and
  :py:meth:`to_dict`.
  """

  kind = None

  def evaluate(self, grid):
    raise NotImplementedError

  def to_dict(self):
    raise NotImplementedError

  @staticmethod
  def from_dict(data):
    """Builds an impedance model from its dictionary representation"""
    data = dict(data)
    kind = data.pop('kind', None)
    if kind not in _KINDS:
      raise FormatError("unknown impedance model kind %r" % (kind,))
    try:
      if kind == 'tabulated':
        return Tabulated(data['frequencies_hz'],
          [complex(re, im) for re, im in data['values_ohm']])
      return _KINDS[kind](**data)
    except (TypeError, KeyError, ValueError) as e:
      raise FormatError("invalid %s impedance model: %s" % (kind, e))

  def __eq__(self, other):
    return type(self) is type(other) and self.to_dict() == other.to_dict()

  def __ne__(self, other):
    return not self == other

  __hash__ = None

  def __repr__(self):
    arguments = self.to_dict()
    arguments.pop('kind')
    return "%s(%s)" % (type(self).__name__,
      ", ".join("%s=%r" % item for item in sorted(arguments.items())))


class Open(ImpedanceModel):
  """The open circuit"""

  kind = 'open'

  def evaluate(self, grid):
    return numpy.full(len(grid), complex(numpy.inf, 0.))

  def to_dict(self):
    return {'kind': self.kind}


class Short(ImpedanceModel):
  """The short circuit"""

  kind = 'short'

  def evaluate(self, grid):
    return numpy.zeros(len(grid), dtype=numpy.complex128)

  def to_dict(self):
    return {'kind': self.kind}


class Resistor(ImpedanceModel):
  """A frequency-independent resistance ``r`` in ohms"""

  kind = 'resistor'

  def __init__(self, r):
    self.r = _non_negative('resistance', r)

  def evaluate(self, grid):
    return numpy.full(len(grid), complex(self.r, 0.))

  def to_dict(self):
    return {'kind': self.kind, 'r': self.r}


class SeriesRLC(ImpedanceModel):
  """Resistance, inductance and capacitance in series

  **Parameters**

  r : float
    Resistance in ohms

  l : float
    Inductance in henry

  c : float or None
    Capacitance in farad; ``None`` leaves the capacitor out (series R-L)
  """

  kind = 'series'

  def __init__(self, r=0., l=0., c=None):
    self.r = _non_negative('resistance', r)
    self.l = _non_negative('inductance', l)
    self.c = _non_negative('capacitance', c, allow_none=True)
    if self.c == 0.:
      raise ValueError("a series capacitance of zero is an open circuit")

  def evaluate(self, grid):
    w = grid.omega
    z = self.r + 1j * w * self.l
    if self.c is not None:
      z = z + 1. / (1j * w * self.c)
    return z.astype(numpy.complex128)

  def to_dict(self):
    return {'kind': self.kind, 'r': self.r, 'l': self.l, 'c': self.c}


class ParallelRLC(ImpedanceModel):
  """Resistance, inductance and capacitance in parallel

  **Parameters**

  r : float or None
    Resistance in ohms; ``None`` leaves the resistor out

  l : float or None
    Inductance in henry; ``None`` leaves the inductor out

  c : float
    Capacitance in farad, zero leaves the capacitor out (``R || L``)
  """

  kind = 'parallel'

  def __init__(self, r=None, l=None, c=0.):
    self.r = _non_negative('resistance', r, allow_none=True)
    self.l = _non_negative('inductance', l, allow_none=True)
    self.c = _non_negative('capacitance', c)
    if self.r == 0. or self.l == 0.:
      raise ValueError("a parallel branch of zero impedance shorts the model, use Short")
    if self.r is None and self.l is None and self.c == 0.:
      raise ValueError("a parallel model needs at least one element")

  def evaluate(self, grid):
    w = grid.omega
    y = 1j * w * self.c
    if self.r is not None:
      y = y + 1. / self.r
    if self.l is not None:
      y = y + 1. / (1j * w * self.l)
    return (1. / y).astype(numpy.complex128)

  def to_dict(self):
    return {'kind': self.kind, 'r': self.r, 'l': self.l, 'c': self.c}


class Tabulated(ImpedanceModel):
  """An impedance given as a table of frequencies and complex values

  Between the table frequencies, real and imaginary parts are interpolated
  linearly in log-frequency; table frequencies are reproduced exactly.
  Frequencies outside of the table raise
  :py:class:`bob.emc.incircuit.SpanError`.
  """

  kind = 'tabulated'

  def __init__(self, frequencies, values):
    self.grid = FrequencyGrid(frequencies)
    self.values = numpy.array(values, dtype=numpy.complex128).ravel()
    if len(self.values) != len(self.grid):
      raise ValueError("table has %d values for %d frequencies" % (len(self.values), len(self.grid)))
    if not numpy.all(numpy.isfinite(self.values)):
      raise ValueError("tabulated impedances must be finite")

  @classmethod
  def from_sweep(cls, sweep):
    return cls(sweep.grid.points, sweep.values)

  def evaluate(self, grid):
    from .extraction import resample
    if grid.start < self.grid.start or grid.stop > self.grid.stop:
      raise SpanError("table covers %g Hz - %g Hz, the grid needs %g Hz - %g Hz" %
        (self.grid.start, self.grid.stop, grid.start, grid.stop))
    table = ComplexSweep(self.grid, self.values, 'impedance_ohm')
    return numpy.array(resample(table, grid).values)

  def to_dict(self):
    return {'kind': self.kind, 'frequencies_hz': [float(f) for f in self.grid.points],
      'values_ohm': [[float(v.real), float(v.imag)] for v in self.values]}


_KINDS = collections.OrderedDict([
  ('open', Open), ('short', Short), ('resistor', Resistor),
  ('series', SeriesRLC), ('parallel', ParallelRLC), ('tabulated', Tabulated),
  ])


class ProbeModel(object):
  """Equivalent circuit of the clamp-on inductive probe

  **Parameters**

  turns_ratio : float
    Ratio of the ideal transformer, positive

  magnetizing_inductance_h : float
    Magnetizing inductance on the primary (instrument) side, positive

  leakage_inductance_h : float
    Series leakage inductance

  parasitic_capacitance_f : float
    Shunt parasitic capacitance at the probe connector

  winding_resistance_ohm : float
    Series winding resistance
  """

  def __init__(self, turns_ratio=1., magnetizing_inductance_h=1e-3, leakage_inductance_h=0.,
      parasitic_capacitance_f=0., winding_resistance_ohm=0.):
    self.turns_ratio = float(turns_ratio)
    self.magnetizing_inductance_h = float(magnetizing_inductance_h)
    for name in ('turns_ratio', 'magnetizing_inductance_h'):
      value = getattr(self, name)
      if not numpy.isfinite(value) or value <= 0.:
        raise ValueError("%s must be finite and positive, got %r (a probe without coupling)" % (name, value))
    self.leakage_inductance_h = _non_negative('leakage_inductance_h', leakage_inductance_h)
    self.parasitic_capacitance_f = _non_negative('parasitic_capacitance_f', parasitic_capacitance_f)
    self.winding_resistance_ohm = _non_negative('winding_resistance_ohm', winding_resistance_ohm)

  FIELDS = ('turns_ratio', 'magnetizing_inductance_h', 'leakage_inductance_h',
    'parasitic_capacitance_f', 'winding_resistance_ohm')

  @classmethod
  def transparent(cls):
    """A probe close to a straight-through connection: unit ratio, 1 kH magnetizing inductance"""
    return cls(1., 1e3)

  def to_dict(self):
    return dict((name, getattr(self, name)) for name in self.FIELDS)

  @classmethod
  def from_dict(cls, data):
    try:
      return cls(**data)
    except (TypeError, ValueError) as e:
      raise FormatError("invalid probe model: %s" % e)

  def __repr__(self):
    return "ProbeModel(%s)" % ", ".join("%s=%r" % (n, getattr(self, n)) for n in self.FIELDS)


class LisnCableModel(object):
  """The common-mode loop formed by the LISN and the cables

  **Parameters**

  z_cm_lisn : :py:class:`ImpedanceModel`
    Common-mode impedance of the LISN

  z_cm_cable : :py:class:`ImpedanceModel`
    Common-mode loop impedance of the power and ground cables; a series R-L
    model by default
  """

  def __init__(self, z_cm_lisn=None, z_cm_cable=None):
    self.z_cm_lisn = z_cm_lisn if z_cm_lisn is not None else Short()
    self.z_cm_cable = z_cm_cable if z_cm_cable is not None else SeriesRLC()
    for name in ('z_cm_lisn', 'z_cm_cable'):
      if isinstance(getattr(self, name), Open):
        raise ValueError("%s cannot be an open circuit in a closed common-mode loop" % name)

  def to_dict(self):
    return {'z_cm_lisn': self.z_cm_lisn.to_dict(), 'z_cm_cable': self.z_cm_cable.to_dict()}

  @classmethod
  def from_dict(cls, data):
    try:
      return cls(ImpedanceModel.from_dict(data['z_cm_lisn']),
        ImpedanceModel.from_dict(data['z_cm_cable']))
    except (KeyError, ValueError) as e:
      raise FormatError("invalid LISN/cable model: %s" % e)


class NoiseModel(object):
  """Bounded random perturbation of the synthesized reflection coefficients

  Each point is multiplied by ``1 + amplitude * (u + jv)`` with ``u`` and
  ``v`` uniform in ``[-1, 1]``, drawn from a counter-based generator seeded
  with ``seed``.
  """

  def __init__(self, amplitude=0., seed=0):
    self.amplitude = _non_negative('noise amplitude', amplitude)
    self.seed = int(seed)

  def perturbation(self, length, seed=None):
    generator = numpy.random.Generator(numpy.random.Philox(self.seed if seed is None else int(seed)))
    u = generator.uniform(-1., 1., length)
    v = generator.uniform(-1., 1., length)
    return 1. + self.amplitude * (u + 1j * v)

  def to_dict(self):
    return {'amplitude': self.amplitude, 'seed': self.seed}


class CircuitModel(object):
  """The complete measurement setup as seen from the instrument port

  **Parameters**

  probe : :py:class:`ProbeModel` or None
    The inductive probe; ``None`` connects the instrument directly

  lisn_cable : :py:class:`LisnCableModel`
    The common-mode loop

  z0 : float
    Reference impedance of the instrument in ohms

  noise : :py:class:`NoiseModel` or None
    Stand-in for the background disturbance of the energized system

  sap_gain_db : float or None
    Flat gain (negative: attenuation) of the amplification and protection
    chain between instrument and probe; ``None`` leaves it out

  description : str
    Free text; bundled models state that their values are synthetic
  """

  def __init__(self, probe=None, lisn_cable=None, z0=50., noise=None, sap_gain_db=None, description=''):
    self.probe = probe
    self.lisn_cable = lisn_cable if lisn_cable is not None else LisnCableModel()
    self.z0 = ReferenceImpedance(z0)
    self.noise = noise
    self.sap_gain_db = None if sap_gain_db is None else float(sap_gain_db)
    if self.sap_gain_db is not None and not numpy.isfinite(self.sap_gain_db):
      raise ValueError("SAP chain gain must be finite")
    self.description = str(description)

  @classmethod
  def transparent(cls, z0=50.):
    """The instrument connected straight to the termination"""
    return cls(None, LisnCableModel(), z0)

  def to_dict(self):
    return collections.OrderedDict([
      ('description', self.description),
      ('z0', self.z0.z0),
      ('probe', None if self.probe is None else self.probe.to_dict()),
      ('lisn_cable', self.lisn_cable.to_dict()),
      ('sap_gain_db', self.sap_gain_db),
      ('noise', None if self.noise is None else self.noise.to_dict()),
      ])

  @classmethod
  def from_dict(cls, data):
    try:
      probe = data.get('probe')
      noise = data.get('noise')
      return cls(
        probe=None if probe is None else ProbeModel.from_dict(probe),
        lisn_cable=LisnCableModel.from_dict(data['lisn_cable']),
        z0=data.get('z0', 50.),
        noise=None if noise is None else NoiseModel(**noise),
        sap_gain_db=data.get('sap_gain_db'),
        description=data.get('description', ''))
    except (AttributeError, KeyError, TypeError, ValueError) as e:
      raise FormatError("invalid circuit model: %s" % e)


def probe_abcd(probe, grid):
  """probe_abcd(probe, grid) -> AbcdSweep

  Two-port of the probe: shunt ``C_p``, series ``R_w + j w L_lk``, shunt
  magnetizing inductance and the ideal transformer ``[n, 0; 0, 1/n]``, in
  this order from the instrument side.
  """
  w = grid.omega
  n = probe.turns_ratio
  network = shunt_sweep(grid, 1j * w * probe.parasitic_capacitance_f)
  network = cascade(network, series_sweep(grid, probe.winding_resistance_ohm + 1j * w * probe.leakage_inductance_h))
  network = cascade(network, shunt_sweep(grid, 1. / (1j * w * probe.magnetizing_inductance_h)))
  return cascade(network, constant_sweep(grid, AbcdMatrix(n, 0., 0., 1. / n, reciprocal=True)))


def lisn_cable_abcd(model, grid):
  """lisn_cable_abcd(model, grid) -> AbcdSweep

  Series two-port with ``b = Z_CM,LISN + Z_CM,CABLE``.  Tabulated models that
  do not cover the grid raise :py:class:`bob.emc.incircuit.SpanError`.
  """
  return series_sweep(grid, model.z_cm_lisn.evaluate(grid) + model.z_cm_cable.evaluate(grid))


def network_abcd(model, grid):
  """network_abcd(model, grid) -> AbcdSweep

  The complete characterized network: SAP chain (if any), probe (if any) and
  LISN/cable loop, cascaded in that order from the instrument.
  """
  network = lisn_cable_abcd(model.lisn_cable, grid)
  if model.probe is not None:
    network = cascade(probe_abcd(model.probe, grid), network)
  if model.sap_gain_db is not None:
    network = cascade(constant_sweep(grid, matched_twoport(model.sap_gain_db, model.z0)), network)
  return network


def simulate_gamma(model, term, grid=None, noise=True, seed=None):
  """simulate_gamma(model, term, [grid], [noise], [seed]) -> ComplexSweep

  The reflection coefficient observed by the instrument when the loop is
  closed by ``term`` (an :py:class:`ImpedanceModel` or
  :py:data:`bob.emc.incircuit.OPEN`).  The model's noise is applied last,
  unless ``noise`` is ``False``; ``seed`` overrides the noise seed.
  """
  if grid is None:
    grid = FrequencyGrid.default()
  if term is OPEN:
    term = Open()
  network = network_abcd(model, grid)
  z_in = network.input_impedance(term.evaluate(grid))
  gamma = reflection_sweep(z_in, model.z0)
  if noise and model.noise is not None and model.noise.amplitude > 0.:
    logger.debug("applying a %g relative perturbation to the reflection", model.noise.amplitude)
    gamma = gamma.replace(values=gamma.values * model.noise.perturbation(len(grid), seed))
  return gamma


def simulate_osl(model, z_std=50., grid=None, noise=False, seed=None):
  """simulate_osl(model, [z_std], [grid], [noise], [seed]) -> OslSweeps

  The three standard measurements, realized in place of the termination:
  open, short and a ``z_std`` ohm load.  Noise is disabled by default.
  """
  from .characterization import OslSweeps
  z_std = float(z_std)
  if not z_std > 0.:
    raise ValueError("load standard must be positive, got %r" % z_std)
  return OslSweeps(*(simulate_gamma(model, term, grid, noise, seed)
    for term in (Open(), Short(), Resistor(z_std))))


def parse_termination(spec):
  """parse_termination(spec) -> ImpedanceModel

  Reads a termination description::

    open | short | R=50 | series:R=10,L=1u,C=2n | parallel:R=100,C=1n |
    table:<impedance csv file>

  Values accept the SI suffixes understood by
  :py:func:`bob.emc.incircuit.config.parse_quantity`.
  """
  from .config import parse_quantity
  text = spec.strip()
  lowered = text.lower()
  if lowered == 'open':
    return Open()
  if lowered == 'short':
    return Short()
  if lowered.startswith('table:'):
    from .io import read_impedance_csv
    return Tabulated.from_sweep(read_impedance_csv(text[len('table:'):]))

  kind, _, body = text.partition(':')
  if not body:
    kind, body = 'resistor', text
  kind = kind.strip().lower()
  if kind not in ('resistor', 'series', 'parallel'):
    raise ValueError("unknown termination %r" % spec)
  values = {}
  for item in body.split(','):
    name, equal, value = item.partition('=')
    name = name.strip().upper()
    if not equal or name not in ('R', 'L', 'C'):
      raise ValueError("cannot read %r in termination %r" % (item, spec))
    values[name.lower()] = parse_quantity(value)
  if kind == 'resistor':
    if list(values) != ['r']:
      raise ValueError("a resistor termination is given as R=<ohms>, got %r" % spec)
    return Resistor(values['r'])
  if kind == 'series':
    return SeriesRLC(**values)
  return ParallelRLC(**values)
