#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""File interfaces: Touchstone sweeps, impedance CSV, calibration and model
documents, and comparison reports.

Every file is written atomically: the content goes to a temporary file in the
target directory, which then replaces the target.
"""

import collections
import csv
import io as _io
import json
import logging
import os
import tempfile

import numpy

from .characterization import KCalibration
from .errors import FormatError, ParseError
from .extraction import ImpedanceSweep, INCONSISTENT
from .network import Flag, FrequencyGrid
from .simulator import CircuitModel
from .touchstone import parse_touchstone, write_touchstone

logger = logging.getLogger("bob.emc.incircuit")

CALIBRATION_VERSION = 'incircuit-calibration/1'
MODEL_VERSION = 'incircuit-model/1'

IMPEDANCE_COLUMNS = ('frequency_hz', 're_ohm', 'im_ohm', 'mag_ohm', 'phase_deg', 'flags')

K_COLUMNS = ('frequency_hz',
    'k1_re', 'k1_im', 'k1_mag', 'k1_phase_deg',
    'k2_re', 'k2_im', 'k2_mag', 'k2_phase_deg',
    'k3_re', 'k3_im', 'k3_mag', 'k3_phase_deg',
    'condition', 'flags')


def atomic_write(path, text):
  """Writes ``text`` to ``path`` through a temporary file in the same directory"""
  directory = os.path.dirname(os.path.abspath(path))
  handle, temporary = tempfile.mkstemp(prefix='.' + os.path.basename(path) + '.', dir=directory)
  try:
    # mkstemp creates owner-only files; give the result the usual permissions
    umask = os.umask(0)
    os.umask(umask)
    os.chmod(temporary, 0o666 & ~umask)
    with os.fdopen(handle, 'w', newline='') as f:
      f.write(text)
    os.replace(temporary, path)
  except BaseException:
    if os.path.exists(temporary):
      os.remove(temporary)
    raise
  logger.debug("wrote %s", path)


def _read_text(path):
  with open(path, 'rb') as f:
    return f.read()


def _number(value):
  return "%.9e" % value


def _csv_text(header, rows):
  buffer = _io.StringIO()
  writer = csv.writer(buffer, lineterminator='\n')
  writer.writerow(header)
  writer.writerows(rows)
  return buffer.getvalue()


# Touchstone

def read_touchstone(path):
  """read_touchstone(path) -> sweep, z0

  Reads a one-port Touchstone file; parse errors name the file.
  """
  return parse_touchstone(_read_text(path), source=path)


def write_touchstone_file(path, sweep, z0=50., format='RI', unit='HZ', comments=()):
  """Writes a ``reflection`` sweep to a one-port Touchstone file"""
  atomic_write(path, write_touchstone(sweep, z0, format, unit, comments))


# Impedance CSV

def impedance_csv(sweep):
  """impedance_csv(sweep) -> str

  Renders an impedance sweep with the columns :py:data:`IMPEDANCE_COLUMNS`.
  Frequencies are written exactly, values with ten significant digits.
  ``SINGULAR`` points are written as ``nan`` and ``INFINITE`` ones as ``inf``.
  """
  allowed = numpy.uint8(Flag.SINGULAR | Flag.INFINITE)
  unflagged = ~numpy.isfinite(sweep.values) & ((sweep.flags & allowed) == 0)
  if numpy.any(unflagged):
    raise FormatError("impedance is not finite at unflagged point %d" % numpy.flatnonzero(unflagged)[0])
  rows = []
  with numpy.errstate(invalid='ignore'):
    for f, z, mag, phase, flags in zip(sweep.grid.points, sweep.values,
        sweep.magnitude, sweep.phase_deg, sweep.flags):
      if numpy.isinf(z):
        z, mag, phase = complex(numpy.inf, 0.), numpy.inf, numpy.nan
      rows.append(["%.17g" % f, _number(z.real), _number(z.imag), _number(mag), _number(phase), Flag.render(flags)])
  return _csv_text(IMPEDANCE_COLUMNS, rows)


def write_impedance_csv(path, sweep):
  """Writes an impedance sweep to a CSV file"""
  atomic_write(path, impedance_csv(sweep))


def parse_impedance_csv(text, source=None, label=None):
  """parse_impedance_csv(text, [source], [label]) -> ImpedanceSweep

  Inverse of :py:func:`impedance_csv`; only the frequency, real and imaginary
  parts and the flags are read back.
  """
  if isinstance(text, bytes):
    try:
      text = text.decode('utf-8')
    except UnicodeDecodeError:
      raise ParseError("not UTF-8 text", 0, source)
  reader = csv.reader(_io.StringIO(text))
  header = next(reader, None)
  if header is None or tuple(h.strip() for h in header) != IMPEDANCE_COLUMNS:
    raise ParseError("expected the header %s" % ",".join(IMPEDANCE_COLUMNS), 1, source)

  frequencies, values, flags = [], [], []
  for row in reader:
    line = reader.line_num
    if not row:
      continue
    if len(row) != len(IMPEDANCE_COLUMNS):
      raise ParseError("expected %d columns, got %d" % (len(IMPEDANCE_COLUMNS), len(row)), line, source)
    try:
      frequencies.append(float(row[0]))
      values.append(complex(float(row[1]), float(row[2])))
      flags.append(Flag.parse(row[5]))
    except (ValueError, KeyError) as e:
      raise ParseError("cannot read row: %s" % e, line, source)
  if not frequencies:
    raise ParseError("no data rows", 0, source)
  try:
    grid = FrequencyGrid.explicit(frequencies)
    return ImpedanceSweep(grid, values, flags, label)
  except ValueError as e:
    raise ParseError(str(e), 0, source)


def read_impedance_csv(path, label=None):
  """read_impedance_csv(path, [label]) -> ImpedanceSweep

  The run label defaults to the file name without extension.
  """
  if label is None:
    label = os.path.splitext(os.path.basename(path))[0]
  return parse_impedance_csv(_read_text(path), path, label)


# Calibration and model documents

def _complex_list(values):
  return [None if not numpy.isfinite(v) else [float(v.real), float(v.imag)] for v in values]


def _dump(document):
  return json.dumps(document, indent=1, allow_nan=False) + "\n"


def _load(text, source, version):
  try:
    document = json.loads(text)
  except ValueError as e:
    raise FormatError("%s: not a JSON document: %s" % (source, e))
  if not isinstance(document, dict) or document.get('version') != version:
    raise FormatError("%s: not a %s document" % (source, version))
  return document


def calibration_document(cal):
  """calibration_document(cal) -> str

  The calibration as a JSON document.  Floats are written in their shortest
  exact form, so reading the document back reproduces every value bit by bit.
  """
  document = collections.OrderedDict([
    ('version', CALIBRATION_VERSION),
    ('provenance', cal.provenance),
    ('z0', cal.z0),
    ('z_std', cal.z_std),
    ('metadata', collections.OrderedDict(sorted(cal.metadata.items()))),
    ('frequencies_hz', [float(f) for f in cal.grid.points]),
    ('k1', _complex_list(cal.k1)),
    ('k2', _complex_list(cal.k2)),
    ('k3', _complex_list(cal.k3)),
    ('condition', [float(c) for c in cal.condition]),
    ('flags', [Flag.render(f) for f in cal.flags]),
  ])
  return _dump(document)


def parse_calibration(text, source='<input>'):
  """parse_calibration(text, [source]) -> KCalibration"""
  document = _load(text, source, CALIBRATION_VERSION)
  try:
    frequencies = document['frequencies_hz']
    lengths = set(len(document[key]) for key in ('k1', 'k2', 'k3', 'condition', 'flags'))
    if lengths != {len(frequencies)}:
      raise ValueError("arrays of different lengths")
    k = [[numpy.nan if v is None else complex(v[0], v[1]) for v in document[key]] for key in ('k1', 'k2', 'k3')]
    return KCalibration(FrequencyGrid.explicit(frequencies), k[0], k[1], k[2],
        z0=document['z0'], z_std=document.get('z_std'),
        condition=document['condition'],
        flags=[Flag.parse(f) for f in document['flags']],
        provenance=document['provenance'],
        metadata=document.get('metadata'))
  except (KeyError, IndexError, TypeError, ValueError) as e:
    raise FormatError("%s: invalid calibration: %s" % (source, e))


def write_calibration(path, cal):
  """Writes a :py:class:`bob.emc.incircuit.KCalibration` to a calibration file"""
  atomic_write(path, calibration_document(cal))


def read_calibration(path):
  """read_calibration(path) -> KCalibration"""
  return parse_calibration(_read_text(path).decode('utf-8', 'replace'), path)


def model_document(model):
  """model_document(model) -> str"""
  document = collections.OrderedDict([('version', MODEL_VERSION)])
  document.update(model.to_dict())
  return _dump(document)


def parse_model(text, source='<input>'):
  """parse_model(text, [source]) -> CircuitModel"""
  document = _load(text, source, MODEL_VERSION)
  document.pop('version')
  try:
    return CircuitModel.from_dict(document)
  except FormatError as e:
    raise FormatError("%s: %s" % (source, e))


def write_model(path, model):
  """Writes a :py:class:`bob.emc.incircuit.CircuitModel` to a model file"""
  atomic_write(path, model_document(model))


def read_model(path):
  """read_model(path) -> CircuitModel"""
  return parse_model(_read_text(path).decode('utf-8', 'replace'), path)


# Reports

def k_curves_csv(cal):
  """k_curves_csv(cal) -> str

  The three coefficients of a calibration (real, imaginary, magnitude, phase)
  and the conditioning metric per frequency, for plotting.
  """
  rows = []
  with numpy.errstate(invalid='ignore'):
    for i, f in enumerate(cal.grid.points):
      row = ["%.17g" % f]
      for k in (cal.k1, cal.k2, cal.k3):
        row += [_number(k[i].real), _number(k[i].imag), _number(abs(k[i])), _number(numpy.degrees(numpy.angle(k[i])))]
      row += [_number(cal.condition[i]), Flag.render(cal.flags[i])]
      rows.append(row)
  return _csv_text(K_COLUMNS, rows)


def _hz(value):
  for scale, unit in ((1e9, 'GHz'), (1e6, 'MHz'), (1e3, 'kHz')):
    if value >= scale:
      return "%g %s" % (value / scale, unit)
  return "%g Hz" % value


def comparison_text(report):
  """comparison_text(report) -> str

  The per-band table of a :py:class:`bob.emc.incircuit.ComparisonReport`, one
  section per group.
  """
  lines = ["Comparison of %d runs on %d points (%s - %s), threshold %g dB" % (
      len(report.runs), len(report.grid), _hz(report.grid.start), _hz(report.grid.stop), report.threshold_db)]
  header = "%-12s %-12s %-22s %6s %9s %9s %10s  %s" % (
      "run A", "run B", "band", "points", "max dB", "mean dB", "max phase", "verdict")
  for group in report.groups:
    lines += ["", "[%s]" % group, header]
    for s in report.select(group):
      band = "%s - %s" % (_hz(s.band.lo), _hz(s.band.hi))
      lines.append("%-12s %-12s %-22s %6d %9.4f %9.4f %10.3f  %s" % (
          s.label_a, s.label_b, band, s.points, s.max_db, s.mean_db, s.max_phase_deg, s.verdict))
  failed = sum(s.verdict == INCONSISTENT for s in report.statistics)
  lines += ["", "%d of %d band comparison(s) inconsistent" % (failed, len(report.statistics))]
  return "\n".join(lines) + "\n"


def comparison_csv(report):
  """comparison_csv(report) -> str"""
  header = ('group', 'run_a', 'run_b', 'band_lo_hz', 'band_hi_hz', 'points',
      'max_db', 'mean_db', 'max_phase_deg', 'verdict')
  rows = [[g, a, b, "%.17g" % lo, "%.17g" % hi, str(n), _number(mx), _number(mean), _number(phase), verdict]
      for g, a, b, lo, hi, n, mx, mean, phase, verdict in report.rows()]
  return _csv_text(header, rows)


def overlay_csv(frequencies, curves):
  """overlay_csv(frequencies, curves) -> str

  Per-run magnitude (dB-ohm) and phase (degrees) columns against frequency;
  ``curves`` maps run labels to ``(dbohm, phase_deg)``.
  """
  header = ['frequency_hz']
  for label in curves:
    header += ['%s dbohm' % label, '%s phase_deg' % label]
  rows = []
  with numpy.errstate(invalid='ignore'):
    for i, f in enumerate(frequencies):
      row = ["%.17g" % f]
      for dbohm, phase in curves.values():
        row += [_number(dbohm[i]), _number(phase[i])]
      rows.append(row)
  return _csv_text(header, rows)


def write_comparison_report(prefix, report):
  """write_comparison_report(prefix, report) -> [str]

  Writes ``<prefix>.txt``, ``<prefix>.csv`` and ``<prefix>_overlay.csv`` and
  returns their names.
  """
  names = [prefix + '.txt', prefix + '.csv', prefix + '_overlay.csv']
  atomic_write(names[0], comparison_text(report))
  atomic_write(names[1], comparison_csv(report))
  atomic_write(names[2], overlay_csv(*report.overlay()))
  return names
