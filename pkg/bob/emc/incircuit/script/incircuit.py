#!/usr/bin/env python
# vim: set fileencoding=utf-8 :

"""In-circuit common-mode impedance extraction with a single inductive probe.

Typical session::

  incircuit simulate example osl -o standard        # or measure the standards
  incircuit characterize standard_open.s1p standard_short.s1p standard_load.s1p -o cal.json
  incircuit extract measured.s1p cal.json -o run.csv
  incircuit simulate example modes                  # one measurement per operating mode
  incircuit extract "Mode 1.s1p" cal.json -o "Mode 1.csv"   # and so on for each mode
  incircuit compare "Mode 1.csv" "Mode 4.csv" --threshold 3 -o comparison
  incircuit report cal.json -o curves

Exit codes: 0 success, 1 error, 2 characterization with singular points,
3 comparison with inconsistent bands.
"""

import argparse
import datetime
import logging
import os
import sys

from .. import io
from ..auxiliary import mode_groupings, mode_terminations
from ..characterization import OslSweeps, conditioning_summary, k_from_osl
from ..config import SessionConfig, parse_band_spec
from ..errors import IncircuitError, ParseError, SpanError
from ..extraction import common_grid, compare_sweeps, extract_impedance, resample
from ..network import Flag
from ..simulator import parse_termination, simulate_gamma, simulate_osl

logger = logging.getLogger("bob.emc.incircuit")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SINGULAR = 2
EXIT_INCONSISTENT = 3

OSL_SUFFIXES = ('_open', '_short', '_load')

_handler = None


def _setup_logging(verbosity):
  global _handler
  if _handler is not None:
    logger.removeHandler(_handler)
  _handler = logging.StreamHandler(sys.stderr)
  _handler.setFormatter(logging.Formatter("%(name)s@%(asctime)s -- %(levelname)s: %(message)s"))
  logger.addHandler(_handler)
  logger.setLevel({0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG))


def _timestamp():
  return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')


def _output(config, path):
  return os.path.join(config.output_dir, path)


def _hz(value):
  return io._hz(value)


def _model_path(name):
  if name == 'example':
    return os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data', 'example_model.json')
  return name


def _read_runs(paths, labels=None):
  """Reads impedance runs; labels default to the file names and must be unique"""
  labels = labels.split(',') if labels else [None] * len(paths)
  if len(labels) != len(paths):
    raise ValueError("%d labels given for %d files" % (len(labels), len(paths)))
  runs = [io.read_impedance_csv(path, label) for path, label in zip(paths, labels)]
  seen = set()
  for path, run in zip(paths, runs):
    if run.label in seen:
      raise ValueError("duplicate run label %r (from %s); use --labels to name the runs" % (run.label, path))
    seen.add(run.label)
  return runs


def _restrict(sweep, lo, hi):
  mask = (sweep.grid.points >= lo) & (sweep.grid.points <= hi)
  return sweep.grid.within(lo, hi), mask


def characterize(args, config):
  """Computes a calibration from the open, short and load standard files"""
  sweeps = []
  references = []
  for path in (args.open, args.short, args.load):
    sweep, z0 = io.read_touchstone(path)
    sweeps.append(sweep)
    references.append(z0)
  if len(set(references)) != 1:
    raise ValueError("the standard files use different reference impedances: %s" % ", ".join(str(r.z0) for r in references))
  z0 = references[0]
  if z0.z0 != config.z0:
    logger.warning("files use a %g ohm reference, the configuration %g ohm; using the files", z0.z0, config.z0)

  if args.resample and any(s.grid != sweeps[0].grid for s in sweeps[1:]):
    lo = max(s.grid.start for s in sweeps)
    hi = min(s.grid.stop for s in sweeps)
    if lo > hi:
      raise SpanError("the standard sweeps share no frequency span")
    grid = sweeps[0].grid.within(lo, hi)
    logger.info("  -> Resampling the standards onto %d points of the open sweep", len(grid))
    sweeps = [resample(s, grid) for s in sweeps]

  metadata = {'power_state': args.power_state}
  if args.probe:
    metadata['probe'] = args.probe
  if args.setup:
    metadata['setup'] = args.setup
  if args.stamp:
    metadata['created'] = _timestamp()

  cal = k_from_osl(OslSweeps(*sweeps), z_std=config.z_std, tol_singular=config.tol_singular,
    tol_cond=config.tol_cond, z0=z0, smooth=config.smooth_width, metadata=metadata)
  output = _output(config, args.output)
  io.write_calibration(output, cal)

  print("Calibration of %d points written to %s" % (len(cal), output))
  print("%-24s %6s %14s %14s %9s %9s" % ("band", "points", "min |GL-GS|", "median", "singular", "ill"))
  for row in conditioning_summary(cal, config.bands):
    print("%-24s %6d %14.6g %14.6g %9d %9d" % ("%s - %s" % (_hz(row.band.lo), _hz(row.band.hi)),
      row.points, row.min_condition, row.median_condition, row.singular, row.ill_conditioned))
  extrapolated = sum(s.count(Flag.EXTRAPOLATED) for s in sweeps)
  singular = cal.count(Flag.SINGULAR)
  print("SINGULAR: %d  ILL_CONDITIONED: %d  EXTRAPOLATED: %d" % (singular, cal.count(Flag.ILL_CONDITIONED), extrapolated))
  return EXIT_SINGULAR if singular else EXIT_OK


def extract(args, config):
  """Extracts the impedance of a measured reflection sweep"""
  gamma, _ = io.read_touchstone(args.gamma)
  cal = io.read_calibration(args.calibration)
  if gamma.grid.stop < cal.grid.start or gamma.grid.start > cal.grid.stop:
    raise SpanError("measurement (%g Hz - %g Hz) and calibration (%g Hz - %g Hz) do not overlap" %
      (gamma.grid.start, gamma.grid.stop, cal.grid.start, cal.grid.stop))
  if gamma.grid != cal.grid and args.resample:
    grid, mask = _restrict(cal, gamma.grid.start, gamma.grid.stop)
    if len(grid) != len(cal):
      cal = cal.replace(grid=grid, k1=cal.k1[mask], k2=cal.k2[mask], k3=cal.k3[mask],
        condition=cal.condition[mask], flags=cal.flags[mask])
    logger.info("  -> Resampling the measurement onto %d calibration points", len(grid))
    gamma = resample(gamma, grid)

  label = args.label or os.path.splitext(os.path.basename(args.gamma))[0]
  z = extract_impedance(gamma, cal, label)
  output = _output(config, args.output)
  io.write_impedance_csv(output, z)
  print("Impedance of %d points written to %s" % (len(z), output))
  print("  ".join("%s: %d" % (flag.name, z.count(flag)) for flag in
    (Flag.SINGULAR, Flag.ILL_CONDITIONED, Flag.EXTRAPOLATED, Flag.NEGATIVE_REAL)))
  return EXIT_OK


def simulate(args, config):
  """Synthesizes reflection sweeps from a circuit model"""
  model = io.read_model(_model_path(args.model))
  grid = config.make_grid()
  # an explicit seed overrides the one of the model noise
  seed = args.seed if args.seed is not None else (config.seed if args.config else None)
  comments = ["synthetic data: %s" % (model.description or "circuit model")]
  if args.stamp:
    comments.append("created %s" % _timestamp())

  if args.termination.lower() == 'osl':
    osl = simulate_osl(model, config.z_std, grid, noise=args.noise, seed=seed)
    names = [_output(config, args.output + suffix + '.s1p') for suffix in OSL_SUFFIXES]
    standards = ("open", "short", "load %g ohm" % config.z_std)
    for name, sweep, standard in zip(names, osl, standards):
      io.write_touchstone_file(name, sweep, model.z0, args.format, comments=comments + ["standard: %s" % standard])
  elif args.termination.lower() == 'modes':
    # one file per operating mode, named after the mode so that extracted runs carry its label
    names = []
    for label, term in mode_terminations(seed=seed or 0).items():
      sweep = simulate_gamma(model, term, grid, noise=not args.no_noise, seed=seed)
      names.append(_output(config, label + '.s1p'))
      io.write_touchstone_file(names[-1], sweep, model.z0, args.format,
        comments=comments + ["termination: %s, synthetic %r" % (label, term)])
  else:
    term = parse_termination(args.termination)
    sweep = simulate_gamma(model, term, grid, noise=not args.no_noise, seed=seed)
    names = [_output(config, args.output if args.output.endswith('.s1p') else args.output + '.s1p')]
    io.write_touchstone_file(names[0], sweep, model.z0, args.format,
      comments=comments + ["termination: %s" % args.termination])
  for name in names:
    print(name)
  return EXIT_OK


def compare(args, config):
  """Compares extracted impedance runs band by band"""
  if len(args.runs) < 2:
    raise ValueError("at least two impedance files are needed, got %d" % len(args.runs))
  runs = _read_runs(args.runs, args.labels)
  groups = None
  if args.modes:
    present = set(r.label for r in runs)
    groups = [(name, members) for name, members in mode_groupings() if set(members) <= present]
    if not groups:
      raise ValueError("--modes needs runs labelled 'Mode 1' ... 'Mode 6'")

  report = compare_sweeps(runs, config.bands, config.consistency_db, groups)
  names = io.write_comparison_report(_output(config, args.output), report)
  sys.stdout.write(io.comparison_text(report))
  for name in names:
    print(name)
  return EXIT_OK if report.consistent else EXIT_INCONSISTENT


def report(args, config):
  """Writes plot data of a calibration and, optionally, of impedance runs"""
  cal = io.read_calibration(args.calibration)
  runs = _read_runs(args.runs, args.labels) if args.runs else []
  names = [_output(config, args.output + '_k.csv')]
  io.atomic_write(names[0], io.k_curves_csv(cal))
  if runs:
    grid = common_grid(runs)
    runs = [r if r.grid == grid else resample(r, grid) for r in runs]
    names.append(_output(config, args.output + '_overlay.csv'))
    io.atomic_write(names[1], io.overlay_csv(grid.points,
      dict((r.label, (r.dbohm, r.phase_deg)) for r in runs)))
  for name in names:
    print(name)
  return EXIT_OK


def _common_options():
  parser = argparse.ArgumentParser(add_help=False)
  parser.add_argument('--config', metavar='FILE', help="JSON session configuration; options given here override it")
  parser.add_argument('--grid', metavar='START:STOP:POINTS[:log|linear]', help="frequency grid of synthesized sweeps")
  parser.add_argument('--z0', type=float, help="reference impedance in ohms")
  parser.add_argument('--z-std', dest='z_std', type=float, help="value of the load standard in ohms")
  parser.add_argument('--seed', type=int, help="seed of the synthetic noise")
  parser.add_argument('--resample', action='store_true', help="align sweeps on different grids by interpolation")
  parser.add_argument('--stamp', action='store_true', help="record the creation time in the outputs")
  parser.add_argument('--output-dir', dest='output_dir', metavar='DIR', help="directory of relative output paths")
  parser.add_argument('-v', '--verbose', action='count', help="increase the verbosity (may be repeated)")
  return parser


def _parser():
  common = _common_options()
  parser = argparse.ArgumentParser(prog='incircuit', description=__doc__.split('\n')[0])
  commands = parser.add_subparsers(dest='command', metavar='command')
  commands.required = True

  p = commands.add_parser('characterize', parents=[common], help=characterize.__doc__)
  p.add_argument('open', help="Touchstone file measured with the open standard")
  p.add_argument('short', help="Touchstone file measured with the short standard")
  p.add_argument('load', help="Touchstone file measured with the load standard")
  p.add_argument('-o', '--output', default='calibration.json', help="calibration file [%(default)s]")
  p.add_argument('--tol-singular', dest='tol_singular', type=float)
  p.add_argument('--tol-cond', dest='tol_cond', type=float)
  p.add_argument('--smooth', type=int, help="moving-average width applied to the standards")
  p.add_argument('--bands', help="bands of the conditioning summary, LO-HI[,LO-HI...]")
  p.add_argument('--probe', help="probe description recorded in the calibration")
  p.add_argument('--setup', help="setup description recorded in the calibration")
  p.add_argument('--power-state', dest='power_state', default='off', help="power state of the system during characterization [%(default)s]")
  p.set_defaults(func=characterize)

  p = commands.add_parser('extract', parents=[common], help=extract.__doc__)
  p.add_argument('gamma', help="Touchstone file measured with the system in place")
  p.add_argument('calibration', help="calibration file")
  p.add_argument('-o', '--output', default='impedance.csv', help="impedance CSV file [%(default)s]")
  p.add_argument('--label', help="run label (defaults to the measurement file name)")
  p.set_defaults(func=extract)

  p = commands.add_parser('simulate', parents=[common], help=simulate.__doc__)
  p.add_argument('model', help="model file, or 'example' for the bundled synthetic model")
  p.add_argument('termination', help="'osl', 'modes', 'open', 'short', 'R=50', 'series:R=..,L=..,C=..', 'parallel:...' or 'table:FILE'")
  p.add_argument('-o', '--output', default='simulated', help="output file, or file stem for 'osl'; 'modes' writes 'Mode 1.s1p' ... 'Mode 6.s1p' [%(default)s]")
  p.add_argument('--format', default='RI', choices=('RI', 'MA', 'DB'), help="Touchstone number format [%(default)s]")
  p.add_argument('--noise', action='store_true', help="apply the model noise to the standards")
  p.add_argument('--no-noise', dest='no_noise', action='store_true', help="do not apply the model noise to the termination")
  p.set_defaults(func=simulate)

  p = commands.add_parser('compare', parents=[common], help=compare.__doc__)
  p.add_argument('runs', nargs='+', help="impedance CSV files")
  p.add_argument('--labels', help="comma-separated run labels (default: file names)")
  p.add_argument('--bands', help="bands LO-HI[,LO-HI...]")
  p.add_argument('--threshold', type=float, help="consistency threshold in dB")
  p.add_argument('--modes', action='store_true', help="compare the operating-mode groupings only")
  p.add_argument('-o', '--output', default='comparison', help="prefix of the report files [%(default)s]")
  p.set_defaults(func=compare)

  p = commands.add_parser('report', parents=[common], help=report.__doc__)
  p.add_argument('calibration', help="calibration file")
  p.add_argument('runs', nargs='*', help="impedance CSV files to overlay")
  p.add_argument('--labels', help="comma-separated run labels (default: file names)")
  p.add_argument('-o', '--output', default='report', help="prefix of the plot data files [%(default)s]")
  p.set_defaults(func=report)
  return parser


def _config(args):
  config = SessionConfig.load(args.config) if args.config else SessionConfig()
  bands = getattr(args, 'bands', None)
  return config.override(
    grid=args.grid, z0=args.z0, z_std=args.z_std, seed=args.seed,
    output_dir=args.output_dir, verbosity=args.verbose,
    tol_singular=getattr(args, 'tol_singular', None),
    tol_cond=getattr(args, 'tol_cond', None),
    smooth_width=getattr(args, 'smooth', None),
    consistency_db=getattr(args, 'threshold', None),
    bands=parse_band_spec(bands) if bands else None)


def main(argv=None):
  args = _parser().parse_args(argv)
  _setup_logging(args.verbose or 0)
  try:
    config = _config(args)
    _setup_logging(config.verbosity)
    return args.func(args, config)
  except ParseError as e:
    print("incircuit %s: %s" % (args.command, e), file=sys.stderr)
  except (IncircuitError, ValueError, OSError) as e:
    print("incircuit %s: error: %s" % (args.command, e), file=sys.stderr)
  return EXIT_ERROR


if __name__ == '__main__':
  sys.exit(main())
