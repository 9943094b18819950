"""Command line entry point: one subcommand per study, JSON reports and optional CSV tables."""
import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import reports
from .config import QuadratureConfig, load_config
from .corpus import corpus_suite, parse_profile
from .fourier import coincidence_ratio, sample_profile, weighted_fourier_norm
from .geometry import CapSpec, cap_measure_exact, cap_measure_mc
from .norms import compute_norm
from .params import NormKind, SmoothnessParams
from .profiles import extend, nonidentity_witness
from .studies import (aggregate_reports, check_grid_size, equivalence_study, map_grid, omega_check, params_grid,
                      strauss_study)
from .weights import Weight, ap_classify, centered_family, dyadic_family, parse_weight

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_GATED = 1
EXIT_NOT_CONVERGED = 2

PARAM_FLAGS = ("d", "s", "p", "q", "u", "v", "T", "N")


@dataclass
class CommandResult:
  results: list[Any]
  rows: Optional[list[dict[str, Any]]] = None
  gated: list[bool] = field(default_factory=list)
  converged: bool = True

  @property
  def exit_code(self) -> int:
    if self.gated and all(self.gated):
      return EXIT_GATED
    if not self.converged:
      return EXIT_NOT_CONVERGED
    return EXIT_OK


def _split(text: str) -> list[str]:
  items = [item.strip() for item in text.split(",")]
  if not all(items):
    raise ValueError(f"malformed list {text!r}")
  return items


def _floats(text: str) -> list[float]:
  try:
    return [float(item) for item in _split(text)]
  except ValueError:
    raise ValueError(f"malformed number list {text!r}") from None


def _ints(text: str) -> list[int]:
  try:
    return [int(item) for item in _split(text)]
  except ValueError:
    raise ValueError(f"malformed integer list {text!r}") from None


def _kinds(text: str) -> list[NormKind]:
  try:
    return [NormKind(item) for item in _split(text)]
  except ValueError:
    raise ValueError(f"unknown norm kind in {text!r}, expected {', '.join(k.value for k in NormKind)}") from None


def _profiles(args) -> list:
  if not args.profile:
    return corpus_suite()
  return [parse_profile(text) for text in args.profile]


def _grid(args) -> list[SmoothnessParams]:
  axes = {name: _split(getattr(args, name)) for name in PARAM_FLAGS if getattr(args, name) is not None}
  return params_grid(SmoothnessParams(), **axes)


#region commands

def run_cap_measure(args, cfg: QuadratureConfig) -> CommandResult:
  points = [(d, lam, t, r) for d in _ints(args.d) for lam in _floats(args.lam) for t in _floats(args.t)
            for r in _floats(args.r)]

  def evaluate(point):
    spec = CapSpec(*point)
    row = {"d": spec.d, "lambda": spec.lam, "t": spec.t, "r": spec.r, "exact": None}
    if spec.d in (2, 3):
      row["exact"] = cap_measure_exact(spec)
    if args.samples or spec.d > 3:
      estimate = cap_measure_mc(spec, args.samples or cfg.mc_samples, cfg.seed)
      row.update(mc=estimate.estimate, std_error=estimate.std_error, samples=estimate.samples)
    return row

  return _collect(map_grid(evaluate, points, cfg.workers))


def run_omega_check(args, cfg: QuadratureConfig) -> CommandResult:
  check = omega_check(d=args.d, samples=args.samples, seed=cfg.seed)
  return CommandResult(results=[check.to_dict()], converged=check.passed)


def _norm_report(kind: NormKind, g, prm: SmoothnessParams, cfg: QuadratureConfig, args):
  if kind in (NormKind.F_FOURIER, NormKind.B_FOURIER):
    weight = parse_weight(args.weight, cfg) if args.weight else Weight.power(prm.d - 1)
    report = weighted_fourier_norm(sample_profile(g), weight, prm, kind)
    return dataclasses.replace(report, profile=g.name)
  return compute_norm(kind, g, prm, cfg, args.mode)


def run_norm(args, cfg: QuadratureConfig) -> CommandResult:
  kinds = _kinds(args.kind)
  points = [(kind, g, prm) for kind in kinds for g in _profiles(args) for prm in _grid(args)]
  outcomes = map_grid(lambda point: _norm_report(*point, cfg, args), points, cfg.workers)
  done = [o.result for o in outcomes if not o.failed]
  return CommandResult(
    results=[r.to_dict() for r in done] + [{"point": str(o.point), "error": o.error} for o in outcomes if o.failed],
    rows=[r.to_row() for r in done],
    gated=[r.gated for r in done],
    converged=all(r.converged for r in done) and len(done) == len(outcomes),
  )


def run_equivalence(args, cfg: QuadratureConfig) -> CommandResult:
  study = equivalence_study(_profiles(args), _grid(args), _kinds(args.kind), cfg, args.mode, cfg.workers)
  ratios = study.ratios()
  rows = ratios.to_dict(orient="records")
  summary = {"reference": study.reference.value, "constant": study.constant(), "failures": len(study.failures)}
  return CommandResult(
    results=[summary] + [r.to_dict() for r in study.reports],
    rows=rows,
    gated=[r.gated for r in study.reports],
    converged=all(r.converged for r in study.reports) and not study.failures,
  )


def run_coincidence(args, cfg: QuadratureConfig) -> CommandResult:
  points = [(g, prm) for g in _profiles(args) for prm in _grid(args)]
  outcomes = map_grid(lambda point: coincidence_ratio(point[0], point[1], cfg), points, cfg.workers)
  done = [o.result for o in outcomes if not o.failed]
  ratios = [c.ratio for c in done if c.ratio is not None and c.hypothesis.passed]
  constant = max(max(r, 1.0 / r) for r in ratios) if ratios and min(ratios) > 0 else None
  return CommandResult(
    results=[{"constant": constant}] + [c.to_dict() for c in done],
    rows=[{"profile": c.profile, "ratio": c.ratio, "hypothesis": c.hypothesis.passed} for c in done],
    gated=[not c.hypothesis.passed for c in done],
    converged=len(done) == len(outcomes),
  )


def run_muckenhoupt(args, cfg: QuadratureConfig) -> CommandResult:
  weight = parse_weight(args.weight, cfg)
  family = centered_family(_floats(args.radii)) if args.radii else dyadic_family()
  check_grid_size(len(family) * len(_floats(args.p)))
  classification = ap_classify(weight, _floats(args.p), family, cfg)
  rows = [e.to_dict() for e in classification.estimates]
  return CommandResult(results=[classification.to_dict()], rows=rows)


def run_strauss(args, cfg: QuadratureConfig) -> CommandResult:
  profiles = [parse_profile(text) for text in (args.profile or ["gaussian:1", "plateau"])]
  studies = [strauss_study(g, _floats(args.dilations), cfg, cfg.workers) for g in profiles]
  rows = [{"profile": s.profile, "dilation": lam, "value": v} for s in studies for lam, v in zip(s.dilations, s.values)]
  return CommandResult(results=[s.to_dict() for s in studies], rows=rows)


def run_nonidentity(args, cfg: QuadratureConfig) -> CommandResult:
  profiles = [parse_profile(text) for text in (args.profile or ["gaussian:1", "twin"])]
  radii = np.linspace(0.5, 2.0, 7)
  steps = np.linspace(0.1, 1.0, 10)
  points = [(g, order) for g in profiles for order in _ints(args.order)]

  def evaluate(point):
    g, order = point
    witness = nonidentity_witness(extend(g, args.d), order, radii, steps)
    return {"profile": g.name, "d": args.d, **witness.to_dict()}

  return _collect(map_grid(evaluate, points, cfg.workers))


def run_report(args, cfg: QuadratureConfig) -> CommandResult:
  frame = aggregate_reports(args.reports)
  records = frame.replace({np.nan: None}).to_dict(orient="records")
  return CommandResult(results=records, rows=records)


def _collect(outcomes) -> CommandResult:
  done = [o.result for o in outcomes if not o.failed]
  failed = [{"point": str(o.point), "error": o.error} for o in outcomes if o.failed]
  return CommandResult(results=done + failed, converged=not failed)

#endregion


COMMANDS: dict[str, Callable[[argparse.Namespace, QuadratureConfig], CommandResult]] = {
  "cap-measure": run_cap_measure,
  "omega-check": run_omega_check,
  "norm": run_norm,
  "equivalence": run_equivalence,
  "coincidence": run_coincidence,
  "muckenhoupt": run_muckenhoupt,
  "strauss": run_strauss,
  "nonidentity": run_nonidentity,
  "report": run_report,
}


def _common(parser: argparse.ArgumentParser):
  parser.add_argument("--config", help="YAML file overriding the numeric defaults")
  parser.add_argument("--seed", type=int, help="seed of every Monte Carlo stream")
  parser.add_argument("--workers", type=int, help="thread pool width for grid points")
  parser.add_argument("--output", help="write the JSON report here instead of stdout")
  parser.add_argument("--csv", help="also write a flat CSV table here")
  parser.add_argument("--verbose", action="store_true")


def _params(parser: argparse.ArgumentParser):
  for name in PARAM_FLAGS:
    parser.add_argument(f"--{name}", help=f"comma list of {name} values")
  parser.add_argument("--profile", action="append", help="corpus profile such as cusp:0.6 or file:table.txt")
  parser.add_argument("--mode", choices=("display", "exact"), default="display", help="evaluation of the 3D forms")


def build_parser() -> argparse.ArgumentParser:
  parser = argparse.ArgumentParser(prog="radnorm", description=__doc__)
  sub = parser.add_subparsers(dest="command", required=True)

  cmd = sub.add_parser("cap-measure", help="sphere cap measures, exact and Monte Carlo")
  _common(cmd)
  cmd.add_argument("--d", default="3")
  cmd.add_argument("--lambda", dest="lam", required=True)
  cmd.add_argument("--t", required=True)
  cmd.add_argument("--r", required=True)
  cmd.add_argument("--samples", type=int, help="also estimate by Monte Carlo with this many samples")

  cmd = sub.add_parser("omega-check", help="ball sandwich and invariances of the Omega sets")
  _common(cmd)
  cmd.add_argument("--d", type=int, default=3)
  cmd.add_argument("--samples", type=int, default=10_000)

  cmd = sub.add_parser("norm", help="one norm kind over profiles and a parameter grid")
  _common(cmd)
  _params(cmd)
  cmd.add_argument("--kind", required=True, help="comma list of norm kinds")
  cmd.add_argument("--weight", help="weight of the Fourier norms, default |t|^(d-1)")

  cmd = sub.add_parser("equivalence", help="ratios between norm kinds over the corpus")
  _common(cmd)
  _params(cmd)
  cmd.add_argument("--kind", default="f-triangle,f-triangle3d", help="comma list, the first is the reference")

  cmd = sub.add_parser("coincidence", help="3D five-term norm against the |t|^2-weighted Fourier norm")
  _common(cmd)
  _params(cmd)

  cmd = sub.add_parser("muckenhoupt", help="A_p constants of a weight")
  _common(cmd)
  cmd.add_argument("--weight", default="power:2")
  cmd.add_argument("--p", default="1.5,2,2.5,3,3.5,4,6")
  cmd.add_argument("--radii", help="centered intervals [-R, R] instead of the dyadic family")

  cmd = sub.add_parser("strauss", help="radial lemma ratio under dilations")
  _common(cmd)
  cmd.add_argument("--profile", action="append")
  cmd.add_argument("--dilations", default="0.25,0.5,1,2,4")

  cmd = sub.add_parser("nonidentity", help="search for ambient differences no 1D step reproduces")
  _common(cmd)
  cmd.add_argument("--profile", action="append")
  cmd.add_argument("--d", type=int, default=2)
  cmd.add_argument("--order", default="1,2")

  cmd = sub.add_parser("report", help="merge JSON reports into one table")
  _common(cmd)
  cmd.add_argument("reports", nargs="+")
  return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
  parser = build_parser()
  args = parser.parse_args(argv)
  logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                      format="%(levelname)s %(name)s: %(message)s")
  try:
    cfg = load_config(args.config).with_overrides(seed=args.seed, workers=args.workers)
    outcome = COMMANDS[args.command](args, cfg)
  except (ValueError, OSError) as e:
    parser.error(str(e))

  document = reports.envelope(args.command, outcome.results, cfg.to_dict())
  if args.output:
    reports.write_json(document, args.output)
  else:
    sys.stdout.write(reports.dumps(document) + "\n")
  if args.csv:
    reports.write_csv(outcome.rows if outcome.rows is not None else outcome.results, args.csv)
  logger.debug("%s finished with exit code %d", args.command, outcome.exit_code)
  return outcome.exit_code


if __name__ == "__main__":
  sys.exit(main())
