"""Parameter and corpus sweeps behind the CLI commands."""
import itertools
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np
import pandas as pd
from scipy import stats

from .config import QuadratureConfig
from .corpus import corpus
from .geometry import INNER_RADIUS, OUTER_RADIUS, omega_contains_batch
from .norms import compute_norm, norm_sobolev_radial
from .numerics import grid_sup, philox
from .params import NormKind, SmoothnessParams
from .profiles import RadialProfile, modulus_slope
from .reports import SCHEMA, NormReport, rows_frame

logger = logging.getLogger(__name__)

MAX_GRID_POINTS = 10_000

P = TypeVar("P")
R = TypeVar("R")


@dataclass
class PointResult:
  point: Any
  result: Any = None
  error: Optional[str] = None

  @property
  def failed(self) -> bool:
    return self.error is not None


def check_grid_size(size: int):
  if size > MAX_GRID_POINTS:
    raise ValueError(f"grid has {size} points, at most {MAX_GRID_POINTS} are allowed")


def map_grid(fn: Callable[[P], R], points: Sequence[P], workers: int = 1) -> list[PointResult]:
  """Evaluates fn at every grid point, in grid order.

  A ValueError at one point is logged and recorded on that point; the rest of
  the grid still runs.
  """
  check_grid_size(len(points))

  def run(point):
    try:
      return PointResult(point, fn(point))
    except ValueError as e:
      logger.warning("grid point %s failed: %s", point, e)
      return PointResult(point, error=str(e))

  if workers > 1 and len(points) > 1:
    logger.debug("dispatching %d grid points to %d workers", len(points), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
      return list(pool.map(run, points))
  return [run(p) for p in points]


def params_grid(base: SmoothnessParams, **axes: Iterable[Any]) -> list[SmoothnessParams]:
  """Cartesian product of the given parameter axes over `base`."""
  names = list(axes)
  values = [list(axes[n]) for n in names]
  check_grid_size(math.prod(len(v) for v in values) if values else 1)
  return [base.replace(**dict(zip(names, combo))) for combo in itertools.product(*values)]


#region equivalence of characterizations

@dataclass
class EquivalenceStudy:
  """Norm reports per (profile, params) and the ratios of each kind to the reference kind."""
  reference: NormKind
  kinds: list[NormKind]
  reports: list[NormReport] = field(default_factory=list)
  failures: list[PointResult] = field(default_factory=list)

  def ratios(self) -> pd.DataFrame:
    """One row per (profile, params, kind); gated or zero reference values give NaN."""
    frame = pd.DataFrame([{
      "profile": r.profile,
      "params": json.dumps(r.params.to_dict(), sort_keys=True),
      "kind": r.kind,
      "value": r.value,
      "gated": r.gated,
    } for r in self.reports])
    if frame.empty:
      return frame
    ref = frame[frame.kind == self.reference.value].set_index(["profile", "params"])
    joined = frame.join(ref[["value", "gated"]], on=["profile", "params"], rsuffix="_ref")
    usable = ~(joined.gated | joined.gated_ref) & (joined.value_ref > 0)
    joined["ratio"] = np.where(usable, joined.value / joined.value_ref.where(usable, 1.0), np.nan)
    return joined.drop(columns=["value_ref"])

  def constant(self) -> Optional[float]:
    """max(ratio, 1/ratio) over the ungated points, the empirical equivalence constant."""
    ratios = self.ratios()
    if ratios.empty:
      return None
    r = ratios.ratio.dropna()
    r = r[r > 0]
    if r.empty:
      return None
    return float(np.maximum(r, 1.0 / r).max())

  @property
  def all_gated(self) -> bool:
    return bool(self.reports) and all(r.gated for r in self.reports)


def equivalence_study(profiles: Sequence[RadialProfile], grid: Sequence[SmoothnessParams],
                      kinds: Sequence[NormKind], cfg: Optional[QuadratureConfig] = None,
                      mode: str = "display", workers: int = 1) -> EquivalenceStudy:
  """Every kind on every (profile, params) pair; the first kind is the reference."""
  if not kinds:
    raise ValueError("need at least one norm kind")
  points = [(g, prm, kind) for g in profiles for prm in grid for kind in kinds]

  def evaluate(point):
    g, prm, kind = point
    return compute_norm(kind, g, prm, cfg, mode)

  study = EquivalenceStudy(reference=kinds[0], kinds=list(kinds))
  for outcome in map_grid(evaluate, points, workers):
    if outcome.failed:
      study.failures.append(outcome)
    else:
      study.reports.append(outcome.result)
  return study

#endregion


#region radial lemma

@dataclass(frozen=True)
class StraussStudy:
  profile: str
  dilations: tuple[float, ...]
  values: tuple[Optional[float], ...]

  @property
  def spread(self) -> Optional[float]:
    """max S / min S over the dilations; None when no ratio is defined."""
    finite = [v for v in self.values if v is not None]
    if not finite or min(finite) == 0:
      return None
    return max(finite) / min(finite)

  def to_dict(self):
    return {"profile": self.profile, "dilations": list(self.dilations), "values": list(self.values),
            "spread": self.spread}


def strauss_ratio(g: RadialProfile, cfg: Optional[QuadratureConfig] = None) -> Optional[float]:
  """sup_t |t| |g(t)| / ||g | H^1_rad(R^3)||, or None for the zero profile."""
  cfg = cfg or QuadratureConfig()
  radius = g.outer_radius(cfg)
  peak = grid_sup(lambda t: np.abs(t * g(t)), 0.0, radius, cfg.with_overrides(sup_points=257))
  h1 = norm_sobolev_radial(g, SmoothnessParams(d=3, p=2.0), cfg).value
  if h1 == 0:
    return None
  return peak / h1


def strauss_study(g: RadialProfile, dilations: Sequence[float] = (0.25, 0.5, 1.0, 2.0, 4.0),
                  cfg: Optional[QuadratureConfig] = None, workers: int = 1) -> StraussStudy:
  outcomes = map_grid(lambda lam: strauss_ratio(g.dilated(lam), cfg), list(dilations), workers)
  return StraussStudy(profile=g.name, dilations=tuple(float(x) for x in dilations),
                      values=tuple(o.result for o in outcomes))

#endregion


#region modulus slopes

@dataclass(frozen=True)
class SlopeRow:
  beta: float
  p: float
  slope: float

  @property
  def expected(self) -> float:
    return self.beta + 1.0 / self.p

  def to_dict(self):
    return {"beta": self.beta, "p": self.p, "slope": self.slope, "expected": self.expected}


def slope_study(betas: Sequence[float], p: float = 2.0, cfg: Optional[QuadratureConfig] = None,
                workers: int = 1) -> list[SlopeRow]:
  """Fitted modulus slopes of cusp(beta) against the critical exponent beta + 1/p."""
  outcomes = map_grid(lambda beta: modulus_slope(corpus("cusp", beta), p, cfg=cfg).slope, list(betas), workers)
  return [SlopeRow(beta=o.point, p=p, slope=o.result) for o in outcomes if not o.failed]

#endregion


#region Omega sets

@dataclass(frozen=True)
class OmegaCheck:
  """Violation counts of the ball sandwich and of scaling and rotation invariance."""
  d: int
  samples: int
  inner_violations: int
  outer_violations: int
  scaling_mismatches: int
  rotation_mismatches: int

  @property
  def passed(self) -> bool:
    return not (self.inner_violations or self.outer_violations or self.scaling_mismatches
                or self.rotation_mismatches)

  def to_dict(self):
    return {**asdict(self), "passed": self.passed}


def _ball_points(rng: np.random.Generator, d: int, m: int, radius) -> np.ndarray:
  g = rng.standard_normal((m, d))
  g /= np.linalg.norm(g, axis=1, keepdims=True)
  return g * (np.asarray(radius) * rng.random(m) ** (1.0 / d))[:, None]


def omega_check(d: int = 3, samples: int = 10_000, seed: int = 0) -> OmegaCheck:
  """Seeded check of B(0, t/4) in Omega_t(x) in B(0, 3t) and of the invariances of membership.

  x is drawn from B(0, 3) so both branches of the definition are hit, t
  log-uniformly from [1e-2, 1e2].
  """
  if d < 2:
    raise ValueError(f"dimension must be >= 2, got {d}")
  if samples < 1:
    raise ValueError(f"need at least one sample, got {samples}")
  rng = philox(seed, 0)
  x = _ball_points(rng, d, samples, OUTER_RADIUS)
  t = 10.0 ** rng.uniform(-2.0, 2.0, samples)

  inner = _ball_points(rng, d, samples, INNER_RADIUS * t)
  inner_violations = int(np.sum(~omega_contains_batch(x, inner, t)))

  # proposals reach past the outer ball so the outer bound is actually tested
  h = _ball_points(rng, d, samples, (OUTER_RADIUS + 1.0) * t)
  member = omega_contains_batch(x, h, t)
  outer_violations = int(np.sum(member & (np.linalg.norm(h, axis=1) >= OUTER_RADIUS * t)))

  scaled = omega_contains_batch(x, h / t[:, None], np.ones(samples))
  rotation = stats.special_ortho_group.rvs(d, random_state=rng)
  rotated = omega_contains_batch(x @ rotation.T, h @ rotation.T, t)
  logger.debug("Omega check in d=%d: %d of %d proposals are members", d, int(member.sum()), samples)
  return OmegaCheck(d=d, samples=samples, inner_violations=inner_violations, outer_violations=outer_violations,
                    scaling_mismatches=int(np.sum(scaled != member)),
                    rotation_mismatches=int(np.sum(rotated != member)))

#endregion


def aggregate_reports(filenames: Sequence[str]) -> pd.DataFrame:
  """Merges the `results` of several JSON reports into one table, one row per result.

  Nested mappings become dotted columns; list-valued fields are left out.
  """
  records = []
  for filename in filenames:
    try:
      with open(filename, encoding="utf-8") as f:
        document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
      raise ValueError(f"{filename}: unreadable report ({e})") from e
    if not isinstance(document, dict) or document.get("schema") != SCHEMA:
      raise ValueError(f"{filename}: not a {SCHEMA} report")
    results = document.get("results")
    if not isinstance(results, list):
      results = [results]
    for item in results:
      record = {"source": filename, "command": document.get("command")}
      if isinstance(item, dict):
        record.update((k, v) for k, v in item.items() if k not in record)
      else:
        record["value"] = item
      records.append(record)
  frame = rows_frame(records)
  lists = [c for c in frame.columns if frame[c].map(lambda v: isinstance(v, list)).any()]
  return frame.drop(columns=lists)
