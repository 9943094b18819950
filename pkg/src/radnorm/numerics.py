"""Shared numerical machinery.

Adaptive 1D quadrature with graded subdivision toward the endpoints,
geometric grids for dt/t integrals, weighted outer power integrals,
composite Gauss-Legendre rules for the vectorised nested integrals, grid
suprema refined around the running argmax, and a seeded Monte Carlo engine
whose result does not depend on how chunks are spread over workers.
"""
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .config import QuadratureConfig

logger = logging.getLogger(__name__)

# graded pieces toward each endpoint: [a, a + (b-a)/2^k]
GRADING_LEVELS = 6


@dataclass(frozen=True)
class QuadratureResult:
  value: float
  error: float
  converged: bool = True
  pieces: int = 1


def _graded_breakpoints(a: float, b: float, points: Optional[Sequence[float]]) -> np.ndarray:
  width = b - a
  ks = 2.0 ** -np.arange(1, GRADING_LEVELS + 1)
  marks = [a, b]
  marks.extend(a + width * ks)
  marks.extend(b - width * ks)
  if points is not None:
    marks.extend(p for p in points if a < p < b)
  return np.unique(np.asarray(marks, dtype=float))


def integrate_adaptive(fn: Callable[[float], float], a: float, b: float, cfg: Optional[QuadratureConfig] = None,
                       points: Optional[Sequence[float]] = None) -> QuadratureResult:
  """Integrates fn over [a, b].

  The interval is cut into pieces graded geometrically toward both endpoints
  (plus any interior `points` where fn has kinks) and every piece goes through
  QUADPACK's adaptive routine. Integrable endpoint singularities are therefore
  resolved without special casing. When a piece fails to converge the partial
  value is still returned, with `converged=False`.
  """
  cfg = cfg or QuadratureConfig()
  if not a < b:
    raise ValueError(f"integrate_adaptive needs a < b, got a={a}, b={b}")
  marks = _graded_breakpoints(a, b, points)
  pieces = len(marks) - 1
  total = 0.0
  error = 0.0
  converged = True
  for lo, hi in zip(marks[:-1], marks[1:]):
    with warnings.catch_warnings(record=True) as caught:
      warnings.simplefilter("always", integrate.IntegrationWarning)
      value, err = integrate.quad(fn, lo, hi, epsabs=cfg.abs_tol / pieces, epsrel=cfg.rel_tol,
                                  limit=cfg.max_subdivisions)
    if any(issubclass(w.category, integrate.IntegrationWarning) for w in caught):
      converged = False
    total += value
    error += err
  if not converged:
    logger.debug("integrate_adaptive did not converge on [%g, %g], value=%g err=%g", a, b, total, error)
  if not math.isfinite(total):
    converged = False
  return QuadratureResult(value=total, error=error, converged=converged, pieces=pieces)


#region geometric grids and dt/t integrals

def simpson_weights(n: int) -> np.ndarray:
  """Composite Simpson weights for n equispaced points of unit spacing."""
  if n < 2:
    raise ValueError("need at least two points")
  if n % 2 == 0:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w
  w = np.ones(n)
  w[1:-1:2] = 4.0
  w[2:-1:2] = 2.0
  return w / 3.0


def geometric_grid(t_min: float, t_max: float, points_per_decade: int):
  """Returns (t, w): nodes ascending in t and weights for the measure dt/t.

  The nodes are equispaced in log t, always with an odd count so the weights
  are Simpson's.
  """
  if not 0 < t_min < t_max:
    raise ValueError(f"geometric grid needs 0 < t_min < t_max, got {t_min}, {t_max}")
  decades = math.log10(t_max / t_min)
  n = max(2, int(math.ceil(decades * points_per_decade))) + 1
  if n % 2 == 0:
    n += 1
  log_t = np.linspace(math.log(t_min), math.log(t_max), n)
  h = log_t[1] - log_t[0]
  return np.exp(log_t), simpson_weights(n) * h


def config_t_grid(cfg: QuadratureConfig, t_max: Optional[float] = None):
  grid = cfg.t_grid
  return geometric_grid(grid.t_min, t_max if t_max is not None else grid.t_max, grid.points_per_decade)


def log_measure_norm(values: np.ndarray, t: np.ndarray, w: np.ndarray, s: float, q: float, axis: int = -1) -> np.ndarray:
  """(sum_k w_k t_k^{-sq} values_k^q)^{1/q} along `axis`; q = inf gives max_k t_k^{-s} values_k."""
  if q <= 0:
    raise ValueError(f"q must be positive, got {q}")
  values = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
  if math.isinf(q):
    return np.max(t ** (-s) * values, axis=-1)
  total = np.sum(w * t ** (-s * q) * values ** q, axis=-1)
  return total ** (1.0 / q)


def log_measure_tail(values: np.ndarray, t: np.ndarray, s: float, q: float, axis: int = -1) -> np.ndarray:
  """Bound for the part of the dt/t integral below the smallest grid node.

  The integrand is extrapolated as values ~ t^gamma with gamma fitted on the
  two smallest nodes; returns inf where gamma <= s (the tail does not decay).
  """
  values = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
  v0, v1 = values[..., 0], values[..., 1]
  with np.errstate(divide="ignore", invalid="ignore"):
    gamma = np.log(v1 / v0) / math.log(t[1] / t[0])
    if math.isinf(q):
      tail = np.where(gamma >= s, 0.0, np.inf)
    else:
      tail = np.where(gamma > s, v0 ** q * t[0] ** (-s * q) / ((gamma - s) * q), np.inf)
  return np.where((v0 == 0) & (v1 == 0), 0.0, tail)


def integrate_log_measure(fn: Callable[[np.ndarray], np.ndarray], t_min: float, t_max: float, q: float, s: float,
                          cfg: Optional[QuadratureConfig] = None) -> float:
  """(int_{t_min}^{t_max} t^{-sq} fn(t)^q dt/t)^{1/q}; q = inf gives the grid sup of t^{-s} fn(t).

  fn is called once on the whole geometric grid.
  """
  cfg = cfg or QuadratureConfig()
  if q <= 0:
    raise ValueError(f"q must be positive, got {q}")
  t, w = geometric_grid(t_min, t_max, cfg.t_grid.points_per_decade)
  values = np.abs(np.asarray(fn(t), dtype=float))
  return float(log_measure_norm(values, t, w, s, q))

#endregion


def outer_weighted_power(fn: Callable[[float], float], weight: Callable[[float], float], p: float, domain: tuple[float, float],
                         cfg: Optional[QuadratureConfig] = None, points: Optional[Sequence[float]] = None) -> float:
  """(int_domain |fn(r)|^p w(r) dr)^{1/p}; p = inf gives the grid sup of |fn|."""
  cfg = cfg or QuadratureConfig()
  if p <= 0:
    raise ValueError(f"p must be positive, got {p}")
  a, b = domain
  if math.isinf(p):
    return float(grid_sup(lambda x: np.abs(np.vectorize(fn)(x)), a, b, cfg))
  result = integrate_adaptive(lambda r: abs(fn(r)) ** p * weight(r), a, b, cfg, points=points)
  return max(result.value, 0.0) ** (1.0 / p)


#region Gauss-Legendre rules

@lru_cache(maxsize=32)
def _legendre(n: int):
  x, w = special.roots_legendre(n)
  return x, w


def gauss_on_intervals(lo, hi, n: int):
  """Gauss-Legendre nodes and weights mapped onto [lo, hi] elementwise.

  lo and hi broadcast against each other; the returned arrays carry a trailing
  axis of length n. Empty intervals (hi <= lo) get zero weights.
  """
  x, w = _legendre(n)
  lo = np.asarray(lo, dtype=float)[..., None]
  hi = np.asarray(hi, dtype=float)[..., None]
  half = np.maximum(hi - lo, 0.0) / 2.0
  nodes = lo + half * (x + 1.0)
  return nodes, half * w


def composite_gauss(a: float, b: float, n: int, piece: float, breakpoints: Sequence[float] = ()):
  """Composite rule on [a, b]: pieces no longer than `piece`, split at `breakpoints`."""
  marks = {a, b}
  marks.update(p for p in breakpoints if a < p < b)
  marks = sorted(marks)
  nodes, weights = [], []
  for lo, hi in zip(marks[:-1], marks[1:]):
    count = max(1, int(math.ceil((hi - lo) / piece)))
    edges = np.linspace(lo, hi, count + 1)
    x, w = gauss_on_intervals(edges[:-1], edges[1:], n)
    nodes.append(x.ravel())
    weights.append(w.ravel())
  return np.concatenate(nodes), np.concatenate(weights)

#endregion


#region suprema

def batched_sup(fn: Callable[[np.ndarray], np.ndarray], lo, hi, points: int, levels: int) -> np.ndarray:
  """Sup of fn over [lo, hi] for every entry of the broadcast (lo, hi) arrays.

  fn maps an array of abscissae with a trailing sample axis to values of the
  same shape. Each level samples `points` equispaced abscissae and the next
  level samples the third of the current bracket centred at the running
  argmax. The running max never decreases.
  """
  lo = np.asarray(lo, dtype=float)
  hi = np.asarray(hi, dtype=float)
  lo, hi = np.broadcast_arrays(lo, hi)
  grid = np.linspace(0.0, 1.0, points)
  a, b = lo.copy(), hi.copy()
  best = np.full(lo.shape, -np.inf)
  for level in range(levels + 1):
    xs = a[..., None] + (b - a)[..., None] * grid
    vals = np.asarray(fn(xs), dtype=float)
    k = np.argmax(vals, axis=-1)
    top = np.take_along_axis(vals, k[..., None], axis=-1)[..., 0]
    arg = np.take_along_axis(xs, k[..., None], axis=-1)[..., 0]
    best = np.maximum(best, top)
    width = (b - a) / 3.0
    a = np.maximum(lo, arg - width / 2.0)
    b = np.minimum(hi, arg + width / 2.0)
  return best


def grid_sup(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float, cfg: Optional[QuadratureConfig] = None) -> float:
  cfg = cfg or QuadratureConfig()
  return float(batched_sup(fn, a, b, cfg.sup_points, cfg.sup_levels))

#endregion


#region Monte Carlo

@dataclass(frozen=True)
class MonteCarloEstimate:
  mean: float
  std_error: float
  samples: int
  maximum: float


def philox(seed: int, stream: int = 0) -> np.random.Generator:
  """Counter-based generator for (seed, stream); identical across platforms."""
  return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))


class MonteCarloEngine:
  """Seeded sample means over a fixed chunk partition.

  Chunk k always draws from stream k, and the per-chunk partial sums are
  reduced in chunk order, so serial and threaded runs agree bit for bit.
  """

  def __init__(self, seed: int, chunk: int = 65_536, workers: int = 1):
    if chunk < 1 or workers < 1:
      raise ValueError("chunk and workers must be positive")
    self.seed = seed
    self.chunk = chunk
    self.workers = workers

  @classmethod
  def from_config(cls, cfg: QuadratureConfig) -> "MonteCarloEngine":
    return cls(seed=cfg.seed, chunk=cfg.mc_chunk, workers=cfg.workers)

  def estimate(self, draw: Callable[[np.random.Generator, int], np.ndarray], samples: int) -> MonteCarloEstimate:
    """Mean of draw(rng, m) over `samples` draws, with its standard error."""
    if samples < 2:
      raise ValueError(f"need at least two samples, got {samples}")
    sizes = [min(self.chunk, samples - start) for start in range(0, samples, self.chunk)]

    def run(k: int):
      values = np.asarray(draw(philox(self.seed, k), sizes[k]), dtype=float)
      return float(np.sum(values)), float(np.sum(values * values)), float(np.max(values))

    if self.workers > 1 and len(sizes) > 1:
      logger.debug("dispatching %d Monte Carlo chunks to %d workers", len(sizes), self.workers)
      with ThreadPoolExecutor(max_workers=self.workers) as pool:
        partials = list(pool.map(run, range(len(sizes))))
    else:
      partials = [run(k) for k in range(len(sizes))]

    total = 0.0
    total_sq = 0.0
    maximum = -math.inf
    for s, ss, m in partials:
      total += s
      total_sq += ss
      maximum = max(maximum, m)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return MonteCarloEstimate(mean=mean, std_error=math.sqrt(var / samples), samples=samples, maximum=maximum)

#endregion
