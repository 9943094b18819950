"""Weights on the line and the Muckenhoupt A_p machinery."""
import enum
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional, Sequence

import numpy as np
from scipy import integrate, interpolate

from .config import QuadratureConfig, normpath
from .numerics import integrate_adaptive

logger = logging.getLogger(__name__)

# the dual average is divergent when it grows by more than this factor across
# two refinement rounds toward a zero of the weight
DIVERGENCE_GROWTH = 10.0
# excluded neighbourhood of a zero in round k, relative to the interval width
_ROUND_EXPONENTS = (4, 16, 64)


class WeightTag(enum.Enum):
  POWER = "power"
  SMOOTH_RHO = "smooth_rho"
  CONSTANT = "constant"
  TABULATED = "tabulated"


@dataclass(frozen=True)
class Weight:
  """A weight w >= 0 on the line.

  power(alpha) is |t|^alpha, smooth_rho(alpha) is (1 + t^2)^(alpha/2),
  constant(c) is c, tabulated interpolates an even table given on t >= 0.
  """
  tag: WeightTag
  alpha: float = 0.0
  value: float = 1.0
  table: Optional[tuple[tuple[float, ...], tuple[float, ...]]] = field(default=None, repr=False)

  def __post_init__(self):
    if self.tag is WeightTag.CONSTANT and self.value <= 0:
      raise ValueError(f"constant weight must be positive, got {self.value}")
    if self.tag in (WeightTag.POWER, WeightTag.SMOOTH_RHO) and self.alpha < 0:
      raise ValueError(f"weight exponent must be non-negative, got {self.alpha}")

  def __call__(self, t):
    t = np.asarray(t, dtype=float)
    if self.tag is WeightTag.POWER:
      return np.abs(t) ** self.alpha
    if self.tag is WeightTag.SMOOTH_RHO:
      return (1.0 + t * t) ** (self.alpha / 2.0)
    if self.tag is WeightTag.CONSTANT:
      return np.full_like(t, self.value)
    return self._spline(np.abs(t))

  @cached_property
  def _spline(self):
    ts, ws = self.table
    return interpolate.interp1d(ts, ws, kind="linear", bounds_error=False, fill_value=(ws[0], ws[-1]))

  @property
  def singular_points(self) -> tuple[float, ...]:
    """Zeros of the weight, where w^{-p'/p} may fail to be integrable."""
    if self.tag is WeightTag.POWER and self.alpha > 0:
      return (0.0,)
    if self.tag is WeightTag.TABULATED:
      ts, ws = self.table
      zeros = [t for t, w in zip(ts, ws) if w == 0]
      return tuple(sorted(set(zeros + [-t for t in zeros])))
    return ()

  @property
  def expected_ap_threshold(self) -> Optional[float]:
    """|t|^alpha is in A_p exactly when p > 1 + alpha."""
    if self.tag is WeightTag.POWER:
      return 1.0 + self.alpha
    return None

  def describe(self) -> str:
    if self.tag is WeightTag.POWER:
      return f"|t|^{self.alpha:g}"
    if self.tag is WeightTag.SMOOTH_RHO:
      return f"(1+t^2)^({self.alpha:g}/2)"
    if self.tag is WeightTag.CONSTANT:
      return f"{self.value:g}"
    return "tabulated"

  def to_dict(self) -> dict[str, Any]:
    return {"tag": self.tag.value, "alpha": self.alpha, "value": self.value, "label": self.describe()}

  @classmethod
  def power(cls, alpha: float) -> "Weight":
    return cls(WeightTag.POWER, alpha=float(alpha))

  @classmethod
  def smooth_rho(cls, alpha: float) -> "Weight":
    return cls(WeightTag.SMOOTH_RHO, alpha=float(alpha))

  @classmethod
  def constant(cls, value: float = 1.0) -> "Weight":
    return cls(WeightTag.CONSTANT, value=float(value))

  @classmethod
  def tabulated(cls, ts: Sequence[float], ws: Sequence[float], cfg: Optional[QuadratureConfig] = None) -> "Weight":
    ts = np.asarray(ts, dtype=float)
    ws = np.asarray(ws, dtype=float)
    if ts.ndim != 1 or ts.shape != ws.shape or len(ts) < 2:
      raise ValueError("tabulated weight needs two equally long columns with at least two rows")
    if np.any(ts < 0) or np.any(np.diff(ts) <= 0):
      raise ValueError("tabulated weight abscissae must be non-negative and strictly increasing")
    if np.any(ws < 0) or not np.all(np.isfinite(ws)):
      raise ValueError("tabulated weight values must be finite and non-negative")
    weight = cls(WeightTag.TABULATED, table=(tuple(ts), tuple(ws)))
    _check_local_integrability(weight, float(ts[-1]), cfg)
    return weight

  @classmethod
  def from_file(cls, filename: str, cfg: Optional[QuadratureConfig] = None) -> "Weight":
    data = np.loadtxt(normpath(filename), ndmin=2)
    if data.shape[1] != 2:
      raise ValueError(f"{filename}: expected two columns (t, w(t)), got {data.shape[1]}")
    return cls.tabulated(data[:, 0], data[:, 1], cfg)

  @classmethod
  def from_dict(cls, d: dict[str, Any]) -> "Weight":
    tag = WeightTag(d.get("tag", "constant"))
    if tag is WeightTag.POWER:
      return cls.power(d.get("alpha", 0.0))
    if tag is WeightTag.SMOOTH_RHO:
      return cls.smooth_rho(d.get("alpha", 0.0))
    if tag is WeightTag.CONSTANT:
      return cls.constant(d.get("value", 1.0))
    raise ValueError("tabulated weights are loaded with Weight.from_file")


def _check_local_integrability(weight: Weight, radius: float, cfg: Optional[QuadratureConfig]):
  result = integrate_adaptive(lambda t: float(weight(t)), -radius, radius, cfg)
  if not (result.converged and math.isfinite(result.value)):
    raise ValueError("tabulated weight is not locally integrable")


def parse_weight(text: str, cfg: Optional[QuadratureConfig] = None) -> Weight:
  """'power:2', 'rho:2', 'constant', 'constant:3' or 'file:path/to/table.txt'."""
  name, _, arg = text.strip().partition(":")
  if name == "file":
    return Weight.from_file(arg, cfg)
  try:
    value = float(arg) if arg else None
  except ValueError:
    raise ValueError(f"malformed weight {text!r}") from None
  if name == "power" and value is not None:
    return Weight.power(value)
  if name in ("rho", "smooth_rho") and value is not None:
    return Weight.smooth_rho(value)
  if name == "constant":
    return Weight.constant(1.0 if value is None else value)
  raise ValueError(f"malformed weight {text!r}, expected power:a, rho:a, constant[:c] or file:path")


#region A_p constants

@dataclass(frozen=True)
class Interval:
  center: float
  half_width: float

  @property
  def bounds(self) -> tuple[float, float]:
    return self.center - self.half_width, self.center + self.half_width


def dyadic_family(k_range=range(-6, 7), j_range=range(-6, 7)) -> list[Interval]:
  """Centers {0, +-2^k} and half-widths {2^j}."""
  centers = [0.0]
  for k in k_range:
    centers.extend([2.0 ** k, -(2.0 ** k)])
  return [Interval(c, 2.0 ** j) for c in centers for j in j_range]


def centered_family(radii: Sequence[float]) -> list[Interval]:
  return [Interval(0.0, float(r)) for r in radii]


@dataclass(frozen=True)
class ApEstimate:
  p: float
  value: float
  divergent: bool
  worst_interval: Optional[Interval] = None

  def to_dict(self) -> dict[str, Any]:
    return {
      "p": self.p,
      "value": None if self.divergent else self.value,
      "divergent": self.divergent,
      "worst_interval": None if self.worst_interval is None else [self.worst_interval.center, self.worst_interval.half_width],
    }


def _log_substituted(fn, lo: float, hi: float, cfg: QuadratureConfig) -> float:
  """int_lo^hi fn(t) dt for 0 < lo < hi via t = e^x, which grades toward 0."""
  def integrand(x):
    t = math.exp(x)
    return float(fn(t)) * t
  with np.errstate(over="ignore"):
    value, _ = integrate.quad(integrand, math.log(lo), math.log(hi), epsabs=0.0, epsrel=cfg.rel_tol,
                              limit=cfg.max_subdivisions)
  return value


def _dual_integral(weight: Weight, a: float, b: float, exponent: float, cfg: QuadratureConfig) -> tuple[float, bool]:
  """int_a^b w^{-exponent} dt and a divergence verdict."""
  def dual(t):
    with np.errstate(divide="ignore", over="ignore"):
      return float(np.power(weight(t), -exponent))

  singular = [z for z in weight.singular_points if a <= z <= b]
  if not singular:
    result = integrate_adaptive(dual, a, b, cfg)
    return result.value, not (result.converged and math.isfinite(result.value))

  width = b - a
  rounds = []
  for k in _ROUND_EXPONENTS:
    eps = width * 10.0 ** (-k)
    total = 0.0
    marks = [a] + singular + [b]
    for lo, hi in zip(marks[:-1], marks[1:]):
      # near a zero z the integral runs over [lo, z - eps] and [z + eps, hi]
      left = lo + (eps if lo in singular else 0.0)
      right = hi - (eps if hi in singular else 0.0)
      if right <= left:
        continue
      mid = 0.5 * (left + right)
      if lo in singular:
        total += _log_substituted(lambda u, z=lo: dual(z + u), left - lo, mid - lo, cfg)
      else:
        total += integrate_adaptive(dual, left, mid, cfg).value
      if hi in singular:
        total += _log_substituted(lambda u, z=hi: dual(z - u), hi - right, hi - mid, cfg)
      else:
        total += integrate_adaptive(dual, mid, right, cfg).value
    rounds.append(total)
  logger.debug("dual integral rounds on [%g, %g]: %s", a, b, rounds)
  last = rounds[-1]
  if not all(math.isfinite(r) for r in rounds):
    return math.inf, True
  divergent = rounds[0] > 0 and last > DIVERGENCE_GROWTH * rounds[0]
  return last, divergent


def ap_constant_estimate(weight: Weight, p: float, intervals: Sequence[Interval],
                         cfg: Optional[QuadratureConfig] = None) -> ApEstimate:
  """sup over the intervals of (avg w)^{1/p} (avg w^{-p'/p})^{1/p'}."""
  cfg = cfg or QuadratureConfig()
  if not 1 < p < math.inf:
    raise ValueError(f"A_p constants need 1 < p < inf, got p={p}")
  p_dual = p / (p - 1.0)
  exponent = p_dual / p
  best = -math.inf
  worst = None
  for interval in intervals:
    a, b = interval.bounds
    size = b - a
    avg_w = integrate_adaptive(lambda t: float(weight(t)), a, b, cfg, points=weight.singular_points).value / size
    dual_value, divergent = _dual_integral(weight, a, b, exponent, cfg)
    if divergent:
      logger.debug("A_%g dual average diverges on [%g, %g]", p, a, b)
      return ApEstimate(p=p, value=math.inf, divergent=True, worst_interval=interval)
    value = avg_w ** (1.0 / p) * (dual_value / size) ** (1.0 / p_dual)
    if value > best:
      best = value
      worst = interval
  return ApEstimate(p=p, value=best, divergent=False, worst_interval=worst)


@dataclass(frozen=True)
class ApClassification:
  weight: Weight
  estimates: list[ApEstimate]

  @property
  def threshold(self) -> Optional[float]:
    """Largest tested p with a divergent dual average (None if all are finite)."""
    divergent = [e.p for e in self.estimates if e.divergent]
    return max(divergent) if divergent else None

  @property
  def in_a_infinity(self) -> bool:
    return any(not e.divergent for e in self.estimates)

  def to_dict(self) -> dict[str, Any]:
    return {
      "weight": self.weight.to_dict(),
      "estimates": [e.to_dict() for e in self.estimates],
      "threshold": self.threshold,
      "expected_threshold": self.weight.expected_ap_threshold,
      "in_a_infinity": self.in_a_infinity,
    }


def ap_classify(weight: Weight, p_grid: Sequence[float], family: Optional[Sequence[Interval]] = None,
                cfg: Optional[QuadratureConfig] = None) -> ApClassification:
  family = list(family) if family is not None else dyadic_family()
  estimates = [ap_constant_estimate(weight, p, family, cfg) for p in sorted(p_grid)]
  return ApClassification(weight=weight, estimates=estimates)

#endregion
