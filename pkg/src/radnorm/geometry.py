"""Omega_t(x) neighbourhoods, sphere caps Q_{lambda,t}(r) and the lambda-axis split."""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .config import QuadratureConfig
from .numerics import MonteCarloEngine, integrate_adaptive, philox

logger = logging.getLogger(__name__)

# B(0, INNER_RADIUS * t) is contained in Omega_t(x), which lies in B(0, OUTER_RADIUS * t)
INNER_RADIUS = 0.25
OUTER_RADIUS = 3.0

MIN_MC_SAMPLES = 1000


#region Omega sets

@dataclass(frozen=True)
class OmegaQuery:
  x: tuple[float, ...]
  h: tuple[float, ...]
  t: float

  def __post_init__(self):
    if len(self.x) != len(self.h):
      raise ValueError(f"x and h must have the same dimension, got {len(self.x)} and {len(self.h)}")
    if len(self.x) < 2:
      raise ValueError(f"dimension must be >= 2, got {len(self.x)}")
    if not self.t > 0:
      raise ValueError(f"t must be positive, got {self.t}")


def omega_contains_batch(x, h, t) -> np.ndarray:
  """Membership h in Omega_t(x) for stacked points.

  x and h have a trailing coordinate axis and broadcast against each other;
  t broadcasts against the leading axes. h is rescaled to h/t, x stays put.
  """
  t = np.asarray(t, dtype=float)
  if np.any(t <= 0):
    raise ValueError("t must be positive")
  x = np.asarray(x, dtype=float)
  h = np.asarray(h, dtype=float) / t[..., None]
  x, h = np.broadcast_arrays(x, h)
  z = x + h
  norm_x = np.linalg.norm(x, axis=-1)
  norm_z = np.linalg.norm(z, axis=-1)

  near = norm_z <= 2.0
  # for |x| > 1: y = |x| z / |z|, so <x, y> = |x| <x, z> / |z| and tau |x| = |z|
  with np.errstate(divide="ignore", invalid="ignore"):
    inner = norm_x * np.einsum("...i,...i->...", x, z) / norm_z
  far = (norm_z > 0) & (inner > norm_x ** 2 - 0.5) & (norm_x - 0.5 < norm_z) & (norm_z < norm_x + 0.5)
  return np.where(norm_x <= 1.0, near, far)


def omega_contains(q: OmegaQuery) -> bool:
  return bool(omega_contains_batch(np.asarray(q.x), np.asarray(q.h), q.t))

#endregion


#region cap measures

@dataclass(frozen=True)
class CapSpec:
  d: int
  lam: float
  t: float
  r: float

  def __post_init__(self):
    if self.d < 2:
      raise ValueError(f"dimension must be >= 2, got {self.d}")
    if self.lam < 0 or self.r < 0:
      raise ValueError(f"radii must be non-negative, got lambda={self.lam}, r={self.r}")
    if not self.t > 0:
      raise ValueError(f"t must be positive, got {self.t}")


def sphere_area(d: int) -> float:
  """Surface measure of the unit sphere in R^d."""
  return 2.0 * math.pi ** (d / 2.0) / special.gamma(d / 2.0)


def ball_volume(d: int) -> float:
  return sphere_area(d) / d


def cap_kernel(d: int, lam, t, r) -> np.ndarray:
  """sigma_{d-1}(Q_{lambda,t}(r)) for d in {2, 3}, broadcast over lam, t, r."""
  if d not in (2, 3):
    raise ValueError(f"closed form cap measures exist for d in (2, 3), got d={d}")
  lam, t, r = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lam, t, r)))
  if np.any(lam < 0) or np.any(r < 0):
    raise ValueError("radii must be non-negative")
  full = t > r + lam
  cap = ~full & (t > np.abs(lam - r)) & (r > 0) & (lam > 0)
  safe_r = np.where(cap, r, 1.0)
  safe_lam = np.where(cap, lam, 1.0)
  if d == 3:
    partial = math.pi * safe_lam / safe_r * (t * t - (safe_lam - safe_r) ** 2)
    whole = 4.0 * math.pi * lam * lam
  else:
    cosine = np.clip((safe_r ** 2 + safe_lam ** 2 - t * t) / (2.0 * safe_r * safe_lam), -1.0, 1.0)
    partial = 2.0 * safe_lam * np.arccos(cosine)
    whole = 2.0 * math.pi * lam
  return np.where(full, whole, np.where(cap, partial, 0.0))


def cap_measure_exact(c: CapSpec) -> float:
  return float(cap_kernel(c.d, c.lam, c.t, c.r))


@dataclass(frozen=True)
class CapEstimate:
  estimate: float
  std_error: float
  samples: int


def _sphere_first_coordinate(rng: np.random.Generator, d: int, m: int) -> np.ndarray:
  g = rng.standard_normal((m, d))
  return g[:, 0] / np.linalg.norm(g, axis=1)


def cap_measure_mc(c: CapSpec, samples: int, seed: int, workers: int = 1) -> CapEstimate:
  """Monte Carlo sigma_{d-1}(Q_{lambda,t}(r)) from uniform points on the lambda-sphere."""
  if samples < MIN_MC_SAMPLES:
    raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
  scale = c.lam ** (c.d - 1) * sphere_area(c.d)

  def draw(rng, m):
    u1 = _sphere_first_coordinate(rng, c.d, m)
    # |lam u - r e_1|^2 = lam^2 + r^2 - 2 lam r u_1
    dist_sq = c.lam ** 2 + c.r ** 2 - 2.0 * c.lam * c.r * u1
    return (dist_sq <= c.t * c.t).astype(float)

  engine = MonteCarloEngine(seed=seed, workers=workers)
  result = engine.estimate(draw, samples)
  fraction = result.mean
  std_error = scale * math.sqrt(max(fraction * (1.0 - fraction), 0.0) / samples)
  return CapEstimate(estimate=scale * fraction, std_error=std_error, samples=samples)


class CapMeasureOracle:
  """Cap measures for any d >= 2 from one seeded sample of the sphere.

  The sorted first coordinates of the sample give P(u_1 >= c) for every
  threshold at once, so whole (lambda, t, r) grids cost one searchsorted.
  """

  def __init__(self, d: int, samples: int = 200_000, seed: int = 0):
    if d < 2:
      raise ValueError(f"dimension must be >= 2, got {d}")
    if samples < MIN_MC_SAMPLES:
      raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    self.d = d
    self.samples = samples
    self.area = sphere_area(d)
    self._u1 = np.sort(_sphere_first_coordinate(philox(seed, 0), d, samples))
    logger.debug("cap oracle for d=%d with %d sphere samples", d, samples)

  @classmethod
  def from_config(cls, d: int, cfg: QuadratureConfig) -> "CapMeasureOracle":
    return cls(d, samples=max(cfg.mc_samples, MIN_MC_SAMPLES), seed=cfg.seed)

  def __call__(self, lam, t, r) -> np.ndarray:
    lam, t, r = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lam, t, r)))
    product = lam * r
    with np.errstate(divide="ignore", invalid="ignore"):
      threshold = (lam * lam + r * r - t * t) / (2.0 * product)
    # with r = 0 every point of the sphere sits at distance lambda
    threshold = np.where(product > 0, threshold, np.where(lam <= t, -np.inf, np.inf))
    above = self.samples - np.searchsorted(self._u1, threshold, side="left")
    return lam ** (self.d - 1) * self.area * above / self.samples


def cap_measure(d: int, lam, t, r, oracle: Optional[CapMeasureOracle] = None) -> np.ndarray:
  """Closed form for d in {2, 3}, the Monte Carlo oracle otherwise."""
  if d in (2, 3):
    return cap_kernel(d, lam, t, r)
  if oracle is None or oracle.d != d:
    oracle = CapMeasureOracle(d)
  return oracle(lam, t, r)


def coarea_integral(d: int, r: float, t: float, cfg: Optional[QuadratureConfig] = None) -> float:
  """int_0^inf sigma_{d-1}(Q_{lambda,t}(r)) dlambda, which is the volume of B(r e_1, t)."""
  points = sorted({abs(r - t), r + t})
  result = integrate_adaptive(lambda lam: float(cap_kernel(d, lam, t, r)), 0.0, r + t, cfg, points=points)
  return result.value

#endregion


#region lambda-axis split

@dataclass(frozen=True)
class LambdaInterval:
  lo: float
  hi: float
  closed_lo: bool = True
  closed_hi: bool = False

  @property
  def is_empty(self) -> bool:
    if self.lo < self.hi:
      return False
    return not (self.lo == self.hi and self.closed_lo and self.closed_hi)

  @property
  def length(self) -> float:
    return max(self.hi - self.lo, 0.0)

  def contains(self, lam: float) -> bool:
    above = lam >= self.lo if self.closed_lo else lam > self.lo
    below = lam <= self.hi if self.closed_hi else lam < self.hi
    return above and below

  def to_list(self) -> list:
    return [self.lo, self.hi, self.closed_lo, self.closed_hi]


@dataclass(frozen=True)
class RegionSplit:
  r: float
  t: float
  i0: LambdaInterval
  i1: LambdaInterval
  i2: LambdaInterval
  i3: LambdaInterval

  def region(self, name: str) -> LambdaInterval:
    try:
      return {"I0": self.i0, "I1": self.i1, "I2": self.i2, "I3": self.i3}[name]
    except KeyError:
      raise ValueError(f"unknown region {name!r}, expected one of I0, I1, I2, I3") from None


def split_regions(r: float, t: float) -> RegionSplit:
  if r < 0 or not t > 0:
    raise ValueError(f"split needs r >= 0 and t > 0, got r={r}, t={t}")
  floor = max(t - r, 0.0)
  i0 = LambdaInterval(0.0, t - r, closed_lo=True, closed_hi=False)
  i1 = LambdaInterval(max(r - 0.75 * t, floor), r + 0.75 * t, closed_lo=floor >= r - 0.75 * t, closed_hi=False)
  i2 = LambdaInterval(max(r + 0.75 * t, floor), r + t, closed_lo=True, closed_hi=False)
  i3 = LambdaInterval(abs(r - t), r - 0.75 * t, closed_lo=True, closed_hi=True)
  return RegionSplit(r=r, t=t, i0=i0, i1=i1, i2=i2, i3=i3)


# factors of t^2 on I1 and of t(t -+ lambda +- r) on I2 and I3, as (lower, upper)
PRINTED_ENVELOPE = {"I1": (7.0 / 16.0, 1.0), "I2": (7.0 / 4.0, 1.0), "I3": (7.0 / 4.0, 1.0)}
VERIFIED_ENVELOPE = {"I1": (7.0 / 16.0, 1.0), "I2": (7.0 / 4.0, 2.0), "I3": (7.0 / 4.0, 2.0)}


@dataclass(frozen=True)
class SandwichBound:
  region: str
  value: float
  lower: float
  upper: float
  verified_lower: float
  verified_upper: float

  @property
  def lower_holds(self) -> bool:
    return self.lower <= self.value

  @property
  def upper_holds(self) -> bool:
    return self.value <= self.upper


def _envelope_base(region: str, r: float, t: float, lam: float) -> float:
  if region == "I1":
    return t * t
  if region == "I2":
    return t * (t - lam + r)
  return t * (t + lam - r)


def sandwich_bounds(r: float, t: float, lam: float, region: str) -> SandwichBound:
  """Envelope of t^2 - (lambda - r)^2 on I1, I2 or I3.

  `lower`/`upper` use the factors in PRINTED_ENVELOPE, `verified_*` those in
  VERIFIED_ENVELOPE. On I2 and I3 the printed upper factor 1 sits below the
  lower factor 7/4 and does not hold; the factor 2 does.
  """
  if region not in PRINTED_ENVELOPE:
    raise ValueError(f"sandwich bounds exist for I1, I2, I3, got {region!r}")
  if not split_regions(r, t).region(region).contains(lam):
    raise ValueError(f"lambda={lam} is not in {region} for r={r}, t={t}")
  base = _envelope_base(region, r, t, lam)
  lo, hi = PRINTED_ENVELOPE[region]
  vlo, vhi = VERIFIED_ENVELOPE[region]
  return SandwichBound(region=region, value=t * t - (lam - r) ** 2, lower=lo * base, upper=hi * base,
                       verified_lower=vlo * base, verified_upper=vhi * base)

#endregion
