"""Radial profiles, their ambient extensions, differences and local means."""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np
from scipy import interpolate, optimize, special

from .config import QuadratureConfig, normpath
from .geometry import (OUTER_RADIUS, CapMeasureOracle, cap_measure, ball_volume, omega_contains_batch)
from .numerics import MonteCarloEngine, grid_sup, integrate_adaptive

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RadialProfile:
  """An even function g on the line, evaluated as fn(|t|).

  support_radius is None for profiles without compact support; those carry
  an effective_radius beyond which they are below double precision.
  """
  fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
  support_radius: Optional[float] = None
  smoothness_hint: Optional[float] = None
  name: str = "profile"
  effective_radius: Optional[float] = None

  def __call__(self, t):
    t = np.abs(np.asarray(t, dtype=float))
    return np.asarray(self.fn(t), dtype=float) * np.ones_like(t)

  def outer_radius(self, cfg: Optional[QuadratureConfig] = None) -> float:
    if self.support_radius is not None:
      return self.support_radius
    if self.effective_radius is not None:
      return self.effective_radius
    return (cfg or QuadratureConfig()).r_max

  def scaled(self, c: float) -> "RadialProfile":
    return replace(self, fn=lambda t, fn=self.fn: c * fn(t), name=f"{c:g}*{self.name}")

  def dilated(self, lam: float) -> "RadialProfile":
    """t -> g(lam t)."""
    if not lam > 0:
      raise ValueError(f"dilation factor must be positive, got {lam}")
    return replace(
      self,
      fn=lambda t, fn=self.fn: fn(lam * t),
      name=f"{self.name}@{lam:g}",
      support_radius=None if self.support_radius is None else self.support_radius / lam,
      effective_radius=None if self.effective_radius is None else self.effective_radius / lam,
    )

  def __add__(self, other: "RadialProfile") -> "RadialProfile":
    radii = [self.outer_radius(), other.outer_radius()]
    compact = self.support_radius is not None and other.support_radius is not None
    return RadialProfile(
      fn=lambda t, f=self.fn, g=other.fn: f(t) + g(t),
      support_radius=max(radii) if compact else None,
      effective_radius=None if compact else max(radii),
      name=f"{self.name}+{other.name}",
    )

  @classmethod
  def zero(cls) -> "RadialProfile":
    return cls(fn=lambda t: np.zeros_like(t), support_radius=1.0, name="zero")


@dataclass(frozen=True)
class AmbientField:
  """f(x) = g(|x|) on R^d."""
  profile: RadialProfile
  d: int

  def __post_init__(self):
    if self.d < 2:
      raise ValueError(f"dimension must be >= 2, got {self.d}")

  def __call__(self, points):
    return self.profile(np.linalg.norm(np.asarray(points, dtype=float), axis=-1))


@dataclass(frozen=True)
class CallableField:
  """An arbitrary field on R^d, evaluated on points with a trailing coordinate axis."""
  fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
  d: int

  def __call__(self, points):
    return np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float)


Field = Union[AmbientField, CallableField]


def extend(g: RadialProfile, d: int) -> AmbientField:
  return AmbientField(profile=g, d=d)


def trace(f: Field) -> RadialProfile:
  """t -> f(t, 0, ..., 0)."""
  if isinstance(f, AmbientField):
    return f.profile

  def restricted(t):
    t = np.asarray(t, dtype=float)
    points = np.zeros(t.shape + (f.d,))
    points[..., 0] = t
    return f(points)
  return RadialProfile(fn=restricted, name="trace")


#region differences

@dataclass(frozen=True)
class DifferenceSpec:
  order: int
  step: Union[float, np.ndarray]

  def __post_init__(self):
    if self.order < 1:
      raise ValueError(f"difference order must be >= 1, got {self.order}")


def difference_coefficients(order: int) -> np.ndarray:
  """binom(N, j) (-1)^(N-j) for j = 0..N."""
  j = np.arange(order + 1)
  return special.comb(order, j, exact=False) * (-1.0) ** (order - j)


def nth_difference(f, spec: DifferenceSpec, at):
  """sum_j binom(N,j) (-1)^(N-j) f(at + j h).

  For fields on R^d `at` and `step` carry a trailing coordinate axis; for
  functions on the line they are scalars or arrays. Leading axes broadcast.
  """
  coeffs = difference_coefficients(spec.order)
  j = np.arange(spec.order + 1, dtype=float)
  at = np.asarray(at, dtype=float)
  step = np.asarray(spec.step, dtype=float)
  if isinstance(f, (AmbientField, CallableField)):
    points = at[..., None, :] + j[:, None] * step[..., None, :]
  else:
    points = at[..., None] + j * step[..., None]
  values = np.asarray(f(points), dtype=float) @ coeffs
  return float(values) if values.ndim == 0 else values

#endregion


#region local means

@dataclass(frozen=True)
class MeanEstimate:
  value: float
  std_error: float = 0.0
  method: str = "cap"


def _check_mean_args(t: float, u: float):
  if not t > 0:
    raise ValueError(f"t must be positive, got {t}")
  if not u > 0:
    raise ValueError(f"u must be positive, got {u}")


def _uniform_ball(rng: np.random.Generator, d: int, m: int, radius: float) -> np.ndarray:
  g = rng.standard_normal((m, d))
  g /= np.linalg.norm(g, axis=1, keepdims=True)
  return g * (radius * rng.random(m) ** (1.0 / d))[:, None]


def _power_mean(moment_mean: float, moment_se: float, u: float) -> tuple[float, float]:
  value = max(moment_mean, 0.0) ** (1.0 / u)
  if moment_mean <= 0:
    return value, 0.0
  # delta method for m^{1/u}
  return value, value / (u * moment_mean) * moment_se


def mean_sup(f: Field, x, t: float, cfg: Optional[QuadratureConfig] = None) -> MeanEstimate:
  """sup_{|h| < t} |f(x+h) - f(x)|."""
  cfg = cfg or QuadratureConfig()
  _check_mean_args(t, 1.0)
  x = np.asarray(x, dtype=float)
  if isinstance(f, AmbientField):
    r = float(np.linalg.norm(x))
    g = f.profile
    base = float(g(r))
    value = grid_sup(lambda lam: np.abs(g(lam) - base), max(0.0, r - t), r + t, cfg)
    return MeanEstimate(value=value, method="grid")
  engine = MonteCarloEngine.from_config(cfg)
  base = float(f(x))
  result = engine.estimate(lambda rng, m: np.abs(f(x + _uniform_ball(rng, f.d, m, t)) - base), cfg.mc_samples)
  return MeanEstimate(value=result.maximum, method="mc")


def mean_ball(f: Field, x, t: float, u: float, method: str = "auto",
              cfg: Optional[QuadratureConfig] = None, order: int = 1) -> MeanEstimate:
  """(t^{-d} int_{|h|<t} |Delta^N_h f(x)|^u dh)^{1/u}.

  method "cap" reduces a radial field to the 1D integral against the cap
  measures sigma_{d-1}(Q_{lambda,t}(|x|)) and needs N = 1; "mc" samples the
  ball; "auto" picks "cap" for radial fields with N = 1.
  """
  cfg = cfg or QuadratureConfig()
  _check_mean_args(t, u)
  if math.isinf(u):
    if order != 1:
      raise ValueError("the sup mean is implemented for first differences only")
    return mean_sup(f, x, t, cfg)
  if method == "auto":
    method = "cap" if isinstance(f, AmbientField) and order == 1 else "mc"
  x = np.asarray(x, dtype=float)
  if method == "cap":
    if not isinstance(f, AmbientField) or order != 1:
      raise ValueError("the cap reduction needs a radial field and first differences")
    return MeanEstimate(value=radial_ball_mean(f.profile, f.d, float(np.linalg.norm(x)), t, u, cfg), method="cap")
  if method != "mc":
    raise ValueError(f"unknown mean method {method!r}")

  engine = MonteCarloEngine.from_config(cfg)
  result = engine.estimate(
    lambda rng, m: np.abs(nth_difference(f, DifferenceSpec(order, _uniform_ball(rng, f.d, m, t)), x)) ** u,
    cfg.mc_samples)
  volume = ball_volume(f.d)
  value, se = _power_mean(volume * result.mean, volume * result.std_error, u)
  return MeanEstimate(value=value, std_error=se, method="mc")


def radial_ball_mean(g: RadialProfile, d: int, r: float, t: float, u: float,
                     cfg: Optional[QuadratureConfig] = None, oracle: Optional[CapMeasureOracle] = None) -> float:
  """(t^{-d} int |g(lambda) - g(r)|^u sigma_{d-1}(Q_{lambda,t}(r)) dlambda)^{1/u}."""
  cfg = cfg or QuadratureConfig()
  if d > 3 and oracle is None:
    oracle = CapMeasureOracle.from_config(d, cfg)
  base = float(g(r))

  def integrand(lam):
    return abs(float(g(lam)) - base) ** u * float(cap_measure(d, lam, t, r, oracle))

  lo = max(0.0, r - t)
  result = integrate_adaptive(integrand, lo, r + t, cfg, points=[abs(r - t), r])
  return max(result.value * t ** (-d), 0.0) ** (1.0 / u)


def mean_omega(f: Field, x, t: float, u: float, order: int = 1,
               cfg: Optional[QuadratureConfig] = None) -> MeanEstimate:
  """(t^{-d} int_{Omega_t(x)} |Delta^N_h f(x)|^u dh)^{1/u} by rejection from B(0, 3t)."""
  cfg = cfg or QuadratureConfig()
  _check_mean_args(t, u)
  x = np.asarray(x, dtype=float)
  engine = MonteCarloEngine.from_config(cfg)

  def magnitudes(rng, m):
    h = _uniform_ball(rng, f.d, m, OUTER_RADIUS * t)
    inside = omega_contains_batch(x, h, t)
    return np.where(inside, np.abs(nth_difference(f, DifferenceSpec(order, h), x)), 0.0)

  if math.isinf(u):
    result = engine.estimate(magnitudes, cfg.mc_samples)
    return MeanEstimate(value=result.maximum, method="mc")
  result = engine.estimate(lambda rng, m: magnitudes(rng, m) ** u, cfg.mc_samples)
  volume = ball_volume(f.d) * OUTER_RADIUS ** f.d
  value, se = _power_mean(volume * result.mean, volume * result.std_error, u)
  return MeanEstimate(value=value, std_error=se, method="mc")

#endregion


#region non-identity of higher differences

@dataclass(frozen=True)
class NonIdentityWitness:
  x: tuple[float, ...]
  h: tuple[float, ...]
  gap: float
  order: int

  def to_dict(self):
    return {"x": list(self.x), "h": list(self.h), "gap": self.gap, "order": self.order}


def _closest_step(g: RadialProfile, order: int, r: float, target: float, points: int) -> float:
  """inf over all real w of |Delta^N_w g(r) - target|.

  Past |w| = R + r every shifted point r + j w leaves the support of radius R,
  so the search over [-(R + r), R + r] covers the whole line.
  """
  bound = g.outer_radius() + abs(r)
  ws = np.linspace(-bound, bound, points)
  residual = nth_difference(g, DifferenceSpec(order, ws), r) - target
  if np.any(residual == 0):
    return 0.0
  crossings = np.nonzero(np.sign(residual[:-1]) != np.sign(residual[1:]))[0]
  if len(crossings):
    k = crossings[0]
    root = optimize.brentq(lambda w: nth_difference(g, DifferenceSpec(order, w), r) - target, ws[k], ws[k + 1],
                           xtol=1e-14)
    return abs(nth_difference(g, DifferenceSpec(order, root), r) - target)
  k = int(np.argmin(np.abs(residual)))
  lo, hi = ws[max(k - 1, 0)], ws[min(k + 1, points - 1)]
  best = optimize.minimize_scalar(lambda w: abs(nth_difference(g, DifferenceSpec(order, w), r) - target),
                                  bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
  return min(float(best.fun), float(np.abs(residual[k])))


def nonidentity_witness(f: AmbientField, order: int, radii, step_norms, angles=None,
                        points: int = 8001) -> NonIdentityWitness:
  """Searches x = r e_1, h = rho (cos a e_1 + sin a e_2) for the largest gap
  inf_w |Delta^N_h f(x) - Delta^N_w g(|x|)| with w ranging over the whole line.

  The gap vanishes for every profile that is monotone in |t|: the ambient value
  then lies between two values the 1D difference attains. Profiles with an
  interior peak and dip, such as `twin`, leave a positive gap.
  """
  if angles is None:
    angles = np.linspace(0.0, math.pi, 13)
  g = f.profile
  best = None
  for r in radii:
    x = np.zeros(f.d)
    x[0] = r
    for rho in step_norms:
      for a in angles:
        h = np.zeros(f.d)
        h[0], h[1] = rho * math.cos(a), rho * math.sin(a)
        target = nth_difference(f, DifferenceSpec(order, h), x)
        gap = _closest_step(g, order, float(r), float(target), points)
        if best is None or gap > best.gap:
          best = NonIdentityWitness(x=tuple(x), h=tuple(h), gap=gap, order=order)
  logger.debug("non-identity search for order %d: largest gap %g", order, best.gap if best else 0.0)
  return best

#endregion


#region profile files and the modulus oracle

def load_profile_file(filename: str) -> RadialProfile:
  """Two columns (t, g(t)) with t >= 0 increasing, mirrored evenly, zero past the last row."""
  data = np.loadtxt(normpath(filename), ndmin=2)
  if data.shape[1] != 2:
    raise ValueError(f"{filename}: expected two columns (t, g(t)), got {data.shape[1]}")
  ts, gs = data[:, 0], data[:, 1]
  if len(ts) < 4:
    raise ValueError(f"{filename}: need at least four rows")
  if ts[0] < 0 or np.any(np.diff(ts) <= 0):
    raise ValueError(f"{filename}: t must be non-negative and strictly increasing")
  spline = interpolate.CubicSpline(ts, gs)
  t_last = float(ts[-1])

  def fn(t):
    return np.where(t <= t_last, spline(np.clip(t, ts[0], t_last)), 0.0)
  return RadialProfile(fn=fn, support_radius=t_last, name=f"file:{filename}")


@dataclass(frozen=True)
class SlopeFit:
  slope: float
  steps: tuple[float, ...]
  moduli: tuple[float, ...]


def difference_lp_norm(g: RadialProfile, h: float, p: float, order: int = 1,
                       cfg: Optional[QuadratureConfig] = None, kinks=(0.0,)) -> float:
  """||Delta^N_h g | L_p(R)||."""
  radius = g.outer_radius(cfg)
  a, b = -radius - order * h, radius
  points = [k - j * h for k in kinks for j in range(order + 1)]
  points += [edge - j * h for edge in (-radius, radius) for j in range(order + 1)]
  result = integrate_adaptive(lambda x: abs(nth_difference(g, DifferenceSpec(order, h), x)) ** p, a, b, cfg,
                              points=points)
  return max(result.value, 0.0) ** (1.0 / p)


def modulus_slope(g: RadialProfile, p: float, h_range=(1e-3, 1e-1), order: int = 2, count: int = 9,
                  cfg: Optional[QuadratureConfig] = None) -> SlopeFit:
  """Log-log slope of h -> ||Delta^N_h g | L_p(R)||.

  For |t|^beta near the origin the slope is beta + 1/p as long as that stays
  below the order.
  """
  steps = np.geomspace(h_range[0], h_range[1], count)
  moduli = np.array([difference_lp_norm(g, float(h), p, order, cfg) for h in steps])
  slope = np.polyfit(np.log(steps), np.log(moduli), 1)[0]
  return SlopeFit(slope=float(slope), steps=tuple(steps), moduli=tuple(moduli))

#endregion
