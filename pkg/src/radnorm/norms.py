"""Difference-based quasi-norms of radial profiles.

Every norm is a BaseNorm subclass: `compute` checks the hypothesis, evaluates
the terms at the configured resolution and again on the coarsened config,
and reports the difference (plus the dt/t tail bound) as numeric error.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .config import QuadratureConfig
from .geometry import CapMeasureOracle, cap_kernel, cap_measure
from .numerics import (batched_sup, composite_gauss, config_t_grid, gauss_on_intervals, grid_sup,
                       integrate_adaptive, log_measure_norm, log_measure_tail)
from .params import HypothesisVerdict, NormKind, SmoothnessParams, validate
from .profiles import DifferenceSpec, RadialProfile, nth_difference
from .reports import NormReport, NormTerm
from .weights import Weight

logger = logging.getLogger(__name__)

# equal sub-pieces per lambda interval in the cap integrals
LAMBDA_SUBDIVISIONS = 4
# Gauss pieces of the h-integral over [-1, 1] in the smooth-weight F form
H_PIECE = 0.125
# spacing of the central differences behind g'
DERIVATIVE_STEP = 1e-4


@dataclass
class TermSet:
  terms: list[NormTerm] = field(default_factory=list)
  tail_error: float = 0.0
  converged: bool = True

  @property
  def total(self) -> float:
    return sum(t.value for t in self.terms if t.summed)

  def add(self, name: str, value: float, summed: bool = True):
    self.terms.append(NormTerm(name, float(value), summed))


#region shared discretization

def _weighted_power_sum(values, weights, p: float):
  """(sum_i w_i v_i^p)^{1/p} over the leading axis; p = inf gives the max."""
  values = np.asarray(values, dtype=float)
  if math.isinf(p):
    return np.max(values, axis=0)
  return np.tensordot(weights, values ** p, axes=(0, 0)) ** (1.0 / p)


def _f_order(values, outer_w, t, wt, s: float, p: float, q: float) -> tuple[float, float]:
  """L_p(outer) of the dt/t norm along axis 1, and the bound on the truncated tail."""
  inner = log_measure_norm(values, t, wt, s, q, axis=1)
  tail = log_measure_tail(values, t, s, q, axis=1)
  value = float(_weighted_power_sum(inner, outer_w, p))
  if math.isinf(q):
    padded = np.where(np.isfinite(tail), inner, np.inf)
  else:
    padded = (inner ** q + tail) ** (1.0 / q)
  return value, float(_weighted_power_sum(padded, outer_w, p)) - value


def _b_order(values, outer_w, t, wt, s: float, p: float, q: float) -> tuple[float, float]:
  """dt/t norm of the L_p(outer) norms along axis 0, and the tail bound."""
  inner = _weighted_power_sum(values, outer_w, p)
  value = float(log_measure_norm(inner, t, wt, s, q))
  tail = float(log_measure_tail(inner, t, s, q))
  if math.isinf(q):
    return value, 0.0 if math.isfinite(tail) else math.inf
  return value, (value ** q + tail) ** (1.0 / q) - value


def _t_grid(params: SmoothnessParams, cfg: QuadratureConfig):
  return config_t_grid(cfg, t_max=params.T)


def _lp_term(g: RadialProfile, weight: Callable[[float], float], p: float, radius: float,
             cfg: QuadratureConfig) -> tuple[float, bool]:
  """(int_{-R}^{R} |g|^p w)^{1/p} for an even integrand, so twice the half line."""
  if math.isinf(p):
    return grid_sup(lambda x: np.abs(g(x)), 0.0, radius, cfg), True
  result = integrate_adaptive(lambda x: abs(float(g(x))) ** p * float(weight(x)), 0.0, radius, cfg)
  return (2.0 * max(result.value, 0.0)) ** (1.0 / p), result.converged


def _gauss_pieces(marks, n: int, subdivisions: int):
  """Gauss nodes on consecutive pairs of `marks` (sorted along the last axis)."""
  lo = marks[..., :-1]
  hi = marks[..., 1:]
  frac = np.linspace(0.0, 1.0, subdivisions + 1)
  edges = lo[..., None] + (hi - lo)[..., None] * frac
  x, w = gauss_on_intervals(edges[..., :-1], edges[..., 1:], n)
  shape = x.shape[:-3] + (-1,)
  return x.reshape(shape), w.reshape(shape)


def _interval_nodes(lo, hi, n: int, subdivisions: int = LAMBDA_SUBDIVISIONS):
  return _gauss_pieces(np.stack([lo, np.maximum(hi, lo)], axis=-1), n, subdivisions)


def _radial_nodes(g: RadialProfile, cfg: QuadratureConfig, reach: float):
  radius = g.outer_radius(cfg)
  return composite_gauss(0.0, radius + reach, cfg.gauss_nodes, cfg.radial_piece, breakpoints=[radius])

#endregion


class BaseNorm(ABC):
  kind: NormKind

  def __init__(self, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None):
    self.params = params
    self.cfg = cfg or QuadratureConfig()

  def validate(self) -> HypothesisVerdict:
    return validate(self.params, self.kind)

  def compute(self, g: RadialProfile) -> NormReport:
    """Evaluates the norm of g; a failed hypothesis is recorded, not raised."""
    verdict = self.validate()
    if not verdict.passed:
      logger.info("%s hypothesis fails for %s: %s", self.kind.value, g.name, verdict.reason)
    fine = self._compute_terms(g, self.cfg)
    coarse = self._compute_terms(g, self.cfg.coarsened())
    value = fine.total
    error = abs(value - coarse.total) + fine.tail_error
    logger.debug("%s of %s: value=%g error=%g", self.kind.value, g.name, value, error)
    return NormReport(kind=self.kind.value, params=self.params, value=value, terms=fine.terms,
                      numeric_error=error, hypothesis=verdict, converged=fine.converged, profile=g.name)

  @abstractmethod
  def _compute_terms(self, g: RadialProfile, cfg: QuadratureConfig) -> TermSet:
    pass


class WeightedLpNorm(BaseNorm):
  """||g | L_p(R, w)||, by default with w = |t|^{d-1}."""
  kind = NormKind.WLP

  def __init__(self, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None, weight: Optional[Weight] = None):
    super().__init__(params, cfg)
    self.weight = weight or Weight.power(params.d - 1)

  def _compute_terms(self, g, cfg):
    value, converged = _lp_term(g, self.weight, self.params.p, g.outer_radius(cfg), cfg)
    terms = TermSet(converged=converged)
    terms.add("lp", value)
    return terms


#region sup differences

class SharpNorm(BaseNorm):
  """||g||^#: L_p(|t|^{d-1}) plus the dt/t integral of sup_{|w|<=t} |g(r+w) - g(r)|.

  The F order integrates dt/t inside, the B order outside; both run over the
  full line in r, which is twice the half line by evenness.
  """

  def __init__(self, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None, besov: bool = False):
    super().__init__(params, cfg)
    self.besov = besov
    self.kind = NormKind.B_SHARP if besov else NormKind.F_SHARP

  def _compute_terms(self, g, cfg):
    prm = self.params
    lp, converged = _lp_term(g, Weight.power(prm.d - 1), prm.p, g.outer_radius(cfg), cfg)
    r, wr = _radial_nodes(g, cfg, prm.T)
    t, wt = _t_grid(prm, cfg)
    base = g(r)[:, None, None]

    def magnitude(xs):
      return np.abs(g(r[:, None, None] + xs) - base)

    sup = batched_sup(magnitude, -t[None, :], t[None, :] * np.ones((len(r), 1)), cfg.sup_points, cfg.sup_levels)
    outer = 2.0 * wr * r ** (prm.d - 1)
    order = _b_order if self.besov else _f_order
    value, tail = order(sup, outer, t, wt, prm.s, prm.p, prm.q)
    terms = TermSet(tail_error=tail, converged=converged)
    terms.add("lp", lp)
    terms.add("sup-differences", value)
    return terms

#endregion


#region cap-measure forms

def cap_means(g: RadialProfile, d: int, u: float, r: np.ndarray, t: np.ndarray, cfg: QuadratureConfig,
              oracle: Optional[CapMeasureOracle] = None) -> np.ndarray:
  """t^{-d} int |g(lambda) - g(r)|^u sigma_{d-1}(Q_{lambda,t}(r)) dlambda on the (r, t) grid."""
  if math.isinf(u):
    raise ValueError("the cap forms need a finite inner exponent u")
  rr, tt = r[:, None], t[None, :]
  lo = np.maximum(0.0, rr - tt)
  hi = rr + tt
  marks = np.stack([lo, np.clip(np.abs(rr - tt), lo, hi), np.clip(rr * np.ones_like(tt), lo, hi), hi], axis=-1)
  lam, w = _gauss_pieces(np.sort(marks, axis=-1), cfg.gauss_nodes, LAMBDA_SUBDIVISIONS)
  if d > 3 and oracle is None:
    oracle = CapMeasureOracle.from_config(d, cfg)
  sigma = cap_measure(d, lam, tt[..., None], rr[..., None], oracle)
  diff = np.abs(g(lam) - g(r)[:, None, None]) ** u
  return tt ** (-d) * np.sum(diff * sigma * w, axis=-1)


class TriangleNorm(BaseNorm):
  """||g||^triangle for any d, with the cap measures of the lambda-spheres."""

  def __init__(self, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None, besov: bool = False):
    super().__init__(params, cfg)
    self.besov = besov
    self.kind = NormKind.B_TRIANGLE if besov else NormKind.F_TRIANGLE

  def _compute_terms(self, g, cfg):
    prm = self.params
    lp, converged = _lp_term(g, Weight.power(prm.d - 1), prm.p, g.outer_radius(cfg), cfg)
    r, wr = _radial_nodes(g, cfg, prm.T)
    t, wt = _t_grid(prm, cfg)
    means = cap_means(g, prm.d, prm.u, r, t, cfg) ** (1.0 / prm.u)
    order = _b_order if self.besov else _f_order
    value, tail = order(means, wr * r ** (prm.d - 1), t, wt, prm.s, prm.p, prm.q)
    terms = TermSet(tail_error=tail, converged=converged)
    terms.add("lp", lp)
    terms.add("cap-differences", value)
    return terms


REGIONS = ("I0", "I1", "I2", "I3")


def region_integrals(g: RadialProfile, u: float, r: np.ndarray, t: np.ndarray, cfg: QuadratureConfig,
                     exact: bool = False) -> dict[str, np.ndarray]:
  """Inner lambda-integrals of the 3D forms over I0..I3 on the (r, t) grid.

  With exact=False the kernels are the displayed ones (lambda^2/t^3, lambda/t,
  lambda(t-lambda+r)/t^2, lambda(t+lambda-r)/t^2); with exact=True every
  region uses sigma_2(Q_{lambda,t}(r))/t^3.
  """
  rr, tt = r[:, None], t[None, :]
  floor = np.maximum(tt - rr, 0.0)
  lo1 = np.maximum(rr - 0.75 * tt, floor)
  mid1 = np.maximum(rr, lo1)
  bounds = {
    "I0": [(np.zeros_like(floor), floor)],
    "I1": [(lo1, mid1), (mid1, rr + 0.75 * tt)],
    "I2": [(np.maximum(rr + 0.75 * tt, floor), rr + tt)],
    "I3": [(np.abs(rr - tt), rr - 0.75 * tt)],
  }
  base = g(r)[:, None, None]
  rk, tk = rr[..., None], tt[..., None]
  out = {}
  for name in REGIONS:
    total = np.zeros(np.broadcast_shapes(rr.shape, tt.shape))
    for lo, hi in bounds[name]:
      lam, w = _interval_nodes(*np.broadcast_arrays(lo, hi), cfg.gauss_nodes)
      if exact:
        kernel = cap_kernel(3, lam, tk, rk) / tk ** 3
      elif name == "I0":
        kernel = lam * lam / tk ** 3
      elif name == "I1":
        kernel = lam / tk
      elif name == "I2":
        kernel = lam * (tk - lam + rk) / tk ** 2
      else:
        kernel = lam * (tk + lam - rk) / tk ** 2
      total += np.sum(np.abs(g(lam) - base) ** u * kernel * w, axis=-1)
    out[name] = total
  return out


class Triangle3DNorm(BaseNorm):
  """The explicit five-term forms in d = 3.

  mode "display" sums the five terms with their displayed kernels and outer
  weights (r^2 for the first two, r^{2-p/u} for I1..I3); mode "exact" keeps the
  region split but uses the exact cap kernel and one combined region term,
  which is the same integral as the general cap form.
  """

  def __init__(self, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None, besov: bool = False,
               mode: str = "display"):
    super().__init__(params, cfg)
    if mode not in ("display", "exact"):
      raise ValueError(f"mode must be 'display' or 'exact', got {mode!r}")
    self.besov = besov
    self.mode = mode
    self.kind = NormKind.B_TRIANGLE_3D if besov else NormKind.F_TRIANGLE_3D

  def _compute_terms(self, g, cfg):
    prm = self.params
    u, p = prm.u, prm.p
    if math.isinf(u):
      raise ValueError("the cap forms need a finite inner exponent u")
    r, wr = _radial_nodes(g, cfg, prm.T)
    t, wt = _t_grid(prm, cfg)
    order = _b_order if self.besov else _f_order
    integrals = region_integrals(g, u, r, t, cfg, exact=self.mode == "exact")
    terms = TermSet()

    if self.mode == "exact":
      lp, terms.converged = _lp_term(g, Weight.power(2), p, g.outer_radius(cfg), cfg)
      terms.add("lp", lp)
      combined = sum(integrals.values()) ** (1.0 / u)
      value, terms.tail_error = order(combined, wr * r * r, t, wt, prm.s, p, prm.q)
      terms.add("regions", value)
      for name in REGIONS:
        terms.add(name, order(integrals[name] ** (1.0 / u), wr * r * r, t, wt, prm.s, p, prm.q)[0], summed=False)
      return terms

    lp, terms.converged = _lp_term(g, Weight.power(2), p, g.outer_radius(cfg), cfg)
    # the first term runs over the half line
    terms.add("lp", lp * 0.5 ** (1.0 / p) if math.isfinite(p) else lp)
    singular_weight = wr if math.isinf(p) else wr * r ** (2.0 - p / u)
    for name in REGIONS:
      outer = wr * r * r if name == "I0" else singular_weight
      value, tail = order(integrals[name] ** (1.0 / u), outer, t, wt, prm.s, p, prm.q)
      terms.tail_error += tail
      terms.add(name, value)
    return terms

#endregion


#region smooth weights and Sobolev

class RhoSmoothNorm(BaseNorm):
  """Characterizations on the line with the smooth weight (1+t^2)^{(d-1)/2} and N-th differences.

  F: ||g|L_p(w)|| + ||(int_0^T t^{-sq} [int_{|h|<=1} |Delta^N_{ht} g| dh]^q dt/t)^{1/q} | L_p(w)||
  B: ||g|L_p(w)|| + (int_{|h|<=T} |h|^{-sq} ||Delta^N_h g | L_p(w)||^q dh/|h|)^{1/q}
  """

  def __init__(self, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None, besov: bool = False,
               weight: Optional[Weight] = None):
    super().__init__(params, cfg)
    self.besov = besov
    self.weight = weight or Weight.smooth_rho(params.d - 1)
    self.kind = NormKind.B_RHO if besov else NormKind.F_RHO

  def _compute_terms(self, g, cfg):
    prm = self.params
    radius = g.outer_radius(cfg)
    lp, converged = _lp_term(g, self.weight, prm.p, radius, cfg)
    terms = TermSet(converged=converged)
    terms.add("lp", lp)
    value, terms.tail_error = (self._besov_term if self.besov else self._triebel_term)(g, radius, cfg)
    terms.add("differences", value)
    return terms

  def _triebel_term(self, g, radius, cfg):
    prm = self.params
    reach = prm.N * prm.T
    x, wx = composite_gauss(0.0, radius + reach, cfg.gauss_nodes, cfg.radial_piece, breakpoints=[radius])
    h, wh = composite_gauss(-1.0, 1.0, cfg.gauss_nodes, H_PIECE, breakpoints=[0.0])
    t, wt = _t_grid(prm, cfg)
    averages = np.empty((len(x), len(t)))
    for k, tk in enumerate(t):
      diffs = nth_difference(g, DifferenceSpec(prm.N, h[None, :] * tk), x[:, None])
      averages[:, k] = np.abs(diffs) @ wh
    # the h-average is even in x
    return _f_order(averages, 2.0 * wx * self.weight(x), t, wt, prm.s, prm.p, prm.q)

  def _besov_term(self, g, radius, cfg):
    prm = self.params
    reach = prm.N * prm.T
    x, wx = composite_gauss(-radius - reach, radius, cfg.gauss_nodes, cfg.radial_piece, breakpoints=[-radius, 0.0])
    h, wh = _t_grid(prm, cfg)
    diffs = np.abs(nth_difference(g, DifferenceSpec(prm.N, h[None, :]), x[:, None]))
    moduli = _weighted_power_sum(diffs, wx * self.weight(x), prm.p)
    # steps -h give the same moduli for even g and w
    q = prm.q
    value = float(log_measure_norm(moduli, h, 2.0 * wh, prm.s, q))
    tail = float(log_measure_tail(moduli, h, prm.s, q))
    if math.isinf(q):
      return value, 0.0 if math.isfinite(tail) else math.inf
    return value, (value ** q + 2.0 * tail) ** (1.0 / q) - value


def derivative(g: RadialProfile, step: float = DERIVATIVE_STEP) -> Callable[[float], float]:
  """g' by central differences with one Richardson step."""
  def dg(x):
    wide = (g(x + step) - g(x - step)) / (2.0 * step)
    narrow = (g(x + step / 2) - g(x - step / 2)) / step
    return (4.0 * narrow - wide) / 3.0
  return dg


class SobolevNorm(BaseNorm):
  """||g | L_p(|t|^{d-1})|| + ||g' | L_p(|t|^{d-1})||; with p = 2 the radial H^1 norm."""

  def __init__(self, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None, h1: bool = False):
    super().__init__(params, cfg)
    self.kind = NormKind.H1 if h1 else NormKind.SOBOLEV

  def _compute_terms(self, g, cfg):
    prm = self.params
    radius = g.outer_radius(cfg)
    weight = Weight.power(prm.d - 1)
    lp, ok_g = _lp_term(g, weight, prm.p, radius, cfg)
    dg = derivative(g)
    dlp, ok_dg = _lp_term(dg, weight, prm.p, radius, cfg)
    terms = TermSet(converged=ok_g and ok_dg)
    terms.add("lp", lp)
    terms.add("derivative", dlp)
    return terms

#endregion


#region entry points

def weighted_lp(g: RadialProfile, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None,
                weight: Optional[Weight] = None) -> NormReport:
  return WeightedLpNorm(params, cfg, weight).compute(g)


def norm_sharp_f(g, params, cfg=None) -> NormReport:
  return SharpNorm(params, cfg).compute(g)


def norm_sharp_b(g, params, cfg=None) -> NormReport:
  return SharpNorm(params, cfg, besov=True).compute(g)


def norm_triangle_f(g, params, cfg=None) -> NormReport:
  return TriangleNorm(params, cfg).compute(g)


def norm_triangle_b(g, params, cfg=None) -> NormReport:
  return TriangleNorm(params, cfg, besov=True).compute(g)


def norm_triangle3d_f(g, params, cfg=None, mode: str = "display") -> NormReport:
  return Triangle3DNorm(params, cfg, mode=mode).compute(g)


def norm_triangle3d_b(g, params, cfg=None, mode: str = "display") -> NormReport:
  return Triangle3DNorm(params, cfg, besov=True, mode=mode).compute(g)


def norm_rho_smooth_f(g, params, cfg=None, weight: Optional[Weight] = None) -> NormReport:
  return RhoSmoothNorm(params, cfg, weight=weight).compute(g)


def norm_rho_smooth_b(g, params, cfg=None, weight: Optional[Weight] = None) -> NormReport:
  return RhoSmoothNorm(params, cfg, besov=True, weight=weight).compute(g)


def norm_sobolev_radial(g, params, cfg=None) -> NormReport:
  return SobolevNorm(params, cfg, h1=params.p == 2).compute(g)


_NORMS = {
  NormKind.WLP: lambda prm, cfg, mode: WeightedLpNorm(prm, cfg),
  NormKind.F_SHARP: lambda prm, cfg, mode: SharpNorm(prm, cfg),
  NormKind.B_SHARP: lambda prm, cfg, mode: SharpNorm(prm, cfg, besov=True),
  NormKind.F_TRIANGLE: lambda prm, cfg, mode: TriangleNorm(prm, cfg),
  NormKind.B_TRIANGLE: lambda prm, cfg, mode: TriangleNorm(prm, cfg, besov=True),
  NormKind.F_TRIANGLE_3D: lambda prm, cfg, mode: Triangle3DNorm(prm, cfg, mode=mode),
  NormKind.B_TRIANGLE_3D: lambda prm, cfg, mode: Triangle3DNorm(prm, cfg, besov=True, mode=mode),
  NormKind.F_RHO: lambda prm, cfg, mode: RhoSmoothNorm(prm, cfg),
  NormKind.B_RHO: lambda prm, cfg, mode: RhoSmoothNorm(prm, cfg, besov=True),
  NormKind.SOBOLEV: lambda prm, cfg, mode: SobolevNorm(prm, cfg),
  NormKind.H1: lambda prm, cfg, mode: SobolevNorm(prm, cfg, h1=True),
}


def make_norm(kind: NormKind, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None,
              mode: str = "display") -> BaseNorm:
  """Difference-based and Sobolev norms by kind; the Fourier kinds live in `fourier`."""
  try:
    return _NORMS[kind](params, cfg, mode)
  except KeyError:
    raise ValueError(f"{kind.value} is not a difference-based norm") from None


def compute_norm(kind: NormKind, g: RadialProfile, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None,
                 mode: str = "display") -> NormReport:
  return make_norm(kind, params, cfg, mode).compute(g)


@dataclass(frozen=True)
class EmbeddingGap:
  ratios: dict[str, Optional[float]]

  @property
  def maximum(self) -> Optional[float]:
    finite = [r for r in self.ratios.values() if r is not None]
    return max(finite) if finite else None

  def to_dict(self):
    return {"ratios": self.ratios, "max": self.maximum}


def embedding_gap(profiles: Sequence[RadialProfile], params: SmoothnessParams,
                  rho_params: Optional[SmoothnessParams] = None, besov: bool = False,
                  cfg: Optional[QuadratureConfig] = None) -> EmbeddingGap:
  """Ratio of the cap form to the smooth-weight form, per profile; 0/0 is None."""
  rho_params = rho_params or params
  ratios = {}
  for g in profiles:
    trace_norm = TriangleNorm(params, cfg, besov=besov).compute(g).value
    rho_norm = RhoSmoothNorm(rho_params, cfg, besov=besov).compute(g).value
    ratios[g.name] = None if rho_norm == 0 else trace_norm / rho_norm
  return EmbeddingGap(ratios=ratios)

#endregion
