"""Smoothness parameters, norm kinds and the hypothesis each characterization needs."""
import enum
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Optional


def _parse_exponent(value) -> float:
  if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "oo"):
    return math.inf
  return float(value)


def _dump_exponent(value: float):
  return "inf" if math.isinf(value) else value


@dataclass(frozen=True)
class SmoothnessParams:
  d: int = 3
  s: float = 0.5
  p: float = 2.0
  q: float = 2.0
  u: float = 1.0
  v: float = 1.0
  T: float = 1.0
  N: int = 1

  def __post_init__(self):
    if self.p <= 0 or self.q <= 0 or self.u <= 0 or self.v <= 0:
      raise ValueError(f"exponents must be positive, got p={self.p}, q={self.q}, u={self.u}, v={self.v}")
    if not self.T > 0:
      raise ValueError(f"T must be positive, got {self.T}")

  @classmethod
  def from_dict(cls, d: dict[str, Any]) -> "SmoothnessParams":
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
      raise ValueError(f"unknown parameters: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, value in d.items():
      if key in ("d", "N"):
        kwargs[key] = int(value)
      else:
        kwargs[key] = _parse_exponent(value)
    return cls(**kwargs)

  def to_dict(self) -> dict[str, Any]:
    return {k: _dump_exponent(v) if isinstance(v, float) else v for k, v in asdict(self).items()}

  def replace(self, **changes) -> "SmoothnessParams":
    return SmoothnessParams.from_dict({**asdict(self), **changes})


def sigma(p: float, q: float, d: int) -> float:
  """sigma_{p,q}(d) = d max(0, 1/p - 1, 1/q - 1)."""
  return d * max(0.0, 1.0 / p - 1.0, 1.0 / q - 1.0)


class NormKind(enum.Enum):
  WLP = "wlp"
  F_SHARP = "f-sharp"
  B_SHARP = "b-sharp"
  F_TRIANGLE = "f-triangle"
  B_TRIANGLE = "b-triangle"
  F_TRIANGLE_3D = "f-triangle3d"
  B_TRIANGLE_3D = "b-triangle3d"
  F_RHO = "f-rho"
  B_RHO = "b-rho"
  F_FOURIER = "f-fourier"
  B_FOURIER = "b-fourier"
  SOBOLEV = "sobolev"
  H1 = "h1"

  @property
  def is_f(self) -> bool:
    return self.value.startswith("f-")

  @property
  def difference_based(self) -> bool:
    return self in (NormKind.F_SHARP, NormKind.B_SHARP, NormKind.F_TRIANGLE, NormKind.B_TRIANGLE,
                    NormKind.F_TRIANGLE_3D, NormKind.B_TRIANGLE_3D)


@dataclass(frozen=True)
class HypothesisVerdict:
  passed: bool
  reason: Optional[str] = None

  def to_dict(self) -> dict[str, Any]:
    return {"passed": self.passed, "reason": self.reason}


PASSED = HypothesisVerdict(True)


def _fail(reason: str) -> HypothesisVerdict:
  return HypothesisVerdict(False, reason)


def _inv(x: float) -> float:
  return 0.0 if math.isinf(x) else 1.0 / x


def _trace_guard(params: SmoothnessParams) -> Optional[HypothesisVerdict]:
  """The trace of a radial function is well defined once s > sigma_{p,p}(d)."""
  if not params.s > sigma(params.p, params.p, params.d):
    return _fail(f"s > sigma_(p,p)(d) = {sigma(params.p, params.p, params.d):g}")
  return None


def _strip(lower: float, s: float, upper: float, label: str) -> Optional[HypothesisVerdict]:
  if not lower < s < upper:
    return _fail(f"{label} < s < {upper:g} (lower bound {lower:g}, s={s:g})")
  return None


def validate(params: SmoothnessParams, kind: NormKind) -> HypothesisVerdict:
  """Checks the hypothesis under which the requested form characterizes the space.

  A failing verdict names the violated inequality; validation never raises.
  """
  d, s, p, q, u, v, N = params.d, params.s, params.p, params.q, params.u, params.v, params.N
  if d < 2:
    return _fail("d >= 2")
  if N < 1:
    return _fail("N >= 1")

  if kind is NormKind.WLP:
    return PASSED
  if kind is NormKind.SOBOLEV:
    return PASSED if 1 <= p < math.inf else _fail("1 <= p < inf")
  if kind is NormKind.H1:
    return PASSED if p == 2 else _fail("p = 2")

  if kind in (NormKind.F_TRIANGLE_3D, NormKind.B_TRIANGLE_3D) and d != 3:
    return _fail("d = 3")

  if kind is NormKind.F_SHARP:
    return _strip(d * max(_inv(p), _inv(q)), s, 1.0, "d*max(1/p,1/q)") or PASSED
  if kind is NormKind.B_SHARP:
    return _strip(d * _inv(p), s, 1.0, "d/p") or PASSED

  if kind in (NormKind.F_TRIANGLE, NormKind.F_TRIANGLE_3D, NormKind.B_TRIANGLE, NormKind.B_TRIANGLE_3D):
    if not (1 <= v < math.inf and 0 < u <= v):
      return _fail("1 <= v < inf and 0 < u <= v")
    if kind.is_f:
      lower = d * max(0.0, _inv(p) - 1.0 / v, _inv(q) - 1.0 / v)
      failed = _strip(lower, s, 1.0, "d*max(0,1/p-1/v,1/q-1/v)")
    else:
      failed = _strip(d * max(0.0, _inv(p) - 1.0 / v), s, 1.0, "d*max(0,1/p-1/v)")
    return failed or _trace_guard(params) or PASSED

  if kind in (NormKind.F_RHO, NormKind.B_RHO):
    if kind is NormKind.F_RHO:
      if not (p < math.inf and q < math.inf):
        return _fail("0 < p < inf and 0 < q < inf")
      failed = _strip(sigma(p, q, 1), s, float(N), "sigma_(p,q)(1)")
    else:
      failed = _strip(sigma(p, p, 1), s, float(N), "sigma_(p,p)(1)")
    return failed or PASSED

  if kind in (NormKind.F_FOURIER, NormKind.B_FOURIER):
    critical = d * (_inv(p) - 1.0 / d)
    if kind is NormKind.F_FOURIER:
      if not s > sigma(1.0, q, d):
        return _fail(f"s > sigma_(1,q)(d) = {sigma(1.0, q, d):g}")
      borderline_ok = p <= 1
    else:
      borderline_ok = q <= 1
    if s > critical or (math.isclose(s, critical) and borderline_ok):
      return PASSED
    return _fail(f"s > d*(1/p-1/d) = {critical:g}")

  raise ValueError(f"unknown norm kind {kind}")


def validate_coincidence(params: SmoothnessParams) -> HypothesisVerdict:
  """Gate under which the 3D trace space equals the space weighted by |t|^2 on the line."""
  p, q, v, s = params.p, params.q, params.v, params.s
  if params.d != 3:
    return _fail("d = 3")
  if not p > 1.5:
    return _fail("3/2 < p")
  lower = 3.0 * max(0.0, _inv(p) - 1.0 / 3.0, _inv(p) - 1.0 / v, _inv(q) - 1.0 / v)
  return _strip(lower, s, 1.0, "3*max(0,1/p-1/3,1/p-1/v,1/q-1/v)") or PASSED
