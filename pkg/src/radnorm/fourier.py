"""Fourier-analytic weighted B and F norms on the line, for cross-checking the difference forms."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .config import QuadratureConfig
from .cutoffs import smooth_indicator
from .params import HypothesisVerdict, NormKind, SmoothnessParams, validate, validate_coincidence
from .profiles import RadialProfile
from .reports import NormReport, NormTerm
from .weights import Weight

logger = logging.getLogger(__name__)

DEFAULT_EXTENT = 16.0
DEFAULT_LOG2_POINTS = 14
DEFAULT_J_MAX = 7
# a top band holding more than this share of the energy means the grid is too coarse
ALIASING_SHARE = 0.01


def psi(x):
  """1 on |x| <= 1, 0 on |x| >= 2: the indicator of [-3/2, 3/2] mollified by a bump of width 1/2."""
  return smooth_indicator(x, 1.0, 2.0)


@dataclass(frozen=True)
class DyadicPartition:
  """phi_0 = psi, phi_j(x) = psi(2^{-j} x) - psi(2^{-j+1} x) for 1 <= j <= J_max."""
  j_max: int
  generator: Callable = psi

  def phi(self, j: int, x):
    if not 0 <= j <= self.j_max:
      raise ValueError(f"band index must lie in [0, {self.j_max}], got {j}")
    x = np.asarray(x, dtype=float)
    if j == 0:
      return self.generator(x)
    return self.generator(x / 2.0 ** j) - self.generator(x / 2.0 ** (j - 1))

  def bands(self, x) -> np.ndarray:
    """All band functions at x, stacked along a new leading axis."""
    return np.stack([self.phi(j, x) for j in range(self.j_max + 1)])

  def covered(self, x):
    """sum_{j <= J_max} phi_j(x) = psi(2^{-J_max} x)."""
    return self.generator(np.asarray(x, dtype=float) / 2.0 ** self.j_max)


def dyadic_bands(j_max: int = DEFAULT_J_MAX) -> DyadicPartition:
  if j_max < 0:
    raise ValueError(f"J_max must be non-negative, got {j_max}")
  return DyadicPartition(j_max=j_max)


@dataclass(frozen=True)
class GridField1D:
  """Samples on the 2^m point periodic grid x_k = -L + k dx of [-L, L)."""
  samples: np.ndarray
  extent: float = DEFAULT_EXTENT

  def __post_init__(self):
    n = len(self.samples)
    if n < 4 or n & (n - 1):
      raise ValueError(f"grid needs a power-of-two number of points, got {n}")

  @property
  def size(self) -> int:
    return len(self.samples)

  @property
  def spacing(self) -> float:
    return 2.0 * self.extent / self.size

  @property
  def x(self) -> np.ndarray:
    return -self.extent + self.spacing * np.arange(self.size)

  @property
  def frequencies(self) -> np.ndarray:
    """Angular frequencies of the discrete transform."""
    return 2.0 * math.pi * np.fft.fftfreq(self.size, d=self.spacing)

  @classmethod
  def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], extent: float = DEFAULT_EXTENT,
                    log2_points: int = DEFAULT_LOG2_POINTS) -> "GridField1D":
    n = 2 ** log2_points
    x = -extent + 2.0 * extent / n * np.arange(n)
    return cls(samples=np.asarray(fn(x), dtype=complex), extent=extent)


def sample_profile(g: RadialProfile, extent: float = DEFAULT_EXTENT,
                   log2_points: int = DEFAULT_LOG2_POINTS) -> GridField1D:
  if g.outer_radius() > extent:
    logger.warning("profile %s reaches beyond the grid extent %g", g.name, extent)
  return GridField1D.from_function(g, extent, log2_points)


def band_limited_parts(field: GridField1D, partition: DyadicPartition) -> np.ndarray:
  """F^{-1}[phi_j F f] for every band, shape (J_max + 1, n)."""
  if field.size < 2 ** (partition.j_max + 2):
    raise ValueError(f"{field.size} grid points cannot resolve band {partition.j_max}")
  spectrum = np.fft.fft(field.samples)
  return np.fft.ifft(partition.bands(field.frequencies) * spectrum, axis=-1)


def _weighted_lp(values: np.ndarray, w: np.ndarray, p: float, dx: float):
  if math.isinf(p):
    return np.max(values, axis=-1)
  return (dx * np.sum(values ** p * w, axis=-1)) ** (1.0 / p)


def _sequence_norm(values: np.ndarray, q: float, axis: int = 0):
  if math.isinf(q):
    return np.max(values, axis=axis)
  return np.sum(values ** q, axis=axis) ** (1.0 / q)


def weighted_fourier_norm(field: GridField1D, weight: Weight, params: SmoothnessParams,
                          kind: Union[NormKind, str] = NormKind.F_FOURIER,
                          partition: Optional[DyadicPartition] = None) -> NormReport:
  """||f | B^s_{p,q}(R, w)|| or ||f | F^s_{p,q}(R, w)|| from the dyadic bands of the discrete transform.

  B: (sum_j 2^{jsq} ||f_j | L_p(w)||^q)^{1/q}; F: ||(sum_j 2^{jsq} |f_j|^q)^{1/q} | L_p(w)||.
  Band energies, the energy outside the covered bands and the aliasing share
  come back as diagnostic terms.
  """
  if isinstance(kind, str):
    kind = {"B": NormKind.B_FOURIER, "F": NormKind.F_FOURIER}.get(kind.upper(), None) or NormKind(kind)
  if kind not in (NormKind.B_FOURIER, NormKind.F_FOURIER):
    raise ValueError(f"{kind.value} is not a Fourier norm")
  partition = partition or dyadic_bands()
  s, p, q = params.s, params.p, params.q
  dx = field.spacing
  parts = np.abs(band_limited_parts(field, partition))
  scales = 2.0 ** (s * np.arange(partition.j_max + 1))[:, None]
  w = weight(field.x)

  if kind is NormKind.B_FOURIER:
    value = float(_sequence_norm(scales[:, 0] * _weighted_lp(parts, w, p, dx), q))
  else:
    value = float(_weighted_lp(_sequence_norm(scales * parts, q), w, p, dx))

  spectrum = np.abs(np.fft.fft(field.samples)) ** 2
  total_energy = float(np.sum(spectrum))
  band_energy = dx * np.sum(parts ** 2, axis=-1)
  full_energy = dx * float(np.sum(np.abs(field.samples) ** 2))
  uncovered = float(np.sum((1.0 - partition.covered(field.frequencies)) * spectrum)) / total_energy if total_energy else 0.0
  top_share = float(band_energy[-1] / full_energy) if full_energy else 0.0
  aliased = top_share > ALIASING_SHARE
  if aliased:
    logger.warning("top band holds %.3g of the energy, the grid does not resolve the profile", top_share)

  terms = [NormTerm("bands", value)]
  terms += [NormTerm(f"band-energy-{j}", float(e), summed=False) for j, e in enumerate(band_energy)]
  terms.append(NormTerm("uncovered-energy-share", uncovered, summed=False))
  terms.append(NormTerm("top-band-share", top_share, summed=False))
  return NormReport(kind=kind.value, params=params, value=value, terms=terms, numeric_error=0.0,
                    hypothesis=validate(params, kind), converged=not aliased)


def grid_doubling_error(g: RadialProfile, weight: Weight, params: SmoothnessParams,
                        kind: Union[NormKind, str] = NormKind.F_FOURIER,
                        log2_points: int = DEFAULT_LOG2_POINTS) -> float:
  """Relative change of the Fourier norm when the grid is refined once."""
  base = weighted_fourier_norm(sample_profile(g, log2_points=log2_points), weight, params, kind).value
  fine = weighted_fourier_norm(sample_profile(g, log2_points=log2_points + 1), weight, params, kind).value
  return abs(fine - base) / base if base else 0.0


@dataclass(frozen=True)
class CoincidenceRatio:
  profile: str
  ratio: Optional[float]
  triangle: float
  fourier: float
  hypothesis: HypothesisVerdict

  def to_dict(self):
    return {"profile": self.profile, "ratio": self.ratio, "triangle": self.triangle, "fourier": self.fourier,
            "hypothesis": self.hypothesis.to_dict()}


def coincidence_ratio(g: RadialProfile, params: SmoothnessParams, cfg: Optional[QuadratureConfig] = None,
                      log2_points: int = DEFAULT_LOG2_POINTS) -> CoincidenceRatio:
  """The 3D five-term norm of g over its weighted F norm with w = |t|^2 on the line.

  The ratio is None for the zero profile; a failing verdict from either gate
  is carried along.
  """
  from .norms import norm_triangle3d_f

  verdict = validate_coincidence(params)
  if verdict.passed:
    verdict = validate(params, NormKind.F_FOURIER)
  triangle = norm_triangle3d_f(g, params, cfg).value
  fourier = weighted_fourier_norm(sample_profile(g, log2_points=log2_points), Weight.power(2), params,
                                  NormKind.F_FOURIER).value
  ratio = None if fourier == 0 else triangle / fourier
  return CoincidenceRatio(profile=g.name, ratio=ratio, triangle=triangle, fourier=fourier, hypothesis=verdict)
