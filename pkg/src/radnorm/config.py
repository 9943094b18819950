import logging
import os
from dataclasses import dataclass, field, fields, replace, asdict
from typing import Any, Optional

import yaml

logger = logging.getLogger(__name__)

DEFAULTS_FILEPATH = os.path.join(os.path.dirname(__file__), "defaults.yaml")


def normpath(path):
  """Provide the canonical absolute form of a user supplied path."""
  return os.path.normpath(os.path.abspath(os.path.expanduser(path)))


def load_yaml_mapping(filename) -> dict[str, Any]:
  filename = normpath(filename)
  with open(filename, "r", encoding="utf-8") as f:
    try:
      data = yaml.safe_load(f)
    except yaml.YAMLError as e:
      raise ValueError(f"{filename}: not valid YAML ({e})") from e
  if data is None:
    return {}
  if not isinstance(data, dict):
    raise ValueError(f"{filename}: expected a key-value mapping, got {type(data).__name__}")
  return data


@dataclass(frozen=True)
class TGrid:
  t_min: float = 1e-4
  t_max: float = 1.0
  points_per_decade: int = 16

  def __post_init__(self):
    if not (0 < self.t_min < self.t_max):
      raise ValueError(f"t_grid needs 0 < t_min < t_max, got t_min={self.t_min}, t_max={self.t_max}")
    if self.points_per_decade < 4:
      raise ValueError(f"t_grid.points_per_decade must be >= 4, got {self.points_per_decade}")

  @classmethod
  def from_dict(cls, d: Optional[dict[str, Any]]) -> "TGrid":
    if not d:
      return cls()
    return cls(
      t_min=float(d.get("t_min", cls.t_min)),
      t_max=float(d.get("t_max", cls.t_max)),
      points_per_decade=int(d.get("points_per_decade", cls.points_per_decade)),
    )


@dataclass(frozen=True)
class QuadratureConfig:
  """Every knob that controls numeric evaluation.

  Two reports computed with equal configs (seed included) are bit-identical.
  """
  rel_tol: float = 1e-8
  abs_tol: float = 1e-14
  max_subdivisions: int = 200
  t_grid: TGrid = field(default_factory=TGrid)
  mc_samples: int = 100_000
  mc_chunk: int = 65_536
  seed: int = 20240611
  gauss_nodes: int = 12
  radial_piece: float = 0.25
  r_max: float = 8.0
  sup_points: int = 17
  sup_levels: int = 3
  workers: int = 1

  def __post_init__(self):
    if self.rel_tol <= 0 or self.abs_tol <= 0:
      raise ValueError(f"tolerances must be positive, got rel_tol={self.rel_tol}, abs_tol={self.abs_tol}")
    if self.max_subdivisions < 1:
      raise ValueError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")
    if self.mc_samples < 1 or self.mc_chunk < 1:
      raise ValueError("mc_samples and mc_chunk must be positive")
    if self.gauss_nodes < 2:
      raise ValueError(f"gauss_nodes must be >= 2, got {self.gauss_nodes}")
    if self.radial_piece <= 0 or self.r_max <= 0:
      raise ValueError("radial_piece and r_max must be positive")
    if self.sup_points < 3 or self.sup_levels < 0:
      raise ValueError("sup_points must be >= 3 and sup_levels >= 0")
    if self.seed < 0:
      raise ValueError(f"seed must be non-negative, got {self.seed}")
    if self.workers < 1:
      raise ValueError(f"workers must be >= 1, got {self.workers}")

  @classmethod
  def from_dict(cls, d: Optional[dict[str, Any]]) -> "QuadratureConfig":
    if not d:
      return cls()
    d = dict(d)
    grid = dict(d.pop("t_grid", None) or {})
    # flat keys are accepted too, they come from CLI flags
    for key in ("t_min", "t_max", "points_per_decade"):
      if key in d:
        grid[key] = d.pop(key)
    known = {f.name for f in fields(cls)} - {"t_grid"}
    unknown = set(d) - known
    if unknown:
      raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kwargs = {name: _cast(name, value) for name, value in d.items()}
    return cls(t_grid=TGrid.from_dict(grid), **kwargs)

  def to_dict(self) -> dict[str, Any]:
    return asdict(self)

  def with_overrides(self, **overrides) -> "QuadratureConfig":
    """Returns a copy with the non-None overrides applied."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if not overrides:
      return self
    merged = self.to_dict()
    merged.update(overrides)
    return QuadratureConfig.from_dict(merged)

  def coarsened(self) -> "QuadratureConfig":
    """Half-resolution copy, used for self-convergence error estimates."""
    grid = replace(self.t_grid, points_per_decade=max(4, self.t_grid.points_per_decade // 2))
    return replace(
      self,
      t_grid=grid,
      gauss_nodes=max(2, self.gauss_nodes // 2),
      sup_points=max(3, (self.sup_points // 2) | 1),
      mc_samples=max(2, self.mc_samples // 4),
    )


_INT_KEYS = {"max_subdivisions", "mc_samples", "mc_chunk", "seed", "gauss_nodes", "sup_points", "sup_levels", "workers"}


def _cast(name: str, value: Any):
  if name in _INT_KEYS:
    return int(float(value))
  return float(value)


def default_config() -> QuadratureConfig:
  return QuadratureConfig.from_dict(load_yaml_mapping(DEFAULTS_FILEPATH))


def load_config(filename: Optional[str] = None) -> QuadratureConfig:
  """Packaged defaults, overlaid with the key-value file `filename` if given."""
  merged = load_yaml_mapping(DEFAULTS_FILEPATH)
  if filename is not None:
    user = load_yaml_mapping(filename)
    logger.debug("config overrides from %s: %s", filename, sorted(user))
    grid = dict(merged.get("t_grid") or {})
    grid.update(user.pop("t_grid", None) or {})
    merged.update(user)
    merged["t_grid"] = grid
  return QuadratureConfig.from_dict(merged)
