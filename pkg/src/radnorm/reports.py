"""Report values and their JSON/CSV serialization."""
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

import numpy as np
import pandas as pd

from .params import HypothesisVerdict, SmoothnessParams

SCHEMA = "radnorm/1"


def _finite_or_none(x: float):
  return x if math.isfinite(x) else None


@dataclass(frozen=True)
class NormTerm:
  name: str
  value: float
  # terms with summed=False are diagnostics and do not enter the total
  summed: bool = True

  def to_dict(self) -> dict[str, Any]:
    return {"name": self.name, "value": _finite_or_none(self.value), "summed": self.summed}


@dataclass(frozen=True)
class NormReport:
  kind: str
  params: SmoothnessParams
  value: float
  terms: list[NormTerm] = field(default_factory=list)
  numeric_error: float = 0.0
  hypothesis: HypothesisVerdict = field(default_factory=lambda: HypothesisVerdict(True))
  converged: bool = True
  profile: Optional[str] = None

  @property
  def gated(self) -> bool:
    return not self.hypothesis.passed

  def term(self, name: str) -> float:
    for t in self.terms:
      if t.name == name:
        return t.value
    raise KeyError(name)

  def to_dict(self) -> dict[str, Any]:
    return {
      "kind": self.kind,
      "profile": self.profile,
      "params": self.params.to_dict(),
      "value": _finite_or_none(self.value),
      "terms": [t.to_dict() for t in self.terms],
      "numeric_error": _finite_or_none(self.numeric_error),
      "hypothesis": self.hypothesis.to_dict(),
      "converged": self.converged,
    }

  def to_row(self) -> dict[str, Any]:
    return {
      "kind": self.kind,
      "profile": self.profile,
      **{k: v for k, v in self.params.to_dict().items()},
      "value": self.value,
      "numeric_error": self.numeric_error,
      "hypothesis": self.hypothesis.passed,
    }


def envelope(command: str, results: Any, config: Optional[dict[str, Any]] = None) -> dict[str, Any]:
  return {"schema": SCHEMA, "command": command, "config": config, "results": results}


def _plain(value: Any) -> Any:
  """Numpy scalars and arrays as Python values, non-finite floats as None."""
  if isinstance(value, dict):
    return {str(k): _plain(v) for k, v in value.items()}
  if isinstance(value, (list, tuple, np.ndarray)):
    return [_plain(v) for v in value]
  if isinstance(value, (bool, np.bool_)):
    return bool(value)
  if isinstance(value, (int, np.integer)):
    return int(value)
  if isinstance(value, (float, np.floating)):
    return _finite_or_none(float(value))
  return value


def dumps(document: dict[str, Any]) -> str:
  """Stable JSON: sorted keys, no timestamps, non-finite floats as null."""
  return json.dumps(_plain(document), sort_keys=True, indent=2, allow_nan=False)


def write_json(document: dict[str, Any], filename: str):
  with open(filename, "w", encoding="utf-8") as f:
    f.write(dumps(document))
    f.write("\n")


def rows_frame(rows: Iterable[dict[str, Any]]) -> pd.DataFrame:
  return pd.json_normalize(list(rows))


def write_csv(rows: Iterable[dict[str, Any]], filename: str):
  rows_frame(rows).to_csv(filename, index=False)
