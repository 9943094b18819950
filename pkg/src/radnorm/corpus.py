"""Named analytic profiles for the corpus studies."""
import logging
import os
import re
from functools import lru_cache
from typing import Any

import numpy as np

from .config import load_yaml_mapping
from .cutoffs import bump, chi, smooth_indicator
from .profiles import RadialProfile, load_profile_file

logger = logging.getLogger(__name__)

CORPUS_FILEPATH = os.path.join(os.path.dirname(__file__), "corpus.yaml")

# exp(-(t/sigma)^2) is below double precision past this many sigmas
GAUSSIAN_RADIUS = 6.0

PROFILE_PATTERN = re.compile(r"^\s*(?P<name>[a-z_]+)\s*(?::\s*(?P<args>.*?))?\s*$")


@lru_cache(maxsize=1)
def load_registry() -> dict[str, Any]:
  registry = load_yaml_mapping(CORPUS_FILEPATH)
  for name, entry in registry.items():
    if name != "suite" and not isinstance(entry.get("params"), dict):
      raise ValueError(f"{CORPUS_FILEPATH}: entry {name!r} has no params mapping")
  return registry


def _gaussian(sigma):
  if not sigma > 0:
    raise ValueError(f"gaussian width must be positive, got {sigma}")
  return RadialProfile(fn=lambda t: np.exp(-(t / sigma) ** 2), effective_radius=GAUSSIAN_RADIUS * sigma,
                       name=f"gaussian:{sigma:g}")


def _cusp(beta):
  if not 0 < beta < 1:
    raise ValueError(f"cusp exponent must lie in (0, 1), got {beta}")
  return RadialProfile(fn=lambda t: t ** beta * chi(t), support_radius=2.0, smoothness_hint=beta,
                       name=f"cusp:{beta:g}")


def _plateau():
  return RadialProfile(fn=lambda t: smooth_indicator(t, 1.0, 1.5), support_radius=1.5, name="plateau")


def _ring(a, w):
  if a < 0 or not w > 0:
    raise ValueError(f"ring needs a >= 0 and w > 0, got a={a}, w={w}")
  return RadialProfile(fn=lambda t: bump((t - a) / w), support_radius=a + w, name=f"ring:{a:g},{w:g}")


def _chirp(k):
  return RadialProfile(fn=lambda t: np.cos(k * t * t) * chi(t), support_radius=2.0, name=f"chirp:{k:g}")


def _twin(a, b, w):
  if min(a, b) < 0 or not w > 0:
    raise ValueError(f"twin needs a, b >= 0 and w > 0, got a={a}, b={b}, w={w}")
  return RadialProfile(fn=lambda t: bump((t - a) / w) - bump((t - b) / w), support_radius=max(a, b) + w,
                       name=f"twin:{a:g},{b:g},{w:g}")


_BUILDERS = {
  "gaussian": _gaussian,
  "cusp": _cusp,
  "plateau": _plateau,
  "ring": _ring,
  "chirp": _chirp,
  "twin": _twin,
}


def corpus(name: str, *args, **kwargs) -> RadialProfile:
  """Builds a corpus profile; positional arguments follow the registry order of its params."""
  registry = load_registry()
  if name not in _BUILDERS or name not in registry:
    raise ValueError(f"unknown corpus profile {name!r}, expected one of {', '.join(sorted(_BUILDERS))}")
  defaults = registry[name]["params"]
  if len(args) > len(defaults):
    raise ValueError(f"{name} takes at most {len(defaults)} parameters, got {len(args)}")
  params = dict(defaults)
  params.update(zip(defaults, args))
  unknown = set(kwargs) - set(defaults)
  if unknown:
    raise ValueError(f"unknown parameters for {name}: {', '.join(sorted(unknown))}")
  params.update(kwargs)
  return _BUILDERS[name](**{k: float(v) for k, v in params.items()})


def parse_profile(text: str) -> RadialProfile:
  """'cusp:0.6', 'ring:1,0.3', 'plateau' or 'file:path/to/table.txt'."""
  if text.startswith("file:"):
    return load_profile_file(text[len("file:"):])
  match = PROFILE_PATTERN.match(text)
  if match is None:
    raise ValueError(f"malformed profile {text!r}")
  args = match.group("args")
  values = [] if not args else [float(v) for v in args.split(",")]
  return corpus(match.group("name"), *values)


def corpus_suite() -> list[RadialProfile]:
  return [parse_profile(entry) for entry in load_registry()["suite"]]
