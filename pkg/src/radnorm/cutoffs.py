"""Smooth compactly supported building blocks shared by the corpus and the dyadic bands."""
import numpy as np


def bump(z):
  """exp(1 - 1/(1 - z^2)) on |z| < 1, zero elsewhere; bump(0) = 1."""
  z = np.asarray(z, dtype=float)
  out = np.zeros_like(z)
  inside = np.abs(z) < 1.0
  zi = z[inside]
  out[inside] = np.exp(1.0 - 1.0 / (1.0 - zi * zi))
  return out


def chi(t):
  """The fixed cutoff of the corpus: bump(t/2), supported in [-2, 2]."""
  return bump(np.asarray(t, dtype=float) / 2.0)


def _flat(x):
  # exp(-1/x) for x > 0, 0 otherwise
  out = np.zeros_like(x)
  positive = x > 0.0
  out[positive] = np.exp(-1.0 / x[positive])
  return out


def smooth_step(z):
  """C^inf step: 0 for z <= -1, 1 for z >= 1, e(1+z) / (e(1+z) + e(1-z)) with e(x) = exp(-1/x) between."""
  z = np.asarray(z, dtype=float)
  rising, falling = _flat(1.0 + z), _flat(1.0 - z)
  return rising / (rising + falling)


def smooth_indicator(t, inner: float, outer: float):
  """1 on |t| <= inner, 0 on |t| >= outer, smooth and monotone in |t| between."""
  if not 0 <= inner < outer:
    raise ValueError(f"need 0 <= inner < outer, got inner={inner}, outer={outer}")
  a = np.abs(np.asarray(t, dtype=float))
  z = 2.0 * (a - inner) / (outer - inner) - 1.0
  return 1.0 - smooth_step(z)
