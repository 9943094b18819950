import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from radnorm.geometry import (INNER_RADIUS, OUTER_RADIUS, VERIFIED_ENVELOPE, CapMeasureOracle, CapSpec, OmegaQuery,
                              ball_volume, cap_measure, cap_measure_exact, cap_measure_mc, coarea_integral,
                              omega_contains, omega_contains_batch, sandwich_bounds, sphere_area, split_regions)
from radnorm.numerics import philox

rng = philox(11)
coords = st.floats(min_value=-3.0, max_value=3.0)


def _ball(rng, d, m, radius):
  g = rng.standard_normal((m, d))
  g /= np.linalg.norm(g, axis=1, keepdims=True)
  return g * (np.asarray(radius) * rng.random(m) ** (1.0 / d))[:, None]


#region Omega sets

def test_omega_examples():
  assert omega_contains(OmegaQuery((0.5, 0.0, 0.0), (1.0, 0.0, 0.0), 1.0))
  assert omega_contains(OmegaQuery((2.0, 0.0, 0.0), (0.2, 0.0, 0.0), 1.0))
  assert not omega_contains(OmegaQuery((2.0, 0.0, 0.0), (0.0, 0.0, 0.01), 0.001))


def test_omega_rejects_bad_queries():
  with pytest.raises(ValueError):
    OmegaQuery((1.0, 0.0), (0.0, 0.0), 0.0)
  with pytest.raises(ValueError):
    OmegaQuery((1.0, 0.0), (0.0, 0.0, 0.0), 1.0)
  with pytest.raises(ValueError):
    omega_contains_batch(np.zeros(3), np.zeros(3), -1.0)


def test_omega_origin_excluded_far_from_zero():
  # x + h/t = 0 with |x| > 1
  assert not omega_contains(OmegaQuery((2.0, 0.0), (-2.0, 0.0), 1.0))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_omega_ball_sandwich(d):
  m = 10_000
  x = _ball(rng, d, m, 3.0)
  t = 10.0 ** rng.uniform(-2.0, 2.0, m)
  inner = _ball(rng, d, m, INNER_RADIUS * t)
  assert np.all(omega_contains_batch(x, inner, t))
  h = _ball(rng, d, m, (OUTER_RADIUS + 1.0) * t)
  member = omega_contains_batch(x, h, t)
  assert member.any() and not member.all()
  assert np.all(np.linalg.norm(h[member], axis=1) < OUTER_RADIUS * t[member])


def test_omega_inner_ball_auxiliary_inequality():
  # <x, x+h> >= |x+h| sqrt(|x|^2 - |h|^2) for |h| < |x|
  x = _ball(rng, 3, 5000, 3.0)
  h = _ball(rng, 3, 5000, 1.0) * np.linalg.norm(x, axis=1, keepdims=True)
  z = x + h
  lhs = np.einsum("ij,ij->i", x, z)
  rhs = np.linalg.norm(z, axis=1) * np.sqrt(np.sum(x * x, axis=1) - np.sum(h * h, axis=1))
  assert np.all(lhs >= rhs - 1e-12)


@given(st.lists(coords, min_size=3, max_size=3), st.lists(coords, min_size=3, max_size=3),
       st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=200, deadline=None)
def test_omega_scaling(x, h, t):
  x, h = np.array(x), np.array(h)
  assert omega_contains_batch(x, h, t) == omega_contains_batch(x, h / t, 1.0)


def test_omega_rotation_invariance():
  m = 10_000
  x = _ball(rng, 3, m, 3.0)
  t = 10.0 ** rng.uniform(-1.0, 1.0, m)
  h = _ball(rng, 3, m, 3.5 * t)
  rotation = stats.special_ortho_group.rvs(3, random_state=rng)
  original = omega_contains_batch(x, h, t)
  rotated = omega_contains_batch(x @ rotation.T, h @ rotation.T, t)
  # at most a boundary point or two may flip through rounding
  assert np.sum(original != rotated) <= 2

#endregion


#region cap measures

def test_cap_measure_examples():
  assert cap_measure_exact(CapSpec(3, 1.0, 3.0, 1.0)) == pytest.approx(4.0 * math.pi, rel=1e-12)
  assert cap_measure_exact(CapSpec(3, 5.0, 1.0, 1.0)) == 0.0
  assert cap_measure_exact(CapSpec(3, 1.0, 0.5, 1.0)) == pytest.approx(math.pi / 4.0, rel=1e-12)
  assert cap_measure_exact(CapSpec(2, 1.0, 1.0, 1.0)) == pytest.approx(2.0 * math.pi / 3.0, rel=1e-12)


def test_cap_measure_at_origin_uses_whole_or_nothing():
  assert cap_measure_exact(CapSpec(3, 0.5, 1.0, 0.0)) == pytest.approx(math.pi)
  assert cap_measure_exact(CapSpec(3, 2.0, 1.0, 0.0)) == 0.0
  assert cap_measure_exact(CapSpec(2, 0.5, 1.0, 0.0)) == pytest.approx(math.pi)


def test_cap_spec_validation():
  with pytest.raises(ValueError):
    CapSpec(3, -1.0, 1.0, 1.0)
  with pytest.raises(ValueError):
    CapSpec(3, 1.0, 0.0, 1.0)
  with pytest.raises(ValueError):
    cap_measure_exact(CapSpec(4, 1.0, 1.0, 1.0))
  with pytest.raises(ValueError):
    cap_measure_mc(CapSpec(3, 1.0, 1.0, 1.0), samples=10, seed=0)


def test_sphere_constants():
  assert sphere_area(2) == pytest.approx(2.0 * math.pi)
  assert sphere_area(3) == pytest.approx(4.0 * math.pi)
  assert ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)


@pytest.mark.parametrize("d, volume", [(3, lambda t: 4.0 / 3.0 * math.pi * t ** 3), (2, lambda t: math.pi * t * t)])
def test_coarea_identity(d, volume):
  grid = np.linspace(0.1, 4.0, 10)
  for r in grid:
    for t in grid:
      assert coarea_integral(d, float(r), float(t)) == pytest.approx(volume(t), rel=1e-6)


def test_cap_measure_mc_full_sphere():
  estimate = cap_measure_mc(CapSpec(3, 1.0, 3.0, 1.0), samples=100_000, seed=1)
  assert estimate.std_error == 0.0
  assert estimate.estimate == pytest.approx(4.0 * math.pi)


def test_cap_measure_mc_is_deterministic():
  spec = CapSpec(3, 1.0, 0.5, 1.0)
  assert cap_measure_mc(spec, 20_000, seed=4) == cap_measure_mc(spec, 20_000, seed=4)


@pytest.mark.slow
def test_cap_measure_mc_matches_exact_on_all_branches():
  specs = [CapSpec(d, lam, t, r) for d in (2, 3) for lam in (0.5, 1.0, 1.5) for t in (0.3, 1.0, 2.5) for r in (0.5, 1.2)]
  specs = [s for s in specs if cap_measure_exact(s) > 0][:27] + [CapSpec(3, 5.0, 1.0, 1.0), CapSpec(2, 3.0, 0.5, 1.0),
                                                                  CapSpec(3, 0.2, 2.0, 1.0)]
  for k, spec in enumerate(specs):
    estimate = cap_measure_mc(spec, 1_000_000, seed=k)
    assert abs(estimate.estimate - cap_measure_exact(spec)) <= 4.0 * estimate.std_error + 1e-12


def test_cap_measure_mc_matches_exact_cap_branch():
  estimate = cap_measure_mc(CapSpec(3, 1.0, 0.5, 1.0), 200_000, seed=2)
  assert abs(estimate.estimate - math.pi / 4.0) <= 4.0 * estimate.std_error


def test_cap_measure_mc_high_dimension_decreasing_in_t():
  values = [cap_measure_mc(CapSpec(5, 1.0, t, 1.0), 100_000, seed=0).estimate for t in (0.9, 0.7, 0.5)]
  assert values[0] > values[1] > values[2] > 0.0


def test_oracle_agrees_with_closed_form():
  oracle = CapMeasureOracle(3, samples=200_000, seed=5)
  lam = np.linspace(0.05, 2.0, 40)
  exact = cap_measure(3, lam, 1.0, 1.0)
  assert np.allclose(oracle(lam, 1.0, 1.0), exact, atol=0.05 * 4.0 * math.pi * lam ** 2 + 1e-12)
  assert cap_measure(5, 1.0, 3.0, 1.0, CapMeasureOracle(5, 1000)) == pytest.approx(sphere_area(5))

#endregion


#region region split

def test_split_example_small_t():
  split = split_regions(1.0, 0.1)
  assert split.i0.is_empty
  assert (split.i1.lo, split.i1.hi) == pytest.approx((0.925, 1.075))
  assert (split.i2.lo, split.i2.hi) == pytest.approx((1.075, 1.1))
  assert split.i2.closed_lo and not split.i2.closed_hi
  assert (split.i3.lo, split.i3.hi) == pytest.approx((0.9, 0.925))
  assert split.i3.closed_lo and split.i3.closed_hi


def test_split_examples_near_origin():
  split = split_regions(0.2, 1.0)
  assert (split.i0.lo, split.i0.hi) == pytest.approx((0.0, 0.8))
  assert split.i3.is_empty
  split = split_regions(0.0, 1.0)
  assert (split.i0.lo, split.i0.hi) == (0.0, 1.0)
  assert split.i1.length == 0.0 and split.i2.length == 0.0 and split.i3.is_empty


@given(st.floats(min_value=0.0, max_value=5.0), st.floats(min_value=1e-3, max_value=5.0))
@settings(max_examples=300, deadline=None)
def test_split_completeness(r, t):
  split = split_regions(r, t)
  covered = split.i1.length + split.i2.length + split.i3.length
  lo = max(max(0.0, r - t), t - r)
  assert covered == pytest.approx(max(r + t - lo, 0.0), abs=1e-12)


def test_split_rejects_bad_input():
  with pytest.raises(ValueError):
    split_regions(-1.0, 1.0)
  with pytest.raises(ValueError):
    split_regions(1.0, 0.0)
  with pytest.raises(ValueError):
    split_regions(1.0, 1.0).region("I4")

#endregion


#region sandwich bounds

def test_sandwich_on_i1():
  bound = sandwich_bounds(1.0, 0.1, 1.0, "I1")
  assert bound.lower == pytest.approx(0.004375)
  assert bound.value == pytest.approx(0.01)
  assert bound.upper == pytest.approx(0.01)
  assert bound.lower_holds and bound.upper_holds


def test_sandwich_on_i2_printed_upper_fails():
  bound = sandwich_bounds(1.0, 0.1, 1.08, "I2")
  assert bound.value == pytest.approx(0.0036)
  assert bound.upper == pytest.approx(0.002)
  assert not bound.upper_holds
  assert bound.lower_holds
  assert bound.verified_lower <= bound.value <= bound.verified_upper


def test_sandwich_rejects_lambda_outside_region():
  with pytest.raises(ValueError):
    sandwich_bounds(1.0, 0.1, 1.5, "I2")
  with pytest.raises(ValueError):
    sandwich_bounds(1.0, 0.1, 1.0, "I0")


@given(st.floats(min_value=0.05, max_value=5.0), st.floats(min_value=0.01, max_value=5.0),
       st.floats(min_value=0.0, max_value=1.0), st.sampled_from(["I1", "I2", "I3"]))
@settings(max_examples=300, deadline=None)
def test_verified_envelope_holds(r, t, frac, region):
  interval = split_regions(r, t).region(region)
  if interval.length <= 0.0:
    return
  lam = interval.lo + frac * interval.length
  if not interval.contains(lam):
    return
  bound = sandwich_bounds(r, t, lam, region)
  assert bound.verified_lower <= bound.value * (1 + 1e-9) + 1e-15
  assert bound.value <= bound.verified_upper * (1 + 1e-9) + 1e-15
  assert VERIFIED_ENVELOPE[region][0] <= VERIFIED_ENVELOPE[region][1]

#endregion
