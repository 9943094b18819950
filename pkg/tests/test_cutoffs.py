import math

import numpy as np
import pytest

from radnorm.cutoffs import bump, chi, smooth_indicator, smooth_step

z = np.linspace(-3.0, 3.0, 6001)


def test_bump_shape():
  assert bump(0.0) == 1.0
  values = bump(z)
  assert np.all(values[np.abs(z) >= 1.0] == 0.0)
  assert np.all(values[np.abs(z) < 1.0] > 0.0)
  assert np.array_equal(values, bump(-z))


def test_chi_support():
  assert chi(0.0) == 1.0
  assert np.all(chi(z[np.abs(z) >= 2.0]) == 0.0)


def test_smooth_step_is_monotone_cdf():
  values = smooth_step(z)
  assert np.all(values[z <= -1.0] == 0.0)
  assert np.all(values[z >= 1.0] == 1.0)
  assert np.all(np.diff(values) >= 0.0)
  assert smooth_step(0.0) == pytest.approx(0.5, abs=1e-9)


def test_smooth_indicator_plateau_and_support():
  values = smooth_indicator(z, 1.0, 2.0)
  assert np.all(values[np.abs(z) <= 1.0] == 1.0)
  assert np.all(values[np.abs(z) >= 2.0] == 0.0)
  assert smooth_indicator(1.5, 1.0, 2.0) == pytest.approx(0.5, abs=1e-9)


def test_smooth_indicator_rejects_bad_radii():
  with pytest.raises(ValueError):
    smooth_indicator(z, 2.0, 1.0)


def test_smooth_step_closed_form_and_slope():
  e = lambda x: math.exp(-1.0 / x)
  assert smooth_step(0.5) == pytest.approx(e(1.5) / (e(1.5) + e(0.5)), rel=1e-14)
  step = 1e-6
  slope = (smooth_step(step) - smooth_step(-step)) / (2.0 * step)
  assert slope == pytest.approx(0.5, rel=1e-6)
  # no kinks: the slope is continuous across the grid
  fine = np.linspace(-0.9, 0.9, 20001)
  slopes = np.diff(smooth_step(fine)) / np.diff(fine)
  assert np.max(np.abs(np.diff(slopes))) < 1e-3
