import json
import math

import pandas as pd
import pytest

from radnorm.corpus import corpus, parse_profile
from radnorm.params import NormKind, SmoothnessParams
from radnorm.profiles import RadialProfile
from radnorm.reports import dumps, envelope
from radnorm.studies import (MAX_GRID_POINTS, aggregate_reports, equivalence_study, map_grid, omega_check,
                             params_grid, slope_study, strauss_ratio, strauss_study)

gaussian = corpus("gaussian", 1.0)


def _reciprocal(x):
  if x == 0:
    raise ValueError("zero has no reciprocal")
  return 1.0 / x


@pytest.mark.parametrize("workers", [1, 3])
def test_map_grid_keeps_order_and_records_failures(workers):
  outcomes = map_grid(_reciprocal, [1.0, 0.0, 4.0, 2.0], workers)
  assert [o.point for o in outcomes] == [1.0, 0.0, 4.0, 2.0]
  assert [o.result for o in outcomes] == [1.0, None, 0.25, 0.5]
  assert [o.failed for o in outcomes] == [False, True, False, False]
  assert "reciprocal" in outcomes[1].error


def test_grid_size_is_capped():
  with pytest.raises(ValueError):
    map_grid(_reciprocal, [1.0] * (MAX_GRID_POINTS + 1))
  with pytest.raises(ValueError):
    params_grid(SmoothnessParams(), s=[0.1] * 101, p=[2.0] * 100)


def test_params_grid_is_a_cartesian_product():
  grid = params_grid(SmoothnessParams(), s=[0.4, 0.6], p=[2.0, 4.0, math.inf])
  assert len(grid) == 6
  assert grid[0] == SmoothnessParams(s=0.4, p=2.0)
  assert grid[-1] == SmoothnessParams(s=0.6, p=math.inf)
  assert params_grid(SmoothnessParams()) == [SmoothnessParams()]


def test_equivalence_study_ratios():
  grid = [SmoothnessParams(s=0.6, p=2.0, q=2.0), SmoothnessParams(s=0.8, p=2.0, q=2.0)]
  study = equivalence_study([gaussian], grid, [NormKind.F_TRIANGLE, NormKind.F_TRIANGLE_3D], mode="exact")
  frame = study.ratios()
  assert len(frame) == 4
  reference = frame[frame.kind == "f-triangle"]
  assert (reference.ratio == 1.0).all()
  assert 1.0 <= study.constant() < 1.05
  assert not study.all_gated
  assert not study.failures


def test_equivalence_study_leaves_gated_points_out():
  grid = [SmoothnessParams(s=0.8, p=2.0, q=2.0)]
  study = equivalence_study([gaussian], grid, [NormKind.F_SHARP, NormKind.F_TRIANGLE])
  assert study.ratios().ratio.isna().all()
  assert study.constant() is None


def test_equivalence_study_records_failing_points():
  grid = [SmoothnessParams(s=0.6, u=math.inf)]
  study = equivalence_study([gaussian], grid, [NormKind.WLP, NormKind.F_TRIANGLE])
  assert len(study.reports) == 1
  assert len(study.failures) == 1


def test_strauss_ratio():
  assert strauss_ratio(RadialProfile.zero()) is None
  assert strauss_ratio(gaussian) > 0


@pytest.mark.parametrize("name", ["gaussian:1", "plateau"])
def test_strauss_ratio_is_bounded_under_dilation(name):
  profile = parse_profile(name)
  study = strauss_study(profile, workers=2)
  assert len(study.values) == 5
  assert all(v is not None for v in study.values)
  assert study.spread < 4.0
  assert study.to_dict()["spread"] == study.spread


@pytest.mark.slow
def test_slope_study_follows_critical_exponent():
  rows = slope_study([0.3, 0.5, 0.7], p=2.0)
  assert [r.beta for r in rows] == [0.3, 0.5, 0.7]
  for row in rows:
    assert row.slope == pytest.approx(row.expected, abs=0.1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_omega_check_passes(d):
  check = omega_check(d, samples=10_000, seed=1)
  assert check.passed
  assert check.to_dict()["passed"] is True


def test_omega_check_rejects_bad_input():
  with pytest.raises(ValueError):
    omega_check(1)
  with pytest.raises(ValueError):
    omega_check(3, samples=0)


def test_aggregate_reports(tmp_path):
  first, second = tmp_path / "a.json", tmp_path / "b.json"
  first.write_text(dumps(envelope("strauss", [{"profile": "plateau", "spread": 1.5, "values": [1.0, 1.5]}])))
  second.write_text(dumps(envelope("omega-check", {"d": 3, "passed": True, "verdict": {"samples": 10}})))
  frame = aggregate_reports([str(first), str(second)])
  assert isinstance(frame, pd.DataFrame)
  assert list(frame.command) == ["strauss", "omega-check"]
  assert frame.loc[1, "verdict.samples"] == 10
  assert "values" not in frame.columns


def test_aggregate_reports_rejects_foreign_files(tmp_path):
  foreign = tmp_path / "foreign.json"
  foreign.write_text(json.dumps({"schema": "other/1", "results": []}))
  with pytest.raises(ValueError):
    aggregate_reports([str(foreign)])
  with pytest.raises(ValueError):
    aggregate_reports([str(tmp_path / "missing.json")])


def test_aggregate_reports_keeps_scalar_results_and_drops_nested_lists(tmp_path):
  report = tmp_path / "c.json"
  report.write_text(dumps(envelope("norm", [2.5, {"kind": "f-sharp", "verdict": {"reasons": ["gated"]}}])))
  frame = aggregate_reports([str(report)])
  assert list(frame.source) == [str(report)] * 2
  assert frame.loc[0, "value"] == 2.5
  assert frame.loc[1, "kind"] == "f-sharp"
  assert "verdict.reasons" not in frame.columns
