import math

import pytest

from radnorm.params import NormKind, SmoothnessParams, sigma, validate, validate_coincidence

base = SmoothnessParams()

validation_table = [
  (NormKind.WLP, {}, True),
  (NormKind.SOBOLEV, {}, True),
  (NormKind.SOBOLEV, {"p": math.inf}, False),
  (NormKind.H1, {}, True),
  (NormKind.H1, {"p": 3.0}, False),
  (NormKind.F_SHARP, {"s": 0.8}, False),
  (NormKind.F_SHARP, {"p": 8.0, "q": 8.0}, True),
  (NormKind.F_SHARP, {"p": 8.0, "q": 2.0}, False),
  (NormKind.B_SHARP, {"s": 0.8, "p": 4.0, "q": 1.0}, True),
  (NormKind.B_SHARP, {"s": 0.7, "p": 4.0}, False),
  (NormKind.F_TRIANGLE_3D, {"s": 0.8}, True),
  (NormKind.F_TRIANGLE_3D, {"d": 2}, False),
  (NormKind.F_TRIANGLE, {"u": 2.0}, False),
  (NormKind.F_TRIANGLE, {"s": 0.8, "p": 0.5}, False),
  (NormKind.B_TRIANGLE, {"p": 1.5}, True),
  (NormKind.B_TRIANGLE, {"s": 0.8, "p": 0.8, "v": 2.0}, False),
  (NormKind.F_TRIANGLE, {"s": 1.0}, False),
  (NormKind.F_RHO, {}, True),
  (NormKind.F_RHO, {"s": 1.5}, False),
  (NormKind.F_RHO, {"s": 1.5, "N": 2}, True),
  (NormKind.F_RHO, {"p": math.inf}, False),
  (NormKind.B_RHO, {"q": math.inf}, True),
  (NormKind.F_FOURIER, {}, False),
  (NormKind.F_FOURIER, {"s": 0.6}, True),
  (NormKind.B_FOURIER, {"s": 2.0, "p": 1.0, "q": 1.0}, True),
  (NormKind.WLP, {"d": 1}, False),
  (NormKind.F_RHO, {"N": 0}, False),
]


@pytest.mark.parametrize("kind, changes, passed", validation_table)
def test_validate(kind, changes, passed):
  verdict = validate(base.replace(**changes), kind)
  assert verdict.passed is passed
  assert (verdict.reason is None) is passed


def test_failed_verdict_names_the_inequality():
  verdict = validate(base.replace(s=0.8), NormKind.F_SHARP)
  assert verdict.reason.startswith("d*max(1/p,1/q) < s < 1")
  assert "lower bound 1.5" in verdict.reason
  assert validate(base.replace(d=2), NormKind.B_TRIANGLE_3D).reason == "d = 3"


def test_coincidence_gate():
  assert not validate_coincidence(base).passed
  assert validate_coincidence(base.replace(s=0.6)).passed
  assert validate_coincidence(base.replace(s=0.6, p=1.4)).reason == "3/2 < p"
  assert not validate_coincidence(base.replace(s=0.6, d=2)).passed


def test_sigma():
  assert sigma(2.0, 2.0, 3) == 0.0
  assert sigma(0.5, 2.0, 3) == pytest.approx(3.0)
  assert sigma(2.0, 0.25, 1) == pytest.approx(3.0)


def test_params_from_and_to_dict():
  params = SmoothnessParams.from_dict({"d": "3", "s": 0.4, "q": "inf"})
  assert params.q == math.inf and params.d == 3
  assert params.to_dict()["q"] == "inf"
  assert SmoothnessParams.from_dict(params.to_dict()) == params


def test_params_rejects_bad_values():
  with pytest.raises(ValueError):
    SmoothnessParams.from_dict({"r": 1.0})
  with pytest.raises(ValueError):
    SmoothnessParams(p=-1.0)
  with pytest.raises(ValueError):
    SmoothnessParams(T=0.0)


def test_norm_kinds():
  assert NormKind("f-triangle3d") is NormKind.F_TRIANGLE_3D
  assert NormKind.F_RHO.is_f and not NormKind.B_RHO.is_f
  assert NormKind.B_SHARP.difference_based
  assert not NormKind.F_FOURIER.difference_based
