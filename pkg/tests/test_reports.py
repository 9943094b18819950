import json
import math

import numpy as np
import pandas as pd

from radnorm.params import HypothesisVerdict, SmoothnessParams
from radnorm.reports import SCHEMA, NormReport, NormTerm, dumps, envelope, rows_frame, write_csv, write_json

report = NormReport(
  kind="f-sharp",
  params=SmoothnessParams(q=math.inf),
  value=1.25,
  terms=[NormTerm("lp", 1.0), NormTerm("sup-differences", 0.25), NormTerm("top-band-share", math.nan, summed=False)],
  numeric_error=math.inf,
  hypothesis=HypothesisVerdict(False, "d*max(1/p,1/q) < s < 1"),
  profile="gaussian:1",
)


def test_report_accessors():
  assert report.gated
  assert report.term("sup-differences") == 0.25


def test_report_dict_uses_null_for_non_finite_values():
  d = report.to_dict()
  assert d["numeric_error"] is None
  assert d["terms"][2] == {"name": "top-band-share", "value": None, "summed": False}
  assert d["params"]["q"] == "inf"
  assert d["hypothesis"] == {"passed": False, "reason": "d*max(1/p,1/q) < s < 1"}


def test_dumps_is_stable_and_strict():
  document = envelope("norm", [report.to_dict()], {"seed": np.int64(3), "rel_tol": np.float64(1e-8)})
  text = dumps(document)
  assert text == dumps(json.loads(text))
  parsed = json.loads(text)
  assert parsed["schema"] == SCHEMA
  assert parsed["config"] == {"rel_tol": 1e-8, "seed": 3}
  assert list(parsed) == sorted(parsed)
  assert dumps({"x": np.array([1.0, np.inf]), "ok": np.bool_(True)}) == dumps({"ok": True, "x": [1.0, None]})


def test_write_json_and_csv(tmp_path):
  write_json(envelope("norm", [report.to_dict()]), str(tmp_path / "out.json"))
  assert json.loads((tmp_path / "out.json").read_text())["command"] == "norm"
  write_csv([report.to_row(), {**report.to_row(), "value": 2.0}], str(tmp_path / "out.csv"))
  frame = pd.read_csv(tmp_path / "out.csv")
  assert list(frame.value) == [1.25, 2.0]
  assert set(frame.columns) >= {"kind", "profile", "d", "s", "p", "q", "hypothesis"}


def test_rows_frame_flattens_nested_rows():
  frame = rows_frame([{"profile": "plateau", "verdict": {"passed": True}}])
  assert list(frame.columns) == ["profile", "verdict.passed"]
