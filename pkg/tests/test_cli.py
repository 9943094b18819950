import json
import math

import pandas as pd
import pytest

from radnorm.cli import EXIT_GATED, EXIT_OK, build_parser, main


def _run(capsys, argv):
  code = main(argv)
  return code, json.loads(capsys.readouterr().out)


def test_cap_measure_full_sphere(capsys):
  code, document = _run(capsys, ["cap-measure", "--lambda", "1", "--t", "3", "--r", "1"])
  assert code == EXIT_OK
  assert document["schema"] == "radnorm/1"
  assert document["command"] == "cap-measure"
  assert document["results"][0]["exact"] == pytest.approx(12.5663706, abs=1e-7)
  assert document["config"]["seed"] == 20240611


def test_cap_measure_grid_and_monte_carlo(capsys, tmp_path):
  table = tmp_path / "caps.csv"
  code, document = _run(capsys, ["cap-measure", "--d", "3,5", "--lambda", "0.5,1", "--t", "0.5", "--r", "1",
                                 "--samples", "20000", "--seed", "2", "--csv", str(table)])
  assert code == EXIT_OK
  rows = document["results"]
  assert len(rows) == 4
  assert rows[3]["exact"] is None and rows[3]["mc"] > 0
  assert all(abs(r["mc"] - r["exact"]) <= 4 * r["std_error"] + 1e-12 for r in rows if r["exact"] is not None)
  assert len(pd.read_csv(table)) == 4


def test_gated_norm_exits_with_one(capsys):
  code, document = _run(capsys, ["norm", "--kind", "f-sharp", "--s", "0.8", "--profile", "gaussian:1"])
  assert code == EXIT_GATED
  result = document["results"][0]
  assert result["hypothesis"]["passed"] is False
  assert result["hypothesis"]["reason"].startswith("d*max(1/p,1/q)")
  assert result["value"] > 0


def test_norm_over_a_parameter_grid(capsys, tmp_path):
  output = tmp_path / "norm.json"
  code = main(["norm", "--kind", "wlp,f-fourier", "--p", "2,4", "--s", "0.9", "--profile", "gaussian:1",
               "--output", str(output)])
  assert code == EXIT_OK
  results = json.loads(output.read_text())["results"]
  assert [(r["kind"], r["params"]["p"]) for r in results] == [("wlp", 2.0), ("wlp", 4.0), ("f-fourier", 2.0),
                                                              ("f-fourier", 4.0)]
  assert all(r["profile"] == "gaussian:1" for r in results)


def test_omega_check_command(capsys):
  code, document = _run(capsys, ["omega-check", "--samples", "2000", "--d", "2"])
  assert code == EXIT_OK
  assert document["results"][0]["passed"] is True


def test_muckenhoupt_command(capsys):
  code, document = _run(capsys, ["muckenhoupt", "--p", "2,4", "--radii", "1"])
  assert code == EXIT_OK
  classification = document["results"][0]
  assert classification["threshold"] == 2.0
  assert classification["estimates"][1]["value"] == pytest.approx(math.sqrt(3.0), abs=1e-6)


def test_report_merges_outputs(capsys, tmp_path):
  first, second = tmp_path / "caps.json", tmp_path / "omega.json"
  assert main(["cap-measure", "--lambda", "1", "--t", "3", "--r", "1", "--output", str(first)]) == EXIT_OK
  assert main(["omega-check", "--samples", "500", "--output", str(second)]) == EXIT_OK
  code, document = _run(capsys, ["report", str(first), str(second)])
  assert code == EXIT_OK
  assert [r["command"] for r in document["results"]] == ["cap-measure", "omega-check"]
  assert document["results"][0]["passed"] is None


def test_usage_errors_exit_with_two(capsys):
  with pytest.raises(SystemExit) as error:
    main(["cap-measure", "--lambda", "1,,2", "--t", "1", "--r", "1"])
  assert error.value.code == 2
  with pytest.raises(SystemExit) as error:
    main(["norm", "--kind", "f-hat"])
  assert error.value.code == 2
  with pytest.raises(SystemExit):
    main(["transform"])


def test_parser_lists_every_command():
  parser = build_parser()
  args = parser.parse_args(["strauss", "--profile", "plateau", "--dilations", "1,2"])
  assert args.command == "strauss"
  assert args.profile == ["plateau"]


def test_reports_are_reproducible_under_a_fixed_seed(tmp_path):
  first, second = tmp_path / "a.json", tmp_path / "b.json"
  argv = ["cap-measure", "--d", "4", "--lambda", "0.7", "--t", "0.5", "--r", "1", "--samples", "5000", "--seed", "11"]
  assert main(argv + ["--output", str(first)]) == EXIT_OK
  assert main(argv + ["--output", str(second)]) == EXIT_OK
  assert first.read_bytes() == second.read_bytes()
