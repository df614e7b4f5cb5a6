import csv
import json
import re

import pytest

from recordgof.cli import EXIT_FAILURE, EXIT_OK, main, rerun, run
from recordgof.mc import CriticalTable
from recordgof.records import RecordSample, dump_records, load_records


@pytest.fixture
def calls_file(tmp_path, call_times):
    path = tmp_path / "calls.txt"
    path.write_text("\n".join(str(v) for v in call_times) + "\n")
    return path


@pytest.fixture
def record_files(tmp_path, calls, aircon, simulated_w4):
    out = {}
    for name, rs in (("calls", calls), ("aircon", aircon), ("w4", simulated_w4)):
        out[name] = tmp_path / f"{name}.json"
        dump_records(rs, out[name])
    return out


def _stdout_json(capsys, argv):
    assert main(argv) == EXIT_OK
    return json.loads(capsys.readouterr().out)


def test_extract_reproduces_record_table(calls_file, tmp_path, calls, capsys):
    out = tmp_path / "rec.json"
    payload = _stdout_json(capsys, ["extract", str(calls_file), str(out)])
    assert payload["m"] == 5 and payload["n"] == 48
    assert load_records(out) == calls


def test_extract_single_value(tmp_path, capsys):
    src = tmp_path / "one.txt"
    src.write_text("2.5\n")
    out = tmp_path / "one.json"
    assert _stdout_json(capsys, ["extract", str(src), str(out)])["m"] == 1
    assert load_records(out).records == [(2.5, 1)]


def test_extract_reports_bad_line(tmp_path, capsys):
    src = tmp_path / "bad.txt"
    src.write_text("1\n2\n3\n4\n5\n6\nabc\n8\n")
    assert main(["extract", str(src)]) == EXIT_FAILURE
    captured = capsys.readouterr()
    assert "line 7" in captured.err
    assert captured.out == ""


@pytest.mark.parametrize("content", ["", "\n\n"])
def test_extract_empty_file_fails(tmp_path, content):
    src = tmp_path / "empty.txt"
    src.write_text(content)
    assert main(["extract", str(src)]) == EXIT_FAILURE


def test_extract_missing_file_fails(tmp_path, capsys):
    assert main(["extract", str(tmp_path / "nope.txt")]) == EXIT_FAILURE
    assert "cannot read" in capsys.readouterr().err


def test_fit_exponential(record_files, capsys):
    fit = _stdout_json(capsys, ["fit", str(record_files["calls"]), "--model", "exponential"])
    assert fit["sigma"] == pytest.approx(1.022, abs=1e-3)


def test_fit_weibull(record_files, capsys):
    fit = _stdout_json(capsys, ["fit", str(record_files["calls"])])
    assert fit["alpha"] == pytest.approx(1.1815, abs=5e-4)
    assert fit["sigma"] == pytest.approx(0.8181, abs=5e-4)
    assert fit["residual"] <= 1e-10


def test_fit_both(record_files, capsys):
    fits = _stdout_json(capsys, ["fit", str(record_files["calls"]), "--model", "both"])
    assert [f["model"] for f in fits] == ["weibull", "exponential"]


def test_fit_weibull_single_record_fails(tmp_path, capsys):
    path = tmp_path / "one.json"
    dump_records(RecordSample([3.0], [4]), path)
    assert main(["fit", str(path)]) == EXIT_FAILURE
    assert "at least 2 records" in capsys.readouterr().err


def test_output_is_ten_significant_digits(record_files, capsys):
    main(["glr", str(record_files["calls"])])
    text = capsys.readouterr().out
    assert re.search(r'"p_value": 0\.5324766\d{3}\n', text)


def test_test_command_accepts_example(record_files, capsys):
    results = _stdout_json(capsys, ["test", str(record_files["calls"]), "--table-n", "50"])
    assert [r["statistic"] for r in results] == ["ks", "cm", "ds"]
    assert not any(r["reject"] for r in results)
    assert all(r["table_n"] == 50 and r["n"] == 48 for r in results)


def test_test_command_missing_level_fails(record_files, capsys):
    argv = ["test", str(record_files["calls"]), "--table-n", "50", "--gamma", "0.2"]
    assert main(argv) == EXIT_FAILURE
    err = capsys.readouterr().err
    assert "level=0.8" in err and "n=50" in err


def test_test_command_missing_n_fails_without_interpolation(record_files, capsys):
    assert main(["test", str(record_files["calls"])]) == EXIT_FAILURE
    assert "n=48" in capsys.readouterr().err
    assert main(["test", str(record_files["calls"]), "--interpolate-n"]) == EXIT_OK


def test_test_command_empty_stats_is_noop(record_files, capsys):
    assert main(["test", str(record_files["calls"]), "--stats", ""]) == EXIT_OK
    captured = capsys.readouterr()
    assert json.loads(captured.out) == []
    assert "nothing to do" in captured.err


def test_test_command_unknown_stat(record_files):
    assert main(["test", str(record_files["calls"]), "--stats", "ks,ad"]) == EXIT_FAILURE


def test_rejection_keeps_exit_zero(tmp_path, record_files, capsys):
    table = tmp_path / "strict.json"
    CriticalTable({(48, "ks", 0.9): 0.01}).save(table)
    argv = ["test", str(record_files["calls"]), "--stats", "ks", "--gamma", "0.1", "--table", str(table)]
    results = _stdout_json(capsys, argv)
    assert results[0]["reject"] is True


@pytest.mark.parametrize(
    "name,stat,p",
    [("calls", 0.3896630654, 0.5324766591), ("aircon", 1.580279376, 0.2087204561), ("w4", 7.911804336, 0.0049113232)],
)
def test_glr_command(record_files, capsys, name, stat, p):
    res = _stdout_json(capsys, ["glr", str(record_files[name])])
    assert res["value"] == pytest.approx(stat, abs=1e-6)
    assert res["p_value"] == pytest.approx(p, abs=1e-6)
    assert res["reject"] is (p < 0.05)


def test_glr_single_record_fails(tmp_path):
    path = tmp_path / "one.json"
    dump_records(RecordSample([3.0], [4]), path)
    assert main(["glr", str(path)]) == EXIT_FAILURE


def test_simulate_degenerate_and_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["simulate", "--n", "5,10", "--reps", "1", "--seed", "4"]
    assert main([*argv, "--out", str(a), "--csv", str(tmp_path / "a.csv")]) == EXIT_OK
    captured = capsys.readouterr()
    assert "n=5" in captured.err and "n=5" not in captured.out
    assert main([*argv, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader((tmp_path / "a.csv").open()))
    assert rows[0][:2] == ["n", "statistic"] and len(rows) == 7


def test_simulate_timestamp_is_opt_in(tmp_path):
    out = tmp_path / "t.json"
    assert main(["simulate", "--n", "5", "--gammas", "0.5", "--reps", "1", "--out", str(out), "--timestamp"]) == 0
    assert "generated_at" in json.loads(out.read_text())["meta"]


def test_simulated_table_feeds_test_command(tmp_path, record_files, capsys):
    table = tmp_path / "t.json"
    assert main(["simulate", "--n", "48", "--gammas", "0.95", "--reps", "50", "--out", str(table)]) == EXIT_OK
    capsys.readouterr()
    results = _stdout_json(capsys, ["test", str(record_files["calls"]), "--table", str(table)])
    assert len(results) == 3


@pytest.mark.parametrize("extra", [["--reps", "0"], ["--n", "1"], ["--gammas", "1.5"]])
def test_simulate_invalid_grid(tmp_path, extra):
    assert main(["simulate", "--out", str(tmp_path / "x.json"), *extra]) == EXIT_FAILURE


def test_simulate_unwritable_path(tmp_path):
    assert main(["simulate", "--reps", "1", "--n", "5", "--out", str(tmp_path / "no" / "x.json")]) == EXIT_FAILURE


def test_emit_steps(tmp_path, record_files, capsys):
    steps = tmp_path / "steps.csv"
    _stdout_json(capsys, ["test", str(record_files["calls"]), "--table-n", "50", "--emit-steps", str(steps)])
    rows = list(csv.DictReader(steps.open()))
    assert [float(r["x"]) for r in rows] == [0.02, 0.07, 0.09, 0.14, 1.34]
    assert float(rows[0]["surv"]) == pytest.approx(47 / 48)
    assert float(rows[-1]["surv"]) == 0.0
    assert float(rows[0]["fitted_surv"]) == pytest.approx(0.9876, abs=5e-4)


def test_emit_loglik_grid(tmp_path, record_files, capsys):
    grid = tmp_path / "grid.csv"
    argv = ["fit", str(record_files["calls"]), "--emit-loglik-grid", "0.5:2", "0.4:1.5", "21", "--grid-file", str(grid)]
    fit = _stdout_json(capsys, argv)
    rows = list(csv.DictReader(grid.open()))
    assert len(rows) == 21 * 21
    assert max(float(r["loglik"]) for r in rows) <= fit["loglik"] + 1e-12


def test_report_round_trip(tmp_path, record_files):
    report_path = tmp_path / "report.json"
    status, payload, _ = run(["test", str(record_files["calls"]), "--table-n", "50", "--output", str(report_path)])
    assert status == EXIT_OK
    report = json.loads(report_path.read_text())
    assert report["input"] == {"path": str(record_files["calls"]), "scheme": "random", "n": 48, "m": 5}
    assert report["fits"][0]["model"] == "weibull"
    assert report["table"]["path"] == "published"
    assert report["tool"]["name"] == "recordgof" and report["meta"]["duration_s"] >= 0
    again = rerun(report)
    assert again["tests"] == report["tests"] == payload
    assert again["fits"] == report["fits"]


def test_csv_format(record_files, capsys):
    assert main(["test", str(record_files["calls"]), "--table-n", "50", "--format", "csv"]) == EXIT_OK
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert [r["statistic"] for r in rows] == ["ks", "cm", "ds"]
    assert all(r["reject"] == "False" for r in rows)


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["fit"])
    assert exc.value.code == 2
