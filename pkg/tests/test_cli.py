import json

import pytest

from p2sato import cli, verify
from p2sato.io import read_json_lines


@pytest.fixture(autouse=True)
def cache(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
    return tmp_path / "cache"


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_tuples_indecomposable(capsys):
    code, out = run(capsys, "tuples", "--m", "25", "--d", "3", "--filter", "indecomposable")
    assert code == 0
    meta, rows = read_json_lines(out)
    assert meta["m"] == 25 and meta["version"]
    assert [r["entries"] for r in rows] == [
        [1, 6, 11, 16, 20, 21],
        [2, 7, 12, 15, 17, 22],
        [3, 8, 10, 13, 18, 23],
        [4, 5, 9, 14, 19, 24],
    ]
    assert {r["class"] for r in rows} == {"indecomposable"}


@pytest.mark.parametrize("args,count", [
    (("--stage", "sum"), 2971),
    ((), 224),
    (("--filter", "exceptional"), 4),
])
def test_tuples_count_only(capsys, args, count):
    code, out = run(capsys, "tuples", "--m", "25", "--d", "3", "--count-only", *args)
    assert code == 0
    assert read_json_lines(out)[1][0]["count"] == count


def test_csv_and_table_have_headers(capsys):
    _, out = run(capsys, "gamma", "--p", "5", "--generator", "2", "--format", "csv")
    lines = out.splitlines()
    assert lines[0].startswith("# ") and json.loads(lines[0][2:])["generator"] == 2
    assert lines[1] == "row,column,tag" and lines[2] == "1,2,I" and lines[-1] == "12,1,J"
    _, out = run(capsys, "relations", "--p", "5", "--format", "table")
    assert "ū1·u4·u5·ū6·u9" in out


def test_gamma_factors(capsys):
    code, out = run(capsys, "gamma", "--p", "5", "--k", "4")
    _, rows = read_json_lines(out)
    assert code == 0 and sum(r["cycle_length"] for r in rows) == 12


def test_moments_table(capsys):
    code, out = run(capsys, "moments", "--p", "5", "--max-n", "8", "--format", "csv")
    assert code == 0
    assert out.splitlines()[1] == "source,M2,M4,M6,M8"
    assert out.splitlines()[-1] == "averaged,2,90,9344,1419866"
    assert "k=0,24,1656,185280,28377720" in out


def test_moments_fraction_rendering(capsys):
    _, out = run(capsys, "moments", "--p", "3", "--max-n", "4")
    meta, rows = read_json_lines(out)
    assert rows[-1] == {"source": "averaged", "M2": 2, "M4": 38}


def test_classify(capsys):
    code, out = run(capsys, "classify", "--p", "5", "--d", "1-4")
    meta, rows = read_json_lines(out)
    assert code == 0 and meta["passed"]
    assert [r["indecomposable"] for r in rows] == [0, 0, 4, 0]


def test_lpoly_and_histogram(capsys, cache, tmp_path):
    code, out = run(capsys, "lpoly", "--p", "5", "--bound", "20000", "--max-n", "4")
    meta, rows = read_json_lines(out)
    assert code == 0 and "a1 =" in meta["convention"] and meta["generator"] == 2
    assert [r["n"] for r in rows] == [1, 2, 3, 4] and rows[1]["theoretical"] == 2
    assert (cache / "sweep-p5-a2.records.csv").exists()
    target = tmp_path / "hist.csv"
    code, _ = run(capsys, "histogram", "--p", "5", "--bound", "20000", "--resume", "--bins", "11",
                  "--format", "csv", "--out", str(target))
    lines = target.read_text().splitlines()
    meta = json.loads(lines[0][2:])
    assert code == 0 and lines[1] == "bin_left,bin_right,count" and len(lines) == 13
    assert meta["zero_count"] + sum(int(x.split(",")[2]) for x in lines[2:]) == meta["total"]


@pytest.mark.parametrize("argv", [
    ["tuples", "--m", "25"],
    ["tuples", "--m", "24", "--d", "2"],
    ["tuples", "--m", "25", "--d", "13"],
    ["tuples", "--m", "25", "--d", "3", "--stage", "sum", "--filter", "indecomposable"],
    ["relations", "--p", "9"],
    ["relations"],
    ["gamma", "--p", "5", "--generator", "7"],
    ["gamma", "--p", "5", "--k", "20"],
    ["moments", "--p", "5", "--max-n", "1"],
    ["lpoly", "--p", "5"],
    ["histogram", "--p", "5", "--bound", "100", "--bins", "0"],
    ["classify", "--p", "5", "--d", "x"],
    ["verify", "--suite", "nope"],
    ["moments", "--p", "5", "--jobs", "0"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 2


def test_budget_exhaustion_is_usage_error(capsys):
    assert cli.main(["tuples", "--m", "49", "--d", "6", "--budget", "100"]) == 2
    assert cli.main(["moments", "--p", "5", "--budget", "10"]) == 2


def test_verify_exact_passes(capsys):
    code, out = run(capsys, "verify", "--suite", "exact")
    assert code == 0
    assert "== exact ==" in out and "[FAIL]" not in out and "== statistical ==" not in out


def test_verify_mismatch_exits_1(capsys, monkeypatch):
    bad = (("broken", "deliberately wrong", lambda: (False, "forced")),)
    monkeypatch.setattr(verify, "EXACT_CHECKS", bad)
    code, out = run(capsys, "verify", "--suite", "exact")
    assert code == 1 and "[FAIL] broken" in out
