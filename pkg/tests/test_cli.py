import json
import re
import subprocess
import sys

import pytest

from hlsched.cli import main
from hlsched.dfg import fixture_text


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def compare_table_rows(text):
    lines = text.splitlines()
    start = next(i for i, l in enumerate(lines) if l.startswith("algorithm"))
    header = lines[start].split()
    return [dict(zip(header, l.split())) for l in lines[start + 2:] if l.strip()]


def strip_runtime(text):
    return re.sub(r"\d+\.\d+\s*$", "", text, flags=re.M)


def test_schedule_ewf_mbs(capsys):
    code, out, _ = run(capsys, "schedule", "--alg", "mbs", "--add", "3", "--mul", "2", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert 14 <= rep["length"] <= 17 and rep["algorithm"] == "mbs"


def test_schedule_ewf_saa(capsys):
    code, out, _ = run(capsys, "schedule", "--alg", "saa", "--add", "4", "--mul", "2", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and abs(rep["length"] - 13) <= 1
    assert rep["baseline_length"] > rep["length"]


def test_schedule_chain4_file(capsys, tmp_path):
    path = tmp_path / "chain4.json"
    path.write_text(fixture_text("chain4"))
    code, out, _ = run(capsys, "schedule", "--input", str(path), "--alg", "asap")
    assert code == 0
    assert re.search(r"^length\s+4$", out, re.M)


def test_compare_ewf(capsys):
    code, out, _ = run(capsys, "compare", "--add", "4", "--mul", "2", "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0 and [r["algorithm"] for r in rows] == ["asap", "alap", "mbs", "saa"]
    steps = {r["algorithm"]: r["steps"] for r in rows}
    assert steps["saa"] < min(v for k, v in steps.items() if k != "saa")
    assert all(r["steps"] >= 14 for r in rows if r["algorithm"] != "saa")


def test_compare_chain4_single_row(capsys):
    code, out, _ = run(capsys, "compare", "--input", "chain4", "--algs", "asap", "--format", "json")
    (row,) = json.loads(out)["rows"]
    assert code == 0 and row["steps"] == 4 and row["fu_total"] == 1


def test_compare_table_matches_json(capsys):
    args = ["compare", "--add", "3", "--mul", "2", "--algs", "asap,alap,mbs,ls,fdls,saa"]
    _, table, _ = run(capsys, *args)
    _, js, _ = run(capsys, *args, "--format", "json")
    rows = json.loads(js)["rows"]
    parsed = compare_table_rows(table)
    assert len(parsed) == len(rows)
    keys = {"+": "add", "*": "mul"}
    for t, j in zip(parsed, rows):
        for col, val in t.items():
            if col == "runtime_ms":
                continue
            assert str(j[keys.get(col, col)]) == val


def test_compare_byte_stable(capsys):
    args = ["compare", "--add", "4", "--mul", "2"]
    first = strip_runtime(run(capsys, *args)[1])
    second = strip_runtime(run(capsys, *args)[1])
    assert first == second


def test_allocate_conventions(capsys):
    code, out, _ = run(capsys, "allocate", "--alg", "saa", "--add", "4", "--mul", "2", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["registers"] <= 13
    assert {"closed", "half_open"} <= set(rep["register_conventions"])


def test_partition_commands(capsys):
    code, out, _ = run(
        capsys, "partition", "--strategy", "cycles", "--threshold", "2",
        "--sw", "add=1,mul=4", "--transfer", "2", "--format", "json",
    )
    rep = json.loads(out)
    assert code == 0
    assert all(rep[k] >= 0 for k in ("edge_cut", "buffer_peak", "buffer_total", "delay", "comm_cost"))
    code, out, _ = run(capsys, "partition", "--threshold", "0", "--format", "json")
    assert code == 0 and json.loads(out)["edge_cut"] == 0
    code, out, _ = run(capsys, "partition", "--strategy", "clique", "--format", "json")
    assert code == 0 and set(json.loads(out)["sides"].values()) <= {"hw", "sw"}


def test_partition_diamond_example(capsys):
    code, out, _ = run(
        capsys, "partition", "--input", "diamond", "--alg", "asap", "--threshold", "2",
        "--sw", "add=1,mul=4", "--transfer", "2", "--format", "json",
    )
    rep = json.loads(out)
    assert (rep["edge_cut"], rep["buffer_peak"], rep["buffer_total"], rep["delay"], rep["comm_cost"]) == (2, 2, 4, 7, 4)


@pytest.mark.parametrize(
    "argv, code",
    [
        (["schedule", "--alg", "bogus"], 1),
        (["compare", "--algs", "asap,nope"], 1),
        (["schedule", "--input", "/no/such/file.json"], 1),
        (["schedule", "--add", "0"], 1),
        (["schedule", "--latency", "add"], 1),
        (["schedule", "--alg", "fds", "--input", "diamond", "--deadline", "2"], 2),
        (["schedule", "--alg", "alap", "--deadline", "10"], 2),
        (["schedule", "--alg", "fds", "--deadline", "17"], 0),
        (["schedule", "--input", "random:12", "--seed", "3"], 0),
        ([], 1),
    ],
)
def test_exit_codes(capsys, argv, code):
    got, out, err = run(capsys, *argv)
    assert got == code
    if code:
        assert out == "" and len(err.strip().splitlines()) == 1


def test_malformed_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"inputs": ["x"], "nodes": [{"name": "a", "op": "add"}], "edges": [], "outputs": ["a"]}')
    code, _, err = run(capsys, "schedule", "--input", str(bad))
    assert code == 1 and "unfed port" in err


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hlsched", "schedule", "--input", "diamond", "--alg", "asap", "--format", "json"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["length"] == 3
