import csv
import io
import json
import subprocess
import sys

import pytest

from mbuarith.cli import main, parse_number


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_number():
    assert parse_number("11") == 11 and parse_number("0b1011") == 11
    with pytest.raises(Exception):
        parse_number("eleven")


def test_build_summary_and_file(capsys, tmp_path):
    out_file = tmp_path / "c.json"
    code, out, _ = run(capsys, "build", "--arch", "cdkpm", "--kind", "modadd", "--n", "4",
                       "--p", "11", "--mbu", "--out", str(out_file))
    assert code == 0
    assert "Toffoli static 32 expected 28" in out
    doc = json.loads(out_file.read_text())
    assert doc["version"] == 1 and doc["gates"]


def test_build_draper_plain_adder(capsys, tmp_path):
    out_file = tmp_path / "d.json"
    code, _, _ = run(capsys, "build", "--kind", "plain-add", "--arch", "draper", "--n", "3",
                     "--out", str(out_file))
    assert code == 0
    assert "QFT" in out_file.read_text()


def test_build_bad_width_exits_2(capsys):
    code, _, err = run(capsys, "build", "--arch", "cdkpm", "--kind", "modadd", "--n", "0")
    assert code == 2 and err


def test_sim_modadd(capsys, tmp_path):
    f = tmp_path / "m.json"
    assert run(capsys, "build", "--arch", "cdkpm", "--kind", "modadd", "--n", "3", "--p", "7",
               "--out", str(f))[0] == 0
    code, out, _ = run(capsys, "sim", "--circuit", str(f), "--input", "x=5,y=4")
    assert code == 0 and "result=2" in out


def test_sim_forced_too_short_exits_2(capsys, tmp_path):
    f = tmp_path / "g.json"
    run(capsys, "build", "--arch", "gidney", "--kind", "plain-add", "--n", "3", "--out", str(f))
    code, _, err = run(capsys, "sim", "--circuit", str(f), "--input", "x=1,y=2", "--force", "0")
    assert code == 2 and "forced" in err.lower()


def test_sim_seeded_reproducible(capsys, tmp_path):
    f = tmp_path / "g.json"
    run(capsys, "build", "--arch", "gidney", "--kind", "modadd", "--n", "3", "--p", "5",
        "--mbu", "--out", str(f))
    a = run(capsys, "--seed", "9", "sim", "--circuit", str(f), "--input", "x=3,y=4")
    b = run(capsys, "--seed", "9", "sim", "--circuit", str(f), "--input", "x=3,y=4")
    assert a == b and a[0] == 0


def test_sim_rotation_on_basis_backend_exits_2(capsys, tmp_path):
    f = tmp_path / "d.json"
    run(capsys, "build", "--kind", "plain-add", "--arch", "draper", "--n", "2", "--out", str(f))
    code, _, err = run(capsys, "sim", "--circuit", str(f), "--input", "x=1,y=1",
                       "--backend", "basis")
    assert code == 2 and "statevector" in err
    code, out, _ = run(capsys, "sim", "--circuit", str(f), "--input", "x=1,y=1",
                       "--backend", "statevector")
    assert code == 0 and "y=2" in out


def test_sim_warns_on_inadmissible_input(capsys, tmp_path):
    f = tmp_path / "m.json"
    run(capsys, "build", "--arch", "cdkpm", "--kind", "modadd", "--n", "3", "--p", "5",
        "--out", str(f))
    code, _, err = run(capsys, "sim", "--circuit", str(f), "--input", "x=6,y=1")
    assert code == 0 and "warning" in err.lower()


def test_verify_pass(capsys):
    code, out, _ = run(capsys, "verify", "--arch", "hybrid", "--kind", "modadd", "--n", "3",
                       "--branches", "all")
    assert code == 0 and "PASS" in out


def test_verify_budget_exits_2(capsys):
    code, _, err = run(capsys, "verify", "--arch", "gidney", "--kind", "ctrl-modadd", "--n", "12")
    assert code == 2 and err


def test_count(capsys):
    code, out, _ = run(capsys, "count", "--arch", "gidney", "--kind", "ctrl-modadd", "--n", "6")
    assert code == 0 and "Toffoli 31 (5n+1)" in out


def test_count_json(capsys):
    code, out, _ = run(capsys, "--format", "json", "count", "--arch", "cdkpm", "--kind", "modadd",
                       "--n", "4", "--p", "11", "--mbu")
    assert code == 0
    d = json.loads(out)
    assert d["counts"]["static"]["TOFFOLI"] == 32 and d["counts"]["expected"]["TOFFOLI"] == 28


def test_table_csv(capsys):
    code, out, _ = run(capsys, "table", "--rows", "cdkpm,gidney,hybrid", "--n", "4..8",
                       "--p", "11,13")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len({(r["preset"], r["n"], r["p"]) for r in rows}) == 3 * 5 * 2
    assert {r["status"] for r in rows} <= {"exact", "golden", "discrepancy-documented"}


def test_table_markdown_and_jobs(capsys):
    code, md, _ = run(capsys, "--format", "md", "table", "--rows", "cdkpm", "--n", "4..5",
                      "--p", "11", "--jobs", "2")
    assert code == 0 and md.startswith("| row |")


def test_unknown_arch_exits_2(capsys):
    code, _, err = run(capsys, "build", "--arch", "nope", "--kind", "plain-add", "--n", "3")
    assert code == 2 and "unknown architecture" in err


def test_bad_flag_value_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["build", "--kind", "nope", "--n", "3"])
    assert e.value.code == 2


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "mbuarith.cli", "count", "--arch", "cdkpm",
                        "--kind", "plain-add", "--n", "4"], capture_output=True, text=True)
    assert r.returncode == 0 and "Toffoli 8 (2n)" in r.stdout


def test_count_mbu_labels_only_expected(capsys):
    code, out, _ = run(capsys, "count", "--arch", "cdkpm", "--kind", "modadd", "--n", "4",
                       "--p", "11", "--mbu")
    assert code == 0 and "drift" not in out
    assert "Toffoli 32\n" in out and "Toffoli expected 28 (7n)" in out
