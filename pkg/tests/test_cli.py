from __future__ import annotations

import csv
import io
import re
import subprocess
import sys
from fractions import Fraction as F

import pytest

from treesearch.cli import main, parse_suite, run_bench
from treesearch.exact import opt_oracle
from treesearch.strategy import parse_sequences, worst_case_cost
from treesearch.tree import normalize, parse_tree


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def gen_file(tmp_path, capsys, kind, n, weights="unit", seed=0, name=None):
    f = tmp_path / (name or f"{kind}{n}{weights}{seed}.tree")
    code, _, _ = run(capsys, "gen", "--kind", kind, "--n", n, "--weights", weights, "--seed", seed, "-o", f)
    assert code == 0
    return f


def field(out, key, anywhere=False):
    lead = "(?:^| )" if anywhere else "^"
    m = re.search(rf"{lead}{key} (-?\d+(?:/\d+)?)(?: |$)", out, re.M)
    return None if m is None else F(m.group(1))


class TestGen:
    def test_star(self, tmp_path, capsys):
        t = parse_tree(gen_file(tmp_path, capsys, "star", 5).read_text())
        assert t.n == 5 and t.parent == (None, 0, 0, 0, 0) and set(t.weight) == {1}

    def test_path(self, tmp_path, capsys):
        t = parse_tree(gen_file(tmp_path, capsys, "path", 8).read_text())
        assert t.parent == (None, 0, 1, 2, 3, 4, 5, 6)

    def test_deterministic(self, tmp_path, capsys):
        a = gen_file(tmp_path, capsys, "random", 10, "uniform", 42, "a.tree").read_bytes()
        b = gen_file(tmp_path, capsys, "random", 10, "uniform", 42, "b.tree").read_bytes()
        assert a == b
        t = parse_tree(a.decode())
        assert all(w.denominator <= 1 << 16 for w in t.weight)

    def test_bad_n(self, capsys):
        code, _, err = run(capsys, "gen", "--kind", "path", "--n", 0)
        assert code == 1 and err


class TestSolve:
    def test_star_centroid(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "star", 6)
        code, out, _ = run(capsys, "solve", f, "--algo", "centroid")
        assert code == 0 and field(out, "cost") == 1

    def test_path_oracle(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "path", 8)
        code, out, _ = run(capsys, "solve", f, "--algo", "oracle")
        assert code == 0 and field(out, "cost") == 3
        code, out, _ = run(capsys, "solve", f, "--algo", "path", "--targets")
        assert code == 0 and field(out, "cost") == 3
        assert len(re.findall(r"^target ", out, re.M)) == 8

    def test_qptas_refuses_theoretical_constants(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "random", 7, "uniform", 1)
        code, out, err = run(capsys, "solve", f, "--algo", "qptas", "--eps", 1)
        assert code == 2 and "refus" in err

    def test_oracle_cap_refused(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "path", 20)
        code, _, err = run(capsys, "solve", f, "--algo", "oracle")
        assert code == 2 and err

    def test_qptas_files_reverify(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "random", 6, "uniform", 3)
        s = tmp_path / "s.strategy"
        sch = tmp_path / "s.schedule"
        code, out, _ = run(capsys, "solve", f, "--algo", "qptas", "--c", 2, "-o", s, "--schedule-out", sch, "--opt")
        assert code == 0
        line = next(l for l in out.splitlines() if l.startswith("omega "))
        assert re.fullmatch(r"omega \S+ L \d+ modcost \S+ cost \S+", line)
        cost = field(out, "cost")
        t = normalize(parse_tree(f.read_text()))
        assert worst_case_cost(t, parse_sequences(s.read_text())) == cost
        assert field(out, "opt") == opt_oracle(t).value
        assert sch.read_text().startswith("schedule 6")
        code, vout, _ = run(capsys, "verify", f, s, "--opt")
        assert code == 0 and field(vout, "cost") == cost
        assert field(vout, "ratio", anywhere=True) <= 1 + F(168, 2)

    def test_sqrt_levels(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "random", 60, "uniform", 2)
        code, out, _ = run(capsys, "solve", f, "--algo", "sqrt")
        assert code == 0 and "level " in out

    def test_rerun_is_identical(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "random", 7, "uniform", 5)
        a, b = tmp_path / "a", tmp_path / "b"
        run(capsys, "solve", f, "--algo", "qptas", "--c", 2, "-o", a)
        run(capsys, "solve", f, "--algo", "qptas", "--c", 2, "-o", b)
        assert a.read_bytes() == b.read_bytes()


class TestVerify:
    def test_incomplete(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "path", 3)
        s = tmp_path / "bad.strategy"
        s.write_text("strategy 3\nseq 0\nseq 1\nseq 2\n")
        code, _, err = run(capsys, "verify", f, s)
        assert code == 1 and "incomplete assignment" in err and "0" in err

    def test_opt_cap_notice(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "star", 20)
        s = tmp_path / "star.strategy"
        s.write_text("strategy 20\nseq 0 0\n")
        code, out, err = run(capsys, "verify", f, s, "--opt")
        assert code == 0 and field(out, "cost") == 1
        assert field(out, "opt") is None and "cap" in (out + err)

    def test_light_down_report(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "path", 3)
        s = tmp_path / "p.strategy"
        s.write_text("strategy 3\nseq 0 1 0\nseq 1 2 1\nseq 2 2\n")
        code, out, _ = run(capsys, "verify", f, s, "--omega", "1", "--c", 1)
        assert code == 0 and "modcost" in out


class TestSimulate:
    def test_trace(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "path", 8)
        code, out, _ = run(capsys, "simulate", f, "--algo", "oracle", "--target", 7)
        lines = out.strip().splitlines()
        assert code == 0 and lines[-1].startswith("target 7 cost 3")
        assert all(l.startswith("query ") for l in lines[:-1])


class TestTransforms:
    def test_convert_edge(self, tmp_path, capsys):
        e = tmp_path / "e.etree"
        e.write_text("etree 2 0\nedge 1 0 2\n")
        code, out, _ = run(capsys, "convert-edge", e)
        t = parse_tree(out)
        assert code == 0 and sorted(t.weight) == [2, 3, 3]

    def test_contract_chains(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "path", 5)
        code, out, _ = run(capsys, "contract-chains", f)
        assert code == 0 and parse_tree(out).n == 3 and "# chain" in out

    def test_emit_labels(self, tmp_path, capsys):
        f = gen_file(tmp_path, capsys, "path", 7)
        code, out, _ = run(capsys, "emit-labels", f, "--omega", "1")
        labels = [l for l in out.splitlines() if l.startswith("label ")]
        assert code == 0 and len(labels) == 7


class TestBench:
    SUITE = "star 5 unit 0 centroid\npath 8 unit 0 oracle opt=1\nrandom 30 uniform 1 oracle\n"

    def test_rows_and_isolation(self):
        text = run_bench(parse_suite(self.SUITE), jobs=2)
        rows = list(csv.DictReader(io.StringIO(text)))
        assert len(rows) == 3
        assert rows[0]["cost"] == "1" and rows[1]["cost"] == "3" and rows[1]["ratio"] == "1"
        assert rows[2]["error"] and not rows[2]["cost"]
        assert rows[1]["cost_decimal"] == "3.000000"

    def test_rerun_identical_costs(self):
        rows = parse_suite(self.SUITE)
        a = list(csv.DictReader(io.StringIO(run_bench(rows, jobs=1))))
        b = list(csv.DictReader(io.StringIO(run_bench(rows, jobs=3))))
        assert [r["cost"] for r in a] == [r["cost"] for r in b]
        assert [r["instance"] for r in a] == [r["instance"] for r in b]

    def test_command(self, tmp_path, capsys):
        suite = tmp_path / "suite.txt"
        suite.write_text(self.SUITE)
        out = tmp_path / "bench.csv"
        code, _, _ = run(capsys, "bench", suite, "-o", out)
        assert code == 0 and len(out.read_text().splitlines()) == 4

    def test_bad_suite(self):
        with pytest.raises(ValueError):
            parse_suite("star 5 unit\n")


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "treesearch.cli", "gen", "--kind", "star", "--n", "3"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("tree 3 0")
