"""Command-line interface: ``treesearch <command> ...``.

Exit status is 0 on success, 2 when a size guard refuses the input, and 1
on any other error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import exact, gen, qptas
from .baseline import centroid_chooser, centroid_traces
from .prefix import extended_heavy_parts, extend_labels, label_contracted, with_prefixes
from .sqrt_approx import INNER_SOLVERS, rec_solve
from .strategy import (
    IncompleteAssignment,
    execute_strategy,
    explore,
    format_trace,
    modified_cost,
    parse_sequences,
    sequence_chooser,
    serialize_schedule,
    serialize_sequences,
    validate_assignment,
)
from .tree import (
    TreeError,
    contract_chains,
    format_rational,
    normalize,
    parse_edge_tree,
    parse_rational,
    parse_tree,
    reduce_edge_variant,
    serialize_edge_tree,
    serialize_tree,
)

ALGOS = ("oracle", "path", "centroid", "qptas", "sqrt")
QPTAS_MAX_N = 16
QPTAS_MAX_L = 64


class GuardRefusal(Exception):
    """Input exceeds a configured size guard."""


@dataclass
class RunReport:
    algo: str
    params: dict
    cost: Fraction
    per_target: dict
    ms: float
    opt: Optional[Fraction] = None
    extra: list = field(default_factory=list)

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.opt is None:
            return None
        return Fraction(1) if self.opt == 0 else self.cost / self.opt

    def render(self, targets: bool = False) -> str:
        ps = ",".join(f"{k}={v}" for k, v in self.params.items()) or "-"
        out = [f"algo {self.algo} params {ps}"]
        out.extend(self.extra)
        if targets:
            for x in sorted(self.per_target):
                out.append(f"target {x} cost {format_rational(self.per_target[x])}")
        out.append(f"cost {format_rational(self.cost)}")
        if self.opt is not None:
            out.append(f"opt {format_rational(self.opt)} ratio {format_rational(self.ratio)}")
        out.append(f"time_ms {self.ms:.1f}")
        return "\n".join(out) + "\n"


# ---------------------------------------------------------------- helpers


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_tree(path: str, no_normalize: bool):
    t = parse_tree(_read(path))
    return t if no_normalize else normalize(t)


def _opt_or_notice(t, cap: int):
    if t.n > cap:
        return None, f"opt omitted: n = {t.n} exceeds the oracle cap {cap}"
    return exact.opt_oracle(t, cap).value, None


def _qptas_params(n: int, c: Optional[int], L: Optional[int], eps: Optional[str]):
    if eps is not None:
        c, L = qptas.params_for_epsilon(parse_rational(eps), n)
    c = c or 2
    L = L or qptas.default_L(c, n)
    if n > QPTAS_MAX_N or L > QPTAS_MAX_L:
        raise GuardRefusal(
            f"qptas: n = {n}, c = {c}, L = {L}; the state space grows like (cn)^L, "
            f"so this build accepts n <= {QPTAS_MAX_N} and L <= {QPTAS_MAX_L}"
        )
    return c, L


def run_algo(t, algo: str, c=None, L=None, eps=None, inner="centroid", cap=None):
    """Solve ``t`` with ``algo``.  Returns ``(report, sequences or None, schedule or None)``."""
    t0 = time.perf_counter()
    seqs = None
    sched = None
    extra: list = []
    params: dict = {}
    if algo == "oracle":
        res = exact.opt_oracle(t, cap or exact.DEFAULT_CAP)
        traces = explore(t, exact.policy_chooser(res))
    elif algo == "path":
        res = exact.path_opt(t)
        traces = explore(t, exact.policy_chooser(res))
    elif algo == "centroid":
        traces = centroid_traces(t)
    elif algo == "qptas":
        c, L = _qptas_params(t.n, c, L, eps)
        params = {"c": c, "L": L}
        S, p, cs = qptas.qptas_sequences(t, c, L, cap=cap or qptas.DEFAULT_STATE_CAP)
        seqs = with_prefixes(t, S, p.threshold)[0]
        sched = qptas.schedule_from_witness(t, S)
        traces = explore(t, sequence_chooser(t, seqs))
        mc = modified_cost(t, S, p.omega, c)
        cost = max(tr.cost for tr in traces.values())
        extra.append(
            f"omega {format_rational(p.omega)} L {L} modcost {format_rational(mc)} "
            f"cost {format_rational(cost)}"
        )
    elif algo == "sqrt":
        params = {"inner": inner}
        kw = {}
        if inner == "qptas":
            kw = {"c": c or 2}
            if L:
                kw["L"] = L
            params.update(kw)
        comp = rec_solve(t, inner, **kw)
        comp.validate()
        traces = {x: comp.trace(x) for x in range(t.n)}
        for r in comp.levels:
            if r.base:
                extra.append(
                    f"level {r.depth} root {r.root} size {r.size} base worst {format_rational(r.worst)}"
                )
            else:
                extra.append(
                    f"level {r.depth} root {r.root} size {r.size} alpha {format_rational(r.alpha)} "
                    f"top {r.top_size} contracted {r.contracted_size} "
                    f"topcost {format_rational(r.top_cost)} maxw {format_rational(r.max_top_weight)} "
                    f"below {format_rational(r.component_cost)} worst {format_rational(r.worst)}"
                )
        extra.append(f"depth {comp.depth}")
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    per = {x: tr.cost for x, tr in traces.items()}
    ms = (time.perf_counter() - t0) * 1000
    return RunReport(algo, params, max(per.values()), per, ms, extra=extra), seqs, sched


# ---------------------------------------------------------------- commands


def cmd_gen(a) -> int:
    if a.edge:
        et = gen.random_edge_tree(a.n, a.seed)
        _write(a.out, serialize_edge_tree(et))
    else:
        _write(a.out, serialize_tree(gen.generate(a.kind, a.n, a.weights, a.seed)))
    return 0


def cmd_solve(a) -> int:
    t = _load_tree(a.tree, a.no_normalize)
    report, seqs, sched = run_algo(t, a.algo, a.c, a.L, a.eps, a.inner, a.cap)
    if a.opt:
        opt, notice = _opt_or_notice(t, a.oracle_cap)
        report.opt = opt
        if notice:
            report.extra.append(notice)
    if seqs is not None and a.out:
        _write(a.out, serialize_sequences(seqs))
    if sched is not None and a.schedule_out:
        _write(a.schedule_out, serialize_schedule(sched))
    _write(a.report, report.render(a.targets))
    return 0


def cmd_verify(a) -> int:
    t = _load_tree(a.tree, a.no_normalize)
    s = parse_sequences(_read(a.strategy))
    validate_assignment(t, s)
    t0 = time.perf_counter()
    omega = parse_rational(a.omega) if a.omega else None
    traces = explore(t, sequence_chooser(t, s), omega, a.c)
    per = {x: tr.cost for x, tr in traces.items()}
    report = RunReport("verify", {}, max(per.values()), per, (time.perf_counter() - t0) * 1000)
    if omega is not None and a.c:
        k = (2 * a.c + 1) * omega
        worst_ld = max(tr.light_down for tr in traces.values())
        mc = max(tr.cost - k * tr.light_down for tr in traces.values())
        report.params = {"omega": format_rational(omega), "c": a.c}
        report.extra.append(f"lightdown_max {worst_ld} modcost {format_rational(mc)}")
    if a.opt:
        opt, notice = _opt_or_notice(t, a.oracle_cap)
        report.opt = opt
        if notice:
            report.extra.append(notice)
    _write(None, report.render(a.targets))
    return 0


def cmd_simulate(a) -> int:
    t = _load_tree(a.tree, a.no_normalize)
    if not 0 <= a.target < t.n:
        raise ValueError(f"target {a.target} is not a vertex")
    omega = parse_rational(a.omega) if a.omega else None
    if a.strategy:
        tr = execute_strategy(t, parse_sequences(_read(a.strategy)), a.target, omega, a.c)
    elif a.algo == "sqrt":
        tr = rec_solve(t, a.inner).trace(a.target)
    else:
        if a.algo == "oracle":
            chooser = exact.policy_chooser(exact.opt_oracle(t))
        elif a.algo == "path":
            chooser = exact.policy_chooser(exact.path_opt(t))
        else:
            chooser = centroid_chooser(t)
        tr = explore(t, chooser, omega, a.c)[a.target]
    _write(None, format_trace(tr))
    return 0


def cmd_convert_edge(a) -> int:
    et = parse_edge_tree(_read(a.etree))
    t, mid = reduce_edge_variant(et)
    text = serialize_tree(t)
    text += "".join(f"# edge {v} {et.parent[v]} -> {m}\n" for v, m in sorted(mid.items()))
    _write(a.out, text)
    return 0


def cmd_contract_chains(a) -> int:
    t = parse_tree(_read(a.tree))
    ct, cmap = contract_chains(t)
    text = serialize_tree(ct)
    text += "".join(
        f"# chain {g} {' '.join(map(str, vs))}\n" for g, vs in sorted(cmap.items()) if len(vs) > 1
    )
    _write(a.out, text)
    return 0


def cmd_emit_labels(a) -> int:
    t = _load_tree(a.tree, a.no_normalize)
    if a.omega:
        threshold = a.c * parse_rational(a.omega)
    else:
        c, L = _qptas_params(t.n, a.c, a.L, None)
        p, _ = qptas.omega_sweep(t, c, L)
        threshold = p.threshold
    heavy = [w > threshold for w in t.weight]
    hp = extended_heavy_parts(t, heavy)
    lab = extend_labels(hp, label_contracted(hp.contracted))
    lines = [f"# part {i} {' '.join(map(str, part))}" for i, part in enumerate(hp.parts)]
    lines += [f"label {v} {lab[v]}" for v in range(t.n)]
    _write(a.out, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------- bench

BENCH_COLUMNS = [
    "instance", "n", "algo", "params", "cost", "cost_decimal",
    "opt", "opt_decimal", "ratio", "ratio_decimal", "ms", "error",
]


def parse_suite(text: str) -> list[dict]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 5:
            raise ValueError(f"line {lineno}: expected '<kind> <n> <weights> <seed> <algo> [k=v ...]'")
        kind, n, weights, seed, algo = parts[:5]
        params = {}
        for kv in parts[5:]:
            if "=" not in kv:
                raise ValueError(f"line {lineno}: parameter {kv!r} is not key=value")
            k, v = kv.split("=", 1)
            params[k] = v
        rows.append(
            {"kind": kind, "n": int(n), "weights": weights, "seed": int(seed), "algo": algo,
             "params": params}
        )
    return rows


def _dec(x: Optional[Fraction]) -> str:
    return "" if x is None else f"{float(x):.6f}"


def bench_row(row: dict) -> dict:
    name = f"{row['kind']}-{row['n']}-{row['weights']}-{row['seed']}"
    ps = row["params"]
    out = {c: "" for c in BENCH_COLUMNS}
    out.update(
        instance=name, n=row["n"], algo=row["algo"],
        params=",".join(f"{k}={v}" for k, v in sorted(ps.items())),
    )
    try:
        t = normalize(gen.generate(row["kind"], row["n"], row["weights"], row["seed"]))
        rep, _, _ = run_algo(
            t, row["algo"],
            c=int(ps["c"]) if "c" in ps else None,
            L=int(ps["L"]) if "L" in ps else None,
            eps=ps.get("eps"),
            inner=ps.get("inner", "centroid"),
            cap=int(ps["cap"]) if "cap" in ps else None,
        )
        out.update(cost=format_rational(rep.cost), cost_decimal=_dec(rep.cost), ms=f"{rep.ms:.1f}")
        if ps.get("opt", "0") in ("1", "true", "yes"):
            opt = exact.opt_oracle(t).value
            ratio = Fraction(1) if opt == 0 else rep.cost / opt
            out.update(opt=format_rational(opt), opt_decimal=_dec(opt),
                       ratio=format_rational(ratio), ratio_decimal=_dec(ratio))
    except Exception as exc:  # a failing row must not stop the suite
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def run_bench(rows: list[dict], jobs: int = 1) -> str:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(bench_row, rows))
    else:
        results = [bench_row(r) for r in rows]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(results)
    return buf.getvalue()


def cmd_bench(a) -> int:
    rows = parse_suite(_read(a.suite))
    _write(a.out, run_bench(rows, a.jobs))
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treesearch", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--kind", choices=gen.KINDS, default="random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--weights", choices=gen.WEIGHT_MODELS, default="unit")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--edge", action="store_true", help="emit an edge-weighted tree instead")
    g.add_argument("-o", "--out")
    g.set_defaults(func=cmd_gen)

    def tree_opts(p):
        p.add_argument("tree")
        p.add_argument("--no-normalize", action="store_true")

    s = sub.add_parser("solve", help="compute a strategy and report its cost")
    tree_opts(s)
    s.add_argument("--algo", choices=ALGOS, required=True)
    s.add_argument("--c", type=int)
    s.add_argument("--L", type=int)
    s.add_argument("--eps", help="derive c and L from a target ratio 1+eps")
    s.add_argument("--inner", choices=INNER_SOLVERS, default="centroid")
    s.add_argument("--cap", type=int, help="oracle size cap or DP state cap")
    s.add_argument("--opt", action="store_true", help="also compute OPT with the oracle")
    s.add_argument("--oracle-cap", type=int, default=exact.DEFAULT_CAP)
    s.add_argument("--targets", action="store_true", help="print the per-target cost table")
    s.add_argument("-o", "--out", help="strategy file (qptas only)")
    s.add_argument("--schedule-out", help="schedule file (qptas only)")
    s.add_argument("--report", help="report file (default stdout)")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="execute a strategy file against every target")
    tree_opts(v)
    v.add_argument("strategy")
    v.add_argument("--omega")
    v.add_argument("--c", type=int)
    v.add_argument("--opt", action="store_true")
    v.add_argument("--oracle-cap", type=int, default=exact.DEFAULT_CAP)
    v.add_argument("--targets", action="store_true")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("simulate", help="trace one target")
    tree_opts(m)
    m.add_argument("--target", type=int, required=True)
    m.add_argument("--strategy")
    m.add_argument("--algo", choices=("oracle", "path", "centroid", "sqrt"), default="centroid")
    m.add_argument("--inner", choices=INNER_SOLVERS, default="centroid")
    m.add_argument("--omega")
    m.add_argument("--c", type=int)
    m.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    b.add_argument("suite")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("-o", "--out")
    b.set_defaults(func=cmd_bench)

    ce = sub.add_parser("convert-edge", help="reduce an edge-weighted tree to a node-weighted one")
    ce.add_argument("etree")
    ce.add_argument("-o", "--out")
    ce.set_defaults(func=cmd_convert_edge)

    cc = sub.add_parser("contract-chains", help="contract long degree-2 chains")
    cc.add_argument("tree")
    cc.add_argument("-o", "--out")
    cc.set_defaults(func=cmd_contract_chains)

    el = sub.add_parser("emit-labels", help="print the labels behind the prefix sequences")
    tree_opts(el)
    el.add_argument("--c", type=int, default=2)
    el.add_argument("--L", type=int)
    el.add_argument("--omega", help="use this omega instead of running the sweep")
    el.add_argument("-o", "--out")
    el.set_defaults(func=cmd_emit_labels)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        return a.func(a)
    except GuardRefusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except exact.CapExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except IncompleteAssignment as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TreeError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
