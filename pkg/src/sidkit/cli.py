"""Command-line front end: ``sidkit dist|verify|gen|experiment``.

Exit codes: 0 success, 1 verification disagreement, 2 parse or validation
error, 3 node-count or graph-kind mismatch, 4 oracle size cap exceeded,
5 output cannot be written.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cpdag import SidBounds, sid_cpdag_cpdag, sid_cpdag_dag, sid_dag_cpdag
from .distances import SidReport, Verdict, dne, shd, sid
from .graph import DEFAULT_EXTENSION_CAP, DimensionError, Graph, GraphError, GraphKind, KindError, parse_graph, serialize_graph, _same_p
from .oracle import NumericalError, OracleCapExceeded, count_effect_mismatches, sid_bruteforce
from .simbench import KINDS, REGIMES, GenConfig, random_pair, random_sem, rows_to_csv, run_experiment

SCHEMA_VERSION = 1
METRICS = ("sid", "shd", "sid-sym", "dne")

EXIT_DISAGREE = 1
EXIT_PARSE = 2
EXIT_KIND = 3
EXIT_CAP = 4
EXIT_OUTPUT = 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class OutputError(OSError):
    pass


# ---------------------------------------------------------------------------
# input / output


def load_graph(path: str, kind: str, fmt: str) -> Graph:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(EXIT_PARSE, f"{path}: cannot read: {e.strerror}") from e
    try:
        return parse_graph(text, fmt, kind)
    except GraphError as e:
        raise CliError(EXIT_PARSE, f"{path}: {e}") from e


def write_atomic(path: str, data: str) -> None:
    """Write via a temporary sibling so a failure leaves nothing behind."""
    target = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    except OSError as e:
        raise OutputError(f"{path}: cannot write: {e.strerror}") from e
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(data)
        os.replace(tmp, target)
    except OSError as e:
        Path(tmp).unlink(missing_ok=True)
        raise OutputError(f"{path}: cannot write: {e.strerror}") from e


def write_many(files: dict[str, str]) -> None:
    """All or nothing: earlier files are removed if a later one fails."""
    done = []
    try:
        for path, data in files.items():
            write_atomic(path, data)
            done.append(path)
    except OutputError:
        for path in done:
            Path(path).unlink(missing_ok=True)
        raise


def emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# reports


def _bounds_json(b: SidBounds) -> dict:
    return {
        "lower": b.lower,
        "upper": b.upper,
        "label": b.label,
        "fixed": b.fixed,
        "per_component": [
            {
                "nodes": sorted(c.nodes),
                "min": c.min_sum,
                "max": c.max_sum,
                "extensions": c.extension_count,
                "per_node": c.per_node,
            }
            for c in b.per_component
        ],
    }


def _verdicts_json(r: SidReport) -> list[list[int]]:
    return r.verdicts.tolist()


def _sid_report(g: Graph, h: Graph, cap: int) -> tuple[dict, SidReport | None]:
    """Dispatch on the kinds: a DAG estimate gives a value, a class gives bounds."""
    if g.kind is GraphKind.PDAG:
        raise KindError("true graph must be a DAG or a CPDAG")
    truth_is_class = g.kind is GraphKind.CPDAG
    if h.kind is GraphKind.DAG:
        r = sid_cpdag_dag(g, h) if truth_is_class else sid(g, h)
        body = {"value": r.total}
        if truth_is_class:
            body["excluded_pairs"] = int((r.verdicts == Verdict.EXCLUDED).sum())
        return body, r
    b = sid_cpdag_cpdag(g, h, cap) if truth_is_class else sid_dag_cpdag(g, h, cap)
    return {"bounds": _bounds_json(b), "warnings": list(b.warnings)}, None


def distance_report(metric: str, g: Graph, h: Graph, inputs: list[dict], verdicts: bool, cap: int) -> dict:
    rep: dict = {"metric": metric, "inputs": inputs}
    body: dict
    if metric == "sid":
        body, r = _sid_report(g, h, cap)
        if verdicts and r is not None:
            body["verdicts"] = _verdicts_json(r)
    elif metric == "sid-sym":
        if g.kind is not GraphKind.DAG or h.kind is not GraphKind.DAG:
            raise KindError("the symmetrized SID needs two DAGs")
        v = Fraction(sid(g, h).total + sid(h, g).total, 2)
        body = {"value": float(v), "value_exact": str(v)}
    elif metric == "shd":
        body = {"value": shd(g, h)}
    else:
        body = {"value": dne(g, h)}
    rep.update(body)
    rep.setdefault("warnings", [])
    return rep


def summary_line(rep: dict) -> str:
    if "bounds" in rep:
        b = rep["bounds"]
        s = f"{rep['metric']}: [{b['lower']}, {b['upper']}] ({b['label']})"
    else:
        s = f"{rep['metric']}: {rep.get('value_exact', rep['value'])}"
    if "agree" in rep:
        s += f" (oracle {rep['oracle']}, {'agree' if rep['agree'] else 'DISAGREE'})"
    return s


def render(reports: list[dict], as_json: bool) -> str:
    if as_json:
        return json.dumps({"schema_version": SCHEMA_VERSION, "reports": reports}, indent=2, sort_keys=True) + "\n"
    lines = [summary_line(r) for r in reports]
    for r in reports:
        lines += [f"warning: {w}" for w in r.get("warnings", [])]
        if "verdicts" in r:
            lines += [" ".join(map(str, row)) for row in r["verdicts"]]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def _load_pair(args) -> tuple[Graph, Graph, list[dict]]:
    g = load_graph(args.true_graph, args.true_kind, args.format)
    h = load_graph(args.est_graph, args.est_kind, args.format)
    inputs = [
        {"path": args.true_graph, "kind": g.kind.value, "role": "true"},
        {"path": args.est_graph, "kind": h.kind.value, "role": "estimate"},
    ]
    try:
        _same_p(g, h)
    except DimensionError as e:
        raise CliError(EXIT_KIND, f"{args.true_graph} vs {args.est_graph}: {e}") from e
    return g, h, inputs


def cmd_dist(args) -> int:
    g, h, inputs = _load_pair(args)
    if args.metric != "all":
        metrics = (args.metric,)
    elif g.kind is GraphKind.DAG and h.kind is GraphKind.DAG:
        metrics = METRICS
    else:
        metrics = tuple(m for m in METRICS if m != "sid-sym")
    reports = [distance_report(m, g, h, inputs, args.verdicts, args.cap) for m in metrics]
    emit(render(reports, args.json), args.out)
    return 0


def cmd_verify(args) -> int:
    if args.batch:
        return _verify_batch(args)
    if not (args.true_graph and args.est_graph):
        raise CliError(EXIT_PARSE, "verify needs two graph files unless --batch is given")
    g, h, inputs = _load_pair(args)
    fast = sid(g, h)
    if args.mode == "oracle":
        slow = sid_bruteforce(g, h)
    else:
        sem = random_sem(g, args.seed)
        slow = count_effect_mismatches(sem, g, h, args.tol)
    rep = {
        "metric": "sid",
        "mode": args.mode,
        "inputs": inputs,
        "value": fast.total,
        "oracle": slow,
        "agree": fast.total == slow,
        "warnings": [],
    }
    if args.mode == "gaussian":
        rep["seed"] = args.seed
    if args.verdicts:
        rep["verdicts"] = _verdicts_json(fast)
    emit(render([rep], args.json), args.out)
    return 0 if rep["agree"] else EXIT_DISAGREE


def _verify_batch(args) -> int:
    cfg = GenConfig.for_regime(args.p, args.regime, args.seed, args.p_connect)
    if args.mode == "oracle":
        agree = 0
        for n in range(args.batch):
            g, h = random_pair(cfg, n)
            agree += sid(g, h).total == sid_bruteforce(g, h)
    else:
        rows = run_experiment("sid-vs-effects", cfg, args.batch)
        agree = sum(r.sid == r.effect_mismatches for r in rows)
    frac = agree / args.batch
    rep = {
        "metric": "sid",
        "mode": args.mode,
        "batch": args.batch,
        "p": cfg.p,
        "regime": cfg.regime,
        "seed": cfg.seed,
        "agreeing": agree,
        "fraction": frac,
        "warnings": [],
    }
    if args.json:
        text = render([rep], True)
    else:
        text = f"{args.mode}: {agree}/{args.batch} pairs agree ({frac:.1%})\n"
    emit(text, args.out)
    return 0 if frac >= args.min_agreement else EXIT_DISAGREE


def cmd_gen(args) -> int:
    cfg = GenConfig.for_regime(args.p, args.regime, args.seed, args.p_connect)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"{out}: cannot create directory: {e.strerror}") from e
    files = {}
    for n in range(args.pairs):
        g, h = random_pair(cfg, n)
        files[str(out / f"pair_{n:04d}_true.txt")] = serialize_graph(g, args.format)
        files[str(out / f"pair_{n:04d}_est.txt")] = serialize_graph(h, args.format)
    write_many(files)
    return 0


def _p_list(text: str) -> list[int]:
    try:
        ps = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated node counts, got {text!r}")
    if not ps or min(ps) < 2:
        raise argparse.ArgumentTypeError("node counts must be at least 2")
    return ps


def cmd_experiment(args) -> int:
    if args.kind != "scaling" and len(args.p) != 1:
        raise CliError(EXIT_PARSE, f"{args.kind} takes a single --p value")
    cfg = GenConfig.for_regime(args.p[0], args.regime, args.seed, args.p_connect)
    rows = run_experiment(args.kind, cfg, args.pairs, p_grid=args.p, bounds=args.bounds, repeats=args.repeats)
    emit(rows_to_csv(rows), args.out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _gen_flags(sp: argparse.ArgumentParser, p_type=int, p_default=5) -> None:
    sp.add_argument("--p", type=p_type, default=p_default, help="number of nodes")
    sp.add_argument("--regime", choices=REGIMES, default="sparse")
    sp.add_argument("--p-connect", type=float, default=None, help="edge probability for --regime custom")
    sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    kinds = [k.value for k in GraphKind]
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("adj-matrix", "edge-list"), default="adj-matrix")
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--verdicts", action="store_true", help="include the p x p verdict matrix")
    common.add_argument("--true-kind", choices=kinds, default="dag")
    common.add_argument("--est-kind", choices=kinds, default="dag")
    common.add_argument("--out", help="write to this file instead of standard output")

    ap = argparse.ArgumentParser(prog="sidkit", description="Intervention distances between causal graphs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", parents=[common], help="distance between a true and an estimated graph")
    d.add_argument("true_graph")
    d.add_argument("est_graph")
    d.add_argument("--metric", choices=METRICS + ("all",), default="sid")
    d.add_argument("--cap", type=int, default=DEFAULT_EXTENSION_CAP, help="largest chain component to enumerate")
    d.set_defaults(func=cmd_dist)

    v = sub.add_parser("verify", parents=[common], help="check the fast SID against an oracle")
    v.add_argument("true_graph", nargs="?")
    v.add_argument("est_graph", nargs="?")
    v.add_argument("--mode", choices=("oracle", "gaussian"), default="oracle")
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--batch", type=int, default=0, help="check this many seeded random pairs instead of files")
    v.add_argument("--min-agreement", type=float, default=0.995)
    _gen_flags(v)
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", help="write seeded random DAG pairs")
    _gen_flags(g)
    g.add_argument("--pairs", type=int, default=1)
    g.add_argument("--format", choices=("adj-matrix", "edge-list"), default="adj-matrix")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("experiment", help="run a benchmark and write CSV")
    e.add_argument("kind", choices=KINDS)
    _gen_flags(e, _p_list, [5])
    e.add_argument("--pairs", type=int, default=100)
    e.add_argument("--bounds", action="store_true", help="also score the CPDAG of each estimate")
    e.add_argument("--repeats", type=int, default=5, help="timing repeats per pair (scaling)")
    e.add_argument("--out", help="CSV path; standard output if omitted")
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"sidkit: {e}", file=sys.stderr)
        return e.code
    except (DimensionError, KindError) as e:
        print(f"sidkit: {e}", file=sys.stderr)
        return EXIT_KIND
    except GraphError as e:
        print(f"sidkit: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OracleCapExceeded as e:
        print(f"sidkit: {e}; use a smaller graph or --mode gaussian", file=sys.stderr)
        return EXIT_CAP
    except OutputError as e:
        print(f"sidkit: {e}", file=sys.stderr)
        return EXIT_OUTPUT
    except (ValueError, NumericalError) as e:
        print(f"sidkit: {e}", file=sys.stderr)
        return EXIT_PARSE
