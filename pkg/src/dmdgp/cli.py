"""Command-line front end: generate, convert, solve, verify and bench.

Exit codes: 0 success, 1 solver failure or timeout, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Optional

from .bp import bp_solve
from .errors import (
    ArgumentError,
    DegeneracyError,
    InfeasibleError,
    InstanceError,
    ParseError,
    SolverFailure,
    SolverTimeout,
)
from .genio import (
    build_instance,
    edge_residuals,
    generate_synthetic,
    mde,
    parse_pdb,
    read_instance,
    read_realization,
    write_instance,
    write_realization,
)
from .sbbu import sbbu_solve

__all__ = ["BenchRow", "bench_instance", "main", "mde"]

log = logging.getLogger("dmdgp")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
SOLVER_ERRORS = (SolverFailure, InfeasibleError, DegeneracyError)
INPUT_ERRORS = (ParseError, InstanceError, ArgumentError, OSError)


@dataclass
class BenchRow:
    id: str
    V: int
    E: int
    bp_time: Optional[float]
    bp_mde: Optional[float]
    sbbu_time: Optional[float]
    sbbu_mde: Optional[float]
    W_bar: Optional[int]
    W: Optional[int]
    speedup: Optional[float]

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def cells(self) -> list[str]:
        return ["" if v is None else (repr(v) if isinstance(v, float) else str(v)) for v in astuple(self)]


def default_seed() -> int:
    raw = os.environ.get("DMDGP_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ArgumentError(f"DMDGP_SEED must be an integer, got {raw!r}") from None


def _timed(fn, repeats: int):
    """Run ``fn`` ``repeats`` times; return (last result, median wall time)."""
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return result, statistics.median(times)


def bench_instance(
    name: str, instance, tolerance: float = 1e-4, repeats: int = 3, time_limit: Optional[float] = None
) -> BenchRow:
    """Time both solvers on one instance (solve call only, median of ``repeats``)."""
    # Derived edge tables are built once here so neither solver is charged for them.
    instance.pruning_by_vertex
    row = BenchRow(name, instance.n, instance.num_edges, None, None, None, None, None, None, None)
    try:
        res, row.bp_time = _timed(lambda: bp_solve(instance, tolerance, time_limit=time_limit), repeats)
        row.bp_mde = mde(res.x, instance)
    except SOLVER_ERRORS as exc:
        log.warning("%s: bp failed: %s", name, exc)
        row.bp_time = None
    try:
        res, row.sbbu_time = _timed(lambda: sbbu_solve(instance, tolerance), repeats)
        row.sbbu_mde = mde(res.x, instance)
        row.W, row.W_bar = res.stats.W, res.stats.W_bar
    except SOLVER_ERRORS as exc:
        log.warning("%s: sbbu failed: %s", name, exc)
        row.sbbu_time = None
    if row.bp_time is not None and row.sbbu_time:
        row.speedup = row.bp_time / row.sbbu_time
    return row


def _bench_file(args) -> BenchRow:
    path, tolerance, repeats, time_limit = args
    instance = read_instance(Path(path).read_text())
    return bench_instance(Path(path).stem, instance, tolerance, repeats, time_limit)


# ---------------------------------------------------------------- subcommands


def cmd_generate(ns) -> int:
    seed = default_seed() if ns.seed is None else ns.seed
    instance, truth = generate_synthetic(ns.n, ns.k, ns.cutoff, seed=seed)
    Path(ns.output).write_text(write_instance(instance))
    if ns.truth:
        Path(ns.truth).write_text(write_realization(truth))
    print(f"wrote {ns.output}: |V|={instance.n} |E|={instance.num_edges} |E_P|={len(instance.partition.pruning)}")
    return EXIT_OK


def cmd_convert(ns) -> int:
    instance = build_instance(parse_pdb(Path(ns.pdb).read_text()), ns.cutoff)
    Path(ns.output).write_text(write_instance(instance))
    print(f"wrote {ns.output}: |V|={instance.n} |E|={instance.num_edges}")
    return EXIT_OK


def cmd_solve(ns) -> int:
    instance = read_instance(Path(ns.instance).read_text())
    try:
        t0 = time.perf_counter()
        if ns.algo == "bp":
            res = bp_solve(instance, ns.tol, max_nodes=ns.max_nodes, time_limit=ns.time_limit)
        else:
            res = sbbu_solve(instance, ns.tol, trace=ns.trace)
        elapsed = time.perf_counter() - t0
    except SolverTimeout as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"time {elapsed:.6g}")
    print(f"mde {mde(res.x, instance):.6e}")
    if ns.algo == "sbbu":
        st = res.stats
        print(f"W {st.W}")
        print(f"W_bar {st.W_bar}")
        print(f"explicit {st.explicit} skipped {st.skipped}")
        if ns.trace:
            print("# i j skipped |S| candidates residual")
            for tr in st.trace:
                print(f"{tr.edge[0]} {tr.edge[1]} {int(tr.skipped)} {tr.s_size} {tr.candidates} {tr.residual:.3e}")
    else:
        st = res.stats
        print(f"nodes {st.nodes_expanded} prunes {st.prunes}")
    if ns.output:
        Path(ns.output).write_text(write_realization(res.x))
    return EXIT_OK


def cmd_verify(ns) -> int:
    instance = read_instance(Path(ns.instance).read_text())
    x = read_realization(Path(ns.realization).read_text(), K=instance.K)
    value = mde(x, instance)
    print(f"mde {value:.6e}")
    worst = max(edge_residuals(x, instance).items(), key=lambda kv: kv[1])
    print(f"worst edge {worst[0][0]} {worst[0][1]} relative residual {worst[1]:.3e}")
    return EXIT_OK


def cmd_bench(ns) -> int:
    paths = sorted(Path(ns.dir).glob(ns.pattern))
    if not paths:
        raise ArgumentError(f"no files matching {ns.pattern!r} in {ns.dir}")
    jobs = [(str(p), ns.tol, ns.repeats, ns.time_limit) for p in paths]
    if ns.workers > 1:
        with ProcessPoolExecutor(max_workers=ns.workers) as pool:
            rows = list(pool.map(_bench_file, jobs))
    else:
        rows = [_bench_file(job) for job in jobs]
    out = open(ns.output, "w", newline="") if ns.output else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(BenchRow.header())
        for row in rows:
            writer.writerow(row.cells())
    finally:
        if out is not sys.stdout:
            out.close()
    if ns.hist:
        with open(ns.hist, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "gap", "d"])
            for p in paths:
                instance = read_instance(p.read_text())
                for (i, j), d in sorted(instance.edges.items()):
                    writer.writerow([p.stem, j - i, repr(d)])
    failed = [r.id for r in rows if r.bp_time is None or r.sbbu_time is None]
    if failed:
        print(f"solver failures on: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmdgp", description="DMDGP solvers: branch-and-prune and SBBU.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random synthetic instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--cutoff", type=float, required=True, help="pruning pairs closer than this are kept")
    p.add_argument("--seed", type=int, default=None, help="default: $DMDGP_SEED or 0")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--truth", help="also write the ground-truth realization here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("convert", help="build a K=3 instance from PDB backbone atoms")
    p.add_argument("--pdb", required=True)
    p.add_argument("--cutoff", type=float, default=6.0, help="distance cutoff in angstrom")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--algo", choices=("bp", "sbbu"), default="sbbu")
    p.add_argument("--tol", type=_positive(float), default=1e-4)
    p.add_argument("--time-limit", type=_positive(float), default=None, help="seconds (bp only)")
    p.add_argument("--max-nodes", type=_positive(int), default=None, help="node budget (bp only)")
    p.add_argument("--trace", action="store_true", help="print the per-edge trace (sbbu only)")
    p.add_argument("-o", "--output", help="write the realization here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="MDE of a realization file against an instance")
    p.add_argument("instance")
    p.add_argument("realization")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time bp and sbbu on every instance in a directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--pattern", default="*.dmdgp")
    p.add_argument("--tol", type=_positive(float), default=1e-4)
    p.add_argument("--repeats", type=_positive(int), default=3)
    p.add_argument("--time-limit", type=_positive(float), default=None, help="bp time limit per run")
    p.add_argument("--workers", type=_positive(int), default=1)
    p.add_argument("-o", "--output", help="CSV report (default stdout)")
    p.add_argument("--hist", help="also dump |i-j| vs d for every edge as CSV")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return ns.func(ns)
    except SOLVER_ERRORS as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
