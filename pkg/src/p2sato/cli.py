"""Command-line entry point: ``p2sato <subcommand> [options]``."""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from pathlib import Path

from . import io as out_io
from ._numtheory import is_generator, is_prime, smallest_generator
from .hodge import identity_component, relation_records
from .lpoly import A1_CONVENTION, ZERO_TRACE_NOTE, histogram, numerical_moments, sweep
from .moments import DEFAULT_BUDGET, MomentBudgetError, averaged_moments
from .sato_tate import char_poly_symbolic, gamma_matrix
from .shioda import (
    DEFAULT_PAIR_BUDGET,
    STAGES,
    InfeasibleEnumeration,
    classify,
    count_tuples,
    enumerate_tuples,
    verify_indecomposable_classification,
)
from .verify import SUITES, format_ledger, run_suite

CACHE_ENV = "P2SATO_CACHE_DIR"
EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "p2sato"


def _prime(p: int | None) -> int:
    if p is None:
        raise UsageError("--p is required")
    if p < 3 or not is_prime(p):
        raise UsageError(f"--p must be an odd prime, got {p}")
    return p


def _generator(p: int, a: int | None) -> int:
    m = p * p
    if a is None:
        return smallest_generator(m)
    if not is_generator(a, m):
        raise UsageError(f"--generator {a} does not generate (Z/{m}Z)^x")
    return a


def _bound(bound: int | None) -> int:
    if bound is None:
        raise UsageError("--bound is required")
    if bound < 3:
        raise UsageError("--bound must be at least 3")
    return bound


@contextlib.contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        yield fh


def _emit(args, command: str, rows, columns, **params) -> None:
    meta = out_io.metadata(command, **params)
    with _sink(args.out) as stream:
        out_io.write_rows(rows, columns, args.format, meta, stream)


# -- subcommands ------------------------------------------------------------


def cmd_tuples(args) -> int:
    m, d = args.m, args.d
    if m is None or d is None:
        raise UsageError("tuples needs --m and --d")
    if m < 3 or m % 2 == 0:
        raise UsageError("--m must be odd and at least 3")
    if not 1 <= d <= (m - 1) // 2:
        raise UsageError(f"--d must lie in [1, {(m - 1) // 2}]")
    if args.filter != "all" and args.stage != "all":
        raise UsageError("--filter applies only to fully filtered tuples (--stage all)")
    budget = args.budget or DEFAULT_PAIR_BUDGET
    params = dict(m=m, d=d, stage=args.stage, filter=args.filter)
    if args.count_only and args.filter == "all":
        _emit(args, "tuples", [dict(params, count=count_tuples(m, d, args.stage, budget=budget, jobs=args.jobs))],
              ["m", "d", "stage", "filter", "count"], **params)
        return EXIT_OK
    tuples = enumerate_tuples(m, d, args.stage, budget=budget, jobs=args.jobs)
    rows = []
    for beta in tuples:
        kind = classify(beta).kind if args.stage == "all" else "candidate"
        if args.filter == "exceptional" and kind == "paired":
            continue
        if args.filter == "indecomposable" and kind != "indecomposable":
            continue
        rows.append({"m": m, "d": d, "entries": list(beta.entries), "class": kind})
    if args.count_only:
        _emit(args, "tuples", [dict(params, count=len(rows))], ["m", "d", "stage", "filter", "count"], **params)
    else:
        _emit(args, "tuples", rows, ["m", "d", "entries", "class"], **params)
    return EXIT_OK


def _d_values(text: str | None, p: int) -> list[int] | None:
    if text is None:
        return None
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition("-")
        try:
            out.extend(range(int(lo), int(hi or lo) + 1))
        except ValueError:
            raise UsageError(f"bad --d value {text!r}") from None
    g = (p * p - 1) // 2
    if not out or any(not 1 <= d <= g for d in out):
        raise UsageError(f"--d values must lie in [1, {g}]")
    return out


def cmd_classify(args) -> int:
    p = _prime(args.p)
    ds = _d_values(args.d, p)
    rep = verify_indecomposable_classification(p, ds, budget=args.budget or DEFAULT_PAIR_BUDGET, jobs=args.jobs)
    rows = []
    for d, r in rep.per_d.items():
        rows.append(
            {
                "p": p,
                "d": d,
                "status": r.status,
                "candidate_pairs": r.candidate_pairs,
                "members": r.members,
                "paired": r.counts.get("paired"),
                "exceptional_decomposable": r.counts.get("exceptional-decomposable"),
                "indecomposable": len(r.indecomposable) if r.status == "ok" else None,
                "indecomposable_entries": [list(b.entries) for b in r.indecomposable],
            }
        )
    cols = ["p", "d", "status", "candidate_pairs", "members", "paired",
            "exceptional_decomposable", "indecomposable", "indecomposable_entries"]
    _emit(args, "classify", rows, cols, p=p, d=list(rep.d_range), passed=rep.passed, skipped=rep.skipped)
    return EXIT_OK if rep.passed else EXIT_MISMATCH


def cmd_relations(args) -> int:
    p = _prime(args.p)
    model = identity_component(p)
    rows = relation_records(model)
    for r, (_, form) in zip(rows, model.relations):
        r["monomial"] = form.monomial()
    _emit(args, "relations", rows, ["p", "dependent_index", "terms", "monomial"],
          p=p, g=model.g, g_prime=model.g_prime, free_indices=list(model.free_indices))
    return EXIT_OK


def cmd_gamma(args) -> int:
    p = _prime(args.p)
    a = _generator(p, args.generator)
    gamma = gamma_matrix(p, a)
    if args.k is None:
        rows = [{"row": r, "column": c, "tag": t} for r, c, t in gamma.triples()]
        _emit(args, "gamma", rows, ["row", "column", "tag"], p=p, generator=a)
        return EXIT_OK
    if not 0 <= args.k < p * (p - 1):
        raise UsageError(f"--k must lie in [0, {p * (p - 1) - 1}]")
    cp = char_poly_symbolic(identity_component(p), gamma, args.k)
    _emit(args, "gamma", cp.records(), ["k", "cycle_length", "rows", "trace_type", "sign", "monomial"],
          p=p, generator=a, k=args.k, convention="factor T^(2L) - tr(B) T^L + 1 per cycle")
    return EXIT_OK


def cmd_moments(args) -> int:
    p = _prime(args.p)
    a = _generator(p, args.generator)
    n_max = 8 if args.max_n is None else args.max_n
    if n_max < 2:
        raise UsageError("--max-n must be at least 2")
    rep = averaged_moments(p, n_max, a, budget=args.budget or DEFAULT_BUDGET)
    evens = list(range(2, n_max + 1, 2))
    cols = ["source"] + [f"M{n}" for n in evens]
    rows = [{"source": f"k={k}", **{f"M{n}": ms[n] for n in evens}} for k, ms in rep.per_k.items()]
    rows.append({"source": "averaged", **{f"M{n}": rep.averaged[n] for n in evens}})
    _emit(args, "moments", rows, cols, p=p, generator=a, max_n=n_max,
          statistic="g1 = coefficient of T in det(T - U gamma^k)",
          odd_averaged_zero=all(rep.averaged[n] == 0 for n in range(1, n_max + 1, 2)))
    return EXIT_OK


def _run_sweep(args, p: int, a: int):
    bound = _bound(args.bound)
    state = sweep(p, bound, a, directory=cache_dir(), resume=args.resume, jobs=args.jobs)
    return state.restricted(bound)


def cmd_lpoly(args) -> int:
    p = _prime(args.p)
    a = _generator(p, args.generator)
    n_max = 8 if args.max_n is None else args.max_n
    if n_max < 1:
        raise UsageError("--max-n must be at least 1")
    state = _run_sweep(args, p, a)
    nm = numerical_moments(state, n_max)
    exact = averaged_moments(p, n_max, a, budget=args.budget or DEFAULT_BUDGET).averaged
    rows = []
    for n in range(1, n_max + 1):
        theo = exact[n]
        err = abs(nm.overall[n] - theo) / abs(theo) if theo else None
        rows.append({"n": n, "numerical": nm.overall[n], "theoretical": theo, "relative_error": err})
    _emit(args, "lpoly", rows, ["n", "numerical", "theoretical", "relative_error"],
          p=p, generator=a, bound=state.bound, primes=nm.count, convention=A1_CONVENTION,
          zero_traces=ZERO_TRACE_NOTE, records=str(cache_dir()))
    return EXIT_OK


def cmd_histogram(args) -> int:
    p = _prime(args.p)
    a = _generator(p, args.generator)
    if args.bins < 1:
        raise UsageError("--bins must be positive")
    state = _run_sweep(args, p, a)
    hist = histogram(state, args.bins)
    rows = [{"bin_left": lo, "bin_right": hi, "count": c} for lo, hi, c in hist.rows()]
    _emit(args, "histogram", rows, ["bin_left", "bin_right", "count"],
          p=p, generator=a, bound=state.bound, bins=args.bins, convention=A1_CONVENTION,
          zero_count=hist.zero_count, total=hist.total, zero_fraction=hist.zero_fraction,
          note="exact zero traces are excluded from the bins and reported as zero_count")
    return EXIT_OK


def cmd_verify(args) -> int:
    bound = args.bound or 10**6
    checks = run_suite(args.suite, bound=bound, cache_dir=cache_dir(), jobs=args.jobs, budget=args.budget)
    text = format_ledger(checks)
    with _sink(args.out) as stream:
        stream.write(text)
    return EXIT_MISMATCH if any(c.passed is False for c in checks) else EXIT_OK


COMMANDS = {
    "tuples": cmd_tuples,
    "classify": cmd_classify,
    "relations": cmd_relations,
    "gamma": cmd_gamma,
    "moments": cmd_moments,
    "lpoly": cmd_lpoly,
    "histogram": cmd_histogram,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="p2sato", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--format", choices=out_io.FORMATS, default="json-lines")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        sp.add_argument("--budget", type=int, help="override the work budget")
        return sp

    sp = add("tuples", "enumerate Shioda tuples")
    sp.add_argument("--m", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--stage", choices=STAGES, default="all")
    sp.add_argument("--filter", choices=("all", "exceptional", "indecomposable"), default="all")
    sp.add_argument("--count-only", action="store_true")

    sp = add("classify", "classify all tuples of m = p^2 by codimension")
    sp.add_argument("--p", type=int)
    sp.add_argument("--d", help="codimensions, e.g. 3 or 1-12 or 2,4")

    sp = add("relations", "identity-component relations")
    sp.add_argument("--p", type=int)

    sp = add("gamma", "component-group generator, or char-poly factors with --k")
    sp.add_argument("--p", type=int)
    sp.add_argument("--generator", type=int)
    sp.add_argument("--k", type=int)

    sp = add("moments", "exact moments of g1 per component and averaged")
    sp.add_argument("--p", type=int)
    sp.add_argument("--generator", type=int)
    sp.add_argument("--max-n", type=int)

    for name, help_text in (("lpoly", "prime sweep and moment comparison"), ("histogram", "binned a1 values")):
        sp = add(name, help_text)
        sp.add_argument("--p", type=int)
        sp.add_argument("--generator", type=int)
        sp.add_argument("--bound", type=int)
        sp.add_argument("--resume", action="store_true")
        if name == "lpoly":
            sp.add_argument("--max-n", type=int)
        else:
            sp.add_argument("--bins", type=int, default=101)

    sp = add("verify", "reference check suite")
    sp.add_argument("--suite", choices=SUITES, default="all")
    sp.add_argument("--bound", type=int, help="sweep bound for statistical checks (default 10^6)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be positive")
    if args.budget is not None and args.budget < 1:
        parser.error("--budget must be positive")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (InfeasibleEnumeration, MomentBudgetError) as exc:
        print(f"p2sato: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
