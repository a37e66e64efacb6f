"""Numerical a_1 statistics of y^2 = x^m - 1 from point counts over F_q.

The trace of Frobenius is ``t = q + 1 - #C(F_q) = -sum_x chi(x^m - 1)``
with chi the quadratic character.  The map x -> x^m hits each element of
the subgroup H of e-th powers (e = gcd(m, q - 1)) exactly e times, so

    sum_x chi(x^m - 1) = chi(-1) + e * sum_{u in H} chi(u - 1),

and t = 0 whenever e = 1.  Normalized a1 = t / sqrt(q).
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import gcd
from pathlib import Path

import numpy as np
from numba import njit

from . import __version__
from ._numtheory import (
    discrete_log_table,
    is_prime,
    prime_factors,
    primes_up_to,
    require_odd_prime,
    smallest_generator,
)

A1_CONVENTION = "a1 = (q + 1 - #C(F_q)) / sqrt(q)"
ZERO_TRACE_NOTE = "averages include the zero-trace primes"


@njit(cache=True)
def _subgroup_char_sum(q, e, h):
    chi = np.full(q, -1, dtype=np.int8)
    chi[0] = 0
    for x in range(1, (q - 1) // 2 + 1):
        chi[x * x % q] = 1
    n = (q - 1) // e
    s = 0
    u = 1
    for _ in range(n):
        s += chi[u - 1]
        u = u * h % q
    return chi[q - 1] + e * s


def primitive_root(q: int) -> int:
    factors = prime_factors(q - 1)
    for g in range(2, q):
        if all(pow(g, (q - 1) // r, q) != 1 for r in factors):
            return g
    raise ValueError(f"no primitive root modulo {q}")


def curve_trace(q: int, m: int) -> int:
    """Exact trace of Frobenius q + 1 - #C(F_q) for y^2 = x^m - 1, m odd."""
    if q == 2 or m % q == 0 or not is_prime(q):
        raise ValueError(f"q={q} is not a prime of good reduction for m={m}")
    e = gcd(m, q - 1)
    if e == 1:
        return 0
    h = pow(primitive_root(q), e, q)
    return -int(_subgroup_char_sum(q, e, h))


def curve_a1(q: int, m: int) -> float:
    return curve_trace(q, m) / math.sqrt(q)


def brute_force_trace(q: int, m: int) -> int:
    """q + 1 - #C(F_q) by enumerating every (x, y) in F_q^2, plus one point at infinity."""
    squares = [0] * q
    for y in range(q):
        squares[y * y % q] += 1
    affine = sum(squares[(pow(x, m, q) - 1) % q] for x in range(q))
    return q + 1 - (affine + 1)


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class PrimeRecord:
    q: int
    k: int
    trace: int

    @property
    def a1(self) -> float:
        return self.trace / math.sqrt(self.q)

    def line(self) -> str:
        return f"{self.q},{self.k},{self.trace},{self.a1:.12g}\n"


@dataclass
class SweepState:
    p: int
    a: int
    bound: int
    records: list[PrimeRecord] = field(default_factory=list)
    last_q: int = 0

    @property
    def m(self) -> int:
        return self.p * self.p

    def restricted(self, bound: int) -> "SweepState":
        """The records with q <= bound, e.g. from a cached sweep that went further."""
        records = [r for r in self.records if r.q <= bound]
        return SweepState(self.p, self.a, bound, records, records[-1].q if records else 0)

    def a1_array(self) -> np.ndarray:
        return np.array([r.a1 for r in self.records], dtype=float)

    def class_array(self) -> np.ndarray:
        return np.array([r.k for r in self.records], dtype=np.int64)


class SweepPersistenceError(RuntimeError):
    pass


def _records_for(args) -> list[tuple[int, int, int]]:
    primes, m, dlog = args
    out = []
    for q in primes:
        q = int(q)
        t = curve_trace(q, m)
        # Weil bound |t| <= 2g sqrt(q), 2g = m - 1
        if t * t > (m - 1) ** 2 * q:
            raise AssertionError(f"Weil bound violated at q={q}: trace {t}")
        out.append((q, dlog[q % m], t))
    return out


def _paths(directory: Path, p: int, a: int) -> tuple[Path, Path]:
    stem = f"sweep-p{p}-a{a}"
    return directory / f"{stem}.records.csv", directory / f"{stem}.checkpoint.json"


def _header(p: int, a: int) -> str:
    meta = {
        "tool": "p2sato",
        "version": __version__,
        "p": p,
        "m": p * p,
        "generator": a,
        "convention": A1_CONVENTION,
    }
    return f"# {json.dumps(meta, sort_keys=True)}\nq,k,trace,a1\n"


def read_records(path: Path) -> list[PrimeRecord]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("q,"):
                continue
            q, k, t, _ = line.strip().split(",")
            out.append(PrimeRecord(int(q), int(k), int(t)))
    return out


def _load(directory: Path, p: int, a: int) -> tuple[SweepState | None, int]:
    rec_path, ck_path = _paths(directory, p, a)
    if not ck_path.exists() or not rec_path.exists():
        return None, 0
    ck = json.loads(ck_path.read_text())
    if ck["p"] != p or ck["a"] != a:
        raise SweepPersistenceError(f"checkpoint {ck_path} belongs to another sweep")
    with open(rec_path, "r+b") as fh:
        fh.truncate(ck["bytes"])
    records = read_records(rec_path)
    if len(records) != ck["records"]:
        raise SweepPersistenceError(
            f"{rec_path}: {len(records)} records on disk, checkpoint says {ck['records']}"
        )
    state = SweepState(p, a, ck["bound"], records, ck["last_q"])
    return state, ck["bytes"]


def _write_checkpoint(ck_path: Path, state: SweepState, nbytes: int) -> None:
    tmp = ck_path.with_suffix(".tmp")
    payload = {
        "p": state.p,
        "a": state.a,
        "bound": state.bound,
        "last_q": state.last_q,
        "records": len(state.records),
        "bytes": nbytes,
    }
    tmp.write_text(json.dumps(payload, sort_keys=True))
    os.replace(tmp, ck_path)


def sweep(
    p: int,
    bound: int,
    a: int | None = None,
    *,
    directory: str | os.PathLike | None = None,
    resume: bool = False,
    jobs: int = 1,
    chunk_size: int = 4096,
    max_chunks: int | None = None,
) -> SweepState:
    """Traces of Frobenius for every good prime q <= bound.

    ``k`` in each record is the discrete log of q mod p^2 to base ``a``.
    With ``directory`` set, records are appended to a CSV file chunk by
    chunk and a checkpoint is replaced atomically after each durable
    chunk; ``resume=True`` continues from it (extending to a larger
    ``bound`` is allowed).  ``max_chunks`` stops early, as an interruption
    would.  Output is independent of ``jobs``.
    """
    require_odd_prime(p)
    if bound < 3:
        raise ValueError("bound must be at least 3")
    m = p * p
    a = smallest_generator(m) if a is None else a
    dlog = discrete_log_table(a, m)
    if len(dlog) != m - m // p:
        raise ValueError(f"a={a} does not generate (Z/{m}Z)^x")

    state = None
    nbytes = 0
    rec_path = ck_path = None
    if directory is not None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        rec_path, ck_path = _paths(directory, p, a)
        if resume:
            state, nbytes = _load(directory, p, a)
        if state is None:
            rec_path.write_text(_header(p, a))
            nbytes = rec_path.stat().st_size
    if state is None:
        state = SweepState(p, a, bound)
    state.bound = max(state.bound, bound)

    primes = primes_up_to(bound)
    primes = primes[(primes > state.last_q) & (primes != 2) & (primes != p)]
    chunks = [primes[i : i + chunk_size] for i in range(0, len(primes), chunk_size)]
    if max_chunks is not None:
        chunks = chunks[:max_chunks]

    def consume(rows):
        nonlocal nbytes
        new = [PrimeRecord(q, k, t) for q, k, t in rows]
        if rec_path is not None:
            try:
                with open(rec_path, "a") as fh:
                    fh.write("".join(r.line() for r in new))
                    fh.flush()
                    os.fsync(fh.fileno())
                    nbytes = fh.tell()
            except OSError as exc:
                raise SweepPersistenceError(
                    f"failed writing {rec_path}; last durable q={state.last_q}"
                ) from exc
        state.records.extend(new)
        if new:
            state.last_q = new[-1].q
        if ck_path is not None:
            _write_checkpoint(ck_path, state, nbytes)

    tasks = [(c, m, dlog) for c in chunks]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for rows in pool.map(_records_for, tasks):
                consume(rows)
    else:
        for task in tasks:
            consume(_records_for(task))
    if not chunks and ck_path is not None:
        # bound may have been extended with no new primes
        state.last_q = max(state.last_q, int(primes[-1]) if len(primes) else state.last_q)
        _write_checkpoint(ck_path, state, nbytes)
    return state


# -- statistics -------------------------------------------------------------


@dataclass
class NumericalMoments:
    n_max: int
    count: int
    overall: list[float]
    per_class: dict[int, list[float]]
    class_counts: dict[int, int]


def numerical_moments(state: SweepState, n_max: int) -> NumericalMoments:
    """Sample moments of a1 over all good primes, and restricted to each residue class."""
    if not state.records:
        raise ValueError("sweep state has no records")
    a1 = state.a1_array()
    ks = state.class_array()
    overall = [float(np.mean(a1**n)) for n in range(n_max + 1)]
    per_class = {}
    counts = {}
    for k in np.unique(ks):
        sel = a1[ks == k]
        per_class[int(k)] = [float(np.mean(sel**n)) for n in range(n_max + 1)]
        counts[int(k)] = int(sel.size)
    return NumericalMoments(n_max, int(a1.size), overall, per_class, counts)


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    zero_count: int
    total: int

    @property
    def zero_fraction(self) -> float:
        return self.zero_count / self.total if self.total else 0.0

    def rows(self) -> list[tuple[float, float, int]]:
        return [
            (float(lo), float(hi), int(c))
            for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts)
        ]


def histogram(state: SweepState, bins: int = 101) -> Histogram:
    """Bin the nonzero a1 values over [-2g, 2g]; exact zeros are counted separately."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    g = (state.m - 1) // 2
    edges = np.linspace(-2 * g, 2 * g, bins + 1)
    traces = np.array([r.trace for r in state.records], dtype=np.int64)
    if traces.size == 0:
        return Histogram(edges, np.zeros(bins, dtype=np.int64), 0, 0)
    a1 = state.a1_array()
    nonzero = a1[traces != 0]
    counts, _ = np.histogram(nonzero, bins=edges)
    return Histogram(edges, counts.astype(np.int64), int(np.sum(traces == 0)), int(traces.size))


def symmetry_statistic(hist: Histogram) -> tuple[float, int]:
    """Chi-square statistic and degrees of freedom for counts[b] == counts[-b]."""
    c = hist.counts
    stat = 0.0
    dof = 0
    for b in range(len(c) // 2):
        x, y = int(c[b]), int(c[len(c) - 1 - b])
        if x + y:
            stat += (x - y) ** 2 / (x + y)
            dof += 1
    return stat, dof
