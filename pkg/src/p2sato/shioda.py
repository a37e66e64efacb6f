"""Enumeration and classification of Shioda index tuples.

For odd ``m`` the codimension-``d`` Hodge classes of Jac(y^2 = x^m - 1) are
indexed by strictly increasing 2d-tuples ``b`` of residues in [1, m-1] whose
twisted weights ``sum(<t b_i>_m) / m`` equal ``d`` for every unit ``t``.
Every member has ``sum(b) == d*m`` and ``b_d < m/2 < b_{d+1}``; the
enumerator is built on that split.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Literal

from ._numtheory import require_odd_prime, units

Stage = Literal["sum", "bounds", "all"]
STAGES: tuple[Stage, ...] = ("sum", "bounds", "all")

DEFAULT_PAIR_BUDGET = 10**9


class InfeasibleEnumeration(RuntimeError):
    """The meet-in-the-middle join would exceed the configured budget."""


@dataclass(frozen=True, order=True)
class ShiodaTuple:
    m: int
    entries: tuple[int, ...]

    def __post_init__(self):
        e = tuple(int(b) for b in self.entries)
        object.__setattr__(self, "entries", e)
        if len(e) == 0 or len(e) % 2:
            raise ValueError(f"tuple length must be positive and even, got {len(e)}")
        if any(b < 1 or b > self.m - 1 for b in e):
            raise ValueError(f"entries must lie in [1, {self.m - 1}]: {e}")
        if any(x >= y for x, y in zip(e, e[1:])):
            raise ValueError(f"entries must be strictly increasing: {e}")

    @property
    def d(self) -> int:
        return len(self.entries) // 2

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def twist(self, t: int) -> "ShiodaTuple":
        """Sorted image of the tuple under multiplication by the unit ``t``."""
        if gcd(t, self.m) != 1:
            raise ValueError(f"t={t} is not a unit modulo {self.m}")
        return ShiodaTuple(self.m, tuple(sorted(t * b % self.m for b in self.entries)))

    def is_member(self) -> bool:
        return is_member(self.m, self.entries)


def _check_modulus(m: int, d: int) -> None:
    if m < 3 or m % 2 == 0:
        raise ValueError(f"m must be odd and >= 3, got {m}")
    if not 1 <= d <= (m - 1) // 2:
        raise ValueError(f"d must satisfy 1 <= d <= {(m - 1) // 2}, got {d}")


def tuple_weight(t: int, beta: ShiodaTuple | Iterable[int], m: int | None = None) -> Fraction:
    """Return |t.beta| = sum(<t b_i>_m) / m as an exact rational."""
    if isinstance(beta, ShiodaTuple):
        m = beta.m if m is None else m
        entries = beta.entries
    else:
        entries = tuple(beta)
        if m is None:
            raise ValueError("m is required for a bare entry sequence")
    if gcd(t, m) != 1:
        raise ValueError(f"t={t} is not coprime to m={m}")
    return Fraction(sum(t * b % m for b in entries), m)


def _twisted_weights_ok(m: int, d: int, entries: tuple[int, ...]) -> bool:
    # <(m-t)b> = m - <tb> for b not divisible by m, so t and m-t give the same
    # verdict and half the units suffice.
    target = d * m
    for t in units(m):
        if 2 * t > m:
            break
        if sum(t * b % m for b in entries) != target:
            return False
    return True


def is_member(m: int, entries: Iterable[int]) -> bool:
    """Check all three defining properties for a candidate tuple."""
    e = tuple(entries)
    if not e or len(e) % 2:
        return False
    if any(b < 1 or b >= m for b in e) or any(x >= y for x, y in zip(e, e[1:])):
        return False
    if sum(e) % m:
        return False
    d = len(e) // 2
    if 2 * d > m - 1:
        return False
    return _twisted_weights_ok(m, d, e)


def _subset_sum_counts(values: list[int], size: int) -> dict[int, int]:
    """Number of ``size``-subsets of ``values`` per subset sum."""
    layers: list[dict[int, int]] = [defaultdict(int) for _ in range(size + 1)]
    layers[0][0] = 1
    for v in values:
        for j in range(min(size, len(values)), 0, -1):
            for s, c in list(layers[j - 1].items()):
                layers[j][s + v] += c
    return dict(layers[size])


def candidate_pairs(m: int, d: int, stage: Stage = "all") -> int:
    """Number of (prefix, suffix) pairs the join will produce, computed without enumerating."""
    _check_modulus(m, d)
    half = (m - 1) // 2
    target = d * m
    if stage == "sum":
        total = 0
        for top in range(d, half + 1):
            low = _subset_sum_counts(list(range(1, top)), d - 1)
            high = _subset_sum_counts(list(range(top + 1, m)), d)
            total += sum(c * high.get(target - s - top, 0) for s, c in low.items())
        return total
    low = _subset_sum_counts(list(range(1, half + 1)), d)
    high = _subset_sum_counts(list(range(half + 1, m)), d)
    return sum(c * high.get(target - s, 0) for s, c in low.items())


def _join_block(args) -> list[tuple[int, ...]]:
    m, d, stage, prefixes, buckets = args
    target = d * m
    out = []
    for pre in prefixes:
        for suf in buckets.get(target - sum(pre), ()):
            if suf[0] <= pre[-1]:
                continue
            cand = pre + suf
            if stage == "all" and not _twisted_weights_ok(m, d, cand):
                continue
            out.append(cand)
    return out


def enumerate_tuples(
    m: int,
    d: int,
    stage: Stage = "all",
    *,
    budget: int | None = DEFAULT_PAIR_BUDGET,
    jobs: int = 1,
) -> list[ShiodaTuple]:
    """Enumerate the codimension-``d`` tuple set for modulus ``m``.

    ``stage`` selects how far the filter goes:

    - ``"sum"``: increasing entries, ``sum == d*m`` and ``b_d < m/2``
      (the pre-filter count, 2971 for m=25, d=3);
    - ``"bounds"``: additionally ``b_{d+1} > m/2``;
    - ``"all"``: additionally every twisted weight equals ``d``.

    The sorted tuple is split into its first ``d`` and last ``d`` entries;
    both halves are enumerated independently and joined on the sum.
    Results are returned sorted and do not depend on ``jobs``.
    """
    _check_modulus(m, d)
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}; expected one of {STAGES}")
    if budget is not None:
        pairs = candidate_pairs(m, d, stage)
        if pairs > budget:
            raise InfeasibleEnumeration(
                f"m={m}, d={d}, stage={stage}: {pairs} candidate pairs exceed budget {budget}"
            )
    half = (m - 1) // 2
    prefixes = list(itertools.combinations(range(1, half + 1), d))
    suffix_pool = range(d + 1, m) if stage == "sum" else range(half + 1, m)
    buckets: dict[int, list[tuple[int, ...]]] = defaultdict(list)
    for suf in itertools.combinations(suffix_pool, d):
        buckets[sum(suf)].append(suf)
    buckets = dict(buckets)

    if jobs <= 1 or len(prefixes) < 2 * jobs:
        raw = _join_block((m, d, stage, prefixes, buckets))
    else:
        size = -(-len(prefixes) // (4 * jobs))
        blocks = [prefixes[i : i + size] for i in range(0, len(prefixes), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_join_block, [(m, d, stage, b, buckets) for b in blocks])
            raw = [c for part in parts for c in part]

    result = sorted(ShiodaTuple(m, c) for c in raw)
    for beta in result:
        e = beta.entries
        assert sum(e) == d * m and 2 * e[d - 1] < m, e
        if stage != "sum":
            assert 2 * e[d] > m, e
    return result


def count_tuples(m: int, d: int, stage: Stage = "all", **kw) -> int:
    if stage in ("sum", "bounds"):
        _check_modulus(m, d)
        return candidate_pairs(m, d, stage)
    return len(enumerate_tuples(m, d, stage, **kw))


# -- classification ---------------------------------------------------------

Kind = Literal["paired", "exceptional-decomposable", "indecomposable"]


@dataclass(frozen=True)
class TupleClass:
    """Classification verdict for one member tuple.

    ``kind`` is ``"paired"`` whenever the entries split into pairs summing to
    ``m``; this takes precedence, so divisor classes (d = 1) are reported as
    paired even though a length-2 tuple has no proper even subset.  That
    literal subset criterion is kept in ``no_zero_subset``.
    """

    kind: Kind
    paired: bool
    no_zero_subset: bool
    decomposition: tuple[ShiodaTuple, ...] | None = field(default=None)

    @property
    def exceptional(self) -> bool:
        return not self.paired

    @property
    def indecomposable(self) -> bool:
        return self.kind == "indecomposable"


def is_paired(m: int, entries: Iterable[int]) -> bool:
    s = set(entries)
    return all((m - b) in s for b in s)


def smallest_zero_subset(m: int, entries: tuple[int, ...]) -> tuple[int, ...] | None:
    """Smallest proper even-size subset summing to 0 mod m, or None.

    Dynamic programme over (size, residue) with predecessor links, so the
    cost is polynomial in the tuple length.
    """
    n = len(entries)
    # reach[j][r]: (index of last element, previous residue) on first arrival
    reach: list[dict[int, tuple[int, int]]] = [dict() for _ in range(n + 1)]
    reach[0][0] = (-1, -1)
    for idx, b in enumerate(entries):
        for j in range(idx + 1, 0, -1):
            for r in list(reach[j - 1]):
                r2 = (r + b) % m
                if r2 not in reach[j]:
                    reach[j][r2] = (idx, r)
    for size in range(2, n - 1, 2):
        if 0 in reach[size]:
            subset = []
            j, r = size, 0
            while j > 0:
                idx, prev = reach[j][r]
                subset.append(entries[idx])
                j, r = j - 1, prev
            return tuple(sorted(subset))
    return None


def _decompose(m: int, entries: tuple[int, ...]) -> tuple[tuple[int, ...], ...] | None:
    n = len(entries)
    for size in range(2, n - 1, 2):
        for part in itertools.combinations(entries, size):
            if sum(part) % m or not is_member(m, part):
                continue
            rest = tuple(b for b in entries if b not in part)
            if not is_member(m, rest):
                continue
            rest_parts = _decompose(m, rest) or (rest,)
            return (part,) + rest_parts
    return None


def classify(beta: ShiodaTuple) -> TupleClass:
    """Classify a member tuple as paired, exceptional-decomposable or indecomposable.

    For decomposable tuples one witness decomposition is returned: the
    smallest valid zero-sum sub-tuple is split off first and the remainder
    is decomposed recursively.
    """
    m, e = beta.m, beta.entries
    paired = is_paired(m, e)
    zero = smallest_zero_subset(m, e) if len(e) > 2 else None
    no_zero = zero is None
    if paired:
        kind: Kind = "paired"
    elif no_zero:
        kind = "indecomposable"
    else:
        kind = "exceptional-decomposable"
    decomposition = None
    if not no_zero:
        parts = _decompose(m, e)
        if parts is not None:
            decomposition = tuple(ShiodaTuple(m, p) for p in sorted(parts))
    return TupleClass(kind, paired, no_zero, decomposition)


# -- the m = p^2 family -----------------------------------------------------


def beta_family(p: int, i: int) -> ShiodaTuple:
    """Sorted tuple with entries i, i+p, ..., i+(p-1)p and p(p-i)."""
    require_odd_prime(p)
    if not 1 <= i <= p - 1:
        raise ValueError(f"i must satisfy 1 <= i <= {p - 1}, got {i}")
    values = [i + k * p for k in range(p)] + [p * (p - i)]
    return ShiodaTuple(p * p, tuple(sorted(values)))


@dataclass
class CodimensionResult:
    d: int
    status: Literal["ok", "skipped"]
    candidate_pairs: int
    members: int = 0
    indecomposable: tuple[ShiodaTuple, ...] = ()
    counts: dict[str, int] = field(default_factory=dict)


@dataclass
class ClassificationReport:
    p: int
    d_range: tuple[int, ...]
    per_d: dict[int, CodimensionResult]
    family_matches: bool | None
    others_empty: bool | None
    lower_bound_holds: bool | None
    partition_holds: bool

    @property
    def skipped(self) -> list[int]:
        return [d for d, r in self.per_d.items() if r.status == "skipped"]

    @property
    def passed(self) -> bool:
        checks = [self.family_matches, self.others_empty, self.lower_bound_holds]
        return self.partition_holds and all(c is not False for c in checks)


def partition_check(p: int) -> bool:
    """Every value in [1, p^2-1] lies in exactly one beta_i."""
    seen: list[int] = []
    for i in range(1, p):
        seen.extend(beta_family(p, i).entries)
    return sorted(seen) == list(range(1, p * p))


def verify_indecomposable_classification(
    p: int,
    d_range: Iterable[int] | None = None,
    *,
    budget: int | None = DEFAULT_PAIR_BUDGET,
    jobs: int = 1,
) -> ClassificationReport:
    """Enumerate and classify every requested codimension for m = p^2.

    Codimensions whose join exceeds ``budget`` candidate pairs are reported
    as skipped; the corresponding checks become ``None`` rather than passing.
    """
    require_odd_prime(p)
    m = p * p
    d0 = (p + 1) // 2
    ds = tuple(sorted(set(d_range))) if d_range is not None else tuple(range(1, (m - 1) // 2 + 1))
    per_d: dict[int, CodimensionResult] = {}
    for d in ds:
        pairs = candidate_pairs(m, d, "all")
        if budget is not None and pairs > budget:
            per_d[d] = CodimensionResult(d, "skipped", pairs)
            continue
        members = enumerate_tuples(m, d, "all", budget=None, jobs=jobs)
        counts = {"paired": 0, "exceptional-decomposable": 0, "indecomposable": 0}
        indec = []
        for beta in members:
            c = classify(beta)
            counts[c.kind] += 1
            if c.indecomposable:
                indec.append(beta)
        per_d[d] = CodimensionResult(d, "ok", pairs, len(members), tuple(indec), counts)

    family = {beta_family(p, i) for i in range(1, p)}
    family_matches = lower_bound = None
    if d0 in per_d and per_d[d0].status == "ok":
        found = set(per_d[d0].indecomposable)
        family_matches = found == family
        lower_bound = len(found) >= p - 1
    others = [r for d, r in per_d.items() if d != d0]
    if any(r.status == "skipped" for r in others):
        others_empty = None if all(not r.indecomposable for r in others) else False
    else:
        others_empty = all(not r.indecomposable for r in others)
    return ClassificationReport(
        p, ds, per_d, family_matches, others_empty, lower_bound, partition_check(p)
    )
