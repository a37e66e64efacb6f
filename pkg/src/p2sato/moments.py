"""Exact Haar moments of g_1 on the components U gamma^k.

On component k, ``g_1 = sum_j s_j * 2cos(L_j)`` with ``L_j`` integer
forms in the free angles.  Writing each cosine as two exponentials, the
n-th moment is the signed number of length-n step sequences whose
exponent vectors cancel, since the torus integral of e^{i<v, theta>} is
1 for v = 0 and 0 otherwise.  The count is done meet-in-the-middle: the
distributions of ``n // 2`` and ``n - n // 2`` steps are joined on
opposite vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._numtheory import require_odd_prime, smallest_generator, totient
from .forms import LinearForm
from .hodge import identity_component
from .sato_tate import char_poly_symbolic, gamma_matrix

DEFAULT_BUDGET = 10**8


class MomentBudgetError(RuntimeError):
    def __init__(self, n: int, size: int, budget: int, k: int | None = None):
        where = f"k={k}, n={n}" if k is not None else f"n={n}"
        super().__init__(f"{where}: half-walk distribution reached {size} entries (budget {budget})")
        self.k, self.n, self.size, self.budget = k, n, size, budget


@dataclass(frozen=True)
class TraceExpression:
    """sum(sign * 2cos(form)) over ``terms``."""

    terms: tuple[tuple[int, LinearForm], ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((int(s), f) for s, f in self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    def negated_forms(self) -> "TraceExpression":
        return TraceExpression(tuple((s, -f) for s, f in self.terms))

    def key(self) -> tuple:
        return tuple(sorted((s, f.terms) for s, f in self.terms))

    def evaluate(self, theta):
        """Numeric value; ``theta[..., j - 1]`` is theta_j."""
        import numpy as np

        total = 0.0
        for s, f in self.terms:
            total = total + 2 * s * np.cos(f.evaluate(theta))
        return total


ExponentDistribution = dict  # encoded exponent vector -> signed count


class _Encoder:
    """Packs integer vectors into Python ints using balanced base-B digits."""

    def __init__(self, indices: Sequence[int], bound: int):
        self.base = 2 * bound + 1
        self.position = {j: i for i, j in enumerate(sorted(indices))}

    def encode(self, form: LinearForm) -> int:
        return sum(c * self.base ** self.position[j] for j, c in form)


def _steps(expr: TraceExpression, enc: _Encoder) -> list[tuple[int, int]]:
    steps = []
    for s, f in expr.terms:
        v = enc.encode(f)
        steps.append((v, s))
        steps.append((-v, s))
    return steps


def walk_distribution(
    steps: list[tuple[int, int]], length: int, budget: int | None = DEFAULT_BUDGET, n: int = 0
) -> ExponentDistribution:
    dist: ExponentDistribution = {0: 1}
    for _ in range(length):
        new: ExponentDistribution = {}
        get = new.get
        for v, c in dist.items():
            for w, s in steps:
                key = v + w
                new[key] = get(key, 0) + c * s
        dist = {v: c for v, c in new.items() if c}
        if budget is not None and len(dist) > budget:
            raise MomentBudgetError(n, len(dist), budget)
    return dist


def exact_moment(expr: TraceExpression, n: int, budget: int | None = DEFAULT_BUDGET) -> int:
    """E[(sum s_j 2cos L_j)^n] over the uniform torus, as an exact integer."""
    if n < 0:
        raise ValueError("moment order must be non-negative")
    if n == 0:
        return 1
    if expr.is_zero():
        return 0
    if n % 2 and all(f.coefficient_sum() % 2 for _, f in expr.terms):
        # shifting every angle by pi negates every cosine
        return 0
    indices = sorted({j for _, f in expr.terms for j in f.support})
    bound = n * max((abs(c) for _, f in expr.terms for _, c in f), default=1)
    enc = _Encoder(indices, bound)
    steps = _steps(expr, enc)
    h = n // 2
    left = walk_distribution(steps, h, budget, n)
    right = left if n - h == h else walk_distribution(steps, n - h, budget, n)
    return sum(c * right.get(-v, 0) for v, c in left.items())


def trace_expression(p: int, k: int, a: int | None = None, model=None, gamma=None) -> TraceExpression:
    model = model or identity_component(p)
    gamma = gamma or gamma_matrix(p, a)
    cp = char_poly_symbolic(model, gamma, k)
    return TraceExpression(tuple(cp.g1_terms()))


def component_moments(
    p: int, k: int, n_max: int, a: int | None = None, budget: int | None = DEFAULT_BUDGET
) -> list[int]:
    """[M_0, ..., M_{n_max}] of g_1 on the component U gamma^k."""
    expr = trace_expression(p, k, a)
    return _moments_of(expr, n_max, budget, k)


def _moments_of(expr: TraceExpression, n_max: int, budget, k) -> list[int]:
    if expr.is_zero():
        return [1] + [0] * n_max
    out = []
    for n in range(n_max + 1):
        try:
            out.append(exact_moment(expr, n, budget))
        except MomentBudgetError as exc:
            raise MomentBudgetError(n, exc.size, exc.budget, k) from None
    return out


@dataclass
class MomentReport:
    p: int
    a: int
    n_max: int
    per_k: dict[int, list[int]]
    averaged: list[Fraction] = field(default_factory=list)

    @property
    def nonvanishing(self) -> list[int]:
        return [k for k, ms in self.per_k.items() if any(ms[1:])]


def averaged_moments(
    p: int, n_max: int, a: int | None = None, budget: int | None = DEFAULT_BUDGET
) -> MomentReport:
    """Average the component moments over all phi(p^2) components."""
    require_odd_prime(p)
    a = smallest_generator(p * p) if a is None else a
    model = identity_component(p)
    gamma = gamma_matrix(p, a)
    phi = totient(p * p)
    per_k: dict[int, list[int]] = {}
    cache: dict[tuple, list[int]] = {}
    for k in range(phi):
        expr = trace_expression(p, k, model=model, gamma=gamma)
        key = expr.key()
        if key not in cache:
            cache[key] = _moments_of(expr, n_max, budget, k)
        per_k[k] = cache[key]
    averaged = [Fraction(sum(per_k[k][n] for k in per_k), phi) for n in range(n_max + 1)]
    return MomentReport(p, a, n_max, per_k, averaged)
