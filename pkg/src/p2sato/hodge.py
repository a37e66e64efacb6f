"""Hodge-group relations on the diagonal torus of Jac(y^2 = x^(p^2) - 1).

Each indecomposable class forces one multiplicative relation among the
diagonal entries u_1..u_g.  Solving every relation for its largest index
leaves g' = p(p-1)/2 free angles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._numtheory import require_odd_prime
from .forms import LinearForm
from .shioda import ShiodaTuple, beta_family


@dataclass(frozen=True)
class SignedTuple:
    """Tuple with every entry above m/2 rewritten as ``b - m``.

    A negative entry ``-x`` stands for the conjugate differential of index x.
    """

    m: int
    entries: tuple[int, ...]

    @property
    def raw_form(self) -> LinearForm:
        """Exponent vector of the class: +1 on theta_b for b > 0, -1 on theta_|b| for b < 0."""
        return LinearForm((abs(b), 1 if b > 0 else -1) for b in self.entries)


def normalize_tuple(beta: ShiodaTuple) -> SignedTuple:
    m = beta.m
    return SignedTuple(m, tuple(b - m if 2 * b > m else b for b in beta.entries))


def relation_from_tuple(beta: SignedTuple) -> tuple[int, LinearForm]:
    """Solve the class's invariance constraint for its dependent angle.

    The input must be a normalized beta_i with i <= (p-1)/2; the dependent
    index is i + p(p-1)/2, which appears with coefficient +1.  Returns the
    dependent index and its expression over the remaining angles.
    """
    m = beta.m
    p = round(m**0.5)
    if p * p != m:
        raise ValueError(f"modulus {m} is not a prime square")
    positives = sorted(b for b in beta.entries if b > 0)
    if not positives:
        raise ValueError("tuple has no positive entries")
    i = positives[0]
    dependent = i + p * (p - 1) // 2
    if not 1 <= i <= (p - 1) // 2 or dependent not in positives:
        raise ValueError(f"{beta.entries} is not a normalized beta_i with i <= (p-1)/2")
    raw = beta.raw_form
    if max(raw.support) != dependent:
        raise ValueError(f"dependent index {dependent} is not the largest index of {beta.entries}")
    solved = -(raw - LinearForm.angle(dependent))
    return dependent, solved


def exact_rank(rows: list[list[int]]) -> int:
    mat = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                f = mat[r][col] / mat[rank][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class IdentityComponentModel:
    p: int
    g: int
    g_prime: int
    free_indices: tuple[int, ...]
    relations: tuple[tuple[int, LinearForm], ...]
    raw_constraints: tuple[LinearForm, ...]

    @property
    def dependent_indices(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.relations)

    def relation_for(self, j: int) -> LinearForm | None:
        for dep, form in self.relations:
            if dep == j:
                return form
        return None

    def full_angles(self, free_theta) -> np.ndarray:
        """Expand free angles (shape ``(..., g')``) to all g angles ``(..., g)``."""
        free_theta = np.asarray(free_theta, dtype=float)
        out = np.zeros(free_theta.shape[:-1] + (self.g,))
        for col, j in enumerate(self.free_indices):
            out[..., j - 1] = free_theta[..., col]
        for dep, form in self.relations:
            out[..., dep - 1] = form.evaluate(out)
        return out


def identity_component(p: int) -> IdentityComponentModel:
    """Free/dependent coordinate system of the identity component for m = p^2."""
    require_odd_prime(p)
    g = (p * p - 1) // 2
    g_prime = p * (p - 1) // 2
    relations = []
    raws = []
    for i in range(1, (p - 1) // 2 + 1):
        signed = normalize_tuple(beta_family(p, i))
        relations.append(relation_from_tuple(signed))
        raws.append(signed.raw_form)
    deps = {j for j, _ in relations}
    if len(deps) != len(relations):
        raise AssertionError("dependent indices are not distinct")
    supports = [set(r.support) for r in raws]
    for a in range(len(supports)):
        for b in range(a + 1, len(supports)):
            if supports[a] & supports[b]:
                raise AssertionError("relation supports overlap")
    rows = [[r.coefficient(j) for j in range(1, g + 1)] for r in raws]
    if exact_rank(rows) != len(raws):
        raise AssertionError("relations are not independent")
    free = tuple(j for j in range(1, g + 1) if j not in deps)
    assert len(free) == g_prime
    return IdentityComponentModel(p, g, g_prime, free, tuple(relations), tuple(raws))


def substitute(form: LinearForm, model: IdentityComponentModel) -> LinearForm:
    """Eliminate dependent angles; the result lives on the free indices only."""
    out = LinearForm()
    for j, c in form:
        rel = model.relation_for(j)
        out = out + (rel * c if rel is not None else LinearForm.angle(j, c))
    if any(model.relation_for(j) is not None for j in out.support):
        # relation forms never mention other dependent angles, so one pass suffices
        return substitute(out, model)
    return out


def relation_records(model: IdentityComponentModel) -> list[dict]:
    return [
        {"p": model.p, "dependent_index": dep, "terms": [list(t) for t in form.terms]}
        for dep, form in model.relations
    ]
