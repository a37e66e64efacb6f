"""Sparse integer linear forms in the eigenangles theta_1..theta_g."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np


class LinearForm:
    """Immutable sparse map ``index -> nonzero integer coefficient``.

    Stands for the angle ``sum(c_j * theta_j)``; equivalently the monomial
    ``prod(u_j ** c_j)`` on the torus.  Iteration is in ascending index order.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, coefficients: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
        acc: dict[int, int] = {}
        for j, c in items:
            if j < 1:
                raise ValueError(f"angle indices start at 1, got {j}")
            acc[j] = acc.get(j, 0) + int(c)
        self._terms = tuple(sorted((j, c) for j, c in acc.items() if c))
        self._hash = hash(self._terms)

    @classmethod
    def angle(cls, j: int, c: int = 1) -> "LinearForm":
        return cls({j: c})

    @property
    def terms(self) -> tuple[tuple[int, int], ...]:
        return self._terms

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self._terms)

    def coefficient(self, j: int) -> int:
        for i, c in self._terms:
            if i == j:
                return c
        return 0

    def coefficient_sum(self) -> int:
        return sum(c for _, c in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def as_dict(self) -> dict[int, int]:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, LinearForm):
            return NotImplemented
        return self._terms == other._terms

    def __lt__(self, other: "LinearForm"):
        return self._terms < other._terms

    def __hash__(self):
        return self._hash

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(self._terms + other._terms)

    def __neg__(self) -> "LinearForm":
        return LinearForm((j, -c) for j, c in self._terms)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def __mul__(self, k: int) -> "LinearForm":
        return LinearForm((j, k * c) for j, c in self._terms)

    __rmul__ = __mul__

    def evaluate(self, theta) -> np.ndarray:
        """Angle value; ``theta`` is indexed so that ``theta[..., j - 1]`` is theta_j."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape[:-1])
        for j, c in self._terms:
            out = out + c * theta[..., j - 1]
        return out

    def __repr__(self):
        if not self._terms:
            return "LinearForm(0)"
        return f"LinearForm({self.pretty()})"

    def pretty(self, symbol: str = "θ") -> str:
        parts = []
        for j, c in self._terms:
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else str(abs(c))
            parts.append(f"{sign}{mag}{symbol}{j}")
        s = "".join(parts) or "0"
        return s[1:] if s.startswith("+") else s

    def monomial(self, symbol: str = "u") -> str:
        """Render as a product of u_j and conj(u_j) powers, e.g. ``ū1·u4``."""
        parts = []
        for j, c in self._terms:
            base = f"{symbol}{j}" if c > 0 else f"ū{j}" if symbol == "u" else f"conj({symbol}{j})"
            parts.append(base if abs(c) == 1 else f"{base}^{abs(c)}")
        return "·".join(parts) or "1"
