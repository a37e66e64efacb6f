"""Symbolic model of the Sato-Tate group <U(1)^{g'}, gamma> for m = p^2.

Matrices of interest are 2g x 2g with at most one nonzero 2x2 block per
block row, each of the form ``s * D(phi) * X`` with ``s = +-1``,
``D(phi) = diag(e^{i phi}, e^{-i phi})`` and ``X`` in {I, J}.  They are
stored as a target column per row plus that block, and multiplied with
the composition table

    J * J = -I,    J * D(phi) = D(-phi) * J.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Literal, Sequence

import numpy as np

from ._numtheory import is_generator, require_odd_prime, smallest_generator, totient
from .forms import LinearForm
from .hodge import IdentityComponentModel, substitute

Tag = Literal["I", "J"]
_ZERO = LinearForm()

_I2 = np.eye(2)
_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


# -- the automorphism (x, y) -> (zeta x, -y) --------------------------------


@dataclass(frozen=True)
class CyclotomicEndomorphism:
    """Block-diagonal endomorphism with block j = diag(w^e_j, w^-e_j), w = exp(2 pi i / 2p^2)."""

    p: int
    exponents: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return 2 * self.p * self.p

    @property
    def g(self) -> int:
        return len(self.exponents)

    def power(self, k: int) -> "CyclotomicEndomorphism":
        n = self.modulus
        return CyclotomicEndomorphism(self.p, tuple(k * e % n for e in self.exponents))

    def is_scalar(self, value: int) -> bool:
        """True when every block equals ``value * I`` for value in {+1, -1}."""
        half = self.p * self.p
        target = 0 if value == 1 else half
        return all(e % self.modulus == target for e in self.exponents) and value in (1, -1)

    def order(self) -> int:
        n = self.modulus
        k = 1
        while not self.power(k).is_scalar(1):
            k += 1
            if k > n:
                raise AssertionError("order exceeds 2p^2")
        return k

    def pullback_scalar(self, j: int) -> tuple[int, int]:
        """(sign, exponent of zeta_{p^2}) with omega_j pulled back to sign * zeta^exp * omega_j."""
        e = self.exponents[j - 1] % self.modulus
        pp = self.p * self.p
        return (-1, (e - pp) // 2 % pp) if e % 2 else (1, e // 2 % pp)

    def dense(self) -> np.ndarray:
        w = np.exp(2j * np.pi / self.modulus)
        diag = []
        for e in self.exponents:
            diag += [w**e, w ** (-e)]
        return np.diag(diag)


def alpha_endomorphism(p: int) -> CyclotomicEndomorphism:
    """Endomorphism induced by (x, y) -> (zeta_{p^2} x, -y) on the regular differentials.

    omega_j = x^{j-1} dx / y pulls back to -zeta^j omega_j, so block j has
    exponent p^2 + 2j in terms of a primitive 2p^2-th root of unity.
    """
    require_odd_prime(p)
    g = (p * p - 1) // 2
    n = 2 * p * p
    return CyclotomicEndomorphism(p, tuple((p * p + 2 * j) % n for j in range(1, g + 1)))


# -- signed block permutations ----------------------------------------------


@dataclass(frozen=True)
class Block:
    sign: int
    tag: Tag
    phase: LinearForm = _ZERO

    def __matmul__(self, other: "Block") -> "Block":
        if self.tag == "I":
            phase = self.phase + other.phase
            tag, sign = other.tag, self.sign * other.sign
        else:
            phase = self.phase - other.phase
            if other.tag == "J":
                tag, sign = "I", -self.sign * other.sign
            else:
                tag, sign = "J", self.sign * other.sign
        return Block(sign, tag, phase)

    def transpose(self) -> "Block":
        if self.tag == "I":
            return self
        return Block(-self.sign, "J", -self.phase)

    @property
    def label(self) -> str:
        return ("-" if self.sign < 0 else "") + self.tag

    def dense(self, theta=None) -> np.ndarray:
        phi = 0.0 if theta is None or self.phase.is_zero() else float(self.phase.evaluate(theta))
        d = np.diag([np.exp(1j * phi), np.exp(-1j * phi)])
        return self.sign * d @ (_I2 if self.tag == "I" else _J2)


@dataclass(frozen=True)
class BlockMonomialMatrix:
    """Row i (1-based) holds ``blocks[i-1]`` at block column ``targets[i-1]``."""

    targets: tuple[int, ...]
    blocks: tuple[Block, ...]

    @property
    def g(self) -> int:
        return len(self.targets)

    @classmethod
    def identity(cls, g: int) -> "BlockMonomialMatrix":
        return cls(tuple(range(1, g + 1)), (Block(1, "I"),) * g)

    @classmethod
    def standard_form(cls, g: int) -> "BlockMonomialMatrix":
        """The skew form diag(J, ..., J)."""
        return cls(tuple(range(1, g + 1)), (Block(1, "J"),) * g)

    def is_permutation(self) -> bool:
        return sorted(self.targets) == list(range(1, self.g + 1))

    def __matmul__(self, other: "BlockMonomialMatrix") -> "BlockMonomialMatrix":
        targets = []
        blocks = []
        for i in range(self.g):
            mid = self.targets[i]
            targets.append(other.targets[mid - 1])
            blocks.append(self.blocks[i] @ other.blocks[mid - 1])
        return BlockMonomialMatrix(tuple(targets), tuple(blocks))

    def transpose(self) -> "BlockMonomialMatrix":
        if not self.is_permutation():
            raise ValueError("transpose of a non-permutation block pattern is not block-monomial")
        targets = [0] * self.g
        blocks: list[Block] = [Block(1, "I")] * self.g
        for i, (j, b) in enumerate(zip(self.targets, self.blocks), start=1):
            targets[j - 1] = i
            blocks[j - 1] = b.transpose()
        return BlockMonomialMatrix(tuple(targets), tuple(blocks))

    def power(self, k: int) -> "BlockMonomialMatrix":
        result = BlockMonomialMatrix.identity(self.g)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def with_torus(self) -> "BlockMonomialMatrix":
        """Left-multiply by U = diag(D(theta_1), ..., D(theta_g))."""
        blocks = tuple(
            Block(1, "I", LinearForm.angle(i)) @ b for i, b in enumerate(self.blocks, start=1)
        )
        return BlockMonomialMatrix(self.targets, blocks)

    def triples(self) -> list[tuple[int, int, str]]:
        return [(i, j, b.label) for i, (j, b) in enumerate(zip(self.targets, self.blocks), start=1)]

    def dense(self, theta=None) -> np.ndarray:
        g = self.g
        out = np.zeros((2 * g, 2 * g), dtype=complex)
        for i, (j, b) in enumerate(zip(self.targets, self.blocks)):
            out[2 * i : 2 * i + 2, 2 * (j - 1) : 2 * j] = b.dense(theta)
        return out


def gamma_matrix(p: int, a: int | None = None) -> BlockMonomialMatrix:
    """Component-group generator for the Galois automorphism zeta -> zeta^a.

    Block row i carries I at column <a i> when that is at most g, and J at
    column p^2 - <a i> otherwise.
    """
    require_odd_prime(p)
    m = p * p
    a = smallest_generator(m) if a is None else a
    if not is_generator(a, m):
        raise ValueError(f"a={a} does not generate (Z/{m}Z)^x")
    g = (m - 1) // 2
    targets, blocks = [], []
    for i in range(1, g + 1):
        c = a * i % m
        if c <= g:
            targets.append(c)
            blocks.append(Block(1, "I"))
        else:
            targets.append(m - c)
            blocks.append(Block(1, "J"))
    return BlockMonomialMatrix(tuple(targets), tuple(blocks))


def is_orthogonal(gamma: BlockMonomialMatrix) -> bool:
    return gamma.is_permutation() and gamma @ gamma.transpose() == BlockMonomialMatrix.identity(
        gamma.g
    )


def is_symplectic(gamma: BlockMonomialMatrix) -> bool:
    omega = BlockMonomialMatrix.standard_form(gamma.g)
    return gamma.is_permutation() and gamma.transpose() @ omega @ gamma == omega


def odd_lift(a: int, p: int) -> int:
    """The residue mod 2p^2 congruent to a mod p^2 and odd (so -1 is fixed)."""
    m = p * p
    a %= m
    return a if a % 2 else a + m


def twisted_lefschetz_check(
    gamma: BlockMonomialMatrix, alpha: CyclotomicEndomorphism, a: int
) -> bool:
    """Check gamma * alpha * gamma^{-1} equals alpha with zeta replaced by zeta^a.

    With gamma^{-1} = gamma^T, row i of the conjugate is
    X alpha_{sigma(i)} X^{-1}, and J flips the exponent sign.  On
    2p^2-th roots of unity the Galois action multiplies exponents by the
    odd lift of a.
    """
    if gamma.g != alpha.g or not gamma.is_permutation():
        return False
    if gcd(a, alpha.p) != 1:
        return False
    n = alpha.modulus
    lift = odd_lift(a, alpha.p)
    for i, (j, b) in enumerate(zip(gamma.targets, gamma.blocks)):
        e = alpha.exponents[j - 1]
        conj = e if b.tag == "I" else -e
        if (conj - lift * alpha.exponents[i]) % n:
            return False
    return True


@dataclass(frozen=True)
class PowerOrder:
    order: int
    diagonal_signs: tuple[int, ...]

    def in_identity_component(self, model: IdentityComponentModel) -> bool:
        """Whether diag(+-I) satisfies every torus relation (u_j = sign_j)."""
        for raw in model.raw_constraints:
            prod = 1
            for j, c in raw:
                prod *= self.diagonal_signs[j - 1] ** (c % 2)
            if prod != 1:
                return False
        return True


def gamma_power_order(gamma: BlockMonomialMatrix, limit: int | None = None) -> PowerOrder:
    """Smallest r >= 1 such that gamma^r is diagonal with blocks +-I."""
    limit = limit or 4 * gamma.g * gamma.g + 4
    power = gamma
    identity_targets = tuple(range(1, gamma.g + 1))
    for r in range(1, limit + 1):
        if power.targets == identity_targets and all(b.tag == "I" for b in power.blocks):
            return PowerOrder(r, tuple(b.sign for b in power.blocks))
        power = power @ gamma
    raise AssertionError(f"no diagonal power of gamma below {limit}")


def component_order(
    gamma: BlockMonomialMatrix, model: IdentityComponentModel, limit: int | None = None
) -> int:
    """Order of gamma modulo the identity component (smallest r with gamma^r in it)."""
    limit = limit or 4 * gamma.g * gamma.g + 4
    power = gamma
    identity_targets = tuple(range(1, gamma.g + 1))
    for r in range(1, limit + 1):
        if power.targets == identity_targets and all(b.tag == "I" for b in power.blocks):
            if PowerOrder(r, tuple(b.sign for b in power.blocks)).in_identity_component(model):
                return r
        power = power @ gamma
    raise AssertionError(f"gamma has no power in the identity component below {limit}")


# -- characteristic polynomials of U gamma^k --------------------------------

ExpPoly = dict  # LinearForm -> int; the zero form is the constant term


def _exp_mul(a: ExpPoly, b: ExpPoly) -> ExpPoly:
    out: ExpPoly = {}
    for fa, ca in a.items():
        for fb, cb in b.items():
            f = fa + fb
            out[f] = out.get(f, 0) + ca * cb
    return {f: c for f, c in out.items() if c}


def _exp_add(a: ExpPoly, b: ExpPoly) -> ExpPoly:
    out = dict(a)
    for f, c in b.items():
        out[f] = out.get(f, 0) + c
    return {f: c for f, c in out.items() if c}


@dataclass(frozen=True)
class CycleFactor:
    """One cycle of sigma^k and its factor T^{2L} - tr(B) T^L + 1."""

    rows: tuple[int, ...]
    block: Block

    @property
    def length(self) -> int:
        return len(self.rows)

    @property
    def trace_type(self) -> str:
        return "diagonal" if self.block.tag == "I" else "antidiagonal"

    def trace_exp(self) -> ExpPoly:
        if self.block.tag == "J":
            return {}
        s, phi = self.block.sign, self.block.phase
        return _exp_add({phi: s}, {-phi: s})

    def poly(self) -> dict[int, ExpPoly]:
        """Coefficients of T^0, T^L, T^{2L}."""
        L = self.length
        out = {0: {_ZERO: 1}, 2 * L: {_ZERO: 1}}
        tr = self.trace_exp()
        if tr:
            out[L] = {f: -c for f, c in tr.items()}
        return out

    def record(self) -> dict:
        return {
            "cycle_length": self.length,
            "rows": list(self.rows),
            "trace_type": self.trace_type,
            "sign": self.block.sign,
            "monomial": [list(t) for t in self.block.phase.terms],
        }


@dataclass
class SymbolicCharPoly:
    """P(T) = det(T - U gamma^k) as a product of cycle factors.

    ``g_i`` denotes the coefficient of T^i in P(T).  P is palindromic, so
    ``g_1 = -trace`` and ``g_2`` is the second elementary symmetric function
    of the eigenvalues.
    """

    p: int
    k: int
    g: int
    factors: list[CycleFactor]
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def degree(self) -> int:
        return sum(2 * f.length for f in self.factors)

    def g1_terms(self) -> list[tuple[int, LinearForm]]:
        """(sign, phi) pairs with g_1 = sum(sign * 2cos(phi))."""
        out = []
        for f in self.factors:
            if f.length == 1 and f.block.tag == "I":
                out.append((-f.block.sign, f.block.phase))
        return out

    def _expand(self, top: bool, upto: int) -> list[ExpPoly]:
        coeffs: list[ExpPoly] = [{_ZERO: 1}] + [{} for _ in range(upto)]
        for f in self.factors:
            poly = f.poly()
            if top:
                poly = {2 * f.length - d: c for d, c in poly.items()}
            new: list[ExpPoly] = [{} for _ in range(upto + 1)]
            for d0, c0 in enumerate(coeffs):
                if not c0:
                    continue
                for d1, c1 in poly.items():
                    if d0 + d1 <= upto:
                        new[d0 + d1] = _exp_add(new[d0 + d1], _exp_mul(c0, c1))
            coeffs = new
        return coeffs

    def coefficient_terms(self, i: int) -> ExpPoly:
        """Exact expansion of g_i into exponentials; for i <= 2 or i >= 2g - 2."""
        key = ("g", i)
        if key not in self._cache:
            n = self.degree
            if 0 <= i <= 2:
                c = self._expand(False, i)[i]
            elif n - 2 <= i <= n:
                c = self._expand(True, n - i)[n - i]
            else:
                raise ValueError("exact expansion is only implemented for i <= 2 or i >= 2g-2")
            self._cache[key] = c
        return self._cache[key]

    def numeric_coefficients(self, full_theta) -> np.ndarray:
        """det(T - M) coefficients, highest degree first, from the cycle factors."""
        full_theta = np.asarray(full_theta, dtype=float)
        poly = np.array([1.0 + 0j])
        for f in self.factors:
            L = f.length
            fac = np.zeros(2 * L + 1, dtype=complex)
            fac[0] = fac[-1] = 1.0
            if f.block.tag == "I":
                phi = float(f.block.phase.evaluate(full_theta)) if f.block.phase else 0.0
                fac[L] = -2 * f.block.sign * np.cos(phi)
            poly = np.convolve(poly, fac)
        return poly

    def records(self) -> list[dict]:
        return [dict(k=self.k, **f.record()) for f in self.factors]


def term_count(expansion: ExpPoly) -> tuple[int, int, int]:
    """(total terms, conjugate pairs, constant) where the constant counts as one term."""
    constant = expansion.get(_ZERO, 0)
    nonconstant = [f for f in expansion if not f.is_zero()]
    pairs = sum(1 for f in nonconstant if (-f) in expansion and f > -f)
    return len(nonconstant) + (1 if constant else 0), pairs, constant


def char_poly_symbolic(
    model: IdentityComponentModel, gamma: BlockMonomialMatrix, k: int
) -> SymbolicCharPoly:
    """Factor det(T - U gamma^k) over the cycles of the underlying permutation.

    On a cycle i_1 -> ... -> i_L with row blocks B_1..B_L the factor is
    det(T^L - B_1 ... B_L) = T^{2L} - tr(B) T^L + 1.  Phases are rewritten
    in the free coordinates of ``model``.
    """
    n = totient(model.p**2)
    if not 0 <= k < n:
        raise ValueError(f"k must satisfy 0 <= k < {n}")
    mat = gamma.power(k).with_torus()
    seen = set()
    factors = []
    for start in range(1, mat.g + 1):
        if start in seen:
            continue
        rows = []
        acc = Block(1, "I")
        i = start
        while i not in seen:
            seen.add(i)
            rows.append(i)
            acc = acc @ mat.blocks[i - 1]
            i = mat.targets[i - 1]
        acc = Block(acc.sign, acc.tag, substitute(acc.phase, model))
        factors.append(CycleFactor(tuple(rows), acc))
    return SymbolicCharPoly(model.p, k, mat.g, factors)


def assembled_matrix(
    model: IdentityComponentModel, gamma: BlockMonomialMatrix, k: int, free_theta: Sequence[float]
) -> np.ndarray:
    """Dense U gamma^k for numeric cross-checks."""
    full = model.full_angles(free_theta)
    g = model.g
    u = np.zeros((2 * g, 2 * g), dtype=complex)
    for j in range(g):
        u[2 * j, 2 * j] = np.exp(1j * full[j])
        u[2 * j + 1, 2 * j + 1] = np.exp(-1j * full[j])
    return u @ np.linalg.matrix_power(gamma.dense(), k)
