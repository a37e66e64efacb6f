"""Small number-theory helpers shared across modules."""

from __future__ import annotations

from functools import lru_cache
from math import gcd, isqrt

import numpy as np


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for f in range(3, isqrt(n) + 1, 2):
        if n % f == 0:
            return False
    return True


def require_odd_prime(p: int) -> None:
    if p == 2 or not is_prime(p):
        raise ValueError(f"p must be an odd prime, got {p}")


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def units(m: int) -> tuple[int, ...]:
    """Representatives 1..m-1 of (Z/mZ)^x in increasing order."""
    return tuple(t for t in range(1, m) if gcd(t, m) == 1)


def totient(m: int) -> int:
    return len(units(m)) if m > 1 else 1


def multiplicative_order(a: int, m: int) -> int:
    if gcd(a, m) != 1:
        raise ValueError(f"{a} is not a unit modulo {m}")
    phi = totient(m)
    order = phi
    for r in prime_factors(phi):
        while order % r == 0 and pow(a, order // r, m) == 1:
            order //= r
    return order


def is_generator(a: int, m: int) -> bool:
    return gcd(a, m) == 1 and multiplicative_order(a, m) == totient(m)


def smallest_generator(m: int) -> int:
    for a in range(2, m):
        if is_generator(a, m):
            return a
    raise ValueError(f"(Z/{m}Z)^x is not cyclic")


def discrete_log_table(a: int, m: int) -> dict[int, int]:
    """Map residue -> exponent k with a^k = residue (mod m), 0 <= k < ord(a)."""
    table = {}
    x = 1
    for k in range(multiplicative_order(a, m)):
        table[x] = k
        x = x * a % m
    return table


def primes_up_to(bound: int) -> np.ndarray:
    """Sieve of Eratosthenes; returns an int64 array of primes <= bound."""
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for f in range(3, isqrt(bound) + 1, 2):
        if sieve[f]:
            sieve[f * f :: 2 * f] = False
    return np.flatnonzero(sieve).astype(np.int64)
