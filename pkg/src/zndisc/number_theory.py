"""Exact integer arithmetic over Z_n: factorization, divisors, totient, CRT.

Everything here is deterministic pure-integer math on desk-scale moduli.
Throughout the package gcd(0, n) = n, which is already ``math.gcd``'s
convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "N_LIMIT",
    "ZnContext",
    "factorize",
    "divisors_from_factors",
    "totient",
    "make_context",
    "crt_combine",
    "crt_split",
]

# Trial division up to sqrt(n) stays fast well past this.
N_LIMIT = 1 << 41


def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of n >= 1 as (prime, exponent) pairs, primes ascending."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    out: list[tuple[int, int]] = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return tuple(out)


def divisors_from_factors(factors: tuple[tuple[int, int], ...]) -> tuple[int, ...]:
    divs = [1]
    for p, e in factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return tuple(sorted(divs))


def totient(n: int) -> int:
    phi = 1
    for p, e in factorize(n):
        phi *= p ** (e - 1) * (p - 1)
    return phi


@dataclass(frozen=True)
class ZnContext:
    """A modulus n with its factorization, divisor list, and multiplicative invariants.

    ``prime_powers`` are the pairwise-coprime factors p_i^{a_i}; ``crt_basis``
    holds e_i with e_i = 1 mod p_i^{a_i} and e_i = 0 mod the other prime powers,
    so combining residues is a dot product mod n.
    """

    n: int
    factors: tuple[tuple[int, int], ...]
    divisors: tuple[int, ...]
    phi: int
    omega: int
    d: int
    prime_powers: tuple[int, ...]
    crt_basis: tuple[int, ...]

    def omega_of_divisor(self, r: int) -> int:
        """Number of distinct primes of n dividing r (equals omega(r) for r | n)."""
        if r < 1 or self.n % r != 0:
            raise ValueError(f"{r} does not divide {self.n}")
        return sum(1 for p, _ in self.factors if r % p == 0)


def make_context(n: int) -> ZnContext:
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n > N_LIMIT:
        raise ValueError(f"n exceeds the supported limit {N_LIMIT}")
    factors = factorize(n)
    divisors = divisors_from_factors(factors)
    phi = 1
    for p, e in factors:
        phi *= p ** (e - 1) * (p - 1)
    d = 1
    for _, e in factors:
        d *= e + 1
    prime_powers = tuple(p**e for p, e in factors)
    basis = []
    for q in prime_powers:
        m = n // q
        basis.append(m * pow(m, -1, q) % n)
    return ZnContext(
        n=n,
        factors=factors,
        divisors=divisors,
        phi=phi,
        omega=len(factors),
        d=d,
        prime_powers=prime_powers,
        crt_basis=tuple(basis),
    )


def crt_combine(ctx: ZnContext, residues):
    """Element of Z_n matching residue t_i mod p_i^{a_i} for each factor.

    Accepts ints or equally-shaped integer arrays (one per factor).
    """
    if len(residues) != len(ctx.prime_powers):
        raise ValueError("one residue per prime-power factor required")
    x = 0
    for t, q, b in zip(residues, ctx.prime_powers, ctx.crt_basis):
        if np.any((np.asarray(t) < 0) | (np.asarray(t) >= q)):
            raise ValueError(f"residue out of range for modulus {q}")
        x = x + t * b
    return x % ctx.n


def crt_split(ctx: ZnContext, x):
    """Residue tuple (x mod p_i^{a_i} per factor); inverse of crt_combine."""
    if np.any((np.asarray(x) < 0) | (np.asarray(x) >= ctx.n)):
        raise ValueError(f"element out of range for Z_{ctx.n}")
    return tuple(x % q for q in ctx.prime_powers)
