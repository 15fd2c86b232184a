"""Deterministic low-discrepancy colorings of Z_n and its subsets.

The key trick is sign-flipped doubling: color half of a suitably-shaped set,
copy the colors to the translated other half with flipped signs, and entire
congruence classes cancel exactly.  Stitching such pieces over the divisor
lattice yields a full coloring of Z_n whose class sums never exceed 1 in
magnitude, and pulling a coloring back along the quotient map Z_n -> Z_r
trades progression discrepancy against class discrepancy.

Interiors are colored by the randomized engine; all the exact cancellation
statements hold regardless of what the engine returns, because they depend
only on the sign-flip structure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ap_system import Coloring, _as_subset, max_ap_discrepancy, max_congruence_discrepancy
from .engine import (
    DEFAULT_HEREDITARY_C1,
    DEFAULT_RETRIES,
    SearchFailed,
    full_color_iterate,
    _derived_seed,
)
from .number_theory import ZnContext, make_context

__all__ = [
    "CrtBox",
    "SignPattern",
    "ConstructionReport",
    "lift_coloring",
    "interval_doubling_coloring",
    "prime_power_coloring",
    "crt_box_coloring",
    "congruence_balanced_coloring",
    "construct_best_coloring",
    "hereditary_coloring",
]


@dataclass(frozen=True)
class CrtBox:
    """Residue box X = {psi(t_1, ..., t_k) : 0 <= t_i < T_i} with doubling data.

    ``doubled`` lists the factor indices whose extent splits as T_i = s_i *
    p_i^{beta_i} with s_i even; those coordinates get the sign-flip treatment.
    ``beta`` is aligned with ``doubled``.
    """

    ctx: ZnContext
    extents: tuple[int, ...]
    doubled: tuple[int, ...]
    beta: tuple[int, ...]

    def __post_init__(self):
        facs = self.ctx.factors
        if len(self.extents) != len(facs):
            raise ValueError("one extent per prime-power factor required")
        for t, (p, e) in zip(self.extents, facs):
            if not 1 <= t <= p**e:
                raise ValueError(f"extent {t} out of range for {p}^{e}")
        if len(self.doubled) != len(self.beta):
            raise ValueError("beta must align with the doubled index set")
        if tuple(sorted(set(self.doubled))) != self.doubled:
            raise ValueError("doubled indices must be sorted and distinct")
        for i, b in zip(self.doubled, self.beta):
            if not 0 <= i < len(facs):
                raise ValueError("doubled index out of range")
            p = facs[i][0]
            q = p**b
            t = self.extents[i]
            if b < 0 or t % q != 0 or (t // q) % 2 != 0:
                raise ValueError(
                    f"extent {t} is not an even multiple of {p}^{b} at index {i}"
                )

    @property
    def size(self) -> int:
        return math.prod(self.extents)

    def half_extents(self) -> tuple[int, ...]:
        return tuple(
            t // 2 if i in self.doubled else t for i, t in enumerate(self.extents)
        )

    def elements(self) -> np.ndarray:
        return _box_elements(self.ctx, self.extents)

    def cancellation_moduli(self) -> tuple[int, ...]:
        """Class moduli r_i = n / p_i^{alpha_i - beta_i} whose sums vanish on X."""
        out = []
        for i, b in zip(self.doubled, self.beta):
            p, e = self.ctx.factors[i]
            out.append(self.ctx.n // p ** (e - b))
        return tuple(out)


@dataclass(frozen=True)
class SignPattern:
    """Sign and translate for each corner v of the doubling hypercube.

    sgn(v) = (-1)^(sum v_i); the translate u_v is = v_i * S_i mod p_i^{alpha_i}
    on doubled coordinates and = 0 mod the rest, where S_i is the halved
    extent.
    """

    ctx: ZnContext
    doubled: tuple[int, ...]
    shifts: tuple[int, ...]

    def sign(self, v: tuple[int, ...]) -> int:
        return -1 if sum(v) % 2 else 1

    def translate(self, v: tuple[int, ...]) -> int:
        u = 0
        for vi, i, s in zip(v, self.doubled, self.shifts):
            u += vi * s * self.ctx.crt_basis[i]
        return u % self.ctx.n

    def corners(self):
        for v in itertools.product((0, 1), repeat=len(self.doubled)):
            yield v, self.sign(v), self.translate(v)


@dataclass(frozen=True)
class ConstructionReport:
    """What a top-level construction run chose, predicted, and measured."""

    n: int
    r_star: int
    predicted: float
    measured_t: int | None
    base_congruence_max: int
    c_hat: float
    kappa: float
    seed: int

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "r_star": self.r_star,
            "predicted": self.predicted,
            "measured_t": self.measured_t,
            "base_congruence_max": self.base_congruence_max,
            "c_hat": self.c_hat,
            "kappa": self.kappa,
            "seed": self.seed,
        }


def _box_elements(ctx: ZnContext, extents) -> np.ndarray:
    """Sorted elements psi(t_1, ..., t_k), 0 <= t_i < extent_i."""
    x = np.zeros(1, dtype=np.int64)
    for basis, t in zip(ctx.crt_basis, extents):
        x = (x[:, None] + basis * np.arange(t, dtype=np.int64)[None, :]).reshape(-1)
        x %= ctx.n
    return np.sort(x)


def _normalized(n: int, values: np.ndarray) -> Coloring:
    """Global sign flip so the first colored point is +1 (chi and -chi are equivalent)."""
    sup = np.flatnonzero(values)
    if sup.size and values[sup[0]] < 0:
        values = -values
    return Coloring(n, values)


def lift_coloring(base: Coloring, n: int) -> Coloring:
    """Pull a full coloring of Z_r back along the quotient Z_n -> Z_r."""
    r = base.n
    if n % r != 0:
        raise ValueError("r must divide n")
    if not base.is_full():
        raise ValueError("lifting expects a full coloring")
    return Coloring(n, np.tile(base.values, n // r))


def interval_doubling_coloring(ctx: ZnContext, start: int, length: int, seed: int = 0,
                               *, kappa: float = 1.0,
                               retries: int = DEFAULT_RETRIES) -> Coloring:
    """Color an interval of even length so classes mod any r | length/2 cancel.

    The engine colors the first half S; the second half S + length/2 receives
    the flipped signs.  C(r, w) - length/2 = C(r, w) whenever r divides
    length/2, so those class sums vanish exactly.
    """
    n = ctx.n
    if length < 2 or length % 2 != 0:
        raise ValueError("interval length must be even and positive")
    if length > n:
        raise ValueError("interval cannot exceed Z_n")
    half = length // 2
    first = (start + np.arange(half, dtype=np.int64)) % n
    chi0 = full_color_iterate(ctx, first, kind="main", seed=seed,
                              kappa=kappa, retries=retries)
    values = np.zeros(n, dtype=np.int8)
    second = (first + half) % n
    values[first] = chi0.values[first]
    values[second] = -chi0.values[first]
    return _normalized(n, values)


def crt_box_coloring(box: CrtBox, seed: int = 0, *, kappa: float = 1.0,
                     retries: int = DEFAULT_RETRIES) -> Coloring:
    """Color a residue box by sign-flipped doubling across the chosen coordinates.

    The half box X_0 is engine-colored; each corner copy u_v + X_0 carries
    sgn(v) times those colors.  For every doubled index i and every w, the
    class sum over C(n / p_i^{alpha_i - beta_i}, w) ∩ X is exactly 0.
    """
    ctx = box.ctx
    n = ctx.n
    half = box.half_extents()
    x0 = _box_elements(ctx, half)
    chi0 = full_color_iterate(ctx, x0, kind="main", seed=seed,
                              kappa=kappa, retries=retries)
    shifts = tuple(half[i] for i in box.doubled)
    pattern = SignPattern(ctx=ctx, doubled=box.doubled, shifts=shifts)
    values = np.zeros(n, dtype=np.int8)
    for _, sg, u in pattern.corners():
        values[(x0 + u) % n] = sg * chi0.values[x0]
    return _normalized(n, values)


def _balanced_cells(ctx: ZnContext):
    """The divisor-indexed partition of Z_n into translated residue boxes.

    Coordinate i is cut into intervals by the exponent delta_i: for p_i = 2
    only delta_i = alpha_i survives (the whole coordinate); for odd p_i,
    delta_i = 0 is {0} and delta_i >= 1 is [p^(delta-1), p^delta).  The cell of
    r = prod p_i^{delta_i} is the product of those intervals, pushed through
    the CRT map.
    """
    cells = []
    for r in ctx.divisors:
        extents = []
        starts = []
        doubled = []
        beta = []
        ok = True
        for i, (p, e) in enumerate(ctx.factors):
            delta = 0
            rr = r
            while rr % p == 0:
                rr //= p
                delta += 1
            if p == 2:
                if delta != e:
                    ok = False
                    break
                starts.append(0)
                extents.append(p**e)
                doubled.append(i)
                beta.append(delta - 1)
            elif delta == 0:
                starts.append(0)
                extents.append(1)
            else:
                starts.append(p ** (delta - 1))
                extents.append((p - 1) * p ** (delta - 1))
                doubled.append(i)
                beta.append(delta - 1)
        if ok:
            cells.append((r, tuple(extents), tuple(starts), tuple(doubled), tuple(beta)))
    return cells


def congruence_balanced_coloring(ctx: ZnContext, seed: int = 0, *, kappa: float = 1.0,
                                 retries: int = DEFAULT_RETRIES) -> Coloring:
    """Full coloring of Z_n with every congruence-class sum in {-1, 0, +1}.

    Z_n is partitioned into one translated residue box per divisor r (cells of
    size at most r); each nonempty cell is colored by crt_box_coloring.  The
    unit class-sum guarantee is structural: it survives any engine output.
    """
    n = ctx.n
    if n == 1:
        return Coloring(1, np.array([1], dtype=np.int8))
    values = np.zeros(n, dtype=np.int8)
    for idx, (r, extents, starts, doubled, beta) in enumerate(_balanced_cells(ctx)):
        box = CrtBox(ctx=ctx, extents=extents, doubled=doubled, beta=beta)
        try:
            cell = crt_box_coloring(box, seed=_derived_seed(seed, idx),
                                    kappa=kappa, retries=retries)
        except SearchFailed as exc:
            raise SearchFailed(
                f"cell r={r}: {exc}", restarts=exc.restarts, cell=r
            ) from exc
        shift = 0
        for s, basis in zip(starts, ctx.crt_basis):
            shift += s * basis
        shift %= n
        sup = cell.support()
        values[(sup + shift) % n] = cell.values[sup]
    if np.any(values == 0):
        raise AssertionError("divisor cells failed to partition Z_n")
    return _normalized(n, values)


def prime_power_coloring(p: int, alpha: int, seed: int = 0, *, kappa: float = 1.0,
                         retries: int = DEFAULT_RETRIES) -> Coloring:
    """Full coloring of Z_{p^alpha} with every class sum in {-1, 0, +1}.

    p = 2 doubles the whole range at once; odd p partitions Z_n into {0} and
    the intervals [p^(i-1), p^i), each an even-length interval that doubling
    handles.
    """
    from .number_theory import factorize

    if alpha < 1:
        raise ValueError("exponent must be positive")
    if factorize(p) != ((p, 1),):
        raise ValueError(f"{p} is not prime")
    n = p**alpha
    ctx = make_context(n)
    if p == 2:
        return interval_doubling_coloring(ctx, 0, n, seed=seed,
                                          kappa=kappa, retries=retries)
    values = np.zeros(n, dtype=np.int8)
    values[0] = 1
    for i in range(1, alpha + 1):
        start = p ** (i - 1)
        length = (p - 1) * p ** (i - 1)
        cell = interval_doubling_coloring(ctx, start, length,
                                          seed=_derived_seed(seed, i),
                                          kappa=kappa, retries=retries)
        sup = cell.support()
        values[sup] = cell.values[sup]
    return _normalized(n, values)


def construct_best_coloring(ctx: ZnContext, c_hat: float = 1.0, seed: int = 0,
                            *, kappa: float = 1.0, retries: int = DEFAULT_RETRIES,
                            measure: bool = True) -> tuple[Coloring, ConstructionReport]:
    """Best divisor-balanced coloring of Z_n: pick r* minimizing the predicted
    bound n/r + c_hat*sqrt(r)*2^omega(r), color Z_{r*}, and lift.

    The unit class-sum invariant belongs to the base coloring of Z_{r*};
    lifting preserves the progression bound, not the class bound.
    """
    if c_hat <= 0:
        raise ValueError("c_hat must be positive")
    n = ctx.n
    best_r, best_val = None, None
    for r in ctx.divisors:
        val = n / r + c_hat * math.sqrt(r) * 2 ** ctx.omega_of_divisor(r)
        if best_val is None or val < best_val:
            best_r, best_val = r, val
    base_ctx = make_context(best_r)
    base = congruence_balanced_coloring(base_ctx, seed=seed, kappa=kappa,
                                        retries=retries)
    chi = lift_coloring(base, n)
    measured = None
    if measure:
        measured, _ = max_ap_discrepancy(chi)
    report = ConstructionReport(
        n=n, r_star=best_r, predicted=best_val, measured_t=measured,
        base_congruence_max=max_congruence_discrepancy(base, base_ctx),
        c_hat=c_hat, kappa=kappa, seed=seed,
    )
    return chi, report


def hereditary_coloring(ctx: ZnContext, xs, seed: int = 0, *, kappa: float = 1.0,
                        retries: int = DEFAULT_RETRIES,
                        c1: float = DEFAULT_HEREDITARY_C1) -> Coloring:
    """Full coloring of an arbitrary subset X of Z_n.

    Runs the totient-tuned schedule while more than phi(n) points remain
    uncolored, then finishes with the main schedule.
    """
    xs = _as_subset(ctx.n, xs)
    chi = full_color_iterate(ctx, xs, kind="hereditary", seed=seed,
                             kappa=kappa, retries=retries, c1=c1)
    return _normalized(ctx.n, chi.values.copy())
