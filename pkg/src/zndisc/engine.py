"""Randomized partial-coloring engine with post-hoc certification.

The existence argument behind the block-sum bounds is nonconstructive, so the
engine searches directly: a random sign walk over the points of X that keeps
every enforced block sum within its budget, rolling back a sign when both
choices would violate a bound and restarting from a fresh seed when too few
points get colored.  Every returned coloring is re-verified against its block
constraints before being handed back; the certificate is what callers rely
on, not the search heuristic.

Blocks whose allowance Delta is at least their size cannot be violated by any
signing (|chi(S)| <= |S| <= Delta), so they are exempt from the walk, the
entropy-budget precondition, and the numeric recheck; that exemption is an
arithmetic fact, not a relaxation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .ap_system import Coloring, _as_subset
from .number_theory import ZnContext

__all__ = [
    "BudgetExceeded",
    "SearchFailed",
    "DeltaSchedule",
    "PartialColorRequest",
    "entropy_weight",
    "schedule_entropy_budget",
    "build_c2_request",
    "partial_color",
    "full_color_iterate",
    "full_color_iterate_traced",
]

DEFAULT_RETRIES = 64
DEFAULT_HEREDITARY_C1 = 5.0
COLOR_FRACTION_DENOM = 10  # at least ceil(m/10) points must receive a sign


class BudgetExceeded(ValueError):
    """The entropy condition fails for the supplied blocks and deltas."""


class SearchFailed(RuntimeError):
    """The randomized search exhausted its restart budget."""

    def __init__(self, message: str, *, restarts: int, iteration: int | None = None,
                 cell: int | None = None):
        super().__init__(message)
        self.restarts = restarts
        self.iteration = iteration
        self.cell = cell


@dataclass(frozen=True)
class DeltaSchedule:
    """Per-size block allowance b(s).

    main:       b(0) = 0, b(s) = 5*sqrt(s)*sqrt(log(e*n/s)), which is >= 2*sqrt(s)
                on (0, n].
    hereditary: b(s) = c1*sqrt(s)*(s/M)^(-1) for s >= M and c1*sqrt(s)*(s/M)^(-0.1)
                below, where M = phi(n)*log(e*n/phi(n)) and c1 > 2.
    """

    kind: str
    n: int
    M: float | None = None
    c1: float | None = None

    def __post_init__(self):
        if self.kind not in ("main", "hereditary"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("modulus must be positive")
        if self.kind == "hereditary":
            if self.M is None or self.c1 is None:
                raise ValueError("hereditary schedule needs M and c1")
            if self.c1 <= 2:
                raise ValueError("hereditary schedule requires c1 > 2")

    @classmethod
    def main(cls, n: int) -> "DeltaSchedule":
        return cls(kind="main", n=n)

    @classmethod
    def hereditary(cls, ctx: ZnContext, c1: float = DEFAULT_HEREDITARY_C1) -> "DeltaSchedule":
        M = ctx.phi * math.log(math.e * ctx.n / ctx.phi)
        return cls(kind="hereditary", n=ctx.n, M=M, c1=c1)

    def b(self, s):
        s_arr = np.asarray(s, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "main":
                out = 5.0 * np.sqrt(s_arr) * np.sqrt(np.log(math.e * self.n / s_arr))
            else:
                ratio = s_arr / self.M
                out = np.where(
                    s_arr >= self.M,
                    self.c1 * np.sqrt(s_arr) / ratio,
                    self.c1 * np.sqrt(s_arr) * ratio**-0.1,
                )
        out = np.where(s_arr > 0, out, 0.0)
        return float(out) if np.isscalar(s) or np.ndim(s) == 0 else out


def entropy_weight(kind: str, delta, size):
    """Per-block term of the entropy condition for a block of the given size."""
    delta = np.asarray(delta, dtype=np.float64)
    size = np.asarray(size, dtype=np.float64)
    if kind == "main":
        return np.exp(-(delta**2) / (4.0 * size))
    lam = delta / np.sqrt(size)
    # the lam >= 2 branch takes precedence at the seam
    return np.where(lam >= 2.0, 10.0 * np.exp(-(lam**2) / 4.0), 10.0 * np.log1p(2.0 / lam))


def schedule_entropy_budget(blocks: Mapping[int, object], deltas: Mapping[int, float],
                            kind: str) -> float:
    """Left-hand side of the entropy condition over the given nonempty blocks.

    ``blocks`` maps size -> either a sequence of element arrays or a plain
    count.  The caller compares the result against m/50 (main) or m/5
    (hereditary).
    """
    if kind not in ("main", "hereditary"):
        raise ValueError(f"unknown schedule kind {kind!r}")
    total = 0.0
    for size, entry in blocks.items():
        if size < 1:
            raise ValueError("block sizes must be positive")
        count = entry if isinstance(entry, (int, np.integer)) else sum(
            1 for b in entry if len(b) > 0
        )
        if count == 0:
            continue
        delta = float(deltas[size])
        if delta <= 0:
            raise ValueError("deltas must be strictly positive")
        total += count * float(entropy_weight(kind, delta, size))
    return total


@dataclass
class PartialColorRequest:
    """One partial-coloring job: a point set, block constraints, and search knobs."""

    n: int
    x: np.ndarray
    blocks: Mapping[int, Sequence[np.ndarray]]
    deltas: Mapping[int, float]
    kind: str = "main"
    retries: int = DEFAULT_RETRIES
    seed: int = 0

    def __post_init__(self):
        self.x = _as_subset(self.n, self.x)
        chunks = []
        for size, group in self.blocks.items():
            if float(self.deltas[size]) <= 0:
                raise ValueError("deltas must be strictly positive")
            for b in group:
                arr = np.asarray(b, dtype=np.int64)
                if arr.size != size:
                    raise ValueError("block size mismatch")
                chunks.append(arr)
        if chunks:
            flat = np.concatenate(chunks)
            loc = np.searchsorted(self.x, flat)
            ok = (loc < self.x.size) & (self.x[np.minimum(loc, self.x.size - 1)] == flat)
            if not np.all(ok):
                raise ValueError("blocks must be subsets of X")


def _flatten_binding_blocks(req: PartialColorRequest):
    """Constraint arrays for blocks that can actually be violated (delta < size)."""
    elem_chunks: list[np.ndarray] = []
    lengths: list[int] = []
    deltas: list[float] = []
    sizes: list[int] = []
    for size in sorted(req.blocks):
        delta = float(req.deltas[size])
        if delta >= size:
            continue
        for b in req.blocks[size]:
            arr = np.asarray(b, dtype=np.int64)
            elem_chunks.append(arr)
            lengths.append(arr.size)
            deltas.append(delta)
            sizes.append(size)
    j = len(lengths)
    if j == 0:
        empty = np.zeros(0, dtype=np.int64)
        return 0, empty, empty, np.zeros(0), np.zeros(0, dtype=np.int64)
    flat = np.concatenate(elem_chunks)
    elem_ids = np.searchsorted(req.x, flat)
    block_of = np.repeat(np.arange(j, dtype=np.int64), lengths)
    return (
        j,
        elem_ids,
        block_of,
        np.asarray(deltas, dtype=np.float64),
        np.asarray(sizes, dtype=np.int64),
    )


def _binding_budget(req: PartialColorRequest) -> float:
    binding = {
        size: group
        for size, group in req.blocks.items()
        if float(req.deltas[size]) < size
    }
    return schedule_entropy_budget(binding, req.deltas, req.kind)


def _sign_walk(m, indptr, ids, sums, block_deltas, rng):
    chi = np.zeros(m, dtype=np.int8)
    order = rng.permutation(m)
    pref = rng.integers(0, 2, size=m, dtype=np.int64) * 2 - 1
    for t in order:
        lo, hi = indptr[t], indptr[t + 1]
        if lo == hi:
            chi[t] = pref[t]
            continue
        bl = ids[lo:hi]
        s = sums[bl]
        dl = block_deltas[bl]
        sg = int(pref[t])
        if np.all(np.abs(s + sg) <= dl):
            chi[t] = sg
            sums[bl] = s + sg
        elif np.all(np.abs(s - sg) <= dl):
            chi[t] = -sg
            sums[bl] = s - sg
    return chi


def partial_color(req: PartialColorRequest) -> Coloring:
    """Search for a partial coloring meeting every block bound.

    Raises BudgetExceeded if the entropy condition fails for the binding
    blocks, and SearchFailed when no restart yields a certified coloring that
    signs at least ceil(m/10) points.
    """
    m = int(req.x.size)
    if m == 0:
        raise ValueError("X must be nonempty")
    threshold = m / 50.0 if req.kind == "main" else m / 5.0
    budget = _binding_budget(req)
    if budget > threshold + 1e-12:
        raise BudgetExceeded(
            f"entropy budget {budget:.6g} exceeds {threshold:.6g} for m={m}"
        )
    nblocks, pair_elems, pair_blocks, block_deltas, _ = _flatten_binding_blocks(req)
    order = np.argsort(pair_elems, kind="stable")
    sorted_elems = pair_elems[order]
    sorted_blocks = pair_blocks[order]
    indptr = np.searchsorted(sorted_elems, np.arange(m + 1))
    need = -(-m // COLOR_FRACTION_DENOM)
    for restart in range(max(1, req.retries)):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=req.seed, spawn_key=(restart,))
        )
        sums = np.zeros(nblocks, dtype=np.float64)
        chi_local = _sign_walk(m, indptr, sorted_blocks, sums, block_deltas, rng)
        if int(np.count_nonzero(chi_local)) < need:
            continue
        # certification: recompute every binding block sum from scratch
        check = np.zeros(nblocks, dtype=np.float64)
        if nblocks:
            check = np.bincount(
                sorted_blocks, weights=chi_local[sorted_elems], minlength=nblocks
            )
        if nblocks == 0 or np.all(np.abs(check) <= block_deltas):
            values = np.zeros(req.n, dtype=np.int8)
            values[req.x] = chi_local
            return Coloring(req.n, values)
    raise SearchFailed(
        f"no certified partial coloring after {req.retries} restarts (m={m})",
        restarts=req.retries,
    )


def _derived_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=key).generate_state(1)[0])


def build_c2_request(n: int, xs, schedule: DeltaSchedule, kappa: float = 1.0,
                     retries: int = DEFAULT_RETRIES, seed: int = 0) -> PartialColorRequest:
    """Dyadic block constraints over X for every step d, at the binding scales.

    Scales whose allowance kappa*b(2^i) reaches 2^i are left out: no signing
    can violate them.
    """
    xs = _as_subset(n, xs)
    m = int(xs.size)
    if m == 0:
        raise ValueError("X must be nonempty")
    if kappa < 1.0:
        raise ValueError("kappa must be at least 1")
    max_scale = m.bit_length() - 1
    deltas = {1 << i: kappa * schedule.b(1 << i) for i in range(max_scale + 1)}
    binding = [i for i in range(max_scale + 1) if deltas[1 << i] < (1 << i)]
    blocks: dict[int, list[np.ndarray]] = {1 << i: [] for i in binding}
    if binding and n > 1:
        smin = 1 << min(binding)
        for d in range(1, n):
            g = math.gcd(d, n)
            L = n // g
            if L < smin:
                continue
            a = xs % g
            cnt = np.bincount(a)
            if int(cnt.max()) < smin:
                continue
            k = (xs - a) // g * pow(d // g, -1, L) % L
            order = np.lexsort((k, a))
            sa = a[order]
            cuts = np.flatnonzero(np.diff(sa)) + 1
            for grp in np.split(order, cuts):
                l = grp.size
                if l < smin:
                    continue
                elems = xs[grp]
                for i in binding:
                    size = 1 << i
                    nb = l >> i
                    for t in range(nb):
                        blocks[size].append(elems[t * size : (t + 1) * size])
    return PartialColorRequest(
        n=n, x=xs, blocks=blocks, deltas=deltas, kind=schedule.kind,
        retries=retries, seed=seed,
    )


def full_color_iterate_traced(ctx: ZnContext, xs, kind: str = "main", seed: int = 0,
                              kappa: float = 1.0, retries: int = DEFAULT_RETRIES,
                              c1: float = DEFAULT_HEREDITARY_C1):
    """Color all of X by repeated partial coloring of the uncolored remainder.

    Returns (coloring, sizes) where sizes[i] = |X_i| going into iteration i.
    With kind="hereditary" the looser schedule is used while more than phi(n)
    points remain, then the main schedule finishes.
    """
    xs = _as_subset(ctx.n, xs)
    if xs.size == 0:
        raise ValueError("X must be nonempty")
    values = np.zeros(ctx.n, dtype=np.int8)
    sizes: list[int] = []
    remaining = xs
    iteration = 0
    while remaining.size:
        sizes.append(int(remaining.size))
        if kind == "hereditary" and remaining.size > ctx.phi:
            schedule = DeltaSchedule.hereditary(ctx, c1)
        else:
            schedule = DeltaSchedule.main(ctx.n)
        req = build_c2_request(
            ctx.n, remaining, schedule, kappa=kappa, retries=retries,
            seed=_derived_seed(seed, iteration),
        )
        try:
            part = partial_color(req)
        except SearchFailed as exc:
            raise SearchFailed(
                f"iteration {iteration}: {exc}",
                restarts=exc.restarts, iteration=iteration,
            ) from exc
        values[remaining] += part.values[remaining]
        remaining = remaining[part.values[remaining] == 0]
        iteration += 1
    return Coloring(ctx.n, values), sizes


def full_color_iterate(ctx: ZnContext, xs, kind: str = "main", seed: int = 0,
                       kappa: float = 1.0, retries: int = DEFAULT_RETRIES,
                       c1: float = DEFAULT_HEREDITARY_C1) -> Coloring:
    coloring, _ = full_color_iterate_traced(
        ctx, xs, kind=kind, seed=seed, kappa=kappa, retries=retries, c1=c1
    )
    return coloring
