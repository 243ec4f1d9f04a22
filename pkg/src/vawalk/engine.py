"""Exact evolution of mu_n on Z^m x F and total-variation measurements.

Right-multiplying ``(v, x)`` by an atom ``(w, y)`` shifts ``v`` by
``Ad(x) w + tau(x, y)``, a vector depending on the coset ``x`` only.  Float
mode therefore keeps one dense box per coset and convolves by adding shifted
copies of whole boxes; entries below the prune threshold are zeroed and
booked in ``lost_mass``, and boxes are trimmed to their nonzero extent.
Exact mode keeps a dict of Fractions and never prunes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .group import Element, GroupSpec
from .measure import EXACT, FLOAT, FiniteMeasure

DEFAULT_PRUNE = 1e-16
EXACT_STEP_CAP = 64


class ModeMismatchError(ValueError):
    pass


class SpecMismatchError(ValueError):
    pass


class MassInvariantError(ArithmeticError):
    pass


def check_mass(dist, tol: float = 1e-12) -> None:
    """total + lost_mass must be 1 (exactly in exact mode)."""
    total = dist.total() + dist.lost_mass
    if dist.mode == EXACT:
        if total != 1 or dist.lost_mass:
            raise MassInvariantError(f"exact distribution at n={dist.n} has total mass {total}")
    elif abs(total - 1.0) > tol:
        raise MassInvariantError(f"float distribution at n={dist.n} has total + lost = {total!r}")


Block = tuple[np.ndarray, np.ndarray]  # (lower corner, dense array)


def _trim(lo: np.ndarray, arr: np.ndarray) -> Optional[Block]:
    """Shrink to the bounding box of nonzero entries; None if all zero."""
    if arr.ndim == 0:
        return (lo, arr) if arr != 0 else None
    nz = arr != 0
    starts, stops = [], []
    for ax in range(arr.ndim):
        other = tuple(i for i in range(arr.ndim) if i != ax)
        hit = np.flatnonzero(nz.any(axis=other)) if other else np.flatnonzero(nz)
        if hit.size == 0:
            return None
        starts.append(hit[0])
        stops.append(hit[-1] + 1)
    if all(s == 0 for s in starts) and all(e == n for e, n in zip(stops, arr.shape)):
        return lo, arr
    sl = tuple(slice(s, e) for s, e in zip(starts, stops))
    return lo + np.array(starts, dtype=np.int64), np.ascontiguousarray(arr[sl])


class LatticeDistribution:
    """Probability mass on Z^m x F after ``n`` steps.

    Exact mode: ``entries`` maps Element -> Fraction.  Float mode: ``blocks``
    maps coset -> (lower corner, dense float array).
    """

    def __init__(self, spec: GroupSpec, mode: str, n: int = 0, lost_mass: float = 0.0,
                 entries: Optional[dict] = None, blocks: Optional[dict] = None):
        self.spec = spec
        self.mode = mode
        self.n = n
        self.lost_mass = lost_mass
        self.entries = entries if entries is not None else {}
        self.blocks = blocks if blocks is not None else {}

    # -- construction -------------------------------------------------------------

    @classmethod
    def delta(cls, spec: GroupSpec, mode: str = EXACT, g: Optional[Element] = None):
        g = g or spec.identity()
        if mode == EXACT:
            return cls(spec, EXACT, entries={g: Fraction(1)})
        arr = np.ones((1,) * spec.m)
        return cls(spec, FLOAT, blocks={g.x: (np.array(g.v, dtype=np.int64), arr)})

    @classmethod
    def from_entries(cls, spec: GroupSpec, entries: dict, mode: str, n: int = 0):
        if mode == EXACT:
            return cls(spec, EXACT, n, entries={g: Fraction(p) for g, p in entries.items() if p})
        by_coset: dict[int, list] = {}
        for g, p in entries.items():
            if p:
                by_coset.setdefault(g.x, []).append((g.v, float(p)))
        blocks = {}
        for x, pts in by_coset.items():
            vs = np.array([v for v, _ in pts], dtype=np.int64).reshape(len(pts), spec.m)
            lo = vs.min(axis=0)
            arr = np.zeros(tuple(vs.max(axis=0) - lo + 1))
            for v, p in pts:
                arr[tuple(np.array(v) - lo)] += p
            blocks[x] = (lo, arr)
        return cls(spec, FLOAT, n, blocks=blocks)

    @classmethod
    def from_measure(cls, mu: FiniteMeasure, mode: Optional[str] = None):
        mode = mode or mu.mode
        return cls.from_entries(mu.spec, dict(mu.items()), mode, n=1)

    # -- queries --------------------------------------------------------------------

    def cosets(self) -> list[int]:
        if self.mode == EXACT:
            return sorted({g.x for g in self.entries})
        return sorted(self.blocks)

    def block(self, x: int) -> Optional[Block]:
        """Dense float view of coset ``x`` (converted on the fly in exact mode)."""
        if self.mode == FLOAT:
            return self.blocks.get(x)
        sub = {g: float(p) for g, p in self.entries.items() if g.x == x}
        if not sub:
            return None
        return LatticeDistribution.from_entries(self.spec, sub, FLOAT).blocks[x]

    def items(self) -> Iterator[tuple[Element, object]]:
        """Nonzero (element, mass) pairs in canonical order."""
        if self.mode == EXACT:
            yield from sorted(self.entries.items())
            return
        for x in sorted(self.blocks):
            lo, arr = self.blocks[x]
            for idx in zip(*np.nonzero(arr)):
                yield Element(x, tuple(int(c) for c in lo + np.array(idx))), float(arr[idx])

    def mass(self, g: Element):
        if self.mode == EXACT:
            return self.entries.get(g, Fraction(0))
        blk = self.blocks.get(g.x)
        if blk is None:
            return 0.0
        lo, arr = blk
        idx = np.array(g.v) - lo
        if np.any(idx < 0) or np.any(idx >= arr.shape):
            return 0.0
        return float(arr[tuple(idx)])

    def total(self):
        if self.mode == EXACT:
            return sum(self.entries.values(), Fraction(0))
        return math.fsum(float(arr.sum()) for _, arr in self.blocks.values())

    def support_size(self) -> int:
        if self.mode == EXACT:
            return len(self.entries)
        return int(sum(np.count_nonzero(arr) for _, arr in self.blocks.values()))

    def nbytes(self) -> int:
        return int(sum(arr.nbytes for _, arr in self.blocks.values()))

    def to_float(self) -> "LatticeDistribution":
        if self.mode == FLOAT:
            return self
        out = LatticeDistribution.from_entries(self.spec, self.entries, FLOAT, self.n)
        return out

    def marginal(self, i: int) -> "LatticeDistribution":
        """Pushforward to factor ``i`` of a product spec."""
        spec = self.spec
        if spec.factors is None:
            raise SpecMismatchError("marginal: not a product spec")
        fac = spec.factors[i]
        if self.mode == EXACT:
            acc: dict = {}
            for g, p in self.entries.items():
                part = spec.split(g)[i]
                acc[part] = acc.get(part, Fraction(0)) + p
            return LatticeDistribution(fac, EXACT, self.n, entries=acc)
        ma = spec.factors[0].m
        nb = spec.factors[1].order
        acc_blocks: dict[int, list[Block]] = {}
        for x, (lo, arr) in self.blocks.items():
            xi = divmod(x, nb)[i]
            axes = tuple(range(ma, spec.m)) if i == 0 else tuple(range(ma))
            keep = lo[:ma] if i == 0 else lo[ma:]
            acc_blocks.setdefault(xi, []).append((keep, arr.sum(axis=axes) if axes else arr))
        blocks = {xi: _sum_blocks(parts) for xi, parts in acc_blocks.items()}
        return LatticeDistribution(fac, FLOAT, self.n, self.lost_mass, blocks=blocks)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow([f"v{i}" for i in range(self.spec.m)] + ["x", "mass"])
        for g, p in self.items():
            w.writerow(list(g.v) + [g.x, p if self.mode == EXACT else repr(p)])
        return buf.getvalue()


def _sum_blocks(parts: Sequence[tuple[np.ndarray, np.ndarray, float] | Block]) -> Block:
    """Add (lo, arr[, scale]) blocks into one box covering them all."""
    los = np.array([p[0] for p in parts])
    his = np.array([p[0] + np.array(p[1].shape) for p in parts])
    lo = los.min(axis=0)
    out = np.zeros(tuple(his.max(axis=0) - lo))
    for p in parts:
        sl = tuple(slice(a, a + n) for a, n in zip(p[0] - lo, p[1].shape))
        if len(p) == 3 and p[2] != 1.0:
            out[sl] += p[2] * p[1]
        else:
            out[sl] += p[1]
    return lo, out


class ProductDistribution:
    """Lazy product of two float-capable distributions on the product spec.

    Blocks are outer products built on demand, so the full product is never
    held in memory at once.
    """

    def __init__(self, spec: GroupSpec, a: LatticeDistribution, b: LatticeDistribution):
        if spec.factors is None or (a.spec, b.spec) != tuple(spec.factors):
            raise SpecMismatchError("product: factor specs do not match")
        self.spec, self.a, self.b = spec, a, b
        self.mode = EXACT if a.mode == b.mode == EXACT else FLOAT
        self.lost_mass = a.lost_mass + b.lost_mass
        self.n = a.n

    def cosets(self) -> list[int]:
        nb = self.spec.factors[1].order
        return sorted(x1 * nb + x2 for x1 in self.a.cosets() for x2 in self.b.cosets())

    def block(self, x: int) -> Optional[Block]:
        x1, x2 = divmod(x, self.spec.factors[1].order)
        ba, bb = self.a.block(x1), self.b.block(x2)
        if ba is None or bb is None:
            return None
        return np.concatenate([ba[0], bb[0]]), np.multiply.outer(ba[1], bb[1])

    @property
    def entries(self) -> dict:
        if self.mode != EXACT:
            raise ModeMismatchError("entries: float product has no exact entries")
        return {self.spec.pair(g, h): p * q
                for g, p in self.a.entries.items() for h, q in self.b.entries.items()}


# -- evolution ----------------------------------------------------------------------------


class Stepper:
    """Precomputed move table for repeated convolution by one measure."""

    def __init__(self, mu: FiniteMeasure, mode: str, prune: float = DEFAULT_PRUNE):
        self.mu = mu
        self.mode = mode
        self.prune = prune
        spec = mu.spec
        self.moves: dict[int, list[tuple[int, np.ndarray, object]]] = {}
        for x in range(spec.order):
            self.moves[x] = [(spec.table(x, s.x), np.array(spec.displacement(x, s), dtype=np.int64),
                              p if mode == EXACT else float(p)) for s, p in mu.items()]

    def step(self, dist: LatticeDistribution) -> LatticeDistribution:
        if dist.spec != self.mu.spec:
            raise SpecMismatchError("convolve: distribution and measure live on different groups")
        if dist.mode != self.mode:
            raise ModeMismatchError(f"convolve: {dist.mode} distribution with {self.mode} stepper")
        if self.mode == EXACT:
            return self._step_exact(dist)
        return self._step_float(dist)

    def _step_exact(self, dist):
        spec = self.mu.spec
        out: dict = {}
        atoms = list(self.mu.items())
        for g, p in dist.entries.items():
            for s, q in atoms:
                h = spec.multiply(g, s)
                out[h] = out.get(h, 0) + p * q
        return LatticeDistribution(spec, EXACT, dist.n + 1, entries=out)

    def _step_float(self, dist):
        contrib: dict[int, list] = {}
        for x, (lo, arr) in dist.blocks.items():
            for z, shift, q in self.moves[x]:
                contrib.setdefault(z, []).append((lo + shift, arr, q))
        lost = dist.lost_mass
        blocks = {}
        for z, parts in contrib.items():
            lo, out = _sum_blocks(parts)
            if self.prune > 0:
                small = out < self.prune
                lost += float(out[small].sum())
                out[small] = 0.0
            trimmed = _trim(lo, out)
            if trimmed is not None:
                blocks[z] = trimmed
        return LatticeDistribution(self.mu.spec, FLOAT, dist.n + 1, lost, blocks=blocks)


def convolve_step(dist: LatticeDistribution, mu: FiniteMeasure,
                  prune: float = DEFAULT_PRUNE) -> LatticeDistribution:
    if mu.mode == EXACT and dist.mode == FLOAT:
        mu = mu.to_float()
    if mu.mode != dist.mode:
        raise ModeMismatchError(f"convolve: {dist.mode} distribution with {mu.mode} measure")
    return Stepper(mu, dist.mode, prune).step(dist)


def evolve(mu: FiniteMeasure, times: Iterable[int], mode: Optional[str] = None,
           prune: float = DEFAULT_PRUNE, exact_cap: int = EXACT_STEP_CAP
           ) -> Iterator[LatticeDistribution]:
    """Yield mu_n for each requested n (ascending), evolving once from the identity."""
    mode = mode or mu.mode
    times = sorted(set(int(t) for t in times))
    if times and times[0] < 0:
        raise ValueError("times must be nonnegative")
    if mode == EXACT and times and times[-1] > exact_cap:
        raise ValueError(f"exact mode is capped at n <= {exact_cap}")
    if mode == EXACT and mu.mode != EXACT:
        raise ModeMismatchError("exact evolution needs a measure with rational weights")
    m = mu if mode == EXACT else mu.to_float()
    stepper = Stepper(m, mode, prune)
    dist = LatticeDistribution.delta(mu.spec, mode)
    for t in times:
        while dist.n < t:
            dist = stepper.step(dist)
        yield dist


def distribution_at(mu: FiniteMeasure, n: int, mode: Optional[str] = None,
                    prune: float = DEFAULT_PRUNE) -> LatticeDistribution:
    return next(evolve(mu, [n], mode, prune))


def mixture(dists: Sequence[LatticeDistribution], weights=None) -> LatticeDistribution:
    """Convex combination of distributions on one spec (equal weights by default)."""
    spec, mode = dists[0].spec, dists[0].mode
    k = len(dists)
    if any(d.spec != spec for d in dists):
        raise SpecMismatchError("mixture: distributions live on different groups")
    if any(d.mode != mode for d in dists):
        raise ModeMismatchError("mixture: modes differ")
    if weights is None:
        weights = [Fraction(1, k)] * k if mode == EXACT else [1.0 / k] * k
    lost = sum(w * d.lost_mass for w, d in zip(weights, dists))
    if mode == EXACT:
        acc: dict = {}
        for w, d in zip(weights, dists):
            for g, p in d.entries.items():
                acc[g] = acc.get(g, 0) + w * p
        return LatticeDistribution(spec, EXACT, dists[0].n, entries=acc)
    parts: dict[int, list] = {}
    for w, d in zip(weights, dists):
        for x, (lo, arr) in d.blocks.items():
            parts.setdefault(x, []).append((lo, arr, float(w)))
    blocks = {x: _sum_blocks(p) for x, p in parts.items()}
    return LatticeDistribution(spec, FLOAT, dists[0].n, float(lost), blocks=blocks)


def averaged_distribution(mu: FiniteMeasure, q: int, n: int, mode: Optional[str] = None,
                          prune: float = DEFAULT_PRUNE) -> LatticeDistribution:
    """(1/q) sum_{i<q} mu_{qn+i}."""
    if q < 1 or n < 0:
        raise ValueError("need q >= 1 and n >= 0")
    dists = list(evolve(mu, [q * n + i for i in range(q)], mode, prune))
    out = mixture(dists)
    out.n = q * n
    return out


# -- total variation ------------------------------------------------------------------------


@dataclass(frozen=True)
class Measured:
    """A TV value and the half-width of the interval certain to contain the truth."""

    value: float
    error: float

    def __iter__(self):
        return iter((self.value, self.error))


def _abs_diff_sum(a: Optional[Block], b: Optional[Block], b_scale: float = 1.0) -> float:
    if a is None and b is None:
        return 0.0
    if a is None:
        return float(np.abs(b[1]).sum()) * b_scale
    if b is None:
        return float(np.abs(a[1]).sum())
    lo, diff = _sum_blocks([a, (b[0], b[1], -b_scale)])
    return float(np.abs(diff).sum())


def tv_distance(a, b) -> Measured:
    """Half the l1 distance; exact (as a float of the exact Fraction) when both are exact."""
    if a.spec != b.spec:
        raise SpecMismatchError("tv: distributions live on different groups")
    err = float(a.lost_mass + b.lost_mass)
    if a.mode == EXACT and b.mode == EXACT:
        ea, eb = a.entries, b.entries
        keys = set(ea) | set(eb)
        s = sum((abs(ea.get(k, 0) - eb.get(k, 0)) for k in keys), Fraction(0))
        return Measured(s / 2, err)
    total = 0.0
    for x in sorted(set(a.cosets()) | set(b.cosets())):
        total += _abs_diff_sum(a.block(x), b.block(x))
    return Measured(min(1.0, total / 2), err)


def tv_to_gaussian(dist, g) -> Measured:
    """TV between a lattice distribution and a GaussianOnGroup on the same spec.

    Every coset is compared, including those where ``dist`` has no mass; the
    Gaussian is evaluated on the union of its window and the support box.
    """
    if dist.spec != g.spec:
        raise SpecMismatchError("tv: distribution and Gaussian live on different groups")
    total = 0.0
    for x in range(dist.spec.order):
        blk = dist.block(x)
        if blk is None:
            lo, hi = g.lo, g.hi
        else:
            lo = np.minimum(g.lo, blk[0])
            hi = np.maximum(g.hi, blk[0] + np.array(blk[1].shape) - 1)
        gb = (lo, g.block(x, lo, hi))
        total += _abs_diff_sum(gb, blk)
    return Measured(min(1.0, total / 2), float(dist.lost_mass) + g.tail)


# -- budgets ----------------------------------------------------------------------------------


class BudgetExceededError(MemoryError):
    def __init__(self, message: str, feasible_n: int):
        super().__init__(message)
        self.feasible_n = feasible_n


def estimate_bytes(sigma: np.ndarray, n: int, n_cosets: int, max_step: float) -> float:
    """Working-set estimate for a float run: 6 sigma sqrt(n) per axis, three live copies."""
    sd = np.sqrt(np.maximum(np.diag(np.asarray(sigma, dtype=float)), 0.0))
    width = np.minimum(2 * 6 * sd * math.sqrt(n), 2 * max_step * n) + 1
    return 3 * 8 * n_cosets * float(np.prod(width))


def check_budget(sigma: np.ndarray, n: int, n_cosets: int, max_step: float, budget_bytes: float):
    need = estimate_bytes(sigma, n, n_cosets, max_step)
    if need <= budget_bytes:
        return
    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if estimate_bytes(sigma, mid, n_cosets, max_step) <= budget_bytes:
            lo = mid
        else:
            hi = mid - 1
    raise BudgetExceededError(
        f"estimated {need / 2**20:.1f} MiB at n={n} exceeds the budget of "
        f"{budget_bytes / 2**20:.1f} MiB; feasible up to n={lo}", lo)
