"""Virtually abelian groups as extensions 1 -> Z^m -> G -> F -> 1.

An element is a pair ``(v, x)`` with ``v`` in Z^m and ``x`` an index into the
finite quotient F.  Multiplication is

    (v, x)(w, y) = (v + Ad(x) w + tau(x, y), x y)

where ``Ad`` is an integer representation of F and ``tau`` a normalized
2-cocycle (identically zero for semidirect products).  Coset representatives
are fixed to ``(0, x)``, so the lattice coordinate of an element is simply its
``v`` part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .linalg import as_fraction_matrix, rank

Vector = tuple[int, ...]


class GroupSpecError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Element:
    """Group element ``(v, x)``; ordering is lexicographic on ``(x, v)``."""

    x: int
    v: Vector

    def __repr__(self) -> str:
        return f"Element(v={list(self.v)}, x={self.x})"


def _vadd(*vs: Sequence[int]) -> Vector:
    return tuple(int(sum(c)) for c in zip(*vs))


def _matvec(mat: tuple[Vector, ...], v: Sequence[int]) -> Vector:
    return tuple(sum(a * b for a, b in zip(row, v)) for row in mat)


@dataclass(frozen=True)
class FiniteGroupTable:
    order: int
    mul: tuple[tuple[int, ...], ...]
    identity: int = field(init=False)
    inverse: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        n = self.order
        if n < 1 or len(self.mul) != n or any(len(row) != n for row in self.mul):
            raise GroupSpecError("mul: table must be order x order")
        if any(not 0 <= c < n for row in self.mul for c in row):
            raise GroupSpecError("mul: entries must be element indices")
        ids = [e for e in range(n) if all(self.mul[e][a] == a == self.mul[a][e] for a in range(n))]
        if not ids:
            raise GroupSpecError("mul: no identity element")
        e = ids[0]
        inv = []
        for a in range(n):
            cands = [b for b in range(n) if self.mul[a][b] == e and self.mul[b][a] == e]
            if not cands:
                raise GroupSpecError(f"mul: element {a} has no inverse")
            inv.append(cands[0])
        for a, b, c in product(range(n), repeat=3):
            if self.mul[self.mul[a][b]][c] != self.mul[a][self.mul[b][c]]:
                raise GroupSpecError(f"mul: not associative at ({a},{b},{c})")
        object.__setattr__(self, "identity", e)
        object.__setattr__(self, "inverse", tuple(inv))

    def __call__(self, a: int, b: int) -> int:
        return self.mul[a][b]


@dataclass(frozen=True)
class GroupSpec:
    """Extension data (m, F, Ad, tau), validated on construction.

    ``ad[x]`` is the m x m integer matrix of the conjugation action of ``x``
    on the lattice; ``tau[x][y]`` the factor set.  ``factors`` is set for
    direct products built by :func:`product_spec`.
    """

    m: int
    table: FiniteGroupTable
    ad: tuple[tuple[Vector, ...], ...]
    tau: tuple[tuple[Vector, ...], ...]
    name: str = ""
    factors: Optional[tuple["GroupSpec", "GroupSpec"]] = field(default=None, compare=False)

    def __post_init__(self):
        m, n = self.m, self.table.order
        if m < 0:
            raise GroupSpecError("m: must be nonnegative")
        if len(self.ad) != n or any(len(a) != m or any(len(r) != m for r in a) for a in self.ad):
            raise GroupSpecError("ad: need one m x m matrix per finite element")
        if len(self.tau) != n or any(len(r) != n or any(len(t) != m for t in r) for r in self.tau):
            raise GroupSpecError("tau: need an m-vector for every pair of finite elements")
        e = self.table.identity
        eye = tuple(tuple(int(i == j) for j in range(m)) for i in range(m))
        if self.ad[e] != eye:
            raise GroupSpecError("ad: Ad(identity) must be the identity matrix")
        mats = [np.array(a, dtype=np.int64).reshape(m, m) for a in self.ad]
        for x, y in product(range(n), repeat=2):
            if not np.array_equal(mats[x] @ mats[y], mats[self.table(x, y)]):
                raise GroupSpecError(f"ad: not a homomorphism at ({x},{y})")
        for x in range(n):
            if m and round(abs(np.linalg.det(mats[x]))) != 1:
                raise GroupSpecError(f"ad: matrix {x} is not invertible over the integers")
        zero = (0,) * m
        for x in range(n):
            if self.tau[e][x] != zero or self.tau[x][e] != zero:
                raise GroupSpecError("tau: must vanish when either argument is the identity")
        for x, y, z in product(range(n), repeat=3):
            lhs = _vadd(self.tau[x][y], self.tau[self.table(x, y)][z])
            rhs = _vadd(_matvec(self.ad[x], self.tau[y][z]), self.tau[x][self.table(y, z)])
            if lhs != rhs:
                raise GroupSpecError(f"tau: cocycle identity fails at ({x},{y},{z})")

    # -- elements -----------------------------------------------------------------

    @property
    def order(self) -> int:
        return self.table.order

    @property
    def is_split(self) -> bool:
        zero = (0,) * self.m
        return all(t == zero for row in self.tau for t in row)

    def identity(self) -> Element:
        return Element(self.table.identity, (0,) * self.m)

    def element(self, v: Sequence[int], x: int) -> Element:
        v = tuple(int(c) for c in v)
        if len(v) != self.m:
            raise GroupSpecError(f"element: lattice part has length {len(v)}, expected {self.m}")
        if not 0 <= x < self.order:
            raise GroupSpecError(f"element: finite part {x} out of range")
        return Element(x, v)

    def lattice(self, v: Sequence[int]) -> Element:
        return self.element(v, self.table.identity)

    def _check(self, g: Element) -> None:
        if len(g.v) != self.m or not 0 <= g.x < self.order:
            raise GroupSpecError(f"{g!r} does not belong to a group with m={self.m}, #F={self.order}")

    def multiply(self, g: Element, h: Element) -> Element:
        self._check(g)
        self._check(h)
        v = _vadd(g.v, _matvec(self.ad[g.x], h.v), self.tau[g.x][h.x])
        return Element(self.table(g.x, h.x), v)

    def invert(self, g: Element) -> Element:
        self._check(g)
        y = self.table.inverse[g.x]
        w = _matvec(self.ad[y], _vadd(g.v, self.tau[g.x][y]))
        return Element(y, tuple(-c for c in w))

    def displacement(self, x: int, g: Element) -> Vector:
        """Lattice shift picked up when right-multiplying coset rep ``x`` by ``g``."""
        return _vadd(_matvec(self.ad[x], g.v), self.tau[x][g.x])

    def cocycle_alpha(self, x: int, g: Element) -> tuple[Vector, int]:
        """Return ``(alpha(x, g), x^g)`` where ``x g = alpha(x, g) x^g``."""
        self._check(g)
        return self.displacement(x, g), self.table(x, g.x)

    def transfer(self, g: Element) -> Vector:
        self._check(g)
        return _vadd(*(self.displacement(x, g) for x in range(self.order))) if self.m else ()

    # -- the averaged action ------------------------------------------------------

    def normalized_transfer(self) -> np.ndarray:
        """(1/#F) sum_f Ad(f), as an exact m x m Fraction matrix."""
        total = sum(as_fraction_matrix(a) for a in self.ad)
        return total / Fraction(self.order)

    def invariant_form(self) -> np.ndarray:
        """B = sum_f Ad(f)^T Ad(f); the F-invariant inner product used for adjoints."""
        return sum(as_fraction_matrix(a).T @ as_fraction_matrix(a) for a in self.ad)

    def transfer_rank(self) -> int:
        return rank(self.normalized_transfer()) if self.m else 0

    def hom_onto_z(self) -> bool:
        """True iff the normalized transfer has nonzero image (rank over Q)."""
        return self.transfer_rank() > 0

    # -- products -----------------------------------------------------------------

    def pair(self, g1: Element, g2: Element) -> Element:
        if self.factors is None:
            raise GroupSpecError("pair: not a product spec")
        a, b = self.factors
        a._check(g1)
        b._check(g2)
        return Element(g1.x * b.order + g2.x, g1.v + g2.v)

    def split(self, g: Element) -> tuple[Element, Element]:
        if self.factors is None:
            raise GroupSpecError("split: not a product spec")
        a, b = self.factors
        x1, x2 = divmod(g.x, b.order)
        return Element(x1, g.v[: a.m]), Element(x2, g.v[a.m:])

    def to_json(self) -> dict:
        out = {
            "m": self.m,
            "f_order": self.order,
            "mul": [list(r) for r in self.table.mul],
            "ad": [[list(r) for r in a] for a in self.ad],
        }
        if not self.is_split:
            out["tau"] = [[list(t) for t in row] for row in self.tau]
        return out


def make_spec(m: int, mul: Sequence[Sequence[int]], ad: Sequence, tau: Optional[Sequence] = None,
              name: str = "") -> GroupSpec:
    table = FiniteGroupTable(len(mul), tuple(tuple(int(c) for c in r) for r in mul))
    ad_t = tuple(tuple(tuple(int(c) for c in row) for row in a) for a in ad)
    n = table.order
    if tau is None:
        tau_t = tuple(tuple((0,) * m for _ in range(n)) for _ in range(n))
    else:
        tau_t = tuple(tuple(tuple(int(c) for c in t) for t in row) for row in tau)
    return GroupSpec(m, table, ad_t, tau_t, name=name)


def product_spec(a: GroupSpec, b: GroupSpec) -> GroupSpec:
    """Direct product; finite index ``x1 * #F_b + x2``, lattice ``v1 ++ v2``."""
    na, nb = a.order, b.order
    mul = [[a.table(x1, y1) * nb + b.table(x2, y2)
            for y1 in range(na) for y2 in range(nb)]
           for x1 in range(na) for x2 in range(nb)]
    ad = []
    for x1 in range(na):
        for x2 in range(nb):
            rows = [tuple(r) + (0,) * b.m for r in a.ad[x1]]
            rows += [(0,) * a.m + tuple(r) for r in b.ad[x2]]
            ad.append(rows)
    tau = [[a.tau[x1][y1] + b.tau[x2][y2] for y1 in range(na) for y2 in range(nb)]
           for x1 in range(na) for x2 in range(nb)]
    name = f"{a.name}*{b.name}" if a.name and b.name else ""
    spec = make_spec(a.m + b.m, mul, ad, tau, name=name)
    object.__setattr__(spec, "factors", (a, b))
    return spec


def integer_span_is_full(vectors: Sequence[Sequence[int]], m: int) -> bool:
    """Do the vectors generate Z^m as a group?  Checked through the Smith form."""
    if m == 0:
        return True
    vecs = [list(v) for v in vectors if any(v)]
    if len(vecs) < m:
        return False
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import smith_normal_form

    snf = smith_normal_form(Matrix(vecs).T, domain=ZZ)
    diag = [snf[i, i] for i in range(min(snf.shape))]
    return len(diag) >= m and all(abs(d) == 1 for d in diag[:m])
