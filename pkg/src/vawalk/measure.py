"""Finitely supported probability measures on a GroupSpec."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from .group import Element, GroupSpec, integer_span_is_full, product_spec

log = logging.getLogger(__name__)

Weight = Union[Fraction, float]

EXACT = "exact"
FLOAT = "float"
DEFAULT_PERIOD_BOUND = 64


class MeasureError(ValueError):
    pass


def as_weight(p, mode: str) -> Weight:
    if mode == EXACT:
        if isinstance(p, float):
            raise MeasureError("float weight given to an exact measure")
        return Fraction(p)
    return float(p)


@dataclass(frozen=True)
class FiniteMeasure:
    """Probability measure with finite support, stored sorted by element.

    ``mode`` is ``"exact"`` (Fraction weights, sum exactly 1) or ``"float"``.
    Atoms with zero weight are dropped.
    """

    spec: GroupSpec
    atoms: tuple[tuple[Element, Weight], ...]
    mode: str = EXACT
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seen = set()
        for g, p in self.atoms:
            if g in seen:
                raise MeasureError(f"duplicate atom {g!r}")
            seen.add(g)
            if len(g.v) != self.spec.m or not 0 <= g.x < self.spec.order:
                raise MeasureError(f"atom {g!r} does not belong to the group")
            if p < 0:
                raise MeasureError(f"negative weight at {g!r}")
        total = sum(p for _, p in self.atoms)
        if self.mode == EXACT:
            if total != 1:
                raise MeasureError(f"weights sum to {total}, not 1")
        elif self.mode == FLOAT:
            if abs(total - 1.0) > 1e-12:
                raise MeasureError(f"weights sum to {total!r}, not 1")
        else:
            raise MeasureError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "_index", dict(self.atoms))

    @classmethod
    def from_mapping(cls, spec: GroupSpec, weights: Mapping[Element, Weight],
                     mode: Optional[str] = None) -> "FiniteMeasure":
        if mode is None:
            mode = FLOAT if any(isinstance(p, float) for p in weights.values()) else EXACT
        atoms = tuple(sorted((g, as_weight(p, mode)) for g, p in weights.items() if p != 0))
        return cls(spec, atoms, mode)

    @classmethod
    def uniform(cls, spec: GroupSpec, elements: Iterable[Element]) -> "FiniteMeasure":
        elements = list(dict.fromkeys(elements))
        w = Fraction(1, len(elements))
        return cls.from_mapping(spec, {g: w for g in elements})

    def __call__(self, g: Element) -> Weight:
        return self._index.get(g, self.zero)

    @property
    def zero(self) -> Weight:
        return Fraction(0) if self.mode == EXACT else 0.0

    @property
    def support(self) -> tuple[Element, ...]:
        return tuple(g for g, _ in self.atoms)

    def items(self):
        return iter(self.atoms)

    def total(self) -> Weight:
        return sum((p for _, p in self.atoms), self.zero)

    def to_float(self) -> "FiniteMeasure":
        if self.mode == FLOAT:
            return self
        return FiniteMeasure(self.spec, tuple((g, float(p)) for g, p in self.atoms), FLOAT)

    def is_symmetric(self) -> bool:
        return all(self(self.spec.invert(g)) == p for g, p in self.atoms)

    def marginal(self, i: int) -> "FiniteMeasure":
        """Pushforward to factor ``i`` (0 or 1) of a product spec."""
        if self.spec.factors is None:
            raise MeasureError("marginal: measure does not live on a product spec")
        acc: dict[Element, Weight] = {}
        for g, p in self.atoms:
            part = self.spec.split(g)[i]
            acc[part] = acc.get(part, self.zero) + p
        return FiniteMeasure.from_mapping(self.spec.factors[i], acc, self.mode)

    def to_json(self, group_ref=None) -> dict:
        def enc(p):
            return f"{p.numerator}/{p.denominator}" if isinstance(p, Fraction) else p

        return {
            "group": group_ref if group_ref is not None else self.spec.to_json(),
            "atoms": [{"v": list(g.v), "x": g.x, "p": enc(p)} for g, p in self.atoms],
        }


def _common_mode(*measures: FiniteMeasure) -> str:
    return EXACT if all(m.mode == EXACT for m in measures) else FLOAT


def product_measure(mu1: FiniteMeasure, mu2: FiniteMeasure,
                    spec: Optional[GroupSpec] = None) -> FiniteMeasure:
    spec = spec or product_spec(mu1.spec, mu2.spec)
    mode = _common_mode(mu1, mu2)
    acc = {spec.pair(g, h): p * q for g, p in mu1.items() for h, q in mu2.items()}
    return FiniteMeasure.from_mapping(spec, acc, mode)


def make_pi_rho(mu: FiniteMeasure, rho, spec: Optional[GroupSpec] = None) -> FiniteMeasure:
    """rho (mu x mu) + (1 - rho) diag(mu) on the square of the group.

    ``rho`` given as int/Fraction keeps an exact measure exact; a float
    ``rho`` yields a float measure.
    """
    if isinstance(rho, float):
        mode = FLOAT
    else:
        rho = Fraction(rho)
        mode = mu.mode
    if not 0 <= rho <= 1:
        raise MeasureError(f"rho={rho} outside [0, 1]")
    spec = spec or product_spec(mu.spec, mu.spec)
    acc: dict[Element, Weight] = {}
    for g, p in mu.items():
        for h, q in mu.items():
            w = rho * p * q
            if g == h:
                w += (1 - rho) * p
            acc[spec.pair(g, h)] = w
    return FiniteMeasure.from_mapping(spec, acc, mode)


# -- support-only diagnostics ---------------------------------------------------------


@dataclass(frozen=True)
class PeriodReport:
    period: Optional[int]
    witnesses: tuple[int, ...]
    bound: int

    @property
    def known(self) -> bool:
        return self.period is not None


def detect_period(mu: FiniteMeasure, n_max: int = DEFAULT_PERIOD_BOUND) -> PeriodReport:
    """gcd of the return times to the identity found among the supports of mu_n, n <= n_max.

    Stops early once the gcd reaches 1.  The result is only certified up to the
    search bound: a period p > 1 means no return time coprime to p was seen.
    """
    if n_max < 1:
        raise MeasureError("n_max must be >= 1")
    spec = mu.spec
    ident = spec.identity()
    supp = mu.support
    frontier = {ident}
    witnesses: list[int] = []
    g = 0
    for n in range(1, n_max + 1):
        frontier = {spec.multiply(a, s) for a in frontier for s in supp}
        if ident in frontier:
            witnesses.append(n)
            g = gcd(g, n)
            if g == 1:
                break
    return PeriodReport(g if witnesses else None, tuple(witnesses), n_max)


@dataclass(frozen=True)
class GenerationReport:
    depth: int
    cosets_reached: int
    covers_quotient: bool
    lattice_group_span: bool
    lattice_positive_span: bool
    reached: int

    @property
    def status(self) -> str:
        ok = self.covers_quotient and self.lattice_group_span and self.lattice_positive_span
        return "OK" if ok else "WARNING"


def _positively_spans(vectors: list[tuple[int, ...]], m: int) -> bool:
    """Is the convex cone of ``vectors`` all of R^m?"""
    if m == 0:
        return True
    if not vectors:
        return False
    a = np.array(vectors, dtype=float).T
    if np.linalg.matrix_rank(a) < m:
        return False
    from scipy.optimize import linprog

    # cone = R^m  iff  sum lambda_t t = 0 has a solution with every lambda_t >= 1
    k = a.shape[1]
    res = linprog(np.zeros(k), A_eq=a, b_eq=np.zeros(m), bounds=[(1, None)] * k, method="highs")
    return res.status == 0


def generation_diagnostics(mu: FiniteMeasure, depth: int = 4) -> GenerationReport:
    """Heuristic evidence that supp(mu) generates the group as a semigroup.

    Explores all products of at most ``depth`` support elements.  The lattice
    part is judged from the words landing in the identity coset: they must
    generate Z^m as a group (Smith form) and positively span R^m.  A WARNING
    means the search was inconclusive, not that generation fails.
    """
    if depth < 1:
        raise MeasureError("depth must be >= 1")
    spec = mu.spec
    supp = mu.support
    reached = set(supp)
    layer = set(supp)
    for _ in range(depth - 1):
        layer = {spec.multiply(a, s) for a in layer for s in supp} - reached
        reached |= layer
    cosets = {g.x for g in reached}
    e = spec.table.identity
    lattice = sorted({g.v for g in reached if g.x == e and any(g.v)})
    report = GenerationReport(
        depth=depth,
        cosets_reached=len(cosets),
        covers_quotient=len(cosets) == spec.order,
        lattice_group_span=integer_span_is_full(lattice, spec.m),
        lattice_positive_span=_positively_spans(lattice, spec.m),
        reached=len(reached),
    )
    if report.status != "OK":
        log.warning("generation diagnostics inconclusive at depth %d: %s", depth, report)
    return report
