"""The weighted quotient diagram of a random walk.

Vertices are the finite quotient F; for every vertex ``x`` and every label
``s`` in supp(mu) and its inverses there is an edge ``(x, s)`` ending at
``x s.x`` with weight mu(s) and lattice displacement alpha(x, s).  One-forms
and vertex functions are numpy arrays of shape ``(#F, #labels)`` and
``(#F,)``: object arrays of Fractions in exact mode, float64 otherwise.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .group import Element, GroupSpec
from .linalg import SingularSystemError, fraction_zeros, solve_consistent
from .measure import EXACT, FiniteMeasure


class ReducibleDiagramError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WeightedDiagram:
    measure: FiniteMeasure
    labels: tuple[Element, ...]
    reverse: np.ndarray  # label index of s^-1
    terminus: np.ndarray  # (#F, #labels) ints
    weight: np.ndarray  # (#labels,) mu(s), zero off the support
    phi: np.ndarray  # (#F, #labels, m) ints
    stationary: np.ndarray  # (#F,)
    conductance: np.ndarray  # (#F, #labels)

    @property
    def spec(self) -> GroupSpec:
        return self.measure.spec

    @property
    def exact(self) -> bool:
        return self.measure.mode == EXACT

    @property
    def n_vertices(self) -> int:
        return self.terminus.shape[0]

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def zero_form(self) -> np.ndarray:
        if self.exact:
            return fraction_zeros(self.n_vertices, self.n_labels)
        return np.zeros((self.n_vertices, self.n_labels))

    def transition_matrix(self) -> np.ndarray:
        n = self.n_vertices
        p = fraction_zeros(n, n) if self.exact else np.zeros((n, n))
        for x in range(n):
            for k in range(self.n_labels):
                p[x, self.terminus[x, k]] += self.weight[k]
        return p

    def is_one_form(self, omega: np.ndarray, tol: float = 0.0) -> bool:
        for x in range(self.n_vertices):
            for k in range(self.n_labels):
                y, kr = self.terminus[x, k], self.reverse[k]
                if abs(omega[y, kr] + omega[x, k]) > tol:
                    return False
        return True

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["vertex", "label", "terminus", "weight", "phi_components"])
        for x in range(self.n_vertices):
            for k, s in enumerate(self.labels):
                w.writerow([x, f"{list(s.v)}@{s.x}", int(self.terminus[x, k]), self.weight[k],
                            " ".join(str(int(c)) for c in self.phi[x, k])])
        return buf.getvalue()


def _strongly_connected(p: np.ndarray) -> bool:
    n = p.shape[0]
    adj = [[y for y in range(n) if p[x, y] != 0] for x in range(n)]
    radj = [[x for x in range(n) if p[x, y] != 0] for y in range(n)]
    for graph in (adj, radj):
        seen = {0}
        stack = [0]
        while stack:
            for y in graph[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != n:
            return False
    return True


def stationary_distribution(p: np.ndarray, exact: bool) -> np.ndarray:
    n = p.shape[0]
    one = Fraction(1) if exact else 1.0
    # pi (I - P) = 0 and sum(pi) = 1, as a tall consistent system in pi
    a = (np.eye(n, dtype=object) * one if exact else np.eye(n)) - p
    a = np.vstack([a.T, np.full((1, n), one, dtype=object if exact else float)])
    b = np.array([one * 0] * n + [one], dtype=object if exact else float)
    try:
        return solve_consistent(a, b)
    except SingularSystemError as exc:
        raise ReducibleDiagramError("quotient chain has no unique stationary law") from exc


def build_diagram(mu: FiniteMeasure) -> WeightedDiagram:
    spec = mu.spec
    n = spec.order
    labels = sorted(set(mu.support) | {spec.invert(s) for s in mu.support})
    index = {s: k for k, s in enumerate(labels)}
    reverse = np.array([index[spec.invert(s)] for s in labels], dtype=np.int64)
    terminus = np.array([[spec.table(x, s.x) for s in labels] for x in range(n)], dtype=np.int64)
    phi = np.array([[spec.displacement(x, s) for s in labels] for x in range(n)],
                   dtype=np.int64).reshape(n, len(labels), spec.m)
    if mu.mode == EXACT:
        weight = np.array([mu(s) for s in labels], dtype=object)
    else:
        weight = np.array([mu(s) for s in labels], dtype=float)

    d = WeightedDiagram(mu, tuple(labels), reverse, terminus, weight, phi,
                        stationary=np.empty(0), conductance=np.empty(0))
    p = d.transition_matrix()
    if not _strongly_connected(p):
        raise ReducibleDiagramError("quotient chain is reducible: support cannot generate the group")
    pi = stationary_distribution(p, mu.mode == EXACT)
    if mu.mode == EXACT:
        if any(q != Fraction(1, n) for q in pi):
            raise ReducibleDiagramError(f"stationary law {list(pi)} is not uniform")
    elif np.max(np.abs(pi - 1.0 / n)) > 1e-12:
        raise ReducibleDiagramError(f"stationary law {pi} is not uniform")
    cond = np.outer(pi, weight)
    object.__setattr__(d, "stationary", pi)
    object.__setattr__(d, "conductance", cond)
    return d


def _to_vec(v: Sequence, m: int, exact: bool) -> np.ndarray:
    if len(v) != m:
        raise ValueError(f"vector of length {len(v)} given, lattice rank is {m}")
    if exact:
        return np.array([Fraction(c) for c in v], dtype=object)
    return np.asarray(v, dtype=float)


def hat_form(d: WeightedDiagram, v: Sequence) -> np.ndarray:
    """The one-form (x, s) -> <v, alpha(x, s)>."""
    exact = d.exact and not any(isinstance(c, float) for c in v)
    vec = _to_vec(v, d.spec.m, exact)
    phi = d.phi.astype(object) if exact else d.phi.astype(float)
    out = phi @ vec
    if not exact:
        return np.asarray(out, dtype=float)
    return out


def chi_c(d: WeightedDiagram, omega: np.ndarray):
    return (d.conductance * omega).sum()


def drift_vector(d: WeightedDiagram) -> np.ndarray:
    """zeta = sum_e c(e) Phi_e."""
    phi = d.phi.astype(object) if d.exact else d.phi.astype(float)
    return np.einsum("xk,xkj->j", d.conductance, phi) if not d.exact else \
        np.array([(d.conductance * phi[:, :, j]).sum() for j in range(d.spec.m)], dtype=object)
