"""Harmonic one-forms on a weighted diagram.

Every one-form splits uniquely as ``omega = u + df`` with ``u`` harmonic,
i.e. ``d*u + chi_c(u) = 0``.  The potential solves

    (I - P) f = d*omega + chi_c(omega),   <f, 1>_pi = 0

whose right-hand side always has zero pi-mean, so the system is consistent
for an irreducible chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .diagram import WeightedDiagram, chi_c
from .linalg import solve_consistent


def differential(d: WeightedDiagram, f: np.ndarray) -> np.ndarray:
    """df(x, s) = f(x s) - f(x)."""
    return f[d.terminus] - f[:, None]


def codifferential(d: WeightedDiagram, omega: np.ndarray) -> np.ndarray:
    """d*omega(x) = -(1/pi(x)) sum_s c(x, s) omega(x, s)."""
    return -(d.conductance * omega).sum(axis=1) / d.stationary


def transition(d: WeightedDiagram, f: np.ndarray) -> np.ndarray:
    """(P f)(x) = sum_s mu(s) f(x s)."""
    return (d.weight[None, :] * f[d.terminus]).sum(axis=1)


@dataclass(frozen=True)
class HarmonicDecomposition:
    u: np.ndarray
    f: np.ndarray
    residual: float


def harmonic_residual(d: WeightedDiagram, u: np.ndarray):
    r = codifferential(d, u) + chi_c(d, u)
    return max(abs(c) for c in r)


def _system(d: WeightedDiagram) -> np.ndarray:
    n = d.n_vertices
    p = d.transition_matrix()
    if d.exact:
        eye = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
        return np.vstack([eye - p, d.stationary[None, :]])
    return np.vstack([np.eye(n) - p, d.stationary[None, :]])


def harmonic_decompose(d: WeightedDiagram, omega: np.ndarray) -> HarmonicDecomposition:
    rhs = codifferential(d, omega) + chi_c(d, omega)
    mean = (rhs * d.stationary).sum()
    tol = 0 if d.exact else 1e-10
    if abs(mean) > tol:
        raise ArithmeticError(f"right-hand side has pi-mean {mean}; diagram is inconsistent")
    zero = Fraction(0) if d.exact else 0.0
    b = np.concatenate([rhs, np.array([zero], dtype=rhs.dtype)])
    f = solve_consistent(_system(d), b)
    if not d.exact:
        f = f.astype(float)
    u = omega - differential(d, f)
    return HarmonicDecomposition(u, f, float(harmonic_residual(d, u)))


def neumann_potential(d: WeightedDiagram, omega: np.ndarray, tol: float = 1e-13,
                      max_terms: int = 100_000) -> np.ndarray:
    """Float-only cross-check: f = sum_n P^n (d*omega + chi_c(omega)).

    The series converges only for an aperiodic quotient chain; terms are
    summed until the pi-centred term falls below ``tol``.
    """
    g = np.asarray(codifferential(d, omega) + chi_c(d, omega), dtype=float)
    pi = np.asarray(d.stationary, dtype=float)
    w = np.asarray(d.weight, dtype=float)
    f = np.zeros_like(g)
    term = g - g @ pi
    for _ in range(max_terms):
        f += term
        term = (w[None, :] * term[d.terminus]).sum(axis=1)
        if np.max(np.abs(term)) < tol:
            break
    else:
        raise ArithmeticError("Neumann series did not converge (periodic quotient chain?)")
    return f - f @ pi


def check_column_sums(d: WeightedDiagram, u: np.ndarray) -> np.ndarray:
    """Per-label sums over vertices; equal <v, transfer(s)> when u is harmonic for v-hat."""
    return u.sum(axis=0)
