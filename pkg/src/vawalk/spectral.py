"""Asymptotic statistics of a walk: drift, covariance and the comparison Gaussian.

The covariance comes from harmonic parts of the coordinate forms; the
transfer-operator eigenvalue gives an independent numerical route to the
same matrix (its Hessian at 0 is -4 pi^2 Sigma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np

from .diagram import WeightedDiagram, build_diagram, chi_c, drift_vector, hat_form
from .group import Element, GroupSpec
from .harmonic import harmonic_decompose
from .linalg import column_space_basis, fraction_identity, gram_schmidt, rank
from .measure import FiniteMeasure, PeriodReport, detect_period


# -- covariance ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


@dataclass(frozen=True)
class CltReport:
    zeta: np.ndarray
    sigma: np.ndarray
    transfer_projector: np.ndarray
    hom_onto_z: bool
    period: PeriodReport

    def to_json(self) -> dict:
        return {
            "zeta": [_fmt(c) for c in self.zeta],
            "sigma": [[_fmt(c) for c in row] for row in self.sigma],
            "projector": [[_fmt(c) for c in row] for row in self.transfer_projector],
            "hom_onto_Z": self.hom_onto_z,
            "period": self.period.period,
        }

    def sigma_float(self) -> np.ndarray:
        return np.array(self.sigma, dtype=float)

    def zeta_float(self) -> np.ndarray:
        return np.array(self.zeta, dtype=float)


def harmonic_basis_forms(d: WeightedDiagram) -> list[np.ndarray]:
    m = d.spec.m
    one = Fraction(1) if d.exact else 1.0
    forms = []
    for i in range(m):
        v = [one * 0] * m
        v[i] = one
        forms.append(harmonic_decompose(d, hat_form(d, v)).u)
    return forms


def covariance_matrix(d: WeightedDiagram) -> np.ndarray:
    """<e_i, Sigma e_j> = sum_e u_i u_j c - chi_c(u_i) chi_c(u_j)."""
    us = harmonic_basis_forms(d)
    m = len(us)
    chis = [chi_c(d, u) for u in us]
    sigma = np.empty((m, m), dtype=object if d.exact else float)
    for i in range(m):
        for j in range(i, m):
            s = (us[i] * us[j] * d.conductance).sum() - chis[i] * chis[j]
            sigma[i, j] = sigma[j, i] = s
    return sigma


def covariance(d: WeightedDiagram, period_bound: int = 64) -> CltReport:
    spec = d.spec
    return CltReport(
        zeta=drift_vector(d),
        sigma=covariance_matrix(d),
        transfer_projector=spec.normalized_transfer(),
        hom_onto_z=spec.hom_onto_z(),
        period=detect_period(d.measure, period_bound),
    )


# -- adapted bases and the product structure ---------------------------------------------


def adapted_basis(spec: GroupSpec) -> tuple[np.ndarray, int]:
    """Columns: a B-orthogonal basis of im(P), then of its B-complement ker(P).

    Returns the (exact) basis matrix and the dimension of im(P).
    """
    p = spec.normalized_transfer()
    b = spec.invariant_form()
    m = spec.m
    img = [c for c in column_space_basis(p).T] if rank(p) else []
    comp_mat = fraction_identity(m) - p
    comp = [c for c in column_space_basis(comp_mat).T] if rank(comp_mat) else []
    cols = gram_schmidt(img, b) + gram_schmidt(comp, b)
    return np.array(cols, dtype=object).T.reshape(m, m), len(img)


def in_adapted_coordinates(sigma: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Covariance of the coordinates c with Phi = basis @ c."""
    from .linalg import solve_consistent

    m = basis.shape[0]
    inv = np.array([solve_consistent(basis, col) for col in fraction_identity(m).T],
                   dtype=object).T
    return inv @ sigma @ inv.T


def product_zero_mask(spec: GroupSpec) -> tuple[np.ndarray, np.ndarray]:
    """Adapted basis of a product spec and the entries forced to vanish.

    Cross-factor entries vanish unless both indices lie in the image of the
    respective normalized transfer.
    """
    a, b = spec.factors
    wa, ka = adapted_basis(a)
    wb, kb = adapted_basis(b)
    m = a.m + b.m
    w = np.empty((m, m), dtype=object)
    w.fill(Fraction(0))
    w[: a.m, : a.m] = wa
    w[a.m:, a.m:] = wb
    mask = np.zeros((m, m), dtype=bool)
    for i in range(a.m):
        for j in range(a.m, m):
            if not (i < ka and j - a.m < kb):
                mask[i, j] = mask[j, i] = True
    return w, mask


@dataclass(frozen=True)
class StructurePrediction:
    matrix: Optional[np.ndarray]
    basis: np.ndarray
    zero_mask: np.ndarray


def structure_prediction(mu: FiniteMeasure, rho, closed_form: bool = True):
    """Predicted covariance of pi^rho.

    For split extensions: [[S, (1-rho) P S P^T], [(1-rho) P S P^T, S]] with S the
    covariance of mu and P the normalized transfer (standard coordinates).
    With ``closed_form=False`` the zero pattern in the adapted basis is
    returned instead, valid for any extension.
    """
    from .group import product_spec

    spec = mu.spec
    if closed_form and not spec.is_split:
        raise ValueError("closed form needs a split extension (tau = 0)")
    basis, mask = product_zero_mask(product_spec(spec, spec))
    if not closed_form:
        return StructurePrediction(None, basis, mask)
    rho = rho if isinstance(rho, float) or mu.mode != "exact" else Fraction(rho)
    s = covariance_matrix(build_diagram(mu))
    p = spec.normalized_transfer()
    if mu.mode != "exact":
        p = p.astype(float)
    off = (1 - rho) * (p @ s @ p.T)
    m = spec.m
    out = np.empty((2 * m, 2 * m), dtype=s.dtype)
    out[:m, :m] = s
    out[m:, m:] = s
    out[:m, m:] = off
    out[m:, :m] = off.T
    return out


# -- transfer operator oracle ------------------------------------------------------------


class EigenvalueDegeneracyError(ArithmeticError):
    pass


def twisted_operator(d: WeightedDiagram, v: Sequence[float]) -> np.ndarray:
    """L[x, y] = sum_{s: x s = y} mu(s) exp(2 pi i <v, alpha(x, s)>)."""
    v = np.asarray(v, dtype=float)
    n = d.n_vertices
    phase = np.exp(2j * np.pi * (d.phi.astype(float) @ v))
    vals = np.asarray(d.weight, dtype=float)[None, :] * phase
    mat = np.zeros((n, n), dtype=complex)
    np.add.at(mat, (np.repeat(np.arange(n), d.n_labels), d.terminus.ravel()), vals.ravel())
    return mat


def _twisted_operator_mp(d: WeightedDiagram, v: Sequence[float]):
    n = d.n_vertices
    mat = mpmath.zeros(n, n)
    weight = [mpmath.mpf(Fraction(w).numerator) / Fraction(w).denominator for w in d.weight]
    for x in range(n):
        for k in range(d.n_labels):
            if weight[k] == 0:
                continue
            angle = 2 * mpmath.pi * mpmath.fsum(mpmath.mpf(float(c)) * int(a)
                                                for c, a in zip(v, d.phi[x, k]))
            mat[x, int(d.terminus[x, k])] += weight[k] * mpmath.expj(angle)
    return mat


def leading_exponent(d: WeightedDiagram, v: Sequence[float], gap: float = 1e-3,
                     dps: Optional[int] = None) -> complex:
    """log of the eigenvalue of the twisted operator continuing 1 at v = 0.

    With ``dps`` the eigenproblem is solved in mpmath at that many digits, so
    that finite differences are limited by truncation only.  Raises when
    another eigenvalue comes within ``gap`` of the selected one.
    """
    if dps is None:
        eig = np.linalg.eigvals(twisted_operator(d, v))
    else:
        with mpmath.workdps(dps):
            mat = _twisted_operator_mp(d, v)
            vals = [mat[0, 0]] if mat.rows == 1 else mpmath.eig(mat, left=False, right=False)
            k = min(range(len(vals)), key=lambda i: abs(vals[i] - 1))
            lead = vals[k]
            others = [abs(vals[i] - lead) for i in range(len(vals)) if i != k]
            if others and min(others) < gap:
                raise EigenvalueDegeneracyError(f"eigenvalue {complex(lead)} is not isolated "
                                                f"at v={list(v)}")
            return complex(mpmath.log(lead))
    k = int(np.argmin(np.abs(eig - 1.0)))
    others = np.delete(eig, k)
    if others.size and np.min(np.abs(others - eig[k])) < gap:
        raise EigenvalueDegeneracyError(f"eigenvalue {eig[k]} is not isolated at v={list(v)}")
    return complex(np.log(eig[k]))


HIGH_DPS = 40


def fd_gradient(d: WeightedDiagram, h: float = 1e-4, dps: Optional[int] = HIGH_DPS) -> np.ndarray:
    m = d.spec.m
    out = np.empty(m, dtype=complex)
    for k in range(m):
        e = np.zeros(m)
        e[k] = h
        out[k] = (leading_exponent(d, e, dps=dps) - leading_exponent(d, -e, dps=dps)) / (2 * h)
    return out


def _central_hessian(d: WeightedDiagram, h: float, dps: Optional[int]) -> np.ndarray:
    m = d.spec.m
    eye = np.eye(m) * h

    def beta(v):
        return leading_exponent(d, v, dps=dps)

    b0 = beta(np.zeros(m))
    hess = np.empty((m, m), dtype=complex)
    for i in range(m):
        hess[i, i] = (beta(eye[i]) - 2 * b0 + beta(-eye[i])) / h ** 2
        for j in range(i + 1, m):
            pp, pm = beta(eye[i] + eye[j]), beta(eye[i] - eye[j])
            mp, mm = beta(-eye[i] + eye[j]), beta(-eye[i] - eye[j])
            hess[i, j] = hess[j, i] = (pp - pm - mp + mm) / (4 * h ** 2)
    return hess


def fd_hessian(d: WeightedDiagram, h: float = 1e-4, richardson: bool = True,
               dps: Optional[int] = HIGH_DPS) -> np.ndarray:
    """Central-difference Hessian of the leading exponent at 0.

    With ``richardson`` the steps h and h/2 are combined to cancel the h^2
    truncation term, which at h = 1e-4 is of order (2 pi)^4 h^2 / 12 ~ 1e-6.
    Eigenvalues are taken at ``dps`` digits (None: double precision, where
    roundoff of order 1e-16 / h^2 is comparable to that term).
    """
    coarse = _central_hessian(d, h, dps)
    if not richardson:
        return coarse
    return (4 * _central_hessian(d, h / 2, dps) - coarse) / 3


# -- the comparison Gaussian -------------------------------------------------------------

TAIL_MASS = 1e-10


class NotPositiveDefiniteError(ValueError):
    pass


def gaussian_density(points: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """xi_cov at each row of ``points`` (shape (..., m))."""
    m = cov.shape[0]
    inv = np.linalg.inv(cov)
    q = np.einsum("...i,ij,...j->...", points, inv, points)
    return np.exp(-0.5 * q) / math.sqrt((2 * math.pi) ** m * np.linalg.det(cov))


@dataclass(frozen=True)
class GaussianOnGroup:
    """pi(x) xi_{n Sigma}(v - n zeta) / Z on the lattice window, for every coset x.

    ``lo``/``hi`` bound the window (inclusive); ``tail`` certifies the mass of
    the unnormalized lattice Gaussian outside it.
    """

    spec: GroupSpec
    n: int
    sigma: np.ndarray
    zeta: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    normalizer: float
    tail: float

    @property
    def center(self) -> np.ndarray:
        return self.n * self.zeta

    @property
    def cov(self) -> np.ndarray:
        return self.n * self.sigma

    def lattice_block(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Lattice-only masses (without the pi(x) factor) on the box [lo, hi]."""
        axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).astype(float)
        return gaussian_density(grid - self.center, self.cov) / self.normalizer

    def block(self, x: int, lo=None, hi=None) -> np.ndarray:
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        return self.lattice_block(lo, hi) / self.spec.order

    def mass(self, g: Element) -> float:
        v = np.asarray(g.v, dtype=float)
        return float(gaussian_density(v - self.center, self.cov)) / self.normalizer / self.spec.order

    def total_window_mass(self) -> float:
        return float(self.lattice_block(self.lo, self.hi).sum())


def gaussian_window(cov: np.ndarray, center: np.ndarray, tail: float = TAIL_MASS):
    """Box [lo, hi] outside which a N(center, cov) vector lands with prob <= tail.

    Per-axis Chernoff bound P(|X_i - c_i| > t) <= 2 exp(-t^2 / (2 cov_ii)) with
    the budget split evenly over the axes.
    """
    m = cov.shape[0]
    var = np.diag(cov)
    t = np.sqrt(2 * var * math.log(2 * m / tail))
    lo = np.floor(center - t).astype(np.int64) - 1
    hi = np.ceil(center + t).astype(np.int64) + 1
    bound = float(np.sum(2 * np.exp(-((center - lo) ** 2) / (2 * var))))
    return lo, hi, bound


def gaussian_measure(spec: GroupSpec, n: int, sigma, zeta) -> GaussianOnGroup:
    sigma = np.array(sigma, dtype=float).reshape(spec.m, spec.m)
    zeta = np.array(zeta, dtype=float).reshape(spec.m)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not np.allclose(sigma, sigma.T) or np.min(np.linalg.eigvalsh(sigma)) <= 0:
        raise NotPositiveDefiniteError(f"sigma={sigma.tolist()} is not positive definite")
    lo, hi, tail = gaussian_window(n * sigma, n * zeta)
    g = GaussianOnGroup(spec, n, sigma, zeta, lo, hi, 1.0, tail)
    z = g.total_window_mass()
    return GaussianOnGroup(spec, n, sigma, zeta, lo, hi, z, tail)
