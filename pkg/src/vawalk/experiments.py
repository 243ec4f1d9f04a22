"""TV curves: local CLT convergence, noise sensitivity and decoupling.

Every curve is a list of ``CurvePoint``; ``prediction`` carries the Gaussian
limit of the same quantity when one is available.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.linalg import block_diag, eigh

from .diagram import build_diagram
from .engine import (DEFAULT_PRUNE, ProductDistribution, averaged_distribution, check_budget,
                     check_mass, evolve, tv_distance, tv_to_gaussian)
from .group import GroupSpec, product_spec
from .measure import FLOAT, FiniteMeasure, make_pi_rho
from .spectral import NotPositiveDefiniteError, covariance, gaussian_measure

DEFAULT_BUDGET = 2 * 2 ** 30


@dataclass(frozen=True)
class CurvePoint:
    n: int
    rho: Optional[float]
    tv: float
    tv_error: float
    prediction: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.tv <= 1.0) or self.tv_error < 0:
            raise ValueError(f"invalid curve point: tv={self.tv}, error={self.tv_error}")


@dataclass
class RunOptions:
    prune: float = DEFAULT_PRUNE
    budget_bytes: float = DEFAULT_BUDGET
    threads: int = 1
    mode: str = FLOAT


# -- Gaussian limit ------------------------------------------------------------------------


def _check_pd(name: str, mat: np.ndarray) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or not np.allclose(mat, mat.T):
        raise NotPositiveDefiniteError(f"{name}: not a symmetric square matrix")
    if np.min(np.linalg.eigvalsh(mat)) <= 0:
        raise NotPositiveDefiniteError(f"{name}: not positive definite")


def _quadratic_form_sf(lam: np.ndarray, t: float, tol: float) -> float:
    """P(sum_i lam_i Z_i^2 > t) for independent standard normals (Imhof's inversion).

    The integrand is sin(g(u) - t u / 2) / (u r(u)) with g, r smooth; past a
    cut-off the oscillating factor is split off and handed to QAWF.
    """
    lam = lam[lam != 0]
    if lam.size == 0:
        return float(t < 0)

    def g(u):
        return 0.5 * np.sum(np.arctan(lam * u))

    def r(u):
        return u * np.prod((1 + (lam * u) ** 2) ** 0.25)

    def integrand(u):
        if u == 0:
            return 0.5 * (lam.sum() - t)
        return math.sin(g(u) - 0.5 * t * u) / r(u)

    cut = 20.0 / float(np.max(np.abs(lam)))
    head, _ = integrate.quad(integrand, 0, cut, limit=500, epsabs=tol, epsrel=0)
    w = 0.5 * t
    if abs(w) < 1e-12:
        tail, _ = integrate.quad(lambda u: math.sin(g(u)) / r(u), cut, np.inf,
                                 limit=500, epsabs=tol, epsrel=0)
    else:
        # u = cut + s: sin(G(s) - w s) = sin G cos(w s) - cos G sin(w s),
        # G(s) = g(cut + s) - w cut; QAWF needs a positive frequency
        sgn, aw = (1.0 if w > 0 else -1.0), abs(w)

        def big_g(x):
            return g(cut + x) - w * cut

        c, _ = integrate.quad(lambda x: math.sin(big_g(x)) / r(cut + x), 0, np.inf,
                              weight="cos", wvar=aw, epsabs=tol, limlst=200)
        s, _ = integrate.quad(lambda x: math.cos(big_g(x)) / r(cut + x), 0, np.inf,
                              weight="sin", wvar=aw, epsabs=tol, limlst=200)
        tail = c - sgn * s
    return 0.5 + (head + tail) / math.pi


def gaussian_limit_tv(sigma_rho, sigma_1, tol: float = 1e-8) -> float:
    """Half the L1 distance between centred Gaussian densities with the given covariances.

    After whitening by ``sigma_1`` the two laws are N(0, D) and N(0, I) with
    D diagonal; the set where the first density wins is a quadric, and both
    probabilities are tail probabilities of weighted chi-square sums.
    """
    a = np.array(sigma_rho, dtype=float)
    b = np.array(sigma_1, dtype=float)
    if a.shape != b.shape:
        raise ValueError("covariances have different shapes")
    _check_pd("sigma_rho", a)
    _check_pd("sigma_1", b)
    d = eigh(a, b, eigvals_only=True)
    d = np.where(np.abs(d - 1) < 1e-14, 1.0, d)
    if np.all(d == 1.0):
        return 0.0
    t = float(np.sum(np.log(d)))
    p_first = _quadratic_form_sf(d - 1, t, tol)
    p_second = _quadratic_form_sf(1 - 1 / d, t, tol)
    return float(min(1.0, max(0.0, p_first - p_second)))


# -- curves ---------------------------------------------------------------------------------


def _float_sigma(mu: FiniteMeasure) -> np.ndarray:
    return np.array(covariance(build_diagram(mu)).sigma, dtype=float)


def _max_step(mu: FiniteMeasure) -> float:
    spec = mu.spec
    return max((max((abs(c) for c in spec.displacement(x, s)), default=0)
                for x in range(spec.order) for s in mu.support), default=0)


def _rational(rho) -> Fraction:
    return rho if isinstance(rho, Fraction) else Fraction(str(rho))


def _checked(dist):
    check_mass(dist)
    return dist


def _map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def product_limit_prediction(nu: FiniteMeasure) -> Optional[float]:
    """Gaussian-limit TV between a product-spec walk and the product of its marginals."""
    sig = np.array(covariance(build_diagram(nu)).sigma, dtype=float)
    parts = [_float_sigma(nu.marginal(i)) for i in (0, 1)]
    try:
        return gaussian_limit_tv(sig, block_diag(*parts))
    except NotPositiveDefiniteError:
        return None


def noise_curve(mu: FiniteMeasure, rho_list: Sequence, n_list: Sequence[int],
                options: Optional[RunOptions] = None, predict: bool = True) -> list[CurvePoint]:
    """TV(pi^rho_n, mu_n x mu_n) for every rho and n."""
    opts = options or RunOptions()
    n_list = sorted(set(int(n) for n in n_list))
    spec2 = product_spec(mu.spec, mu.spec)
    sigma = _float_sigma(mu)
    workers = max(1, min(opts.threads, len(rho_list)))
    check_budget(block_diag(sigma, sigma), n_list[-1], spec2.order, _max_step(mu),
                 opts.budget_bytes / (workers + 1))
    base = {d.n: _checked(d) for d in evolve(mu, n_list, opts.mode, opts.prune)}

    def cell(rho):
        pi = make_pi_rho(mu, _rational(rho), spec2)
        pred = product_limit_prediction(pi) if predict else None
        out = []
        for d in evolve(pi, n_list, opts.mode, opts.prune):
            _checked(d)
            tv, err = tv_distance(d, ProductDistribution(spec2, base[d.n], base[d.n]))
            out.append(CurvePoint(d.n, float(rho), float(tv), err, pred))
        return out

    return [p for pts in _map(cell, list(rho_list), workers) for p in pts]


def decouple_curve(nu: FiniteMeasure, n_list: Sequence[int],
                   options: Optional[RunOptions] = None, predict: bool = True) -> list[CurvePoint]:
    """TV(nu_n, mu1_n x mu2_n) where mu1, mu2 are the marginals of ``nu``."""
    opts = options or RunOptions()
    spec = nu.spec
    if spec.factors is None:
        raise ValueError("decouple_curve needs a measure on a product spec")
    n_list = sorted(set(int(n) for n in n_list))
    sigma = np.array(covariance(build_diagram(nu)).sigma, dtype=float)
    check_budget(sigma, n_list[-1], spec.order, _max_step(nu), opts.budget_bytes)
    pred = product_limit_prediction(nu) if predict else None
    marg = [{d.n: _checked(d) for d in evolve(nu.marginal(i), n_list, opts.mode, opts.prune)}
            for i in (0, 1)]
    out = []
    for d in evolve(nu, n_list, opts.mode, opts.prune):
        _checked(d)
        tv, err = tv_distance(d, ProductDistribution(spec, marg[0][d.n], marg[1][d.n]))
        out.append(CurvePoint(d.n, None, float(tv), err, pred))
    return out


def factor_status(spec: GroupSpec) -> list[dict]:
    """Per-factor rank of the normalized transfer, which decides the decoupling regime."""
    if spec.factors is None:
        raise ValueError("not a product spec")
    return [{"factor": f.name or f"factor{i}", "projector_rank": int(f.transfer_rank()),
             "hom_onto_Z": f.hom_onto_z()} for i, f in enumerate(spec.factors)]


def lclt_curve(mu: FiniteMeasure, n_list: Sequence[int], options: Optional[RunOptions] = None
               ) -> list[CurvePoint]:
    """TV between the period-averaged law at time T and the Gaussian N_T, per T in ``n_list``.

    Each T must be a multiple of the detected period q; the average runs over
    times T, ..., T + q - 1.
    """
    opts = options or RunOptions()
    report = covariance(build_diagram(mu))
    q = report.period.period
    if q is None:
        raise ValueError("period could not be determined; raise the period bound")
    bad = [t for t in n_list if t < 1 or t % q]
    if bad:
        raise ValueError(f"times {bad} are not positive multiples of the period {q}")
    n_list = sorted(set(int(n) for n in n_list))
    sigma, zeta = report.sigma_float(), report.zeta_float()
    check_budget(sigma, n_list[-1] + q, mu.spec.order, _max_step(mu), opts.budget_bytes)
    out = []
    for t in n_list:
        dist = _checked(averaged_distribution(mu, q, t // q, opts.mode, opts.prune))
        g = gaussian_measure(mu.spec, t, sigma, zeta)
        tv, err = tv_to_gaussian(dist, g)
        out.append(CurvePoint(t, None, float(tv), err))
    return out


# -- output ---------------------------------------------------------------------------------

CSV_COLUMNS = ("experiment", "n", "rho", "tv", "tv_error", "prediction")


def _g17(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def curves_to_csv(rows: Iterable[tuple[str, CurvePoint]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for name, p in rows:
        w.writerow([name, p.n, _g17(p.rho), _g17(p.tv), _g17(p.tv_error), _g17(p.prediction)])
    return buf.getvalue()


def curves_from_csv(text: str) -> list[tuple[str, CurvePoint]]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")

    def opt(s):
        return None if s == "" else float(s)

    return [(r["experiment"], CurvePoint(int(r["n"]), opt(r["rho"]), float(r["tv"]),
                                         float(r["tv_error"]), opt(r["prediction"])))
            for r in reader]
