import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vawalk.diagram import build_diagram
from vawalk.fixtures import BUILTIN_MEASURES, builtin_group, load_measure
from vawalk.measure import FiniteMeasure, make_pi_rho
from vawalk.spectral import (EigenvalueDegeneracyError, NotPositiveDefiniteError, covariance,
                             fd_gradient, fd_hessian, gaussian_measure, in_adapted_coordinates,
                             leading_exponent, product_zero_mask, structure_prediction)

from conftest import klein_spec, shear_spec

F = Fraction


def shear_measure():
    spec = shear_spec()
    return FiniteMeasure.from_mapping(spec, {
        spec.element([0, 0], 1): F(1, 4), spec.element([1, 0], 1): F(1, 8),
        spec.element([0, 1], 0): F(1, 4), spec.element([0, -1], 0): F(1, 8),
        spec.element([-1, 0], 0): F(1, 4)})


def klein_measure():
    spec = klein_spec()
    return FiniteMeasure.uniform(spec, [spec.element([0], 1), spec.element([-1], 1),
                                        spec.lattice([1]), spec.identity()])


@pytest.mark.parametrize("ref, zeta, sigma", [
    ("Dinf:lsrw", [0], [[F(1, 6)]]),
    ("Z:lazy", [0], [[F(2, 3)]]),
    ("Z:drift", [F(1, 3)], [[F(8, 9)]]),
    ("Tri:uniform6", [0, 0], [[F(2, 9), F(1, 9)], [F(1, 9), F(2, 9)]]),
])
def test_exact_covariance_values(ref, zeta, sigma):
    rep = covariance(build_diagram(load_measure(ref)))
    assert list(rep.zeta) == zeta
    assert rep.sigma.tolist() == sigma


def test_report_json():
    js = covariance(build_diagram(load_measure("Z:drift"))).to_json()
    assert js == {"zeta": ["1/3"], "sigma": [["8/9"]], "projector": [["1"]],
                  "hom_onto_Z": True, "period": 2}


def test_sigma_symmetric_positive_definite(builtin_measure):
    s = covariance(build_diagram(builtin_measure)).sigma
    assert (s == s.T).all()
    assert np.min(np.linalg.eigvalsh(np.array(s, dtype=float))) > 0


@pytest.mark.parametrize("ref", BUILTIN_MEASURES)
def test_float_mode_agrees_with_exact(ref):
    mu = load_measure(ref)
    ex = covariance(build_diagram(mu))
    fl = covariance(build_diagram(mu.to_float()))
    assert np.allclose(fl.sigma_float(), ex.sigma_float(), atol=1e-13)
    assert np.allclose(fl.zeta_float(), ex.zeta_float(), atol=1e-13)


# -- structure of product walks ----------------------------------------------------------


@pytest.mark.parametrize("ref", ["Dinf:lsrw", "Z:lazy", "Tri:uniform6", "Z:drift"])
@pytest.mark.parametrize("rho", [F(1, 4), F(1, 2), F(3, 4), F(1)])
def test_pi_rho_covariance_matches_prediction(ref, rho):
    mu = load_measure(ref)
    measured = covariance(build_diagram(make_pi_rho(mu, rho))).sigma
    assert (measured == structure_prediction(mu, rho)).all()


def test_prediction_examples():
    dinf = structure_prediction(load_measure("Dinf:lsrw"), F(1, 3))
    assert dinf.tolist() == [[F(1, 6), 0], [0, F(1, 6)]]
    z = structure_prediction(load_measure("Z:lazy"), F(1, 4))
    assert z.tolist() == [[F(2, 3), F(1, 2)], [F(1, 2), F(2, 3)]]
    tri = structure_prediction(load_measure("Tri:uniform6"), 1)
    assert (tri[:2, 2:] == 0).all()


@settings(max_examples=20)
@given(st.fractions(min_value=F(1, 20), max_value=1, max_denominator=20))
def test_shear_prediction_exact(rho):
    mu = shear_measure()
    measured = covariance(build_diagram(make_pi_rho(mu, rho))).sigma
    assert (measured == structure_prediction(mu, rho)).all()


def test_nonsplit_closed_form_refused():
    with pytest.raises(ValueError):
        structure_prediction(klein_measure(), F(1, 2))


@pytest.mark.parametrize("nu", [
    lambda: load_measure("Dinf*Z:nu"),
    lambda: make_pi_rho(load_measure("Dinf:ape"), F(1, 3)),
    lambda: make_pi_rho(load_measure("Tri:uniform6"), F(2, 5)),
    lambda: make_pi_rho(shear_measure(), F(1, 2)),
    lambda: make_pi_rho(klein_measure(), F(1, 2)),
])
def test_zero_blocks_in_adapted_basis(nu):
    nu = nu()
    rep = covariance(build_diagram(nu))
    w, mask = product_zero_mask(nu.spec)
    adapted = in_adapted_coordinates(rep.sigma, w)
    assert all(adapted[i, j] == 0 for i, j in zip(*np.nonzero(mask)))
    # drift lies in im P1 + im P2
    p = nu.spec.normalized_transfer()
    assert list(p @ rep.zeta) == list(rep.zeta)


def test_zero_pattern_for_nonsplit():
    pred = structure_prediction(klein_measure(), F(1, 2), closed_form=False)
    assert pred.matrix is None and not pred.zero_mask.any()  # Z x Z/2 maps onto Z in both factors


def test_drift_vanishes_without_homomorphisms():
    rep = covariance(build_diagram(make_pi_rho(load_measure("Tri:uniform6"), F(1, 2))))
    assert all(c == 0 for c in rep.zeta)


# -- transfer-operator oracle ------------------------------------------------------------


def test_beta_at_zero(builtin_measure):
    d = build_diagram(builtin_measure.to_float())
    assert abs(leading_exponent(d, np.zeros(d.spec.m))) < 1e-14


@pytest.mark.parametrize("ref", BUILTIN_MEASURES)
def test_gradient_is_drift(ref):
    d = build_diagram(load_measure(ref).to_float())
    zeta = covariance(d).zeta_float()
    assert np.allclose(fd_gradient(d), 2j * math.pi * zeta, atol=1e-7)


@pytest.mark.parametrize("ref", BUILTIN_MEASURES)
def test_hessian_oracle(ref):
    d = build_diagram(load_measure(ref).to_float())
    sigma = covariance(build_diagram(load_measure(ref))).sigma_float()
    assert np.max(np.abs(fd_hessian(d) + 4 * math.pi ** 2 * sigma)) <= 1e-6


def test_plain_differences_within_tolerance_on_dinf():
    d = build_diagram(load_measure("Dinf:lsrw").to_float())
    hess = fd_hessian(d, richardson=False, dps=None)
    assert np.max(np.abs(hess + 4 * math.pi ** 2 / 6)) <= 1e-6


@pytest.mark.parametrize("ref", [r for r in BUILTIN_MEASURES if load_measure(r).is_symmetric()])
def test_symmetric_beta_real_and_even(ref):
    d = build_diagram(load_measure(ref).to_float())
    m = d.spec.m
    grid = np.linspace(-0.05, 0.05, 5)
    for pt in np.array(np.meshgrid(*([grid] * m))).reshape(m, -1).T:
        b, bm = leading_exponent(d, pt), leading_exponent(d, -pt)
        assert abs(b.imag) <= 1e-12
        assert abs(b - bm) <= 1e-12


def test_degeneracy_detected():
    d = build_diagram(load_measure("Dinf:lsrw").to_float())
    with pytest.raises(EigenvalueDegeneracyError):
        leading_exponent(d, [0.0], gap=10.0)


# -- comparison Gaussian -----------------------------------------------------------------


def test_gaussian_point_mass():
    z = builtin_group("Z")
    g = gaussian_measure(z, 600, [[2 / 3]], [0])
    assert math.isclose(g.mass(z.identity()), 1 / math.sqrt(800 * math.pi), rel_tol=1e-9)


def test_gaussian_normalization_and_symmetry():
    spec = builtin_group("Tri")
    g = gaussian_measure(spec, 50, [[2 / 9, 1 / 9], [1 / 9, 2 / 9]], [0, 0])
    assert 1 - 1e-10 <= g.total_window_mass() <= 1 + 1e-12
    assert g.tail <= 1e-10
    for v in ([1, 2], [-3, 0], [4, -1]):
        for x in range(3):
            assert math.isclose(g.mass(spec.element(v, x)), g.mass(spec.element([-c for c in v], x)))


def test_gaussian_rejects_singular():
    with pytest.raises(NotPositiveDefiniteError):
        gaussian_measure(builtin_group("Z^2"), 10, [[1, 1], [1, 1]], [0, 0])
