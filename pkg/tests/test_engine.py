from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vawalk.engine import (BudgetExceededError, LatticeDistribution, ModeMismatchError,
                           ProductDistribution, SpecMismatchError, averaged_distribution,
                           check_budget, check_mass, convolve_step, distribution_at, evolve,
                           mixture, tv_distance, tv_to_gaussian)
from vawalk.fixtures import builtin_group, load_measure
from vawalk.group import product_spec
from vawalk.measure import FiniteMeasure, make_pi_rho
from vawalk.spectral import gaussian_measure

F = Fraction


def test_delta_convolved_is_mu(builtin_measure):
    for mode in ("exact", "float"):
        d = convolve_step(LatticeDistribution.delta(builtin_measure.spec, mode), builtin_measure)
        assert dict(d.items()) == {g: (p if mode == "exact" else float(p))
                                   for g, p in builtin_measure.items()}


def test_srw_two_steps():
    mu = load_measure("Dinf:srw")
    d2 = distribution_at(mu, 2)
    spec = mu.spec
    assert d2.entries == {spec.lattice([0]): F(1, 2), spec.lattice([-1]): F(1, 4),
                          spec.lattice([1]): F(1, 4)}


def test_exact_mass_conservation():
    d = distribution_at(load_measure("Dinf:lsrw"), 50)
    assert d.total() == 1 and d.lost_mass == 0
    check_mass(d)


@pytest.mark.parametrize("ref", ["Dinf:ape", "Dinf:lsrw", "Dinf:srw"])
def test_exact_and_float_agree(ref):
    mu = load_measure(ref)
    times = [1, 2, 5, 13, 32]
    for ex, fl in zip(evolve(mu, times, "exact"), evolve(mu, times, "float")):
        tv, err = tv_distance(ex.to_float(), fl)
        assert tv <= 1e-12
        assert abs(fl.total() + fl.lost_mass - 1) <= 1e-12


def test_error_bar_contains_exact_answer():
    mu = load_measure("Dinf:ape")
    nu = load_measure("Dinf:lsrw")
    n = 30
    exact = float(tv_distance(distribution_at(mu, n), distribution_at(nu, n)).value)
    coarse = tv_distance(distribution_at(mu, n, "float", prune=1e-6),
                         distribution_at(nu, n, "float", prune=1e-6))
    assert coarse.error > 0
    assert abs(coarse.value - exact) <= coarse.error + 1e-15


def test_lost_mass_bound():
    mu = load_measure("Tri:uniform6")
    prune = 1e-9
    n = 40
    d = distribution_at(mu, n, "float", prune=prune)
    growth = len(mu.support)
    # each step prunes entries < prune; at most (#cosets x box size) of them
    assert d.lost_mass <= sum(prune * d.support_size() * growth for _ in range(n))


def test_tv_examples():
    mu = load_measure("Dinf:lsrw")
    spec = mu.spec
    one = LatticeDistribution.from_measure(mu)
    assert tv_distance(one, one).value == 0
    a = LatticeDistribution.delta(spec, "exact", spec.lattice([1]))
    b = LatticeDistribution.delta(spec, "exact", spec.lattice([2]))
    assert tv_distance(a, b).value == 1
    assert tv_distance(a.to_float(), b.to_float()).value == 1.0
    srw2 = FiniteMeasure.uniform(spec, [spec.element([0], 1), spec.element([1], 1)])
    assert tv_distance(one, LatticeDistribution.from_measure(srw2)).value == F(1, 3)


def test_tv_spec_mismatch():
    a = LatticeDistribution.delta(builtin_group("Z"), "float")
    b = LatticeDistribution.delta(builtin_group("Dinf"), "float")
    with pytest.raises(SpecMismatchError):
        tv_distance(a, b)


def test_mode_mismatch():
    d = LatticeDistribution.delta(builtin_group("Z"), "exact")
    with pytest.raises(ModeMismatchError):
        convolve_step(d, load_measure("Z:lazy").to_float())
    with pytest.raises(ModeMismatchError):
        next(evolve(load_measure("Z:lazy").to_float(), [3], "exact"))


def test_exact_cap():
    with pytest.raises(ValueError):
        distribution_at(load_measure("Z:lazy"), 65, "exact")


def test_tv_to_gaussian_point_vs_wide():
    spec = builtin_group("Z")
    g = gaussian_measure(spec, 1000, [[1.0]], [0.0])
    tv, err = tv_to_gaussian(LatticeDistribution.delta(spec, "float"), g)
    assert tv > 0.98 and err <= 1e-9


def test_tv_to_gaussian_counts_missing_cosets():
    mu = load_measure("Dinf:srw")
    d = distribution_at(mu, 10, "float")  # lives on the identity coset only
    g = gaussian_measure(mu.spec, 10, [[0.25]], [0.0])
    assert tv_to_gaussian(d, g).value >= 0.5 - 1e-9


def test_lclt_decay_dinf():
    mu = load_measure("Dinf:lsrw")
    vals = []
    for d in evolve(mu, [100, 1000], "float"):
        vals.append(tv_to_gaussian(d, gaussian_measure(mu.spec, d.n, [[1 / 6]], [0.0])).value)
    assert vals[1] < 0.05 and vals[1] < vals[0]


def test_averaged_distribution():
    mu = load_measure("Dinf:lsrw")
    a = averaged_distribution(mu, 1, 7)
    assert a.entries == distribution_at(mu, 7).entries
    srw = load_measure("Dinf:srw")
    avg = averaged_distribution(srw, 2, 5)
    assert avg.total() == 1
    per_coset = {x: sum(p for g, p in avg.entries.items() if g.x == x) for x in (0, 1)}
    assert per_coset == {0: F(1, 2), 1: F(1, 2)}


def test_mixture_weights():
    mu = load_measure("Z:lazy")
    a, b = distribution_at(mu, 1), distribution_at(mu, 2)
    m = mixture([a, b], [F(1, 4), F(3, 4)])
    assert m.total() == 1
    mf = mixture([a.to_float(), b.to_float()], [0.25, 0.75])
    assert tv_distance(m.to_float(), mf).value <= 1e-15


@settings(max_examples=15)
@given(st.fractions(min_value=F(1, 10), max_value=1, max_denominator=10), st.integers(1, 6))
def test_marginalization_commutes(rho, n):
    mu = load_measure("Dinf:ape")
    pi = make_pi_rho(mu, rho)
    joint = distribution_at(pi, n)
    for i in (0, 1):
        assert joint.marginal(i).entries == distribution_at(mu, n).entries


def test_float_marginal_matches_exact():
    mu = load_measure("Tri:uniform6")
    pi = make_pi_rho(mu, F(1, 3))
    joint = distribution_at(pi, 6, "float")
    ref = distribution_at(mu, 6)
    for i in (0, 1):
        assert tv_distance(joint.marginal(i), ref.to_float()).value <= 1e-14


def test_lazy_product_matches_materialized():
    mu = load_measure("Dinf:lsrw")
    spec2 = product_spec(mu.spec, mu.spec)
    a = distribution_at(mu, 5)
    lazy = ProductDistribution(spec2, a, a)
    dense = LatticeDistribution(spec2, "exact", 5, entries=lazy.entries)
    pi = distribution_at(make_pi_rho(mu, F(1, 2)), 5)
    exact = tv_distance(pi, dense).value
    assert exact == tv_distance(pi, lazy).value
    assert abs(tv_distance(pi.to_float(), ProductDistribution(spec2, a.to_float(), a.to_float())).value
               - float(exact)) <= 1e-14
    assert tv_distance(make_lazy_float(spec2, a), dense.to_float()).value <= 1e-15


def make_lazy_float(spec2, a):
    return ProductDistribution(spec2, a.to_float(), a.to_float())


def test_csv_dump():
    d = distribution_at(load_measure("Dinf:srw"), 2)
    lines = d.to_csv().strip().splitlines()
    assert lines[0] == "v0,x,mass"
    assert sorted(lines[1:]) == sorted(["-1,0,1/4", "0,0,1/2", "1,0,1/4"])


def test_budget_refusal_reports_ceiling():
    with pytest.raises(BudgetExceededError) as info:
        check_budget(np.eye(4), 10_000, 9, 1, 2 ** 20)
    assert 0 < info.value.feasible_n < 10_000
