from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vawalk.fixtures import builtin_group, group_from_json
from vawalk.group import GroupSpecError, integer_span_is_full, make_spec, product_spec
from vawalk.linalg import fraction_identity

from conftest import ALL_SPECS, elements, spec_by_name


@pytest.fixture
def dinf():
    return builtin_group("Dinf")


@pytest.fixture
def tri():
    return builtin_group("Tri")


def test_dinf_multiplication(dinf):
    s1, s2 = dinf.element([0], 1), dinf.element([1], 1)
    assert dinf.multiply(s1, s2) == dinf.element([-1], 0)
    assert dinf.invert(s1) == s1


def test_tri_multiplication_and_inverse(tri):
    s1, s2 = tri.element([0, 0], 1), tri.element([1, 0], 1)
    assert tri.multiply(s1, s2) == tri.element([0, 1], 2)
    assert tri.invert(tri.element([0, 1], 2)) == tri.element([1, 1], 1)


def test_cocycle_examples(dinf):
    s1, s2 = dinf.element([0], 1), dinf.element([1], 1)
    assert dinf.cocycle_alpha(0, s2) == ((1,), 1)
    assert dinf.cocycle_alpha(1, s2) == ((-1,), 0)
    lhs = dinf.cocycle_alpha(0, dinf.multiply(s1, s2))[0]
    a1, x1 = dinf.cocycle_alpha(0, s1)
    a2, _ = dinf.cocycle_alpha(x1, s2)
    assert lhs == tuple(p + q for p, q in zip(a1, a2)) == (-1,)


def test_transfer_examples(dinf, tri):
    assert dinf.transfer(dinf.element([1], 1)) == (0,)
    z = builtin_group("Z")
    assert z.transfer(z.lattice([5])) == (5,)
    for v in ([0, 0], [1, 0], [1, 1]):
        assert tri.transfer(tri.element(v, 1)) == (0, 0)


def test_normalized_transfer_examples(dinf, tri):
    assert dinf.normalized_transfer().tolist() == [[0]]
    assert tri.normalized_transfer().tolist() == [[0, 0], [0, 0]]
    assert (builtin_group("Z^3").normalized_transfer() == fraction_identity(3)).all()
    assert not dinf.hom_onto_z() and not tri.hom_onto_z() and builtin_group("Z").hom_onto_z()


def test_product_spec_shapes():
    zz = product_spec(builtin_group("Z"), builtin_group("Z"))
    assert zz.m == 2 and zz.order == 1
    assert zz.normalized_transfer().tolist() == builtin_group("Z^2").normalized_transfer().tolist()
    dd = product_spec(builtin_group("Dinf"), builtin_group("Dinf"))
    assert dd.m == 2 and dd.order == 4
    diag = {tuple(int(a[i][i]) for i in range(2)) for a in dd.ad}
    assert diag == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    assert all(a[0][1] == 0 and a[1][0] == 0 for a in dd.ad)


@pytest.mark.parametrize("name", ALL_SPECS)
def test_group_axioms(name):
    spec = spec_by_name(name)

    @given(elements(spec), elements(spec), elements(spec))
    def check(g, h, k):
        e = spec.identity()
        assert spec.multiply(g, e) == g == spec.multiply(e, g)
        assert spec.multiply(g, spec.invert(g)) == e == spec.multiply(spec.invert(g), g)
        assert spec.multiply(spec.multiply(g, h), k) == spec.multiply(g, spec.multiply(h, k))

    check()


@pytest.mark.parametrize("name", ALL_SPECS)
def test_cocycle_identity_and_transfer_homomorphism(name):
    spec = spec_by_name(name)

    @given(st.integers(0, spec.order - 1), elements(spec), elements(spec))
    def check(x, g, h):
        a_gh, x_gh = spec.cocycle_alpha(x, spec.multiply(g, h))
        a_g, xg = spec.cocycle_alpha(x, g)
        a_h, xgh = spec.cocycle_alpha(xg, h)
        assert x_gh == xgh
        assert a_gh == tuple(p + q for p, q in zip(a_g, a_h))
        tg, th = spec.transfer(g), spec.transfer(h)
        assert spec.transfer(spec.multiply(g, h)) == tuple(p + q for p, q in zip(tg, th))

    check()


@pytest.mark.parametrize("name", ALL_SPECS)
def test_projector_idempotent_and_self_adjoint(name):
    spec = spec_by_name(name)
    p = spec.normalized_transfer()
    b = spec.invariant_form()
    assert (p @ p == p).all()
    assert (p.T @ b == b @ p).all()


@pytest.mark.parametrize("name", ALL_SPECS)
def test_transfer_of_lattice_elements(name):
    spec = spec_by_name(name)
    p = spec.normalized_transfer()

    @given(st.lists(st.integers(-5, 5), min_size=spec.m, max_size=spec.m))
    def check(v):
        lhs = [c * spec.order for c in p @ np.array([Fraction(c) for c in v], dtype=object)]
        assert tuple(lhs) == spec.transfer(spec.lattice(v))

    check()


def test_product_pair_split_roundtrip():
    spec = product_spec(builtin_group("Dinf"), builtin_group("Tri"))
    a, b = spec.factors

    @given(elements(a), elements(b))
    def check(g, h):
        assert spec.split(spec.pair(g, h)) == (g, h)

    check()


def test_validation_errors():
    with pytest.raises(GroupSpecError):
        make_spec(1, [[0, 1], [1, 0]], [[[1]], [[2]]])  # det 2
    with pytest.raises(GroupSpecError):
        make_spec(1, [[0, 1], [1, 0]], [[[1]], [[1]]], tau=[[[0], [0]], [[1], [0]]])  # tau(x, e) != 0
    with pytest.raises(GroupSpecError):
        make_spec(2, [[0, 1], [1, 0]], [[[1, 0], [0, 1]], [[0, 1], [1, 1]]])  # not a homomorphism
    with pytest.raises((GroupSpecError, ValueError)):
        make_spec(1, [[0, 1], [0, 1]], [[[1]], [[1]]])  # not a group table
    dinf = builtin_group("Dinf")
    with pytest.raises(GroupSpecError):
        dinf.element([0, 0], 0)
    with pytest.raises(GroupSpecError):
        dinf.element([0], 2)


def test_nonsplit_spec_is_flagged():
    from conftest import klein_spec

    spec = klein_spec()
    assert not spec.is_split
    r = spec.element([0], 1)
    assert spec.multiply(r, r) == spec.lattice([1])


@pytest.mark.parametrize("name", ALL_SPECS)
def test_json_roundtrip(name):
    spec = spec_by_name(name)
    again = group_from_json(spec.to_json())
    assert (again.m, again.table, again.ad, again.tau) == (spec.m, spec.table, spec.ad, spec.tau)


def test_integer_span():
    assert integer_span_is_full([(2,), (3,)], 1)
    assert not integer_span_is_full([(2,), (4,)], 1)
    assert integer_span_is_full([(1, 0), (0, 1), (1, 1)], 2)
    assert not integer_span_is_full([(1, 1), (2, 2)], 2)
    assert not integer_span_is_full([(2, 0), (0, 1)], 2)
    assert not integer_span_is_full([], 1)
