from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from vawalk.fixtures import BUILTIN_MEASURES, builtin_group, load_measure
from vawalk.group import make_spec

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SPECS = ("Z", "Z^2", "Dinf", "Tri", "Dinf*Z", "Dinf*Dinf")


def shear_spec():
    """Z^2 x| Z/2 with Ad(r) = [[1, 1], [0, -1]]; a split spec whose transfer projector is not symmetric."""
    return make_spec(2, [[0, 1], [1, 0]], [[[1, 0], [0, 1]], [[1, 1], [0, -1]]], name="Shear")


def klein_spec():
    """Z x Z/2 with a nontrivial factor set: the generator squares to a lattice translation."""
    return make_spec(1, [[0, 1], [1, 0]], [[[1]], [[1]]], tau=[[[0], [0]], [[0], [1]]], name="ZxZ2tau")


@pytest.fixture(params=BUILTIN_MEASURES)
def builtin_measure(request):
    return load_measure(request.param)


def elements(spec, radius=3):
    """Strategy for elements with small lattice coordinates."""
    return st.builds(
        lambda v, x: spec.element(v, x),
        st.lists(st.integers(-radius, radius), min_size=spec.m, max_size=spec.m),
        st.integers(0, spec.order - 1),
    )


def spec_by_name(name):
    if name == "Shear":
        return shear_spec()
    if name == "ZxZ2tau":
        return klein_spec()
    return builtin_group(name)


ALL_SPECS = SPECS + ("Shear", "ZxZ2tau")

rationals = st.fractions(min_value=-3, max_value=3, max_denominator=7)
unit_rho = st.fractions(min_value=0, max_value=1, max_denominator=12)


def half():
    return Fraction(1, 2)
