import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jv

from coupling_estimation.bessel import bessel_j, bessel_j_orders
from coupling_estimation.errors import DomainError


def test_j0_at_zero():
    assert bessel_j(0, 0) == 1.0
    assert bessel_j(2.5, 0) == 0.0


def test_half_integer_closed_form():
    ref = math.sqrt(2 / (math.pi * 1.0)) * math.sin(1.0)
    assert bessel_j(0.5, 1.0) == pytest.approx(ref, rel=1e-13)
    assert bessel_j(0.5, 1.0) == pytest.approx(0.6713967071418031, rel=1e-13)


def test_recurrence_identity():
    nu, x = 2.7, 5.3
    res = bessel_j(nu - 1, x) + bessel_j(nu + 1, x) - 2 * nu / x * bessel_j(nu, x)
    assert abs(res) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 300), st.floats(0.01, 200))
def test_against_scipy(nu, x):
    ref = jv(nu, x)
    got = bessel_j(nu, x)
    assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref)) or abs(got - ref) <= 1e-9 * abs(ref)


@pytest.mark.parametrize("nu0, x", [(0.3, 40.0), (17.86, 20.0), (3.0, 2.0), (250.2, 600.0)])
def test_orders_against_scipy(nu0, x):
    got = bessel_j_orders(nu0, 60, x)
    ref = jv(nu0 + np.arange(60), x)
    np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-14)


def test_large_order_regime():
    # series route would cancel catastrophically here
    assert bessel_j(1000.0, 500.0) == pytest.approx(jv(1000.0, 500.0), rel=1e-9)


@pytest.mark.parametrize("nu, x", [(-1, 1), (1, -1), (2e4, 1), (1, 2e3), (math.nan, 1)])
def test_domain(nu, x):
    with pytest.raises(DomainError):
        bessel_j(nu, x)
