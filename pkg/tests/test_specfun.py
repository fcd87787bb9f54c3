import numpy as np
import pytest
from hypothesis import given, strategies as st

from hnabem.specfun import (ASYMPTOTIC_RADIUS, gauss_legendre, hankel1_0, hankel1_01, hankel1_1, legendre,
                            legendre_table)
from oracles import hankel01_mpmath, hankel01_oracle


def _sample_arguments(rng, n):
    mod = 10 ** rng.uniform(-3, 3, n)
    arg = rng.uniform(0, 0.5 * np.pi, n)
    z = mod * np.exp(1j * arg)
    # keep exp(-Im z) representable relative to the oracle's working precision
    return z[z.imag < 30]


def test_hankel_matches_oracle_on_random_arguments(rng):
    z = _sample_arguments(rng, 400)
    h0, h1 = hankel1_01(z)
    worst = 0.0
    for zi, a, b in zip(z, h0, h1):
        r0, r1 = hankel01_oracle(complex(zi))
        worst = max(worst, abs(a - r0) / abs(r0), abs(b - r1) / abs(r1))
    assert worst < 1e-12


@pytest.mark.parametrize("z", [ASYMPTOTIC_RADIUS * (1 - 1e-12), ASYMPTOTIC_RADIUS,
                               ASYMPTOTIC_RADIUS * np.exp(0.3j), 0.999 * ASYMPTOTIC_RADIUS * np.exp(0.3j)])
def test_hankel_switchover_is_seamless(z):
    h0, h1 = hankel1_01(np.array([z]))
    r0, r1 = hankel01_oracle(complex(z))
    assert abs(h0[0] - r0) / abs(r0) < 1e-12
    assert abs(h1[0] - r1) / abs(r1) < 1e-12


def test_two_oracles_agree():
    for z in (0.37 + 0.0j, 3.1 + 2.2j, 25.0 + 0.4j, 150.0 + 1.0j):
        a = hankel01_oracle(z)
        b = hankel01_mpmath(z)
        assert abs(a[0] - b[0]) < 1e-15 * abs(b[0])
        assert abs(a[1] - b[1]) < 1e-15 * abs(b[1])


def test_hankel_scalar_helpers_and_zero():
    assert np.isclose(hankel1_0(2.0), hankel1_01(np.array([2.0]))[0][0])
    assert np.isclose(hankel1_1(2.0 + 1j), hankel1_01(np.array([2.0 + 1j]))[1][0])
    with pytest.raises(ValueError):
        hankel1_01(np.array([1.0, 0.0]))


@given(st.floats(0.05, 400.0), st.floats(0.0, 5.0))
def test_hankel_derivative_relation(x, y):
    # d/dz H0 = -H1, checked with a central difference along the real direction
    z = complex(x, y)
    h = 1e-4 * min(1.0, x)
    hp, _ = hankel1_01(np.array([z + h]))
    hm, _ = hankel1_01(np.array([z - h]))
    _, h1 = hankel1_01(np.array([z]))
    d = (hp[0] - hm[0]) / (2 * h)
    assert abs(d + h1[0]) <= 1e-6 * abs(h1[0])


def test_legendre_recurrence_and_table():
    x = np.linspace(-1, 1, 11)
    assert np.allclose(legendre(2, x), 1.5 * x * x - 0.5)
    assert np.allclose(legendre(3, x), 2.5 * x**3 - 1.5 * x)
    tab = legendre_table(5, x)
    for m in range(6):
        assert np.allclose(tab[m], legendre(m, x))
    with pytest.raises(ValueError):
        legendre(-1, x)


@given(st.integers(1, 60))
def test_gauss_legendre_exactness(n):
    rule = gauss_legendre(n)
    assert np.all(np.diff(rule.nodes) > 0)
    assert abs(rule.weights.sum() - 2) < 1e-13
    for m in range(0, 2 * n, max(1, n // 3)):
        exact = 0.0 if m % 2 else 2.0 / (m + 1)
        assert abs(rule.weights @ rule.nodes**m - exact) < 1e-13


def test_gauss_on_interval():
    s, w = gauss_legendre(8).on_interval(1.0, 3.0)
    assert abs(w @ s**3 - (81 - 1) / 4) < 1e-12


def test_hankel_at_unit_argument():
    assert abs(hankel1_0(1.0) - (0.765197686558 + 0.088256964215j)) < 1e-12
    assert abs(hankel1_1(1.0) - (0.440050585745 - 0.781212821300j)) < 1e-12


def test_hankel_large_argument_envelope():
    z = 100 + 50j
    env = np.sqrt(2 / (np.pi * abs(z))) * np.exp(-z.imag)
    assert abs(abs(hankel1_0(z)) / env - 1) < 0.01


def test_low_order_gauss_rules():
    r1 = gauss_legendre(1)
    assert np.allclose(r1.nodes, [0.0]) and np.allclose(r1.weights, [2.0])
    r2 = gauss_legendre(2)
    assert np.allclose(r2.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)
    assert np.allclose(r2.weights, [1.0, 1.0], atol=1e-15)
    r5 = gauss_legendre(5)
    assert abs(r5.weights @ r5.nodes**8 - 2 / 9) < 1e-14
    with pytest.raises(ValueError):
        gauss_legendre(0)


def test_legendre_endpoint_values():
    for m in range(12):
        assert abs(legendre(m, 1.0) - 1) < 1e-14
        assert abs(legendre(m, -1.0) - (-1) ** m) < 1e-14
