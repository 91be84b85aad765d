import logging

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rscap.errors import ConfigError, DomainError, EvaluationError
from rscap.gauss import (
    QuadratureRule,
    gaussian_expect,
    hermite_rule,
    inv_mills,
    inv_mills_prime,
    layered_rule,
    log_tail,
    mills_gap,
    std_normal,
)

mpmath.mp.dps = 50

GRID = np.linspace(-40, 40, 161)
finite_u = st.floats(-40, 40, allow_nan=False)


def mp_mills(u):
    u = mpmath.mpf(float(u))
    return mpmath.npdf(u) / mpmath.ncdf(-u)


def test_inv_mills_against_mpmath():
    ours = np.asarray(inv_mills(GRID), dtype=np.longdouble)
    for u, e in zip(GRID, ours):
        ref = mp_mills(u)
        assert abs(mpmath.mpf(str(e)) / ref - 1) < 1e-13, u


def test_std_normal_against_mpmath():
    pdf, cdf, tail = std_normal(GRID)
    for i, u in enumerate(GRID):
        x = mpmath.mpf(float(u))
        for ours, ref in ((pdf[i], mpmath.npdf(x)), (cdf[i], mpmath.ncdf(x)), (tail[i], mpmath.ncdf(-x))):
            assert abs(mpmath.mpf(str(ours)) / ref - 1) < 1e-13, u


def test_tails_positive_at_range_ends():
    pdf, cdf, tail = std_normal(np.array([-40.0, 40.0]))
    assert tail[1] > 0 and cdf[0] > 0
    assert inv_mills(-40.0) > 0
    assert 0 < inv_mills_prime(-40.0) < 1


def test_mills_gap_examples():
    np.testing.assert_allclose(float(inv_mills(0.0)), np.sqrt(2 / np.pi), rtol=1e-15)
    # continued fraction region
    np.testing.assert_allclose(mills_gap(10.0), float(mp_mills(10) - 10), rtol=1e-13)


def test_log_tail_matches_mpmath():
    for u in (-5.0, 0.0, 3.0, 30.0):
        np.testing.assert_allclose(log_tail(u), float(mpmath.log(mpmath.ncdf(-u))), rtol=1e-14)


def test_non_finite_rejected():
    for f in (inv_mills, mills_gap, std_normal, inv_mills_prime):
        with pytest.raises(DomainError):
            f(float("nan"))
        with pytest.raises(DomainError):
            f(np.inf)


def test_out_of_range_clamped_with_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="rscap.gauss"):
        v = inv_mills(55.0)
    assert v == inv_mills(40.0)
    assert "clamped" in caplog.text


@settings(max_examples=300, deadline=None)
@given(finite_u)
def test_mills_strict_bounds(u):
    e = float(inv_mills(u))
    assert e > max(u, 0.0) or (u < -37 and e == 0.0)
    assert mills_gap(u) > 0
    if u > 0:
        assert mills_gap(u) <= 1 / u


@settings(max_examples=300, deadline=None)
@given(finite_u, finite_u)
def test_gap_decreasing(a, b):
    if a < b:
        assert mills_gap(a) >= mills_gap(b)
        if b - a > 1e-6:
            assert mills_gap(a) > mills_gap(b)


@settings(max_examples=300, deadline=None)
@given(finite_u)
def test_prime_in_unit_interval(u):
    ep = inv_mills_prime(u)
    assert 0 < ep < 1


@pytest.mark.parametrize("n", [2, 21, 201, 401])
def test_hermite_moments(n):
    rule = hermite_rule(n)
    z = rule.nodes
    for k, ref in [(0, 1), (1, 0), (2, 1), (3, 0), (4, 3)]:
        if k > 2 * n - 1:
            continue
        np.testing.assert_allclose(rule.expect(z ** k), ref, atol=1e-13)


def test_hermite_two_point():
    rule = hermite_rule(2)
    np.testing.assert_allclose(rule.nodes, [-1, 1])
    np.testing.assert_allclose(rule.weights, [0.5, 0.5])


def test_hermite_rejects_small():
    with pytest.raises(ConfigError):
        hermite_rule(1)


def test_layered_rule_resolves_kink():
    # E[(c - Z)_+^2] has the closed form (c^2 + 1) Phi(c) + c phi(c)
    c = 0.3
    rule = layered_rule(c, 1e-4)
    got = gaussian_expect(lambda z: np.maximum(c - z, 0) ** 2, rule)
    x = mpmath.mpf(c)
    ref = (x * x + 1) * mpmath.ncdf(x) + x * mpmath.npdf(x)
    np.testing.assert_allclose(got, float(ref), rtol=1e-13)


def test_layered_rule_near_integer_edges():
    # graded edges landing next to integer edges must not produce degenerate panels
    rule = layered_rule(5.000000000000001, 0.03125)
    assert np.all(np.diff(rule.nodes) > 0)


def test_rule_validation():
    with pytest.raises(ConfigError):
        QuadratureRule(np.array([1.0, 0.0]), np.array([0.5, 0.5]))
    with pytest.raises(ConfigError):
        QuadratureRule(np.array([0.0, 1.0]), np.array([0.5, 0.4]))
    with pytest.raises(ConfigError):
        QuadratureRule(np.array([0.0, 1.0]), np.array([1.5, -0.5]))


def test_rule_is_read_only():
    rule = hermite_rule(5)
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0


def test_gaussian_expect_reports_bad_node():
    with pytest.raises(EvaluationError, match="z="):
        gaussian_expect(lambda z: np.where(z > 0, np.nan, 1.0), hermite_rule(11))


def test_gaussian_expect_scalar_callable():
    import math
    val = gaussian_expect(lambda z: math.cos(z), hermite_rule(41))
    np.testing.assert_allclose(val, np.exp(-0.5), rtol=1e-14)
