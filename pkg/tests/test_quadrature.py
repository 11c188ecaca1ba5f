import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraksolve.kernel import GreenParams, green_weight_integral
from fraksolve.quadrature import (
    MAX_POINTS,
    RuleConfigError,
    _cached_jacobi01,
    _jacobi01,
    integrate_green,
    jacobi_rule,
    legendre_rule,
)
from fraksolve.specfun import gamma


def test_one_point_rule_moment_matching():
    # m0 = 1/(1-sigma) = 2, m1 = 1/(2-sigma) = 2/3, node = m1/m0
    rule = jacobi_rule(1, 0.5)
    assert rule.nodes[0] == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert rule.weights[0] == pytest.approx(2.0, abs=1e-13)


def test_weight_sum_is_zeroth_moment():
    rule = jacobi_rule(4, 0.5)
    assert float(rule.weights.sum()) == pytest.approx(2.0, abs=1e-13)


def test_integrate_accepts_constant_returning_function():
    rule = jacobi_rule(4, 0.5)
    assert rule.integrate(lambda s: 1.0) == pytest.approx(2.0, abs=1e-13)


def test_eighth_order_moment():
    rule = jacobi_rule(8, 0.3)
    val = rule.integrate(lambda s: s**5)
    assert val == pytest.approx(1.0 / 5.7, abs=1e-13)


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16, 48, 96])
@pytest.mark.parametrize("sigma", [0.1, 0.3, 0.5, 0.9])
def test_moment_exactness(n, sigma):
    rule = jacobi_rule(n, sigma)
    ks = np.arange(0, 2 * n)
    moments = np.array([float(np.dot(rule.weights, rule.nodes**k)) for k in ks])
    assert np.max(np.abs(moments - 1.0 / (ks + 1 - sigma))) <= 1e-12


@given(
    n=st.integers(min_value=1, max_value=64),
    sigma=st.floats(min_value=0.02, max_value=0.98),
)
@settings(max_examples=60, deadline=None)
def test_rule_structure(n, sigma):
    rule = jacobi_rule(n, sigma)
    assert np.all(rule.weights > 0.0)
    assert np.all(np.diff(rule.nodes) > 0.0)
    assert rule.nodes[0] > 0.0 and rule.nodes[-1] < 1.0
    assert rule.exponent_b == -sigma
    assert rule.interval == (0.0, 1.0)


def test_rule_config_errors():
    with pytest.raises(RuleConfigError):
        jacobi_rule(0, 0.5)
    with pytest.raises(RuleConfigError):
        jacobi_rule(MAX_POINTS + 1, 0.5)
    with pytest.raises(RuleConfigError):
        jacobi_rule(8, 0.0)
    with pytest.raises(RuleConfigError):
        jacobi_rule(8, 1.0)


def test_against_scipy_reference():
    # independent construction path for the same rules
    scipy_special = pytest.importorskip("scipy.special")
    for n in (3, 16, 48):
        for a, b in ((0.0, -0.5), (0.0, -0.1), (0.0, 0.0)):
            mine_x, mine_w = _jacobi01(n, a, b)
            xs, ws = scipy_special.roots_jacobi(n, a, b)
            order = np.argsort(xs)
            assert np.max(np.abs(mine_x - 0.5 * (1 + xs[order]))) <= 1e-13
            assert np.max(np.abs(mine_w - ws[order] / 2 ** (a + b + 1))) <= 1e-12


def test_legendre_rule_polynomial_exactness():
    rule = legendre_rule(6)
    assert rule.integrate(lambda s: s**11) == pytest.approx(1.0 / 12.0, abs=1e-14)
    assert rule.exponent_b == 0.0


def test_cache_concurrent_reads():
    results = []
    errors = []

    def hit():
        try:
            for _ in range(50):
                nodes, weights = _cached_jacobi01(32, 0.0, -0.37)
                results.append((id(nodes), float(weights.sum())))
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=hit) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    ids = {r[0] for r in results}
    assert len(ids) == 1  # one shared immutable rule
    nodes, _ = _cached_jacobi01(32, 0.0, -0.37)
    with pytest.raises(ValueError):
        nodes[0] = 0.0  # read-only


def test_integrate_green_zero_forcing():
    p = GreenParams(3.5, 0.5)
    zero = lambda s: np.zeros_like(np.asarray(s, dtype=float))
    assert integrate_green(p, 0.4, zero, 48) == 0.0


def test_integrate_green_reproduces_closed_form():
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))
    for alpha, sigma in ((3.01, 0.9), (3.5, 0.5), (4.0, 0.1)):
        p = GreenParams(alpha, sigma)
        for t in (0.1, 0.37, 0.5, 0.93):
            assert integrate_green(p, t, one, 48) == pytest.approx(
                green_weight_integral(p, t), abs=1e-8
            )


def test_integrate_green_manufactured_value():
    # oracle: termwise power rule for the fractional derivative gives the
    # forcing of u*(t) = t^(alpha-1)(1-t)^2; at t = 0.5 the value is
    # 0.5^2.5 * 0.25
    a, sg = 3.5, 0.5
    p = GreenParams(a, sg)
    c1, c2 = -2.0 * gamma(a + 1.0), gamma(a + 2.0)
    f_reg = lambda s: np.asarray(s) ** sg * (c1 + c2 * np.asarray(s))
    expected = 0.5**2.5 * 0.25
    assert expected == pytest.approx(0.04419417382415922, abs=1e-14)
    assert integrate_green(p, 0.5, f_reg, 48) == pytest.approx(expected, abs=1e-8)


def test_integrate_green_endpoint_degeneracy():
    p = GreenParams(3.5, 0.5)
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))
    assert abs(integrate_green(p, 0.0, one, 48)) <= 1e-12
    assert abs(integrate_green(p, 1.0, one, 48)) <= 1e-12


def test_integrate_green_split_consistency():
    p = GreenParams(3.5, 0.5)
    fcos = lambda s: np.cos(np.asarray(s, dtype=float))
    for t in np.linspace(0.0, 1.0, 17):
        d = abs(integrate_green(p, float(t), fcos, 48) - integrate_green(p, float(t), fcos, 96))
        assert d <= 1e-9
