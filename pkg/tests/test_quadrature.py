import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cgneg.quadrature import (
    adaptive_gk,
    find_roots,
    gauss_kronrod,
    integrate_signed,
    refine_neg_integral,
    tensor_neg_integral,
)


def test_gauss_kronrod_exact_for_polynomials():
    k, e = gauss_kronrod(lambda x: x**12, 0.0, 1.0)
    assert k[0] == pytest.approx(1 / 13, rel=1e-14)
    assert e[0] < 1e-14


@given(st.floats(0.5, 30.0))
def test_adaptive_gk_oscillatory(w):
    val, err, ok = adaptive_gk(np.cos, 0.0, w, 1e-12)
    assert ok
    assert val == pytest.approx(math.sin(w), abs=1e-11)


def test_adaptive_gk_reports_nonconvergence():
    _, _, ok = adaptive_gk(lambda x: 1 / np.sqrt(np.abs(x - 0.3) + 1e-300), 0.0, 1.0, 1e-14, max_depth=3)
    assert not ok


def test_find_roots():
    r = find_roots(np.sin, 0.5, 10.0, 200)
    np.testing.assert_allclose(r, [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-14)


def test_integrate_signed_modes():
    neg, _, ok, roots = integrate_signed(np.sin, 0.0, 2 * np.pi, "neg", 1e-12, 100)
    assert ok and neg == pytest.approx(2.0, abs=1e-12)
    ab, _, _, _ = integrate_signed(np.sin, 0.0, 2 * np.pi, "abs", 1e-12, 100)
    assert ab == pytest.approx(4.0, abs=1e-12)
    with pytest.raises(ValueError):
        integrate_signed(np.sin, 0.0, 1.0, "both")


def test_tensor_neg_integral_linear_exact():
    # neg of a linear function along p is integrated exactly by the crossing rule
    xs = np.linspace(0, 1, 3)
    ps = np.linspace(-1, 1, 8)
    vals = np.tile(ps, (3, 1))
    assert tensor_neg_integral(vals, xs, ps) == pytest.approx(0.5, abs=1e-15)


def test_refine_neg_integral_converges():
    f = lambda xs, ps: np.cos(3 * xs)[:, None] * np.cos(2 * ps)[None, :]  # noqa: E731
    # negative volume of cos(3x) cos(2p) over [0, pi] x [0, pi]: half of |.| volume
    exact = 0.5 * (2.0 * 2.0)
    val, err, ok, level = refine_neg_integral(f, 0.0, np.pi, 0.0, np.pi, 0.2, 0.2, 1e-6)
    assert ok and level >= 2
    assert val == pytest.approx(exact, abs=max(1e-6, 2 * err))
