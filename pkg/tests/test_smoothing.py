import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgneg.errors import DegreeTooLarge, KernelUnderresolved, ResolutionTooCoarse
from cgneg.negativity import negativity_grid, negativity_radial
from cgneg.smoothing import (
    CoarseGrainSpec,
    GridGeometry,
    KernelMass,
    WignerGrid,
    analytic_cg_ho,
    auto_geometry,
    eval_closed_form,
    grid_convolve,
    grid_sample,
    raw_ho_closed_form,
    smooth_grid,
)
from cgneg.states import HODiagonal, PhasePoint, SquareWell

PAPER = KernelMass.PAPER
UNIT = KernelMass.UNIT


def _square(r, h):
    n = int(round(2 * r / h))
    return GridGeometry(-r, -r, 2 * r / n, 2 * r / n, n, n)


def test_example_coefficients_delta3_n4():
    cf = analytic_cg_ho(4, CoarseGrainSpec(3))
    assert cf.poly == (Fraction(625, 69984), Fraction(-125, 486), Fraction(25, 18), Fraction(-20, 9), Fraction(1))
    assert cf.decay == pytest.approx(6 / 5, rel=1e-15)
    unit = analytic_cg_ho(4, CoarseGrainSpec(3, UNIT))
    assert unit.prefactor == pytest.approx(6.84e-2, rel=0.01)


def test_example_coefficients_delta5_n2():
    cf = analytic_cg_ho(2, CoarseGrainSpec(5, UNIT))
    assert cf.poly == (Fraction(441, 5000), Fraction(-21, 25), Fraction(1))
    assert cf.decay == pytest.approx(10 / 7, rel=1e-15)
    assert cf.prefactor == pytest.approx(0.947, rel=0.01)


def test_kernel_conventions_differ_by_mass():
    a = analytic_cg_ho(4, CoarseGrainSpec(3, PAPER)).prefactor
    b = analytic_cg_ho(4, CoarseGrainSpec(3, UNIT)).prefactor
    assert b / a == pytest.approx(3 / np.pi, rel=1e-14)


@pytest.mark.parametrize("n", range(1, 7))
def test_husimi_reduction(n):
    cf = analytic_cg_ho(n, CoarseGrainSpec(2))
    assert cf.decay == 1.0
    assert cf.poly == tuple([Fraction(0)] * n + [Fraction(1)])
    assert cf.prefactor == pytest.approx(1 / (2 * math.factorial(n)), rel=1e-14)
    s = np.linspace(0, 20, 9)
    np.testing.assert_allclose(cf.radial(s), np.exp(-s) * s**n / (2 * math.factorial(n)), rtol=1e-13, atol=1e-300)


def test_closed_form_point_examples():
    assert eval_closed_form(analytic_cg_ho(1, CoarseGrainSpec(2)), PhasePoint(0, 0)) == 0.0
    assert eval_closed_form(analytic_cg_ho(0, CoarseGrainSpec(2)), 1.0, 0.0) == pytest.approx(0.5 / math.e, rel=1e-14)


def test_degree_cap():
    analytic_cg_ho(64, CoarseGrainSpec(3))
    with pytest.raises(DegreeTooLarge):
        analytic_cg_ho(65, CoarseGrainSpec(3))


@given(st.integers(0, 30), st.floats(0.3, 40).filter(lambda d: abs(d - 2) > 1e-2), st.floats(0, 30))
def test_laguerre_form_matches_power_basis(n, delta, s):
    # the recurrence form and the moment-integral polynomial are two derivations of one function
    cf = analytic_cg_ho(min(n, 12), CoarseGrainSpec(delta))
    lag = cf.radial(s)
    power = cf.prefactor * math.exp(-cf.decay * s) * sum(float(c) * s**j for j, c in enumerate(cf.poly))
    # the monic coefficients come from order-one sums, so their rounding is measured against 1
    # (near delta = 2 the constant term ((2 - delta)/(2 + delta))^n is tiny)
    scale = abs(cf.prefactor) * math.exp(-cf.decay * s) * (1.0 + sum(abs(float(c)) * s**j for j, c in enumerate(cf.poly)))
    assert abs(lag - power) <= 1e-10 * max(scale, 1e-300)


def test_non_integer_delta_uses_float_route():
    cf = analytic_cg_ho(3, CoarseGrainSpec(math.pi))
    assert cf.prefactor_exact is None
    ref = analytic_cg_ho(3, CoarseGrainSpec(3.14159))
    assert cf.radial(1.0) == pytest.approx(ref.radial(1.0), rel=1e-4)


@pytest.mark.parametrize("n", range(5))
@pytest.mark.parametrize("kernel", [PAPER, UNIT])
def test_mass_rule_closed_form(n, kernel):
    cg = CoarseGrainSpec(3, kernel)
    cf = analytic_cg_ho(n, cg)
    from scipy import integrate

    total, _ = integrate.quad(lambda s: np.pi * cf.radial(s), 0, 80, limit=200, epsabs=1e-13)
    assert total == pytest.approx(cg.total_mass, rel=1e-8)


@pytest.mark.parametrize("kernel", [PAPER, UNIT])
@pytest.mark.parametrize("n", [0, 3])
def test_mass_rule_grid(kernel, n):
    cg = CoarseGrainSpec(3, kernel)
    g = grid_sample(HODiagonal(n), _square(7.0, 0.04))
    out = grid_convolve(g, cg)
    assert out.integral() == pytest.approx(cg.total_mass * g.integral(), rel=1e-6)


def test_ground_state_grid_positive_and_integrals():
    g = grid_sample(HODiagonal(0), _square(6.0, 12 / 256))
    assert np.all(g.values > 0)
    g3 = grid_sample(HODiagonal(3), _square(7.0, 0.05))
    assert g3.integral() == pytest.approx(1.0, abs=1e-6)


def test_well_grid_zero_outside():
    geom = GridGeometry.covering(-1.0, np.pi + 1.0, -3, 3, 0.02, 0.02)
    g = grid_sample(SquareWell(1), geom)
    outside = (g.xs < 0) | (g.xs > np.pi)
    assert np.all(g.values[outside] == 0.0)


def test_resolution_errors():
    with pytest.raises(ResolutionTooCoarse):
        grid_sample(HODiagonal(5), _square(6.0, 0.5))
    g = grid_sample(HODiagonal(0), _square(5.0, 0.1))
    with pytest.raises(KernelUnderresolved):
        grid_convolve(g, CoarseGrainSpec(10))


def test_convolution_oracle_point_delta3_n4():
    cg = CoarseGrainSpec(3)
    g = grid_sample(HODiagonal(4), _square(8.0, 0.025))
    out = grid_convolve(g, cg)
    i = np.argmin(np.abs(out.xs - 1.0))
    j = np.argmin(np.abs(out.ps - 1.0))
    exact = eval_closed_form(analytic_cg_ho(4, cg), out.xs[i], out.ps[j])
    assert out.values[i, j] == pytest.approx(exact, abs=1e-4)


@pytest.mark.parametrize("delta", [2, 3, 5])
@pytest.mark.parametrize("n", [0, 1, 2, 4, 6, 8])
def test_closed_form_vs_grid_convolution(n, delta):
    cg = CoarseGrainSpec(delta)
    spec = HODiagonal(n)
    geom = auto_geometry(spec, cg)
    out = grid_convolve(grid_sample(spec, geom), cg, method="fft")
    exact = eval_closed_form(analytic_cg_ho(n, cg), geom.xs[:, None], geom.ps[None, :])
    pad = int(math.ceil(4 * cg.width / geom.dx))
    inner = (slice(pad, -pad), slice(pad, -pad))
    assert np.max(np.abs(out.values[inner] - exact[inner])) < 1e-4


def test_fft_matches_direct():
    cg = CoarseGrainSpec(4)
    g = grid_sample(HODiagonal(3), auto_geometry(HODiagonal(3), cg))
    a = grid_convolve(g, cg, "direct").values
    b = grid_convolve(g, cg, "fft").values
    assert np.max(np.abs(a - b)) < 1e-10
    with pytest.raises(ValueError):
        grid_convolve(g, cg, "bogus")


def test_point_mass_limit():
    cg = CoarseGrainSpec(1e4)
    g = grid_sample(HODiagonal(1), _square(5.0, 0.0025 / 1.0))
    out = grid_convolve(g, cg, "fft")
    big = np.abs(g.values) > 0.05
    ratio = out.values[big] / (np.pi / 1e4 * g.values[big])
    assert np.max(np.abs(ratio - 1)) < 0.01


@pytest.mark.parametrize("n", range(11))
def test_husimi_positivity_ho(n):
    cg = CoarseGrainSpec(2)
    geom = auto_geometry(HODiagonal(n), cg)
    vals = smooth_grid(HODiagonal(n), cg, geom).values
    assert vals.min() >= -1e-9


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_husimi_positivity_well(n):
    cg = CoarseGrainSpec(1)
    geom = auto_geometry(SquareWell(n), cg, p_max=12.0)
    vals = smooth_grid(SquareWell(n), cg, geom).values
    assert vals.min() >= -1e-6


def _eta_ho(n, cg):
    cf = raw_ho_closed_form(n) if cg is None else analytic_cg_ho(n, cg)
    return negativity_radial(cf.radial, math.sqrt(cf.cutoff()), 1e-9).eta


@pytest.mark.parametrize("n", [1, 3, 6])
def test_unit_mass_monotonicity(n):
    ladder = [_eta_ho(n, CoarseGrainSpec(d, UNIT)) for d in (1, 2, 4, 8)]
    raw = _eta_ho(n, None)
    tol = 1e-8
    assert all(e <= raw + tol for e in ladder)
    assert all(a <= b + tol for a, b in zip(ladder, ladder[1:]))


def test_grid_csv_json_roundtrip(tmp_path):
    g = grid_sample(HODiagonal(2), _square(2.0, 0.1))
    buf = io.StringIO()
    g.write_csv(buf)
    text = buf.getvalue()
    assert text.splitlines()[1] == "x,p,w"
    back = WignerGrid.read_csv(io.StringIO(text))
    assert back.geometry == g.geometry
    assert np.array_equal(back.values, g.values)
    back2 = WignerGrid.from_json(g.to_json())
    assert back2.geometry == g.geometry
    assert np.array_equal(back2.values, g.values)
    # header-only form (no geometry comment) still reads
    body = "\n".join(text.splitlines()[1:]) + "\n"
    back3 = WignerGrid.read_csv(io.StringIO(body))
    assert np.array_equal(back3.values, g.values)


def test_grid_validation():
    geom = GridGeometry(0, 0, 1, 1, 2, 2)
    with pytest.raises(ValueError):
        WignerGrid(geom, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        WignerGrid(geom, np.array([[0, np.nan], [0, 0]]))
    with pytest.raises(ValueError):
        GridGeometry(0, 0, 0, 1, 2, 2)
    with pytest.raises(ValueError):
        CoarseGrainSpec(0)
    assert CoarseGrainSpec(2, "unit").kernel_mass is UNIT


@settings(max_examples=15)
@given(st.integers(0, 6), st.sampled_from([2.5, 3, 4, 6]))
def test_grid_mass_rule_property(n, delta):
    cg = CoarseGrainSpec(delta, UNIT)
    geom = auto_geometry(HODiagonal(n), cg)
    g = grid_sample(HODiagonal(n), geom)
    assert grid_convolve(g, cg, "fft").integral() == pytest.approx(g.integral(), rel=1e-6)
    assert negativity_grid(g).eta >= 0
