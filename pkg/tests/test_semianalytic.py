import math

import numpy as np
import pytest
from scipy import integrate

from cgneg.semianalytic import offdiag_cg_radial, offdiag_cg_tensor, well_cg_tensor
from cgneg.smoothing import (
    CoarseGrainSpec,
    KernelMass,
    analytic_cg_ho,
    auto_geometry,
    grid_convolve,
    grid_sample,
)
from cgneg.states import HOOffDiagonal, SquareWell, square_well_wigner


def _brute_well(n, delta, x, p):
    # direct 2D quadrature of the kernel against the square-well Wigner function
    pw = 12.0 / math.sqrt(delta)

    def inner(xp):
        return integrate.quad(
            lambda pp: math.exp(-delta * ((x - xp) ** 2 + (p - pp) ** 2)) * square_well_wigner(n, xp, pp),
            p - pw, p + pw, limit=400, epsabs=1e-13,
        )[0]

    return integrate.quad(inner, 0.0, np.pi, points=[np.pi / 2], limit=200, epsabs=1e-12)[0]


@pytest.mark.parametrize("n,delta,x,p", [(1, 2.0, 1.0, 0.5), (2, 4.0, 0.3, 2.0), (3, 1.0, 2.5, -1.5), (2, 8.0, -0.2, 4.0)])
def test_well_matches_direct_quadrature(n, delta, x, p):
    got = well_cg_tensor(n, CoarseGrainSpec(delta), [x], [p])[0, 0]
    assert got == pytest.approx(_brute_well(n, delta, x, p), abs=1e-9)


def test_well_mass_and_symmetry():
    cg = CoarseGrainSpec(3.0, KernelMass.UNIT)
    xs = np.linspace(-1.5, np.pi + 1.5, 121)
    ps = np.linspace(-40, 40, 4001)
    v = well_cg_tensor(2, cg, xs, ps)
    total = integrate.trapezoid(integrate.trapezoid(v, ps, axis=1), xs)
    assert total == pytest.approx(1.0, abs=2e-3)
    np.testing.assert_allclose(v, v[:, ::-1], atol=1e-14)
    np.testing.assert_allclose(v, v[::-1, :], atol=1e-13)


def test_well_noise_bound_is_small():
    vals, err = well_cg_tensor(2, CoarseGrainSpec(2.0), np.linspace(0, 1, 5), np.array([0.0, 50.0]), noise=True)
    assert np.all(err >= 0) and np.max(err) < 1e-13


def test_well_matches_grid_convolution_at_low_momentum():
    cg = CoarseGrainSpec(4.0)
    spec = SquareWell(1)
    geom = auto_geometry(spec, cg, p_max=10.0, refine=2.0)
    ref = grid_convolve(grid_sample(spec, geom), cg, "fft")
    keep = np.abs(geom.ps) < 4.0
    got = well_cg_tensor(1, cg, geom.xs, geom.ps[keep])
    assert np.max(np.abs(got - ref.values[:, keep])) < 1e-4


def test_offdiag_diagonal_case_matches_closed_form():
    cg = CoarseGrainSpec(3.0)
    s = np.linspace(0, 12, 25)
    np.testing.assert_allclose(offdiag_cg_radial(2, 2, cg, s), analytic_cg_ho(2, cg).radial(s), atol=1e-12)


def test_offdiag_matches_grid_convolution():
    cg = CoarseGrainSpec(3.0)
    spec = HOOffDiagonal(3, 1)
    geom = auto_geometry(spec, cg)
    ref = grid_convolve(grid_sample(spec, geom), cg, "fft")
    got = offdiag_cg_tensor(3, 1, cg, geom.xs, geom.ps)
    assert np.max(np.abs(got - ref.values)) < 1e-4
