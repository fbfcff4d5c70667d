import math

import numpy as np
import pytest

from breathmode import DomainError, SystemSpec, estimate_frequencies
from breathmode.model import virial_residual
from breathmode import twobody as tb


@pytest.fixture(scope="module")
def coulomb_1d():
    spec = SystemSpec(1, 2, lam=1.0)
    return spec, tb.relative_spectrum(spec)


def test_ideal_spectrum():
    rs = tb.relative_spectrum(SystemSpec(1, 2))
    assert np.allclose(rs.gaps[1:5], [2, 4, 6, 8], atol=1e-8)
    assert tb.exact_breathing_frequency(rs) == pytest.approx(2.0, abs=1e-9)


def test_coulomb_1d_regression(coulomb_1d):
    # frozen from converged runs with two refinement levels agreeing to 1e-9
    spec, rs = coulomb_1d
    assert tb.exact_breathing_frequency(rs) == pytest.approx(1.9043531, abs=1e-6)
    est = estimate_frequencies(tb.ground_state(spec, rs), spec)
    assert est.sr31 == pytest.approx(1.909343, abs=1e-5)
    assert est.sr1m1 == pytest.approx(1.905207, abs=1e-5)


def test_virial_and_truncation(coulomb_1d):
    spec, rs = coulomb_1d
    gs = tb.ground_state(spec, rs)
    assert virial_residual(gs.energies, 1) < 1e-10
    # m1 from the truncated spectrum matches 2 <rho^2>-derived value
    m1_levels = tb.relative_moment(rs, 1)
    assert m1_levels == pytest.approx(2 * 2 * rs.trap, rel=1e-5)


def test_two_dimensional_closed_form():
    # at this coupling the relative ground state has a polynomial closed form, E_rel = 2
    rs = tb.relative_spectrum(SystemSpec(2, 2, lam=1.0))
    assert rs.eigenvalues[0] == pytest.approx(2.0, abs=1e-8)
    assert tb.exact_breathing_frequency(rs) == pytest.approx(1.8469894, abs=1e-6)


def test_dipole_small_coupling_approaches_two():
    rs = tb.relative_spectrum(SystemSpec(1, 2, alpha=3, lam=1e-3))
    assert abs(tb.exact_breathing_frequency(rs) - 2.0) < 2e-3


def test_gamma_derivative_matches_finite_difference():
    spec = SystemSpec(1, 2, alpha=3, lam=1.0)
    analytic = tb.ground_state(spec).r2_dgamma
    up = tb.ground_state(spec.with_gamma(1.001)).r2
    down = tb.ground_state(spec.with_gamma(0.999)).r2
    assert analytic == pytest.approx((up - down) / 0.002, rel=1e-5)


def test_guards():
    with pytest.raises(DomainError):
        tb.relative_spectrum(SystemSpec(1, 3, lam=1.0))
    with pytest.raises(DomainError):
        tb.relative_spectrum(SystemSpec(1, 2, lam=1.0), l=1)
    with pytest.raises(DomainError):
        tb.relative_spectrum(SystemSpec(1, 2, lam=1.0), n_states=5)


def test_resolution_error():
    from breathmode import ResolutionError
    with pytest.raises(ResolutionError):
        tb.relative_spectrum(SystemSpec(1, 2, lam=1.0), schedule=((4, 4), (5, 4)))


def test_wavefunction_dump(tmp_path, coulomb_1d):
    _, rs = coulomb_1d
    path = tmp_path / "wf.csv"
    tb.dump_wavefunctions(rs, path, n_points=50)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (50, 3)
    rho, u0 = data[:, 0], data[:, 1]
    assert u0[0] == pytest.approx(0.0, abs=1e-8)
    assert np.trapezoid(u0**2, rho) == pytest.approx(1.0, rel=1e-3)


def test_dipole_2d_weak_coupling_is_logarithmic():
    # s-wave 1/rho^3 acts as a hard core of radius ~lam: w - 2 ~ c / ln(1/lam)^2
    scaled = []
    for lam in (1e-3, 1e-5):
        rs = tb.relative_spectrum(SystemSpec(2, 2, alpha=3, lam=lam))
        scaled.append((tb.exact_breathing_frequency(rs) - 2) * math.log(1 / lam) ** 2)
    assert scaled[0] == pytest.approx(0.6305, rel=1e-3)
    assert scaled[1] == pytest.approx(scaled[0], rel=0.1)
