import math

import numpy as np
import pytest

from breathmode import ContinuationError, DomainError, SystemSpec, estimate_frequencies
from breathmode import tf
from breathmode.model import classical_energy_estimate


def test_ideal_density_profile():
    x = np.linspace(-3, 3, 20001)
    n = tf.ideal_density_1d(2, x)
    assert n[10000] == pytest.approx(2 / math.pi)
    assert n[0] == 0.0 and n[-1] == 0.0
    assert np.trapezoid(n, x) == pytest.approx(2.0, rel=1e-5)


def test_hat_kernel_matches_quadrature():
    h, kappa = 0.05, 0.1
    w = tf.hat_kernel_weights(h, kappa, 4)
    u = np.linspace(-h, h, 200001)
    hat = 1 - np.abs(u) / h
    for k in (-3, 0, 2):
        ref = np.trapezoid(hat / np.sqrt((u - k * h) ** 2 + kappa**2), u)
        assert w[k + 3] == pytest.approx(ref, rel=1e-8)


def test_ideal_fixed_point():
    grid = tf.default_tf_grid(50, 0.0)
    init = tf.ideal_density_1d(50, grid.x)
    sol = tf.tf1d_solve(50, 0.0, grid=grid, initial=init / grid.integrate(init) * 50)
    assert sol.residual < 1e-9
    assert sol.energies.total == pytest.approx(50**2 / 2, rel=1e-4)


@pytest.fixture(scope="module")
def tf100():
    return tf.tf1d_solve(100, 1.0)


def test_normalisation_and_residual(tf100):
    assert tf100.grid.integrate(tf100.density) == pytest.approx(100, abs=1e-8)
    assert tf100.residual < 1e-7
    assert np.all(tf100.density >= 0)


def test_density_vanishes_outside_support(tf100):
    x = tf100.grid.x
    assert tf100.density[np.abs(x) > 0.95 * x.max()].max() == 0.0


def test_energy_grows_with_coupling(tf100):
    weaker = tf.tf1d_solve(100, 0.5)
    assert weaker.energies.total < tf100.energies.total


def test_continuation():
    chain = tf.tf1d_continuation(200, [0.01, 0.1, 0.5, 1.0])
    assert [round(s.lam, 3) for s in chain] == [0.01, 0.1, 0.5, 1.0]
    assert all(s.residual < 1e-7 for s in chain)
    single = tf.tf1d_continuation(200, [0.01])[0]
    direct = tf.tf1d_solve(200, 0.01, grid=single.grid)
    assert single.energies.total == pytest.approx(direct.energies.total, rel=1e-10)


@pytest.mark.parametrize("schedule", [[], [0.1, 1.0], [0.01, 0.5, 0.2]])
def test_continuation_guards(schedule):
    with pytest.raises(DomainError):
        tf.tf1d_continuation(100, schedule)


def test_continuation_reports_failing_lambda():
    with pytest.raises(ContinuationError) as info:
        tf.tf1d_continuation(100, [0.01, 1.0], max_iter=1, mixing_steps=1)
    assert info.value.failed_lambda is not None


def test_density_csv(tmp_path, tf100):
    path = tmp_path / "n.csv"
    tf100.dump_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[1] == 2


def test_tf2d_energy_substitution():
    e = tf.tf2d_energy(1.0, 4, 0.0)
    assert e.total == pytest.approx(16 / 3)
    with pytest.raises(DomainError):
        tf.tf2d_energy(0.0, 4, 1.0)


def test_tf2d_ideal_minimum():
    r = tf.tf2d_minimize(30, 0.0)
    assert r.gamma_shape == pytest.approx(1.0, abs=1e-12)
    assert r.energies.total == pytest.approx((2 / 3) * 30**1.5)
    gs = r.to_ground_state()
    assert estimate_frequencies(gs, SystemSpec(2, 30), improved=False).sr31 == pytest.approx(2.0)


def test_tf2d_interaction_scaling():
    a = tf.tf2d_energy(1.3, 100, 1.0).interaction
    b = tf.tf2d_energy(1.3, 200, 1.0).interaction
    assert b / a == pytest.approx(2**1.75)


def test_tf2d_stationarity_and_monotonicity():
    # the width parameter multiplies the cloud radius, so it grows with repulsion
    prev_g, prev_r0 = None, None
    for lam in (0.1, 1.0, 10.0):
        r = tf.tf2d_minimize(1000, lam)
        assert abs(tf.tf2d_gradient(r) * r.gamma_shape) <= 1e-10 * r.energies.total
        if prev_g is not None:
            assert r.gamma_shape > prev_g and r.r0 > prev_r0
        prev_g, prev_r0 = r.gamma_shape, r.r0
    sr = [estimate_frequencies(tf.tf2d_minimize(n, 1.0).to_ground_state(), SystemSpec(2, n)).sr31
          for n in (100, 1000, 10000)]
    assert sr[0] > sr[1] > sr[2]


@pytest.mark.parametrize("lam", [1e3, 1e5])
def test_tf2d_strong_coupling_asymptote(lam):
    r = tf.tf2d_minimize(50, lam)
    assert r.energies.total == pytest.approx(classical_energy_estimate(2, 50, lam), rel=1e-2)
    assert r.energies.kinetic / r.energies.trap < 0.05


def test_tf2d_rows(tmp_path):
    rows = [tf.tf2d_minimize(n, 1.0) for n in (10, 20)]
    path = tmp_path / "tf2d.csv"
    tf.dump_tf2d_rows(rows, path)
    assert path.read_text().splitlines()[0] == ",".join(tf.TF2D_COLUMNS)
