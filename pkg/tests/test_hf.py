import math

import numpy as np
import pytest

from breathmode import ConvergenceError, CutoffError, DomainError, SystemSpec, estimate_frequencies
from breathmode.hf import (Solver2D, generalized_virial_residual, hf_ground_state, hf_solve_1d,
                           hf_solve_2d, hund_occupation, load_checkpoint, save_checkpoint,
                           shells_needed)
from breathmode.hf.oscillator import (CoulombOperator, angular_momentum_transform,
                                      cartesian_basis, one_body)
from breathmode.hf.scf2d import get_solver
from breathmode.twobody import ground_state as exact_ground_state


# ---------------------------------------------------------------- 1D


@pytest.fixture(scope="module")
def hf1d_three():
    spec = SystemSpec(1, 3, lam=1.0)
    return spec, hf_solve_1d(spec)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_1d_ideal_energy(n):
    gs = hf_solve_1d(SystemSpec(1, n))
    assert gs.energies.total == pytest.approx(n * n / 2, abs=1e-9)


def test_1d_generalized_virial(hf1d_three):
    _, gs = hf1d_three
    assert generalized_virial_residual(gs) < 1e-6


def test_1d_r2_consistent_with_trap(hf1d_three):
    _, gs = hf1d_three
    assert gs.r2 == pytest.approx(2 * gs.energies.trap, rel=1e-10)


def test_1d_density_normalised(hf1d_three):
    _, gs = hf1d_three
    state = gs.meta["state"]
    assert np.dot(state.density, state.grid.w) == pytest.approx(3.0, abs=1e-10)


def test_1d_variational_bound():
    spec = SystemSpec(1, 2, lam=1.0)
    assert hf_solve_1d(spec).energies.total >= exact_ground_state(spec).energies.total - 1e-9


def test_1d_guards():
    with pytest.raises(DomainError):
        hf_solve_1d(SystemSpec(2, 2, lam=1.0))
    with pytest.raises(DomainError):
        hf_solve_1d(SystemSpec(1, 2, alpha=3, lam=1.0))
    with pytest.raises(DomainError):
        hf_solve_1d(SystemSpec(1, 2, lam=1.0), mixing=0.0)
    with pytest.raises(ConvergenceError):
        hf_solve_1d(SystemSpec(1, 3, lam=1.0), max_iter=3)


def test_1d_warm_start_converges_faster(hf1d_three):
    spec, gs = hf1d_three
    state = gs.meta["state"]
    again = hf_solve_1d(spec, grid=state.grid, initial=state.density_matrix)
    assert again.meta["iterations"] < 5
    assert again.energies.total == pytest.approx(gs.energies.total, abs=1e-9)


def test_checkpoint_roundtrip(tmp_path, hf1d_three):
    spec, gs = hf1d_three
    path = tmp_path / "hf.npz"
    d = gs.meta["state"].density_matrix
    save_checkpoint(path, spec, gs.meta["grid"], {"density": d})
    back = load_checkpoint(path, spec, gs.meta["grid"])
    assert np.array_equal(back["density"], d)
    assert load_checkpoint(path, spec.with_lambda(2.0), gs.meta["grid"]) is None
    assert load_checkpoint(tmp_path / "missing.npz") is None


# ---------------------------------------------------------------- 2D basis


def test_basis_layout():
    assert cartesian_basis(3) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    kin, trap = one_body(4)
    h = kin + trap
    levels = np.sort(np.linalg.eigvalsh(h))
    # oscillator shells k have energy k + 1 and degeneracy k + 1
    assert np.allclose(levels, [1, 2, 2, 3, 3, 3, 4, 4, 4, 4])


def test_angular_momentum_transform_unitary():
    u, ms, shells = angular_momentum_transform(5)
    assert np.allclose(u.conj().T @ u, np.eye(len(ms)))
    assert sorted(ms[shells == 3]) == [-3, -1, 1, 3]


def test_coulomb_lowest_element():
    # <00,00|1/r|00,00> for two ground-state oscillator orbitals in 2D
    op = CoulombOperator(3)
    assert op.element((0, 0), (0, 0), (0, 0), (0, 0)) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-13)


def test_direct_exchange_match_brute_force():
    s = 4
    op = CoulombOperator(s)
    basis = cartesian_basis(s)
    n = len(basis)
    eri = np.array([[[[op.element(basis[a], basis[c], basis[b], basis[d]) for d in range(n)]
                      for b in range(n)] for c in range(n)] for a in range(n)])
    rng = np.random.default_rng(3)
    p = rng.normal(size=(n, n))
    p = p + p.T
    j_ref = np.einsum("acbd,db->ac", eri, p)
    k_ref = np.einsum("adbc,db->ac", eri, p)
    assert np.allclose(op.direct(p), j_ref, atol=1e-13)
    assert np.allclose(op.exchange(p), k_ref, atol=1e-13)


# ---------------------------------------------------------------- 2D SCF


def test_hund_occupation():
    assert hund_occupation(2) == [(0, 0, 1), (0, 0, -1)]
    occ4 = hund_occupation(4)
    assert sorted(o for o in occ4 if o[0] == 1) == [(1, -1, 1), (1, 1, 1)]
    assert shells_needed(12) == 3 and shells_needed(13) == 4
    with pytest.raises(DomainError):
        hund_occupation(0)


def test_2d_ideal_closed_shell():
    gs = hf_solve_2d(SystemSpec(2, 6), shell_cutoff=6, check_cutoff=False)
    assert gs.energies.total == pytest.approx(10.0, abs=1e-10)


def test_2d_two_particle_regression():
    spec = SystemSpec(2, 2, lam=0.5)
    gs = hf_ground_state(spec)
    assert gs.energies.total == pytest.approx(2.6021139, abs=1e-6)
    assert estimate_frequencies(gs, spec).sr1m1 == pytest.approx(1.891193, abs=2e-5)


def test_2d_restricted_equals_unrestricted_for_closed_shell():
    solver = get_solver(8)
    spec = SystemSpec(2, 6, lam=0.5)
    r = solver.solve(spec)
    u = solver.solve(spec, restricted=False)
    assert r.energies.total == pytest.approx(u.energies.total, abs=1e-8)


def test_2d_restricted_above_unrestricted_open_shell():
    solver = get_solver(8)
    spec = SystemSpec(2, 3, lam=0.5)
    r = solver.solve(spec).energies.total
    u = solver.solve(spec, restricted=False).energies.total
    assert r >= u - 1e-9


def test_2d_basis_monotonicity():
    spec = SystemSpec(2, 6, lam=0.5)
    energies = [get_solver(s).solve(spec).energies.total for s in (4, 6, 8)]
    assert energies[0] >= energies[1] >= energies[2]


def test_2d_virial():
    spec = SystemSpec(2, 6, lam=0.5)
    e = get_solver(12).solve(spec).energies
    assert abs(2 * e.kinetic - 2 * e.trap + e.interaction) / e.total < 1e-4


def test_2d_cutoff_error():
    with pytest.raises(CutoffError):
        hf_solve_2d(SystemSpec(2, 6, lam=2.0), shell_cutoff=4, cutoff_tol=1e-6)


def test_2d_guards():
    with pytest.raises(DomainError):
        hf_solve_2d(SystemSpec(2, 12, lam=0.5), shell_cutoff=2)
    with pytest.raises(DomainError):
        hf_solve_2d(SystemSpec(2, 2, alpha=3, lam=0.5))
    with pytest.raises(DomainError):
        Solver2D(0)
