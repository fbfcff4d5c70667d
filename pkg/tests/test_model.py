import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from breathmode import DomainError, EnergyBreakdown, GroundStateResult, Engine, SpinPolicy, SystemSpec
from breathmode import model


def test_spec_defaults():
    s = SystemSpec(1, 4, lam=1.0)
    assert s.kappa == 0.1
    assert s.spin_policy is SpinPolicy.POLARIZED_1D
    assert SystemSpec(1, 2, alpha=3, lam=1.0).kappa == 0.0
    s2 = SystemSpec(2, 6, lam=0.5)
    assert s2.kappa == 0.0 and s2.spin_policy is SpinPolicy.HUND_2D


@pytest.mark.parametrize("kwargs", [
    dict(dimension=3, particles=2), dict(dimension=1, particles=0),
    dict(dimension=1, particles=2, alpha=2), dict(dimension=1, particles=2, lam=-1.0),
    dict(dimension=2, particles=2, kappa=0.1), dict(dimension=1, particles=2, kappa=0.0),
    dict(dimension=1, particles=2, trap_scale=0.0),
    dict(dimension=1, particles=2, spin_policy="hund-2d"),
])
def test_spec_rejects(kwargs):
    with pytest.raises(DomainError):
        SystemSpec(**kwargs)


def test_with_gamma_and_lambda_keep_other_fields():
    s = SystemSpec(1, 3, lam=1.0, kappa=0.2)
    g = s.with_gamma(1.01)
    assert g.trap_scale == 1.01 and g.kappa == 0.2 and g.lam == 1.0
    assert s.with_lambda(2.0).lam == 2.0


def test_energy_breakdown_total_uses_gamma():
    e = EnergyBreakdown(1.0, 2.0, 3.0, gamma=1.5)
    assert e.total == pytest.approx(1.0 + 3.0 + 3.0)
    assert e.as_dict()["total"] == e.total


def test_ground_state_guards():
    e = EnergyBreakdown(1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        GroundStateResult(e, 0.0, Engine.HARTREE_FOCK)
    with pytest.raises(DomainError):
        GroundStateResult(e, 1.0, Engine.HARTREE_FOCK, r2_dgamma=0.1)


def test_frequency_window():
    assert model.frequency_window(1) == (math.sqrt(3), 2.0)
    assert model.frequency_window(3) == (2.0, math.sqrt(5))
    with pytest.raises(DomainError):
        model.frequency_window(2)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("n", [1, 2, 6, 12])
def test_ideal_identities(d, n):
    e0 = model.ideal_energy(d, n)
    e = EnergyBreakdown(e0 / 2, e0 / 2, 0.0)
    assert model.virial_residual(e, 1) == 0.0
    # at lam = 0 the cloud has its ideal extension
    assert model.localization_chi(d, n, e) == pytest.approx(1.0, rel=0.15)


def test_ideal_energy_scaling():
    assert model.ideal_energy(1, 4) == 8.0
    assert model.ideal_energy(2, 6) == pytest.approx((2 / 3) * 6**1.5)


def test_classical_constant_is_derivation_value():
    c = 512 * math.sqrt(2) / (315 * math.pi)
    assert model.CLASSICAL_CONSTANT_2D == pytest.approx((1.5 * c) ** (2 / 3), rel=1e-12)
    assert model.CLASSICAL_CONSTANT_2D == pytest.approx(1.06401, abs=1e-5)


def test_lambda_tilde_1d_minimum_at_7():
    n = np.arange(2, 101)
    assert n[np.argmin(model.lambda_tilde(1, n))] == 7


@given(st.integers(1, 10**6))
def test_lambda_tilde_2d_power_law(n):
    ratio = model.lambda_tilde(2, n) / model.lambda_tilde(2, 1)
    assert ratio == pytest.approx(n**-0.25, rel=1e-12)


def test_lambda_tilde_crossing():
    # ideal and classical estimates agree at lambda_tilde
    for d, n in ((1, 10), (2, 50)):
        lt = model.lambda_tilde(d, n)
        assert model.classical_energy_estimate(d, n, lt) == pytest.approx(model.ideal_energy(d, n))


def test_estimates_reject_bad_input():
    with pytest.raises(DomainError):
        model.classical_energy_estimate(1, 1, 1.0)
    with pytest.raises(DomainError):
        model.classical_energy_estimate(2, 5, 0.0)
    with pytest.raises(DomainError):
        model.lambda_tilde(1, 1)
