import itertools
import math

import numpy as np
import pytest

from corestrip import (DomainError, core_constants, core_threshold, density_of_mu,
                       lambda_of_mean, mu_of_c, poisson_tail, psi,
                       supercritical_profile, theta_of_zeta)

# frozen from independent root solves: e^mu = 1 + 2mu and e^mu = 1 + mu + mu^2
MU_32 = 1.2564312086261695
MU_23 = 1.7932821329007607
C_32 = 0.8184691607613761
C_23 = 1.6754594357558368

VALID_RK = [(r, k) for r, k in itertools.product(range(2, 6), repeat=2) if (r, k) != (2, 2)]


def test_poisson_tail_values():
    assert poisson_tail(0, 5.0) == 1.0
    assert abs(poisson_tail(1, 1.0) - (1 - math.exp(-1))) < 1e-12
    assert abs(poisson_tail(2, 2.0) - (1 - 3 * math.exp(-2))) < 1e-12


def test_poisson_tail_domain():
    with pytest.raises(DomainError):
        poisson_tail(1, -0.5)
    with pytest.raises(DomainError):
        poisson_tail(-1, 1.0)


def test_poisson_tail_recurrence():
    # f_t(lam) = f_{t-1}(lam) - e^-lam lam^(t-1)/(t-1)!
    worst = 0.0
    for lam in np.linspace(0.1, 10.0, 34):
        for t in range(1, 31):
            residual = poisson_tail(t, lam) - (
                poisson_tail(t - 1, lam) - math.exp(-lam) * lam ** (t - 1) / math.factorial(t - 1))
            worst = max(worst, abs(residual))
    assert worst <= 1e-12


def test_poisson_tail_monotone_and_bounded():
    lams = np.linspace(0.0, 12.0, 60)
    for t in range(1, 8):
        vals = poisson_tail(t, lams)
        assert np.all(np.diff(vals) > 0)
        assert np.all((vals >= 0) & (vals <= 1))


@pytest.mark.parametrize("r,k,c_expected,mu_expected",
                         [(3, 2, C_32, MU_32), (2, 3, C_23, MU_23)])
def test_core_threshold_frozen(r, k, c_expected, mu_expected):
    c, mu = core_threshold(r, k)
    assert abs(c - c_expected) < 1e-10
    assert abs(mu - mu_expected) < 1e-8


def test_core_threshold_rejects_bad_pairs():
    for r, k in [(2, 2), (1, 3), (3, 1), (0, 0)]:
        with pytest.raises(DomainError):
            core_threshold(r, k)


def test_unimodality_of_density_grid():
    # discrete derivative of the 1024-point scan changes sign exactly once
    for r, k in VALID_RK:
        hi = 4.0 * r * k
        grid = np.linspace(hi / 1024, hi, 1024)
        vals = density_of_mu(grid, r, k)
        signs = np.sign(np.diff(vals))
        changes = np.count_nonzero(np.diff(signs) != 0)
        assert changes == 1, (r, k, changes)


def test_mu_of_c_boundary_and_residual():
    c_rk, mu_rk = core_threshold(3, 2)
    assert abs(mu_of_c(c_rk, 3, 2) - mu_rk) < 1e-9
    mu = mu_of_c(0.9, 3, 2)
    assert mu > 1.2564
    assert abs(density_of_mu(mu, 3, 2) - 0.9) < 1e-9
    with pytest.raises(DomainError):
        mu_of_c(0.5, 3, 2)


def test_mu_of_c_increasing_in_delta():
    for r, k in [(3, 2), (2, 3)]:
        c_rk, _ = core_threshold(r, k)
        mus = [mu_of_c(c_rk + d, r, k) for d in (0.01, 0.05, 0.1)]
        assert mus[0] < mus[1] < mus[2]


def test_core_constants_32():
    tc = core_constants(3, 2)
    assert abs(tc.alpha - 0.3577) < 5e-4
    assert abs(tc.beta - 0.2995) < 5e-4
    assert abs(tc.zeta - 2.512) < 2e-3
    assert abs(tc.p_bar - 0.5) < 1e-8
    assert abs(tc.alpha - poisson_tail(2, tc.mu_rk)) < 1e-12
    assert abs(tc.beta - tc.mu_rk * poisson_tail(1, tc.mu_rk) / 3) < 1e-12


@pytest.mark.parametrize("r,k", VALID_RK)
def test_critical_identities(r, k):
    tc = core_constants(r, k)
    assert abs(tc.p_bar * (r - 1) * (k - 1) - 1.0) <= 1e-8
    assert k < tc.zeta < r * (k - 1)


def test_lambda_of_mean():
    lam = lambda_of_mean(2.0, 1)
    assert abs(lam - 1.5936242600400399) < 1e-8
    for x, k in [(2.5, 2), (3.0, 2), (4.7, 3), (2.0001, 2)]:
        lam = lambda_of_mean(x, k)
        assert abs(lam * poisson_tail(k - 1, lam) / poisson_tail(k, lam) - x) <= 1e-9
    with pytest.raises(DomainError):
        lambda_of_mean(2.0, 2)
    with pytest.raises(DomainError):
        lambda_of_mean(1.5, 2)


def test_lambda_of_mean_small_at_boundary():
    assert lambda_of_mean(2.0 + 1e-6, 2) < 0.01


def test_psi_critical_values():
    z32 = core_constants(3, 2).zeta
    z23 = core_constants(2, 3).zeta
    assert abs(psi(z32, 2) - 0.5) < 1e-8
    assert abs(psi(z23, 3) - 0.5) < 1e-8


def test_psi_strictly_decreasing():
    xs = np.linspace(2.05, 8.0, 40)
    vals = [psi(float(x), 2) for x in xs]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_theta_of_zeta_sign():
    tc = core_constants(3, 2)
    assert abs(theta_of_zeta(tc.zeta, 3, 2)) <= 1e-8
    assert theta_of_zeta(tc.zeta + 0.05, 3, 2) < 0
    assert theta_of_zeta(tc.zeta - 0.05, 3, 2) > 0
    with pytest.raises(DomainError):
        theta_of_zeta(2.0, 3, 2)


def test_supercritical_profile_consistency():
    prof = supercritical_profile(0.9, 3, 2)
    assert prof.mu_c >= core_constants(3, 2).mu_rk
    assert abs(prof.alpha_c - poisson_tail(2, prof.mu_c)) < 1e-12
    assert abs(prof.beta_c - prof.mu_c * poisson_tail(1, prof.mu_c) / 3) < 1e-12
    assert abs(density_of_mu(prof.mu_c, 3, 2) - 0.9) < 1e-9
