"""Analytic constants of the k-core phase transition.

Everything in this module is deterministic numerics: Poisson tails, the
k-core emergence threshold

    c(r, k) = inf_{mu > 0}  mu / (r * f_{k-1}(mu)^(r-1)),

the critical constants (alpha, beta, zeta, p_bar) at that threshold, the
supercritical profile mu(c) / alpha(c) / beta(c), and the psi / theta
functions that drive the light-mass drift of the stripping process.

Here f_t(lam) = P(Poisson(lam) >= t).  All root finding is bisection with
bracket expansion; the threshold minimization is a coarse grid scan followed
by golden-section refinement.  Target absolute tolerance is 1e-10 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammainc

from .errors import DomainError

__all__ = [
    "poisson_tail",
    "density_of_mu",
    "core_threshold",
    "mu_of_c",
    "core_constants",
    "supercritical_profile",
    "lambda_of_mean",
    "psi",
    "theta_of_zeta",
    "ThresholdConstants",
    "SupercriticalProfile",
]

#: golden-section step ratio 1/phi
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

_ROOT_TOL = 1e-10
_GRID_POINTS = 1024


def poisson_tail(t: int, lam) -> float:
    """Upper tail P(Poisson(lam) >= t).

    Accepts a scalar or array ``lam``; ``t <= 0`` gives 1 exactly.  For
    t >= 1 the tail equals the regularized lower incomplete gamma function
    P(t, lam), which is evaluated to full relative precision in both the
    lam << t and lam >> t regimes (well below the 1e-12 absolute target).
    """
    arr = np.asarray(lam, dtype=float)
    if np.any(arr < 0):
        raise DomainError("poisson_tail: lambda must be nonnegative")
    if t < 0 or int(t) != t:
        raise DomainError("poisson_tail: t must be a nonnegative integer")
    if t == 0:
        out = np.ones_like(arr)
    else:
        out = gammainc(t, arr)
    return float(out) if np.isscalar(lam) or arr.ndim == 0 else out


def density_of_mu(mu, r: int, k: int):
    """Edge density m/n at which mu solves the core fixed point.

    This is mu / (r * f_{k-1}(mu)^(r-1)); its infimum over mu > 0 is the
    k-core emergence threshold and its larger preimage is mu(c).
    """
    return mu / (r * poisson_tail(k - 1, mu) ** (r - 1))


def _validate_rk(r: int, k: int) -> None:
    if r < 2 or k < 2 or int(r) != r or int(k) != k:
        raise DomainError(f"unsupported parameters r={r}, k={k}: need integers r,k >= 2")
    if (r, k) == (2, 2):
        raise DomainError("unsupported parameters (r, k) = (2, 2): the threshold "
                          "infimum is not attained")


def _golden_min(f, lo: float, hi: float, xtol: float) -> float:
    """Golden-section minimizer of a unimodal f on [lo, hi]."""
    a, b = lo, hi
    h = b - a
    c = b - _INVPHI * h
    d = a + _INVPHI * h
    fc, fd = f(c), f(d)
    while h > xtol:
        h *= _INVPHI
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _stationarity_residual(mu: float, r: int, k: int) -> float:
    """Sign of the density map's slope at mu: f_{k-1}(mu) - (r-1) e^-mu mu^(k-1)/(k-2)!.

    Negative left of the minimizer, positive right of it.
    """
    return poisson_tail(k - 1, mu) - (r - 1) * math.exp(-mu) * mu ** (k - 1) / math.factorial(k - 2)


@lru_cache(maxsize=256)
def core_threshold(r: int, k: int) -> tuple[float, float]:
    """k-core emergence threshold and its minimizer, as (c_rk, mu_rk).

    Grid scan of density_of_mu on (0, 4*r*k] (1024 points) brackets the
    minimum and golden-section refines it.  Comparison-based search cannot
    place the argmin below ~sqrt(eps) because the objective is quadratically
    flat there, so a final bisection on the analytic stationarity residual
    polishes mu to the 1e-10 target.
    """
    _validate_rk(r, k)
    hi = 4.0 * r * k
    grid = np.linspace(hi / _GRID_POINTS, hi, _GRID_POINTS)
    vals = density_of_mu(grid, r, k)
    i = int(np.argmin(vals))
    lo_b = grid[i - 1] if i > 0 else grid[0] / 2.0
    hi_b = grid[i + 1] if i < len(grid) - 1 else hi
    mu = _golden_min(lambda m: density_of_mu(m, r, k), lo_b, hi_b, 1e-10)
    lo, hi = mu - 1e-6, mu + 1e-6
    while _stationarity_residual(lo, r, k) > 0:
        lo -= 1e-6
    while _stationarity_residual(hi, r, k) < 0:
        hi += 1e-6
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if _stationarity_residual(mid, r, k) < 0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    return float(density_of_mu(mu, r, k)), float(mu)


def mu_of_c(c: float, r: int, k: int, *, tol: float = _ROOT_TOL) -> float:
    """Larger root mu(c) of c = density_of_mu(mu), defined for c >= c_rk.

    Bisection on [mu_rk, hi] with hi doubled until it brackets; the density
    map is increasing on that interval.
    """
    _validate_rk(r, k)
    c_rk, mu_rk = core_threshold(r, k)
    if c < c_rk - tol:
        raise DomainError(f"mu_of_c: c={c} is below the threshold c_rk={c_rk}; no solution")
    if c <= c_rk:
        return mu_rk
    hi = max(2.0 * mu_rk, 1.0)
    while density_of_mu(hi, r, k) < c:
        hi *= 2.0
    lo = mu_rk
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if density_of_mu(mid, r, k) < c:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lambda_of_mean(x: float, k: int, *, tol: float = _ROOT_TOL) -> float:
    """Rate lam > 0 of the Poisson truncated at k with mean x.

    Solves lam * f_{k-1}(lam) / f_k(lam) = x by bisection.  The truncated
    mean decreases to k as lam -> 0+, so the domain is x > k; the mean also
    dominates lam, so [~0, x] brackets the root.
    """
    if x <= k:
        raise DomainError(f"lambda_of_mean: mean x={x} must exceed the truncation k={k}")

    def mean(lam: float) -> float:
        return lam * poisson_tail(k - 1, lam) / poisson_tail(k, lam)

    lo, hi = 1e-12, float(x)
    if mean(lo) >= x:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mean(mid) < x:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def psi(x: float, k: int) -> float:
    """Probability that a random point of a heavy bin sits in a degree-k bin,
    as a function of the heavy-side mean degree x > k.

    With lam = lambda_of_mean(x, k) this is
    exp(-lam) * lam^(k-1) / (f_{k-1}(lam) * (k-1)!), a strictly decreasing
    function of x on (k, inf).
    """
    lam = lambda_of_mean(x, k)
    return math.exp(-lam) * lam ** (k - 1) / (poisson_tail(k - 1, lam) * math.factorial(k - 1))


def theta_of_zeta(z: float, r: int, k: int) -> float:
    """Branching-style drift parameter -1 + (r-1)(k-1)*psi(z, k).

    Negative when the heavy-side mean degree z exceeds the critical zeta
    (light mass shrinks), positive below it, zero at criticality.
    """
    if z <= k:
        raise DomainError(f"theta_of_zeta: zeta={z} must exceed k={k}")
    return -1.0 + (r - 1) * (k - 1) * psi(z, k)


def lambda_of_mean_vec(x: np.ndarray, k: int) -> np.ndarray:
    """Vectorized lambda_of_mean; entries with x <= k come back as nan."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.nan)
    ok = x > k
    if not np.any(ok):
        return out
    xs = x[ok]
    lo = np.full(xs.shape, 1e-12)
    hi = xs.copy()
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        mean = mid * poisson_tail(k - 1, mid) / poisson_tail(k, mid)
        below = mean < xs
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out[ok] = 0.5 * (lo + hi)
    return out


def theta_of_zeta_vec(z: np.ndarray, r: int, k: int) -> np.ndarray:
    """Vectorized theta_of_zeta; entries with z <= k come back as nan."""
    lam = lambda_of_mean_vec(z, k)
    with np.errstate(invalid="ignore"):
        ps = np.exp(-lam) * lam ** (k - 1) / (poisson_tail(k - 1, np.nan_to_num(lam, nan=1.0))
                                              * math.factorial(k - 1))
        ps = np.where(np.isnan(lam), np.nan, ps)
    return -1.0 + (r - 1) * (k - 1) * ps


@dataclass(frozen=True)
class ThresholdConstants:
    """All critical constants for one (r, k)."""

    r: int
    k: int
    c_rk: float      # threshold edge density m/n
    mu_rk: float     # minimizer of the density map
    alpha: float     # core vertex fraction at the threshold
    beta: float      # core edge fraction at the threshold
    zeta: float      # critical heavy-side mean degree, r*beta/alpha
    p_bar: float     # critical degree-k point probability, psi(zeta)


@dataclass(frozen=True)
class SupercriticalProfile:
    """Core profile at a fixed density c above the threshold."""

    c: float
    mu_c: float      # larger root of the density map at c
    alpha_c: float   # limiting core vertex fraction
    beta_c: float    # limiting core edge fraction


def core_constants(r: int, k: int) -> ThresholdConstants:
    """Threshold plus the derived critical constants for (r, k)."""
    c_rk, mu_rk = core_threshold(r, k)
    alpha = poisson_tail(k, mu_rk)
    beta = mu_rk * poisson_tail(k - 1, mu_rk) / r
    zeta = r * beta / alpha
    return ThresholdConstants(r=r, k=k, c_rk=c_rk, mu_rk=mu_rk, alpha=alpha,
                              beta=beta, zeta=zeta, p_bar=psi(zeta, k))


def supercritical_profile(c: float, r: int, k: int) -> SupercriticalProfile:
    """Limiting core fractions alpha(c), beta(c) for a density c >= c_rk."""
    mu_c = mu_of_c(c, r, k)
    return SupercriticalProfile(c=float(c), mu_c=mu_c,
                                alpha_c=poisson_tail(k, mu_c),
                                beta_c=mu_c * poisson_tail(k - 1, mu_c) / r)
