"""Asymptotic decoy-state BB84 secret-key rates for unrestricted and restricted Eves.

Alice sends weak coherent pulses (mean photon number ``mu``) at ``rate_R``
pulses per second; Bob uses passive two-detector polarization analysis with
``n_d`` mean dark counts per detector per pulse interval. Decoy estimation is
assumed perfect, so single-photon yields enter the formulas directly.

Rates are in bits per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

MU_BRACKET = (1e-3, 10.0)


class UndefinedConditionalError(ZeroDivisionError):
    """Conditional probability requested given a zero-probability sift event."""


@dataclass(frozen=True)
class Bb84Params:
    """Physical-layer parameters.

    ``eta`` is the overall Alice-to-Bob transmissivity (channel times
    detector efficiency) and ``eta_E`` the fraction of Alice's light that
    reaches Eve, disjoint from the part reaching Bob.
    """

    rate_R: float = 1e9
    eta: float = 0.005
    eta_E: float = 0.995
    n_d: float = 1e-4
    f_L: float = 1.1
    mu: float = 0.1

    def __post_init__(self):
        if not self.rate_R > 0:
            raise ValueError(f"rate_R must be positive, got {self.rate_R}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0 <= self.eta_E < 1:
            raise ValueError(f"eta_E must lie in [0, 1), got {self.eta_E}")
        if not self.n_d >= 0:
            raise ValueError(f"n_d must be >= 0, got {self.n_d}")
        if not self.f_L >= 1:
            raise ValueError(f"f_L must be >= 1, got {self.f_L}")
        if not self.mu >= 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")

    @classmethod
    def from_channel(cls, eta: float, kappa: float, eta_c: float | None = None, **kw) -> "Bb84Params":
        """Default restriction mapping ``eta_E = kappa * (1 - eta_c)``.

        ``eta_c`` is the channel-only transmissivity; it defaults to ``eta``,
        i.e. unit detector efficiency.
        """
        eta_c = eta if eta_c is None else eta_c
        return cls(eta=eta, eta_E=kappa * (1 - eta_c), **kw)

    def with_mu(self, mu: float) -> "Bb84Params":
        return replace(self, mu=mu)


def h2(p: float) -> float:
    """Binary entropy in bits, 0 at both endpoints."""
    if not 0 <= p <= 1:
        raise ValueError(f"h2 needs p in [0, 1], got {p}")
    if p == 0 or p == 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def p_sift(params: Bb84Params) -> float:
    """Probability of exactly one click (the sift event ``B1``)."""
    sig = math.exp(-(params.eta * params.mu + params.n_d))
    dark = math.exp(-params.n_d)
    return (1 - sig) * dark + sig * (1 - dark)


@dataclass(frozen=True)
class ConditionalProbs:
    p_a0_given_b1: float
    p_a1_given_b1: float
    p_err_given_a1b1: float
    p_err: float


def conditional_probs(params: Bb84Params) -> ConditionalProbs:
    pb1 = p_sift(params)
    if pb1 <= 0:
        raise UndefinedConditionalError("Pr(B1) = 0: conditional probabilities are undefined")
    eta, mu = params.eta, params.mu
    dark = math.exp(-params.n_d)
    # -expm1 keeps 1 - e^{-n_d} accurate for tiny dark counts
    one_dark = -math.expm1(-params.n_d)
    p_a0b1 = 2 * math.exp(-mu) * dark * one_dark
    single = eta * dark**2 + (2 - eta) * dark * one_dark
    p_a1b1 = mu * math.exp(-mu) * single
    p_err_a1 = (1 - eta) * dark * one_dark / single
    p_err = math.exp(-(eta * mu + params.n_d)) * one_dark / pb1
    return ConditionalProbs(p_a0b1 / pb1, p_a1b1 / pb1, p_err_a1, p_err)


def skr_unrestricted(params: Bb84Params) -> float:
    """Photon-number-splitting-limited rate when Eve holds all lost light."""
    pb1 = p_sift(params)
    if pb1 == 0:
        return 0.0
    c = conditional_probs(params)
    per_sift = c.p_a0_given_b1 - params.f_L * h2(c.p_err) + c.p_a1_given_b1 * (1 - h2(c.p_err_given_a1b1))
    return max(params.rate_R * pb1 * per_sift / 2, 0.0)


def skr_restricted(params: Bb84Params) -> float:
    """Rate when Eve sees only the fraction ``eta_E``, disjoint from Bob's share."""
    pb1 = p_sift(params)
    if pb1 == 0:
        return 0.0
    c = conditional_probs(params)
    p_e0 = math.exp(-params.eta_E * params.mu)
    return max(params.rate_R * pb1 * (p_e0 - params.f_L * h2(c.p_err)) / 2, 0.0)


SKR_FUNCS = {"unrestricted": skr_unrestricted, "restricted": skr_restricted}


@dataclass(frozen=True)
class MuOptimum:
    mu_star: float
    skr_star: float
    flat: bool
    grid_mu_star: float
    grid_step: float


def optimize_mu(
    params: Bb84Params,
    model: str = "restricted",
    bracket: tuple[float, float] = MU_BRACKET,
    n_grid: int = 81,
) -> MuOptimum:
    """Maximize the SKR over ``mu``: log-grid scan then bounded refinement.

    ``params.mu`` is ignored. A landscape that is zero everywhere returns
    ``(bracket[0], 0)`` with ``flat=True``.
    """
    skr = SKR_FUNCS[model]
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError(f"invalid mu bracket {bracket}")
    grid = np.geomspace(lo, hi, n_grid)
    vals = np.array([skr(params.with_mu(m)) for m in grid])
    step = math.log10(hi / lo) / (n_grid - 1)
    if not np.any(vals > 0):
        return MuOptimum(lo, 0.0, True, lo, step)
    k = int(np.argmax(vals))
    a = math.log10(grid[max(k - 1, 0)])
    b = math.log10(grid[min(k + 1, n_grid - 1)])
    res = minimize_scalar(
        lambda lm: -skr(params.with_mu(10**lm)),
        bounds=(a, b),
        method="bounded",
        options={"xatol": 1e-10},
    )
    mu_star, val = 10 ** float(res.x), -float(res.fun)
    if val < vals[k]:
        mu_star, val = float(grid[k]), float(vals[k])
    return MuOptimum(mu_star, val, False, float(grid[k]), step)


# ------------------------------------------------------------ Monte Carlo


@dataclass(frozen=True)
class PulseStats:
    """Event counts from a pulse-by-pulse simulation with binomial errors."""

    n_pulses: int
    n_sift: int
    n_err: int

    @property
    def p_sift(self) -> float:
        return self.n_sift / self.n_pulses

    @property
    def p_sift_sigma(self) -> float:
        p = self.p_sift
        return math.sqrt(p * (1 - p) / self.n_pulses)

    @property
    def p_err(self) -> float:
        return self.n_err / self.n_sift

    @property
    def p_err_sigma(self) -> float:
        p = self.p_err
        return math.sqrt(p * (1 - p) / self.n_sift)


def simulate_pulses(params: Bb84Params, n_pulses: int, seed: int = 0, chunk: int = 2_000_000) -> PulseStats:
    """Poisson photon numbers, binomial transmission, Bernoulli dark clicks.

    Every photon that reaches Bob lands on the detector of the correct
    polarization (matching basis, no misalignment); either detector can also
    fire from a dark count.
    """
    rng = np.random.default_rng(seed)
    p_dark = -math.expm1(-params.n_d)
    n_sift = n_err = 0
    done = 0
    while done < n_pulses:
        m = min(chunk, n_pulses - done)
        photons = rng.poisson(params.mu, m)
        arrived = rng.binomial(photons, params.eta)
        right = (arrived > 0) | (rng.random(m) < p_dark)
        wrong = rng.random(m) < p_dark
        sift = right ^ wrong
        n_sift += int(sift.sum())
        n_err += int((sift & wrong).sum())
        done += m
    return PulseStats(n_pulses, n_sift, n_err)
