"""Hashing lower bounds on the secret-key rate under restricted eavesdropping.

Two independent routes are provided for every finite-``mu`` rate:

* closed forms in terms of ``g`` (thermal ones still take Eve's symplectic
  spectrum from the covariance matrix), and
* a generic covariance pipeline (``hashing_dr_numeric`` /
  ``hashing_rr_numeric``) that evaluates the Holevo difference from
  marginal and heterodyne-conditioned entropies of the joint state.

All rates are in bits per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .channel import ChannelParams, JointState, build_joint_state, marginal
from .gaussian import (
    CovarianceMatrix,
    g_entropy,
    heterodyne_condition,
    partial_trace,
    symplectic_eigenvalues,
    von_neumann_entropy,
)

Direction = Literal["DR", "RR", "CCQ"]
Path = Literal["closed-form", "numeric", "asymptotic"]

LOG2E = math.log2(math.e)


@dataclass(frozen=True)
class RateResult:
    bits_per_mode: float
    direction: Direction
    channel: Literal["pure-loss", "thermal"]
    path: Path

    @property
    def clamped(self) -> float:
        return max(self.bits_per_mode, 0.0)

    def __float__(self):
        return float(self.bits_per_mode)


def _channel_kind(n_e: float) -> Literal["pure-loss", "thermal"]:
    return "thermal" if n_e > 0 else "pure-loss"


def _check_pure_loss(eta, kappa, mu=0.0):
    # reuse the dataclass range checks
    ChannelParams(eta=eta, kappa=kappa, n_e=0.0, mu=mu)


# ---------------------------------------------------------------- pure loss


def dr_pure_loss(eta: float, kappa: float, mu: float) -> RateResult:
    _check_pure_loss(eta, kappa, mu)
    val = g_entropy(eta * mu) - g_entropy(kappa * mu * (1 - eta))
    return RateResult(val, "DR", "pure-loss", "closed-form")


def dr_pure_loss_limit(eta: float, kappa: float) -> RateResult:
    _check_pure_loss(eta, kappa)
    val = math.log2(eta) - math.log2(kappa * (1 - eta))
    return RateResult(val, "DR", "pure-loss", "asymptotic")


def rr_pure_loss(eta: float, kappa: float, mu: float) -> RateResult:
    _check_pure_loss(eta, kappa, mu)
    lost = (1 - eta) * mu / (1 + eta * mu)
    val = (
        g_entropy(mu)
        - g_entropy(kappa * mu * (1 - eta))
        - (g_entropy(lost) - g_entropy(kappa * lost))
    )
    return RateResult(val, "RR", "pure-loss", "closed-form")


def rr_pure_loss_limit(eta: float, kappa: float) -> RateResult:
    _check_pure_loss(eta, kappa)
    r = (1 - eta) / eta
    val = -math.log2(kappa * (1 - eta)) - (g_entropy(r) - g_entropy(kappa * r))
    return RateResult(val, "RR", "pure-loss", "asymptotic")


# ------------------------------------------------------------------ thermal


def _eve(state: JointState, cov: CovarianceMatrix | None = None) -> CovarianceMatrix:
    return partial_trace(state.cov if cov is None else cov, state.eve_labels)


def dr_thermal(params: ChannelParams) -> RateResult:
    eta, kappa, n_e, mu = params.eta, params.kappa, params.n_e, params.mu
    state = build_joint_state(params)
    h_eve = von_neumann_entropy(_eve(state))
    val = (
        g_entropy(n_e * (1 - eta) + eta * mu)
        - h_eve
        - (g_entropy(n_e * (1 - eta)) - g_entropy(n_e * (1 - eta * kappa)))
    )
    return RateResult(val, "DR", _channel_kind(n_e), "closed-form")


def dr_thermal_limit(eta: float, kappa: float, n_e: float) -> RateResult:
    ChannelParams(eta, kappa, n_e)
    val = (
        math.log2(eta / (kappa * (1 - eta)))
        - g_entropy(n_e)
        - g_entropy(n_e * (1 - eta))
        + g_entropy(n_e * (1 - eta * kappa))
    )
    return RateResult(val, "DR", _channel_kind(n_e), "asymptotic")


def alice_conditional_photons(params: ChannelParams) -> float:
    """Mean photon number of ``A`` after Bob heterodynes ``B``."""
    eta, n_e, mu = params.eta, params.n_e, params.mu
    return mu - eta * mu * (1 + mu) / (1 + n_e - n_e * eta + eta * mu)


def rr_thermal(params: ChannelParams) -> RateResult:
    state = build_joint_state(params)
    eve = state.eve_labels
    h_eve = von_neumann_entropy(_eve(state))
    cond = heterodyne_condition(marginal(state, ("B",) + eve), "B")
    h_eve_y = von_neumann_entropy(cond)
    # cancellation in the closed form can dip a hair below zero at mu ~ 0
    a_y = max(alice_conditional_photons(params), 0.0)
    val = g_entropy(params.mu) - h_eve - g_entropy(a_y) + h_eve_y
    return RateResult(val, "RR", _channel_kind(params.n_e), "closed-form")


def eve_conditional_limit_eigenvalues(eta: float, kappa: float, n_e: float) -> tuple[float, float]:
    """Symplectic spectrum of Eve's ``(E, R)`` state given Bob's heterodyne
    outcome, in the limit of infinite input power.

    With ``A..G`` the polynomial constants of the thermal reverse-
    reconciliation bound, the eigenvalues are ``sqrt(|A - B + C +- D|) / eta``.
    """
    a = eta**2 * (2 * n_e * (n_e + 1) + 1)
    b = 2 * eta * kappa * (eta + 2 * n_e**2 + n_e - 1)
    c = 2 * kappa**2 * (-eta + n_e + 1) ** 2
    e = eta**2 * (-kappa + n_e + 1) ** 2
    f = 2 * eta * kappa * (n_e + 1) * (kappa + n_e - 1)
    g = kappa**2 * (n_e + 1) ** 2
    d = 2 * math.sqrt(max(e - f + g, 0.0) * (-eta * kappa + kappa + n_e * (kappa - eta)) ** 2)
    s = a - b + c
    nu1 = math.sqrt(abs(s + d)) / eta
    nu2 = math.sqrt(abs(s - d)) / eta
    return max(nu1, 1.0), max(nu2, 1.0)


def rr_thermal_limit(eta: float, kappa: float, n_e: float) -> RateResult:
    ChannelParams(eta, kappa, n_e)
    nus = eve_conditional_limit_eigenvalues(eta, kappa, n_e)
    val = (
        -math.log2(kappa * (1 - eta))
        - g_entropy(n_e)
        - g_entropy((1 + n_e - n_e * eta - eta) / eta)
        + sum(g_entropy((nu - 1) / 2) for nu in nus)
    )
    return RateResult(val, "RR", _channel_kind(n_e), "asymptotic")


# ------------------------------------------------------- generic pipeline


def _holevo_difference(state: JointState, measured: str, partner: str) -> float:
    """``H(partner) - H(Eve) - [H(partner|m) - H(Eve|m)]`` for heterodyne on ``m``."""
    eve = state.eve_labels
    h_partner = von_neumann_entropy(marginal(state, (partner,)))
    h_eve = von_neumann_entropy(marginal(state, eve))
    cond = heterodyne_condition(marginal(state, (measured, partner) + eve), measured)
    h_partner_c = von_neumann_entropy(partial_trace(cond, (partner,)))
    h_eve_c = von_neumann_entropy(partial_trace(cond, eve))
    return h_partner - h_eve - (h_partner_c - h_eve_c)


def hashing_dr_numeric(params: ChannelParams) -> RateResult:
    """Alice heterodynes ``A``; Bob holds ``B``, Eve holds ``E`` (and ``R``)."""
    val = _holevo_difference(build_joint_state(params), "A", "B")
    return RateResult(val, "DR", _channel_kind(params.n_e), "numeric")


def hashing_rr_numeric(params: ChannelParams) -> RateResult:
    """Bob heterodynes ``B``; Alice holds ``A``, Eve holds ``E`` (and ``R``)."""
    val = _holevo_difference(build_joint_state(params), "B", "A")
    return RateResult(val, "RR", _channel_kind(params.n_e), "numeric")


# ---------------------------------------------------------------------- CCQ


def heterodyne_mutual_information(cov: CovarianceMatrix, x: str, y: str) -> float:
    """Shannon information in bits between heterodyne outcomes on ``x`` and ``y``.

    Each outcome pair is Gaussian with covariance ``(V + I) / 2``.
    """
    vxy = partial_trace(cov, (x, y)).entries
    sig = 0.5 * (vxy + np.eye(4))
    ix = [0, 2]
    iy = [1, 3]
    det_x = np.linalg.det(sig[np.ix_(ix, ix)])
    det_y = np.linalg.det(sig[np.ix_(iy, iy)])
    det_xy = np.linalg.det(sig)
    return 0.5 * math.log2(det_x * det_y / det_xy)


def eve_holevo_rr(state: JointState) -> float:
    """Holevo information between Bob's heterodyne outcome and Eve."""
    eve = state.eve_labels
    h_eve = von_neumann_entropy(marginal(state, eve))
    cond = heterodyne_condition(marginal(state, ("B",) + eve), "B")
    return h_eve - von_neumann_entropy(cond)


def ccq_rate(params: ChannelParams, beta: float = 1.0) -> RateResult:
    """Reverse-reconciliation rate when both Alice and Bob heterodyne."""
    if not 0 < beta <= 1:
        raise ValueError(f"reconciliation efficiency must lie in (0, 1], got {beta}")
    state = build_joint_state(params)
    i_xy = heterodyne_mutual_information(state.cov, "A", "B")
    val = beta * i_xy - eve_holevo_rr(state)
    return RateResult(val, "CCQ", _channel_kind(params.n_e), "numeric")


def ccq_limit(eta: float, kappa: float, n_e: float, beta: float = 1.0) -> RateResult:
    """Infinite-power CCQ rate; ``-inf`` for imperfect reconciliation."""
    if not 0 < beta <= 1:
        raise ValueError(f"reconciliation efficiency must lie in (0, 1], got {beta}")
    kind = _channel_kind(n_e)
    if beta < 1:
        return RateResult(-math.inf, "CCQ", kind, "asymptotic")
    rr = rr_thermal_limit(eta, kappa, n_e).bits_per_mode
    val = (
        rr
        + g_entropy((1 - eta) * (1 + n_e) / eta)
        - LOG2E
        + math.log2(eta / (1 + (1 - eta) * n_e))
    )
    return RateResult(val, "CCQ", kind, "asymptotic")


# ------------------------------------------------------------- dispatch


def key_rate(direction: Direction, params: ChannelParams, beta: float = 1.0) -> RateResult:
    """Rate for any direction; ``mu = inf`` selects the asymptotic forms."""
    eta, kappa, n_e = params.eta, params.kappa, params.n_e
    if math.isinf(params.mu):
        if direction == "DR":
            return dr_thermal_limit(eta, kappa, n_e)
        if direction == "RR":
            return rr_thermal_limit(eta, kappa, n_e)
        return ccq_limit(eta, kappa, n_e, beta)
    if direction == "DR":
        return dr_pure_loss(eta, kappa, params.mu) if n_e == 0 else dr_thermal(params)
    if direction == "RR":
        return rr_pure_loss(eta, kappa, params.mu) if n_e == 0 else rr_thermal(params)
    if direction == "CCQ":
        return ccq_rate(params, beta)
    raise ValueError(f"unknown direction {direction!r}")


def unrestricted_capacity(eta: float) -> float:
    """Secret-key capacity of the pure-loss channel against a full eavesdropper."""
    return -math.log2(1 - eta)


def unrestricted_thermal_bounds(eta: float, n_e: float) -> tuple[float, float]:
    """Lower and upper bounds for a thermal channel with unrestricted Eve."""
    upper = -math.log2((1 - eta) * eta**n_e) - g_entropy(n_e) if n_e < eta / (1 - eta) else 0.0
    lower = -math.log2(1 - eta) - g_entropy(n_e)
    return lower, max(upper, 0.0)


def limit_eve_spectrum_numeric(eta: float, kappa: float, n_e: float, mu: float = 1e6) -> np.ndarray:
    """Eve's conditional spectrum at large finite ``mu`` (for cross-checks)."""
    state = build_joint_state(ChannelParams(eta, kappa, n_e, mu))
    cond = heterodyne_condition(marginal(state, ("B",) + state.eve_labels), "B")
    return symplectic_eigenvalues(cond)
