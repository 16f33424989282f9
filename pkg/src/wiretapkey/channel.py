"""Joint Gaussian state of the restricted-eavesdropper wiretap channel.

Mode labels:

``A``  Alice's retained TMSV arm
``B``  Bob's channel output
``E``  the share of the lost light that reaches Eve
``F``  the share of the lost light nobody collects
``R``  purification of Eve's injected thermal mode (thermal case only)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .gaussian import (
    CovarianceMatrix,
    apply_symplectic,
    beamsplitter,
    direct_sum,
    partial_trace,
    tmsv_cov,
    vacuum_cov,
)


@dataclass(frozen=True)
class ChannelParams:
    """Channel transmissivity, Eve's collection fraction, Eve's thermal
    photon number and Alice's TMSV photon number per mode.

    ``mu`` may be ``math.inf``, which selects asymptotic closed forms where
    they exist.
    """

    eta: float
    kappa: float = 1.0
    n_e: float = 0.0
    mu: float = 1.0

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if not 0 < self.kappa <= 1:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")
        if not self.n_e >= 0:
            raise ValueError(f"n_e must be >= 0, got {self.n_e}")
        if not self.mu >= 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")

    @property
    def thermal(self) -> bool:
        return self.n_e > 0

    def with_mu(self, mu: float) -> "ChannelParams":
        return replace(self, mu=mu)


@dataclass(frozen=True)
class JointState:
    cov: CovarianceMatrix
    params: ChannelParams

    def marginal(self, labels) -> CovarianceMatrix:
        return marginal(self, labels)

    @property
    def eve_labels(self) -> tuple[str, ...]:
        return ("E", "R") if "R" in self.cov.labels else ("E",)


def build_joint_state(params: ChannelParams) -> JointState:
    """Wire TMSV source, channel beamsplitter and Eve's restriction.

    Input modes, in order: ``A, A', E', F'`` plus ``R`` when ``n_e > 0``.
    The channel beamsplitter (transmissivity ``eta``) mixes ``A'`` with
    ``E'``; its transmitted port is ``B``. The reflected port is then split
    by a second beamsplitter (transmissivity ``kappa``) against vacuum ``F'``
    into ``E`` (transmitted) and ``F``.
    """
    if math.isinf(params.mu):
        raise ValueError("build_joint_state needs a finite mu")
    source = tmsv_cov(params.mu, ("A", "B"))
    if params.thermal:
        eve_in = tmsv_cov(params.n_e, ("E", "R"))
        cov = direct_sum(source, eve_in, vacuum_cov(1, ("F",)))
        cov = _reorder(cov, ("A", "B", "E", "F", "R"))
    else:
        cov = direct_sum(source, vacuum_cov(2, ("E", "F")))
    n = cov.n_modes
    ib, ie, if_ = cov.index("B"), cov.index("E"), cov.index("F")
    # slot "B" holds A' until the first beamsplitter, slot "E" holds E'
    cov = apply_symplectic(beamsplitter(params.eta, ib, ie, n), cov)
    cov = apply_symplectic(beamsplitter(params.kappa, ie, if_, n), cov)
    # E carries -sqrt(kappa(1-eta)) A'; a local pi phase makes every
    # x-sector correlation with A positive
    cov = _flip_sign(cov, ("E",))
    return JointState(cov, params)


def _reorder(cov: CovarianceMatrix, order) -> CovarianceMatrix:
    return partial_trace(cov, order)


def _flip_sign(cov: CovarianceMatrix, labels) -> CovarianceMatrix:
    """Apply the local map ``(x, p) -> (-x, -p)`` (a pi phase shift)."""
    d = np.ones(2 * cov.n_modes)
    for lab in labels:
        i = cov.index(lab)
        d[i] = d[i + cov.n_modes] = -1
    return CovarianceMatrix(cov.entries * np.outer(d, d), cov.labels)


def marginal(state: JointState, labels) -> CovarianceMatrix:
    return partial_trace(state.cov, list(labels))


def unrestricted_state(params: ChannelParams) -> CovarianceMatrix:
    """Three (or four, thermal) mode state with Eve holding all lost light.

    Built independently of ``build_joint_state`` for limit-consistency checks.
    """
    source = tmsv_cov(params.mu, ("A", "B"))
    if params.thermal:
        cov = direct_sum(source, tmsv_cov(params.n_e, ("E", "R")))
    else:
        cov = direct_sum(source, vacuum_cov(1, ("E",)))
    n = cov.n_modes
    cov = apply_symplectic(beamsplitter(params.eta, cov.index("B"), cov.index("E"), n), cov)
    return _flip_sign(cov, ("E",))
