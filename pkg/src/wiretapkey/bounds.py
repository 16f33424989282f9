"""Relative-entropy-of-entanglement upper bounds for the restricted wiretap channel.

The bound separates Bob's mode from Alice's mode together with the lost
mode ``F``. A separable candidate is obtained from the ``(A, B, F)``
covariance matrix by shrinking the correlations across the ``AF | B`` cut
with a single factor and stopping at the edge of the PPT region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import ChannelParams, build_joint_state, marginal
from .gaussian import (
    CovarianceMatrix,
    PhysicalityError,
    check_physical,
    omega,
    partial_trace,
    von_neumann_entropy,
    williamson,
)

EPS_ROOT = 1e-10
MAX_BISECT = 200
MU_CAP_THERMAL = 1e6


class BracketError(RuntimeError):
    """The separability search interval does not straddle the PPT boundary."""

    def __init__(self, message, lo_eig, hi_eig):
        super().__init__(f"{message}: min eig {lo_eig:.3e} at lower end, {hi_eig:.3e} at upper end")
        self.lo_eig = lo_eig
        self.hi_eig = hi_eig


def omega_pt(n: int, transposed: Sequence[int]) -> np.ndarray:
    """Symplectic form with ``p -> -p`` applied to the modes in ``transposed``."""
    d = np.ones(2 * n)
    for m in transposed:
        d[n + m] = -1
    return omega(n) * np.outer(d, d)


def ppt_min_eig(cov: CovarianceMatrix, transpose_set: Sequence[str]) -> float:
    """Smallest eigenvalue of ``V - i Omega^PT``; negative means entangled."""
    idx = [cov.index(lab) for lab in transpose_set]
    m = cov.entries - 1j * omega_pt(cov.n_modes, idx)
    return float(np.linalg.eigvalsh(m)[0])


def closest_sep_two_mode(a: float, b: float) -> float:
    if a < 1 or b < 1:
        raise ValueError(f"local variances must be >= 1, got a={a}, b={b}")
    return math.sqrt((a - 1) * (b - 1))


def two_mode_standard(a: float, b: float, c1: float, c2: float, labels=("A", "B")) -> CovarianceMatrix:
    """``[[a, c1], [c1, b]] (+) [[a, -c2], [-c2, b]]`` in xxpp ordering."""
    v = np.zeros((4, 4))
    v[:2, :2] = [[a, c1], [c1, b]]
    v[2:, 2:] = [[a, -c2], [-c2, b]]
    return CovarianceMatrix(v, tuple(labels))


def two_mode_separable(a: float, b: float, labels=("A", "B")) -> CovarianceMatrix:
    c = closest_sep_two_mode(a, b)
    return two_mode_standard(a, b, c, c, labels)


@dataclass(frozen=True)
class ThreeModeBlocks:
    """Entries of an ``(A, B, F)`` covariance matrix in the standard pattern."""

    a: float
    b: float
    d: float
    e: float
    f: float
    c1: float
    c2: float

    def matrix(self, c1: float | None = None, c2: float | None = None) -> CovarianceMatrix:
        c1 = self.c1 if c1 is None else c1
        c2 = self.c2 if c2 is None else c2
        a, b, d, e, f = self.a, self.b, self.d, self.e, self.f
        v = np.zeros((6, 6))
        v[:3, :3] = [[a, c1, e], [c1, b, f], [e, f, d]]
        v[3:, 3:] = [[a, -c2, -e], [-c2, b, f], [-e, f, d]]
        return CovarianceMatrix(v, ("A", "B", "F"))


def extract_blocks(cov: CovarianceMatrix, tol: float = 1e-9) -> ThreeModeBlocks:
    """Read ``(a, b, d, e, f, c1, c2)`` off an ``(A, B, F)`` covariance matrix.

    Raises ``ValueError`` when the matrix is not in the standard pattern: no
    x-p coupling, equal local variances in both quadratures, A-F correlation
    sign-flipped in the p sector and B-F correlation equal in both.
    """
    if cov.labels != ("A", "B", "F"):
        cov = partial_trace(cov, ("A", "B", "F"))
    v = cov.entries
    x, p, xp = v[:3, :3], v[3:, 3:], v[:3, 3:]
    blocks = ThreeModeBlocks(
        a=x[0, 0], b=x[1, 1], d=x[2, 2], e=x[0, 2], f=x[1, 2], c1=x[0, 1], c2=-p[0, 1]
    )
    scale = max(1.0, float(np.max(np.abs(v))))
    mismatch = max(
        float(np.max(np.abs(xp))),
        abs(p[0, 0] - blocks.a),
        abs(p[1, 1] - blocks.b),
        abs(p[2, 2] - blocks.d),
        abs(p[0, 2] + blocks.e),
        abs(p[1, 2] - blocks.f),
    )
    if mismatch > tol * scale:
        raise ValueError(f"covariance matrix not in the (A, B, F) standard pattern (off by {mismatch:.3e})")
    return blocks


@dataclass(frozen=True)
class SeparableCandidate:
    """PPT (hence separable, for a one-mode cut) neighbour of an ``(A, B, F)`` state.

    ``scale`` is the factor applied to every correlation between ``B`` and
    the ``(A, F)`` pair; ``c`` is the resulting A-B correlation.
    """

    cov: CovarianceMatrix
    c: float
    scale: float
    min_ppt_eig: float
    min_phys_eig: float


def scale_cross_block(cov: CovarianceMatrix, cut: str, t: float) -> CovarianceMatrix:
    """Multiply all correlations between mode ``cut`` and the rest by ``t``."""
    ib = cov.quadrature_indices([cut])
    rest = [i for i in range(2 * cov.n_modes) if i not in ib]
    mask = np.ones_like(cov.entries)
    mask[np.ix_(ib, rest)] = t
    mask[np.ix_(rest, ib)] = t
    return CovarianceMatrix(cov.entries * mask, cov.labels)


def _margins(cov: CovarianceMatrix, cut: str) -> tuple[float, float]:
    return ppt_min_eig(cov, (cut,)), check_physical(cov).min_eig


def closest_sep_three_mode(cov: CovarianceMatrix, eps_root: float = EPS_ROOT) -> SeparableCandidate:
    """Separable candidate for the ``AF | B`` cut of an ``(A, B, F)`` state.

    Local blocks of ``AF`` and of ``B`` are held fixed and the whole
    ``AF``-``B`` cross block is scaled by one factor ``t``; bisection finds
    the largest ``t`` in ``[0, 1]`` for which the state is both PPT and
    physical. ``t = 0`` is a product state, so the bracket is valid for any
    physical input, and both constraints are linear matrix inequalities in
    ``t``, so the feasible set is an interval.

    With ``F`` uncorrelated this is the two-mode closest separable state,
    ``c = sqrt((a - 1)(b - 1))``.
    """
    blocks = extract_blocks(cov)
    cov = blocks.matrix()
    tol = eps_root

    def margin(t):
        return min(_margins(scale_cross_block(cov, "B", t), "B"))

    m_lo, m_hi = margin(0.0), margin(1.0)
    if m_lo < -tol:
        raise BracketError("bracket failure", m_lo, m_hi)
    lo, hi = 0.0, 1.0
    if m_hi >= -tol:
        lo = 1.0
    else:
        for _ in range(MAX_BISECT):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            # a pure mode pins the margin at zero, so compare against -tol
            if margin(mid) >= -tol:
                lo = mid
            else:
                hi = mid
    cand = scale_cross_block(cov, "B", lo)
    ppt, phys = _margins(cand, "B")
    return SeparableCandidate(cand, lo * blocks.c1, lo, ppt, phys)


def fixed_correlation_search(cov: CovarianceMatrix, n_grid: int = 401) -> tuple[float, float]:
    """Best PPT/physicality margin when only the A-B correlation varies.

    Scans ``c`` over ``[0, 1.2 c1]`` with every correlation to ``F`` frozen
    and returns ``(c, margin)`` at the best grid point. A negative margin
    means no member of that family is a valid separable state.
    """
    blocks = extract_blocks(cov)
    best = (0.0, -math.inf)
    for c in np.linspace(0.0, 1.2 * max(blocks.c1, 0.0), n_grid):
        m = min(_margins(blocks.matrix(c, c), "B"))
        if m > best[1]:
            best = (float(c), m)
    return best


def gaussian_relative_entropy(v1: CovarianceMatrix, v2: CovarianceMatrix) -> float:
    """Relative entropy ``D(rho1 || rho2)`` in bits for zero-mean Gaussian states.

    In the Williamson basis of ``rho2`` (spectrum ``nu_k``), with ``n_k`` the
    mean photon number of ``rho1`` in mode ``k`` of that basis,

        D = -S(rho1) + sum_k [ ln((nu_k + 1) / 2) + 2 n_k arccoth(nu_k) ]   (nats).

    A pure mode of ``rho2`` (``nu_k = 1``) contributes nothing when ``rho1``
    is also vacuum there and makes ``D`` infinite otherwise.
    """
    if v1.n_modes != v2.n_modes:
        raise ValueError("relative entropy needs equal mode counts")
    report = check_physical(v2)
    if not report:
        raise PhysicalityError("reference state of relative entropy is not physical", report.min_eig, v2)
    nu, s = williamson(v2)
    s_inv = np.linalg.inv(s)
    w = np.diag(s_inv @ v1.entries @ s_inv.T)
    n = v1.n_modes
    photons = (w[:n] + w[n:] - 2) / 4
    total = 0.0
    for nu_k, n_k in zip(nu, photons):
        if nu_k - 1 <= 1e-13:
            if n_k > 1e-9:
                return math.inf
            continue
        total += math.log((nu_k + 1) / 2) + 2 * n_k * math.atanh(1 / nu_k)
    d = total / math.log(2) - von_neumann_entropy(v1)
    return max(d, 0.0) if d > -1e-9 else d


def er_upper_bound_pure_loss(eta: float, kappa: float) -> float:
    ChannelParams(eta, kappa)
    lost = kappa * (1 - eta)
    return math.log2(eta + lost) - math.log2(lost)


def default_mu_schedule() -> np.ndarray:
    return np.geomspace(1.0, 1e4, 17)


@dataclass(frozen=True)
class UpperBoundResult:
    bits: float
    mu_star: float
    converged: bool
    schedule: tuple[float, ...] = field(repr=False)
    values: tuple[float, ...] = field(repr=False)

    def __float__(self):
        return self.bits


def er_candidate(params: ChannelParams) -> tuple[CovarianceMatrix, SeparableCandidate]:
    state = build_joint_state(params)
    v_abf = marginal(state, ("A", "B", "F"))
    return v_abf, closest_sep_three_mode(v_abf)


def er_at_mu(params: ChannelParams) -> float:
    """Relative entropy between the ``(A, B, F)`` state and its separable candidate."""
    v_abf, cand = er_candidate(params)
    return gaussian_relative_entropy(v_abf, cand.cov)


def er_upper_bound_numeric(params: ChannelParams, mu_schedule=None, mu_cap: float | None = None) -> UpperBoundResult:
    """Supremum of :func:`er_at_mu` over an increasing grid of input powers.

    ``params.mu`` is ignored. ``converged`` is set when the last two grid
    values agree within 1e-3 bits. When the grid ends unconverged, it is
    extended in half-decade steps up to ``mu_cap``; the default cap is 1e6
    for thermal noise and no extension for pure loss, whose vacuum mode ``F``
    loses precision in the PPT test beyond about 1e5.
    """
    sched = default_mu_schedule() if mu_schedule is None else np.asarray(mu_schedule, dtype=float)
    if sched.ndim != 1 or sched.size == 0 or np.any(np.diff(sched) <= 0) or sched[0] <= 0:
        raise ValueError("mu schedule must be a non-empty increasing sequence of positive values")
    if mu_cap is None:
        mu_cap = MU_CAP_THERMAL if params.thermal else float(sched[-1])
    sched = [float(m) for m in sched]
    values = [_er_or_raise(params, mu) for mu in sched]

    def converged():
        return len(values) >= 2 and abs(values[-1] - values[-2]) <= 1e-3

    while not converged() and sched[-1] * 10**0.5 <= mu_cap * (1 + 1e-12):
        sched.append(sched[-1] * 10**0.5)
        values.append(_er_or_raise(params, sched[-1]))
    k = int(np.argmax(values))
    return UpperBoundResult(float(values[k]), sched[k], bool(converged()), tuple(sched), tuple(values))


def _er_or_raise(params: ChannelParams, mu: float) -> float:
    try:
        return er_at_mu(params.with_mu(mu))
    except BracketError as exc:
        raise BracketError(f"bracket failure at mu={mu:g}", exc.lo_eig, exc.hi_eig) from exc


def upper_bound(params: ChannelParams, mu_schedule=None) -> float:
    """Closed form for pure loss, numeric search otherwise."""
    if params.n_e == 0:
        return er_upper_bound_pure_loss(params.eta, params.kappa)
    return er_upper_bound_numeric(params, mu_schedule).bits
