"""Truncated Fock-space oracle for the Gaussian pipeline.

Everything here works on explicit state vectors and density matrices: the
TMSV series, beamsplitter unitaries from the matrix exponential of the
mixing generator, partial traces, and eigendecomposition entropies. It is
meant for small photon numbers only and shares no code with the covariance
route beyond the parameter dataclass.

Quadratures follow the covariance convention ``x = a + a^dag``,
``p = -i (a - a^dag)``, so the vacuum has unit variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import logsumexp

from .channel import ChannelParams

LEAKAGE_GUARD = 1e-8
# inverse temperature used for a pure mode of a Gaussian state
BETA_PURE = 60.0


class TruncationError(ValueError):
    """The truncated basis drops more probability than the leakage guard."""


@dataclass(frozen=True)
class FockState:
    """A pure state (tensor with one axis per mode) or a density matrix.

    Density matrices are stored as a square matrix over the row-major product
    basis of ``labels``. ``log_data`` optionally carries an exact matrix
    logarithm, which avoids re-deriving it from tiny eigenvalues.
    """

    data: np.ndarray
    dim: int
    labels: tuple[str, ...]
    is_ket: bool
    leakage: float = 0.0
    log_data: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    @property
    def trace(self) -> float:
        if self.is_ket:
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)

    def axis(self, label: str) -> int:
        return self.labels.index(label)

    def density(self) -> np.ndarray:
        if not self.is_ket:
            return self.data
        v = self.data.reshape(-1)
        return np.outer(v, v.conj())


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def number_op(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float))


def tmsv_fock(mu: float, dim: int, labels=("A", "B")) -> FockState:
    """``sum_n c_n |n, n>`` with ``c_n^2 = mu^n / (mu + 1)^(n + 1)``, renormalized.

    ``leakage`` is the dropped tail weight ``(mu / (mu + 1))^dim``.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    lam2 = mu / (mu + 1)
    n = np.arange(dim)
    amp = np.sqrt(lam2**n / (mu + 1))
    leakage = lam2**dim
    amp = amp / np.linalg.norm(amp)
    psi = np.zeros((dim, dim), dtype=complex)
    psi[n, n] = amp
    return FockState(psi, dim, tuple(labels), True, leakage)


def vacuum_fock(dim: int, labels: Sequence[str]) -> FockState:
    psi = np.zeros((dim,) * len(labels), dtype=complex)
    psi[(0,) * len(labels)] = 1.0
    return FockState(psi, dim, tuple(labels), True)


def tensor(*states: FockState) -> FockState:
    """Product of pure states, axes concatenated in argument order."""
    dim = states[0].dim
    if any(s.dim != dim or not s.is_ket for s in states):
        raise ValueError("tensor needs pure states of a common dimension")
    psi = states[0].data
    for s in states[1:]:
        psi = np.multiply.outer(psi, s.data)
    leakage = -math.expm1(sum(math.log1p(-s.leakage) for s in states))
    labels = tuple(lab for s in states for lab in s.labels)
    return FockState(psi, dim, labels, True, leakage)


def beamsplitter_unitary(t: float, dim: int) -> np.ndarray:
    """Two-mode unitary with ``U^dag a1 U = sqrt(t) a1 + sqrt(1-t) a2``.

    Generated by ``theta (a1^dag a2 - a1 a2^dag)`` with ``theta = arccos sqrt(t)``;
    exact on the subspace with fewer than ``dim`` photons in total.
    """
    if not 0 <= t <= 1:
        raise ValueError(f"transmissivity must lie in [0, 1], got {t}")
    a = annihilation(dim)
    eye = np.eye(dim)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    gen = a1.T @ a2 - a1 @ a2.T
    return expm(math.acos(math.sqrt(t)) * gen)


def beamsplitter_fock(t: float, modes: tuple[str, str], state: FockState) -> FockState:
    """Apply the beamsplitter to a pure state; ``modes[0]`` keeps fraction ``t``."""
    if not state.is_ket:
        raise ValueError("beamsplitter_fock acts on pure states")
    i, j = state.axis(modes[0]), state.axis(modes[1])
    d = state.dim
    u = beamsplitter_unitary(t, d).reshape(d, d, d, d)
    out = np.tensordot(u, state.data, axes=([2, 3], [i, j]))
    # tensordot puts the new (i, j) axes first
    rest = [k for k in range(state.n_modes) if k not in (i, j)]
    order = np.argsort([i, j] + rest)
    return FockState(np.transpose(out, order), d, state.labels, True, state.leakage)


def phase_flip_fock(label: str, state: FockState) -> FockState:
    """Local ``pi`` phase ``(-1)^n`` on one mode of a pure state."""
    k = state.axis(label)
    shape = [1] * state.n_modes
    shape[k] = state.dim
    sign = ((-1.0) ** np.arange(state.dim)).reshape(shape)
    return FockState(state.data * sign, state.dim, state.labels, True, state.leakage)


def reduced_density(state: FockState, keep: Sequence[str]) -> FockState:
    """Partial trace of a pure state onto ``keep`` (in that order)."""
    if not state.is_ket:
        raise ValueError("reduced_density expects a pure state")
    idx = [state.axis(lab) for lab in keep]
    rest = [k for k in range(state.n_modes) if k not in idx]
    m = np.transpose(state.data, idx + rest).reshape(state.dim ** len(idx), -1)
    return FockState(m @ m.conj().T, state.dim, tuple(keep), False, state.leakage)


def _entropy_from_probs(p: np.ndarray) -> float:
    p = p[p > 1e-300]
    return float(-(p * np.log2(p)).sum())


def entropy_fock(state: FockState, subset: Sequence[str] | None = None) -> float:
    """Von Neumann entropy in bits of the ``subset`` marginal.

    For a pure state the Schmidt coefficients of the ``subset | rest`` split
    are used, which avoids forming the reduced density matrix.
    """
    subset = state.labels if subset is None else tuple(subset)
    if state.is_ket:
        if set(subset) == set(state.labels):
            return 0.0
        idx = [state.axis(lab) for lab in subset]
        rest = [k for k in range(state.n_modes) if k not in idx]
        m = np.transpose(state.data, idx + rest).reshape(state.dim ** len(idx), -1)
        s = np.linalg.svd(m, compute_uv=False)
        p = s**2
    else:
        if tuple(subset) != state.labels:
            raise ValueError("entropy_fock on a density matrix needs the full label set")
        p = np.clip(np.linalg.eigvalsh(state.data), 0, None)
    return _entropy_from_probs(p / p.sum())


def _log2_spectrum(rho: FockState) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(rho.density())
    with np.errstate(divide="ignore"):
        lw = np.where(w > 1e-300, np.log2(np.clip(w, 1e-300, None)), -np.inf)
    return lw, v


def relative_entropy_fock(rho: FockState, sigma: FockState) -> float:
    """``Tr rho (log2 rho - log2 sigma)`` with ``0 log 0 = 0``.

    Returns ``inf`` when ``rho`` has weight where ``sigma`` has none.
    """
    if rho.dim != sigma.dim or rho.n_modes != sigma.n_modes:
        raise ValueError("relative entropy needs states on the same truncated space")
    r = rho.density()
    r = r / np.trace(r).real
    w = np.clip(np.linalg.eigvalsh(r), 0, None)
    neg_s = -_entropy_from_probs(w / w.sum())
    if sigma.log_data is not None:
        cross = float(np.trace(r @ sigma.log_data).real) / math.log(2)
    else:
        lw, v = _log2_spectrum(sigma)
        weights = np.einsum("ik,ij,jk->k", v.conj(), r, v).real
        if np.any((weights > 1e-12) & np.isinf(lw)):
            return math.inf
        cross = float(np.sum(np.where(np.isinf(lw), 0.0, weights * lw)))
    return neg_s - cross


def _quadratures(dim: int, pad: int = 4) -> tuple[list[list[np.ndarray]], np.ndarray, np.ndarray]:
    """Single-mode quadrature products built in a padded space then truncated."""
    big = dim + pad
    a = annihilation(big)
    x = a + a.T
    p = -1j * (a - a.T)
    ops = [x, p]
    prods = [[(ops[u] @ ops[v])[:dim, :dim] for v in range(2)] for u in range(2)]
    return prods, x[:dim, :dim], p[:dim, :dim]


def gibbs_matrix(cov: np.ndarray) -> np.ndarray:
    """``G`` with ``rho = exp(-r^T G r / 4) / Z`` for covariance ``cov``.

    ``G = 2 i Omega arccoth(i V Omega)``, evaluated on the eigenvalues of
    ``i V Omega`` (real, in ``+-nu`` pairs). A pure mode (``nu = 1``) would
    need ``G`` infinite and is given inverse temperature ``BETA_PURE``.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    om = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    lam, vec = np.linalg.eig(1j * cov @ om)
    lam = lam.real
    mag = np.abs(lam)
    with np.errstate(divide="ignore"):
        half_beta = np.where(mag - 1 > 1e-12, np.arctanh(1 / np.maximum(mag, 1.0)), np.inf)
    f = np.sign(lam) * np.minimum(half_beta, BETA_PURE / 2)
    arccoth = vec @ np.diag(f) @ np.linalg.inv(vec)
    g = (2j * om @ arccoth).real
    return 0.5 * (g + g.T)


def gaussian_to_fock(cov: np.ndarray, dim: int, labels: Sequence[str]) -> FockState:
    """Density matrix of a zero-mean Gaussian state in the truncated basis.

    The Gibbs exponent ``r^T G r / 4`` is assembled from truncated ladder
    operators (same-mode products are formed in a padded space first) and
    exponentiated by eigendecomposition. The exact logarithm
    ``-H - log Z`` is kept alongside the matrix.
    """
    g = gibbs_matrix(cov)
    n = g.shape[0] // 2
    prods, x, p = _quadratures(dim)
    single = [x, p]
    eye = np.eye(dim)

    def embed(ops_by_mode):
        out = np.ones((1, 1), dtype=complex)
        for k in range(n):
            out = np.kron(out, ops_by_mode.get(k, eye))
        return out

    size = dim**n
    h = np.zeros((size, size), dtype=complex)
    for i in range(2 * n):
        for j in range(2 * n):
            if g[i, j] == 0:
                continue
            mi, qi = i % n, i // n
            mj, qj = j % n, j // n
            if mi == mj:
                term = embed({mi: prods[qi][qj]})
            else:
                term = embed({mi: single[qi], mj: single[qj]})
            h += 0.25 * g[i, j] * term
    h = 0.5 * (h + h.conj().T)
    lam, w = np.linalg.eigh(h)
    log_z = float(logsumexp(-lam))
    rho = (w * np.exp(-lam - log_z)) @ w.conj().T
    log_rho = -h - log_z * np.eye(size)
    return FockState(rho, dim, tuple(labels), False, 0.0, log_rho)


# ------------------------------------------------------------------ wiring


@dataclass(frozen=True)
class FockWiring:
    """Output of :func:`wiretap_fock`: the global pure state and its truncation."""

    state: FockState
    dim: int
    leakage: float


def wiretap_fock(params: ChannelParams, dim: int, guard: float = LEAKAGE_GUARD) -> FockWiring:
    """Global pure state of the wiretap channel with explicit unitaries.

    Mode ``B`` starts as Alice's transmitted arm, ``E`` as Eve's input (vacuum,
    or one arm of a thermal purification with ``R``) and ``F`` as vacuum.
    """
    source = tmsv_fock(params.mu, dim, ("A", "B"))
    if params.thermal:
        eve = tmsv_fock(params.n_e, dim, ("E", "R"))
        state = tensor(source, eve, vacuum_fock(dim, ("F",)))
        state = _reorder_ket(state, ("A", "B", "E", "F", "R"))
    else:
        state = tensor(source, vacuum_fock(dim, ("E", "F")))
    if state.leakage > guard:
        raise TruncationError(f"truncation leakage {state.leakage:.2e} exceeds guard {guard:.0e}")
    state = beamsplitter_fock(params.eta, ("B", "E"), state)
    state = beamsplitter_fock(params.kappa, ("E", "F"), state)
    state = phase_flip_fock("E", state)
    return FockWiring(state, dim, state.leakage)


def _reorder_ket(state: FockState, order) -> FockState:
    perm = [state.axis(lab) for lab in order]
    return FockState(np.transpose(state.data, perm), state.dim, tuple(order), True, state.leakage)
