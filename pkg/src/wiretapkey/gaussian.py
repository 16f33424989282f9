"""Covariance-matrix calculus for zero-mean Gaussian states.

Conventions used throughout the package:

* quadratures are ordered ``(x_1, ..., x_N, p_1, ..., p_N)``;
* the vacuum covariance matrix is the identity, so a thermal state with
  mean photon number ``n`` has covariance ``(2n + 1) I``;
* entropies are in bits and a mode with symplectic eigenvalue ``nu``
  contributes ``g((nu - 1) / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import schur

EPS_PHYS = 1e-9
EPS_SYM = 1e-10


class PhysicalityError(ValueError):
    """Raised when a covariance matrix violates the uncertainty relation."""

    def __init__(self, message: str, min_eig: float, cov=None):
        super().__init__(f"{message} (min eig of V - i*Omega = {min_eig:.3e})")
        self.min_eig = min_eig
        self.cov = cov


def omega(n: int) -> np.ndarray:
    """Symplectic form for ``n`` modes in xxpp ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def g_entropy(x):
    """Entropy in bits of a thermal state with mean photon number ``x``.

    ``g(x) = (x + 1) log2(x + 1) - x log2(x)`` with ``g(0) = 0``. Accepts
    scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError(f"g_entropy needs x >= 0, got {x.min() if x.ndim else float(x)}")
    safe = np.where(x > 0, x, 1.0)
    out = np.where(x > 0, (safe + 1) * np.log2(safe + 1) - safe * np.log2(safe), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric ``2N x 2N`` covariance matrix over labelled modes."""

    entries: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        v = np.array(self.entries, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2:
            raise ValueError(f"covariance matrix must be 2N x 2N, got shape {v.shape}")
        if not np.array_equal(v, v.T):
            v = 0.5 * (v + v.T)
        v.setflags(write=False)
        object.__setattr__(self, "entries", v)
        n = v.shape[0] // 2
        labels = tuple(self.labels) if self.labels else tuple(f"m{i}" for i in range(n))
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} modes")
        if len(set(labels)) != n:
            raise ValueError(f"duplicate mode labels {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def n_modes(self) -> int:
        return self.entries.shape[0] // 2

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no mode labelled {label!r} in {self.labels}") from None

    def quadrature_indices(self, labels: Iterable[str]) -> list[int]:
        """Row indices of the given modes, x block first then p block."""
        modes = [self.index(lab) for lab in labels]
        n = self.n_modes
        return modes + [m + n for m in modes]

    def mean_photons(self) -> np.ndarray:
        """Mean photon number of each mode, ``(V_xx + V_pp - 2) / 4``."""
        n = self.n_modes
        d = np.diag(self.entries)
        return (d[:n] + d[n:] - 2) / 4

    def relabel(self, labels: Sequence[str]) -> "CovarianceMatrix":
        return CovarianceMatrix(self.entries, tuple(labels))


def vacuum_cov(n: int, labels: Sequence[str] = ()) -> CovarianceMatrix:
    if n < 1:
        raise ValueError("vacuum_cov needs at least one mode")
    return CovarianceMatrix(np.eye(2 * n), tuple(labels))


def thermal_cov(nbar: float, label: str = "m0") -> CovarianceMatrix:
    if nbar < 0:
        raise ValueError(f"thermal mean photon number must be >= 0, got {nbar}")
    return CovarianceMatrix((2 * nbar + 1) * np.eye(2), (label,))


def tmsv_cov(mu: float, labels: Sequence[str] = ("m0", "m1")) -> CovarianceMatrix:
    """Two-mode squeezed vacuum with ``mu`` mean photons per arm."""
    if mu < 0:
        raise ValueError(f"TMSV mean photon number must be >= 0, got {mu}")
    a = 2 * mu + 1
    c = 2 * np.sqrt(mu * (mu + 1))
    v = np.array(
        [
            [a, c, 0, 0],
            [c, a, 0, 0],
            [0, 0, a, -c],
            [0, 0, -c, a],
        ]
    )
    return CovarianceMatrix(v, tuple(labels))


def direct_sum(*covs: CovarianceMatrix) -> CovarianceMatrix:
    """Tensor product of independent states (block-diagonal in each sector).

    Labels are concatenated; if that produces duplicates (e.g. several
    default-labelled inputs) the result gets default labels ``m0, m1, ...``.
    """
    ns = [c.n_modes for c in covs]
    n = sum(ns)
    v = np.zeros((2 * n, 2 * n))
    offset = 0
    for cov, k in zip(covs, ns):
        src = cov.entries
        idx = np.r_[offset : offset + k, n + offset : n + offset + k]
        v[np.ix_(idx, idx)] = src
        offset += k
    labels = tuple(lab for cov in covs for lab in cov.labels)
    if len(set(labels)) != len(labels):
        labels = ()
    return CovarianceMatrix(v, labels)


def beamsplitter(t: float, i: int, j: int, n: int) -> np.ndarray:
    """Symplectic matrix of a beamsplitter of transmissivity ``t``.

    Output mode ``i`` is ``sqrt(t) in_i + sqrt(1-t) in_j`` and output mode
    ``j`` is ``-sqrt(1-t) in_i + sqrt(t) in_j``, in both quadratures.
    """
    if not 0 <= t <= 1:
        raise ValueError(f"transmissivity must lie in [0, 1], got {t}")
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"invalid beamsplitter modes ({i}, {j}) for {n} modes")
    s = np.eye(2 * n)
    ct, st = np.sqrt(t), np.sqrt(1 - t)
    for off in (0, n):
        a, b = i + off, j + off
        s[a, a] = ct
        s[a, b] = st
        s[b, a] = -st
        s[b, b] = ct
    return s


def is_symplectic(s: np.ndarray, tol: float = EPS_SYM) -> bool:
    om = omega(s.shape[0] // 2)
    return bool(np.max(np.abs(s @ om @ s.T - om)) <= tol)


def apply_symplectic(s: np.ndarray, cov: CovarianceMatrix) -> CovarianceMatrix:
    s = np.asarray(s, dtype=float)
    if s.shape != cov.entries.shape:
        raise ValueError(f"symplectic shape {s.shape} does not match {cov.entries.shape}")
    v = s @ cov.entries @ s.T
    return CovarianceMatrix(0.5 * (v + v.T), cov.labels)


def partial_trace(cov: CovarianceMatrix, keep: Sequence[str]) -> CovarianceMatrix:
    """Marginal on the modes in ``keep`` (in the order given)."""
    keep = list(keep)
    if not keep:
        raise ValueError("partial_trace needs at least one mode to keep")
    idx = cov.quadrature_indices(keep)
    return CovarianceMatrix(cov.entries[np.ix_(idx, idx)], tuple(keep))


def uncertainty_min_eig(cov: CovarianceMatrix) -> float:
    """Smallest eigenvalue of the Hermitian matrix ``V - i Omega``."""
    m = cov.entries - 1j * omega(cov.n_modes)
    return float(np.linalg.eigvalsh(m)[0])


@dataclass(frozen=True)
class PhysicalityReport:
    ok: bool
    min_eig: float

    def __bool__(self):
        return self.ok


def check_physical(cov: CovarianceMatrix, eps: float = EPS_PHYS) -> PhysicalityReport:
    """Uncertainty-relation test ``V - i Omega >= 0``.

    The tolerance scales with the spectral norm of ``V`` once it exceeds one,
    since eigensolver round-off does.
    """
    lam = uncertainty_min_eig(cov)
    scale = max(1.0, float(np.linalg.norm(cov.entries, 2)))
    return PhysicalityReport(lam >= -eps * scale, lam)


def symplectic_eigenvalues(cov: CovarianceMatrix, eps: float = EPS_PHYS) -> np.ndarray:
    """Sorted symplectic spectrum, one value per mode, clamped to >= 1.

    Uses the Hermitian matrix ``i V^{1/2} Omega V^{1/2}``, whose eigenvalues
    are ``+-nu_k``; the positive half is the spectrum.
    """
    report = check_physical(cov, eps)
    if not report:
        raise PhysicalityError("non-physical covariance matrix", report.min_eig, cov)
    v = cov.entries
    w, u = np.linalg.eigh(v)
    root = (u * np.sqrt(np.clip(w, 0, None))) @ u.T
    herm = 1j * root @ omega(cov.n_modes) @ root
    lam = np.linalg.eigvalsh(herm)
    n = cov.n_modes
    # eigvalsh sorts ascending: -nu_max .. -nu_min, nu_min .. nu_max
    nu = np.sort(0.5 * (lam[n:] - lam[:n][::-1]))
    return np.where(nu < 1, 1.0, nu)


def williamson(cov: CovarianceMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Williamson normal form ``V = S diag(nu, nu) S^T`` with ``S`` symplectic.

    Returns ``(nu, S)`` with ``nu`` one entry per mode (not sorted). Works on
    ``V^{-1/2} Omega V^{-1/2}``, whose real Schur form is block diagonal with
    blocks ``[[0, 1/nu], [-1/nu, 0]]``.
    """
    v = cov.entries
    n = cov.n_modes
    w, u = np.linalg.eigh(v)
    if w[0] <= 0:
        raise PhysicalityError("covariance matrix is not positive definite", float(w[0]), cov)
    inv_root = (u / np.sqrt(w)) @ u.T
    t, k = schur(inv_root @ omega(n) @ inv_root, output="real")
    cols_x, cols_p, taus = [], [], []
    for m in range(n):
        i, j = 2 * m, 2 * m + 1
        tau = t[i, j]
        if tau > 0:
            cols_x.append(k[:, i])
            cols_p.append(k[:, j])
        else:
            cols_x.append(k[:, j])
            cols_p.append(k[:, i])
        taus.append(abs(tau))
    kk = np.column_stack(cols_x + cols_p)
    nu = 1.0 / np.array(taus)
    # V^{-1/2} K diag(sqrt nu) maps V to the identity-scaled normal form
    s_inv_t = inv_root @ kk @ np.diag(np.sqrt(np.concatenate([nu, nu])))
    s = np.linalg.inv(s_inv_t).T
    return nu, s


def von_neumann_entropy(cov: CovarianceMatrix) -> float:
    nu = symplectic_eigenvalues(cov)
    return float(np.sum(g_entropy((nu - 1) / 2)))


def heterodyne_condition(cov: CovarianceMatrix, measured: str) -> CovarianceMatrix:
    """Covariance of the remaining modes after heterodyning ``measured``.

    ``V_R - C (V_m + I)^{-1} C^T`` with ``C`` the cross block between the
    remaining modes and the measured one. The result does not depend on the
    measurement outcome.
    """
    rest = [lab for lab in cov.labels if lab != measured]
    if len(rest) == cov.n_modes:
        raise KeyError(f"no mode labelled {measured!r} in {cov.labels}")
    if not rest:
        raise ValueError("cannot condition a single-mode state on itself")
    ir = cov.quadrature_indices(rest)
    im = cov.quadrature_indices([measured])
    v = cov.entries
    vr = v[np.ix_(ir, ir)]
    vm = v[np.ix_(im, im)]
    c = v[np.ix_(ir, im)]
    gram = vm + np.eye(2)
    if abs(np.linalg.det(gram)) < 1e-300:
        raise np.linalg.LinAlgError("singular V_m + I in heterodyne conditioning")
    out = vr - c @ np.linalg.solve(gram, c.T)
    return CovarianceMatrix(0.5 * (out + out.T), tuple(rest))


def random_passive_symplectic(n: int, rng: np.random.Generator, depth: int = 6) -> np.ndarray:
    """Product of random beamsplitters on random mode pairs."""
    s = np.eye(2 * n)
    if n < 2:
        return s
    for _ in range(depth):
        i, j = rng.choice(n, size=2, replace=False)
        s = beamsplitter(float(rng.uniform()), int(i), int(j), n) @ s
    return s


def single_mode_squeezer(r: float, i: int, n: int) -> np.ndarray:
    s = np.eye(2 * n)
    s[i, i] = np.exp(-r)
    s[i + n, i + n] = np.exp(r)
    return s


def phase_flip(cov: CovarianceMatrix, labels: Sequence[str]) -> CovarianceMatrix:
    """Reflect ``p -> -p`` on the given modes (a local, entropy-preserving map).

    This is the covariance-level partial transpose of those modes; the result
    need not be physical.
    """
    d = np.ones(2 * cov.n_modes)
    for lab in labels:
        d[cov.n_modes + cov.index(lab)] = -1
    v = cov.entries * np.outer(d, d)
    return CovarianceMatrix(v, cov.labels)
