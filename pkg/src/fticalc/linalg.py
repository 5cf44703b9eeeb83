"""Dense complex matrix primitives shared by every other module.

Matrices are square ``numpy.ndarray`` values with dtype complex128. The
operator norm is the largest singular value, computed as the square root of
the top eigenvalue of ``X* X``. :func:`herm_eig` pins a deterministic phase
convention on eigenvectors so repeated runs on identical input produce
identical output.

All tolerance decisions flow from a single :class:`ToleranceConfig` passed
explicitly; there is no mutable global state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotUnitary


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds used across the package.

    Attributes
    ----------
    rank_tol : float
        Relative threshold for numerical-rank decisions (nullspaces,
        singularity tests).
    gap_tol : float
        Minimal relative eigenvalue gap treated as a genuine spectral gap
        (canonicalization acceptance, cluster splitting).
    match_tol : float
        Tolerance for tuple matching and reassembly residuals.
    eig_sweep_tol : float
        Exact-tie threshold in the eigenvector ordering convention; also
        the strictest scale at which two eigenvalues count as one.
    """

    rank_tol: float = 1e-9
    gap_tol: float = 1e-6
    match_tol: float = 1e-8
    eig_sweep_tol: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("rank_tol", "gap_tol", "match_tol", "eig_sweep_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")


DEFAULT_TOL = ToleranceConfig()


def as_matrix(entries) -> np.ndarray:
    """Coerce to a square complex128 matrix, rejecting non-finite entries."""
    a = np.array(entries, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def operator_norm(x) -> float:
    """Largest singular value, via the top eigenvalue of ``X* X``."""
    a = np.asarray(x, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    gram = a.conj().T @ a
    w = np.linalg.eigvalsh(gram)
    return float(np.sqrt(max(float(w[-1]), 0.0)))


def _fix_phases(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive.

    Ties in magnitude break to the lowest row index (``argmax``), which keeps
    the convention deterministic.
    """
    out = v.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        i = int(np.argmax(np.abs(col)))
        pivot = col[i]
        mag = abs(pivot)
        if mag > 0.0:
            out[:, j] = col * (pivot.conjugate() / mag)
    return out


def _order_ties(w: np.ndarray, v: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
    """Reorder eigenvector columns inside exact-tie clusters lexicographically.

    Eigenvalues stay in ascending order; only columns whose eigenvalues agree
    within ``eig_sweep_tol`` scale are permuted, so the reconstruction
    residual moves by at most the cluster spread.
    """
    n = len(w)
    scale = tol.eig_sweep_tol * (1.0 + float(np.max(np.abs(w), initial=0.0)))
    out = v
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] <= scale:
            stop += 1
        if stop - start > 1:
            cols = list(range(start, stop))
            keys = {
                j: (np.round(out[:, j].real, 12).tobytes(), np.round(out[:, j].imag, 12).tobytes())
                for j in cols
            }
            order = sorted(cols, key=keys.get)
            if order != cols:
                out = out.copy()
                out[:, cols] = out[:, order]
        start = stop
    return out


def herm_eig(h, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with a fixed convention.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and unitary ``v``
    such that ``h ~ v @ diag(w) @ v*``. Each eigenvector's largest-magnitude
    entry is real positive. Raises :class:`NotHermitian` when the defect
    ``||h - h*||`` exceeds ``rank_tol * (1 + ||h||)``.
    """
    a = as_matrix(h)
    defect = operator_norm(a - a.conj().T)
    if defect > tol.rank_tol * (1.0 + operator_norm(a)):
        raise NotHermitian(f"Hermitian defect {defect:.3e} exceeds tolerance")
    sym = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(sym)
    v = _fix_phases(v)
    v = _order_ties(w, v, tol)
    return w, v


def nullspace(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical kernel, as columns.

    A singular value counts as zero when it is at most
    ``rank_tol * max(rows, cols) * (1 + sigma_max)``.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2d array, got shape {m.shape}")
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = float(s[0]) if s.size else 0.0
    thresh = tol.rank_tol * max(m.shape) * (1.0 + smax)
    rank = int(np.sum(s > thresh))
    return vh[rank:].conj().T


def matrix_abs(x, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Positive-semidefinite square root of ``X* X``."""
    a = as_matrix(x)
    gram = a.conj().T @ a
    w, v = herm_eig(gram, tol)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def polar_unitary(a) -> np.ndarray:
    """Nearest unitary in Frobenius distance (polar factor via SVD)."""
    m = as_matrix(a)
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def ensure_unitary(u, n: int | None = None, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Validate a unitary matrix, re-orthonormalizing small drift.

    Defects up to ``1e-8 * n`` pass through untouched; defects in
    ``(1e-8 * n, 1e-6]`` are repaired by polar projection (tolerates
    accumulated drift); anything larger raises :class:`NotUnitary`.
    """
    m = as_matrix(u)
    if n is not None and m.shape[0] != n:
        raise ValueError(f"expected a unitary of degree {n}, got {m.shape[0]}")
    d = m.shape[0]
    defect = operator_norm(m.conj().T @ m - np.eye(d))
    if defect <= 1e-8 * d:
        return m
    if defect <= 1e-6:
        return polar_unitary(m)
    raise NotUnitary(f"unitarity defect {defect:.3e} exceeds 1e-6")


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed random unitary (QR of a complex Gaussian)."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    phases = d / np.abs(d)
    return q * phases.conjugate()


def block_diag(mats) -> np.ndarray:
    """Block-diagonal assembly of square complex matrices."""
    mats = [np.asarray(m, dtype=np.complex128) for m in mats]
    if not mats:
        raise ValueError("need at least one block")
    total = sum(m.shape[0] for m in mats)
    out = np.zeros((total, total), dtype=np.complex128)
    pos = 0
    for m in mats:
        k = m.shape[0]
        out[pos : pos + k, pos : pos + k] = m
        pos += k
    return out
