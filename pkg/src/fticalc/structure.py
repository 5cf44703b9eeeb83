"""Commutants, irreducibility tests and decomposition into irreducible blocks.

The commutant W'(X) of a tuple consists of all matrices commuting with every
coordinate and every adjoint coordinate. It is computed as the nullspace of
one stacked (complex-linear) commutator map, so a single rank-tolerance
policy governs the whole test. A tuple is irreducible exactly when the
commutant is the scalars, and every tuple splits as ``U . (X_1 + ... + X_p)``
with irreducible blocks; :func:`decompose` recovers such a splitting by
eigen-splitting Hermitian elements of the commutant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalSplitFailure
from .linalg import DEFAULT_TOL, ToleranceConfig, block_diag, herm_eig, nullspace, operator_norm
from .tower import MatrixTuple, direct_sum_many, unitary_action

_SPLIT_SEED = 0x5B10C55


@dataclass(frozen=True)
class Decomposition:
    """A unitary U and irreducible blocks with ``X = U . (blocks[0] + ...)``."""

    unitary: np.ndarray
    blocks: tuple[MatrixTuple, ...]

    def reassemble(self, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixTuple:
        return unitary_action(self.unitary, direct_sum_many(self.blocks), tol)

    def residual(self, source: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> float:
        return source.distance(self.reassemble(tol))


def commutator_stack(mats, n: int) -> np.ndarray:
    """Matrix of A -> (A M - M A) stacked over the family.

    Row-major vectorization: vec(AM) = (I kron M^T) vec(A) and
    vec(MA) = (M kron I) vec(A). Used as a cross-check oracle; the
    production path goes through the Gram (see :func:`family_commutant`).
    """
    eye = np.eye(n, dtype=np.complex128)
    rows = []
    for m in mats:
        rows.append(np.kron(eye, m.T) - np.kron(m, eye))
    return np.vstack(rows)


# Below this stacked row count the direct SVD is cheap and its full accuracy
# is kept; above it the threshold rank_tol * rows dominates the Gram route's
# sqrt(eps) noise floor by two orders of magnitude, so the Gram is safe.
_GRAM_CUTOVER_ROWS = 1024


def family_commutant(mats, n: int, tol: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
    """Trace-orthonormal kernel of A -> (A M - M A) over a matrix family.

    One stacked complex-linear system governs the whole test. Small systems
    take the literal SVD route through :func:`fticalc.linalg.nullspace`;
    large ones accumulate the Gram in closed form,

        C_M* C_M = I kron (conj(M) M^T) + (M* M) kron I
                   - M kron conj(M) - M* kron M^T,

    which costs O(n^4) per family member instead of an O(n^6) tall SVD. Both
    routes apply the numerical-rank threshold of the stacked system.
    """
    mats = list(mats)
    dim = n * n
    rows = max(len(mats) * dim, dim)
    if rows < _GRAM_CUTOVER_ROWS:
        kernel = nullspace(commutator_stack(mats, n), tol)
        return [kernel[:, j].reshape(n, n) for j in range(kernel.shape[1])]
    eye = np.eye(n, dtype=np.complex128)
    gram = np.zeros((dim, dim), dtype=np.complex128)
    for m in mats:
        mh = m.conj().T
        gram += np.kron(eye, m.conj() @ m.T) + np.kron(mh @ m, eye)
        gram -= np.kron(m, m.conj()) + np.kron(mh, m.T)
    w, v = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    s = np.sqrt(np.clip(w, 0.0, None))
    smax = float(s[-1]) if s.size else 0.0
    thresh = tol.rank_tol * rows * (1.0 + smax)
    count = int(np.sum(s <= thresh))
    return [v[:, j].reshape(n, n) for j in range(count)]


def _star_family(mats) -> list[np.ndarray]:
    out = []
    for m in mats:
        out.append(m)
        out.append(m.conj().T)
    return out


def commutant_basis(x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
    """Trace-orthonormal basis of the commutant W'(X)."""
    return family_commutant(_star_family(x.matrices), x.degree, tol)


def is_irreducible(x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True when the commutant is one-dimensional (scalars only)."""
    return len(commutant_basis(x, tol)) == 1


def double_commutant_basis(x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
    """Basis of W''(X): a second commutant pass against the first basis.

    The commutant basis is *-closed up to re-span, but adjoints enter the
    family explicitly so the numerical test is symmetric.
    """
    first = commutant_basis(x, tol)
    return family_commutant(_star_family(first), x.degree, tol)


def word_span_dimension(
    x: MatrixTuple, max_word_length: int, tol: ToleranceConfig = DEFAULT_TOL
) -> int:
    """Dimension of span{I} + span{words in X_k, X_k* of length <= L}.

    Computed incrementally: level L only multiplies the directions new at
    level L-1 by each letter, and the loop stops as soon as a level adds
    nothing (the span is then an algebra, so longer words change nothing).
    This makes conservative bounds such as L = 2 n^2 - 1 affordable.
    """
    if max_word_length < 1:
        raise ValueError("max_word_length must be >= 1")
    n = x.degree
    letters = [m for m in x.matrices] + [m.conj().T for m in x.matrices]

    basis = np.eye(n, dtype=np.complex128).reshape(1, n * n)
    basis /= np.linalg.norm(basis[0])
    frontier = [np.eye(n, dtype=np.complex128)]

    for _ in range(max_word_length):
        candidates = []
        for f in frontier:
            for letter in letters:
                cand = f @ letter
                nrm = np.linalg.norm(cand)
                if nrm > 1e-300:
                    candidates.append(cand.reshape(-1) / nrm)
        if not candidates:
            break
        cand = np.array(candidates)
        # residual of candidates against the current span
        resid = cand - (cand @ basis.conj().T) @ basis
        _, s, vh = np.linalg.svd(resid, full_matrices=False)
        smax = float(s[0]) if s.size else 0.0
        thresh = tol.rank_tol * max(resid.shape) * (1.0 + smax)
        new_rank = int(np.sum(s > thresh))
        if new_rank == 0:
            break
        new_rows = vh[:new_rank]
        basis = np.vstack([basis, new_rows])
        frontier = [new_rows[j].reshape(n, n) for j in range(new_rank)]
        if basis.shape[0] >= n * n:
            break
    return basis.shape[0]


def _distance_to_scalars(h: np.ndarray) -> float:
    n = h.shape[0]
    return operator_norm(h - (np.trace(h) / n) * np.eye(n))


def _candidate_hermitian(
    basis: list[np.ndarray], attempt: int, rng: np.random.Generator
) -> np.ndarray | None:
    """Hermitian splitting candidate: basis elements first, then seeded mixes."""
    if attempt < len(basis):
        a = basis[attempt]
    else:
        coeffs = rng.standard_normal(len(basis))
        a = sum(c * b for c, b in zip(coeffs, basis))
    h1 = a + a.conj().T
    h2 = 1j * (a - a.conj().T)
    h = h1 if _distance_to_scalars(h1) >= _distance_to_scalars(h2) else h2
    return h


def _eigen_clusters(w: np.ndarray, gap: float) -> list[list[int]]:
    clusters: list[list[int]] = [[0]]
    for j in range(1, len(w)):
        if w[j] - w[j - 1] > gap:
            clusters.append([j])
        else:
            clusters[-1].append(j)
    return clusters


def _split_frames(
    x: MatrixTuple, tol: ToleranceConfig, max_attempts: int = 32
) -> list[tuple[np.ndarray, MatrixTuple]]:
    """Recursively split into (isometry frame, irreducible block) pairs."""
    n = x.degree
    basis = commutant_basis(x, tol)
    if len(basis) == 1:
        return [(np.eye(n, dtype=np.complex128), x)]

    rng = np.random.default_rng([_SPLIT_SEED, n, x.length, len(basis)])
    for attempt in range(max_attempts):
        h = _candidate_hermitian(basis, attempt, rng)
        scale = 1.0 + operator_norm(h)
        if _distance_to_scalars(h) <= tol.gap_tol * scale:
            continue
        w, v = herm_eig(h, tol)
        clusters = _eigen_clusters(w, tol.gap_tol * scale)
        if len(clusters) < 2:
            continue
        out: list[tuple[np.ndarray, MatrixTuple]] = []
        for idx in clusters:
            frame = v[:, idx]
            sub = MatrixTuple(
                tuple(frame.conj().T @ m @ frame for m in x.matrices)
            )
            for inner_frame, block in _split_frames(sub, tol, max_attempts):
                out.append((frame @ inner_frame, block))
        return out
    raise NumericalSplitFailure(
        f"no commutant element split the degree-{n} tuple within {max_attempts} attempts"
    )


def _block_sort_key(block: MatrixTuple, enumeration, tol: ToleranceConfig):
    from .canon import canonicalize  # deferred: canon depends on this module

    cf = canonicalize(block, enumeration, tol, check=False)
    rep_bytes = tuple(
        (np.round(m.real, 9).tobytes(), np.round(m.imag, 9).tobytes())
        for m in cf.rep.matrices
    )
    return (block.degree, cf.index, rep_bytes)


def decompose(
    x: MatrixTuple,
    tol: ToleranceConfig = DEFAULT_TOL,
    enumeration=None,
) -> Decomposition:
    """Split X into certified-irreducible blocks with a witness unitary.

    Block order is deterministic: degree first, then the lexicographic order
    of the blocks' canonical representatives under ``enumeration`` (the
    default scheme when none is given). Raises
    :class:`NumericalSplitFailure` when the reassembly residual exceeds
    ``match_tol * (1 + ||X||)``.
    """
    from .canon import DEFAULT_ENUMERATION  # deferred import, see above

    enum = enumeration if enumeration is not None else DEFAULT_ENUMERATION
    pairs = _split_frames(x, tol)
    pairs.sort(key=lambda fb: _block_sort_key(fb[1], enum, tol))
    unitary = np.hstack([frame for frame, _ in pairs])
    dec = Decomposition(unitary=unitary, blocks=tuple(block for _, block in pairs))
    resid = dec.residual(x, tol)
    if resid > tol.match_tol * (1.0 + x.norm()):
        raise NumericalSplitFailure(
            f"reassembly residual {resid:.3e} exceeds tolerance; input is borderline degenerate"
        )
    return dec


def assemble(unitary: np.ndarray, blocks, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixTuple:
    """Inverse of decomposition: ``U . (blocks[0] + blocks[1] + ...)``."""
    return unitary_action(unitary, direct_sum_many(blocks), tol)


def block_diag_tuple(blocks) -> MatrixTuple:
    """Direct sum without a conjugating unitary (identity frame)."""
    blocks = list(blocks)
    return MatrixTuple(
        tuple(
            block_diag([b.matrices[k] for b in blocks])
            for k in range(blocks[0].length)
        )
    )
