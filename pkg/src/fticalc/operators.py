"""Finite direct sums of irreducible sectors and the calculus u -> u[T].

An :class:`FtiOperator` models an operator tuple as a weighted finite direct
sum of irreducible matrix-tuple sectors conjugated by one global unitary.
The weights form an atomic probability measure over the sectors' unitary
classes. Applying a compatible function happens sector by sector at the
cached canonical representatives, so repeated applications share the
canonicalization cost, and the operator norm of a value is exactly the
maximum over sectors of the kernel-value norm.

Model operators built by :func:`from_tuple` / :func:`from_block_commuting`
carry certified-irreducible sectors. Applying a function preserves the
sector frame but the value blocks may be reducible (an indicator's values
are scalar); such sectors carry no cached canonical form and are
re-decomposed on demand when another function is applied to them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .calculus import CompatibleFunction, compose, evaluate_at_tuple
from .canon import CanonicalForm, PolynomialEnumeration, canonical_distance, canonicalize
from .errors import (
    DimensionCap,
    DimensionMismatch,
    LengthMismatch,
    NotAPartition,
    NotCommuting,
    NotNormal,
    SchemeMismatch,
    ShapeMismatch,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    block_diag,
    ensure_unitary,
    herm_eig,
    operator_norm,
)
from .structure import decompose, double_commutant_basis
from .tower import MatrixTuple, direct_sum_many, unitary_action

DEFAULT_DIMENSION_CAP = 256

_POLY_SPAN_SEED = 0xF1D0


@dataclass(frozen=True)
class Sector:
    """One weighted direct summand; ``canon`` is cached when the block is
    certified irreducible."""

    weight: float
    block: MatrixTuple
    canon: CanonicalForm | None = None

    @property
    def degree(self) -> int:
        return self.block.degree


@dataclass(frozen=True)
class FtiOperator:
    """Weighted direct sum of sectors under one global unitary frame."""

    sectors: tuple[Sector, ...]
    unitary: np.ndarray | None
    enumeration: PolynomialEnumeration

    def __post_init__(self) -> None:
        if not self.sectors:
            raise ShapeMismatch("an operator needs at least one sector")
        ell = self.sectors[0].block.length
        for s in self.sectors:
            if s.block.length != ell:
                raise LengthMismatch("all sector blocks must share one tuple length")
            if not s.weight > 0:
                raise ValueError("sector weights must be positive")
        total = sum(s.weight for s in self.sectors)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"sector weights must sum to 1, got {total!r}")
        if self.unitary is not None:
            w = ensure_unitary(as_matrix(self.unitary), n=self.total_dimension)
            w.setflags(write=False)
            object.__setattr__(self, "unitary", w)

    @property
    def ell(self) -> int:
        return self.sectors[0].block.length

    @property
    def total_dimension(self) -> int:
        return sum(s.degree for s in self.sectors)

    @property
    def scheme(self) -> str:
        return self.enumeration.label

    @property
    def is_model(self) -> bool:
        """True when every sector carries a certified canonical form."""
        return all(s.canon is not None for s in self.sectors)

    def norm(self) -> float:
        """Exact operator norm: max over sectors of the block norm."""
        return max(s.block.norm() for s in self.sectors)

    def sector_canon(self, index: int, tol: ToleranceConfig = DEFAULT_TOL) -> CanonicalForm:
        s = self.sectors[index]
        if s.canon is not None:
            return s.canon
        return canonicalize(s.block, self.enumeration, tol)

    # ----- frame-aligned arithmetic (shared sector structure) -----

    def _check_frame(self, other: "FtiOperator") -> None:
        if self.scheme != other.scheme:
            raise SchemeMismatch(f"schemes differ: {self.scheme} vs {other.scheme}")
        if len(self.sectors) != len(other.sectors):
            raise DimensionMismatch("operators have different sector counts")
        for a, b in zip(self.sectors, other.sectors):
            if a.degree != b.degree or abs(a.weight - b.weight) > 1e-9:
                raise DimensionMismatch("operators do not share a sector frame")
        ua, ub = self.unitary, other.unitary
        if (ua is None) != (ub is None) or (
            ua is not None and not np.array_equal(ua, ub)
        ):
            raise DimensionMismatch("operators do not share a global unitary")

    def _zip(self, other: "FtiOperator", fn) -> "FtiOperator":
        self._check_frame(other)
        sectors = tuple(
            Sector(a.weight, fn(a.block, b.block), None)
            for a, b in zip(self.sectors, other.sectors)
        )
        return FtiOperator(sectors, self.unitary, self.enumeration)

    def __add__(self, other: "FtiOperator") -> "FtiOperator":
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other: "FtiOperator") -> "FtiOperator":
        return self._zip(other, lambda a, b: a - b)

    def __mul__(self, other: "FtiOperator") -> "FtiOperator":
        return self._zip(other, lambda a, b: a * b)

    def __rmul__(self, alpha: complex) -> "FtiOperator":
        sectors = tuple(Sector(s.weight, s.block.scale(alpha), None) for s in self.sectors)
        return FtiOperator(sectors, self.unitary, self.enumeration)

    def adjoint(self) -> "FtiOperator":
        sectors = tuple(Sector(s.weight, s.block.star(), None) for s in self.sectors)
        return FtiOperator(sectors, self.unitary, self.enumeration)

    def __repr__(self) -> str:
        degrees = ",".join(str(s.degree) for s in self.sectors)
        return (
            f"FtiOperator(l={self.ell}, sectors=[{degrees}], "
            f"dim={self.total_dimension}, scheme={self.scheme})"
        )


def _normalized_weights(weights, count: int, dims) -> tuple[float, ...]:
    if weights is None:
        total = float(sum(dims))
        return tuple(d / total for d in dims)
    ws = [float(w) for w in weights]
    if len(ws) != count:
        raise ShapeMismatch(f"expected {count} weights, got {len(ws)}")
    if any(w <= 0 for w in ws):
        raise ValueError("weights must be positive")
    total = sum(ws)
    return tuple(w / total for w in ws)


def from_tuple(
    x: MatrixTuple,
    enumeration: PolynomialEnumeration,
    tol: ToleranceConfig = DEFAULT_TOL,
    weights=None,
) -> FtiOperator:
    """Model a concrete tuple: decompose, certify sectors, cache canon forms.

    Default weights are proportional to block dimensions.
    """
    dec = decompose(x, tol, enumeration)
    canons = [canonicalize(b, enumeration, tol, check=False) for b in dec.blocks]
    ws = _normalized_weights(weights, len(dec.blocks), [b.degree for b in dec.blocks])
    sectors = tuple(
        Sector(w, b, c) for w, b, c in zip(ws, dec.blocks, canons)
    )
    return FtiOperator(sectors, dec.unitary, enumeration)


def materialize(t: FtiOperator, cap: int = DEFAULT_DIMENSION_CAP) -> MatrixTuple:
    """Assemble the explicit tuple ``W . (blocks[0] + blocks[1] + ...)``."""
    n = t.total_dimension
    if n > cap:
        raise DimensionCap(f"total dimension {n} exceeds the cap {cap}")
    assembled = direct_sum_many([s.block for s in t.sectors])
    if t.unitary is None:
        return assembled
    return unitary_action(t.unitary, assembled)


def conjugate(u, t: FtiOperator, tol: ToleranceConfig = DEFAULT_TOL) -> FtiOperator:
    """Compose a unitary into the global frame; sectors are untouched."""
    w = as_matrix(u)
    if w.shape[0] != t.total_dimension:
        raise DimensionMismatch(
            f"unitary degree {w.shape[0]} does not match total dimension {t.total_dimension}"
        )
    w = ensure_unitary(w, tol=tol)
    inner = t.unitary if t.unitary is not None else np.eye(t.total_dimension)
    return FtiOperator(t.sectors, w @ inner, t.enumeration)


def direct_sum_ops(ts, weights) -> FtiOperator:
    """Convex combination of operators: concatenated sectors, rescaled weights."""
    ts = list(ts)
    if not ts:
        raise ShapeMismatch("need at least one operator")
    ell = ts[0].ell
    scheme = ts[0].scheme
    for t in ts[1:]:
        if t.ell != ell:
            raise LengthMismatch("operators must share one tuple length")
        if t.scheme != scheme:
            raise SchemeMismatch(f"schemes differ: {t.scheme} vs {scheme}")
    coef = _normalized_weights(weights, len(ts), [1] * len(ts))
    sectors = []
    frames = []
    for c, t in zip(coef, ts):
        for s in t.sectors:
            sectors.append(Sector(c * s.weight, s.block, s.canon))
        frames.append(
            t.unitary if t.unitary is not None else np.eye(t.total_dimension)
        )
    return FtiOperator(tuple(sectors), block_diag(frames), ts[0].enumeration)


def apply(
    f: CompatibleFunction, t: FtiOperator, tol: ToleranceConfig = DEFAULT_TOL
) -> FtiOperator:
    """The calculus value f[T]: sector-wise kernel evaluation.

    Coordinate selections act verbatim on sector blocks. For certified
    sectors the value is ``W_j^{-1} . f(K_j)``; sectors without a cached
    canonical form go through the full extension evaluation. Weights and the
    global unitary are preserved, so ``||f[T]||`` equals the max over
    sectors of ``||f(K_j)||``.
    """
    if f.scheme != t.scheme:
        raise SchemeMismatch(f"function scheme {f.scheme} does not match operator scheme {t.scheme}")
    if f.ell != t.ell:
        raise ShapeMismatch(f"function takes {f.ell}-tuples but the operator has length {t.ell}")
    new_sectors = []
    for s in t.sectors:
        if f.projection_indices is not None:
            block = MatrixTuple(tuple(s.block.matrices[j - 1] for j in f.projection_indices))
        elif s.canon is not None:
            val = f.value_at(s.canon, tol)
            block = unitary_action(s.canon.witness.conj().T, val, tol)
        else:
            block = evaluate_at_tuple(f, s.block, tol)
        new_sectors.append(Sector(s.weight, block, None))
    return FtiOperator(tuple(new_sectors), t.unitary, t.enumeration)


def identity_operator(t: FtiOperator) -> FtiOperator:
    sectors = tuple(
        Sector(s.weight, MatrixTuple.identities(1, s.degree), None) for s in t.sectors
    )
    return FtiOperator(sectors, t.unitary, t.enumeration)


def compose_check(
    v: CompatibleFunction,
    u: CompatibleFunction,
    t: FtiOperator,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> float:
    """Residual ``|| v[u[T]] - (v o u)[T] ||`` (two evaluation paths)."""
    lhs = apply(v, apply(u, t, tol), tol)
    rhs = apply(compose(v, u, tol), t, tol)
    return (lhs - rhs).norm()


def convergence_check(
    fs,
    f: CompatibleFunction,
    t: FtiOperator,
    tol: ToleranceConfig = DEFAULT_TOL,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> list[tuple[float, float]]:
    """Norms ``(||f_n[T] - f[T]||, ||f_n*[T] - f*[T]||)`` per sequence entry.

    Norms are measured on the materialized difference when the dimension
    allows (brute-force route); the sector-max route is the exact blockwise
    value and tests compare the two.
    """
    target = apply(f, t, tol)
    target_star = apply(f.adjoint(), t, tol)
    out = []
    for fn in fs:
        d1 = apply(fn, t, tol) - target
        d2 = apply(fn.adjoint(), t, tol) - target_star
        out.append((_operator_value_norm(d1, cap), _operator_value_norm(d2, cap)))
    return out


def _operator_value_norm(t: FtiOperator, cap: int) -> float:
    if t.total_dimension <= cap:
        return materialize(t, cap).norm()
    return t.norm()


def sector_deviation(
    fn: CompatibleFunction, f: CompatibleFunction, t: FtiOperator, tol: ToleranceConfig = DEFAULT_TOL
) -> float:
    """Max over sectors of ``||f_n(K_j) - f(K_j)||`` (the blockwise norm)."""
    worst = 0.0
    for j in range(len(t.sectors)):
        cf = t.sector_canon(j, tol)
        worst = max(worst, fn.value_at(cf, tol).distance(f.value_at(cf, tol)))
    return worst


def piecewise_sum(
    pairs, t: FtiOperator, tol: ToleranceConfig = DEFAULT_TOL
) -> FtiOperator:
    """Finite sum of u_j[T] b_j[T] over an indicator partition.

    The b_j must be pairwise disjoint indicators summing to the unit on the
    sectors' representatives: every sector must select exactly one branch,
    otherwise :class:`NotAPartition` is raised. Refining the partition does
    not change the value.
    """
    pairs = list(pairs)
    if not pairs:
        raise NotAPartition("need at least one (function, indicator) pair")
    for u_j, b_j in pairs:
        if u_j.scheme != t.scheme or b_j.scheme != t.scheme:
            raise SchemeMismatch("pair schemes must match the operator scheme")
    new_sectors = []
    for j, s in enumerate(t.sectors):
        cf = t.sector_canon(j, tol)
        n = s.degree
        chosen = -1
        for idx, (_, b_j) in enumerate(pairs):
            val = b_j.value_at(cf, tol).matrices[0]
            on = operator_norm(val - np.eye(n)) <= tol.match_tol * n
            off = operator_norm(val) <= tol.match_tol * n
            if not (on or off):
                raise NotAPartition(
                    f"branch {idx} is not an indicator at sector {j} (degree {n})"
                )
            if on:
                if chosen >= 0:
                    raise NotAPartition(f"sector {j} selected by branches {chosen} and {idx}")
                chosen = idx
        if chosen < 0:
            raise NotAPartition(f"sector {j} not covered by any branch")
        val = pairs[chosen][0].value_at(cf, tol)
        block = unitary_action(cf.witness.conj().T, val, tol)
        new_sectors.append(Sector(s.weight, block, None))
    return FtiOperator(tuple(new_sectors), t.unitary, t.enumeration)


def distinct_classes(
    t: FtiOperator, tol: ToleranceConfig = DEFAULT_TOL
) -> list[tuple[CanonicalForm, float, list[int]]]:
    """Deduplicated sector classes with aggregated weights and sector indices.

    Two sectors share a class when their canonical forms agree within
    ``match_tol`` scale (same degree and enumeration index required).
    """
    classes: list[tuple[CanonicalForm, float, list[int]]] = []
    scale = tol.match_tol * (1.0 + t.norm())
    for j, s in enumerate(t.sectors):
        cf = t.sector_canon(j, tol)
        for i, (ref, w, idxs) in enumerate(classes):
            if canonical_distance(ref, cf) <= scale:
                classes[i] = (ref, w + s.weight, idxs + [j])
                break
        else:
            classes.append((cf, s.weight, [j]))
    order = sorted(
        range(len(classes)),
        key=lambda i: (
            classes[i][0].degree,
            classes[i][0].index,
            tuple(
                (np.round(m.real, 9).tobytes(), np.round(m.imag, 9).tobytes())
                for m in classes[i][0].rep.matrices
            ),
        ),
    )
    return [classes[i] for i in order]


def restrict_sectors(t: FtiOperator, indices) -> FtiOperator:
    """Restriction to a reducing sector subset, as a standalone model.

    The restriction lives on its own direct-sum space (no global frame) and
    weights renormalize to keep the atomic measure probabilistic.
    """
    picked = [t.sectors[i] for i in indices]
    if not picked:
        raise ShapeMismatch("restriction needs at least one sector")
    total = sum(s.weight for s in picked)
    sectors = tuple(Sector(s.weight / total, s.block, s.canon) for s in picked)
    return FtiOperator(sectors, None, t.enumeration)


def with_enumeration(
    t: FtiOperator, enumeration: PolynomialEnumeration, tol: ToleranceConfig = DEFAULT_TOL
) -> FtiOperator:
    """Same operator, sectors re-canonicalized under another scheme."""
    sectors = tuple(
        replace(s, canon=canonicalize(s.block, enumeration, tol, check=False))
        for s in t.sectors
    )
    return FtiOperator(sectors, t.unitary, enumeration)


# ---------------------------------------------------------------------------
# Ingestion of block matrices of commuting normal matrices.

def _joint_eigenbasis(mats, d: int, tol: ToleranceConfig) -> np.ndarray:
    """Common eigenbasis of a commuting normal family (d x d).

    Processes the Hermitian and anti-Hermitian part of every matrix once,
    refining an orthogonal frame decomposition; eigenvalues closer than
    ``gap_tol`` scale stay clustered and later matrices split them. Frames
    still multidimensional at the end are fine exactly when every matrix is
    scalar on them, which the caller verifies.
    """
    frames = [np.eye(d, dtype=np.complex128)]
    herm_parts = []
    for a in mats:
        herm_parts.append(0.5 * (a + a.conj().T))
        herm_parts.append(0.5j * (a - a.conj().T))
    for h in herm_parts:
        scale = 1.0 + operator_norm(h)
        new_frames = []
        for frame in frames:
            k = frame.shape[1]
            if k == 1:
                new_frames.append(frame)
                continue
            sub = frame.conj().T @ h @ frame
            w, v = herm_eig(0.5 * (sub + sub.conj().T), tol)
            clusters = []
            start = 0
            for j in range(1, k):
                if w[j] - w[j - 1] > tol.gap_tol * scale:
                    clusters.append(list(range(start, j)))
                    start = j
            clusters.append(list(range(start, k)))
            for idx in clusters:
                new_frames.append(frame @ v[:, idx])
        frames = new_frames
    return np.hstack(frames)


def from_block_commuting(
    blocks,
    enumeration: PolynomialEnumeration,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> FtiOperator:
    """Model an l-tuple of N x N block matrices of commuting normal d x d entries.

    ``blocks[p]`` must be an (N, N, d, d) array (or nested lists). All N^2 l
    entry matrices must pairwise commute and be normal within ``rank_tol``
    scale. The family is simultaneously diagonalized; for each joint
    eigenindex i the blocks collapse to N x N scalar matrices which are then
    decomposed into irreducible sectors. Weights are uniform over i, then
    dimension-split, and the global unitary reproduces the assembled block
    operator exactly.
    """
    arrays = [np.asarray(b, dtype=np.complex128) for b in blocks]
    if not arrays:
        raise ShapeMismatch("need at least one coordinate")
    shape = arrays[0].shape
    if len(shape) != 4 or shape[0] != shape[1] or shape[2] != shape[3]:
        raise ShapeMismatch(f"expected (N, N, d, d) arrays, got {shape}")
    for a in arrays[1:]:
        if a.shape != shape:
            raise ShapeMismatch("all coordinates must share one block shape")
    big_n, _, d, _ = shape

    entries = []
    labels = []
    for p, a in enumerate(arrays):
        for j in range(big_n):
            for k in range(big_n):
                entries.append(a[j, k])
                labels.append((p + 1, j + 1, k + 1))

    for (p, j, k), m in zip(labels, entries):
        defect = operator_norm(m @ m.conj().T - m.conj().T @ m)
        if defect > tol.rank_tol * d * (1.0 + operator_norm(m)) ** 2:
            raise NotNormal(
                f"entry (p={p}, row={j}, col={k}) has normality defect {defect:.3e}"
            )
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            a, b = entries[i], entries[j]
            defect = operator_norm(a @ b - b @ a)
            bound = tol.rank_tol * d * (1.0 + operator_norm(a)) * (1.0 + operator_norm(b))
            if defect > bound:
                raise NotCommuting(
                    f"entries {labels[i]} and {labels[j]} have commutator norm {defect:.3e}"
                )

    v = _joint_eigenbasis(entries, d, tol)
    max_norm = max(operator_norm(m) for m in entries)
    # residue left on the off-diagonal feeds straight into the model error,
    # so the collapse is held to rank_tol scale, not gap_tol
    collapse_tol = tol.rank_tol * d * (1.0 + max_norm) * 10.0
    rotated = []
    for (p, j, k), m in zip(labels, entries):
        r = v.conj().T @ m @ v
        off = operator_norm(r - np.diag(np.diagonal(r)))
        if off > collapse_tol:
            raise NotCommuting(
                f"entry (p={p}, row={j}, col={k}) resists joint diagonalization "
                f"(off-diagonal mass {off:.3e}); eigenvalues are too clustered"
            )
        rotated.append(np.diagonal(r))

    # collapsed N x N tuples, one per joint eigenindex
    eigen_tuples = []
    for alpha in range(d):
        coords = []
        for p in range(len(arrays)):
            m = np.zeros((big_n, big_n), dtype=np.complex128)
            for idx, (q, j, k) in enumerate(labels):
                if q == p + 1:
                    m[j - 1, k - 1] = rotated[idx][alpha]
            coords.append(m)
        eigen_tuples.append(MatrixTuple(tuple(coords)))

    # permutation carrying (eigenindex-major) back to (block-major) layout
    perm = np.zeros((big_n * d, big_n * d), dtype=np.complex128)
    for j in range(big_n):
        for alpha in range(d):
            perm[j * d + alpha, alpha * big_n + j] = 1.0
    outer = np.kron(np.eye(big_n), v) @ perm

    sectors = []
    frames = []
    for tup in eigen_tuples:
        dec = decompose(tup, tol, enumeration)
        frames.append(dec.unitary)
        for b in dec.blocks:
            cf = canonicalize(b, enumeration, tol, check=False)
            sectors.append(Sector((1.0 / d) * (b.degree / big_n), b, cf))
    unitary = outer @ block_diag(frames)
    return FtiOperator(tuple(sectors), unitary, enumeration)


def assemble_block_tuple(blocks) -> MatrixTuple:
    """The raw block operator: coordinate p is the (N d) x (N d) block matrix."""
    arrays = [np.asarray(b, dtype=np.complex128) for b in blocks]
    big_n, _, d, _ = arrays[0].shape
    coords = []
    for a in arrays:
        m = np.zeros((big_n * d, big_n * d), dtype=np.complex128)
        for j in range(big_n):
            for k in range(big_n):
                m[j * d : (j + 1) * d, k * d : (k + 1) * d] = a[j, k]
        coords.append(m)
    return MatrixTuple(tuple(coords))


# ---------------------------------------------------------------------------
# Double-commutant span report.

@dataclass(frozen=True)
class DoubleCommutantReport:
    span_dimension: int
    double_commutant_dimension: int
    structural_dimension: int

    @property
    def consistent(self) -> bool:
        return (
            self.span_dimension
            == self.double_commutant_dimension
            == self.structural_dimension
        )


def double_commutant_check(
    t: FtiOperator,
    fs=(),
    tol: ToleranceConfig = DEFAULT_TOL,
    cap: int = DEFAULT_DIMENSION_CAP,
    rank_threshold: float = 1e-8,
) -> DoubleCommutantReport:
    """Compare three computations of dim W''(T).

    The span of materialized values f[T] over the given functions plus
    seeded random polynomials and degree indicators; the brute-force double
    commutant of the materialized tuple; and the structural value: the sum
    of squared degrees over distinct sector classes.
    """
    from .calculus import make_indicator, make_polynomial, unit_function
    from .spectra import degree_in

    n = t.total_dimension
    if n > cap:
        raise DimensionCap(f"total dimension {n} exceeds the cap {cap}")
    classes = distinct_classes(t, tol)
    structural = sum(cf.degree**2 for cf, _, _ in classes)

    functions = list(fs)
    functions.append(unit_function(t.ell, t.enumeration))
    degrees = sorted({s.degree for s in t.sectors})
    for deg in degrees:
        functions.append(
            make_indicator(degree_in({deg}, t.enumeration), t.ell, t.enumeration)
        )
    rng = np.random.default_rng([_POLY_SPAN_SEED, n, len(classes)])
    needed = 2 * structural + 8
    while len(functions) < needed:
        functions.append(
            make_polynomial(_random_span_polynomial(rng, t.ell), t.ell, t.enumeration)
        )

    vectors = []
    for f in functions:
        value = materialize(apply(f, t, tol), cap)
        vec = value.matrices[0].reshape(-1)
        nrm = np.linalg.norm(vec)
        if nrm > 1e-300:
            vectors.append(vec / nrm)
    stack = np.array(vectors)
    s = np.linalg.svd(stack, compute_uv=False)
    span_dim = int(np.sum(s > rank_threshold * float(s[0])))

    w2_dim = len(double_commutant_basis(materialize(t, cap), tol))
    return DoubleCommutantReport(span_dim, w2_dim, structural)


def _random_span_polynomial(rng: np.random.Generator, ell: int):
    from .tower import StarPolynomial

    terms = []
    for _ in range(int(rng.integers(1, 4))):
        length = int(rng.integers(1, 5))
        raw = rng.integers(0, 2 * ell, size=length)
        word = tuple(int(r) + 1 if r < ell else -(int(r) - ell + 1) for r in raw)
        re, im = rng.standard_normal(2)
        terms.append((complex(re, im) / 2.0, word))
    return StarPolynomial(tuple(terms))


# ---------------------------------------------------------------------------
# JSON encoding (shared with the CLI).

def operator_to_json(t: FtiOperator) -> dict:
    from .tower import matrix_to_json, tuple_to_json

    return {
        "l": t.ell,
        "scheme": t.scheme,
        "W": None if t.unitary is None else matrix_to_json(t.unitary),
        "sectors": [
            {"weight": float(s.weight), "block": tuple_to_json(s.block)}
            for s in t.sectors
        ],
    }


def operator_from_json(obj, tol: ToleranceConfig = DEFAULT_TOL) -> FtiOperator:
    """Rebuild a model operator; sector blocks are re-certified on load."""
    from .canon import PolynomialEnumeration
    from .tower import _require_keys, matrix_from_json, tuple_from_json

    _require_keys(obj, {"l", "scheme", "W", "sectors"}, "operator")
    enumeration = PolynomialEnumeration.from_label(str(obj["scheme"]))
    sectors = []
    for raw in obj["sectors"]:
        _require_keys(raw, {"weight", "block"}, "sector")
        block = tuple_from_json(raw["block"])
        canon = canonicalize(block, enumeration, tol)
        sectors.append(Sector(float(raw["weight"]), block, canon))
    unitary = None if obj["W"] is None else matrix_from_json(obj["W"])
    t = FtiOperator(tuple(sectors), unitary, enumeration)
    if t.ell != int(obj["l"]):
        raise ValueError("operator header does not match its sectors")
    return t
