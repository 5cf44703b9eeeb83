"""Tuples of same-degree complex matrices and their basic operations.

A :class:`MatrixTuple` is a finite sequence of n x n matrices sharing the
degree n. The module provides the direct sum (coordinatewise block
diagonal), the unitary conjugation action ``U.X = (U X_k U*)_k``, pointwise
*-algebra operations, evaluation of *-polynomials, and the norm-contracting
change of variables ``X -> X (I + |X|)^{-1}`` together with its inverse.

The tuple norm is the maximum coordinate operator norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    DegreeMismatch,
    IndexOutOfRange,
    LengthMismatch,
    NormTooLarge,
    ShapeMismatch,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    block_diag,
    ensure_unitary,
    herm_eig,
    matrix_abs,
    operator_norm,
)


@dataclass(frozen=True)
class MatrixTuple:
    """An l-tuple of n x n complex matrices (l >= 1, shared degree n)."""

    matrices: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not self.matrices:
            raise LengthMismatch("a matrix tuple needs at least one coordinate")
        mats = tuple(as_matrix(m) for m in self.matrices)
        n = mats[0].shape[0]
        for m in mats[1:]:
            if m.shape[0] != n:
                raise DegreeMismatch("all coordinates must share one degree")
        for m in mats:
            m.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @classmethod
    def of(cls, *matrices) -> "MatrixTuple":
        return cls(tuple(matrices))

    @property
    def length(self) -> int:
        return len(self.matrices)

    @property
    def degree(self) -> int:
        return self.matrices[0].shape[0]

    def norm(self) -> float:
        return max(operator_norm(m) for m in self.matrices)

    def star(self) -> "MatrixTuple":
        return MatrixTuple(tuple(m.conj().T for m in self.matrices))

    def scale(self, alpha: complex) -> "MatrixTuple":
        return MatrixTuple(tuple(complex(alpha) * m for m in self.matrices))

    def __add__(self, other: "MatrixTuple") -> "MatrixTuple":
        _check_shapes(self, other)
        return MatrixTuple(tuple(a + b for a, b in zip(self.matrices, other.matrices)))

    def __sub__(self, other: "MatrixTuple") -> "MatrixTuple":
        _check_shapes(self, other)
        return MatrixTuple(tuple(a - b for a, b in zip(self.matrices, other.matrices)))

    def __mul__(self, other: "MatrixTuple") -> "MatrixTuple":
        _check_shapes(self, other)
        return MatrixTuple(tuple(a @ b for a, b in zip(self.matrices, other.matrices)))

    def __rmul__(self, alpha: complex) -> "MatrixTuple":
        return self.scale(alpha)

    def distance(self, other: "MatrixTuple") -> float:
        _check_shapes(self, other)
        return max(
            operator_norm(a - b) for a, b in zip(self.matrices, other.matrices)
        )

    @classmethod
    def zeros(cls, length: int, degree: int) -> "MatrixTuple":
        return cls(tuple(np.zeros((degree, degree), dtype=np.complex128) for _ in range(length)))

    @classmethod
    def identities(cls, length: int, degree: int) -> "MatrixTuple":
        return cls(tuple(np.eye(degree, dtype=np.complex128) for _ in range(length)))

    def __repr__(self) -> str:  # compact, entries elided
        return f"MatrixTuple(l={self.length}, n={self.degree})"


def _check_shapes(x: MatrixTuple, y: MatrixTuple) -> None:
    if x.length != y.length:
        raise ShapeMismatch(f"tuple lengths differ: {x.length} vs {y.length}")
    if x.degree != y.degree:
        raise ShapeMismatch(f"tuple degrees differ: {x.degree} vs {y.degree}")


def direct_sum(x: MatrixTuple, y: MatrixTuple) -> MatrixTuple:
    """Coordinatewise block-diagonal sum; degree adds."""
    if x.length != y.length:
        raise LengthMismatch(f"tuple lengths differ: {x.length} vs {y.length}")
    return MatrixTuple(
        tuple(block_diag([a, b]) for a, b in zip(x.matrices, y.matrices))
    )


def direct_sum_many(blocks: Iterable[MatrixTuple]) -> MatrixTuple:
    blocks = list(blocks)
    if not blocks:
        raise LengthMismatch("need at least one summand")
    ell = blocks[0].length
    for b in blocks[1:]:
        if b.length != ell:
            raise LengthMismatch("all summands must share one tuple length")
    return MatrixTuple(
        tuple(block_diag([b.matrices[k] for b in blocks]) for k in range(ell))
    )


def unitary_action(u, x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixTuple:
    """Conjugation ``U.X = (U X_k U*)_k``; preserves degree and norm."""
    w = as_matrix(u)
    if w.shape[0] != x.degree:
        raise DegreeMismatch(
            f"unitary degree {w.shape[0]} does not match tuple degree {x.degree}"
        )
    w = ensure_unitary(w, tol=tol)
    wh = w.conj().T
    return MatrixTuple(tuple(w @ m @ wh for m in x.matrices))


def tuple_algebra(op: str, x: MatrixTuple, other=None) -> MatrixTuple:
    """Pointwise *-algebra operation: add, mul, scale or star."""
    if op == "add":
        return x + other
    if op == "mul":
        return x * other
    if op == "scale":
        return x.scale(other)
    if op == "star":
        return x.star()
    raise ValueError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class StarPolynomial:
    """Polynomial in the 2l noncommuting letters x_1..x_l, x_1*..x_l*.

    A term is a coefficient with a word; letter ``+j`` stands for x_j and
    ``-j`` for its adjoint. The empty word is the identity, so a constant
    term is ``(c, ())``. Coefficients are complex doubles (the enumeration
    draws them Gaussian-rational; that intent is metadata only).
    """

    terms: tuple[tuple[complex, tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        norm = []
        for coeff, word in self.terms:
            word = tuple(int(l) for l in word)
            if any(l == 0 for l in word):
                raise IndexOutOfRange("letters are nonzero signed indices")
            norm.append((complex(coeff), word))
        object.__setattr__(self, "terms", tuple(norm))

    @classmethod
    def variable(cls, j: int) -> "StarPolynomial":
        if j < 1:
            raise IndexOutOfRange(f"variable index must be >= 1, got {j}")
        return cls(((1.0 + 0.0j, (j,)),))

    @classmethod
    def constant(cls, c: complex) -> "StarPolynomial":
        return cls(((complex(c), ()),))

    @classmethod
    def one(cls) -> "StarPolynomial":
        return cls.constant(1.0)

    @classmethod
    def zero(cls) -> "StarPolynomial":
        return cls(())

    @property
    def max_index(self) -> int:
        return max((abs(l) for _, w in self.terms for l in w), default=0)

    @property
    def degree(self) -> int:
        """Longest word length (0 for constants and the zero polynomial)."""
        return max((len(w) for _, w in self.terms), default=0)

    def coefficient_mass(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def adjoint(self) -> "StarPolynomial":
        return StarPolynomial(
            tuple(
                (c.conjugate(), tuple(-l for l in reversed(w))) for c, w in self.terms
            )
        )

    def __add__(self, other: "StarPolynomial") -> "StarPolynomial":
        return StarPolynomial(self.terms + other.terms).collect()

    def __sub__(self, other: "StarPolynomial") -> "StarPolynomial":
        return self + (-1.0) * other

    def __mul__(self, other: "StarPolynomial") -> "StarPolynomial":
        terms = tuple(
            (c1 * c2, w1 + w2)
            for c1, w1 in self.terms
            for c2, w2 in other.terms
        )
        return StarPolynomial(terms).collect()

    def __rmul__(self, alpha: complex) -> "StarPolynomial":
        return StarPolynomial(tuple((complex(alpha) * c, w) for c, w in self.terms))

    def collect(self) -> "StarPolynomial":
        """Merge duplicate words and drop exact-zero coefficients."""
        acc: dict[tuple[int, ...], complex] = {}
        for c, w in self.terms:
            acc[w] = acc.get(w, 0.0 + 0.0j) + c
        terms = tuple((c, w) for w, c in acc.items() if c != 0)
        return StarPolynomial(terms)


def eval_polynomial(p: StarPolynomial, x: MatrixTuple) -> np.ndarray:
    """Evaluate ``p(X_1..X_l, X_1*..X_l*)`` by direct word expansion."""
    if p.max_index > x.length:
        raise IndexOutOfRange(
            f"polynomial references index {p.max_index} but tuple has length {x.length}"
        )
    n = x.degree
    acc = np.zeros((n, n), dtype=np.complex128)
    for coeff, word in p.terms:
        m = np.eye(n, dtype=np.complex128)
        for letter in word:
            factor = x.matrices[letter - 1] if letter > 0 else x.matrices[-letter - 1].conj().T
            m = m @ factor
        acc += coeff * m
    return acc


def _shrink(m: np.ndarray, sign: float, tol: ToleranceConfig) -> np.ndarray:
    """Return ``M (I + sign |M|)^{-1}``.

    ``|M|`` is diagonalized; its eigenvalues are >= 0 so the +1 case is
    unconditionally stable, avoiding a general linear solve. The -1 case is
    guarded by the caller's norm precondition.
    """
    absm = matrix_abs(m, tol)
    w, v = herm_eig(absm, tol)
    w = np.clip(w, 0.0, None)
    inv = (v * (1.0 / (1.0 + sign * w))) @ v.conj().T
    return m @ inv


def b_transform(x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixTuple:
    """Coordinatewise ``X -> X (I + |X|)^{-1}``; strictly norm-contracting.

    Singular values map to s/(1+s), so the result norm is < 1, equivalence
    classes are preserved and the map is injective on tuples.
    """
    return MatrixTuple(tuple(_shrink(m, 1.0, tol) for m in x.matrices))


def inv_b_transform(x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixTuple:
    """Coordinatewise ``X -> X (I - |X|)^{-1}``, inverse of the contraction.

    Requires every coordinate norm strictly below 1.
    """
    for k, m in enumerate(x.matrices):
        nm = operator_norm(m)
        if nm >= 1.0 - 1e-12:
            raise NormTooLarge(
                f"coordinate {k + 1} has norm {nm:.12f}; the inverse transform needs norm < 1"
            )
    return MatrixTuple(tuple(_shrink(m, -1.0, tol) for m in x.matrices))


def tuple_norm_scale(*tuples: MatrixTuple) -> float:
    """Common residual scale ``1 + max ||X||`` over the given tuples."""
    return 1.0 + max(t.norm() for t in tuples)


# ---------------------------------------------------------------------------
# JSON encoding (shared with the CLI): complex numbers as [re, im] pairs,
# matrices row-major.

def matrix_to_json(m: np.ndarray) -> dict:
    a = as_matrix(m)
    return {
        "n": a.shape[0],
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a],
    }


def matrix_from_json(obj) -> np.ndarray:
    _require_keys(obj, {"n", "entries"}, "matrix")
    n = int(obj["n"])
    rows = obj["entries"]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"matrix entries do not form an {n} x {n} array")
    a = np.array(
        [[complex(float(z[0]), float(z[1])) for z in row] for row in rows],
        dtype=np.complex128,
    )
    return as_matrix(a)


def tuple_to_json(x: MatrixTuple) -> dict:
    return {
        "l": x.length,
        "n": x.degree,
        "matrices": [matrix_to_json(m) for m in x.matrices],
    }


def tuple_from_json(obj) -> MatrixTuple:
    _require_keys(obj, {"l", "n", "matrices"}, "tuple")
    mats = [matrix_from_json(m) for m in obj["matrices"]]
    x = MatrixTuple(tuple(mats))
    if x.length != int(obj["l"]) or x.degree != int(obj["n"]):
        raise ValueError("tuple header does not match its matrices")
    return x


def _require_keys(obj, keys: set, what: str) -> None:
    if not isinstance(obj, dict):
        raise ValueError(f"expected a JSON object for {what}")
    extra = set(obj) - keys
    missing = keys - set(obj)
    if extra:
        raise ValueError(f"unknown fields in {what}: {sorted(extra)}")
    if missing:
        raise ValueError(f"missing fields in {what}: {sorted(missing)}")
