"""Canonical representatives of irreducible tuples under unitary conjugation.

The selector works through a fixed enumeration p_1, p_2, ... of
*-polynomials: given an irreducible tuple X, find the first index m whose
value Y = p_m(X, X*) can be normalized into the target form

  - Y + Y* diagonal with strictly increasing diagonal (gaps above a
    tolerance-scaled threshold), and
  - the first row of Y real positive off the diagonal,

and conjugate X by the unitary that achieves the normalization. The target
form pins that unitary up to a global phase, so the representative is a
well-defined function of the unitary orbit; the phase itself is fixed by a
first-column convention purely for reproducibility of the witness.

Canonical forms are relative to the enumeration scheme; every
:class:`CanonicalForm` records the scheme label and cross-scheme data only
ever meet through the transport machinery in :mod:`fticalc.spectra`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CanonicalizationExhausted, LengthMismatch, NotIrreducible
from .linalg import DEFAULT_TOL, ToleranceConfig, herm_eig, operator_norm
from .structure import decompose, is_irreducible
from .tower import MatrixTuple, StarPolynomial, eval_polynomial, unitary_action

_WORD_SALT = 0xC0FFEE
_UINT64 = (1 << 64) - 1

MAX_ENUMERATION_INDEX = 10000


@dataclass(frozen=True)
class PolynomialEnumeration:
    """Deterministic enumeration of *-polynomials in 2l letters.

    The first l entries are the coordinate projections x_1..x_l. Entry m > l
    is a pseudorandom linear combination of words of length at most
    1 + ceil(m / l): the generator is seeded from (salt, seed, m, l), term
    count and word lengths are drawn from it, and coefficients are
    Gaussian-rational (a + b i)/q with a, b in -3..3 and q in 1..4.
    Identical (scheme_id, seed) always reproduce identical polynomials.
    """

    seed: int = 0
    scheme_id: str = "words-v1"

    @property
    def label(self) -> str:
        return f"{self.scheme_id}#{self.seed}"

    @classmethod
    def from_label(cls, label: str) -> "PolynomialEnumeration":
        scheme_id, sep, seed = label.rpartition("#")
        if not sep or not scheme_id:
            raise ValueError(f"malformed scheme label {label!r}; expected 'scheme_id#seed'")
        return cls(seed=int(seed), scheme_id=scheme_id)

    def polynomial(self, m: int, ell: int) -> StarPolynomial:
        if m < 1:
            raise ValueError(f"enumeration index must be >= 1, got {m}")
        if ell < 1:
            raise ValueError(f"tuple length must be >= 1, got {ell}")
        if m <= ell:
            return StarPolynomial.variable(m)
        rng = np.random.default_rng([_WORD_SALT, self.seed & _UINT64, m, ell])
        max_len = 1 + math.ceil(m / ell)
        nterms = int(rng.integers(2, 5))
        terms = []
        for _ in range(nterms):
            length = int(rng.integers(1, max_len + 1))
            raw = rng.integers(0, 2 * ell, size=length)
            word = tuple(
                int(r) + 1 if r < ell else -(int(r) - ell + 1) for r in raw
            )
            while True:
                a, b = (int(v) for v in rng.integers(-3, 4, size=2))
                if a or b:
                    break
            q = int(rng.integers(1, 5))
            terms.append((complex(a, b) / q, word))
        return StarPolynomial(tuple(terms))


DEFAULT_ENUMERATION = PolynomialEnumeration(seed=0)


@dataclass(frozen=True)
class CanonicalForm:
    """Canonical representative of an irreducible tuple.

    ``rep = witness . source`` and ``index`` is the first enumeration index
    whose polynomial certified the normalization under scheme ``scheme``.
    """

    rep: MatrixTuple
    witness: np.ndarray
    index: int
    scheme: str

    @property
    def degree(self) -> int:
        return self.rep.degree

    @property
    def length(self) -> int:
        return self.rep.length


def canonicalize(
    x: MatrixTuple,
    enumeration: PolynomialEnumeration = DEFAULT_ENUMERATION,
    tol: ToleranceConfig = DEFAULT_TOL,
    max_index: int = MAX_ENUMERATION_INDEX,
    check: bool = True,
) -> CanonicalForm:
    """Deterministic canonical form of an irreducible tuple.

    Degree 1 accepts at index 1 with witness [1]: the normalization
    conditions are vacuous in one dimension and conjugation is trivial.
    Raises :class:`NotIrreducible` when ``check`` finds a nontrivial
    commutant and :class:`CanonicalizationExhausted` when no enumeration
    index up to ``max_index`` certifies the input.
    """
    if check and not is_irreducible(x, tol):
        raise NotIrreducible(
            f"tuple of degree {x.degree} has a nontrivial commutant; canonical forms "
            "exist only for irreducible tuples"
        )
    n = x.degree
    if n == 1:
        return CanonicalForm(
            rep=x,
            witness=np.eye(1, dtype=np.complex128),
            index=1,
            scheme=enumeration.label,
        )

    for m in range(1, max_index + 1):
        p = enumeration.polynomial(m, x.length)
        y = eval_polynomial(p, x)
        h = y + y.conj().T
        w, v = herm_eig(h, tol)
        h_gap = tol.gap_tol * (1.0 + float(np.max(np.abs(w))))
        if np.min(np.diff(w)) <= h_gap:
            continue
        y_tilde = v.conj().T @ y @ v
        first_row = y_tilde[0, 1:]
        y_gap = tol.gap_tol * (1.0 + operator_norm(y))
        if np.min(np.abs(first_row)) <= y_gap:
            continue
        phases = first_row / np.abs(first_row)
        d = np.concatenate(([1.0 + 0.0j], phases))
        witness = d[:, None] * v.conj().T
        witness = _fix_global_phase(witness)
        rep = unitary_action(witness, x, tol)
        return CanonicalForm(rep=rep, witness=witness, index=m, scheme=enumeration.label)

    raise CanonicalizationExhausted(
        f"no enumeration polynomial up to index {max_index} certified the "
        f"degree-{n} tuple; input is numerically borderline"
    )


def _fix_global_phase(witness: np.ndarray) -> np.ndarray:
    """Make the (1,1) entry of the witness real positive.

    Falls back to the largest-magnitude entry of the first column when the
    (1,1) entry is negligible; conjugation is phase-invariant so the
    representative does not depend on the choice.
    """
    col = witness[:, 0]
    anchor = col[0]
    if abs(anchor) <= 1e-3:
        anchor = col[int(np.argmax(np.abs(col)))]
    return witness * (anchor.conjugate() / abs(anchor))


def are_equivalent(
    x: MatrixTuple,
    y: MatrixTuple,
    enumeration: PolynomialEnumeration = DEFAULT_ENUMERATION,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> bool:
    """Unitary equivalence test via canonical forms of irreducible blocks.

    Both tuples are decomposed; the block canonical forms must match as
    multisets within ``match_tol * (1 + ||X|| + ||Y||)``. Matching is greedy
    nearest-neighbor over blocks sharing degree and enumeration index, with
    at-threshold ties treated as failures (pessimistic).
    """
    if x.length != y.length:
        raise LengthMismatch(f"tuple lengths differ: {x.length} vs {y.length}")
    if x.degree != y.degree:
        return False
    dx = decompose(x, tol, enumeration)
    dy = decompose(y, tol, enumeration)
    if sorted(b.degree for b in dx.blocks) != sorted(b.degree for b in dy.blocks):
        return False
    cx = [canonicalize(b, enumeration, tol, check=False) for b in dx.blocks]
    cy = [canonicalize(b, enumeration, tol, check=False) for b in dy.blocks]
    scale = tol.match_tol * (1.0 + x.norm() + y.norm())
    unmatched = list(range(len(cy)))
    for cf in cx:
        best_j = -1
        best_dist = np.inf
        for j in unmatched:
            other = cy[j]
            if other.degree != cf.degree or other.index != cf.index:
                continue
            dist = cf.rep.distance(other.rep)
            if dist < best_dist:
                best_dist = dist
                best_j = j
        if best_j < 0 or best_dist > scale:
            return False
        unmatched.remove(best_j)
    return True


def canonical_distance(a: CanonicalForm, b: CanonicalForm) -> float:
    """Distance between representatives; inf when degrees or indices differ."""
    if a.degree != b.degree or a.index != b.index:
        return float("inf")
    return a.rep.distance(b.rep)


def trace_fingerprint(
    x: MatrixTuple, max_word_length: int, max_words: int = 8_000_000
) -> np.ndarray:
    """Traces of all words in X_k, X_k* up to a length, in a fixed order.

    Word order: by length, then left-to-right lexicographic with letters
    ordered x_1 < ... < x_l < x_1* < ... < x_l*. The empty word (trace n)
    comes first. Traces of words are conjugation invariants, so equal
    fingerprints are a necessary condition for unitary equivalence; at
    length 2 n^2 the condition is also sufficient. Word counts grow as
    (2l)^length, so this is a test oracle, not a production path.
    """
    if max_word_length < 0:
        raise ValueError("max_word_length must be >= 0")
    n = x.degree
    n_letters = 2 * x.length
    total = sum(n_letters**k for k in range(1, max_word_length + 1))
    if total > max_words:
        raise ValueError(
            f"{total} words exceed the safety cap {max_words}; reduce the length"
        )
    letters = np.array(
        [m for m in x.matrices] + [m.conj().T for m in x.matrices]
    )
    # tr(F L) without forming the product: contract F against L transposed
    letters_t = np.ascontiguousarray(letters.transpose(0, 2, 1)).reshape(
        len(letters), n * n
    )
    out = [np.array([complex(n)])]
    frontier = np.eye(n, dtype=np.complex128)[None]
    chunk = 200_000
    for level in range(1, max_word_length + 1):
        keep_values = level < max_word_length
        traces_parts = []
        value_parts = []
        nslabs = max(1, -(-frontier.shape[0] // chunk))
        for slab in np.array_split(frontier, nslabs):
            traces_parts.append(
                (slab.reshape(-1, n * n) @ letters_t.T).reshape(-1)
            )
            if keep_values:
                prod = np.matmul(slab[:, None], letters[None, :]).reshape(-1, n, n)
                value_parts.append(prod)
        out.append(np.concatenate(traces_parts))
        if keep_values:
            frontier = np.concatenate(value_parts)
    return np.concatenate(out)


def fingerprints_match(fa: np.ndarray, fb: np.ndarray, threshold: float = 1e-6) -> bool:
    """Entrywise comparison of two fingerprints at a relative threshold.

    Traces of long words grow like ||X||^length, so each entry is compared
    against ``threshold * (1 + |a| + |b|)``; plain float noise stays many
    orders below that at any scale.
    """
    if fa.shape != fb.shape:
        return False
    gap = np.abs(fa - fb)
    scale = 1.0 + np.abs(fa) + np.abs(fb)
    return bool(np.max(gap / scale) <= threshold)
