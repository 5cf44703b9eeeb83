import numpy as np
import pytest

from fticalc.canon import (
    CanonicalForm,
    PolynomialEnumeration,
    are_equivalent,
    canonicalize,
    fingerprints_match,
    trace_fingerprint,
)
from fticalc.errors import LengthMismatch, NotIrreducible
from fticalc.linalg import DEFAULT_TOL, haar_unitary, operator_norm
from fticalc.sampling import random_irreducible_tuple
from fticalc.tower import MatrixTuple, direct_sum, eval_polynomial, unitary_action

JORDAN = MatrixTuple.of(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_enumeration_starts_with_coordinates(enum):
    for ell in (1, 2, 3):
        for m in range(1, ell + 1):
            p = enum.polynomial(m, ell)
            assert p.terms == ((1.0 + 0.0j, (m,)),)


def test_enumeration_word_lengths(enum):
    for ell in (1, 2):
        for m in range(ell + 1, 20):
            p = enum.polynomial(m, ell)
            bound = 1 + -(-m // ell)
            assert p.degree <= bound
            assert p.max_index <= ell


def test_enumeration_deterministic():
    a = PolynomialEnumeration(seed=11)
    b = PolynomialEnumeration(seed=11)
    for m in (1, 2, 5, 17):
        assert a.polynomial(m, 2).terms == b.polynomial(m, 2).terms
    c = PolynomialEnumeration(seed=12)
    assert any(
        a.polynomial(m, 2).terms != c.polynomial(m, 2).terms for m in range(3, 10)
    )


def test_enumeration_label_round_trip():
    e = PolynomialEnumeration(seed=42, scheme_id="words-v1")
    back = PolynomialEnumeration.from_label(e.label)
    assert back == e
    with pytest.raises(ValueError):
        PolynomialEnumeration.from_label("no-separator")


def test_canonicalize_degree_one(enum):
    x = MatrixTuple.of([[2.0 - 1.0j]])
    cf = canonicalize(x, enum)
    assert cf.index == 1
    np.testing.assert_array_equal(cf.witness, np.eye(1))
    assert cf.rep.distance(x) == 0.0


def test_canonicalize_jordan_golden(enum):
    """Frozen output of the fixed deterministic procedure on one input."""
    cf = canonicalize(JORDAN, enum)
    assert cf.index == 1
    golden = np.array([[-0.5, 0.5], [-0.5, 0.5]])
    np.testing.assert_allclose(cf.rep.matrices[0], golden, atol=1e-12)


def test_canonicalize_normal_form_conditions(rng, enum):
    for _ in range(20):
        x = random_irreducible_tuple(rng, 2, 3)
        cf = canonicalize(x, enum)
        p = enum.polynomial(cf.index, x.length)
        y = eval_polynomial(p, cf.rep)
        h = y + y.conj().T
        off = h - np.diag(np.diagonal(h))
        scale = DEFAULT_TOL.gap_tol * (1 + operator_norm(y))
        assert operator_norm(off) <= scale
        d = np.diagonal(h).real
        assert np.all(np.diff(d) > 0)
        first = y[0, 1:]
        assert np.all(first.real > 0)
        assert np.max(np.abs(first.imag)) <= DEFAULT_TOL.match_tol * (1 + operator_norm(y))


def test_canonicalize_witness_reassembly(rng, enum):
    x = random_irreducible_tuple(rng, 2, 3)
    cf = canonicalize(x, enum)
    rebuilt = unitary_action(cf.witness, x)
    assert rebuilt.distance(cf.rep) <= DEFAULT_TOL.match_tol * (1 + x.norm())


def test_canonicalize_orbit_invariance(rng, enum):
    for _ in range(40):
        ell = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        x = random_irreducible_tuple(rng, ell, n)
        u = haar_unitary(n, rng)
        cx = canonicalize(x, enum)
        cy = canonicalize(unitary_action(u, x), enum)
        assert cx.index == cy.index
        assert cx.rep.distance(cy.rep) <= 1e-7 * (1 + x.norm())


def test_canonicalize_rejects_reducible(rng, enum):
    x = random_irreducible_tuple(rng, 2, 2)
    with pytest.raises(NotIrreducible):
        canonicalize(direct_sum(x, x), enum)


def test_canonicalize_two_run_determinism(rng):
    x = random_irreducible_tuple(rng, 2, 3)
    a = canonicalize(x, PolynomialEnumeration(seed=5))
    b = canonicalize(x, PolynomialEnumeration(seed=5))
    assert a.index == b.index
    assert a.rep.distance(b.rep) <= 1e-12


def test_are_equivalent_basic(rng, enum):
    x = random_irreducible_tuple(rng, 2, 3)
    u = haar_unitary(3, rng)
    assert are_equivalent(x, unitary_action(u, x), enum)

    y = random_irreducible_tuple(rng, 2, 2)
    assert are_equivalent(direct_sum(x, y), direct_sum(y, x), enum)

    with pytest.raises(LengthMismatch):
        are_equivalent(x, random_irreducible_tuple(rng, 3, 3), enum)


def test_are_equivalent_separates_spectra(enum):
    a = MatrixTuple.of(np.diag([1.0, 2.0]))
    b = MatrixTuple.of(np.diag([1.0, 3.0]))
    c = MatrixTuple.of(np.diag([2.0, 1.0]))
    assert not are_equivalent(a, b, enum)
    assert are_equivalent(a, c, enum)


def test_trace_fingerprint_zero_tuple():
    fp = trace_fingerprint(MatrixTuple.zeros(2, 3), 3)
    assert fp[0] == 3.0
    assert np.max(np.abs(fp[1:])) == 0.0


def test_trace_fingerprint_conjugation_invariant(rng):
    x = random_irreducible_tuple(rng, 2, 2)
    u = haar_unitary(2, rng)
    fx = trace_fingerprint(x, 4)
    fy = trace_fingerprint(unitary_action(u, x), 4)
    assert np.max(np.abs(fx - fy)) <= 1e-10 * (1 + np.max(np.abs(fx)))


def test_trace_fingerprint_permutation(enum):
    fa = trace_fingerprint(MatrixTuple.of(np.diag([1.0, 2.0])), 4)
    fb = trace_fingerprint(MatrixTuple.of(np.diag([2.0, 1.0])), 4)
    np.testing.assert_allclose(fa, fb, atol=1e-12)


def test_fingerprint_separation_implies_inequivalence(rng, enum):
    # engineered inequivalent pairs are separated by both routes
    for _ in range(10):
        x = random_irreducible_tuple(rng, 1, 2, scale=0.8)
        mats = (x.matrices[0] + 0.5 * np.eye(2),)
        y = unitary_action(haar_unitary(2, rng), MatrixTuple(mats))
        fx, fy = trace_fingerprint(x, 4), trace_fingerprint(y, 4)
        assert not fingerprints_match(fx, fy, 1e-6)
        assert not are_equivalent(x, y, enum)


def test_consistency_with_oracle(rng, enum):
    for case in range(40):
        x = random_irreducible_tuple(rng, 1, 2, scale=0.8)
        if case % 2 == 0:
            y = unitary_action(haar_unitary(2, rng), x)
        else:
            y = random_irreducible_tuple(rng, 1, 2, scale=0.8)
        n = 2
        fx = trace_fingerprint(x, 2 * n * n)
        fy = trace_fingerprint(y, 2 * n * n)
        assert are_equivalent(x, y, enum) == fingerprints_match(fx, fy, 1e-6)


def test_canonical_form_carries_scheme(rng):
    e = PolynomialEnumeration(seed=3, scheme_id="words-v1")
    cf = canonicalize(random_irreducible_tuple(rng, 1, 2), e)
    assert isinstance(cf, CanonicalForm)
    assert cf.scheme == "words-v1#3"


def test_canonicalize_exhaustion_is_reported(rng, enum):
    from fticalc.errors import CanonicalizationExhausted

    x = random_irreducible_tuple(rng, 2, 2)
    with pytest.raises(CanonicalizationExhausted):
        canonicalize(x, enum, max_index=0)
