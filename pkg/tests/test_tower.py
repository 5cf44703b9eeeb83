import json

import numpy as np
import pytest

from fticalc.errors import (
    DegreeMismatch,
    IndexOutOfRange,
    LengthMismatch,
    NormTooLarge,
    ShapeMismatch,
)
from fticalc.linalg import haar_unitary, operator_norm
from fticalc.tower import (
    MatrixTuple,
    StarPolynomial,
    b_transform,
    direct_sum,
    direct_sum_many,
    eval_polynomial,
    inv_b_transform,
    tuple_algebra,
    tuple_from_json,
    tuple_to_json,
    unitary_action,
)

JORDAN = MatrixTuple.of(np.array([[0.0, 1.0], [0.0, 0.0]]))


def random_tuple(rng, ell, n, scale=1.0):
    return MatrixTuple(
        tuple(scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) for _ in range(ell))
    )


def test_direct_sum_examples():
    out = direct_sum(MatrixTuple.of([[1.0]]), MatrixTuple.of([[2.0]]))
    np.testing.assert_allclose(out.matrices[0], np.diag([1.0, 2.0]))

    x = MatrixTuple.of([[3.0]])
    padded = direct_sum(x, MatrixTuple.zeros(1, 1))
    assert padded.degree == x.degree + 1
    np.testing.assert_allclose(padded.matrices[0], np.diag([3.0, 0.0]))


def test_direct_sum_degree_additivity(rng):
    x = random_tuple(rng, 2, 2)
    y = random_tuple(rng, 2, 3)
    s = direct_sum(x, y)
    assert s.degree == 5
    assert abs(s.norm() - max(x.norm(), y.norm())) <= 1e-12
    with pytest.raises(LengthMismatch):
        direct_sum(x, random_tuple(rng, 3, 2))


def test_unitary_action_identity_exact(rng):
    x = random_tuple(rng, 2, 3)
    same = unitary_action(np.eye(3), x)
    for a, b in zip(same.matrices, x.matrices):
        np.testing.assert_array_equal(a, b)


def test_unitary_action_scalars_trivial():
    x = MatrixTuple.of([[2.0 + 1.0j]])
    u = np.array([[np.exp(1j * 0.7)]])
    np.testing.assert_allclose(unitary_action(u, x).matrices[0], x.matrices[0], atol=1e-15)


def test_unitary_action_compose(rng):
    x = random_tuple(rng, 2, 4)
    u = haar_unitary(4, rng)
    v = haar_unitary(4, rng)
    lhs = unitary_action(v @ u, x)
    rhs = unitary_action(v, unitary_action(u, x))
    assert lhs.distance(rhs) <= 1e-12 * (1 + x.norm())


def test_unitary_action_errors(rng):
    x = random_tuple(rng, 1, 3)
    with pytest.raises(DegreeMismatch):
        unitary_action(np.eye(2), x)


def test_tuple_algebra(rng):
    x = random_tuple(rng, 2, 3)
    again = tuple_algebra("star", tuple_algebra("star", x))
    for a, b in zip(again.matrices, x.matrices):
        np.testing.assert_array_equal(a, b)

    zero = tuple_algebra("add", x, tuple_algebra("scale", x, -1.0))
    assert zero.norm() == 0.0

    d1 = MatrixTuple.of(np.diag([1.0, 2.0]))
    d2 = MatrixTuple.of(np.diag([3.0, 5.0]))
    np.testing.assert_allclose(
        tuple_algebra("mul", d1, d2).matrices[0], np.diag([3.0, 10.0])
    )
    with pytest.raises(ShapeMismatch):
        tuple_algebra("add", x, random_tuple(rng, 2, 2))


def test_b_transform_scalar_and_zero():
    np.testing.assert_allclose(
        b_transform(MatrixTuple.of([[2.0]])).matrices[0], [[2.0 / 3.0]], atol=1e-12
    )
    assert b_transform(MatrixTuple.zeros(2, 3)).norm() == 0.0


def test_b_transform_contracts_and_matches_eigenvalue_map(rng):
    for _ in range(20):
        x = random_tuple(rng, 2, 3, scale=float(rng.uniform(0.2, 3)))
        bx = b_transform(x)
        assert bx.norm() < 1.0
    # normal coordinate: the norm maps to s/(1+s)
    h = rng.standard_normal((4, 4))
    h = MatrixTuple.of((h + h.T) / 2)
    s = h.norm()
    assert abs(b_transform(h).norm() - s / (1 + s)) <= 1e-10


def test_b_transform_monotone_along_rays(rng):
    h = rng.standard_normal((3, 3))
    x = MatrixTuple.of((h + h.T) / 2)
    norms = [b_transform(x.scale(t)).norm() for t in (0.5, 1.0, 2.0, 8.0, 64.0)]
    assert all(b > a for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1.0


def test_b_transform_equivariance(rng):
    x = random_tuple(rng, 2, 2)
    y = random_tuple(rng, 2, 3)
    u = haar_unitary(5, rng)
    lhs = b_transform(unitary_action(u, direct_sum(x, y)))
    rhs = unitary_action(u, direct_sum(b_transform(x), b_transform(y)))
    assert lhs.distance(rhs) <= 1e-9 * (1 + x.norm() + y.norm())


def test_inv_b_transform_examples():
    np.testing.assert_allclose(
        inv_b_transform(MatrixTuple.of([[0.5]])).matrices[0], [[1.0]], atol=1e-12
    )
    assert inv_b_transform(MatrixTuple.zeros(1, 2)).norm() == 0.0
    with pytest.raises(NormTooLarge):
        inv_b_transform(MatrixTuple.of(np.eye(2)))


def test_b_transform_round_trip(rng):
    worst = 0.0
    for _ in range(500):
        ell = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        x = random_tuple(rng, ell, n, scale=float(rng.uniform(0.1, 3.3)))
        err = x.distance(inv_b_transform(b_transform(x)))
        assert err <= 1e-8 * (1 + x.norm())
        worst = max(worst, err)
    assert worst < 1e-8 * 11  # norms stay below 10


def test_eval_polynomial_examples():
    np.testing.assert_array_equal(
        eval_polynomial(StarPolynomial.variable(1), JORDAN).round(12),
        JORDAN.matrices[0],
    )
    p = StarPolynomial.variable(1) * StarPolynomial.variable(1).adjoint()
    np.testing.assert_allclose(eval_polynomial(p, JORDAN), np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(
        eval_polynomial(StarPolynomial.zero(), JORDAN), np.zeros((2, 2))
    )


def test_eval_polynomial_equivariance(rng):
    x = random_tuple(rng, 2, 3)
    u = haar_unitary(3, rng)
    p = (
        StarPolynomial.variable(1) * StarPolynomial.variable(2).adjoint()
        + 2.0 * StarPolynomial.variable(2)
    )
    lhs = eval_polynomial(p, unitary_action(u, x))
    rhs = u @ eval_polynomial(p, x) @ u.conj().T
    assert operator_norm(lhs - rhs) <= 1e-9 * (1 + x.norm()) ** 2


def test_eval_polynomial_index_guard(rng):
    with pytest.raises(IndexOutOfRange):
        eval_polynomial(StarPolynomial.variable(3), random_tuple(rng, 2, 2))


def test_star_polynomial_adjoint_involution():
    p = StarPolynomial(((1 + 2j, (1, -2, 1)), (0.5j, ())))
    again = p.adjoint().adjoint().collect()
    assert set(again.terms) == set(p.collect().terms)


def test_json_round_trip(rng):
    x = random_tuple(rng, 2, 3)
    text = json.dumps(tuple_to_json(x))
    back = tuple_from_json(json.loads(text))
    assert back.distance(x) == 0.0


def test_json_rejects_unknown_fields():
    bad = {"l": 1, "n": 1, "matrices": [{"n": 1, "entries": [[[0.0, 0.0]]]}], "x": 1}
    with pytest.raises(ValueError, match="unknown fields"):
        tuple_from_json(bad)


def test_json_header_mismatch():
    obj = tuple_to_json(MatrixTuple.of([[1.0]]))
    obj["n"] = 2
    with pytest.raises(ValueError, match="header"):
        tuple_from_json(obj)


def test_matrix_tuple_rejects_bad_entries():
    with pytest.raises(ValueError):
        MatrixTuple.of([[np.nan]])
    with pytest.raises(DegreeMismatch):
        MatrixTuple.of(np.eye(2), np.eye(3))
    with pytest.raises(LengthMismatch):
        MatrixTuple(())


def test_direct_sum_many_associativity(rng):
    parts = [random_tuple(rng, 2, int(rng.integers(1, 3))) for _ in range(3)]
    left = direct_sum(direct_sum(parts[0], parts[1]), parts[2])
    flat = direct_sum_many(parts)
    assert left.distance(flat) == 0.0
