import numpy as np
import pytest

from fticalc.calculus import (
    BoundProfile,
    CompatibleFunction,
    algebra,
    apply_scalar_continuous,
    b_transform_function,
    compose,
    diagonal,
    evaluate_at_tuple,
    identity_function,
    inv_b_transform_function,
    make_constant_on_kernel,
    make_indicator,
    make_polynomial,
    make_projection,
    pointwise_inverse,
    unit_function,
    zero_function,
)
from fticalc.canon import PolynomialEnumeration, canonicalize
from fticalc.errors import (
    BoundViolation,
    CentralityViolation,
    DegreeAboveMax,
    IndexOutOfRange,
    NotSelfadjointValue,
    SchemeMismatch,
    ShapeMismatch,
    SingularValue,
)
from fticalc.linalg import haar_unitary, matrix_abs, operator_norm
from fticalc.sampling import random_irreducible_tuple
from fticalc.spectra import ProductElement, degree_in, everything, nothing
from fticalc.structure import block_diag_tuple
from fticalc.tower import MatrixTuple, StarPolynomial, direct_sum, direct_sum_many, unitary_action


def rep_of(rng, enum, ell, n):
    return canonicalize(random_irreducible_tuple(rng, ell, n), enum)


def test_projection_values(rng, enum):
    cf = rep_of(rng, enum, 2, 2)
    np.testing.assert_array_equal(
        make_projection(1, 2, enum).value_at(cf).matrices[0], cf.rep.matrices[0]
    )
    np.testing.assert_array_equal(
        make_projection(2, 2, enum).value_at(cf).matrices[0], cf.rep.matrices[1]
    )
    with pytest.raises(IndexOutOfRange):
        make_projection(3, 2, enum)


def test_projection_evaluates_exactly(rng, enum):
    x = random_irreducible_tuple(rng, 2, 3)
    out = evaluate_at_tuple(make_projection(1, 2, enum), x)
    np.testing.assert_array_equal(out.matrices[0], x.matrices[0])


def test_polynomial_constructor(rng, enum):
    cf = rep_of(rng, enum, 2, 2)
    as_poly = make_polynomial(StarPolynomial.variable(1), 2, enum)
    as_proj = make_projection(1, 2, enum)
    assert as_poly.value_at(cf).distance(as_proj.value_at(cf)) <= 1e-14

    jordan_cf = canonicalize(MatrixTuple.of(np.array([[0.0, 1.0], [0.0, 0.0]])), enum)
    p = StarPolynomial.variable(1) * StarPolynomial.variable(1).adjoint()
    value = make_polynomial(p, 1, enum).value_at(jordan_cf).matrices[0]
    direct = jordan_cf.rep.matrices[0] @ jordan_cf.rep.matrices[0].conj().T
    np.testing.assert_allclose(value, direct, atol=1e-12)

    one = make_polynomial(StarPolynomial.one(), 2, enum)
    assert one.value_at(cf).distance(unit_function(2, enum).value_at(cf)) <= 1e-14
    with pytest.raises(IndexOutOfRange):
        make_polynomial(StarPolynomial.variable(3), 2, enum)


def test_indicator_values(rng, enum):
    cf1 = rep_of(rng, enum, 2, 1)
    cf2 = rep_of(rng, enum, 2, 2)
    everything_fn = make_indicator(everything(enum), 2, enum)
    for cf in (cf1, cf2):
        assert everything_fn.value_at(cf).distance(
            MatrixTuple.identities(1, cf.degree)
        ) == 0.0
    zero_fn = make_indicator(nothing(enum), 2, enum)
    assert zero_fn.value_at(cf2).norm() == 0.0
    deg2 = make_indicator(degree_in({2}, enum), 2, enum)
    assert deg2.value_at(cf1).norm() == 0.0
    np.testing.assert_array_equal(deg2.value_at(cf2).matrices[0], np.eye(2))


def test_indicator_scheme_mismatch(enum):
    other = PolynomialEnumeration(seed=9)
    with pytest.raises(SchemeMismatch):
        make_indicator(everything(other), 2, enum)


def test_constant_on_kernel(rng, enum):
    cf1 = rep_of(rng, enum, 1, 1)
    cf2 = rep_of(rng, enum, 1, 2)
    ident = make_constant_on_kernel(ProductElement.identity(), 1, enum)
    unit = unit_function(1, enum)
    for cf in (cf1, cf2):
        assert ident.value_at(cf).distance(unit.value_at(cf)) == 0.0
    zero = make_constant_on_kernel(ProductElement.zero(), 1, enum)
    assert zero.value_at(cf2).norm() == 0.0
    target = np.array([[0.0, 1.0], [0.0, 0.0]])
    x = make_constant_on_kernel(ProductElement.from_dict({2: target}), 1, enum)
    np.testing.assert_array_equal(x.value_at(cf2).matrices[0], target)
    assert x.value_at(cf1).norm() == 0.0
    small = make_constant_on_kernel(ProductElement.from_dict({1: [[1.0]]}, n_max=1), 1, enum)
    big_rep = rep_of(rng, enum, 1, 2)
    with pytest.raises(DegreeAboveMax):
        small.value_at(big_rep)


def hermitian_pair(rng, n=3, scale=1.0):
    """Irreducible pair of Hermitian matrices (generic pairs are irreducible)."""
    from fticalc.structure import is_irreducible

    while True:
        mats = []
        for _ in range(2):
            a = scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            mats.append(0.5 * (a + a.conj().T))
        x = MatrixTuple(tuple(mats))
        if is_irreducible(x):
            return x


def test_apply_scalar_identity(rng, enum):
    cf = canonicalize(hermitian_pair(rng), enum)
    f = make_projection(1, 2, enum)
    u = apply_scalar_continuous(lambda t: t, f)
    assert u.value_at(cf).distance(f.value_at(cf)) <= 1e-10


def test_apply_scalar_square_matches_polynomial(rng, enum):
    cf = canonicalize(hermitian_pair(rng), enum)
    f = make_projection(1, 2, enum)
    squared = apply_scalar_continuous(lambda t: t**2, f)
    poly = make_polynomial(StarPolynomial.variable(1) * StarPolynomial.variable(1), 2, enum)
    assert squared.value_at(cf).distance(poly.value_at(cf)) <= 1e-10 * (1 + cf.rep.norm()) ** 2


def test_apply_scalar_sqrt_matches_matrix_abs(rng, enum):
    cf = rep_of(rng, enum, 2, 3)
    x1 = StarPolynomial.variable(1)
    gram = make_polynomial(x1.adjoint() * x1, 2, enum)
    root = apply_scalar_continuous(lambda t: np.sqrt(np.clip(t, 0, None)), gram)
    expected = matrix_abs(cf.rep.matrices[0])
    np.testing.assert_allclose(
        root.value_at(cf).matrices[0], expected, atol=1e-9 * (1 + cf.rep.norm()) ** 2
    )


def test_apply_scalar_rejects_non_selfadjoint(rng, enum):
    cf = rep_of(rng, enum, 2, 2)
    f = make_projection(1, 2, enum)
    u = apply_scalar_continuous(lambda t: t, f)
    with pytest.raises(NotSelfadjointValue):
        u.value_at(cf)


def test_algebra_laws_at_reps(rng, enum):
    for _ in range(30):
        cf = rep_of(rng, enum, 2, int(rng.integers(1, 4)))
        from fticalc.sampling import random_polynomial

        f = make_polynomial(random_polynomial(rng, 2), 2, enum)
        g = make_polynomial(random_polynomial(rng, 2), 2, enum)
        cancelled = f + (-1.0) * f
        assert cancelled.value_at(cf).norm() <= 1e-12 * (1 + f.value_at(cf).norm())
        assert (unit_function(2, enum) * f).value_at(cf).distance(f.value_at(cf)) <= 1e-12
        lhs = (f * g).adjoint().value_at(cf)
        rhs = (g.adjoint() * f.adjoint()).value_at(cf)
        assert lhs.distance(rhs) <= 1e-10 * (1 + lhs.norm())


def test_algebra_shape_and_scheme_guards(enum):
    f = make_projection(1, 2, enum)
    g = make_projection(1, 3, enum)
    with pytest.raises(ShapeMismatch):
        algebra("add", f, g)
    other = make_projection(1, 2, PolynomialEnumeration(seed=4))
    with pytest.raises(SchemeMismatch):
        algebra("mul", f, other)


def test_compose_identity_and_projection(rng, enum):
    f = diagonal(
        [
            make_polynomial(StarPolynomial.variable(1) + StarPolynomial.variable(2), 2, enum),
            make_projection(2, 2, enum),
        ]
    )
    ident = identity_function(2, enum)
    x = random_irreducible_tuple(rng, 2, 3)
    lhs = evaluate_at_tuple(compose(ident, f), x)
    rhs = evaluate_at_tuple(f, x)
    assert lhs.distance(rhs) <= 1e-12 * (1 + rhs.norm())

    # selecting the second component of f recovers f_2 (here a projection)
    pj = compose(make_projection(2, 2, enum), f)
    out = evaluate_at_tuple(pj, x).matrices[0]
    np.testing.assert_allclose(out, x.matrices[1], atol=1e-10 * (1 + x.norm()))

    # marker-carrying compositions select coordinates verbatim
    chain = compose(make_projection(2, 2, enum), identity_function(2, enum))
    np.testing.assert_array_equal(
        evaluate_at_tuple(chain, x).matrices[0], x.matrices[1]
    )


def test_compose_b_transform_round_trip(rng, enum):
    x = random_irreducible_tuple(rng, 2, 3)
    b = b_transform_function(2, enum)
    back = inv_b_transform_function(2, enum)
    round_trip = compose(back, b)
    out = evaluate_at_tuple(round_trip, x)
    assert out.distance(x) <= 1e-8 * (1 + x.norm())


def test_pointwise_inverse(rng, enum):
    unit = unit_function(2, enum)
    cf = rep_of(rng, enum, 2, 2)
    assert pointwise_inverse(unit).value_at(cf).distance(unit.value_at(cf)) <= 1e-12
    half = pointwise_inverse(2.0 * unit)
    assert half.value_at(cf).distance(0.5 * unit.value_at(cf)) <= 1e-12

    x1 = StarPolynomial.variable(1)
    f = unit + make_polynomial(x1.adjoint() * x1, 2, enum)
    inv = pointwise_inverse(f)
    for _ in range(20):
        cf = rep_of(rng, enum, 2, int(rng.integers(1, 4)))
        prod = f.value_at(cf).matrices[0] @ inv.value_at(cf).matrices[0]
        assert operator_norm(prod - np.eye(cf.degree)) <= 1e-9

    singular = make_polynomial(StarPolynomial.zero(), 2, enum)
    with pytest.raises(SingularValue):
        pointwise_inverse(singular).value_at(cf)


def test_evaluate_indicator_on_block_sum(rng, enum):
    scalar = MatrixTuple.of([[1.5]], [[0.5]])
    pair = random_irreducible_tuple(rng, 2, 2)
    x = direct_sum(scalar, pair)
    f = make_indicator(degree_in({2}, enum), 2, enum)
    out = evaluate_at_tuple(f, x)
    expected = np.diag([0.0, 1.0, 1.0])
    np.testing.assert_allclose(out.matrices[0], expected, atol=1e-10)


def test_evaluate_equivariance(rng, enum):
    from fticalc.sampling import random_polynomial

    for _ in range(10):
        x = random_irreducible_tuple(rng, 2, 3)
        u = haar_unitary(3, rng)
        f = make_polynomial(random_polynomial(rng, 2), 2, enum)
        lhs = evaluate_at_tuple(f, unitary_action(u, x))
        rhs = unitary_action(u, evaluate_at_tuple(f, x))
        assert lhs.distance(rhs) <= 1e-8 * (1 + lhs.norm())


def test_evaluate_compatibility_with_sums(rng, enum):
    from fticalc.sampling import random_polynomial

    blocks = [
        random_irreducible_tuple(rng, 2, int(rng.integers(1, 3))) for _ in range(4)
    ]
    u = haar_unitary(sum(b.degree for b in blocks), rng)
    x = unitary_action(u, direct_sum_many(blocks))
    f = make_polynomial(random_polynomial(rng, 2), 2, enum)
    lhs = evaluate_at_tuple(f, x)
    rhs = unitary_action(u, block_diag_tuple([evaluate_at_tuple(f, b) for b in blocks]))
    assert lhs.distance(rhs) <= 1e-8 * (1 + lhs.norm())


def test_algebra_laws_at_arbitrary_tuples(rng, enum):
    from fticalc.sampling import random_polynomial

    x = unitary_action(
        haar_unitary(4, rng),
        direct_sum(random_irreducible_tuple(rng, 2, 2), random_irreducible_tuple(rng, 2, 2)),
    )
    f = make_polynomial(random_polynomial(rng, 2), 2, enum)
    g = make_polynomial(random_polynomial(rng, 2), 2, enum)
    scale = 1e-9 * (1 + x.norm()) ** 4
    fx = evaluate_at_tuple(f, x)
    gx = evaluate_at_tuple(g, x)
    assert evaluate_at_tuple(f + g, x).distance(fx + gx) <= scale
    assert evaluate_at_tuple(f * g, x).distance(fx * gx) <= scale
    assert evaluate_at_tuple(f.adjoint(), x).distance(fx.star()) <= scale


def test_central_values_commute(rng, enum):
    from fticalc.sampling import random_polynomial

    x = unitary_action(
        haar_unitary(3, rng),
        direct_sum(MatrixTuple.of([[1.0]], [[2.0]]), random_irreducible_tuple(rng, 2, 2)),
    )
    central = make_indicator(degree_in({2}, enum), 2, enum)
    g = make_polynomial(random_polynomial(rng, 2), 2, enum)
    a = evaluate_at_tuple(central, x).matrices[0]
    b = evaluate_at_tuple(g, x).matrices[0]
    assert operator_norm(a @ b - b @ a) <= 1e-9 * (1 + operator_norm(b))


def test_sequential_closedness_on_constructed_sequence(rng, enum):
    from fticalc.sampling import random_polynomial

    x = random_irreducible_tuple(rng, 2, 3)
    f = make_polynomial(random_polynomial(rng, 2), 2, enum)
    g = make_polynomial(random_polynomial(rng, 2), 2, enum)
    base = evaluate_at_tuple(f, x)
    gnorm = evaluate_at_tuple(g, x).norm()
    for n in (1, 2, 4, 8, 16):
        fn = f + (1.0 / n) * g
        gap = evaluate_at_tuple(fn, x).distance(base)
        assert abs(gap - gnorm / n) <= 1e-9 * (1 + gnorm)


def test_bound_violation_warns(rng, enum):
    cf = rep_of(rng, enum, 1, 2)
    lying = CompatibleFunction(
        ell=1,
        ell_out=1,
        enumeration=enum,
        kernel_map=lambda c: MatrixTuple((10.0 * np.eye(c.degree),)),
        bound_profile=BoundProfile.bounded(0.1),
        name="liar",
    )
    with pytest.warns(BoundViolation):
        lying.value_at(cf)


def test_centrality_violation_warns(rng, enum):
    cf = rep_of(rng, enum, 1, 2)
    fake_central = CompatibleFunction(
        ell=1,
        ell_out=1,
        enumeration=enum,
        kernel_map=lambda c: MatrixTuple((np.diag(np.arange(1.0, c.degree + 1)),)),
        central=True,
        name="fake",
    )
    with pytest.warns(CentralityViolation):
        fake_central.value_at(cf)


def test_degree_preservation_enforced(rng, enum):
    cf = rep_of(rng, enum, 1, 2)
    broken = CompatibleFunction(
        ell=1,
        ell_out=1,
        enumeration=enum,
        kernel_map=lambda c: MatrixTuple((np.eye(c.degree + 1),)),
        name="broken",
    )
    from fticalc.errors import DegreeMismatch

    with pytest.raises(DegreeMismatch):
        broken.value_at(cf)


def test_zero_function(rng, enum):
    x = random_irreducible_tuple(rng, 2, 2)
    assert evaluate_at_tuple(zero_function(2, enum), x).norm() == 0.0
