import json
import math

import numpy as np
import pytest

from fticalc.calculus import (
    apply_scalar_continuous,
    diagonal,
    make_indicator,
    make_polynomial,
    make_projection,
    unit_function,
)
from fticalc.canon import PolynomialEnumeration, are_equivalent
from fticalc.errors import (
    DimensionCap,
    NotAPartition,
    NotCommuting,
    NotNormal,
    SchemeMismatch,
)
from fticalc.linalg import haar_unitary, operator_norm
from fticalc.operators import (
    apply,
    assemble_block_tuple,
    compose_check,
    conjugate,
    convergence_check,
    direct_sum_ops,
    double_commutant_check,
    from_block_commuting,
    from_tuple,
    materialize,
    operator_from_json,
    operator_to_json,
    piecewise_sum,
    sector_deviation,
)
from fticalc.sampling import (
    commuting_normal_blocks,
    random_irreducible_tuple,
    random_model,
    random_polynomial,
)
from fticalc.spectra import degree_in, everything
from fticalc.structure import decompose
from fticalc.tower import MatrixTuple, StarPolynomial, direct_sum, unitary_action


def test_from_tuple_irreducible(rng, enum):
    x = random_irreducible_tuple(rng, 2, 3)
    t = from_tuple(x, enum)
    assert len(t.sectors) == 1
    assert t.sectors[0].weight == 1.0
    assert materialize(t).distance(x) <= 1e-8 * (1 + x.norm())


def test_from_tuple_default_weights(rng, enum):
    x = direct_sum(
        random_irreducible_tuple(rng, 2, 2), random_irreducible_tuple(rng, 2, 3)
    )
    t = from_tuple(x, enum)
    weights = sorted(s.weight for s in t.sectors)
    np.testing.assert_allclose(weights, [0.4, 0.6])


def test_from_tuple_custom_weights(rng, enum):
    x = direct_sum(
        random_irreducible_tuple(rng, 1, 2), random_irreducible_tuple(rng, 1, 2)
    )
    t = from_tuple(x, enum, weights=[3.0, 1.0])
    np.testing.assert_allclose(sorted(s.weight for s in t.sectors), [0.25, 0.75])


def test_block_commuting_classical_joint_spectrum(rng, enum):
    # N = 1: one commuting normal family, sectors are joint eigenvalues
    blocks = commuting_normal_blocks(rng, ell=2, big_n=1, d=3)
    t = from_block_commuting(blocks, enum)
    assert sorted(s.degree for s in t.sectors) == [1, 1, 1]
    raw = assemble_block_tuple(blocks)
    assert are_equivalent(materialize(t), raw, enum)


def test_block_commuting_scalar_entries(rng, enum):
    # entries are scalar multiples of the identity: every joint eigenindex
    # collapses to the same 2 x 2 matrix
    d, big_n = 3, 2
    scalars = rng.standard_normal((big_n, big_n)) + 1j * rng.standard_normal((big_n, big_n))
    block = np.zeros((big_n, big_n, d, d), dtype=complex)
    for j in range(big_n):
        for k in range(big_n):
            block[j, k] = scalars[j, k] * np.eye(d)
    t = from_block_commuting([block], enum)
    collapsed = MatrixTuple.of(scalars)
    for s in t.sectors:
        assert are_equivalent(s.block, collapsed, enum)
    assert are_equivalent(materialize(t), assemble_block_tuple([block]), enum)


def test_block_commuting_rejects_bad_input(rng, enum):
    d = 2
    non_normal = np.zeros((1, 1, d, d), dtype=complex)
    non_normal[0, 0] = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NotNormal):
        from_block_commuting([non_normal], enum)

    a = np.zeros((1, 1, d, d), dtype=complex)
    b = np.zeros((1, 1, d, d), dtype=complex)
    a[0, 0] = np.diag([1.0, -1.0])
    b[0, 0] = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(NotCommuting):
        from_block_commuting([a, b], enum)


def test_direct_sum_ops(rng, enum):
    t = random_model(rng, enum, 2, [1, 2])
    same = direct_sum_ops([t], [1.0])
    assert len(same.sectors) == len(t.sectors)

    doubled = direct_sum_ops([t, t], [0.5, 0.5])
    assert len(doubled.sectors) == 2 * len(t.sectors)
    np.testing.assert_allclose(sum(s.weight for s in doubled.sectors), 1.0)

    f = make_polynomial(random_polynomial(rng, 2), 2, enum)
    lhs = materialize(apply(f, doubled)).matrices[0]
    one = materialize(apply(f, t)).matrices[0]
    from fticalc.linalg import block_diag

    rhs = block_diag([one, one])
    assert operator_norm(lhs - rhs) <= 1e-9 * (1 + operator_norm(one))

    other = random_model(rng, PolynomialEnumeration(seed=8), 2, [1])
    with pytest.raises(SchemeMismatch):
        direct_sum_ops([t, other], [0.5, 0.5])


def test_conjugate(rng, enum):
    t = random_model(rng, enum, 2, [1, 2])
    n = t.total_dimension
    same = conjugate(np.eye(n), t)
    assert materialize(same).distance(materialize(t)) <= 1e-12

    u = haar_unitary(n, rng)
    moved = conjugate(u, t)
    assert materialize(moved).distance(unitary_action(u, materialize(t))) <= 1e-10

    f = make_polynomial(random_polynomial(rng, 2), 2, enum)
    lhs = materialize(apply(f, moved)).matrices[0]
    rhs = (u @ materialize(apply(f, t)).matrices[0] @ u.conj().T)
    assert operator_norm(lhs - rhs) <= 1e-9 * (1 + operator_norm(rhs))


def test_materialize_examples(rng, enum):
    t = from_tuple(MatrixTuple.of([[2.0 + 1.0j]]), enum)
    np.testing.assert_allclose(materialize(t).matrices[0], [[2.0 + 1.0j]])

    x = direct_sum(random_irreducible_tuple(rng, 1, 2), random_irreducible_tuple(rng, 1, 2))
    t2 = from_tuple(x, enum)
    rec = decompose(materialize(t2))
    assert sorted(b.degree for b in rec.blocks) == [2, 2]
    with pytest.raises(DimensionCap):
        materialize(t2, cap=3)


def test_apply_projection_exact(rng, enum):
    t = random_model(rng, enum, 3, [1, 2, 2])
    for j in (1, 2, 3):
        out = apply(make_projection(j, 3, enum), t)
        for po, pt in zip(out.sectors, t.sectors):
            np.testing.assert_array_equal(po.block.matrices[0], pt.block.matrices[j - 1])


def test_apply_unit_gives_identity(rng, enum):
    t = random_model(rng, enum, 2, [1, 3])
    out = materialize(apply(unit_function(2, enum), t)).matrices[0]
    np.testing.assert_allclose(out, np.eye(t.total_dimension), atol=1e-12)


def test_apply_matches_materialized_arithmetic(rng, enum):
    t = random_model(rng, enum, 2, [2, 2, 1])
    x1 = StarPolynomial.variable(1)
    f = make_polynomial(x1 + x1.adjoint(), 2, enum)
    lhs = materialize(apply(f, t)).matrices[0]
    m1 = materialize(t).matrices[0]
    assert operator_norm(lhs - (m1 + m1.conj().T)) <= 1e-10 * (1 + operator_norm(m1))


def test_apply_scheme_guard(rng, enum):
    t = random_model(rng, enum, 2, [1])
    f = make_projection(1, 2, PolynomialEnumeration(seed=77))
    with pytest.raises(SchemeMismatch):
        apply(f, t)


def test_norm_is_exact_sector_max(rng, enum):
    t = random_model(rng, enum, 2, [1, 2, 3])
    f = make_polynomial(random_polynomial(rng, 2), 2, enum)
    value = apply(f, t)
    assert abs(value.norm() - materialize(value).norm()) <= 1e-12 * (1 + value.norm())


def test_compose_check_identity_and_random(rng, enum):
    from fticalc.calculus import identity_function

    t = random_model(rng, enum, 2, [1, 2])
    u = diagonal([make_polynomial(random_polynomial(rng, 2), 2, enum) for _ in range(2)])
    assert compose_check(identity_function(2, enum), u, t) <= 1e-12 * (1 + t.norm()) ** 4
    v = make_polynomial(random_polynomial(rng, 2), 2, enum)
    resid = compose_check(v, u, t)
    assert resid <= 1e-8 * (1 + apply(v, apply(u, t), ).norm())


def test_convergence_check_examples(rng, enum):
    t = random_model(rng, enum, 1, [1, 2])
    f = make_polynomial(random_polynomial(rng, 1), 1, enum)
    flat = convergence_check([f, f, f], f, t)
    assert all(a == 0.0 and b == 0.0 for a, b in flat)

    unit = unit_function(1, enum)
    seq = [(1.0 / n) * unit for n in range(1, 6)]
    zero = 0.0 * unit
    norms = convergence_check(seq, zero, t)
    for n, (a, b) in enumerate(norms, start=1):
        assert abs(a - 1.0 / n) <= 1e-12
        assert abs(b - 1.0 / n) <= 1e-12


def test_convergence_exponential_partial_sums(rng, enum):
    # Hermitian coordinate, norm <= 2: remainder vanishes fast
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = 0.5 * (h + h.conj().T)
    h *= 1.8 / operator_norm(h)
    t = from_tuple(MatrixTuple.of(h), enum)
    target = apply_scalar_continuous(np.exp, make_projection(1, 1, enum))
    x1 = StarPolynomial.variable(1)
    partial = StarPolynomial.constant(1.0)
    power = StarPolynomial.constant(1.0)
    fs = []
    for n in range(1, 26):
        power = power * x1
        partial = partial + (1.0 / math.factorial(n)) * power
        fs.append(make_polynomial(partial, 1, enum))
    norms = convergence_check(fs, target, t)
    assert norms[-1][0] <= 1e-6
    assert norms[-1][1] <= 1e-6
    # blockwise bound is exact
    dev = sector_deviation(fs[-1], target, t)
    assert abs(norms[-1][0] - dev) <= 1e-10


def test_piecewise_sum(rng, enum):
    t = random_model(rng, enum, 2, [1, 2, 2])
    f = make_polynomial(random_polynomial(rng, 2), 2, enum)
    unit = make_indicator(everything(enum), 2, enum)
    single = piecewise_sum([(f, unit)], t)
    assert materialize(single).distance(materialize(apply(f, t))) <= 1e-12 * (1 + t.norm())

    by_degree = [
        (f, make_indicator(degree_in({1}, enum), 2, enum)),
        (f, make_indicator(degree_in({2}, enum), 2, enum)),
        (f, make_indicator(degree_in({3}, enum), 2, enum)),
    ]
    refined = piecewise_sum(by_degree, t)
    assert materialize(refined).distance(materialize(apply(f, t))) <= 1e-9 * (1 + t.norm())

    with pytest.raises(NotAPartition):
        piecewise_sum([(f, make_indicator(degree_in({1}, enum), 2, enum))], t)
    with pytest.raises(NotAPartition):
        piecewise_sum([(f, unit), (f, unit)], t)


def test_piecewise_refinement_invariance(rng, enum):
    t = random_model(rng, enum, 2, [1, 1, 2])
    f = make_polynomial(random_polynomial(rng, 2), 2, enum)
    g = make_polynomial(random_polynomial(rng, 2), 2, enum)
    deg1 = make_indicator(degree_in({1}, enum), 2, enum)
    deg2 = make_indicator(degree_in({2, 3}, enum), 2, enum)
    coarse = piecewise_sum([(f, deg1), (g, deg2)], t)
    fine = piecewise_sum(
        [
            (f, make_indicator(degree_in({1}, enum), 2, enum)),
            (g, make_indicator(degree_in({2}, enum), 2, enum)),
            (g, make_indicator(degree_in({3}, enum), 2, enum)),
        ],
        t,
    )
    assert materialize(coarse).distance(materialize(fine)) <= 1e-9 * (1 + t.norm())


def test_double_commutant_examples(rng, enum):
    x = random_irreducible_tuple(rng, 2, 3)
    t = from_tuple(x, enum)
    r = double_commutant_check(t)
    assert (r.span_dimension, r.double_commutant_dimension, r.structural_dimension) == (9, 9, 9)

    y = random_irreducible_tuple(rng, 2, 2)
    doubled = from_tuple(
        direct_sum(y, unitary_action(haar_unitary(2, rng), y)), enum
    )
    r2 = double_commutant_check(doubled)
    assert (r2.span_dimension, r2.double_commutant_dimension, r2.structural_dimension) == (4, 4, 4)

    mixed = from_tuple(
        direct_sum(random_irreducible_tuple(rng, 2, 1), random_irreducible_tuple(rng, 2, 3)),
        enum,
    )
    r3 = double_commutant_check(mixed)
    assert (r3.span_dimension, r3.double_commutant_dimension, r3.structural_dimension) == (10, 10, 10)


def test_homomorphism_random_cases(rng, enum):
    for _ in range(30):
        ell = int(rng.integers(1, 3))
        t = random_model(rng, enum, ell, [int(rng.integers(1, 4)) for _ in range(int(rng.integers(1, 4)))], scale=0.8)
        pf, pg = random_polynomial(rng, ell, 2, 2), random_polynomial(rng, ell, 2, 2)
        f, g = make_polynomial(pf, ell, enum), make_polynomial(pg, ell, enum)
        scale = 1e-8 * (1 + t.norm()) ** (pf.degree + pg.degree)
        mf = materialize(apply(f, t)).matrices[0]
        mg = materialize(apply(g, t)).matrices[0]
        assert operator_norm(materialize(apply(f + g, t)).matrices[0] - mf - mg) <= scale
        assert operator_norm(materialize(apply(f * g, t)).matrices[0] - mf @ mg) <= scale
        assert operator_norm(materialize(apply(f.adjoint(), t)).matrices[0] - mf.conj().T) <= scale


def test_diagonal_apply_is_coordinatewise(rng, enum):
    t = random_model(rng, enum, 2, [1, 2])
    f1 = make_polynomial(random_polynomial(rng, 2), 2, enum)
    f2 = make_polynomial(random_polynomial(rng, 2), 2, enum)
    bundle = apply(diagonal([f1, f2]), t)
    for k, fk in enumerate((f1, f2)):
        single = apply(fk, t)
        for bs, ss in zip(bundle.sectors, single.sectors):
            np.testing.assert_array_equal(bs.block.matrices[k], ss.block.matrices[0])


def test_restricted_and_summed_models_stay_valid(rng, enum):
    from fticalc.operators import restrict_sectors

    t = random_model(rng, enum, 2, [1, 2, 3])
    sub = restrict_sectors(t, [0, 2])
    assert len(sub.sectors) == 2
    np.testing.assert_allclose(sum(s.weight for s in sub.sectors), 1.0)
    assert sub.is_model


def test_locally_bounded_values_respect_declared_bound(rng, enum):
    # a locally bounded function applied to a bounded operator stays within
    # the declared ball bound
    t = random_model(rng, enum, 2, [1, 2, 3])
    p = random_polynomial(rng, 2, max_degree=3)
    f = make_polynomial(p, 2, enum)
    value = apply(f, t)
    assert value.norm() <= f.bound_profile.limit(t.norm()) + 1e-9


def test_operator_json_round_trip(rng, enum):
    t = random_model(rng, enum, 2, [1, 2])
    text = json.dumps(operator_to_json(t))
    back = operator_from_json(json.loads(text))
    assert back.scheme == t.scheme
    assert materialize(back).distance(materialize(t)) == 0.0


def test_operator_validation(rng, enum):
    from fticalc.operators import FtiOperator, Sector
    from fticalc.canon import canonicalize

    block = random_irreducible_tuple(rng, 1, 2)
    cf = canonicalize(block, enum)
    with pytest.raises(ValueError, match="sum to 1"):
        FtiOperator((Sector(0.5, block, cf),), None, enum)
    with pytest.raises(ValueError, match="positive"):
        FtiOperator(
            (Sector(1.5, block, cf), Sector(-0.5, block, cf)), None, enum
        )
