"""Seeded random builders for tests, the acceptance suite and the CLI selftest."""

from __future__ import annotations

import numpy as np

from .canon import PolynomialEnumeration
from .linalg import DEFAULT_TOL, ToleranceConfig, haar_unitary
from .operators import FtiOperator, from_tuple
from .structure import is_irreducible
from .tower import MatrixTuple, StarPolynomial, direct_sum_many, unitary_action


def random_matrix(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def random_tuple(rng: np.random.Generator, ell: int, n: int, scale: float = 1.0) -> MatrixTuple:
    return MatrixTuple(tuple(random_matrix(rng, n, scale) for _ in range(ell)))


def random_irreducible_tuple(
    rng: np.random.Generator,
    ell: int,
    n: int,
    scale: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
    max_tries: int = 64,
) -> MatrixTuple:
    """Random tuple resampled until certified irreducible.

    Generic tuples are irreducible (for ell = 1 the coordinate must be
    non-normal, which random Gaussians are), so this rarely loops.
    """
    for _ in range(max_tries):
        x = random_tuple(rng, ell, n, scale)
        if is_irreducible(x, tol):
            return x
    raise RuntimeError(f"no irreducible sample found for ell={ell}, n={n}")


def random_hermitian_tuple(rng: np.random.Generator, ell: int, n: int, scale: float = 1.0) -> MatrixTuple:
    mats = []
    for _ in range(ell):
        a = random_matrix(rng, n, scale)
        mats.append(0.5 * (a + a.conj().T))
    return MatrixTuple(tuple(mats))


def random_polynomial(
    rng: np.random.Generator,
    ell: int,
    max_degree: int = 3,
    max_terms: int = 4,
    coefficient_scale: float = 1.0,
) -> StarPolynomial:
    """Random *-polynomial with coefficients of modulus <= coefficient_scale."""
    nterms = int(rng.integers(1, max_terms + 1))
    terms = []
    for _ in range(nterms):
        length = int(rng.integers(1, max_degree + 1))
        raw = rng.integers(0, 2 * ell, size=length)
        word = tuple(int(r) + 1 if r < ell else -(int(r) - ell + 1) for r in raw)
        phase = np.exp(2j * np.pi * rng.uniform())
        coeff = coefficient_scale * rng.uniform(0.1, 1.0) * phase
        terms.append((complex(coeff), word))
    return StarPolynomial(tuple(terms))


def random_blocks(
    rng: np.random.Generator,
    ell: int,
    degrees,
    scale: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> list[MatrixTuple]:
    return [random_irreducible_tuple(rng, ell, n, scale, tol) for n in degrees]


def random_model(
    rng: np.random.Generator,
    enumeration: PolynomialEnumeration,
    ell: int,
    degrees,
    scale: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
    conjugate_frame: bool = True,
) -> FtiOperator:
    """Random model operator with irreducible sectors of the given degrees."""
    blocks = random_blocks(rng, ell, degrees, scale, tol)
    x = direct_sum_many(blocks)
    if conjugate_frame:
        x = unitary_action(haar_unitary(x.degree, rng), x)
    return from_tuple(x, enumeration, tol)


def random_hermitian_model(
    rng: np.random.Generator,
    enumeration: PolynomialEnumeration,
    degrees,
    scale: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> FtiOperator:
    """Model whose single coordinate is Hermitian with the given sector degrees.

    Sectors of degree > 1 would be reducible for a Hermitian coordinate, so
    degree entries here count eigenvalue atoms: the tuple is a conjugated
    diagonal matrix and the sectors come out one-dimensional.
    """
    total = sum(degrees)
    eigs = np.sort(rng.uniform(-scale, scale, size=total))
    x = MatrixTuple.of(np.diag(eigs).astype(np.complex128))
    x = unitary_action(haar_unitary(total, rng), x)
    return from_tuple(x, enumeration, tol)


def commuting_normal_blocks(
    rng: np.random.Generator,
    ell: int,
    big_n: int,
    d: int,
    scale: float = 1.0,
    min_gap: float = 0.05,
    max_tries: int = 64,
) -> list[np.ndarray]:
    """Random (N, N, d, d) block arrays of commuting normal entries.

    All entries share one eigenbasis with generically separated joint
    eigenvalue columns, so ingestion recovers the construction exactly.
    """
    v = haar_unitary(d, rng)
    for _ in range(max_tries):
        diags = scale * (
            rng.standard_normal((ell, big_n, big_n, d))
            + 1j * rng.standard_normal((ell, big_n, big_n, d))
        )
        columns = diags.reshape(-1, d)
        # every pair of joint eigenindices must be separated by at least one
        # entry's eigenvalues, or the joint eigenbasis is not recoverable
        separated = all(
            np.max(np.abs(columns[:, a] - columns[:, b])) > min_gap
            for a in range(d)
            for b in range(a + 1, d)
        )
        if not separated:
            continue
        out = []
        for p in range(ell):
            block = np.zeros((big_n, big_n, d, d), dtype=np.complex128)
            for j in range(big_n):
                for k in range(big_n):
                    block[j, k] = v @ np.diag(diags[p, j, k]) @ v.conj().T
            out.append(block)
        return out
    raise RuntimeError("could not separate joint eigenvalues; lower min_gap")
