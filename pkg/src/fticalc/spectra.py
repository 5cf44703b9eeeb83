"""Spectral measures on unitarily invariant sets and the principal spectrum.

Sets are predicates on canonical representatives, which makes unitary
invariance structural: membership is only ever asked of the canonical form
of an irreducible class. On the atomic measure carried by an operator's
sectors, the measure axioms hold exactly and integration of step data
reconstructs the calculus.

The module also houses the epsilon-characterization of spectrum membership
(orbit distance with certified upper and trace-based lower bounds), inverses
off a null set, vector module multiplication by degree-indexed matrix
sequences, and the transport of all kernel-scheme-dependent structure
between two enumeration schemes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .calculus import (
    CompatibleFunction,
    make_constant_on_kernel,
    make_indicator,
)
from .canon import (
    CanonicalForm,
    PolynomialEnumeration,
    canonicalize,
    trace_fingerprint,
)
from .errors import (
    DimensionMismatch,
    NotInjective,
    NotIrreducible,
    OverlappingPieces,
    SchemeMismatch,
    DegreeAboveMax,
)
from .linalg import DEFAULT_TOL, ToleranceConfig, as_matrix, haar_unitary, herm_eig, operator_norm
from .operators import (
    DEFAULT_DIMENSION_CAP,
    FtiOperator,
    Sector,
    apply,
    distinct_classes,
    materialize,
    with_enumeration,
)
from .structure import is_irreducible
from .tower import MatrixTuple, unitary_action

_MEMBERSHIP_SEED = 0x0B17
_TRANSPORT_SEED = 0x7A45


# ---------------------------------------------------------------------------
# Unitarily invariant sets as predicates on canonical representatives.

@dataclass(frozen=True)
class SpectralSet:
    """Unitarily invariant Borel set of irreducible classes, scheme-bound."""

    membership: Callable[[CanonicalForm], bool]
    scheme: str
    degree_filter: frozenset[int] | None = None
    description: str = ""

    def contains(self, cf: CanonicalForm) -> bool:
        if cf.scheme != self.scheme:
            raise SchemeMismatch(
                f"set is bound to scheme {self.scheme!r}, representative carries {cf.scheme!r}"
            )
        if self.degree_filter is not None and cf.degree not in self.degree_filter:
            return False
        return bool(self.membership(cf))

    def __and__(self, other: "SpectralSet") -> "SpectralSet":
        self._check(other)
        return SpectralSet(
            membership=lambda cf: self.contains(cf) and other.contains(cf),
            scheme=self.scheme,
            description=f"({self.description} & {other.description})",
        )

    def __or__(self, other: "SpectralSet") -> "SpectralSet":
        self._check(other)
        return SpectralSet(
            membership=lambda cf: self.contains(cf) or other.contains(cf),
            scheme=self.scheme,
            description=f"({self.description} | {other.description})",
        )

    def __invert__(self) -> "SpectralSet":
        return SpectralSet(
            membership=lambda cf: not self.contains(cf),
            scheme=self.scheme,
            description=f"~{self.description}",
        )

    def _check(self, other: "SpectralSet") -> None:
        if self.scheme != other.scheme:
            raise SchemeMismatch(f"schemes differ: {self.scheme} vs {other.scheme}")


def everything(enumeration: PolynomialEnumeration) -> SpectralSet:
    return SpectralSet(lambda cf: True, enumeration.label, description="all")


def nothing(enumeration: PolynomialEnumeration) -> SpectralSet:
    return SpectralSet(lambda cf: False, enumeration.label, description="empty")


def degree_in(degrees, enumeration: PolynomialEnumeration) -> SpectralSet:
    ds = frozenset(int(d) for d in degrees)
    return SpectralSet(
        membership=lambda cf: True,
        scheme=enumeration.label,
        degree_filter=ds,
        description=f"degree in {sorted(ds)}",
    )


def norm_ball(
    center: MatrixTuple | CanonicalForm, radius: float, enumeration: PolynomialEnumeration
) -> SpectralSet:
    """Classes whose representative lies within ``radius`` of the center.

    The center should itself be a canonical representative under the same
    scheme; representatives of one class agree to canonicalization accuracy,
    so small radii carve out single classes.
    """
    rep = center.rep if isinstance(center, CanonicalForm) else center

    def member(cf: CanonicalForm) -> bool:
        return cf.rep.distance(rep) <= radius

    return SpectralSet(
        membership=member,
        scheme=enumeration.label,
        degree_filter=frozenset({rep.degree}),
        description=f"ball(r={radius:g}, n={rep.degree})",
    )


def trace_window(
    coordinate: int, low: float, high: float, enumeration: PolynomialEnumeration
) -> SpectralSet:
    """Classes with ``low <= Re tr(X_k) <= high`` at the representative."""

    def member(cf: CanonicalForm) -> bool:
        value = float(np.trace(cf.rep.matrices[coordinate - 1]).real)
        return low <= value <= high

    return SpectralSet(
        membership=member,
        scheme=enumeration.label,
        description=f"trace{coordinate} in [{low:g},{high:g}]",
    )


def predicate_set(
    fn: Callable[[CanonicalForm], bool],
    enumeration: PolynomialEnumeration,
    description: str = "predicate",
    degree_filter=None,
) -> SpectralSet:
    ds = None if degree_filter is None else frozenset(int(d) for d in degree_filter)
    return SpectralSet(fn, enumeration.label, ds, description)


# ---------------------------------------------------------------------------
# Degree-indexed matrix sequences (the product algebra over all degrees).

@dataclass(frozen=True)
class ProductElement:
    """One n x n matrix per degree n <= n_max; missing degrees are zero."""

    entries: tuple[tuple[int, np.ndarray], ...]
    n_max: int = 16

    def __post_init__(self) -> None:
        norm_entries = []
        seen = set()
        for n, m in sorted(self.entries, key=lambda item: item[0]):
            n = int(n)
            if n < 1 or n > self.n_max:
                raise DegreeAboveMax(f"entry degree {n} outside 1..{self.n_max}")
            if n in seen:
                raise ValueError(f"duplicate entry for degree {n}")
            seen.add(n)
            a = as_matrix(m)
            if a.shape[0] != n:
                raise DimensionMismatch(f"entry for degree {n} has shape {a.shape}")
            a.setflags(write=False)
            norm_entries.append((n, a))
        object.__setattr__(self, "entries", tuple(norm_entries))

    @classmethod
    def from_dict(cls, entries: dict, n_max: int = 16) -> "ProductElement":
        return cls(tuple(entries.items()), n_max)

    @classmethod
    def identity(cls, n_max: int = 16) -> "ProductElement":
        return cls(tuple((n, np.eye(n, dtype=np.complex128)) for n in range(1, n_max + 1)), n_max)

    @classmethod
    def zero(cls, n_max: int = 16) -> "ProductElement":
        return cls((), n_max)

    def entry(self, n: int) -> np.ndarray:
        if n > self.n_max:
            raise DegreeAboveMax(f"degree {n} exceeds the configured maximum {self.n_max}")
        for deg, m in self.entries:
            if deg == n:
                return m
        return np.zeros((n, n), dtype=np.complex128)

    def norm(self) -> float:
        return max((operator_norm(m) for _, m in self.entries), default=0.0)

    def _zip(self, other: "ProductElement", fn) -> "ProductElement":
        if self.n_max != other.n_max:
            raise DimensionMismatch("product elements use different degree caps")
        degrees = sorted(
            {n for n, _ in self.entries} | {n for n, _ in other.entries}
        )
        return ProductElement(
            tuple((n, fn(self.entry(n), other.entry(n))) for n in degrees), self.n_max
        )

    def __add__(self, other: "ProductElement") -> "ProductElement":
        return self._zip(other, lambda a, b: a + b)

    def __mul__(self, other: "ProductElement") -> "ProductElement":
        return self._zip(other, lambda a, b: a @ b)

    def __rmul__(self, alpha: complex) -> "ProductElement":
        return ProductElement(
            tuple((n, complex(alpha) * m) for n, m in self.entries), self.n_max
        )

    def adjoint(self) -> "ProductElement":
        return ProductElement(
            tuple((n, m.conj().T) for n, m in self.entries), self.n_max
        )


# ---------------------------------------------------------------------------
# Spectral measure, type projections, principal spectrum.

def spectral_measure(
    t: FtiOperator, b: SpectralSet, tol: ToleranceConfig = DEFAULT_TOL
) -> FtiOperator:
    """The central projection selecting the classes in the set."""
    if b.scheme != t.scheme:
        raise SchemeMismatch(f"set scheme {b.scheme} does not match operator scheme {t.scheme}")
    return apply(make_indicator(b, t.ell, t.enumeration), t, tol)


def type_projection(t: FtiOperator, n: int, tol: ToleranceConfig = DEFAULT_TOL) -> FtiOperator:
    """Greatest central projection whose compression is homogeneous of degree n."""
    return spectral_measure(t, degree_in({n}, t.enumeration), tol)


def principal_spectrum(
    t: FtiOperator, tol: ToleranceConfig = DEFAULT_TOL
) -> list[tuple[CanonicalForm, float]]:
    """Support classes with aggregated weights, deduplicated and ordered."""
    return [(cf, w) for cf, w, _ in distinct_classes(t, tol)]


@dataclass(frozen=True)
class ZeroSupportReport:
    zero_operator: bool
    zero_measure: bool
    witness_sector: int | None
    threshold: float

    @property
    def consistent(self) -> bool:
        return self.zero_operator == self.zero_measure


def zero_support_test(
    f: CompatibleFunction,
    t: FtiOperator,
    tol: ToleranceConfig = DEFAULT_TOL,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> ZeroSupportReport:
    """Two routes to "f[T] = 0": operator norm vs support enumeration.

    The operator route materializes f[T] and takes the norm of the explicit
    matrices; the measure route asks whether any support representative has
    ``||f(K)||`` above the threshold. Both use ``match_tol * (1 + ||T||)``.
    """
    threshold = tol.match_tol * (1.0 + t.norm())
    value = apply(f, t, tol)
    if value.total_dimension <= cap:
        op_norm = materialize(value, cap).norm()
    else:
        op_norm = value.norm()
    zero_operator = op_norm <= threshold

    witness = None
    for j in range(len(t.sectors)):
        cf = t.sector_canon(j, tol)
        if f.value_at(cf, tol).norm() > threshold:
            witness = j
            break
    zero_measure = witness is None
    return ZeroSupportReport(zero_operator, zero_measure, witness, threshold)


def invert_on(
    u: CompatibleFunction, t: FtiOperator, tol: ToleranceConfig = DEFAULT_TOL
) -> CompatibleFunction:
    """Inverse of u on the support, zero elsewhere.

    Requires u[T] injective, i.e. every support representative's value has
    smallest singular value above ``rank_tol`` scale; otherwise
    :class:`NotInjective` reports the offending sector. The returned
    function inverts wherever the value is numerically invertible and
    vanishes on the residual singular set, so ``v[T] u[T]`` is the identity.
    """
    for j in range(len(t.sectors)):
        cf = t.sector_canon(j, tol)
        a = u.value_at(cf, tol).matrices[0]
        smin = float(np.linalg.svd(a, compute_uv=False)[-1])
        if smin <= tol.rank_tol * (1.0 + operator_norm(a)):
            raise NotInjective(
                f"sector {j} (degree {cf.degree}) carries a singular value "
                f"{smin:.3e}; the singular set has positive measure"
            )

    def kernel(cf: CanonicalForm) -> MatrixTuple:
        a = u.value_at(cf, tol).matrices[0]
        smin = float(np.linalg.svd(a, compute_uv=False)[-1])
        if smin <= tol.rank_tol * (1.0 + operator_norm(a)):
            return MatrixTuple.zeros(1, cf.degree)
        return MatrixTuple((np.linalg.inv(a),))

    from .calculus import BoundProfile

    return CompatibleFunction(
        ell=u.ell,
        ell_out=1,
        enumeration=u.enumeration,
        kernel_map=kernel,
        bound_profile=BoundProfile.unrestricted(),
        name=f"invert_on({u.name})" if u.name else "invert_on",
    )


# ---------------------------------------------------------------------------
# Module multiplication and step-function integration.

def module_mult(
    x: ProductElement,
    h: np.ndarray,
    t: FtiOperator,
    tol: ToleranceConfig = DEFAULT_TOL,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> np.ndarray:
    """Multiply a vector by a degree-indexed sequence through the calculus."""
    vec = np.asarray(h, dtype=np.complex128).reshape(-1)
    if vec.size != t.total_dimension:
        raise DimensionMismatch(
            f"vector has dimension {vec.size}, operator space has {t.total_dimension}"
        )
    op = apply(make_constant_on_kernel(x, t.ell, t.enumeration), t, tol)
    return materialize(op, cap).matrices[0] @ vec


def integrate_step(
    pieces, t: FtiOperator, tol: ToleranceConfig = DEFAULT_TOL
) -> FtiOperator:
    """Sum of constant values against the spectral measure of disjoint sets.

    ``pieces`` is a finite sequence of (set, product element) pairs with
    pairwise disjoint sets; each support representative may lie in at most
    one set (checked, :class:`OverlappingPieces` otherwise), and sectors in
    no set receive zero. Central projections commute, so the result is
    independent of piece order by construction.
    """
    pieces = list(pieces)
    for b, _ in pieces:
        if b.scheme != t.scheme:
            raise SchemeMismatch("piece sets must carry the operator scheme")
    new_sectors = []
    for j, s in enumerate(t.sectors):
        cf = t.sector_canon(j, tol)
        hits = [i for i, (b, _) in enumerate(pieces) if b.contains(cf)]
        if len(hits) > 1:
            raise OverlappingPieces(
                f"sector {j} lies in pieces {hits}; sets must be pairwise disjoint"
            )
        if hits:
            value = MatrixTuple((pieces[hits[0]][1].entry(cf.degree),))
            block = unitary_action(cf.witness.conj().T, value, tol)
        else:
            block = MatrixTuple.zeros(1, s.degree)
        new_sectors.append(Sector(s.weight, block, None))
    return FtiOperator(tuple(new_sectors), t.unitary, t.enumeration)


# ---------------------------------------------------------------------------
# Epsilon-membership in the principal spectrum.

@dataclass(frozen=True)
class MembershipCertificate:
    member: bool
    upper_bound: float
    lower_bound: float
    class_index: int | None
    unitary: np.ndarray | None
    conservative: bool  # rejection with bounds disagreeing about epsilon


def _orbit_objective(x: MatrixTuple, k: MatrixTuple, u: np.ndarray) -> float:
    conj = unitary_action(u, k)
    return x.distance(conj)


def _frobenius_gap(x: MatrixTuple, k: MatrixTuple, u: np.ndarray) -> float:
    return sum(
        float(np.linalg.norm(a - u @ b @ u.conj().T) ** 2)
        for a, b in zip(x.matrices, k.matrices)
    )


def _descend(
    x: MatrixTuple, k: MatrixTuple, u0: np.ndarray, max_iter: int, tol: ToleranceConfig
) -> np.ndarray:
    """Minimize the squared Frobenius orbit gap over the unitary group.

    Gradient steps along the skew-Hermitian direction with an exponential
    retraction (computed through a Hermitian eigendecomposition, so the
    iterate stays exactly unitary) and backtracking on the step size.
    """
    u = u0.copy()
    fval = _frobenius_gap(x, k, u)
    step = 0.5 / (1.0 + k.norm() ** 2)
    scale = 1.0 + x.norm() + k.norm()
    for _ in range(max_iter):
        grad = np.zeros_like(u)
        for a, b in zip(x.matrices, k.matrices):
            d = a - u @ b @ u.conj().T
            grad -= 2.0 * (d @ u @ b.conj().T + d.conj().T @ u @ b)
        skew = grad @ u.conj().T - u @ grad.conj().T
        gnorm = operator_norm(skew)
        if gnorm <= 1e-12 * scale:
            break
        herm = 1j * skew
        w, v = herm_eig(0.5 * (herm + herm.conj().T), tol)
        improved = False
        for _ in range(25):
            rot = (v * np.exp(1j * step * w)) @ v.conj().T
            cand = rot @ u
            cval = _frobenius_gap(x, k, cand)
            if cval < fval:
                u, fval = cand, cval
                step *= 1.25
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return u


def _trace_lower_bound(x: MatrixTuple, k: MatrixTuple, max_len: int = 3) -> float:
    """Valid lower bound on the orbit distance from word-trace discrepancies.

    For any unitary U and word w of length L,
    ``|tr w(X) - tr w(U.K)| <= p L R^(L-1) max_k ||X_k - (U.K)_k||``
    with R bounding all coordinate norms, by telescoping; traces of U.K
    equal traces of K.
    """
    p = x.degree
    r = max(x.norm(), k.norm(), 1.0)
    fx = trace_fingerprint(x, max_len)
    fk = trace_fingerprint(k, max_len)
    n_letters = 2 * x.length
    best = 0.0
    pos = 1  # skip the empty word (traces both equal p)
    for length in range(1, max_len + 1):
        count = n_letters**length
        block = np.abs(fx[pos : pos + count] - fk[pos : pos + count])
        denom = p * length * r ** (length - 1)
        if block.size:
            best = max(best, float(np.max(block)) / denom)
        pos += count
    return best


def orbit_distance(
    x: MatrixTuple,
    k: MatrixTuple,
    tol: ToleranceConfig = DEFAULT_TOL,
    restarts: int = 8,
    max_iter: int = 500,
) -> tuple[float, float, np.ndarray]:
    """Bracket ``min over unitaries of ||X - U.K||``.

    Returns (upper, lower, best unitary). The upper bound comes from descent
    restarts: identity, a witness-composition start when both tuples
    canonicalize, and seeded random unitaries. The lower bound is the
    trace-discrepancy bound, valid for every unitary.
    """
    from .errors import FticalcError

    p = x.degree
    starts = [np.eye(p, dtype=np.complex128)]
    try:
        cx = canonicalize(x, PolynomialEnumeration(), tol, check=False)
        ck = canonicalize(k, PolynomialEnumeration(), tol, check=False)
        if cx.index == ck.index:
            # rep_x = Wx.x, rep_k = Wk.k; equal classes give x ~ (Wx* Wk).k
            starts.append(cx.witness.conj().T @ ck.witness)
    except FticalcError:
        pass  # no certified start; random restarts still run
    rng = np.random.default_rng([_MEMBERSHIP_SEED, p, x.length])
    while len(starts) < restarts:
        starts.append(haar_unitary(p, rng))

    best_u = starts[0]
    best_val = _orbit_objective(x, k, best_u)
    for u0 in starts:
        u = _descend(x, k, u0, max_iter, tol)
        val = _orbit_objective(x, k, u)
        if val < best_val:
            best_val, best_u = val, u
    lower = _trace_lower_bound(x, k)
    return best_val, lower, best_u


def spectrum_membership(
    t: FtiOperator,
    x: MatrixTuple,
    eps: float,
    tol: ToleranceConfig = DEFAULT_TOL,
    restarts: int = 8,
    max_iter: int = 500,
) -> MembershipCertificate:
    """Is an irreducible tuple within eps of the principal spectrum?

    Acceptance uses the certified upper bound on the orbit distance to the
    nearest support class of matching degree, so membership claims are
    sound. A rejection where the lower bound still permits membership is
    flagged conservative.
    """
    if not is_irreducible(x, tol):
        raise NotIrreducible("membership queries take irreducible tuples")
    p = x.degree
    classes = principal_spectrum(t, tol)
    candidates = [(i, cf) for i, (cf, _) in enumerate(classes) if cf.degree == p]
    if not candidates:
        return MembershipCertificate(
            member=False,
            upper_bound=float("inf"),
            lower_bound=float("inf"),
            class_index=None,
            unitary=None,
            conservative=False,
        )
    best = None
    for i, cf in candidates:
        upper, lower, u = orbit_distance(x, cf.rep, tol, restarts, max_iter)
        if best is None or upper < best[1]:
            best = (i, upper, lower, u)
    idx, upper, lower, u = best
    member = upper <= eps
    conservative = (not member) and (lower <= eps)
    return MembershipCertificate(member, upper, lower, idx, u, conservative)


# ---------------------------------------------------------------------------
# Transport between two enumeration schemes.

@dataclass(frozen=True)
class TransportReport:
    atom_residual: float
    measure_consistent: bool
    module_residual: float
    atom_count: int


def transport_function(
    source: PolynomialEnumeration,
    target: PolynomialEnumeration,
    ell: int,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CompatibleFunction:
    """Unitary-valued function carrying source-canonical reps to target ones.

    The value at a source representative is the target-scheme
    canonicalization witness of that representative; conjugating by it maps
    the source kernel onto the target kernel class by class.
    """
    from .calculus import BoundProfile

    def kernel(cf: CanonicalForm) -> MatrixTuple:
        target_cf = canonicalize(cf.rep, target, tol, check=False)
        return MatrixTuple((target_cf.witness,))

    return CompatibleFunction(
        ell=ell,
        ell_out=1,
        enumeration=source,
        kernel_map=kernel,
        bound_profile=BoundProfile.bounded(1.0),
        name=f"transport({source.label}->{target.label})",
    )


def kernel_transport(
    source: PolynomialEnumeration,
    target: PolynomialEnumeration,
    t: FtiOperator,
    tol: ToleranceConfig = DEFAULT_TOL,
    samples: int = 8,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> tuple[CompatibleFunction, TransportReport]:
    """Change of enumeration scheme, verified on the operator's support.

    Checks, atom by atom, that conjugating a source representative by the
    transport value reproduces the representative computed directly under
    the target scheme; that the spectral measure of sampled target-scheme
    sets equals the source measure of their preimages (exact on atoms); and
    that module multiplication transforms by conjugation with u[T].
    """
    if t.scheme != source.label:
        raise SchemeMismatch(
            f"operator carries scheme {t.scheme} but the source scheme is {source.label}"
        )
    u = transport_function(source, target, t.ell, tol)
    t_target = with_enumeration(t, target, tol)

    # atoms: direct target canonicalization vs transported source rep
    atom_residual = 0.0
    src_classes = distinct_classes(t, tol)
    tgt_reps = []
    for cf, _, idxs in src_classes:
        direct = canonicalize(t.sectors[idxs[0]].block, target, tol, check=False)
        carried = unitary_action(u.value_at(cf, tol).matrices[0], cf.rep, tol)
        atom_residual = max(atom_residual, direct.rep.distance(carried))
        tgt_reps.append(direct)

    # measure transport on sampled sets (exact on atoms)
    rng = np.random.default_rng([_TRANSPORT_SEED, t.total_dimension, samples])
    measure_ok = True
    sample_sets: list[SpectralSet] = [everything(target), nothing(target)]
    for direct in tgt_reps:
        sample_sets.append(norm_ball(direct, 1e-5, target))
    degrees = sorted({s.degree for s in t.sectors})
    for d in degrees:
        sample_sets.append(degree_in({d}, target))
    for _ in range(samples):
        lo = float(rng.uniform(-3, 3))
        hi = lo + float(rng.uniform(0, 3))
        k = int(rng.integers(1, t.ell + 1))
        sample_sets.append(trace_window(k, lo, hi, target))
    for b in sample_sets:
        direct_measure = materialize(spectral_measure(t_target, b, tol), cap)
        preimage = predicate_set(
            lambda cf, _b=b: _b.contains(canonicalize(cf.rep, target, tol, check=False)),
            source,
            description=f"preimage({b.description})",
        )
        pulled = materialize(spectral_measure(t, preimage, tol), cap)
        if direct_measure.distance(pulled) > 1e-12:
            measure_ok = False

    # module multiplication conjugacy on random data
    u_t = materialize(apply(u, t, tol), cap).matrices[0]
    module_residual = 0.0
    n_max = max(max(degrees), 1)
    for _ in range(samples):
        entries = {}
        for d in degrees:
            entries[d] = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        x = ProductElement.from_dict(entries, n_max=max(n_max, 16))
        h = rng.standard_normal(t.total_dimension) + 1j * rng.standard_normal(
            t.total_dimension
        )
        lhs = module_mult(x, h, t_target, tol, cap)
        rhs = u_t @ module_mult(x, u_t.conj().T @ h, t, tol, cap)
        denom = (1.0 + x.norm()) * float(np.linalg.norm(h))
        module_residual = max(module_residual, float(np.linalg.norm(lhs - rhs)) / denom)

    report = TransportReport(
        atom_residual=atom_residual,
        measure_consistent=measure_ok,
        module_residual=module_residual,
        atom_count=len(src_classes),
    )
    return u, report
