"""Compatible matrix functions represented by their canonical-rep restriction.

A compatible function is a degree-preserving map on matrix tuples that
commutes with unitary conjugation and direct sums. Such a map is determined
by its values on canonical representatives of irreducible tuples, and
conversely every map on representatives extends uniquely: that extension is
exactly what :func:`evaluate_at_tuple` computes, by decomposing the input,
pulling each irreducible block to its canonical form, applying the stored
kernel map there and conjugating back.

A :class:`CompatibleFunction` therefore stores the kernel restriction plus
boundedness metadata. Declared bounds and centrality claims are validated
lazily at evaluation; violations emit warnings rather than aborting (the
bounded / locally bounded classes are semantic, not syntactic).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

import numpy as np

from .canon import CanonicalForm, PolynomialEnumeration, canonicalize
from .errors import (
    BoundViolation,
    CentralityViolation,
    DegreeMismatch,
    IndexOutOfRange,
    NotSelfadjointValue,
    SchemeMismatch,
    ShapeMismatch,
    SingularValue,
)
from .linalg import DEFAULT_TOL, ToleranceConfig, block_diag, herm_eig, operator_norm
from .structure import decompose
from .tower import (
    MatrixTuple,
    StarPolynomial,
    b_transform,
    eval_polynomial,
    inv_b_transform,
    unitary_action,
)

if TYPE_CHECKING:  # only for annotations; spectra imports this module at runtime
    from .spectra import ProductElement, SpectralSet

KernelMap = Callable[[CanonicalForm], MatrixTuple]


@dataclass(frozen=True)
class BoundProfile:
    """Declared boundedness class: bounded(M), locally bounded, or unrestricted."""

    kind: str
    value: float | None = None
    radius_bound: Callable[[float], float] | None = None

    @classmethod
    def bounded(cls, m: float) -> "BoundProfile":
        return cls(kind="bounded", value=float(m))

    @classmethod
    def locally_bounded(cls, fn: Callable[[float], float]) -> "BoundProfile":
        return cls(kind="locally_bounded", radius_bound=fn)

    @classmethod
    def unrestricted(cls) -> "BoundProfile":
        return cls(kind="unrestricted")

    def limit(self, radius: float) -> float:
        if self.kind == "bounded":
            return self.value
        if self.kind == "locally_bounded":
            return float(self.radius_bound(radius))
        return math.inf

    @staticmethod
    def combine(op: str, a: "BoundProfile", b: "BoundProfile | None" = None, alpha: complex = 1.0) -> "BoundProfile":
        if op == "scale":
            if a.kind == "bounded":
                return BoundProfile.bounded(abs(alpha) * a.value)
            if a.kind == "locally_bounded":
                fa = a.radius_bound
                return BoundProfile.locally_bounded(lambda r, s=abs(alpha): s * fa(r))
            return BoundProfile.unrestricted()
        if op == "star":
            return a
        if "unrestricted" in (a.kind, b.kind):
            return BoundProfile.unrestricted()
        if a.kind == "bounded" and b.kind == "bounded":
            if op == "add":
                return BoundProfile.bounded(a.value + b.value)
            return BoundProfile.bounded(a.value * b.value)
        fa, fb = a.limit, b.limit
        if op == "add":
            return BoundProfile.locally_bounded(lambda r: fa(r) + fb(r))
        return BoundProfile.locally_bounded(lambda r: fa(r) * fb(r))


@dataclass(frozen=True)
class CompatibleFunction:
    """A compatible function of l-tuples with l_out-tuple values.

    ``kernel_map`` must be pure: it receives a canonical form and returns an
    l_out-tuple of the same degree. ``projection_indices`` marks functions
    whose value at any tuple is a selection of input coordinates; evaluation
    then returns those coordinates verbatim, which makes the coordinate
    projections act exactly (their action is the defining normalization of
    the calculus, not a derived fact).
    """

    ell: int
    ell_out: int
    enumeration: PolynomialEnumeration
    kernel_map: KernelMap
    bound_profile: BoundProfile = field(default_factory=BoundProfile.unrestricted)
    central: bool = False
    name: str = ""
    projection_indices: tuple[int, ...] | None = None

    @property
    def scheme(self) -> str:
        return self.enumeration.label

    def value_at(self, cf: CanonicalForm, tol: ToleranceConfig = DEFAULT_TOL) -> MatrixTuple:
        """Kernel value at a canonical form, with contract checks.

        Degree preservation is enforced (a violation is a programming
        error); bound and centrality claims only warn.
        """
        if cf.length != self.ell:
            raise ShapeMismatch(
                f"function takes {self.ell}-tuples but the representative has length {cf.length}"
            )
        value = self.kernel_map(cf)
        if value.length != self.ell_out:
            raise ShapeMismatch(
                f"kernel map returned length {value.length}, declared {self.ell_out}"
            )
        if value.degree != cf.degree:
            raise DegreeMismatch(
                f"kernel map changed degree {cf.degree} -> {value.degree}"
            )
        limit = self.bound_profile.limit(cf.rep.norm())
        if math.isfinite(limit):
            vnorm = value.norm()
            if vnorm > limit * (1.0 + 1e-9) + tol.match_tol:
                warnings.warn(
                    f"{self.name or 'function'}: value norm {vnorm:.6g} exceeds "
                    f"declared bound {limit:.6g}",
                    BoundViolation,
                    stacklevel=2,
                )
        if self.central:
            n = cf.degree
            for k, m in enumerate(value.matrices):
                defect = operator_norm(m - (np.trace(m) / n) * np.eye(n))
                if defect > 1e-9 * (1.0 + operator_norm(m)) * n:
                    warnings.warn(
                        f"{self.name or 'function'}: coordinate {k + 1} is not scalar "
                        f"at a degree-{n} representative (defect {defect:.3e})",
                        CentralityViolation,
                        stacklevel=2,
                    )
                    break
        return value

    # pointwise *-algebra sugar
    def __add__(self, other: "CompatibleFunction") -> "CompatibleFunction":
        return algebra("add", self, other)

    def __sub__(self, other: "CompatibleFunction") -> "CompatibleFunction":
        return algebra("add", self, algebra("scale", other, -1.0))

    def __mul__(self, other: "CompatibleFunction") -> "CompatibleFunction":
        return algebra("mul", self, other)

    def __rmul__(self, alpha: complex) -> "CompatibleFunction":
        return algebra("scale", self, alpha)

    def adjoint(self) -> "CompatibleFunction":
        return algebra("star", self)

    def __repr__(self) -> str:
        label = self.name or "kernel map"
        return f"CompatibleFunction({label}, l={self.ell}->{self.ell_out}, scheme={self.scheme})"


def _check_index(j: int, ell: int) -> None:
    if not 1 <= j <= ell:
        raise IndexOutOfRange(f"coordinate index {j} outside 1..{ell}")


def make_projection(
    j: int, ell: int, enumeration: PolynomialEnumeration
) -> CompatibleFunction:
    """The j-th coordinate projection; acts exactly on any tuple."""
    _check_index(j, ell)
    return CompatibleFunction(
        ell=ell,
        ell_out=1,
        enumeration=enumeration,
        kernel_map=lambda cf: MatrixTuple((cf.rep.matrices[j - 1],)),
        bound_profile=BoundProfile.locally_bounded(lambda r: r),
        name=f"x{j}",
        projection_indices=(j,),
    )


def identity_function(ell: int, enumeration: PolynomialEnumeration) -> CompatibleFunction:
    """The identity tuple (x_1, ..., x_l); acts exactly."""
    return CompatibleFunction(
        ell=ell,
        ell_out=ell,
        enumeration=enumeration,
        kernel_map=lambda cf: cf.rep,
        bound_profile=BoundProfile.locally_bounded(lambda r: r),
        name="id",
        projection_indices=tuple(range(1, ell + 1)),
    )


def make_polynomial(
    p: StarPolynomial, ell: int, enumeration: PolynomialEnumeration
) -> CompatibleFunction:
    if p.max_index > ell:
        raise IndexOutOfRange(
            f"polynomial references index {p.max_index} but functions take {ell}-tuples"
        )
    mass_by_len: dict[int, float] = {}
    for c, w in p.terms:
        mass_by_len[len(w)] = mass_by_len.get(len(w), 0.0) + abs(c)

    def radius_bound(r: float) -> float:
        return sum(mass * max(r, 0.0) ** length for length, mass in mass_by_len.items())

    return CompatibleFunction(
        ell=ell,
        ell_out=1,
        enumeration=enumeration,
        kernel_map=lambda cf: MatrixTuple((eval_polynomial(p, cf.rep),)),
        bound_profile=BoundProfile.locally_bounded(radius_bound),
        name="polynomial",
    )


def unit_function(ell: int, enumeration: PolynomialEnumeration) -> CompatibleFunction:
    """The unit: identity matrix of the matching degree at every tuple."""
    return CompatibleFunction(
        ell=ell,
        ell_out=1,
        enumeration=enumeration,
        kernel_map=lambda cf: MatrixTuple.identities(1, cf.degree),
        bound_profile=BoundProfile.bounded(1.0),
        central=True,
        name="unit",
    )


def zero_function(ell: int, enumeration: PolynomialEnumeration) -> CompatibleFunction:
    return CompatibleFunction(
        ell=ell,
        ell_out=1,
        enumeration=enumeration,
        kernel_map=lambda cf: MatrixTuple.zeros(1, cf.degree),
        bound_profile=BoundProfile.bounded(0.0),
        central=True,
        name="zero",
    )


def make_indicator(b: "SpectralSet", ell: int, enumeration: PolynomialEnumeration) -> CompatibleFunction:
    """Indicator of a unitarily invariant set: I on members, 0 elsewhere.

    Central, idempotent and selfadjoint as an algebra element. The set must
    carry the same scheme label as the enumeration.
    """
    if b.scheme != enumeration.label:
        raise SchemeMismatch(
            f"set is bound to scheme {b.scheme!r} but the function uses {enumeration.label!r}"
        )

    def kernel(cf: CanonicalForm) -> MatrixTuple:
        if b.contains(cf):
            return MatrixTuple.identities(1, cf.degree)
        return MatrixTuple.zeros(1, cf.degree)

    return CompatibleFunction(
        ell=ell,
        ell_out=1,
        enumeration=enumeration,
        kernel_map=kernel,
        bound_profile=BoundProfile.bounded(1.0),
        central=True,
        name=f"indicator({b.description})" if b.description else "indicator",
    )


def make_constant_on_kernel(
    x: "ProductElement", ell: int, enumeration: PolynomialEnumeration
) -> CompatibleFunction:
    """Constant value ``x.entry(n)`` on every degree-n representative."""
    return CompatibleFunction(
        ell=ell,
        ell_out=1,
        enumeration=enumeration,
        kernel_map=lambda cf: MatrixTuple((x.entry(cf.degree),)),
        bound_profile=BoundProfile.bounded(x.norm()),
        name="constant-on-kernel",
    )


def apply_scalar_continuous(
    u: Callable[[np.ndarray], np.ndarray],
    f: CompatibleFunction,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CompatibleFunction:
    """Classical functional calculus u(f) for selfadjoint-valued f.

    The value at a representative is ``V diag(u(w)) V*`` from the
    eigendecomposition of f's value there; raises
    :class:`NotSelfadjointValue` when that value is not Hermitian within
    ``match_tol`` scale.
    """
    if f.ell_out != 1:
        raise ShapeMismatch("scalar calculus needs a single-matrix-valued function")

    def kernel(cf: CanonicalForm) -> MatrixTuple:
        val = f.value_at(cf, tol).matrices[0]
        defect = operator_norm(val - val.conj().T)
        if defect > tol.match_tol * (1.0 + operator_norm(val)):
            raise NotSelfadjointValue(
                f"value at a degree-{cf.degree} representative has Hermitian defect {defect:.3e}"
            )
        w, v = herm_eig(0.5 * (val + val.conj().T), tol)
        return MatrixTuple(((v * np.asarray(u(w), dtype=np.complex128)) @ v.conj().T,))

    return CompatibleFunction(
        ell=f.ell,
        ell_out=1,
        enumeration=f.enumeration,
        kernel_map=kernel,
        bound_profile=BoundProfile.unrestricted(),
        central=f.central,
        name=f"scalar-calculus({f.name})" if f.name else "scalar-calculus",
    )


def algebra(
    op: str, f: CompatibleFunction, other=None
) -> CompatibleFunction:
    """Pointwise *-algebra operation on functions: add, mul, scale, star."""
    if op in ("add", "mul"):
        g = other
        if not isinstance(g, CompatibleFunction):
            raise ShapeMismatch(f"{op} needs a second function")
        if (f.ell, f.ell_out) != (g.ell, g.ell_out):
            raise ShapeMismatch(
                f"shapes differ: {f.ell}->{f.ell_out} vs {g.ell}->{g.ell_out}"
            )
        if f.scheme != g.scheme:
            raise SchemeMismatch(f"schemes differ: {f.scheme} vs {g.scheme}")

        if op == "add":
            def kernel(cf, _f=f, _g=g):
                return _f.kernel_map(cf) + _g.kernel_map(cf)
            symbol = "+"
        else:
            def kernel(cf, _f=f, _g=g):
                return _f.kernel_map(cf) * _g.kernel_map(cf)
            symbol = "*"
        return CompatibleFunction(
            ell=f.ell,
            ell_out=f.ell_out,
            enumeration=f.enumeration,
            kernel_map=kernel,
            bound_profile=BoundProfile.combine(op, f.bound_profile, g.bound_profile),
            central=f.central and g.central,
            name=f"({f.name}{symbol}{g.name})" if f.name and g.name else "",
        )
    if op == "scale":
        alpha = complex(other)

        def kernel(cf, _f=f, _a=alpha):
            return _f.kernel_map(cf).scale(_a)

        return CompatibleFunction(
            ell=f.ell,
            ell_out=f.ell_out,
            enumeration=f.enumeration,
            kernel_map=kernel,
            bound_profile=BoundProfile.combine("scale", f.bound_profile, alpha=alpha),
            central=f.central,
            name=f"({alpha}*{f.name})" if f.name else "",
        )
    if op == "star":
        def kernel(cf, _f=f):
            return _f.kernel_map(cf).star()

        return CompatibleFunction(
            ell=f.ell,
            ell_out=f.ell_out,
            enumeration=f.enumeration,
            kernel_map=kernel,
            bound_profile=f.bound_profile,
            central=f.central,
            name=f"adj({f.name})" if f.name else "",
        )
    raise ValueError(f"unknown operation {op!r}")


def diagonal(functions) -> CompatibleFunction:
    """Bundle scalar-valued functions into one tuple-valued function.

    Coordinate k of the bundle evaluates exactly as ``functions[k]`` does,
    by construction (same kernel maps, same floats).
    """
    fns = list(functions)
    if not fns:
        raise ShapeMismatch("need at least one component")
    ell = fns[0].ell
    scheme = fns[0].scheme
    for g in fns:
        if g.ell != ell or g.ell_out != 1:
            raise ShapeMismatch("components must be scalar-valued with one shared input length")
        if g.scheme != scheme:
            raise SchemeMismatch("components must share one scheme")

    proj: tuple[int, ...] | None = None
    if all(g.projection_indices and len(g.projection_indices) == 1 for g in fns):
        proj = tuple(g.projection_indices[0] for g in fns)

    def kernel(cf):
        return MatrixTuple(tuple(g.kernel_map(cf).matrices[0] for g in fns))

    profile = fns[0].bound_profile
    for g in fns[1:]:
        # max of bounds, folded through the add combiner (an upper bound)
        profile = BoundProfile.combine("add", profile, g.bound_profile)
    return CompatibleFunction(
        ell=ell,
        ell_out=len(fns),
        enumeration=fns[0].enumeration,
        kernel_map=kernel,
        bound_profile=profile,
        central=all(g.central for g in fns),
        name="(" + ",".join(g.name for g in fns) + ")",
        projection_indices=proj,
    )


def compose(
    g: CompatibleFunction, f: CompatibleFunction, tol: ToleranceConfig = DEFAULT_TOL
) -> CompatibleFunction:
    """Composition g(f(.)): f maps l- to l'-tuples, g consumes l'-tuples.

    The value f(rep) need not be irreducible, so g is evaluated through the
    full extension machinery (decomposition runs inside).
    """
    if g.ell != f.ell_out:
        raise ShapeMismatch(
            f"cannot compose: inner produces {f.ell_out}-tuples, outer takes {g.ell}-tuples"
        )
    if g.scheme != f.scheme:
        raise SchemeMismatch(f"schemes differ: {g.scheme} vs {f.scheme}")

    def kernel(cf):
        inner = f.value_at(cf, tol)
        if g.projection_indices is not None:
            return MatrixTuple(tuple(inner.matrices[j - 1] for j in g.projection_indices))
        return evaluate_at_tuple(g, inner, tol)

    gl, fl = g.bound_profile, f.bound_profile
    if "unrestricted" in (gl.kind, fl.kind):
        profile = BoundProfile.unrestricted()
    elif fl.kind == "bounded":
        profile = BoundProfile.bounded(gl.limit(fl.value))
    else:
        profile = BoundProfile.locally_bounded(lambda r: gl.limit(fl.limit(r)))
    proj = None
    if g.projection_indices is not None and f.projection_indices is not None:
        proj = tuple(f.projection_indices[j - 1] for j in g.projection_indices)
    return CompatibleFunction(
        ell=f.ell,
        ell_out=g.ell_out,
        enumeration=f.enumeration,
        kernel_map=kernel,
        bound_profile=profile,
        central=g.central,
        name=f"({g.name} o {f.name})" if f.name and g.name else "",
        projection_indices=proj,
    )


def pointwise_inverse(
    f: CompatibleFunction, tol: ToleranceConfig = DEFAULT_TOL
) -> CompatibleFunction:
    """Pointwise matrix inverse of a scalar-valued function.

    Raises :class:`SingularValue` at any representative where the smallest
    singular value falls below ``rank_tol`` scale; callers wanting the
    zero-on-singular-set convention use :func:`fticalc.spectra.invert_on`.
    """
    if f.ell_out != 1:
        raise ShapeMismatch("pointwise inverse needs a single-matrix-valued function")

    def kernel(cf):
        a = f.value_at(cf, tol).matrices[0]
        smin = float(np.linalg.svd(a, compute_uv=False)[-1])
        if smin <= tol.rank_tol * (1.0 + operator_norm(a)):
            raise SingularValue(
                f"value at a degree-{cf.degree} representative has smallest "
                f"singular value {smin:.3e}"
            )
        return MatrixTuple((np.linalg.inv(a),))

    return CompatibleFunction(
        ell=f.ell,
        ell_out=1,
        enumeration=f.enumeration,
        kernel_map=kernel,
        bound_profile=BoundProfile.unrestricted(),
        central=f.central,
        name=f"inv({f.name})" if f.name else "inv",
    )


def b_transform_function(ell: int, enumeration: PolynomialEnumeration) -> CompatibleFunction:
    """The contraction ``X -> X (I + |X|)^{-1}`` as an l- to l-tuple function."""
    return CompatibleFunction(
        ell=ell,
        ell_out=ell,
        enumeration=enumeration,
        kernel_map=lambda cf: b_transform(cf.rep),
        bound_profile=BoundProfile.bounded(1.0),
        name="b_transform",
    )


def inv_b_transform_function(ell: int, enumeration: PolynomialEnumeration) -> CompatibleFunction:
    """Inverse of the contraction; defined on tuples of norm < 1."""
    return CompatibleFunction(
        ell=ell,
        ell_out=ell,
        enumeration=enumeration,
        kernel_map=lambda cf: inv_b_transform(cf.rep),
        bound_profile=BoundProfile.unrestricted(),
        name="inv_b_transform",
    )


def evaluate_at_tuple(
    f: CompatibleFunction, x: MatrixTuple, tol: ToleranceConfig = DEFAULT_TOL
) -> MatrixTuple:
    """Value of the unique compatible extension of f's kernel restriction.

    Decomposes ``X = U . (X_1 + ... + X_p)``, canonicalizes each block
    ``K_j = W_j . X_j``, evaluates the kernel at K_j and assembles
    ``U . (W_1^{-1}.f(K_1) + ...)``. Coordinate selections short-circuit.
    """
    if f.ell != x.length:
        raise ShapeMismatch(
            f"function takes {f.ell}-tuples but the input has length {x.length}"
        )
    if f.projection_indices is not None:
        return MatrixTuple(tuple(x.matrices[j - 1] for j in f.projection_indices))
    dec = decompose(x, tol, f.enumeration)
    values = []
    for block in dec.blocks:
        cf = canonicalize(block, f.enumeration, tol, check=False)
        val = f.value_at(cf, tol)
        values.append(unitary_action(cf.witness.conj().T, val, tol))
    u = dec.unitary
    uh = u.conj().T
    coords = tuple(
        u @ block_diag([v.matrices[k] for v in values]) @ uh
        for k in range(f.ell_out)
    )
    return MatrixTuple(coords)
