"""Numerical functional calculus for tuples of complex matrices.

Canonical forms of irreducible tuples under unitary conjugation, compatible
matrix-valued functions represented on those forms, finite direct sums of
irreducible sectors as operator models, and projection-valued spectral
measures with principal spectra.
"""

__version__ = "0.1.0"

from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    herm_eig,
    matrix_abs,
    nullspace,
    operator_norm,
)
from .tower import (
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
from .structure import (
    Decomposition,
    commutant_basis,
    decompose,
    double_commutant_basis,
    is_irreducible,
    word_span_dimension,
)
from .canon import (
    DEFAULT_ENUMERATION,
    CanonicalForm,
    PolynomialEnumeration,
    are_equivalent,
    canonicalize,
    trace_fingerprint,
)
from .calculus import (
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
from .operators import (
    FtiOperator,
    Sector,
    apply,
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
    with_enumeration,
)
from .spectra import (
    MembershipCertificate,
    ProductElement,
    SpectralSet,
    degree_in,
    everything,
    integrate_step,
    invert_on,
    kernel_transport,
    module_mult,
    norm_ball,
    nothing,
    predicate_set,
    principal_spectrum,
    spectral_measure,
    spectrum_membership,
    trace_window,
    transport_function,
    type_projection,
    zero_support_test,
)

__all__ = [name for name in dir() if not name.startswith("_")]
