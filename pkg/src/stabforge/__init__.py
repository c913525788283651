"""Product stability conditions on powers of the projective line.

Construction and verification of product-type stability data, exact
central-charge arithmetic on surfaces, oscillatory-integral charges with a
Bessel-series oracle, and special Lagrangian curve tracing.
"""

from .errors import (
    ConfigInvalid,
    FlowSingular,
    InconsistentData,
    InvalidPhaseStep,
    IOFailure,
    NonMonotone,
    NotAdmissible,
    NotStable,
    QuadratureNotConverged,
    RearrangementBlocked,
    StabforgeError,
    StepCollapse,
    SupportViolated,
    TrackingLost,
    UnsupportedObject,
    ZeroClass,
)
from .lattice import (
    POINT,
    FactorClass,
    FactorSymbol,
    FormalObject,
    Generator,
    KClass,
    all_bit_vectors,
    bits_leq,
    decomposable_class,
    euler_matrix,
    euler_pairing,
    external_product,
    factor_hom_degrees,
    hom_degrees,
    k_class,
    line,
    line_bundle,
    line_bundle_basis_matrix,
    skyscraper,
    subset_index,
    symbol_class,
)
from .p1 import (
    DEFAULT_WINDOW,
    AlgebraicStab,
    GeometricStab,
    StabP1,
    central_charge_p1,
    hn_p1,
    is_geometric,
    phase_p1,
    stable_objects_p1,
)
from .products import (
    AxiomReport,
    ExtExceptionalResult,
    GluingCheckResult,
    ProductStab,
    PureAlgebraicCollection,
    ShiftTable,
    admissible,
    build_pure_algebraic,
    ext_exceptional_check,
    factor_support_constant,
    gluing_vanishing_check,
    heart_shift,
    hn_product,
    product_charge,
    product_phase,
    pure_algebraic_product,
    recover_factors,
    stable_generators,
    sup_norm,
    support_constant,
    verify_axioms,
)
from .surfaces import (
    SurfaceChargeData,
    SurfaceClass,
    charge_bh,
    elliptic_factor_stable,
    elliptic_product_charge,
    external_surface_class,
    factor_charge,
    geom_product,
    product_decomposition_check,
    product_identity_residual,
    surface_phase,
)
from .oscillatory import (
    CycleSpec,
    LGModel,
    MonodromyReport,
    ThimbleResult,
    bessel_term_sum,
    circle_charge,
    circle_closed_form,
    monodromy_probe,
    product_charge_numeric,
    saddle_point_estimate,
    superpotential,
    tensor_quadrature_2d,
    trace_thimble,
)
from .slag import (
    ClosedOrbitSearch,
    ProductPhaseResult,
    SLagProblem,
    TracedPath,
    find_closed_slag,
    omega_density,
    product_phase_check,
    trace_slag,
)

__version__ = "0.1.0"
