"""Vector cross products and the weak L2 geometry of discretized knot spaces."""

from . import ambient, immersion, knot, octonions, vcp, verification
from .ambient import AmbientSpace, ParallelField, TwistedField, ambient_derivative, exp_map, vcp_at
from .errors import (
    ConfigError,
    DimensionError,
    FrameError,
    ImmersionError,
    NormalityError,
    VcpKnotError,
)
from .immersion import (
    DiscreteImmersion,
    NormalField,
    ParamGrid,
    TangentFrame,
    gradient_field_W,
    induced_volume,
    mean_curvature,
    normal_project,
    reparametrize,
    tangent_frame,
)
from .knot import (
    ConnectionKind,
    ExtensionRule,
    KnotTangent,
    KnotVectorFieldScheme,
    apply_J,
    b_tensor,
    covariant_derivative,
    d_omega2_defect,
    field_value,
    flow,
    l2_inner,
    lie_bracket,
    metric_compatibility_defect,
    nabla_J_defect,
    nijenhuis,
    omega2,
    torsion,
    volume_variation_term,
)
from .vcp import (
    LinearVcp,
    OrientedPlaneElement,
    VcpKind,
    evaluate_chi,
    induced_complex_structure,
    vcp_form,
    verify_vcp_axioms,
)
from .verification import CHECKS, ExperimentSpec, VerificationReport, fit_rate, run_experiment

__version__ = "0.1.0"
