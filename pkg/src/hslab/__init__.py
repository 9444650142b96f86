"""Hyperinvariant spectral subspaces of matrices, the principal angles between
them, idempotent-valued spectral measures and random upper-triangular models."""

__version__ = "0.1.0"

from .angles import (
    AngleReport,
    ObliqueIdempotent,
    UnzaReport,
    atom_subset_family,
    disjoint_closed_angle,
    oblique_idempotent,
    principal_angle,
    unza_scan,
    wermer_bound,
)
from .errors import (
    BoundaryAmbiguity,
    ConfigError,
    DegenerateMeasure,
    DomainError,
    HslabError,
    IterationLimit,
    NoSpectralGap,
    RegionSyntaxError,
    SumNotDirect,
    SwapFailure,
)
from .hs import (
    HSProjection,
    growth_validate,
    hs_algebraic,
    hs_join,
    hs_joint_product,
    hs_meet,
    hs_power_limit,
    hs_pushforward_check,
    hs_similarity,
)
from .kernel import (
    SchurForm,
    Subspace,
    abs_op,
    herm_power,
    op_norm,
    reorder_schur,
    schur,
    subspace_distance,
    subspace_intersect,
    subspace_sum,
    tr2_norm,
)
from .measures import (
    DecompositionResult,
    SpectralMeasureTable,
    build_spectral_measure,
    normal_form,
    scalar_nilpotent_split,
    similarity_from_measure,
    spectrality_report,
)
from .models import (
    ModelConfig,
    Thm52Config,
    Thm52Report,
    annulus_partition,
    circular_free_poisson,
    delta_sequence_planner,
    dt_sample,
    example_diag2,
    example_tk,
    example_tk_sum,
    ginibre,
    rdiag_norm_check,
    thm52_experiment,
)
from .regions import (
    All,
    Annulus,
    Complement,
    Disk,
    Empty,
    HalfPlane,
    Intersection,
    PointSet,
    Region,
    Union,
    parse_region,
)
from .spectral import (
    BrownMeasure,
    brown_measure,
    decomposability_check,
    is_quasinilpotent,
    power_limit,
    region_mass,
    spectral_radius,
)
from .tolerances import DEFAULT_TOLS, ToleranceConfig
