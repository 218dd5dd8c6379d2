"""Randomized quantum-ergodic eigenbases of finite Cayley graphs.

The package builds adjacency eigenbases of Cayley graphs by Haar-mixing
Fourier blocks of the group's irreducible representations, measures how
evenly the resulting eigenvectors spread over the group (quantum
ergodicity), Monte-Carlo-checks the concentration inequalities behind the
construction, and assembles product graphs whose spectral degeneracies
defeat equidistribution.
"""

from .groups import (
    CayleyGraph,
    FiniteGroup,
    GenSet,
    GroupError,
    IdentityInGenerators,
    LengthMismatch,
    MalformedGroupFile,
    NoIdentity,
    NotAssociative,
    NotGenerating,
    NotInvertible,
    NotSymmetric,
    ParamOutOfRange,
    TrivialGroup,
    UnsupportedFamily,
    adjacency_apply,
    catalog_group,
    cayley_graph,
    conjugacy_classes,
    dense_adjacency,
    genset,
    group_from_table,
    load_group,
    quasirandom_degree,
    save_group,
)
from .irreps import (
    InvalidIrreps,
    Irrep,
    IrrepSet,
    NoConstructionRoute,
    ValidationReport,
    irreps_for,
    load_irreps,
    require_valid,
    save_irreps,
    total_dim_ratio,
    validate_irreps,
)
from .sampling import (
    NotUnitary,
    SecondMoment,
    geodesic_distance,
    haar_sample,
    haar_sample_batch,
    hs_norm,
    second_moment_check,
    stream,
)
from .basis import (
    EigenBasis,
    FourierBlock,
    IncompleteIrreps,
    ModeUnavailable,
    NotHermitian,
    QeReport,
    build_basis,
    eigen_residual,
    fourier_block,
    gram_defect,
    load_basis,
    predicted_epsilon,
    qe_report,
    qe_statistic,
    qe_statistic_many,
    qe_sup_estimate,
    save_basis,
)
from .concentration import (
    CURIOSITY_BETAS,
    TAIL_RATE,
    EmptyBlocks,
    LipschitzResult,
    NonZeroTrace,
    TailExperiment,
    TailResult,
    TailRow,
    alpha_of,
    get_preset,
    lipschitz_check,
    preset_names,
    run_tail,
)
from .delocalization import (
    BasisMismatch,
    DelocEntry,
    DelocReport,
    EmptySpace,
    NotPrime,
    ProductInstance,
    ProductLine,
    PTooSmall,
    SpectrumTable,
    cycle_character_span,
    deloc_ratio,
    deloc_report,
    graph_spectrum,
    make_product,
    product_spectrum,
    qe_lower_witness,
)

__version__ = "0.1.0"
