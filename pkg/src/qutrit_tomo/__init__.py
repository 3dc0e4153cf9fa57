"""Qutrit incomplete-tomography toolkit.

Point estimators (maximum von Neumann entropy, maximum Shannon entropy,
center of mass, random, ensemble average) for density matrices constrained
by partially measured mutually unbiased bases, plus region geometry, state
sampling, distance metrics, and a reproducible benchmark harness.
"""

from .bench import (
    ScenarioConfig,
    TrialRecord,
    emit_region_plot_data,
    fixed_random_basis,
    ratio_analysis,
    run_benchmark,
    run_trial,
    summarize,
    write_outputs,
)
from .estimators import Estimate, OptimizerOptions, com, ensemble_mse, mse, mvne, random_estimator
from .exceptions import (
    ConfigError,
    DegenerateFrame,
    DegenerateFutureMeasurement,
    EnsembleTooSmall,
    InconsistentProbabilities,
    InfeasibleRegionSuspected,
    InvalidSimplexPoint,
    NonHermitianInput,
    RegionTooSmall,
    TomographyError,
)
from .measurement import (
    AffineMap,
    Frame,
    MeasuredProbabilities,
    MubSet,
    PriorData,
    born_probabilities,
    build_frame,
    canonical_frame,
    check_unbiased,
    future_transform,
    qutrit_mub,
    reconstruct,
    rho_of_unmeasured,
)
from .metrics import (
    AreaResult,
    DistanceReport,
    angular_distance,
    bures_distance,
    distance_report,
    fidelity,
    hs_distance,
    region_area,
    relative_entropy,
    search_best_measurement,
)
from .qcore import (
    EigenSystem,
    check_density_matrix,
    check_hermitian,
    eig_hermitian,
    is_psd_cholesky,
    min_eigen,
    min_eigen_batch,
    shannon_entropy,
    von_neumann_entropy,
)
from .region import (
    BoundaryMesh,
    ascend_min_eig,
    find_feasible,
    grad_min_eig,
    membership,
    membership_batch,
    min_eig_field,
    min_eig_field_batch,
    min_entropy_boundary_state,
    sample_region,
    trace_boundary,
)
from .sampling import (
    SamplerSpec,
    haar_unitary,
    make_sampler,
    purity,
    random_pure,
    sample_eig_simplex,
    sample_factorized_unitary,
    sample_hs,
    sample_pure_mix,
    sample_rank2,
)

__version__ = "0.1.0"
