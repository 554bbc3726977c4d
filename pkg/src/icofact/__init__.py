"""Hierarchical positivity-aware matrix factorization on icosphere meshes."""

from .accel import (
    ExtrapolationKind,
    ExtrapolationState,
    extrapolate_log,
    extrapolate_standard,
    tau_next,
    wrap_step,
)
from .design import (
    CachedProducts,
    DesignColumn,
    DesignMatrix,
    RefinementRecord,
    bump_column,
    initial_design,
    local_error,
    precompute,
    refine,
)
from .errors import (
    ConfigError,
    DataShapeError,
    DivergenceError,
    IcofactError,
    MultistartError,
    RefinementExhaustedError,
)
from .icosphere import (
    IcosphereHierarchy,
    Mesh,
    base_icosahedron,
    build_hierarchy,
    counts,
    face_centers,
    subdivide,
)
from .pipeline import (
    RunResult,
    SchemeConfig,
    benchmark_iteration_time,
    init_factors,
    multistart,
    run,
    sparsity_report,
    synth_data,
)
from .schemes import (
    FactorState,
    SchemeKind,
    analytic_gradients,
    multiplicative_update,
    objective,
    soft_threshold,
    spectral_norm,
    step_dl,
    step_pnnmf,
    step_ppnmf,
    step_spnnmf,
)

__version__ = "0.1.0"

__all__ = [
    "ExtrapolationKind", "ExtrapolationState", "extrapolate_log",
    "extrapolate_standard", "tau_next", "wrap_step",
    "CachedProducts", "DesignColumn", "DesignMatrix", "RefinementRecord",
    "bump_column", "initial_design", "local_error", "precompute", "refine",
    "ConfigError", "DataShapeError", "DivergenceError", "IcofactError",
    "MultistartError", "RefinementExhaustedError",
    "IcosphereHierarchy", "Mesh", "base_icosahedron", "build_hierarchy",
    "counts", "face_centers", "subdivide",
    "RunResult", "SchemeConfig", "benchmark_iteration_time", "init_factors",
    "multistart", "run", "sparsity_report", "synth_data",
    "FactorState", "SchemeKind", "analytic_gradients", "multiplicative_update",
    "objective", "soft_threshold", "spectral_norm",
    "step_dl", "step_pnnmf", "step_ppnmf", "step_spnnmf",
]
