"""brakeopt: safety-gear brake mechanics, uncertainty quantification and design optimization."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AllStartsFailed,
    BrakeOptError,
    DegenerateEnsemble,
    DegenerateSample,
    InsufficientSamples,
    MeanOutOfSupport,
    NoFeasiblePoint,
    ParseError,
    SingularDenominator,
    SingularSystem,
    ValidationError,
)
from .mechmodel import (  # noqa: F401
    BrakeGeometry,
    EquilibriumSolution,
    FrictionSet,
    LoadCase,
    braking_force,
    normal_forces,
    solve_equilibrium,
)
from .maxent import (  # noqa: F401
    InputModel,
    TruncatedExponential,
    build_input_model,
    fit_truncexp,
    mean_of,
    sample_inverse_cdf,
)
from .mc_uq import (  # noqa: F401
    Ensemble,
    SummaryStats,
    UniformMatrix,
    convergence_trace,
    draw_uniform_matrix,
    kde,
    propagate,
    summarize,
)
from .optimizer import (  # noqa: F401
    ConstraintSpec,
    DesignBox,
    DesignPoint,
    GridScan,
    ModelSetup,
    OptimizationResult,
    RobustWeights,
    classical_objective,
    empirical_constraint,
    grid_scan,
    optimize_classical,
    optimize_robust,
    robust_objective,
)
from .config import Config, config_sha256, config_to_text, default_config, load_config  # noqa: F401
