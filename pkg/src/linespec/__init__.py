"""Line spectral estimation with band-selective filter banks.

The package estimates the number, frequencies and powers of complex
sinusoids in noisy data: the signal is pushed through a normalized
state-space filter bank, the post-transient output matrix feeds an
atomic-norm denoising SDP, and the optimized output covariance yields
the line spectrum through its null-space trigonometric function.
"""

from .anm import (
    RangeGammaSubspace,
    RegParams,
    SdpProblem,
    SdpSolution,
    SolverOptions,
    atomic_norm,
    constraint_residual,
    estimate_noise_variance,
    lambda_heuristic,
    project_range_gamma,
    solve,
)
from .decomp import (
    LineSpectrum,
    RankRule,
    estimate_line_spectrum,
    extract_frequencies,
    null_function,
    numerical_rank,
    recover_powers,
)
from .errors import (
    ConditioningError,
    ConfigError,
    DataFormatError,
    DimensionError,
    EstimationStageError,
    FullRankError,
    InsufficientDataError,
    LineSpecError,
    NotPsdError,
    SolverFailure,
    StabilityError,
    SymmetryError,
)
from .experiments import (
    LambdaPolicy,
    ScenarioConfig,
    TrialRecord,
    frequency_error,
    make_method_pipeline,
    run_scenario,
    run_trial,
)
from .gfilter import (
    GFilter,
    OutputMatrix,
    PoleSpec,
    apply_filter,
    build_jordan_filter,
    design_filter,
    normalize_filter,
    squared_gain_profile,
    transfer_vector,
    transient_length,
)
from .linalg import (
    HermEig,
    hermitian_eig,
    hermitian_sqrt_psd,
    lstsq,
    psd_project,
    solve_discrete_lyapunov,
)
from .signals import (
    CisoidSpec,
    NoiseSpec,
    experiment_frequencies,
    fft_resolution,
    generate_signal,
    snr_to_sigma2,
)

__version__ = "0.1.0"
