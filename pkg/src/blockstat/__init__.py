"""U-statistics of block-wise moment statistics for weakly dependent series."""
from .asymptotics import (
    LimitLaw,
    centering,
    gamma_squared,
    long_run_variance,
    sigma_squared,
)
from .blocks import BlockScheme, LocalMoments, local_moments, local_statistics, partition
from .dependence import DependenceProfile, check_summability, delta, partial_sum_bound_check
from .errors import (
    BlockStatError,
    BlockTooLong,
    CenteringTooNoisy,
    DegenerateKernel,
    DegenerateMoments,
    DomainViolation,
    EmptySeries,
    InvalidCoefficients,
    MethodUnavailable,
    NonFiniteSeries,
    NonSquareIntegrable,
    TooFewBlocks,
)
from .gfuncs import GSpec, linear_g, log_second_moment_g, make_g, preset_g, register_g
from .harness import McReport, counterexample_demo, empirical_size, validate_theorem1, validate_theorem2
from .pipeline import constancy_test
from .processes import ProcessSpec, generate, generate_batch, generate_coupled
from .ustat import (
    KERNELS,
    Discrete,
    Empirical,
    KernelSpec,
    Normal,
    TestReport,
    gamma_n_squared,
    get_kernel,
    hoeffding,
    u_statistic,
)

__version__ = "0.1.0"
