"""Constants used throughout the levyfock package."""

# Measure handling
WEIGHT_SUM_TOLERANCE: float = 1e-12
"""Allowed deviation of the normalized jump-measure weights from a total of one."""

DEFAULT_GAMMA_NODES: int = 64
"""Reference quadrature nodes used to discretize the Gamma jump measure."""

DEFAULT_GAMMA_CUTOFF: float = 80.0
"""Upper integration limit for the Gauss-Legendre discretization of the Gamma measure."""

DEFAULT_PASCAL_TERMS: int = 120
"""Number of atoms kept from the Pascal (negative binomial) Lévy measure."""

# Recurrence construction
POSITIVITY_TOLERANCE: float = 1e-13
"""Squared off-diagonal coefficients below this fraction of the second moment abort Stieltjes."""

CLUSTER_TOLERANCE: float = 1e-10
"""Relative gap below which two Gauss nodes are reported as clustered."""

# Truncation defaults
DEFAULT_JACOBI_ORDER: int = 8
"""Default number of recurrence levels N."""

DEFAULT_LEVELS: int = 6
"""Default number of Fock levels n_max."""

# Verification
DEFAULT_RELATIVE_TOLERANCE: float = 1e-8
"""Relative agreement required between moment computations."""

DEFAULT_ABSOLUTE_TOLERANCE: float = 1e-10
"""Absolute agreement required where the reference value is zero."""

OPERATOR_TOLERANCE: float = 1e-10
"""Tolerance for adjointness, symmetry and commutator checks."""

PATH_TOLERANCE: float = 1e-12
"""Tolerance for checks comparing two assemblies of the same operator."""

DEFAULT_TRIALS: int = 100
"""Random trials per operator check in the property suite."""

DEFAULT_SEED: int = 20240601
"""Seed of the deterministic random generator when a config does not give one."""

HANKEL_PARAMETERS: tuple[float, ...] = (0.25, 1.0, 2.0)
"""One-point grid weights t at which the composition-weight identity is checked."""

HANKEL_MAX_ORDER: int = 5
"""Highest chaos order checked by the composition-weight identity for Meixner-class measures."""

GENERAL_HANKEL_ORDER: int = 3
"""Highest chaos order at which the composition-weight identity holds for every jump measure."""

# Output
CSV_PRECISION: int = 17
"""Significant digits written to CSV tables and vector dumps."""

OUTPUT_DIR_ENV: str = "LEVYFOCK_OUT_DIR"
"""Environment variable overriding the output directory."""

DEFAULT_OUTPUT_DIR: str = "out"
"""Output directory used when neither config, flag nor environment gives one."""
