"""Revenue gaps between anonymous pricing, sequential posted pricing,
anonymous reserve and Myerson's optimal auction."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("mechgap")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

from mechgap.distributions import (
    EqualRevenueTruncated,
    Instance,
    RootIrregular,
    Triangular,
    TriangularLimit,
)
from mechgap.errors import (
    ConvergenceError,
    DomainError,
    IrregularDistributionError,
    MechgapError,
    NotTriangularError,
)
from mechgap.mechanisms import (
    MonteCarloConfig,
    RevenueReport,
    SpmPolicy,
    ap_optimal,
    ap_revenue,
    ar_optimal,
    ar_revenue,
    spm_opt_triangular,
    spm_revenue,
)
from mechgap.numerics import DEFAULT_TOL, ToleranceConfig
from mechgap.special import ar_upper_constant, c_star

__all__ = [
    "ConvergenceError",
    "DEFAULT_TOL",
    "DomainError",
    "EqualRevenueTruncated",
    "Instance",
    "IrregularDistributionError",
    "MechgapError",
    "MonteCarloConfig",
    "NotTriangularError",
    "RevenueReport",
    "RootIrregular",
    "SpmPolicy",
    "ToleranceConfig",
    "Triangular",
    "TriangularLimit",
    "__version__",
    "ap_optimal",
    "ap_revenue",
    "ar_optimal",
    "ar_revenue",
    "ar_upper_constant",
    "c_star",
    "spm_opt_triangular",
    "spm_revenue",
]
