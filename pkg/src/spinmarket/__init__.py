"""Multi-asset coupled spin-lattice market simulator and analysis pipeline."""

__version__ = "0.1.0"

from .coupling import (
    CouplingDiagnostics,
    CouplingMatrix,
    CouplingSpec,
    generate_coupling,
    read_coupling,
    validate_coupling,
    write_coupling_dense,
    write_coupling_sparse,
)
from .market import (
    MarketSimulation,
    MarketState,
    ModelParams,
    RngPlan,
    SpinLattice,
    flip_probability,
    local_field,
    magnetization,
    neighbor_table,
    run_simulation,
)
from .series import (
    AcfCurve,
    DegenerateSeriesError,
    DistributionStats,
    ReturnPanel,
    TauIntEstimate,
    VolatilityIndexSeries,
    WindowSearchError,
    acf,
    distribution_stats,
    integrated_autocorr_time,
    mean_acf,
    normalize_returns,
    shuffled_panel,
    volatility_index,
)
from .spectra import (
    MpReference,
    SpectralSummary,
    SpectralTrajectory,
    crf,
    crf_curve,
    eig_sym,
    ipr,
    ipr6,
    mp_reference,
    spectral_trajectory,
    summarize_window,
)
from .xcorr import (
    CorrelationMatrix,
    WindowSpec,
    rolling_correlations,
    window_ends,
)

__all__ = [
    "__version__",
    "AcfCurve",
    "CorrelationMatrix",
    "CouplingDiagnostics",
    "CouplingMatrix",
    "CouplingSpec",
    "DegenerateSeriesError",
    "DistributionStats",
    "MarketSimulation",
    "MarketState",
    "ModelParams",
    "MpReference",
    "ReturnPanel",
    "RngPlan",
    "SpectralSummary",
    "SpectralTrajectory",
    "SpinLattice",
    "TauIntEstimate",
    "VolatilityIndexSeries",
    "WindowSearchError",
    "WindowSpec",
    "acf",
    "crf",
    "crf_curve",
    "distribution_stats",
    "eig_sym",
    "flip_probability",
    "generate_coupling",
    "integrated_autocorr_time",
    "ipr",
    "ipr6",
    "local_field",
    "magnetization",
    "mean_acf",
    "mp_reference",
    "neighbor_table",
    "normalize_returns",
    "read_coupling",
    "rolling_correlations",
    "run_simulation",
    "shuffled_panel",
    "spectral_trajectory",
    "summarize_window",
    "validate_coupling",
    "volatility_index",
    "window_ends",
    "write_coupling_dense",
    "write_coupling_sparse",
]
