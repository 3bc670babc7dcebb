"""Weak-value amplification of a single-photon cross-Kerr phase shift."""
from .coherent_core import (
    CoherentSuperposition,
    FockVector,
    coherent,
    coherent_overlap,
    displace,
    expect_a,
    expect_n,
    norm,
    to_fock,
    vacuum,
)
from .errors import (
    CutoffTooSmall,
    DegeneratePostSelection,
    EmptyRun,
    InvalidArgument,
    NoLight,
    NumericalDegeneracy,
    NumericalError,
    WvaError,
)
from .model import (
    PostSelectionResult,
    ReadoutResult,
    SetupParams,
    delta_opt,
    delta_opt_numeric,
    displaced_probe,
    enhancement_sweep,
    epsilon_of,
    mz_readout,
    post_select,
    weak_value_nb,
)
from .noise import (
    NoiseModel,
    RunConfig,
    SnrPoint,
    simulate_ensemble,
    simulate_run,
    snr_curve,
    variance_analytic,
)
from .oracle import OracleReport, fock_oracle

__version__ = "0.1.0"
