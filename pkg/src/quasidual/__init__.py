"""Self-dual quasiperiodic chains: model construction, duality checks, and
localization diagnostics at desk scale."""

from .models import (
    Boundary,
    HoppingKernel,
    KernelFamily,
    LimitFlag,
    ModelSpec,
    TauApproximant,
    bond_sequence,
    build_hamiltonian,
    fibonacci_tau,
    modulation_F,
    nearest_neighbor_parts,
)
from .spectra import SpectrumResult, diagonalize, diagonalize_tridiagonal
from .diagnostics import (
    ClassificationThresholds,
    MobilityEdgeSet,
    Phase,
    SpacingRecord,
    StateDiagnostics,
    classify_phases,
    detect_mobility_edges,
    diagnose_spectrum,
    even_odd_spacings,
    fractal_dimension,
    mean_fd,
    spectral_symmetry_check,
)
from .duality import DualityReport, DualTransform, check_duality, dual_state, make_transform
from .lyapunov import LyapunovResult, TransferChain, lyapunov_exponent, lyapunov_spectrum
from .rydberg import QuenchResult, RydbergModelSpec, build_rydberg_hamiltonian, quench
from .sweep import ScalingFit, SweepPlan, run_sweep, scaling_fit
from .calibration import CalibrationConfig, calibrate, load_calibration

__version__ = "0.1.0"
