"""Threshold calibration anchored to models with known phases.

The classifier cutoffs theta_loc(N) = 2*c_loc/ln N and
theta_ext(N) = 1 - 2*c_ext/ln N carry no numbers of their own; the constants
are pinned so that, at the calibration sizes,

  * every eigenstate of the bond-modulated AAH chain (all critical) stays
    strictly between the cutoffs,
  * the diagonal AAH chain is >= 99% extended at V = t and >= 99% localized
    at V = 4t, with the V = 2t transition point >= 95% critical,
  * Lyapunov exponents separate: localized-labeled states sit above the
    floor while critical-labeled ones stay within the finite-size band.

`calibrate` reproduces the shipped config in src/quasidual/data; the result
of a run is written by scripts/generate_calibration.py.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

LE_FLOOR = 0.05
LE_CRITICAL_COEFF = 16.0
DRIFT_SAFETY = 2.0


@dataclass(frozen=True)
class CalibrationConfig:
    c_loc: float
    c_ext: float
    le_floor: float
    le_critical_coeff: float
    drift_bound: float
    cluster_tol_rel: float = 1e-12
    min_plateau: int = 5
    calibration_sizes: tuple[int, ...] = (987, 2584)
    anchors: dict = field(default_factory=dict)


@functools.lru_cache(maxsize=1)
def load_calibration() -> CalibrationConfig:
    path = resources.files("quasidual").joinpath("data/calibration.json")
    payload = json.loads(path.read_text())
    payload["calibration_sizes"] = tuple(payload.get("calibration_sizes", (987, 2584)))
    return CalibrationConfig(**payload)


def _clustered_fd(spec) -> np.ndarray:
    from .diagnostics import spectrum_fd
    from .models import build_hamiltonian
    from .spectra import diagonalize

    result = diagonalize(build_hamiltonian(spec))
    _, fd = spectrum_fd(result)
    return result.eigenvalues, fd


def _quantile_below(values: np.ndarray, fraction: float) -> float:
    """Largest cutoff theta with #(values < theta) <= fraction * len."""
    v = np.sort(values)
    k = int(math.floor(fraction * len(v)))
    return float(v[k])


def _quantile_above(values: np.ndarray, fraction: float) -> float:
    """Smallest cutoff theta with #(values > theta) <= fraction * len."""
    v = np.sort(values)
    k = int(math.floor(fraction * len(v)))
    return float(v[len(v) - 1 - k])


def calibrate(u_small: int = 16, u_large: int = 18) -> CalibrationConfig:
    """Measure the anchor models and derive the threshold constants.

    Runs the full anchor battery at N = Fib(u_small), Fib(u_large); takes a
    couple of minutes at the default sizes 987 and 2584.
    """
    from .diagnostics import spectrum_fd
    from .lyapunov import lyapunov_spectrum
    from .models import ModelSpec, build_hamiltonian, fibonacci_tau
    from .spectra import diagonalize

    taus = {u: fibonacci_tau(u) for u in (u_small, u_large)}
    sizes = {u: taus[u].q for u in taus}
    anchors: dict = {}

    offdiag = {}
    for u, tau in taus.items():
        _, fd = _clustered_fd(ModelSpec.off_diagonal_aah(1.0, 1.0, tau))
        offdiag[sizes[u]] = fd
        anchors[f"offdiag_fd_min_N{sizes[u]}"] = float(fd.min())
        anchors[f"offdiag_fd_max_N{sizes[u]}"] = float(fd.max())

    tau_l = taus[u_large]
    N_l = sizes[u_large]
    lnN_l = math.log(N_l)
    diag = {}
    for V in (1.0, 2.0, 4.0):
        _, fd = _clustered_fd(ModelSpec.diagonal_aah(1.0, V, tau_l))
        diag[V] = fd

    # extended-side constant: theta_ext above every critical FD at both sizes
    # and above all but 5% of V=2t (upper bounds on c), below all but 1% of
    # the V=t extended FDs (lower bound on c)
    c_hi = min((1.0 - offdiag[N].max()) * math.log(N) / 2.0 for N in offdiag)
    c_hi = min(c_hi, (1.0 - _quantile_above(diag[2.0], 0.05)) * lnN_l / 2.0)
    c_lo = (1.0 - _quantile_below(diag[1.0], 0.01)) * lnN_l / 2.0
    if c_lo >= c_hi:
        raise RuntimeError(
            f"no feasible c_ext: need c in [{c_lo:.4f}, {c_hi:.4f}] "
            f"(anchor distributions overlap)"
        )
    c_ext = 0.5 * (c_lo + c_hi)
    anchors["c_ext_interval"] = [c_lo, c_hi]

    # localized-side interval from the same anchors
    l_hi = min(offdiag[N].min() * math.log(N) / 2.0 for N in offdiag)
    l_hi = min(l_hi, _quantile_below(diag[2.0], 0.05) * lnN_l / 2.0)
    l_lo = _quantile_above(diag[4.0], 0.01) * lnN_l / 2.0
    if l_lo >= l_hi:
        raise RuntimeError(f"no feasible c_loc: need c in [{l_lo:.4f}, {l_hi:.4f}]")
    anchors["c_loc_interval"] = [l_lo, l_hi]

    # within the feasible interval, place theta_loc where the Lyapunov
    # exponent agrees best with the labels of the nearest-neighbor chain
    chain_spec = ModelSpec.power_law(None, 3.0, 2, tau_l)
    result = diagonalize(build_hamiltonian(chain_spec))
    _, fd_chain = spectrum_fd(result)
    gammas = np.array([r.gamma for r in lyapunov_spectrum(chain_spec, result.eigenvalues)])
    le_band = LE_CRITICAL_COEFF * lnN_l / N_l
    theta_e = 1.0 - 2.0 * c_ext / lnN_l

    def le_agreement(c: float) -> float:
        theta_l = 2.0 * c / lnN_l
        loc = fd_chain < theta_l
        crit = (fd_chain >= theta_l) & (fd_chain <= theta_e)
        frac_loc = float(np.mean(gammas[loc] >= LE_FLOOR)) if loc.any() else 0.0
        frac_crit = float(np.mean(np.abs(gammas[crit]) <= le_band)) if crit.any() else 0.0
        return min(frac_loc, frac_crit)

    candidates = np.linspace(l_lo, l_hi, 201)
    scores = np.array([le_agreement(c) for c in candidates])
    best = scores.max()
    good = candidates[scores >= best - 1e-12]
    c_loc = float(0.5 * (good.min() + good.max()))
    anchors["le_agreement"] = best

    # size drift of the all-critical chain, index-matched across sizes
    fd_s = offdiag[sizes[u_small]]
    fd_L = offdiag[sizes[u_large]]
    frac_small = np.arange(1, len(fd_s) + 1) / (len(fd_s) + 1)
    frac_large = np.arange(1, len(fd_L) + 1) / (len(fd_L) + 1)
    drift = np.abs(fd_s - np.interp(frac_small, frac_large, fd_L))
    anchors["offdiag_drift_median"] = float(np.median(drift))
    drift_bound = DRIFT_SAFETY * float(np.median(drift))

    return CalibrationConfig(
        c_loc=round(c_loc, 4),
        c_ext=round(float(c_ext), 4),
        le_floor=LE_FLOOR,
        le_critical_coeff=LE_CRITICAL_COEFF,
        drift_bound=round(drift_bound, 4),
        calibration_sizes=(sizes[u_small], sizes[u_large]),
        anchors=anchors,
    )


def config_to_json(cfg: CalibrationConfig) -> str:
    payload = asdict(cfg)
    payload["calibration_sizes"] = list(cfg.calibration_sizes)
    return json.dumps(payload, indent=1)
