"""Effective dipolar-hopping chain for a Rydberg-atom array and its quench
dynamics.

The single-excitation model is the 1/r^3 power-law chain with a single cosine
modulation (the b-infinity limiting model at exponent a = 3), scaled by the
dipolar energy prefactor A.  Dynamics uses the exact spectral decomposition:
psi(t) = sum_j exp(-i E_j t) <v_j|psi0> v_j.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import diagnostics as diag_mod
from .models import Boundary, ModelSpec, TauApproximant, build_hamiltonian
from .spectra import SpectrumResult, diagonalize

DIPOLAR_EXPONENT = 3.0
DEFAULT_RANGE = 3
DEFAULT_TIME_POINTS = 200
DEFAULT_HORIZON_FACTOR = 1e3


@dataclass(frozen=True)
class RydbergModelSpec:
    """Single-excitation dipolar chain: prefactor A, truncation range d."""

    scale: float
    tau: TauApproximant
    size: int | None = None
    d: int = DEFAULT_RANGE
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("dipolar prefactor A must be positive")
        if self.d < 1:
            raise ValueError("hopping range d must be >= 1")

    @property
    def n_sites(self) -> int:
        return self.tau.q if self.size is None else self.size

    def to_model_spec(self) -> ModelSpec:
        return ModelSpec.power_law(DIPOLAR_EXPONENT, None, self.d, self.tau,
                                   size=self.size, boundary=self.boundary)

    def dual_model_spec(self) -> ModelSpec:
        """Nearest-neighbor partner with the kernel roles exchanged."""
        return ModelSpec.power_law(None, DIPOLAR_EXPONENT, self.d, self.tau,
                                   size=self.size, boundary=self.boundary)


@dataclass(frozen=True)
class QuenchResult:
    times: np.ndarray
    site_populations: np.ndarray     # (N, T), |psi_n(t)|^2
    return_probability: np.ndarray   # (T,)
    participation_ratio: np.ndarray  # (T,), 1 / sum_n |psi_n(t)|^4


def build_rydberg_hamiltonian(spec: RydbergModelSpec) -> np.ndarray:
    """A times the truncated 1/r^3 single-cosine chain."""
    return spec.scale * build_hamiltonian(spec.to_model_spec())


def default_time_grid(scale: float, points: int = DEFAULT_TIME_POINTS,
                      horizon_factor: float = DEFAULT_HORIZON_FACTOR) -> np.ndarray:
    """t = 0 plus log-spaced samples up to the slow timescale 1e3/A."""
    horizon = horizon_factor / scale
    grid = np.geomspace(1e-2 / scale, horizon, points - 1)
    return np.concatenate([[0.0], grid])


def quench(spectrum: SpectrumResult, initial: np.ndarray,
           times: np.ndarray) -> QuenchResult:
    """Unitary evolution of a normalized initial state through the spectrum."""
    if spectrum.eigenvectors is None:
        raise ValueError("quench needs eigenvectors")
    initial = np.asarray(initial, dtype=complex)
    if initial.shape != (spectrum.size,):
        raise ValueError("initial state has the wrong length")
    norm = float(np.sum(np.abs(initial) ** 2))
    if abs(norm - 1.0) > 1e-10:
        raise ValueError("initial state is not normalized")
    times = np.asarray(times, dtype=float)
    V = spectrum.eigenvectors
    coeff = V.T @ initial
    phases = np.exp(-1j * np.outer(spectrum.eigenvalues, times))
    psi_t = V @ (phases * coeff[:, None])
    populations = np.abs(psi_t) ** 2
    return_prob = np.abs(initial.conj() @ psi_t) ** 2
    participation = 1.0 / np.sum(populations**2, axis=0)
    return QuenchResult(times=times, site_populations=populations,
                        return_probability=return_prob,
                        participation_ratio=participation)


def quench_model(spec: RydbergModelSpec, initial: np.ndarray,
                 times: np.ndarray | None = None) -> QuenchResult:
    H = build_rydberg_hamiltonian(spec)
    if times is None:
        times = default_time_grid(spec.scale)
    return quench(diagonalize(H), initial, times)


def compare_to_ideal(spec: RydbergModelSpec, d_values: list[int],
                     thresholds: diag_mod.ClassificationThresholds | None = None,
                     min_plateau: int = diag_mod.DEFAULT_MIN_PLATEAU) -> list[dict]:
    """Mobility edges and window MFDs of the dipolar model and its dual,
    per hopping range d; flags edges that moved more than 2/N between
    consecutive d values."""
    if thresholds is None:
        thresholds = diag_mod.ClassificationThresholds.from_calibration()
    tau = spec.tau
    N = spec.n_sites
    P4 = 2.0 * tau.value - 1.0
    tol = 2.0 / N
    rows = []
    prev: dict[str, dict] = {}
    for d in sorted(d_values):
        row = {"d": d, "N": N, "p": tau.p, "q": tau.q}
        for side in ("model", "dual"):
            rspec = RydbergModelSpec(spec.scale, tau, spec.size, d, spec.boundary)
            mspec = rspec.to_model_spec() if side == "model" else rspec.dual_model_spec()
            H = build_hamiltonian(mspec)
            if side == "model":
                H *= spec.scale
            result = diagonalize(H)
            diags = diag_mod.diagnose_spectrum(result, thresholds)
            edge_set = diag_mod.detect_mobility_edges(diags, min_plateau)
            matches = diag_mod.match_edges(edge_set, tau, tol)
            matched = {m["matched"]: m["position"] for m in matches if m["matched"]}
            side_info = {
                "edges": [m["position"] for m in matches],
                "matched": matched,
                "mfd_critical": diag_mod.mean_fd(diags, (P4, 1.0 - P4)),
                "mfd_outer": diag_mod.mean_fd(diags, (P4, 1.0 - P4), complement=True),
            }
            if side in prev:
                moved = {
                    name: abs(pos - prev[side]["matched"][name]) > tol
                    for name, pos in matched.items() if name in prev[side]["matched"]
                }
                side_info["edges_moved"] = any(moved.values())
                side_info["moved_detail"] = moved
            prev[side] = side_info
            row[side] = side_info
        rows.append(row)
    return rows


def write_comparison_json(path, rows: list[dict]) -> None:
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=1)


def write_quench_csv(path_long, path_summary, result: QuenchResult) -> None:
    """Long format (t, n, population) plus the (t, return_prob, participation)
    summary."""
    with open(path_long, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "n", "population"])
        for ti, t in enumerate(result.times):
            for n in range(result.site_populations.shape[0]):
                writer.writerow([repr(float(t)), n + 1,
                                 repr(float(result.site_populations[n, ti]))])
    with open(path_summary, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "return_prob", "participation"])
        for ti, t in enumerate(result.times):
            writer.writerow([repr(float(t)),
                             repr(float(result.return_probability[ti])),
                             repr(float(result.participation_ratio[ti]))])

