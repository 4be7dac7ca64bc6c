"""Fourier-character dual transform and finite-size duality checks.

All complex arithmetic lives here; the Hamiltonians themselves stay real
symmetric.  With tau = p/N and gcd(p, N) = 1 the transform
U[k, m] = exp(-2i*pi*(p/N)*m*k)/sqrt(N) is a permuted discrete Fourier
matrix, hence exactly unitary, and conjugation by U maps a model onto its
partner with the two kernel roles exchanged.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .models import Boundary, KernelFamily, ModelSpec, TauApproximant, build_hamiltonian
from .spectra import diagonalize

# complex N x N storage above this size is rejected (memory realism)
MAX_DENSE_TRANSFORM = 8192


@dataclass(frozen=True)
class DualTransform:
    size: int
    tau: TauApproximant
    matrix: np.ndarray
    unitarity_residual: float


@dataclass(frozen=True)
class DualityReport:
    """How closely the model H(a,b) maps onto H(b,a) at finite size."""

    size: int
    tau: TauApproximant
    spectral_deviation: float       # max_j |E_j(a,b) - E_j(b,a)| / total bandwidth
    conjugation_residual: float     # max-entry |U H(a,b) U+ - H(b,a)|
    self_dual: bool


def character_orthogonality_residual(tau: TauApproximant, N: int, k1: int, k2: int) -> float:
    """|<row_k1, row_k2> - delta| via the direct O(N) phase sum.

    Cheap unitarity probe that never materializes the transform; usable at
    sizes far beyond the dense representation.
    """
    m = np.arange(1, N + 1, dtype=np.int64)
    phase = np.mod(np.mod((k2 - k1) * tau.p, N) * m, N)
    total = np.exp(2j * np.pi * phase / N).sum() / N
    expected = 1.0 if k1 == k2 else 0.0
    return abs(total - expected)


def make_transform(N: int, tau: TauApproximant) -> DualTransform:
    """Dense dual transform for q = N Fibonacci approximants.

    Rejects gcd(p, N) != 1 (rows would not be orthonormal) and q != N
    (the character set would be incomplete).
    """
    if tau.q != N:
        raise ValueError(f"transform requires q = N, got q={tau.q}, N={N}")
    if math.gcd(tau.p, N) != 1:
        raise ValueError(f"gcd(p, N) = {math.gcd(tau.p, N)} != 1; transform is not unitary")
    if N > MAX_DENSE_TRANSFORM:
        raise ValueError(
            f"dense transform at N={N} exceeds the {MAX_DENSE_TRANSFORM} site cap; "
            "use character_orthogonality_residual for large-N checks"
        )
    k = np.arange(1, N + 1, dtype=np.int64)
    phase = np.mod(np.outer(k, k) * (tau.p % N), N)
    U = np.exp(-2j * np.pi * phase / N) / math.sqrt(N)
    if N <= 1024:
        gram = U @ U.conj().T
        residual = float(np.abs(gram - np.eye(N)).max())
    else:
        # sampled row Gram keeps the check O(sample * N^2)
        rows = np.arange(0, N, max(1, N // 128))
        gram = U[rows] @ U.conj().T
        eye = np.zeros_like(gram)
        eye[np.arange(len(rows)), rows] = 1.0
        residual = float(np.abs(gram - eye).max())
    return DualTransform(size=N, tau=tau, matrix=U, unitarity_residual=residual)


def dual_state(transform: DualTransform, state: np.ndarray) -> np.ndarray:
    """Image U @ state of a normalized state in the dual basis."""
    state = np.asarray(state)
    if state.shape != (transform.size,):
        raise ValueError(f"state length {state.shape} does not match N={transform.size}")
    norm = float(np.sum(np.abs(state) ** 2))
    if abs(norm - 1.0) > 1e-10:
        raise ValueError("state is not normalized")
    return transform.matrix @ state


def _swapped_roles(specA: ModelSpec, specB: ModelSpec) -> bool:
    # also covers the limiting pair: the a-infinity chain is dual to b-infinity
    return (specA.distance_kernel == specB.modulation_kernel
            and specA.modulation_kernel == specB.distance_kernel)


def check_duality(specA: ModelSpec, specB: ModelSpec,
                  conjugation: bool = True) -> DualityReport:
    """Quantify the duality between H(a,b) and H(b,a).

    Both specs must share N, tau and periodic boundary, with the kernel roles
    exchanged.  The spectral deviation pairs eigenvalues by ascending order;
    the conjugation residual compares U H(a,b) U+ against H(b,a) entrywise.
    """
    if specA.size != specB.size or specA.tau != specB.tau:
        raise ValueError("duality check requires matching N and tau")
    if specA.boundary is not Boundary.PERIODIC or specB.boundary is not Boundary.PERIODIC:
        raise ValueError("duality checks presume the periodic character basis")
    if specA.distance_kernel.family is KernelFamily.DIAGONAL_AAH:
        raise ValueError("diagonal AAH calibration model is outside the duality family")
    if not _swapped_roles(specA, specB):
        raise ValueError("specB must have the kernel roles of specA exchanged")

    HA = build_hamiltonian(specA)
    HB = build_hamiltonian(specB)
    EA = diagonalize(HA, compute_vectors=False).eigenvalues
    EB = diagonalize(HB, compute_vectors=False).eigenvalues
    lo = min(float(EA[0]), float(EB[0]))
    hi = max(float(EA[-1]), float(EB[-1]))
    bandwidth = max(hi - lo, np.finfo(float).tiny)
    spectral = float(np.abs(EA - EB).max()) / bandwidth

    conj_residual = math.nan
    if conjugation:
        transform = make_transform(specA.size, specA.tau)
        U = transform.matrix
        conj_residual = float(np.abs(U @ HA @ U.conj().T - HB).max())

    return DualityReport(
        size=specA.size,
        tau=specA.tau,
        spectral_deviation=spectral,
        conjugation_residual=conj_residual,
        self_dual=specA == specB,
    )


def report_to_dict(report: DualityReport, params: dict) -> dict:
    out = {
        "N": report.size,
        "p": report.tau.p,
        "q": report.tau.q,
        "a": params.get("a"),
        "b": params.get("b"),
        "d": params.get("d"),
        "spectral_deviation": report.spectral_deviation,
        "conjugation_residual": report.conjugation_residual,
        "self_dual": report.self_dual,
    }
    return out


def write_report_json(path, report: DualityReport, params: dict) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report, params), fh, indent=1)
