"""Dense real-symmetric eigendecomposition with a tridiagonal fast path."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

# above this size the O(N) workspace MRRR driver replaces divide-and-conquer
# to keep peak memory near 3*N^2 doubles
_EVR_SIZE = 4500

_RESIDUAL_TOL_REL = 1e-9


@dataclass(frozen=True)
class SpectrumResult:
    """Ascending eigenvalues with orthonormal eigenvector columns.

    Column j pairs with eigenvalue j.  `eigenvectors` is None when only the
    spectrum was requested; `residual` is max_j ||H v_j - E_j v_j||_inf.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residual: float

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    @property
    def bandwidth(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])


def _fix_signs(v: np.ndarray) -> np.ndarray:
    """First nonzero component of every column made positive (reproducibility)."""
    scale = np.abs(v).max(axis=0)
    scale[scale == 0.0] = 1.0
    mask = np.abs(v) > 1e-12 * scale
    first = mask.argmax(axis=0)
    signs = np.sign(v[first, np.arange(v.shape[1])])
    signs[signs == 0.0] = 1.0
    return v * signs


def _residual(H: np.ndarray, w: np.ndarray, v: np.ndarray, block: int = 512) -> float:
    worst = 0.0
    for lo in range(0, v.shape[1], block):
        hi = min(lo + block, v.shape[1])
        r = H @ v[:, lo:hi] - v[:, lo:hi] * w[lo:hi]
        worst = max(worst, float(np.abs(r).max()))
    return worst


def diagonalize(H: np.ndarray, compute_vectors: bool = True) -> SpectrumResult:
    """Full eigendecomposition of a dense real symmetric matrix.

    Deterministic (fixed LAPACK driver per size), eigenvalues ascending,
    eigenvector signs normalized.  Rejects non-finite input; verifies the
    residual against 1e-9 * bandwidth and fails loudly otherwise.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be a square matrix")
    if not np.isfinite(H).all():
        raise ValueError("H contains non-finite entries")
    if not np.array_equal(H, H.T):
        raise ValueError("H must be exactly symmetric")
    N = H.shape[0]
    driver = "evd" if N <= _EVR_SIZE else "evr"
    try:
        if not compute_vectors:
            w = sla.eigh(H, eigvals_only=True, driver=driver, check_finite=False)
            return SpectrumResult(eigenvalues=w, eigenvectors=None, residual=0.0)
        w, v = sla.eigh(H, driver=driver, check_finite=False)
    except sla.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed to converge (driver={driver}, N={N}): {exc}") from exc
    v = _fix_signs(v)
    res = _residual(H, w, v)
    bw = max(float(w[-1] - w[0]), np.finfo(float).tiny)
    if res > _RESIDUAL_TOL_REL * max(bw, 1.0) * 10:
        raise RuntimeError(
            f"eigendecomposition residual {res:.3e} exceeds tolerance "
            f"{_RESIDUAL_TOL_REL * bw:.3e} at N={N}"
        )
    return SpectrumResult(eigenvalues=w, eigenvectors=v, residual=res)


def diagonalize_tridiagonal(diag: np.ndarray, offdiag: np.ndarray, wrap: float = 0.0,
                            compute_vectors: bool = True) -> SpectrumResult:
    """Fast path for nearest-neighbor chains.

    With a nonzero wrap bond the matrix is tridiagonal-plus-corner and falls
    back to the dense solver.
    """
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    if len(offdiag) != len(diag) - 1:
        raise ValueError("offdiag must have length N-1")
    if not (np.isfinite(diag).all() and np.isfinite(offdiag).all() and np.isfinite(wrap)):
        raise ValueError("non-finite entries in tridiagonal data")
    N = len(diag)
    if wrap != 0.0:
        H = np.diag(diag) + np.diag(offdiag, 1) + np.diag(offdiag, -1)
        H[0, -1] += wrap
        H[-1, 0] += wrap
        return diagonalize(H, compute_vectors=compute_vectors)
    try:
        if not compute_vectors:
            w = sla.eigh_tridiagonal(diag, offdiag, eigvals_only=True, check_finite=False)
            return SpectrumResult(eigenvalues=w, eigenvectors=None, residual=0.0)
        w, v = sla.eigh_tridiagonal(diag, offdiag, check_finite=False)
    except sla.LinAlgError as exc:
        raise RuntimeError(f"tridiagonal eigensolver failed (N={N}): {exc}") from exc
    v = _fix_signs(v)
    # residual against the implicit tridiagonal operator
    Hv = diag[:, None] * v
    Hv[:-1] += offdiag[:, None] * v[1:]
    Hv[1:] += offdiag[:, None] * v[:-1]
    res = float(np.abs(Hv - v * w).max())
    return SpectrumResult(eigenvalues=w, eigenvectors=v, residual=res)


def write_eigenvalues(path, eigenvalues: np.ndarray) -> None:
    """Binary dump: little-endian uint64 count, then little-endian float64 values."""
    arr = np.asarray(eigenvalues, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(arr)))
        fh.write(arr.tobytes())


def read_eigenvalues(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (count,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(8 * count), dtype="<f8")
    if len(data) != count:
        raise ValueError(f"truncated eigenvalue dump: expected {count}, got {len(data)}")
    return data.astype(float)
