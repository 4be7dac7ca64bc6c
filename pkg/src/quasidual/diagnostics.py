"""Per-state and spectrum-wide localization diagnostics.

Fractal dimension is defined through the inverse participation ratio,
FD = -ln(IPR)/ln(N), with IPR = sum_n |psi_n|^4 for a normalized state.
States in an exactly degenerate cluster (level splitting below a relative
tolerance of the bandwidth) are assigned the IPR of the cluster-averaged
density; single eigenvectors of a degenerate subspace are gauge-ambiguous
while the subspace density is not.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .spectra import SpectrumResult

DEFAULT_CLUSTER_TOL_REL = 1e-12
DEFAULT_MIN_PLATEAU = 5


class Phase(enum.Enum):
    EXTENDED = "extended"
    CRITICAL = "critical"
    LOCALIZED = "localized"
    UNCLASSIFIED = "unclassified"


class SpacingParity(enum.Enum):
    EVEN_ODD = "even-odd"   # spacing E_j - E_{j-1} at even j
    ODD_EVEN = "odd-even"   # spacing at odd j


@dataclass(frozen=True)
class StateDiagnostics:
    index: int              # 1-based, ascending energy
    energy: float
    ipr: float
    fd: float
    phase: Phase = Phase.UNCLASSIFIED


@dataclass(frozen=True)
class SpacingRecord:
    index: int
    spacing: float
    parity: SpacingParity


@dataclass(frozen=True)
class MobilityEdgeSet:
    """Fractional edge positions j/N where the phase label changes, plus the
    run labels between them."""

    edges: tuple[float, ...]
    run_labels: tuple[Phase, ...]
    run_lengths: tuple[int, ...]


@dataclass(frozen=True)
class ClassificationThresholds:
    """Size-dependent FD cutoffs: theta_loc = 2*c_loc/ln N from below,
    theta_ext = 1 - 2*c_ext/ln N from above."""

    c_loc: float
    c_ext: float

    def theta_loc(self, N: int) -> float:
        return 2.0 * self.c_loc / math.log(N)

    def theta_ext(self, N: int) -> float:
        return 1.0 - 2.0 * self.c_ext / math.log(N)

    @classmethod
    def from_calibration(cls) -> "ClassificationThresholds":
        from .calibration import load_calibration

        cfg = load_calibration()
        return cls(c_loc=cfg.c_loc, c_ext=cfg.c_ext)


def fractal_dimension(state: np.ndarray, N: int) -> tuple[float, float]:
    """(IPR, FD) of a normalized state vector on N sites."""
    state = np.asarray(state)
    density = np.abs(state) ** 2
    norm = density.sum()
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state is not normalized: |psi|^2 sums to {norm!r}")
    ipr = float(np.sum(density**2))
    fd = -math.log(ipr) / math.log(N)
    return ipr, fd


def degenerate_clusters(eigenvalues: np.ndarray,
                        tol_rel: float = DEFAULT_CLUSTER_TOL_REL) -> list[tuple[int, int]]:
    """Half-open index ranges of exactly degenerate levels (gap < tol_rel * bandwidth)."""
    w = np.asarray(eigenvalues)
    n = len(w)
    tol = tol_rel * max(float(w[-1] - w[0]), np.finfo(float).tiny)
    ranges = []
    i = 0
    while i < n:
        j = i + 1
        while j < n and w[j] - w[j - 1] < tol:
            j += 1
        ranges.append((i, j))
        i = j
    return ranges


def spectrum_fd(result: SpectrumResult, N: int | None = None,
                cluster_tol_rel: float = DEFAULT_CLUSTER_TOL_REL) -> tuple[np.ndarray, np.ndarray]:
    """Per-state (ipr, fd) arrays with degenerate-cluster density averaging."""
    if result.eigenvectors is None:
        raise ValueError("spectrum has no eigenvectors; FD needs them")
    N = result.size if N is None else N
    lnN = math.log(N)
    ipr = np.empty(result.size)
    for lo, hi in degenerate_clusters(result.eigenvalues, cluster_tol_rel):
        dens = np.mean(np.abs(result.eigenvectors[:, lo:hi]) ** 2, axis=1)
        ipr[lo:hi] = np.sum(dens**2)
    fd = -np.log(ipr) / lnN
    return ipr, fd


def diagnose_spectrum(result: SpectrumResult,
                      thresholds: ClassificationThresholds | None = None,
                      cluster_tol_rel: float = DEFAULT_CLUSTER_TOL_REL) -> list[StateDiagnostics]:
    """StateDiagnostics for every eigenstate, classified when thresholds given."""
    ipr, fd = spectrum_fd(result, cluster_tol_rel=cluster_tol_rel)
    diags = [
        StateDiagnostics(index=j + 1, energy=float(result.eigenvalues[j]),
                         ipr=float(ipr[j]), fd=float(fd[j]))
        for j in range(result.size)
    ]
    if thresholds is not None:
        diags = classify_phases(diags, result.size, thresholds)
    return diags


def classify_phases(diags: list[StateDiagnostics], N: int,
                    thresholds: ClassificationThresholds) -> list[StateDiagnostics]:
    """Label each state: fd < theta_loc -> localized, fd > theta_ext -> extended,
    critical in between."""
    lo = thresholds.theta_loc(N)
    hi = thresholds.theta_ext(N)
    out = []
    for d in diags:
        if d.fd < lo:
            phase = Phase.LOCALIZED
        elif d.fd > hi:
            phase = Phase.EXTENDED
        else:
            phase = Phase.CRITICAL
        out.append(replace(d, phase=phase))
    return out


def mean_fd(diags: list[StateDiagnostics], window: tuple[float, float],
            complement: bool = False) -> float:
    """Mean FD over states with lo <= j/N <= hi (or the complement window)."""
    lo, hi = window
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError(f"window must satisfy 0 <= lo < hi <= 1, got {window}")
    N = len(diags)
    values = []
    for d in diags:
        frac = d.index / N
        inside = lo <= frac <= hi
        if inside != complement:
            values.append(d.fd)
    if not values:
        raise ValueError("window selects no states")
    return float(np.mean(values))


def even_odd_spacings(eigenvalues: np.ndarray) -> list[SpacingRecord]:
    """Level spacings E_j - E_{j-1} tagged by the parity of j (j >= 2)."""
    w = np.asarray(eigenvalues)
    if len(w) < 3:
        raise ValueError("need at least 3 levels for spacing statistics")
    records = []
    for j in range(2, len(w) + 1):
        parity = SpacingParity.EVEN_ODD if j % 2 == 0 else SpacingParity.ODD_EVEN
        records.append(SpacingRecord(index=j, spacing=float(w[j - 1] - w[j - 2]), parity=parity))
    return records


def parity_gap_ratio(records: list[SpacingRecord], N: int,
                     window: tuple[float, float] = (0.0, 1.0)) -> tuple[float, SpacingParity]:
    """Ratio of the two parity families' median spacings inside a j/N window.

    Returns (larger/smaller median, parity of the near-degenerate family);
    which family collapses is detected from the data, not assumed.
    """
    lo, hi = window
    fam = {SpacingParity.EVEN_ODD: [], SpacingParity.ODD_EVEN: []}
    for r in records:
        if lo <= r.index / N <= hi:
            fam[r.parity].append(r.spacing)
    if not fam[SpacingParity.EVEN_ODD] or not fam[SpacingParity.ODD_EVEN]:
        raise ValueError("window must contain spacings of both parities")
    med_eo = float(np.median(fam[SpacingParity.EVEN_ODD]))
    med_oe = float(np.median(fam[SpacingParity.ODD_EVEN]))
    tiny = np.finfo(float).tiny
    if med_eo <= med_oe:
        return med_oe / max(med_eo, tiny), SpacingParity.EVEN_ODD
    return med_eo / max(med_oe, tiny), SpacingParity.ODD_EVEN


def spectral_symmetry_check(eigenvalues: np.ndarray) -> float:
    """max_j |E_j + E_{N+1-j}| / bandwidth for an ascending spectrum."""
    w = np.asarray(eigenvalues)
    bw = max(float(w[-1] - w[0]), np.finfo(float).tiny)
    return float(np.abs(w + w[::-1]).max()) / bw


def detect_mobility_edges(diags: list[StateDiagnostics],
                          min_plateau: int = DEFAULT_MIN_PLATEAU) -> MobilityEdgeSet:
    """Fractional positions where the phase label changes.

    Runs shorter than min_plateau are absorbed into their longer neighbor
    before edges are read off, suppressing single-state threshold flips.
    """
    N = len(diags)
    if N == 0:
        return MobilityEdgeSet(edges=(), run_labels=(), run_lengths=())
    runs: list[list] = []
    for d in diags:
        if runs and runs[-1][0] is d.phase:
            runs[-1][1] += 1
        else:
            runs.append([d.phase, 1])
    changed = True
    while changed and len(runs) > 1:
        changed = False
        for k, (_, length) in enumerate(runs):
            if length < min_plateau:
                left = runs[k - 1] if k > 0 else None
                right = runs[k + 1] if k + 1 < len(runs) else None
                target = left if (right is None or (left is not None and left[1] >= right[1])) else right
                target[1] += length
                runs.pop(k)
                m = 0
                while m + 1 < len(runs):
                    if runs[m][0] is runs[m + 1][0]:
                        runs[m][1] += runs[m + 1][1]
                        runs.pop(m + 1)
                    else:
                        m += 1
                changed = True
                break
    edges = []
    acc = 0
    for label, length in runs[:-1]:
        acc += length
        edges.append(acc / N)
    return MobilityEdgeSet(edges=tuple(edges),
                           run_labels=tuple(r[0] for r in runs),
                           run_lengths=tuple(r[1] for r in runs))


def reference_edge_positions(tau) -> dict[str, float]:
    """Closed-form candidate edge positions P1..P4 and their mirror images.

    P4 = 2*tau - 1 and its mirror 1 - P4 = 2 - 2*tau are the two principal
    edges of the infinite-exponent limiting models.
    """
    t = tau.value
    base = {"P1": 1.0 - t, "P2": 20.0 * t - 12.0, "P3": 7.0 * t - 4.0, "P4": 2.0 * t - 1.0}
    out = dict(base)
    for name, val in base.items():
        out[f"1-{name}"] = 1.0 - val
    return out


def match_edges(edge_set: MobilityEdgeSet, tau, tolerance: float) -> list[dict]:
    """Match each detected edge to the nearest closed-form reference position.

    Edges farther than `tolerance` from every reference keep matched=None.
    """
    refs = reference_edge_positions(tau)
    matches = []
    for pos in edge_set.edges:
        name = min(refs, key=lambda k: abs(refs[k] - pos))
        dist = abs(refs[name] - pos)
        if dist <= tolerance:
            matches.append({"position": pos, "matched": name,
                            "reference": refs[name], "distance": dist})
        else:
            matches.append({"position": pos, "matched": None,
                            "reference": None, "distance": None})
    return matches


# -- file formats (see docs/formats.md) -----------------------------------

def write_state_csv(path, params: dict, diags: list[StateDiagnostics]) -> None:
    """Per-state CSV with columns (N, p, q, a, b, d, j, E, ipr, fd, label)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "p", "q", "a", "b", "d", "j", "E", "ipr", "fd", "label"])
        head = [params["N"], params["p"], params["q"],
                params["a"], params["b"], params["d"]]
        for d in diags:
            writer.writerow(head + [d.index, repr(d.energy), repr(d.ipr),
                                    repr(d.fd), d.phase.value])


def read_state_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_spacings_csv(path, N: int, records: list[SpacingRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "j", "parity", "spacing"])
        for r in records:
            writer.writerow([N, r.index, r.parity.value, repr(r.spacing)])


def write_edges_json(path, params: dict, edge_set: MobilityEdgeSet, tau,
                     tolerance: float) -> None:
    payload = {
        "params": params,
        "edges": match_edges(edge_set, tau, tolerance),
        "run_labels": [p.value for p in edge_set.run_labels],
        "run_lengths": list(edge_set.run_lengths),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
