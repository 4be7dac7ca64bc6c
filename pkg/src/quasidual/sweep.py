"""Parameter-grid execution engine with persistence.

A sweep plan (JSON, grammar in docs/formats.md) expands into a deterministic
list of gridpoints.  Each gridpoint diagonalizes one model and writes its own
output files; the coordinator collects per-gridpoint status into a manifest
with content hashes, so identical plans rerun to identical datasets.  A
failing gridpoint is recorded and never disturbs its neighbors.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as diag_mod
from . import lyapunov as lyap_mod
from .models import Boundary, ModelSpec, build_hamiltonian, fibonacci_tau
from .spectra import diagonalize

DEFAULT_EIGENVECTOR_CAP = 10946
# peak bytes per dense gridpoint: matrix + solver copy + vectors + headroom
_BYTES_PER_PROBLEM = 5 * 8


@dataclass(frozen=True)
class ScalingFit:
    window: str
    points: tuple[tuple[float, float], ...]   # (1/log10 N, mfd)
    slope: float
    intercept: float
    intercept_stderr: float
    residual_norm: float


@dataclass
class SweepPlan:
    name: str
    model: dict
    fib_u: list[int]
    output: str
    kind: str = "sweep"                  # "sweep" | "scaling"
    axis: dict | None = None
    diagnostics: list[str] = field(default_factory=lambda: ["states"])
    concurrency: int = 1
    memory_budget_mb: int = 3500
    eigenvector_cap: int = DEFAULT_EIGENVECTOR_CAP
    min_plateau: int = diag_mod.DEFAULT_MIN_PLATEAU

    @classmethod
    def from_json(cls, text: str) -> "SweepPlan":
        payload = json.loads(text)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown plan keys: {sorted(unknown)}")
        missing = {"name", "model", "fib_u", "output"} - set(payload)
        if missing:
            raise ValueError(f"plan is missing required keys: {sorted(missing)}")
        return cls(**payload)

    @classmethod
    def load(cls, path) -> "SweepPlan":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    def axis_values(self) -> list[dict]:
        """Parameter assignments contributed by the axis, one per gridline."""
        if self.axis is None:
            return [{}]
        ax = self.axis
        param = ax["param"]
        if "values" in ax:
            values = list(ax["values"])
        else:
            values = list(np.linspace(ax["start"], ax["stop"], ax["count"]))
        assignments = []
        for v in values:
            entry = {param: v if param == "d" else float(v)}
            if param == "d":
                entry[param] = int(v)
            couple = ax.get("couple")
            if couple:
                entry[couple["param"]] = float(couple["total"]) - float(v)
            assignments.append(entry)
        return assignments

    def gridpoints(self) -> list[dict]:
        """Deterministic task list: axis values x sizes, indexed in order."""
        tasks = []
        index = 0
        for assignment in self.axis_values():
            for u in self.fib_u:
                model = dict(self.model)
                model.update(assignment)
                tasks.append({
                    "index": index,
                    "name": self.name,
                    "kind": self.kind,
                    "model": model,
                    "u": int(u),
                    "diagnostics": list(self.diagnostics),
                    "output": self.output,
                    "eigenvector_cap": self.eigenvector_cap,
                    "min_plateau": self.min_plateau,
                })
                index += 1
        if not tasks:
            raise ValueError("plan expands to an empty grid")
        return tasks


def spec_from_params(model: dict, u: int) -> tuple[ModelSpec, float]:
    """(ModelSpec, overall scale) from a plan model dict plus Fibonacci index."""
    tau = fibonacci_tau(u)
    family = model.get("family", "power-law")
    boundary = Boundary(model.get("boundary", "periodic"))
    scale = float(model.get("scale", 1.0))
    limit = model.get("limit", "none")
    a = model.get("a")
    b = model.get("b")
    if limit == "a-infinity":
        a = None
    if limit == "b-infinity":
        b = None
    if family == "power-law":
        spec = ModelSpec.power_law(a, b, int(model["d"]), tau, boundary=boundary)
    elif family == "exponential":
        spec = ModelSpec.exponential(a, b, int(model["d"]), tau, boundary=boundary)
    elif family == "offdiag-aah":
        spec = ModelSpec.off_diagonal_aah(float(model.get("a", 1.0)),
                                          float(model.get("b", 1.0)), tau,
                                          boundary=boundary)
    elif family == "diagonal-aah":
        spec = ModelSpec.diagonal_aah(float(model.get("t", 1.0)),
                                      float(model.get("V", 0.0)), tau,
                                      boundary=boundary)
    else:
        raise ValueError(f"unknown model family {family!r}")
    return spec, scale


def csv_params(spec: ModelSpec, scale: float = 1.0) -> dict:
    """Header fields shared by every output row of one gridpoint."""
    from .models import KernelFamily, LimitFlag

    def kernel_param(kernel):
        if kernel.family is KernelFamily.POWER_LAW:
            return kernel.exponent
        if kernel.family is KernelFamily.EXPONENTIAL:
            return kernel.rate
        if kernel.family is KernelFamily.OFFDIAG_AAH:
            return kernel.amplitude
        if kernel.family is KernelFamily.DIAGONAL_AAH:
            return kernel.hopping
        return "custom"

    a = "inf" if spec.limit is LimitFlag.A_INFINITY else kernel_param(spec.distance_kernel)
    b = "inf" if spec.limit is LimitFlag.B_INFINITY else kernel_param(spec.modulation_kernel)
    if spec.distance_kernel.family is KernelFamily.DIAGONAL_AAH:
        a = spec.distance_kernel.hopping
        b = spec.distance_kernel.potential
    return {
        "N": spec.size, "p": spec.tau.p, "q": spec.tau.q,
        "a": a, "b": b, "d": spec.range, "scale": scale,
    }


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def execute_gridpoint(task: dict) -> dict:
    """Run one gridpoint and write its outputs; isolation boundary for errors."""
    start = time.perf_counter()
    entry = {"index": task["index"], "status": "ok", "error": None,
             "files": {}, "hashes": {}, "rows": {}}
    try:
        spec, scale = spec_from_params(task["model"], task["u"])
        entry["params"] = {**csv_params(spec, scale), "u": task["u"],
                           "family": task["model"].get("family", "power-law"),
                           **{k: task["model"][k] for k in ("limit", "boundary")
                              if k in task["model"]}}
        outdir = Path(task["output"])
        outdir.mkdir(parents=True, exist_ok=True)
        requested = task["diagnostics"]
        wants_vectors = bool({"states", "edges", "mfd"} & set(requested))
        if wants_vectors and spec.size > task["eigenvector_cap"]:
            raise ValueError(
                f"N={spec.size} exceeds the eigenvector cap {task['eigenvector_cap']}; "
                "only eigenvalue diagnostics (spacings, lyapunov) are available"
            )
        H = build_hamiltonian(spec)
        if scale != 1.0:
            H *= scale
        result = diagonalize(H, compute_vectors=wants_vectors)
        params = csv_params(spec, scale)
        stem = f"{task['name']}_g{task['index']:04d}"

        diags = None
        if wants_vectors:
            thresholds = diag_mod.ClassificationThresholds.from_calibration()
            diags = diag_mod.diagnose_spectrum(result, thresholds)
        if "states" in requested:
            path = outdir / f"{stem}_states.csv"
            diag_mod.write_state_csv(path, params, diags)
            entry["files"]["states"] = path.name
            entry["rows"]["states"] = len(diags)
        if "spacings" in requested:
            path = outdir / f"{stem}_spacings.csv"
            records = diag_mod.even_odd_spacings(result.eigenvalues)
            diag_mod.write_spacings_csv(path, spec.size, records)
            entry["files"]["spacings"] = path.name
            entry["rows"]["spacings"] = len(records)
        if "edges" in requested:
            path = outdir / f"{stem}_edges.json"
            edge_set = diag_mod.detect_mobility_edges(diags, task["min_plateau"])
            diag_mod.write_edges_json(path, params, edge_set, spec.tau,
                                      tolerance=2.0 / spec.size)
            entry["files"]["edges"] = path.name
        if "lyapunov" in requested:
            path = outdir / f"{stem}_lyapunov.csv"
            results = lyap_mod.lyapunov_spectrum(spec, result.eigenvalues)
            lyap_mod.write_lyapunov_csv(path, params, results)
            entry["files"]["lyapunov"] = path.name
            entry["rows"]["lyapunov"] = len(results)
        if "mfd" in requested:
            path = outdir / f"{stem}_mfd.csv"
            _write_mfd_csv(path, params, spec, diags)
            entry["files"]["mfd"] = path.name
        for name in entry["files"].values():
            entry["hashes"][name] = _sha256(outdir / name)
    except Exception as exc:  # noqa: BLE001 - gridpoint isolation boundary
        entry["status"] = "failed"
        entry["error"] = f"{type(exc).__name__}: {exc}"
        entry.setdefault("params", {"u": task.get("u")})
    entry["wall_time_s"] = round(time.perf_counter() - start, 3)
    return entry


def _write_mfd_csv(path, params: dict, spec: ModelSpec, diags) -> None:
    """Window-averaged FD rows for the finite-size scaling pipeline."""
    P4 = 2.0 * spec.tau.value - 1.0
    windows = {"critical": False, "outer": True}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "p", "q", "window", "lo", "hi", "mfd"])
        for name, complement in windows.items():
            mfd = diag_mod.mean_fd(diags, (P4, 1.0 - P4), complement=complement)
            writer.writerow([params["N"], params["p"], params["q"],
                             name, repr(P4), repr(1.0 - P4), repr(mfd)])


def _worker_cap(plan: SweepPlan) -> int:
    max_n = max(fibonacci_tau(u).q for u in plan.fib_u)
    budget = plan.memory_budget_mb * (1 << 20)
    per_problem = _BYTES_PER_PROBLEM * max_n * max_n
    return max(1, min(plan.concurrency, budget // max(per_problem, 1)))


def run_sweep(plan: SweepPlan) -> dict:
    """Execute every gridpoint of a plan; returns (and writes) the manifest."""
    tasks = plan.gridpoints()
    outdir = Path(plan.output)
    outdir.mkdir(parents=True, exist_ok=True)
    workers = _worker_cap(plan)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(execute_gridpoint, tasks))
    else:
        results = [execute_gridpoint(t) for t in tasks]

    digest = hashlib.sha256()
    for entry in sorted(results, key=lambda e: e["index"]):
        for name in sorted(entry["hashes"]):
            digest.update(name.encode())
            digest.update(entry["hashes"][name].encode())
    manifest = {
        "plan": asdict(plan),
        "results": results,
        "dataset_hash": digest.hexdigest(),
    }
    if plan.kind == "scaling":
        manifest["scaling_fits"] = _scaling_from_results(plan, results, outdir)
    with open(outdir / f"{plan.name}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
    return manifest


def _scaling_from_results(plan: SweepPlan, results: list[dict], outdir: Path) -> dict:
    records = []
    for entry in results:
        if entry["status"] != "ok" or "mfd" not in entry["files"]:
            continue
        with open(outdir / entry["files"]["mfd"], newline="") as fh:
            for row in csv.DictReader(fh):
                records.append((int(row["N"]), row["window"], float(row["mfd"])))
    fits = {}
    for window in sorted({w for _, w, _ in records}):
        fit = scaling_fit([r for r in records if r[1] == window])
        fits[window] = {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "intercept_stderr": fit.intercept_stderr,
            "residual_norm": fit.residual_norm,
            "points": [list(pt) for pt in fit.points],
        }
    path = outdir / f"{plan.name}_scaling.json"
    with open(path, "w") as fh:
        json.dump(fits, fh, indent=1)
    return fits


def scaling_fit(records: list[tuple[int, str, float]]) -> ScalingFit:
    """Ordinary least squares of MFD against 1/log10(N) for one window.

    The intercept is the extrapolated thermodynamic-limit MFD; its standard
    error comes from the usual OLS variance estimate.
    """
    if len(records) < 3:
        raise ValueError("scaling fit needs at least 3 sizes")
    window = records[0][1]
    x = np.array([1.0 / math.log10(n) for n, _, _ in records])
    y = np.array([v for _, _, v in records])
    if len(set(np.round(x, 15))) < 3:
        raise ValueError("scaling fit needs at least 3 distinct sizes")
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    fitted = A @ coef
    rss = float(np.sum((y - fitted) ** 2))
    n = len(x)
    if n > 2:
        s2 = rss / (n - 2)
        sxx = float(np.sum((x - x.mean()) ** 2))
        stderr = math.sqrt(s2 * (1.0 / n + x.mean() ** 2 / sxx)) if sxx > 0 else math.inf
    else:
        stderr = math.inf
    return ScalingFit(
        window=window,
        points=tuple((float(a), float(b)) for a, b in zip(x, y)),
        slope=slope,
        intercept=intercept,
        intercept_stderr=stderr,
        residual_norm=math.sqrt(rss),
    )
