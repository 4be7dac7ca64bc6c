import json

import numpy as np
import pytest

from quasidual.sweep import ScalingFit, SweepPlan, run_sweep, scaling_fit, spec_from_params, _worker_cap


def tiny_plan(tmp_path, **overrides):
    payload = {
        "name": "tiny",
        "model": {"family": "offdiag-aah", "a": 1.0, "b": 1.0},
        "fib_u": [12],
        "output": str(tmp_path / "out"),
        "diagnostics": ["states"],
    }
    payload.update(overrides)
    return SweepPlan(**payload)


class TestPlanParsing:
    def test_roundtrip(self, tmp_path):
        plan = tiny_plan(tmp_path)
        again = SweepPlan.from_json(plan.to_json())
        assert again == plan

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown plan keys"):
            SweepPlan.from_json(json.dumps({
                "name": "x", "model": {}, "fib_u": [10], "output": "o",
                "frobnicate": True,
            }))

    def test_missing_keys_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            SweepPlan.from_json(json.dumps({"name": "x"}))

    def test_axis_with_coupling(self, tmp_path):
        plan = tiny_plan(tmp_path, model={"family": "power-law", "d": 2},
                         axis={"param": "a", "start": 1.0, "stop": 3.0, "count": 5,
                               "couple": {"param": "b", "total": 4.0}})
        values = plan.axis_values()
        assert [v["a"] for v in values] == [1.0, 1.5, 2.0, 2.5, 3.0]
        assert [v["b"] for v in values] == [3.0, 2.5, 2.0, 1.5, 1.0]

    def test_d_axis_integers(self, tmp_path):
        plan = tiny_plan(tmp_path, axis={"param": "d", "values": [2, 3, 4]})
        assert [v["d"] for v in plan.axis_values()] == [2, 3, 4]

    def test_gridpoint_indexing(self, tmp_path):
        plan = tiny_plan(tmp_path, fib_u=[10, 11],
                         axis={"param": "a", "values": [1.0, 2.0]})
        points = plan.gridpoints()
        assert [t["index"] for t in points] == [0, 1, 2, 3]
        assert [(t["model"]["a"], t["u"]) for t in points] == [
            (1.0, 10), (1.0, 11), (2.0, 10), (2.0, 11)]


class TestSpecFromParams:
    def test_power_law_limit(self):
        spec, scale = spec_from_params(
            {"family": "power-law", "a": 3.0, "d": 2, "limit": "b-infinity"}, 10)
        assert spec.limit.value == "b-infinity"
        assert scale == 1.0

    def test_scale_passthrough(self):
        _, scale = spec_from_params(
            {"family": "power-law", "a": 3.0, "b": 1.0, "d": 2, "scale": 2.5}, 10)
        assert scale == 2.5

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="family"):
            spec_from_params({"family": "nope"}, 10)


class TestRunSweep:
    def test_single_gridpoint_row_count(self, tmp_path):
        plan = tiny_plan(tmp_path)
        manifest = run_sweep(plan)
        assert len(manifest["results"]) == 1
        entry = manifest["results"][0]
        assert entry["status"] == "ok"
        assert entry["rows"]["states"] == 144
        out = tmp_path / "out" / entry["files"]["states"]
        assert out.exists()
        assert len(out.read_text().strip().splitlines()) == 145  # header + N
        assert (tmp_path / "out" / "tiny_manifest.json").exists()

    def test_deterministic_dataset_hash(self, tmp_path):
        m1 = run_sweep(tiny_plan(tmp_path, output=str(tmp_path / "a"),
                                 diagnostics=["states", "spacings", "edges"]))
        m2 = run_sweep(tiny_plan(tmp_path, output=str(tmp_path / "b"),
                                 diagnostics=["states", "spacings", "edges"]))
        assert m1["dataset_hash"] == m2["dataset_hash"]

    def test_failing_gridpoint_isolated(self, tmp_path):
        plan = tiny_plan(tmp_path, model={"family": "power-law", "b": 1.0, "d": 2},
                         axis={"param": "a", "values": [3.0, float("nan")]})
        manifest = run_sweep(plan)
        statuses = [r["status"] for r in manifest["results"]]
        assert statuses.count("ok") == 1
        assert statuses.count("failed") == 1
        failed = next(r for r in manifest["results"] if r["status"] == "failed")
        assert failed["error"]

    def test_eigenvector_cap_blocks_state_output(self, tmp_path):
        plan = tiny_plan(tmp_path, eigenvector_cap=100)
        manifest = run_sweep(plan)
        entry = manifest["results"][0]
        assert entry["status"] == "failed"
        assert "cap" in entry["error"]

    def test_spacings_only_ignores_cap(self, tmp_path):
        plan = tiny_plan(tmp_path, eigenvector_cap=100, diagnostics=["spacings"])
        manifest = run_sweep(plan)
        assert manifest["results"][0]["status"] == "ok"

    def test_scaling_kind_produces_fits(self, tmp_path):
        plan = tiny_plan(tmp_path, kind="scaling", fib_u=[10, 11, 12],
                         diagnostics=["mfd"],
                         model={"family": "power-law", "a": 3.0, "d": 2,
                                "limit": "b-infinity"})
        manifest = run_sweep(plan)
        fits = manifest["scaling_fits"]
        assert set(fits) == {"critical", "outer"}
        for fit in fits.values():
            assert len(fit["points"]) == 3
        assert (tmp_path / "out" / "tiny_scaling.json").exists()


class TestWorkerCap:
    def test_budget_limits_workers(self, tmp_path):
        plan = tiny_plan(tmp_path, fib_u=[18], concurrency=8, memory_budget_mb=100)
        assert _worker_cap(plan) == 1

    def test_generous_budget_keeps_concurrency(self, tmp_path):
        plan = tiny_plan(tmp_path, fib_u=[8], concurrency=3, memory_budget_mb=1000)
        assert _worker_cap(plan) == 3


class TestScalingFit:
    def test_exact_line(self):
        xs = [1.0 / np.log10(n) for n in (100, 1000, 10000)]
        records = [(n, "w", 0.5 + 0.3 * x) for n, x in zip((100, 1000, 10000), xs)]
        fit = scaling_fit(records)
        assert isinstance(fit, ScalingFit)
        assert fit.slope == pytest.approx(0.3, abs=1e-12)
        assert fit.intercept == pytest.approx(0.5, abs=1e-12)
        assert fit.residual_norm == pytest.approx(0.0, abs=1e-12)

    def test_needs_three_sizes(self):
        with pytest.raises(ValueError, match="3 sizes"):
            scaling_fit([(100, "w", 0.5), (200, "w", 0.6)])

    def test_degenerate_sizes_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            scaling_fit([(100, "w", 0.5), (100, "w", 0.6), (100, "w", 0.7)])

    def test_stderr_positive_with_noise(self):
        rng = np.random.default_rng(0)
        sizes = (100, 300, 1000, 3000, 10000)
        records = [(n, "w", 0.4 + 0.2 / np.log10(n) + 1e-3 * rng.standard_normal())
                   for n in sizes]
        fit = scaling_fit(records)
        assert fit.intercept_stderr > 0.0
