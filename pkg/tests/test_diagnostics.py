import math

import numpy as np
import pytest

from quasidual.diagnostics import (
    ClassificationThresholds,
    Phase,
    SpacingParity,
    StateDiagnostics,
    classify_phases,
    degenerate_clusters,
    detect_mobility_edges,
    diagnose_spectrum,
    even_odd_spacings,
    fractal_dimension,
    match_edges,
    mean_fd,
    parity_gap_ratio,
    read_state_csv,
    reference_edge_positions,
    spectral_symmetry_check,
    spectrum_fd,
    write_spacings_csv,
    write_state_csv,
)
from quasidual.models import ModelSpec, build_hamiltonian, fibonacci_tau
from quasidual.spectra import SpectrumResult, diagonalize

from oracles import brute_fd


class TestFractalDimension:
    def test_uniform_state(self):
        N = 64
        ipr, fd = fractal_dimension(np.full(N, 1.0 / math.sqrt(N)), N)
        assert ipr == pytest.approx(1.0 / N, rel=1e-12)
        assert fd == pytest.approx(1.0, abs=1e-12)

    def test_single_site(self):
        N = 64
        state = np.zeros(N)
        state[10] = 1.0
        ipr, fd = fractal_dimension(state, N)
        assert ipr == 1.0
        assert fd == 0.0

    def test_two_site_state(self):
        N = 100
        state = np.zeros(N)
        state[3] = state[71] = 1.0 / math.sqrt(2.0)
        ipr, fd = fractal_dimension(state, N)
        assert ipr == pytest.approx(0.5, rel=1e-12)
        assert fd == pytest.approx(math.log(2.0) / math.log(100.0), rel=1e-12)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="normalized"):
            fractal_dimension(np.ones(4), 4)

    def test_complex_state(self):
        N = 16
        state = np.exp(2j * np.pi * np.arange(N) / N) / math.sqrt(N)
        ipr, fd = fractal_dimension(state, N)
        assert fd == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_bounds_random_states(self, seed):
        rng = np.random.default_rng(seed)
        N = 50
        state = rng.standard_normal(N)
        state /= np.linalg.norm(state)
        ipr, fd = fractal_dimension(state, N)
        assert 1.0 / N - 1e-12 <= ipr <= 1.0 + 1e-12
        assert -1e-12 <= fd <= 1.0 + 1e-12
        b_ipr, b_fd = brute_fd(state, N)
        assert ipr == pytest.approx(b_ipr, rel=1e-12)
        assert fd == pytest.approx(b_fd, rel=1e-12)


class TestClusterAveraging:
    def test_degenerate_pair_uses_subspace_density(self):
        # two exactly degenerate states on disjoint site pairs: the cluster
        # density spreads over 4 sites
        N = 8
        v = np.zeros((N, 2))
        v[0, 0] = v[1, 0] = 1.0 / math.sqrt(2.0)
        v[4, 1] = v[5, 1] = 1.0 / math.sqrt(2.0)
        result = SpectrumResult(eigenvalues=np.array([1.0, 1.0]), eigenvectors=v,
                                residual=0.0)
        ipr, fd = spectrum_fd(result, N=N)
        assert ipr[0] == ipr[1] == pytest.approx(0.25, rel=1e-12)

    def test_nondegenerate_untouched(self):
        N = 4
        v = np.eye(N)
        result = SpectrumResult(eigenvalues=np.array([0.0, 1.0, 2.0, 3.0]),
                                eigenvectors=v, residual=0.0)
        ipr, fd = spectrum_fd(result, N=N)
        np.testing.assert_allclose(ipr, 1.0)
        np.testing.assert_allclose(fd, 0.0)

    def test_cluster_boundaries(self):
        w = np.array([0.0, 1e-16, 1.0, 1.0 + 1e-16, 1.0 + 2e-16, 2.0])
        assert degenerate_clusters(w) == [(0, 2), (2, 5), (5, 6)]


class TestMeanFd:
    def _diags(self, fds):
        return [StateDiagnostics(index=j + 1, energy=0.0, ipr=1.0, fd=f)
                for j, f in enumerate(fds)]

    def test_all_uniform(self):
        assert mean_fd(self._diags([1.0] * 10), (0.2, 0.8)) == 1.0

    def test_critical_window_rational_boundary(self):
        # P4 = 2*tau - 1 = 610/2584 for tau = 1597/2584
        tau = fibonacci_tau(18)
        P4 = 2.0 * tau.value - 1.0
        assert P4 == pytest.approx(610.0 / 2584.0, abs=1e-15)

    def test_single_state_window(self):
        diags = self._diags([0.1, 0.2, 0.3, 0.4])
        # only j=2 has 0.26 <= j/N <= 0.51
        assert mean_fd(diags, (0.26, 0.51)) == 0.2

    def test_complement_window(self):
        diags = self._diags([0.1, 0.2, 0.3, 0.4])
        inside = mean_fd(diags, (0.26, 0.76))
        outside = mean_fd(diags, (0.26, 0.76), complement=True)
        assert inside == pytest.approx((0.2 + 0.3) / 2.0)
        assert outside == pytest.approx((0.1 + 0.4) / 2.0)

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError, match="no states"):
            mean_fd(self._diags([0.1, 0.2]), (0.9, 0.95))

    def test_bad_window_rejected(self):
        with pytest.raises(ValueError):
            mean_fd(self._diags([0.1]), (0.5, 0.4))


class TestSpacings:
    def test_doubly_degenerate_pattern(self):
        records = even_odd_spacings(np.array([0.0, 0.0, 1.0, 1.0]))
        assert [(r.index, r.spacing, r.parity) for r in records] == [
            (2, 0.0, SpacingParity.EVEN_ODD),
            (3, 1.0, SpacingParity.ODD_EVEN),
            (4, 0.0, SpacingParity.EVEN_ODD),
        ]

    def test_equally_spaced_ladder(self):
        h = 0.25
        records = even_odd_spacings(np.arange(10) * h)
        assert all(r.spacing == pytest.approx(h) for r in records)
        ratio, _ = parity_gap_ratio(records, 10)
        assert ratio == pytest.approx(1.0)

    def test_detects_degenerate_family(self):
        # pairs (2k-1, 2k) nearly degenerate: even-j spacings collapse
        w = np.sort(np.concatenate([np.arange(8.0), np.arange(8.0) + 1e-12]))
        records = even_odd_spacings(w)
        ratio, family = parity_gap_ratio(records, len(w))
        assert family is SpacingParity.EVEN_ODD
        assert ratio > 1e10

    def test_needs_three_levels(self):
        with pytest.raises(ValueError):
            even_odd_spacings(np.array([0.0, 1.0]))


class TestSymmetry:
    def test_symmetric_triple(self):
        assert spectral_symmetry_check(np.array([-1.0, 0.0, 1.0])) == 0.0

    def test_asymmetric_pair(self):
        assert spectral_symmetry_check(np.array([-2.0, 1.0])) == pytest.approx(1.0 / 3.0)


class TestClassification:
    def test_limits(self):
        th = ClassificationThresholds(c_loc=1.0, c_ext=0.5)
        diags = [StateDiagnostics(1, 0.0, 1.0, 1.0),
                 StateDiagnostics(2, 0.0, 1.0, 0.0),
                 StateDiagnostics(3, 0.0, 1.0, 0.5)]
        labeled = classify_phases(diags, 2584, th)
        assert [d.phase for d in labeled] == [Phase.EXTENDED, Phase.LOCALIZED,
                                              Phase.CRITICAL]

    def test_default_thresholds_midpoint_critical(self):
        th = ClassificationThresholds.from_calibration()
        labeled = classify_phases([StateDiagnostics(1, 0.0, 1.0, 0.5)], 2584, th)
        assert labeled[0].phase is Phase.CRITICAL

    def test_threshold_monotonicity(self):
        th = ClassificationThresholds.from_calibration()
        lo = [th.theta_loc(n) for n in (144, 610, 2584, 46368)]
        hi = [th.theta_ext(n) for n in (144, 610, 2584, 46368)]
        assert lo == sorted(lo, reverse=True)
        assert hi == sorted(hi)


class TestMobilityEdges:
    def _diags(self, labels):
        return [StateDiagnostics(index=j + 1, energy=0.0, ipr=1.0, fd=0.5, phase=p)
                for j, p in enumerate(labels)]

    def test_all_extended_no_edges(self):
        edge_set = detect_mobility_edges(self._diags([Phase.EXTENDED] * 40))
        assert edge_set.edges == ()

    def test_two_clean_edges(self):
        labels = [Phase.LOCALIZED] * 10 + [Phase.CRITICAL] * 20 + [Phase.LOCALIZED] * 10
        edge_set = detect_mobility_edges(self._diags(labels))
        assert edge_set.edges == (0.25, 0.75)
        assert edge_set.run_labels == (Phase.LOCALIZED, Phase.CRITICAL, Phase.LOCALIZED)

    def test_short_flip_merged(self):
        labels = ([Phase.LOCALIZED] * 12 + [Phase.CRITICAL] * 2
                  + [Phase.LOCALIZED] * 12 + [Phase.CRITICAL] * 14)
        edge_set = detect_mobility_edges(self._diags(labels), min_plateau=5)
        assert edge_set.edges == (26 / 40,)

    def test_reference_positions(self):
        tau = fibonacci_tau(18)
        refs = reference_edge_positions(tau)
        t = tau.value
        assert refs["P1"] == pytest.approx(1.0 - t)
        assert refs["P2"] == pytest.approx(20.0 * t - 12.0)
        assert refs["P3"] == pytest.approx(7.0 * t - 4.0)
        assert refs["P4"] == pytest.approx(2.0 * t - 1.0)
        assert refs["1-P4"] == pytest.approx(2.0 - 2.0 * t)

    def test_match_edges(self):
        tau = fibonacci_tau(18)
        labels = ([Phase.LOCALIZED] * 610 + [Phase.CRITICAL] * (2584 - 2 * 610)
                  + [Phase.LOCALIZED] * 610)
        edge_set = detect_mobility_edges(self._diags(labels))
        matches = match_edges(edge_set, tau, tolerance=2.0 / 2584.0)
        assert [m["matched"] for m in matches] == ["P4", "1-P4"]

    def test_unmatched_edge(self):
        tau = fibonacci_tau(18)
        labels = [Phase.LOCALIZED] * 1292 + [Phase.CRITICAL] * 1292
        edge_set = detect_mobility_edges(self._diags(labels))
        matches = match_edges(edge_set, tau, tolerance=2.0 / 2584.0)
        assert matches[0]["matched"] is None


class TestEndToEnd:
    def test_diagnose_spectrum_offdiag_aah(self):
        tau = fibonacci_tau(12)
        result = diagonalize(build_hamiltonian(ModelSpec.off_diagonal_aah(1.0, 1.0, tau)))
        diags = diagnose_spectrum(result, ClassificationThresholds.from_calibration())
        assert len(diags) == tau.q
        assert all(0.0 <= d.fd <= 1.0 for d in diags)
        assert all(1.0 / tau.q <= d.ipr <= 1.0 for d in diags)
        assert [d.index for d in diags] == list(range(1, tau.q + 1))
        # fd and ipr stay exactly consistent
        for d in diags:
            assert d.fd == pytest.approx(-math.log(d.ipr) / math.log(tau.q), abs=1e-12)

    def test_csv_roundtrip(self, tmp_path):
        tau = fibonacci_tau(9)
        result = diagonalize(build_hamiltonian(ModelSpec.power_law(3.0, 1.0, 2, tau)))
        diags = diagnose_spectrum(result, ClassificationThresholds.from_calibration())
        params = {"N": tau.q, "p": tau.p, "q": tau.q, "a": 3.0, "b": 1.0, "d": 2}
        path = tmp_path / "states.csv"
        write_state_csv(path, params, diags)
        rows = read_state_csv(path)
        assert len(rows) == tau.q
        assert float(rows[0]["E"]) == diags[0].energy
        assert float(rows[-1]["fd"]) == diags[-1].fd
        assert rows[0]["label"] in {p.value for p in Phase}

    def test_spacings_csv(self, tmp_path):
        records = even_odd_spacings(np.array([0.0, 0.5, 1.5, 3.0]))
        path = tmp_path / "spacings.csv"
        write_spacings_csv(path, 4, records)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "N,j,parity,spacing"
        assert len(lines) == 4
