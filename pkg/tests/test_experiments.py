import json

import numpy as np
import pytest
from pytest import approx

from corrsense import (CorrelationParams, ExperimentConfig, NoPlateauError,
                       SweepInvariantError, SweepPoint, SweepResult,
                       default_config, find_optimal_cluster, grid_cluster,
                       run_experiment_csv, run_experiment_json, run_fig5,
                       run_fig6, run_fig8, run_fig9, run_optimal, run_setup1,
                       run_setup2)
from corrsense.experiments import region_grid_order


def cfg(experiment, **overrides):
    from dataclasses import replace
    return replace(default_config(experiment), **overrides)


class TestSetup1:
    def test_table_shape_and_partition(self):
        rows = run_setup1(default_config("setup1"))
        assert len(rows) == 25
        assert [r.head_id for r in rows] == list(range(1, 26))
        members = [i for r in rows for i in r.member_ids]
        assert sorted(members) == list(range(1, 101))

    def test_accuracy_band(self):
        rows = run_setup1(default_config("setup1"))
        assert all(0.6 < r.d_a < 0.95 for r in rows)

    def test_byte_identical_csv(self):
        config = default_config("setup1")
        assert run_experiment_csv(config) == run_experiment_csv(config)

    def test_csv_echoes_parameters(self):
        text = run_experiment_csv(default_config("setup1"))
        head = [l for l in text.splitlines() if l.startswith("#")]
        assert any("corrsense 0.1.0" in l for l in head)
        assert any("seed=7" in l for l in head)
        assert any("theta1=100" in l for l in head)
        assert any("noise=default" in l for l in head)
        body = [l for l in text.splitlines() if not l.startswith("#")]
        assert body[0] == "head,members,d_a"
        assert len(body) == 26


class TestSetup2:
    def test_single_run_equals_setup1(self):
        ones = run_setup2(cfg("setup2", runs=1))
        base = {r.head_id: r.d_a for r in run_setup1(default_config("setup1"))}
        for row in ones:
            assert row.d_a == approx(base[row.head_id], abs=1e-15)

    def test_average_band(self):
        rows = run_setup2(cfg("setup2", runs=25))
        assert len(rows) == 25
        assert all(0.6 < r.d_a < 1.0 for r in rows)

    def test_reproducible(self):
        config = cfg("setup2", runs=10)
        a = run_setup2(config)
        b = run_setup2(config)
        assert all(x.d_a == y.d_a for x, y in zip(a, b))

    def test_rejects_zero_runs(self):
        with pytest.raises(ValueError):
            run_setup2(cfg("setup2", runs=0))


class TestFig5:
    def test_strictly_decreasing_and_theta_ordered(self):
        results = run_fig5(default_config("fig5"))
        assert {r.theta1 for r in results} == {50.0, 100.0}
        for r in results:
            das = [p.d_a for p in r.points]
            assert all(a > b for a, b in zip(das, das[1:]))
        by_theta = {r.theta1: [p.d_a for p in r.points] for r in results}
        assert all(h >= l for l, h in zip(by_theta[50.0], by_theta[100.0]))

    def test_tiny_radius_noiseless_reaches_one(self):
        results = run_fig5(cfg("fig5", noise_profile="noiseless",
                               radius_values=(1e-6, 1.0, 2.0)))
        for r in results:
            assert r.points[0].d_a == approx(1.0, abs=1e-6)

    def test_fixed_cluster_size(self):
        results = run_fig5(default_config("fig5"))
        assert all(p.m == 4 for r in results for p in r.points)


class TestFig6:
    def test_jump_and_plateau(self):
        results = run_fig6(default_config("fig6"))
        assert {r.theta1 for r in results} == {50.0, 100.0, 200.0, 400.0}
        for r in results:
            by_m = {p.m: p.d_a for p in r.points}
            assert by_m[3] > by_m[2]
            plateau = [p.d_a for p in r.points if p.m >= 8]
            gaps = [abs(b - a) for a, b in zip(plateau, plateau[1:])]
            assert max(gaps) < 0.005

    def test_theta_ordering(self):
        results = sorted(run_fig6(default_config("fig6")), key=lambda r: r.theta1)
        for low, high in zip(results, results[1:]):
            for a, b in zip(low.points, high.points):
                assert b.d_a >= a.d_a


class TestFig8:
    def test_growth_order(self):
        order = region_grid_order()
        assert len(order) == 48
        assert (15.0, 15.0) not in order
        assert set(order[:4]) == {(0.0, 0.0), (0.0, 30.0), (30.0, 0.0),
                                  (30.0, 30.0)}
        g = grid_cluster(4)
        assert g.m == 4
        assert g.tracing_to_head == approx(15 * np.sqrt(2))

    def test_anchor_values_default_noise(self):
        results = run_fig8(default_config("fig8"))
        first = {r.theta1: r.points[0] for r in results}
        assert first[50.0].m == 4
        assert first[50.0].d_a == approx(0.6333, abs=0.05)
        assert first[400.0].d_a == approx(0.911, abs=0.05)
        assert first[400.0].d_a > first[50.0].d_a

    def test_anchor_values_noiseless(self):
        results = run_fig8(cfg("fig8", noise_profile="noiseless"))
        first = {r.theta1: r.points[0] for r in results}
        assert first[50.0].d_a == approx(0.677, abs=1e-3)
        assert first[400.0].d_a == approx(0.958, abs=1e-3)

    def test_density_sweep_shape(self):
        results = run_fig8(default_config("fig8"))
        for r in results:
            ms = [p.m for p in r.points]
            assert ms == list(range(4, 49, 4))
            assert r.points[0].value == approx(4 / 900)
            assert r.points[-1].value == approx(48 / 900)

    def test_monotone_growth(self):
        for r in run_fig8(default_config("fig8")):
            das = [p.d_a for p in r.points]
            assert all(b > a for a, b in zip(das, das[1:]))

    def test_plateau_no_overshoot_at_theta_400(self):
        results = run_fig8(default_config("fig8"))
        curve = next(r for r in results if r.theta1 == 400.0)
        by_m = {p.m: p.d_a for p in curve.points}
        assert by_m[20] - by_m[48] < 0.01


class TestFig9:
    def test_plateau_and_errorbars(self):
        results = run_fig9(cfg("fig9", theta1_values=(400.0,)))
        (curve,) = results
        assert all(p.std_err is not None and p.std_err >= 0 for p in curve.points)
        final = curve.points[-1].d_a
        for p in curve.points:
            if p.m >= 15:
                assert abs(p.d_a - final) < 0.01

    def test_theta_saturation(self):
        results = sorted(run_fig9(cfg("fig9", runs=20,
                                      theta1_values=(50.0, 100.0, 200.0))),
                         key=lambda r: r.theta1)
        for low, high in zip(results, results[1:]):
            for a, b in zip(low.points, high.points):
                assert b.d_a >= a.d_a

    def test_byte_identical_csv(self):
        config = cfg("fig9", runs=10, theta1_values=(100.0,),
                     m_values=(2, 4, 8, 12, 16, 20))
        assert run_experiment_csv(config) == run_experiment_csv(config)


class TestFindOptimal:
    def sweep(self, das, ms=None):
        ms = ms or list(range(2, 2 + len(das)))
        points = tuple(SweepPoint(m=m, value=float(m), d_a=d)
                       for m, d in zip(ms, das))
        return SweepResult("fig6", "m", 100.0, points)

    def test_constant_sweep_returns_first(self):
        assert find_optimal_cluster(self.sweep([0.9, 0.9, 0.9, 0.9]), 0.01) == 2

    def test_growing_sweep_without_plateau(self):
        with pytest.raises(NoPlateauError):
            find_optimal_cluster(self.sweep([0.1, 0.3, 0.5, 0.7]), 0.01)

    def test_needs_three_points(self):
        with pytest.raises(NoPlateauError):
            find_optimal_cluster(self.sweep([0.5, 0.5]), 0.01)

    def test_picks_plateau_onset(self):
        sweep = self.sweep([0.50, 0.80, 0.895, 0.90, 0.901])
        assert find_optimal_cluster(sweep, 0.01) == 4

    def test_rejects_nonpositive_epsilon(self):
        with pytest.raises(ValueError):
            find_optimal_cluster(self.sweep([0.9, 0.9, 0.9]), 0.0)

    def test_fig9_optimal_in_expected_band(self):
        (curve,) = run_fig9(cfg("fig9", theta1_values=(400.0,)))
        assert 10 <= find_optimal_cluster(curve, 0.01) <= 20

    def test_run_optimal_rows(self):
        rows = run_optimal(cfg("optimal", runs=25))
        assert {r.experiment for r in rows} == {"fig8", "fig9"}
        for row in rows:
            assert row.theta1 == 400.0
            assert row.optimal_m >= 2


class TestInvariantEnforcement:
    def test_violation_raises(self):
        from corrsense.experiments import _assert_fig5
        bad = SweepResult("fig5", "radius", 50.0, (
            SweepPoint(4, 1.0, 0.5), SweepPoint(4, 2.0, 0.6)))
        with pytest.raises(SweepInvariantError):
            _assert_fig5([bad])


class TestSerializationFormats:
    def test_unknown_experiment(self):
        with pytest.raises(ValueError):
            default_config("fig7")
        with pytest.raises(ValueError):
            run_experiment_csv(ExperimentConfig(experiment="bogus"))

    def test_json_payload(self):
        payload = json.loads(run_experiment_json(default_config("setup1")))
        assert payload["config"]["experiment"] == "setup1"
        assert payload["config"]["kernel"] == "power_exponential"
        assert len(payload["rows"]) == 25
        assert all("members" in row for row in payload["rows"])

    def test_sweep_csv_columns(self):
        text = run_experiment_csv(cfg("fig9", runs=5, theta1_values=(100.0,),
                                      m_values=(2, 4, 8)))
        body = [l for l in text.splitlines() if not l.startswith("#")]
        assert body[0] == "theta1,m,d_a,std_err"

    def test_fig5_csv_columns(self):
        text = run_experiment_csv(default_config("fig5"))
        body = [l for l in text.splitlines() if not l.startswith("#")]
        assert body[0] == "theta1,m,radius,d_a"
        assert len(body) == 1 + 2 * 10
