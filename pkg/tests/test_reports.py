"""
Tests for report tables: iso-accuracy, carbon breakdown, extremes, sweeps, HV consistency
"""
import pytest

from core.errors import ConfigError
from estimator.models.hardware_models import HardwareConfig
from optimizer.codesign_optimizer import CodesignOptimizer
from optimizer.models.search_models import ObjectiveMode, ObjectiveVariant, RunRecord
from optimizer.pareto import pareto_front
from reporting.reports import (
    BreakdownRow,
    ConsistencyRow,
    IsoAccuracyRow,
    SweepRow,
    breakdown,
    breakdown_models,
    emit_rows,
    extremes,
    hv_consistency,
    iso_accuracy,
    parse_rows,
    sweep,
    sweep_configs,
)
from tests.conftest import TestConfig, exhaustive_config


def _record(cands, mode: ObjectiveMode, seed=0) -> RunRecord:
    return RunRecord(
        seed=seed, mode=mode, strategy="exhaustive", budget=len(cands),
        evaluations=len(cands), candidates=cands, front=pareto_front(cands, mode),
    )


def _fixed_model(config, mode: str = "carbon"):
    config = exhaustive_config(config, mode)
    return config.model_copy(update={"model": config.model.model_copy(update={"fixed": True})})


class TestIsoAccuracy:

    def test_picks_lowest_lead_metric_in_window(self, make_candidate, carbon_mode):
        cands = [
            make_candidate(0.600, carbon_kg=1.0),
            make_candidate(0.605, carbon_kg=1.2),
            make_candidate(0.400, carbon_kg=0.2),
        ]
        # a dominated candidate never reaches the report
        cands.append(make_candidate(0.598, carbon_kg=1.5))
        (row,) = iso_accuracy([_record(cands, carbon_mode)], [0.6])
        assert row.filled
        assert row.lead_metric == "carbon_kg"
        assert row.fingerprint == cands[0].fingerprint
        assert row.carbon_kg == 1.0

    def test_unfilled_when_window_is_empty(self, make_candidate, carbon_mode):
        cands = [make_candidate(0.4, carbon_kg=0.2)]
        (row,) = iso_accuracy([_record(cands, carbon_mode)], [0.6], tol=0.01)
        assert not row.filled
        assert row.fingerprint is None and row.carbon_kg is None

    def test_feasible_pool_reaches_dominated_designs(self, make_candidate, carbon_mode):
        outside = make_candidate(0.65, carbon_kg=0.5)
        dominated = make_candidate(0.60, carbon_kg=0.8)
        record = _record([outside, dominated], carbon_mode)
        (front_row,) = iso_accuracy([record], [0.6], tol=0.01)
        (all_row,) = iso_accuracy([record], [0.6], tol=0.01, front_only=False)
        assert front_row.source == "front" and not front_row.filled
        assert all_row.source == "feasible" and all_row.filled
        assert all_row.fingerprint == dominated.fingerprint

    def test_tie_prefers_higher_accuracy(self, make_candidate):
        mode = ObjectiveMode(variant=ObjectiveVariant.ACC_LATENCY_CARBON)
        a = make_candidate(0.600, latency_s=0.02, carbon_kg=1.0, mode=mode.variant)
        b = make_candidate(0.605, latency_s=0.03, carbon_kg=1.0, mode=mode.variant)
        (row,) = iso_accuracy([_record([a, b], mode)], [0.6])
        assert row.fingerprint == b.fingerprint

    def test_rows_ordered_by_target_then_run(self, make_candidate, carbon_mode):
        latency_mode = ObjectiveMode(variant=ObjectiveVariant.ACC_LATENCY)
        runs = [
            _record([make_candidate(0.5, carbon_kg=1.0)], carbon_mode),
            _record([make_candidate(0.5, latency_s=0.01, mode=latency_mode.variant)], latency_mode),
        ]
        rows = iso_accuracy(runs, [0.5, 0.7])
        assert [(r.target, r.mode) for r in rows] == [
            (0.5, "carbon"), (0.5, "latency"), (0.7, "carbon"), (0.7, "latency"),
        ]
        assert [r.filled for r in rows] == [True, True, False, False]

    def test_csv_round_trip(self, make_candidate, carbon_mode, tmp_path):
        cands = [make_candidate(0.6, carbon_kg=1.0)]
        rows = iso_accuracy([_record(cands, carbon_mode)], [0.6, 0.9])
        path = str(tmp_path / "iso.csv")
        emit_rows(rows, IsoAccuracyRow, path)
        assert parse_rows(path, IsoAccuracyRow) == rows


class TestBreakdown:

    def test_model_ladder_shifts_toward_operational(self, desk_optimizer, clip_b16):
        hw = HardwareConfig.from_notation(TestConfig.CLIP_B16_MIN_CARBON_HW)
        ladder = [
            clip_b16.with_encoder_dims({"vision": {"layers": n}, "text": {"layers": n}})
            for n in (3, 6, 9, 12)
        ]
        rows = breakdown_models(ladder, hw, desk_optimizer.context)
        assert [r.label for r in rows] == [m.name for m in ladder]
        assert len({r.embodied_kg for r in rows}) == 1
        shares = [r.operational_share for r in rows]
        assert shares == sorted(shares) and shares[0] < shares[-1]
        for r in rows:
            assert r.total_kg == pytest.approx(r.embodied_kg + r.operational_kg)

    def test_front_breakdown_sorted_and_recomputed(self, desk_oracle, desk_optimizer):
        record = desk_oracle("carbon")
        rows = breakdown(record, desk_optimizer.context)
        assert len(rows) == len(record.front)
        assert [r.total_kg for r in rows] == sorted(r.total_kg for r in rows)
        by_fingerprint = {c.fingerprint: c for c in record.front.members}
        for r in rows:
            assert r.total_kg == pytest.approx(by_fingerprint[r.fingerprint].metrics.carbon_kg)

    def test_csv_round_trip(self, desk_oracle, desk_optimizer, tmp_path):
        rows = breakdown(desk_oracle("carbon"), desk_optimizer.context)
        path = str(tmp_path / "breakdown.csv")
        emit_rows(rows, BreakdownRow, path)
        assert parse_rows(path, BreakdownRow) == rows


class TestExtremes:

    def test_min_carbon_and_min_latency(self, desk_oracle):
        record = desk_oracle("carbon")
        rows = {r.kind: r for r in extremes(record)}
        feasible = record.feasible_candidates()
        assert rows["min_carbon"].carbon_kg == min(c.metrics.carbon_kg for c in feasible)
        assert rows["min_latency"].latency_s == min(c.metrics.latency_s for c in feasible)

    def test_no_feasible_candidates(self, make_candidate, carbon_mode):
        assert extremes(_record([make_candidate(0.5, feasible=False)], carbon_mode)) == []


class TestHvConsistency:

    def test_identical_runs_have_zero_spread(self, make_candidate, carbon_mode):
        cands = [make_candidate(0.6, carbon_kg=1.0), make_candidate(0.4, carbon_kg=0.5)]
        runs = [_record(cands, carbon_mode, seed=s) for s in (0, 1, 2)]
        (row,) = hv_consistency(runs)
        assert row.runs == 3
        assert row.seeds == "0;1;2"
        assert row.std_hv == pytest.approx(0.0)
        assert row.cv == pytest.approx(0.0)
        assert 0 < row.mean_hv

    def test_groups_by_mode(self, make_candidate, carbon_mode):
        latency_mode = ObjectiveMode(variant=ObjectiveVariant.ACC_LATENCY)
        runs = [
            _record([make_candidate(0.6, carbon_kg=1.0)], carbon_mode),
            _record([make_candidate(0.6, latency_s=0.01, mode=latency_mode.variant)], latency_mode),
        ]
        rows = hv_consistency(runs)
        assert [r.mode for r in rows] == ["carbon", "latency"]

    def test_csv_round_trip(self, make_candidate, carbon_mode, tmp_path):
        cands = [make_candidate(0.6, carbon_kg=1.0), make_candidate(0.4, carbon_kg=0.5)]
        rows = hv_consistency([_record(cands, carbon_mode, seed=s) for s in (0, 1)])
        path = str(tmp_path / "consistency.csv")
        emit_rows(rows, ConsistencyRow, path)
        assert parse_rows(path, ConsistencyRow) == rows


class TestSweepConfigs:

    def test_unknown_axis(self, desk_config):
        with pytest.raises(ConfigError, match="Available axes"):
            sweep_configs("voltage", ["1"], desk_config)

    def test_empty_values(self, desk_config):
        with pytest.raises(ConfigError):
            sweep_configs("tops", [], desk_config)

    def test_latency_tiers_need_a_capped_mode(self, desk_config):
        config = exhaustive_config(desk_config, "latency")
        with pytest.raises(ConfigError):
            sweep_configs("latency", ["0.01"], config)

    def test_points_share_the_seed(self, desk_config):
        points = sweep_configs("region", ["FR", "TW"], desk_config)
        assert [value for value, _ in points] == ["FR", "TW"]
        assert {p.search.seed for _, p in points} == {desk_config.search.seed}
        assert [p.carbon.region for _, p in points] == ["FR", "TW"]


class TestSweep:

    def test_tighter_tops_budget(self, desk_config, grid_provider):
        result = sweep("tops", ["1", "0.2"], _fixed_model(desk_config), grid_provider)
        loose, tight = result.rows
        assert tight.feasible < loose.feasible
        for row in result.rows:
            assert row.max_front_peak_tops <= row.tops_budget

    def test_tighter_latency_cap(self, desk_config, grid_provider):
        result = sweep("latency", ["1e-5", "1e-4", "1e-3"], _fixed_model(desk_config), grid_provider)
        feasible = [row.feasible for row in result.rows]
        assert feasible == sorted(feasible)
        assert [row.latency_cap_s for row in result.rows] == [1e-5, 1e-4, 1e-3]

    def test_dirtier_grid_raises_operational_share(self, desk_config, desk_optimizer, grid_provider):
        result = sweep("region", ["QC-CA", "IN"], _fixed_model(desk_config), grid_provider)
        clean, dirty = result.rows
        assert clean.grid_g_per_kwh < dirty.grid_g_per_kwh
        assert clean.min_carbon_kg < dirty.min_carbon_kg

        design = result.records["QC-CA"].front.members[0]
        shares = []
        for value in ("QC-CA", "IN"):
            point = dict(sweep_configs("region", [value], _fixed_model(desk_config)))[value]
            ctx = CodesignOptimizer(point, grid_provider).context
            (row,) = breakdown_models([design.model], design.hw, ctx)
            shares.append(row.operational_share)
        assert shares[0] < shares[1]

    def test_persisted_sweep(self, desk_config, grid_provider, tmp_path):
        out = tmp_path / "sweep"
        result = sweep("region", ["FR", "TW"], _fixed_model(desk_config), grid_provider, out_dir=str(out))
        assert (out / "region-FR" / "pareto.csv").exists()
        assert (out / "region-TW" / "run.json").exists()
        assert parse_rows(str(out / "reports" / "sweep_region.csv"), SweepRow) == result.rows
        assert (out / "reports" / "sweep_region_fronts.csv").exists()
