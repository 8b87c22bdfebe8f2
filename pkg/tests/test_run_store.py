"""
Tests for run-directory persistence
"""
import json
import os

import pandas as pd
import pytest

from core.errors import ConfigError, OutputDirError
from optimizer.codesign_optimizer import CodesignOptimizer
from reporting.run_store import (
    CANDIDATES_FILE,
    CONFIG_FILE,
    METRIC_COLUMNS,
    PARETO_FILE,
    RUN_FILE,
    RunStore,
    front_frame,
    load_run,
    read_table,
)


@pytest.fixture
def small_config(desk_config):
    search = desk_config.search.model_copy(update={"budget": 64, "population": 16})
    return desk_config.model_copy(update={"search": search})


@pytest.fixture
def saved_run(small_config, grid_provider, tmp_path):
    store = RunStore(str(tmp_path / "run")).prepare()
    record = CodesignOptimizer(small_config, grid_provider).run(store=store)
    return store, record


class TestPrepare:

    def test_creates_directory(self, tmp_path):
        out = tmp_path / "fresh"
        RunStore(str(out)).prepare()
        assert out.is_dir()

    def test_refuses_non_empty_directory(self, tmp_path):
        (tmp_path / "old.txt").write_text("keep me")
        with pytest.raises(OutputDirError):
            RunStore(str(tmp_path)).prepare()

    def test_force_restarts_candidate_log(self, tmp_path):
        (tmp_path / CANDIDATES_FILE).write_text('{"stale": true}\n')
        RunStore(str(tmp_path), force=True).prepare()
        assert not (tmp_path / CANDIDATES_FILE).exists()


class TestSaveRun:

    def test_files_written(self, saved_run):
        store, _ = saved_run
        for name in (CONFIG_FILE, CANDIDATES_FILE, PARETO_FILE, RUN_FILE):
            assert os.path.exists(store.path(name)), name

    def test_config_snapshot_round_trips(self, saved_run, small_config):
        store, _ = saved_run
        assert store.load_config() == small_config

    def test_log_has_one_line_per_candidate(self, saved_run):
        store, record = saved_run
        with open(store.path(CANDIDATES_FILE)) as f:
            lines = [line for line in f if line.strip()]
        assert len(lines) == len(record.candidates)

    def test_summary(self, saved_run):
        store, record = saved_run
        summary = store.load_summary()
        assert summary.seed == 0
        assert summary.strategy == "nsga2"
        assert summary.evaluations == record.evaluations
        assert summary.front_size == len(record.front)
        assert summary.hypervolume == record.hypervolume

    def test_pareto_csv_matches_front(self, saved_run):
        store, record = saved_run
        table = read_table(store.path(PARETO_FILE))
        assert table["fingerprint"].tolist() == [c.fingerprint for c in record.front.members]
        assert table["carbon_kg"].tolist() == [c.metrics.carbon_kg for c in record.front.members]
        assert {"vision_layers", "text_hidden", "pe_x", "l2_bw"} <= set(table.columns)


class TestLoadRun:

    def test_replay_reproduces_front(self, saved_run):
        store, record = saved_run
        replayed = load_run(store.out_dir)
        assert [c.fingerprint for c in replayed.candidates] == [c.fingerprint for c in record.candidates]
        assert [c.fingerprint for c in replayed.front.members] == [c.fingerprint for c in record.front.members]
        assert replayed.mode == record.mode
        assert replayed.ref_point == record.ref_point

        replay_table = front_frame(replayed.front)
        saved_table = read_table(store.path(PARETO_FILE))
        pd.testing.assert_frame_equal(
            replay_table[["fingerprint"] + METRIC_COLUMNS].reset_index(drop=True),
            saved_table[["fingerprint"] + METRIC_COLUMNS],
            check_dtype=False,
        )

    def test_metrics_survive_the_log(self, saved_run):
        store, record = saved_run
        replayed = store.load_candidates()
        for before, after in zip(record.candidates, replayed):
            assert after.metrics == before.metrics
            assert after.violations == before.violations

    def test_unknown_schema_version(self, saved_run):
        store, _ = saved_run
        with open(store.path(RUN_FILE)) as f:
            payload = json.load(f)
        payload["schema_version"] = 42
        with open(store.path(RUN_FILE), "w") as f:
            json.dump(payload, f)
        with pytest.raises(ConfigError, match="schema_version"):
            store.load_run()

    def test_missing_directory(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run(str(tmp_path / "nowhere"))


class TestTables:

    def test_float_round_trip(self, tmp_path):
        df = pd.DataFrame({"x": [0.1 + 0.2, 1 / 3, 2.5e-9]})
        path = tmp_path / "t.csv"
        df.to_csv(path, index=False)
        assert read_table(str(path))["x"].tolist() == df["x"].tolist()

    def test_report_lands_under_reports(self, tmp_path):
        store = RunStore(str(tmp_path))
        path = store.write_report("iso", pd.DataFrame({"a": [1]}))
        assert path == os.path.join(str(tmp_path), "reports", "iso.csv")
        assert os.path.exists(path)
