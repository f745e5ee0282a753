"""Tests for recipe runs, report files and acceptance"""

import json

import pytest

from agnosticrl.core.config import ExperimentConfig
from agnosticrl.core.errors import AcceptanceFailure, FormatError, ValidationError
from agnosticrl.harness import dumps_report, emit_report, enforce_acceptance, load_report, run_experiment
from agnosticrl.harness.recipes import RECIPES, get_recipe

SWEEP_HEADER = "replication,class,size,capacity,expected,matches,exact,nodes_expanded\n"


def make_config(recipe: str, seed: int = 11, replications: int = 1, workers: int = 1, **sections) -> ExperimentConfig:
    data = {"experiment": {"recipe": recipe, "seed": seed, "replications": replications, "workers": workers}}
    data.update(sections)
    return ExperimentConfig.from_dict(data)


class TestCapacitySweep:
    def test_singleton_sweep_over_horizon(self):
        report = run_experiment(make_config("capacity-sweep", replications=6))
        assert [r["capacity"] for r in report.records] == [2, 3, 4, 5, 6, 7]
        assert report.aggregate["match_rate"] == 1.0
        assert report.aggregate["exact_rate"] == 1.0
        assert report.aggregate["max_capacity"] == 7
        assert report.aggregate["replications"] == 6
        assert report.passed

    def test_sweep_over_another_parameter(self):
        config = make_config(
            "capacity-sweep", replications=2, instance={"class": "threshold:H=3", "sweep": "K", "start": 1}
        )
        report = run_experiment(config)
        assert [r["capacity"] for r in report.records] == [1, 2]
        assert report.aggregate["match_rate"] == 1.0

    def test_zero_replications(self):
        report = run_experiment(make_config("capacity-sweep", replications=0))
        assert report.records == []
        assert report.aggregate["replications"] == 0
        assert report.aggregate["match_rate"] == 0.0
        assert report.passed
        assert dumps_report(report, "csv") == SWEEP_HEADER

    def test_csv_has_one_row_per_replication(self):
        report = run_experiment(make_config("capacity-sweep", replications=4))
        lines = dumps_report(report, "csv").splitlines()
        assert lines[0] + "\n" == SWEEP_HEADER
        assert len(lines) == 5

    def test_bad_class_parameter(self):
        with pytest.raises(ValidationError):
            run_experiment(make_config("capacity-sweep", instance={"class": "singleton:K=two"}))


class TestDeterminism:
    def test_reruns_are_identical(self):
        config = make_config("coverability-check", replications=4)
        assert dumps_report(run_experiment(config)) == dumps_report(run_experiment(config))

    def test_worker_count_does_not_change_the_report(self):
        serial = make_config("coverability-check", replications=4)
        pooled = make_config("coverability-check", replications=4, workers=2)
        assert pooled.workers == 2
        assert dumps_report(run_experiment(serial)) == dumps_report(run_experiment(pooled))

    def test_seed_changes_the_draws(self):
        a = run_experiment(make_config("coverability-check", seed=1, replications=3))
        b = run_experiment(make_config("coverability-check", seed=2, replications=3))
        assert [r["coverability"] for r in a.records] != [r["coverability"] for r in b.records]


class TestRecipes:
    def test_registry(self):
        assert set(RECIPES) == {"capacity-sweep", "coverability-check", "popler-e2e", "is-vs-trajtree", "lowerbound-audit"}
        with pytest.raises(ValidationError):
            get_recipe("sarsa")

    def test_unknown_recipe_in_config(self):
        with pytest.raises(ValidationError):
            run_experiment(make_config("sarsa"))

    def test_coverability_is_dominated(self):
        report = run_experiment(make_config("coverability-check", replications=5, instance={"class": "lton:K=2,H=3,ell=2"}))
        assert report.aggregate["dominated_rate"] == 1.0
        assert report.aggregate["witness_tight_rate"] == 1.0

    def test_active_class_uses_the_universe_capacity(self):
        report = run_experiment(make_config("coverability-check", replications=5, instance={"class": "one_active:K=3,H=3"}))
        assert {r["capacity"] for r in report.records} == {4}
        assert report.aggregate["dominated_rate"] == 1.0
        assert report.aggregate["witness_tight_rate"] == 1.0

    def test_trajectory_trees_need_a_generative_model(self):
        with pytest.raises(ValidationError):
            run_experiment(make_config("is-vs-trajtree", instance={"access": "online"}))

    def test_baselines_on_planted_instance(self):
        config = make_config("is-vs-trajtree", replications=2, algorithm={"n_is": 500, "n_trees": 200})
        report = run_experiment(config)
        assert report.aggregate["queries_within_bound_rate"] == 1.0
        assert all(r["trees_identical"] is None for r in report.records)

    def test_small_popler_run(self):
        config = make_config("popler-e2e", replications=2, algorithm={"n1": 2000, "n2": 2000})
        report = run_experiment(config)
        assert report.aggregate["total_violations"] == 0
        assert report.aggregate["iterations_within_bound_rate"] == 1.0
        assert all(0 <= r["best_index"] < 6 for r in report.records)

    def test_lowerbound_audit(self):
        config = make_config("lowerbound-audit", replications=3, instance={"J": 8, "H": 4})
        report = run_experiment(config)
        assert report.aggregate["structural_rate"] == 1.0
        assert report.aggregate["max_formula_error"] <= 1e-12
        assert report.aggregate["max_dp_error"] <= 1e-12
        assert report.aggregate["max_reference_error"] <= 1e-12

    def test_lowerbound_needs_two_layers(self):
        with pytest.raises(ValidationError):
            run_experiment(make_config("lowerbound-audit", instance={"H": 1}))


class TestAcceptance:
    def test_passing_thresholds(self):
        config = make_config("capacity-sweep", replications=2, acceptance={"min_match_rate": 1.0})
        enforce_acceptance(run_experiment(config))

    def test_missed_threshold_raises(self):
        config = make_config("coverability-check", replications=2, acceptance={"min_dominated_rate": 1.1})
        report = run_experiment(config)
        assert not report.passed
        with pytest.raises(AcceptanceFailure) as info:
            enforce_acceptance(report)
        assert info.value.exit_code == 3
        assert info.value.report is report
        assert "dominated_rate" in str(info.value)


class TestReportFiles:
    def test_json_round_trip(self, tmp_path):
        report = run_experiment(make_config("capacity-sweep", replications=3))
        path = emit_report(report, tmp_path / "out" / "sweep.json")
        loaded = load_report(path)
        assert dumps_report(loaded) == dumps_report(report)
        assert "timings" not in json.loads(path.read_text())

    def test_csv_file(self, tmp_path):
        report = run_experiment(make_config("capacity-sweep", replications=2))
        path = emit_report(report, tmp_path / "sweep.csv", fmt="csv")
        assert len(path.read_text().splitlines()) == 3

    def test_unknown_format(self):
        report = run_experiment(make_config("capacity-sweep", replications=1))
        with pytest.raises(ValidationError):
            dumps_report(report, "xml")

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        report = run_experiment(make_config("capacity-sweep", replications=1))
        with pytest.raises(ValidationError):
            emit_report(report, blocker / "report.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(FormatError):
            load_report(path)

    def test_missing_fields(self, tmp_path):
        path = tmp_path / "partial.json"
        path.write_text(json.dumps({"recipe": "capacity-sweep"}))
        with pytest.raises(FormatError):
            load_report(path)
