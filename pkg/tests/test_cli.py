"""Tests for the agnostic-rl command line"""

import json

import pytest

from agnosticrl.cli.commands import main
from agnosticrl.harness import load_report, planted_singleton_mdp
from agnosticrl.lowerbound import build_pi_ell, read_decoder, read_matrix
from agnosticrl.mdp import read_mdp, write_mdp
from agnosticrl.policies import Policy, PolicyClass, build_ltons, build_tree_paths, read_class
from agnosticrl.sunflower import SunflowerCert, build_cert, read_cert, write_cert


@pytest.fixture
def planted_file(tmp_path):
    path = tmp_path / "planted.mdp"
    write_mdp(planted_singleton_mdp(), path)
    return path


def _write_config(path, recipe="capacity-sweep", replications=3, acceptance=""):
    path.write_text(
        f'[experiment]\nrecipe = "{recipe}"\nseed = 5\nreplications = {replications}\n\n'
        f"[acceptance]\n{acceptance}\n"
    )
    return path


class TestTopLevel:
    def test_examples(self, capsys):
        assert main(["--help-examples"]) == 0
        assert "agnostic-rl capacity" in capsys.readouterr().out

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 0
        assert "<command>" in capsys.readouterr().out

    def test_seed_is_required(self, planted_file):
        with pytest.raises(SystemExit):
            main(["popler", "--mdp", str(planted_file), "--class", "singleton:K=3,H=2"])


class TestCapacityCommands:
    def test_capacity_prints_json_by_default(self, capsys):
        assert main(["capacity", "--class", "singleton:K=4,H=4"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["value"] == 5
        assert data["exact"] is True
        assert data["per_layer"] == [2, 3, 4, 5]

    def test_capacity_writes_witness(self, tmp_path):
        out = tmp_path / "witness.mdp"
        assert main(["capacity", "--class", "tree_paths:H=2", "--witness", str(out)]) == 0
        witness = read_mdp(out)
        assert witness.is_deterministic()
        assert witness.universe == build_tree_paths(2).universe

    def test_capacity_pretty_table(self, capsys):
        assert main(["capacity", "--class", "singleton:K=3,H=2", "--pretty"]) == 0
        assert "Spanning capacity" in capsys.readouterr().out

    def test_capacity_witness_needs_an_exact_search(self, tmp_path):
        out = tmp_path / "witness.mdp"
        argv = ["capacity", "--class", "all_active:K=3,H=3", "--budget", "1", "--witness", str(out)]
        assert main(argv) == 2
        assert not out.exists()

    def test_unknown_class_tag(self):
        assert main(["capacity", "--class", "bogus:K=2"]) == 1

    def test_guard_exit_code(self):
        assert main(["capacity", "--class", "tabular:K=5,H=5,A=2"]) == 2

    def test_coverability_on_planted_mdp(self, planted_file, capsys):
        assert main(["coverability", "--class", "singleton:K=3,H=2", "--mdp", str(planted_file), "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert 1.0 <= data["coverability"] <= 3.0 + 1e-9
        assert len(data["per_layer"]) == 2

    def test_missing_mdp_file(self, tmp_path):
        assert main(["coverability", "--class", "singleton:K=3,H=2", "--mdp", str(tmp_path / "gone.mdp")]) == 1


class TestSunflowerCheck:
    def test_constructive_certificate(self, tmp_path):
        out = tmp_path / "lton.cert"
        assert main(["sunflower-check", "--class", "lton:K=2,H=3,ell=2", "--write-cert", str(out)]) == 0
        assert len(read_cert(out).petals) == len(build_ltons(2, 3, 2))

    def test_weak_certificate_fails(self, tmp_path):
        pclass = build_tree_paths(3)
        core = PolicyClass.from_members(pclass.universe, [Policy.constant(pclass.universe, 0)])
        path = tmp_path / "weak.cert"
        write_cert(SunflowerCert(core, build_cert(pclass).petals, 1, 3), path)
        assert main(["sunflower-check", "--class", "tree_paths:H=3", "--cert", str(path), "--max-span", "2"]) == 1

    def test_class_without_certificate(self):
        assert main(["sunflower-check", "--class", "threshold:K=3,H=2"]) == 1


class TestLearners:
    def test_popler(self, planted_file, tmp_path):
        out = tmp_path / "popler.json"
        argv = ["popler", "--mdp", str(planted_file), "--class", "singleton:K=3,H=2", "--n1", "2000", "--n2", "2000",
                "--seed", "7", "--out", str(out)]
        assert main(argv) == 0
        data = json.loads(out.read_text())
        assert len(data["values"]) == 6
        assert data["violations"] == 0

    def test_is_baseline(self, planted_file, tmp_path):
        out = tmp_path / "is.json"
        assert main(["is-baseline", "--mdp", str(planted_file), "--class", "singleton:K=3,H=2", "--n", "500",
                     "--seed", "1", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["episodes"] == 500
        assert len(data["values"]) == 6

    def test_trajtree(self, planted_file, tmp_path):
        out = tmp_path / "trajtree.json"
        assert main(["trajtree", "--mdp", str(planted_file), "--class", "singleton:K=3,H=2", "--n", "200",
                     "--seed", "1", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert len(data["values"]) == 6
        # at most capacity 3 distinct pairs on each of the 2 layers
        assert data["max_tree_queries"] <= 6


class TestLowerboundGen:
    def test_writes_instance_files(self, tmp_path):
        out = tmp_path / "hard"
        argv = ["lowerbound-gen", "--J", "8", "--H", "4", "--max-retries", "1", "--allow-unverified",
                "--out-dir", str(out), "--seed", "3"]
        assert main(argv) == 0
        for name in ("matrix.txt", "class.pclass", "decoder.txt", "hard.mdp", "reference.mdp"):
            assert (out / name).exists()
        assert read_mdp(out / "hard.mdp").horizon == 4
        matrix = read_matrix(out / "matrix.txt")
        phi, pistar = read_decoder(out / "decoder.txt")
        pclass = read_class(out / "class.pclass")
        assert matrix.shape[1] == 8
        assert phi.shape[0] == 8
        assert 0 <= pistar < len(pclass)
        assert len(pclass) == len(build_pi_ell(matrix, 4, 8))


class TestRun:
    def test_run_writes_report(self, tmp_path):
        config = _write_config(tmp_path / "sweep.toml", acceptance="min_match_rate = 1.0")
        out = tmp_path / "reports" / "sweep.json"
        assert main(["run", str(config), "--output", str(out)]) == 0
        report = load_report(out)
        assert [r["capacity"] for r in report.records] == [2, 3, 4]

    def test_csv_override(self, tmp_path):
        config = _write_config(tmp_path / "sweep.toml")
        out = tmp_path / "sweep.csv"
        assert main(["run", str(config), "--format", "csv", "--output", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 4

    def test_missed_acceptance_exits_3(self, tmp_path):
        config = _write_config(tmp_path / "sweep.toml", acceptance="min_match_rate = 1.5")
        out = tmp_path / "sweep.json"
        assert main(["run", str(config), "--output", str(out)]) == 3
        assert out.exists()

    def test_bad_config_exits_1(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[experiment]\nrecipe = 'capacity-sweep'\n")
        assert main(["run", str(path)]) == 1
