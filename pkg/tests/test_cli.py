"""Command line runner: artifacts, manifest, config handling and exit codes."""
import json
import os

import pytest

from hipster.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main
from hipster.dist import Pmf


def read(path):
    with open(path) as fh:
        return fh.read()


class TestEvolve:
    def test_identity_at_zero(self, tmp_path):
        src = tmp_path / "in.json"
        p = Pmf.from_dict({-1: 0.25, 3: 0.75})
        src.write_text(p.to_json())
        out = tmp_path / "o"
        assert main(["evolve", "--flavor", "sym", "--n", "0", "--input", str(src), "--out", str(out)]) == EXIT_OK
        back = Pmf.from_json(read(out / "pmf.json"))
        assert back.to_dict() == p.to_dict()

    def test_ks_table_and_manifest(self, tmp_path):
        out = tmp_path / "o"
        assert main(["evolve", "--flavor", "tal", "--n", "100", "--out", str(out)]) == EXIT_OK
        assert read(out / "ks.csv").splitlines()[0] == "n,ks,scale"
        man = json.loads(read(out / "manifest.json"))
        assert set(man["files"]) == {"ks.csv", "pmf.csv", "pmf.json"}
        assert man["checks"]["mass"]["passed"]
        assert man["versions"]["backend"] in ("python", "cython")
        assert len(man["config_hash"]) == 64

    def test_general_steps(self, tmp_path):
        out = tmp_path / "o"
        assert main(["evolve", "--flavor", "general", "--n", "1", "--steps", '{"0": 0.5, "2": 0.5}',
                     "--out", str(out)]) == EXIT_OK
        assert Pmf.from_json(read(out / "pmf.json")).to_dict() == {0: 0.5, 2: 0.5}


class TestConfig:
    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"flavor": "tal", "n": 2, "q": 0.25}))
        out = tmp_path / "o"
        assert main(["evolve", "--config", str(cfg), "--q", "0.5", "--out", str(out)]) == EXIT_OK
        man = json.loads(read(out / "manifest.json"))
        assert man["config"]["q"] == 0.5 and man["config"]["n"] == 2
        assert Pmf.from_json(read(out / "pmf.json")).to_dict() == {0: 3 / 8, 1: 1 / 2, 2: 1 / 8}

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_unreadable_config(self, tmp_path):
        assert main(["evolve", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    def test_invalid_values(self, tmp_path):
        assert main(["evolve", "--flavor", "tal", "--q", "1.5", "--n", "3", "--out", str(tmp_path)]) == EXIT_CONFIG
        assert main(["evolve", "--flavor", "nope"]) == EXIT_CONFIG

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HIPSTER_OUTPUT_DIR", str(tmp_path / "env"))
        assert main(["evolve", "--n", "1"]) == EXIT_OK
        assert os.path.exists(tmp_path / "env" / "manifest.json")


class TestSubcommands:
    def test_simulate_is_reproducible(self, tmp_path):
        args = ["simulate", "--rule", "sym", "--n", "6", "--N", "2000", "--seed", "4"]
        assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
        assert main(args + ["--out", str(tmp_path / "b"), "--threads", "2"]) == EXIT_OK
        assert read(tmp_path / "a" / "samples.csv") == read(tmp_path / "b" / "samples.csv")
        meta = json.loads(read(tmp_path / "a" / "samples.json"))
        assert meta["seed"] == 4 and meta["N"] == 2000

    def test_simulate_pool(self, tmp_path):
        assert main(["simulate", "--rule", "minplus", "--method", "pool", "--n", "3", "--N", "500",
                     "--out", str(tmp_path)]) == EXIT_OK

    def test_scheme_identity(self, tmp_path):
        assert main(["scheme", "--preset", "burgers", "--M", "8", "--identity-check", "--n", "2000",
                     "--stride", "100", "--out", str(tmp_path)]) == EXIT_OK
        man = json.loads(read(tmp_path / "manifest.json"))
        assert man["checks"]["scheme_pmf_identity"]["value"] <= 1e-9
        assert read(tmp_path / "state.csv").startswith("j,u\n")

    def test_failed_check_exit_code(self, tmp_path):
        assert main(["theorem1", "--n", "200", "--pilot", "100", "--threshold", "1e-6",
                     "--out", str(tmp_path)]) == EXIT_CHECK
        man = json.loads(read(tmp_path / "manifest.json"))
        assert not man["checks"]["ks_below_threshold"]["passed"]
        assert man["checks"]["ks_below_pilot"]["passed"]

    def test_theorem2_small(self, tmp_path):
        assert main(["theorem2", "--n", "20000", "--pilot", "1000", "--threshold", "0.02",
                     "--out", str(tmp_path)]) == EXIT_OK

    def test_couple(self, tmp_path):
        assert main(["couple", "--trials", "10", "--k", "3", "--N", "20000", "--out", str(tmp_path)]) == EXIT_OK
        assert read(tmp_path / "battery.csv").splitlines()[0] == "trial,alpha,p_exceed,mode"

    def test_entropy(self, tmp_path):
        assert main(["entropy", "--family", "pme", "--count", "5", "--quad-n", "64", "--Ms", "8,16",
                     "--t-window", "0.1", "--out", str(tmp_path)]) == EXIT_OK
        assert read(tmp_path / "l1.csv").splitlines()[0] == "family,M,l1_error"

    def test_explore(self, tmp_path):
        assert main(["explore", "--model", "lattice", "--depths", "4,8", "--pool-size", "512",
                     "--out", str(tmp_path)]) == EXIT_OK
        assert read(tmp_path / "lattice.csv").startswith("n,ks,p_below,fit_c")

    def test_version(self, capsys):
        assert main(["--version"]) == EXIT_OK
