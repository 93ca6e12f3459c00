import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from tagcn.cli import main, random_connected_graph
from tagcn.data import generate_sbm, write_dataset
from tagcn.graph import degrees


def schema(name):
    ref = resources.files("tagcn").joinpath(f"schemas/{name}.schema.json")
    return json.loads(ref.read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def dataset_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "sbm.tagcn"
    d = generate_sbm([25, 25], p_in=0.25, p_out=0.02, feature_dim=6, seed=0)
    write_dataset(d, path)
    return str(path)


def run_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


class TestTrain:
    def test_summary_matches_schema(self, dataset_file, capsys):
        out = run_json(capsys, ["train", "--dataset", dataset_file,
                                "--epochs", "5", "--seed", "0"])
        jsonschema.validate(out, schema("train_summary"))
        assert out["epochs_run"] == 5

    def test_json_stream_and_out_file(self, dataset_file, capsys, tmp_path):
        summary = tmp_path / "summary.json"
        assert main(["train", "--dataset", dataset_file, "--epochs", "3",
                     "--seed", "1", "--json", "--out", str(summary)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3
        for e, line in enumerate(lines, start=1):
            rec = json.loads(line)
            assert rec["epoch"] == e
            assert {"train_loss", "val_loss", "val_accuracy"} <= rec.keys()
        jsonschema.validate(json.loads(summary.read_text()),
                            schema("train_summary"))

    def test_checkpoint_then_eval(self, dataset_file, capsys, tmp_path):
        ckpt = tmp_path / "model.npz"
        train = run_json(capsys, ["train", "--dataset", dataset_file,
                                  "--epochs", "20", "--seed", "2",
                                  "--checkpoint", str(ckpt)])
        ev = run_json(capsys, ["eval", "--dataset", dataset_file,
                               "--checkpoint", str(ckpt)])
        assert ev["test_accuracy"] == train["test_accuracy"]

    def test_deterministic_across_invocations(self, dataset_file, capsys):
        a = run_json(capsys, ["train", "--dataset", dataset_file,
                              "--epochs", "4", "--seed", "7"])
        b = run_json(capsys, ["train", "--dataset", dataset_file,
                              "--epochs", "4", "--seed", "7"])
        assert a["test_accuracy"] == b["test_accuracy"]

    def test_config_header_on_stderr(self, dataset_file, capsys):
        main(["train", "--dataset", dataset_file, "--epochs", "1",
              "--seed", "0"])
        err = capsys.readouterr().err
        assert err.startswith("config: ")
        cfg = json.loads(err.split("config: ", 1)[1].splitlines()[0])
        assert cfg["learning_rate"] == 0.01
        assert cfg["early_stop_window"] == 45

    def test_seed_is_required(self, dataset_file):
        with pytest.raises(SystemExit):
            main(["train", "--dataset", dataset_file])


class TestSpectrum:
    def test_cyclic_roots_of_unity(self, capsys):
        out = run_json(capsys, ["spectrum", "--cyclic", "8"])
        jsonschema.validate(out, schema("spectrum"))
        eigs = np.array([complex(re, im) for re, im in out["eigenvalues"]])
        expected = np.exp(-2j * np.pi * np.arange(8) / 8)
        dist = np.abs(eigs[:, None] - expected[None, :])
        assert dist.min(axis=0).max() <= 1e-8

    def test_filter_response(self, capsys):
        out = run_json(capsys, ["spectrum", "--cyclic", "4",
                                "--coeffs", "1.0,0.5"])
        jsonschema.validate(out, schema("spectrum"))
        resp = {complex(a, b): complex(c, d)
                for (a, b), (c, d) in zip(out["eigenvalues"], out["response"])}
        for lam, r in resp.items():
            assert abs(r - (1.0 + 0.5 * lam)) <= 1e-9

    def test_dataset_or_cyclic_required(self):
        with pytest.raises(SystemExit):
            main(["spectrum"])


class TestTheorem1:
    def test_report_schema_and_convergence(self, capsys):
        out = run_json(capsys, ["theorem1", "--nodes", "16", "--layers", "200",
                                "--seed", "3"])
        jsonschema.validate(out, schema("theorem1"))
        assert out["final_cosine"] >= 1 - 1e-6
        assert len(out["cosine_to_v1_per_layer"]) == 200

    def test_random_graph_helper(self):
        g = random_connected_graph(12, seed=0)
        assert g.num_nodes == 12
        assert np.all(degrees(g) > 0)


class TestDataCommands:
    def test_gen_sbm_then_validate(self, capsys, tmp_path):
        path = tmp_path / "gen.tagcn"
        assert main(["gen-sbm", "--blocks", "20,20", "--p-in", "0.3",
                     "--p-out", "0.02", "--feature-dim", "6",
                     "--seed", "5", "--out", str(path)]) == 0
        capsys.readouterr()
        out = run_json(capsys, ["validate-data", "--dataset", str(path)])
        jsonschema.validate(out, schema("validate"))
        assert out["num_nodes"] == 40

    def test_gen_sbm_deterministic(self, tmp_path):
        a, b = tmp_path / "a.tagcn", tmp_path / "b.tagcn"
        for p in (a, b):
            main(["gen-sbm", "--blocks", "15,15", "--p-in", "0.3",
                  "--p-out", "0.02", "--seed", "9", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()

    def test_missing_dataset_errors(self, capsys):
        assert main(["validate-data", "--dataset", "no-such-file"]) == 1
        assert "error:" in capsys.readouterr().err


class TestReproduce:
    def test_summary_line_and_schema(self, dataset_file, capsys, tmp_path):
        out_file = tmp_path / "rep.json"
        assert main(["reproduce", dataset_file, "--epochs", "3", "--seed", "0",
                     "--runs", "2", "--out", str(out_file)]) == 0
        printed = capsys.readouterr().out
        rep = json.loads(out_file.read_text())
        jsonschema.validate(rep, schema("reproduce"))
        assert rep["num_runs"] == 2
        assert printed.strip() == (
            f"{dataset_file}: {100 * rep['mean_accuracy']:.1f}"
            f"±{100 * rep['std_accuracy']:.1f}")
