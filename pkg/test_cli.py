"""End-to-end runs of the command-line entry point."""

import csv
import json

import pytest

from cli.config import OUTPUT_DIR_ENV, RunConfig, load_run_config
from cli.main import _overrides, build_parser, main
from selection import SELECTION_HEADER

SMALL_CONFIG = {
    "synthetic": {"n_domains": 2, "samples_per_domain": 30, "feature_dim": 6, "seed": 11},
    "trainer": {"epochs": 2, "batch_size": 16, "hidden_dim": 8, "embed_dim": 4, "learning_rate": 1e-3},
    "clustering": {"k": 3},
    "scoring": {"alpha_percent": 25.0},
    "bench": {
        "n_seeds": 1,
        "alphas": [50.0],
        "strategies": ["adaptation", "random"],
        "trainer": {"epochs": 2, "batch_size": 16, "hidden_dim": 8, "embed_dim": 4},
    },
}


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(SMALL_CONFIG))
    return str(path)


@pytest.fixture
def generated(tmp_path, config_path):
    out = tmp_path / "data"
    assert main(["gen", "--config", config_path, "--out-dir", str(out)]) == 0
    return out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_gen_train_select(generated, config_path, capsys):
    out = str(generated)
    assert (generated / "features.bin").exists()
    assert json.loads((generated / "oracle_labels.json").read_text())

    capsys.readouterr()
    assert main(["train", "--config", config_path, "--out-dir", out]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert "epoch,loss" in printed
    assert (generated / "head.ckpt").exists()

    assert main(["select", "--config", config_path, "--out-dir", out]) == 0
    selection = _rows(generated / "selection.csv")
    assert selection[0] == SELECTION_HEADER
    pool = len(selection) - 1
    assert pool == 2 * 27
    assert sum(int(row[-1]) for row in selection[1:]) == max(1, pool * 25 // 100)
    embeddings = _rows(generated / "embeddings.csv")
    assert embeddings[0] == ["id", "domain", "cluster", "z0", "z1", "z2", "z3"]
    assert len(_rows(generated / "sphere3d.csv")) == pool + 1
    assert (generated / "clusters.ckpt").exists()


def test_select_output_does_not_depend_on_threads(generated, config_path, tmp_path):
    inputs = [
        "--features", str(generated / "features.bin"),
        "--manifest", str(generated / "manifest.json"),
        "--checkpoint", str(generated / "head.ckpt"),
    ]
    assert main(["train", "--config", config_path, "--out-dir", str(generated)]) == 0

    outputs = {}
    for threads in (1, 2, 8):
        out = tmp_path / f"sel{threads}"
        assert main(["select", "--config", config_path, "--out-dir", str(out), "--threads", str(threads)] + inputs) == 0
        outputs[threads] = {
            name: (out / name).read_bytes()
            for name in ("selection.csv", "embeddings.csv", "sphere3d.csv", "clusters.ckpt")
        }
    assert outputs[1] == outputs[2] == outputs[8]


def test_training_is_reproducible(generated, config_path, tmp_path):
    common = ["--config", config_path, "--out-dir", str(generated)]
    assert main(["train", *common, "--checkpoint", str(tmp_path / "a.ckpt")]) == 0
    assert main(["train", *common, "--checkpoint", str(tmp_path / "b.ckpt"), "--threads", "4"]) == 0
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()


def test_external_provider_without_reconstructions(generated, config_path):
    code = main(["train", "--config", config_path, "--out-dir", str(generated), "--provider", "external"])
    assert code == 21


def test_external_provider_with_reconstructions(tmp_path, config_path):
    out = str(tmp_path / "ext")
    assert main(["gen", "--config", config_path, "--out-dir", out, "--emit-recon"]) == 0
    assert main(["train", "--config", config_path, "--out-dir", out, "--provider", "external"]) == 0


def test_bad_config_exit_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"trainer": {"epochs": 2}, "colour": "red"}))
    assert main(["gen", "--config", str(path), "--out-dir", str(tmp_path)]) == 54
    path.write_text("{")
    assert main(["gen", "--config", str(path), "--out-dir", str(tmp_path)]) == 54


def test_missing_inputs_exit_code(tmp_path, config_path):
    assert main(["train", "--config", config_path, "--out-dir", str(tmp_path / "empty")]) == 53


def test_analyze_writes_bias_reports(generated, config_path, capsys):
    assert main(["analyze", "--config", config_path, "--out-dir", str(generated)]) == 0
    rows = _rows(generated / "bias.csv")
    assert rows[0] == ["domain", "stage", "mean", "std", "bias"]
    bias = {(row[0], row[1]): float(row[4]) for row in rows[1:]}
    assert set(bias) == {(d, s) for d in ("source", "target_1", "target_2") for s in ("original", "homogenized")}
    assert bias[("source", "original")] == 0.0
    assert (generated / "similarity_original.csv").exists()
    assert (generated / "similarity_homogenized.csv").exists()


def test_analyze_reduces_bias_on_default_spec(tmp_path, capsys):
    path = tmp_path / "default.json"
    path.write_text(json.dumps({"synthetic": {"seed": 11}}))
    out = tmp_path / "default"
    assert main(["gen", "--config", str(path), "--out-dir", str(out)]) == 0
    assert main(["analyze", "--config", str(path), "--out-dir", str(out)]) == 0
    bias = {(row[0], row[1]): float(row[4]) for row in _rows(out / "bias.csv")[1:]}
    targets = sorted({domain for domain, _ in bias} - {"source"})
    assert targets == ["target_1", "target_2"]
    for domain in targets:
        assert bias[(domain, "homogenized")] < bias[(domain, "original")]


def test_bench_writes_cells(tmp_path, config_path, capsys):
    out = tmp_path / "bench"
    assert main(["bench", "--config", config_path, "--out-dir", str(out)]) == 0
    cells = _rows(out / "bench_cells.csv")
    assert cells[0] == ["strategy", "alpha", "seed", "accuracy"]
    assert len(cells) == 1 + 2 + 1
    assert {row[0] for row in cells[1:]} == {"adaptation", "random", "full"}
    assert "strategy,alpha,mean,std" in capsys.readouterr().out


def test_output_dir_from_environment(tmp_path, config_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "from_env"))
    assert main(["gen", "--config", config_path]) == 0
    assert (tmp_path / "from_env" / "manifest.json").exists()

    assert main(["gen", "--config", config_path, "--out-dir", str(tmp_path / "from_flag")]) == 0
    assert (tmp_path / "from_flag" / "manifest.json").exists()


def test_config_precedence(config_path, monkeypatch):
    cfg = load_run_config(config_path, {"trainer.epochs": 7})
    assert cfg.trainer.epochs == 7
    assert cfg.trainer.hidden_dim == 8
    assert cfg.trainer.ema_momentum == RunConfig().trainer.ema_momentum
    assert cfg.bench.trainer.epochs == 2
    assert cfg.paths.out_dir == "out"

    monkeypatch.setenv(OUTPUT_DIR_ENV, "elsewhere")
    assert load_run_config(config_path).paths.out_dir == "elsewhere"
    assert load_run_config(config_path, {"paths.out_dir": "flag"}).paths.out_dir == "flag"


def test_seed_flag_reseeds_generation(tmp_path, config_path):
    for name, seed in (("a", "5"), ("b", "5"), ("c", "6")):
        assert main(["gen", "--config", config_path, "--out-dir", str(tmp_path / name), "--seed", seed]) == 0
    features = {name: (tmp_path / name / "features.bin").read_bytes() for name in "abc"}
    assert features["a"] == features["b"]
    assert features["a"] != features["c"]

    args = build_parser().parse_args(["select", "--seed", "9"])
    cfg = load_run_config(config_path, _overrides(args))
    assert cfg.trainer.seed == cfg.clustering.seed == cfg.synthetic.seed == cfg.bench.base_seed == 9


def test_help_lists_config_fields(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "trainer.epochs" in out
    assert "MissingReconPair" in out
