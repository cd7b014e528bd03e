import os

import numpy as np
import pytest

from askexplore import harness
from askexplore.cli import main as cli_main
from askexplore.harness import (
    ExperimentConfig,
    aggregate,
    parse_config,
    preset_suite,
    run_experiment,
    run_single_seed,
)
from askexplore.plotting import emit_plot
from askexplore.ppo import TrainerConfig


def tiny_config(tmp_path, **over):
    defaults = dict(
        task="sparse", method="ppo", seeds=(0,), outdir=str(tmp_path),
        max_steps=20, trainer=TrainerConfig(rollouts=4, rollout_length=16),
    )
    defaults.update(over)
    return ExperimentConfig(**defaults)


# ---------------------------------------------------------------- config

def test_flag_config_defaults():
    cfg = parse_config(flags={"task": "sparse", "method": "ane", "hop": 1,
                              "n_questions": 1})
    assert cfg.task == "sparse" and cfg.method == "ane"
    assert cfg.hop == 1 and cfg.n_questions == 1
    assert cfg.alpha == 0.6
    assert cfg.seeds == (0, 1, 2)
    assert cfg.trainer.rollouts == 2000


def test_alpha_below_half_rejected():
    with pytest.raises(ValueError):
        parse_config(flags={"method": "ane", "alpha": 0.3})


def test_hop_enum_rejected():
    with pytest.raises(ValueError):
        parse_config(flags={"hop": 4})


def test_unknown_flag_rejected():
    with pytest.raises(ValueError):
        parse_config(flags={"warp_drive": 1})


def test_ini_file_parsing(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(
        "[experiment]\ntask = dense\nmethod = icm\nseeds = 4,5\n"
        "[env]\nmax_steps = 42\n"
        "[trainer]\nrollouts = 7\ngamma = 0.9\n"
    )
    cfg = parse_config(str(path))
    assert cfg.task == "dense" and cfg.method == "icm"
    assert cfg.seeds == (4, 5) and cfg.max_steps == 42
    assert cfg.trainer.rollouts == 7 and cfg.trainer.gamma == 0.9


def test_ini_unknown_key(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[trainer]\nwarp = 9\n")
    with pytest.raises(ValueError, match="warp"):
        parse_config(str(path))


def test_flags_override_file(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[experiment]\ntask = dense\n")
    cfg = parse_config(str(path), flags={"task": "sparse"})
    assert cfg.task == "sparse"


def test_missing_file_rejected():
    with pytest.raises(ValueError):
        parse_config("/nonexistent/exp.ini")


# ---------------------------------------------------------------- presets

def test_preset_sparsity_counts():
    configs = preset_suite("sparsity")
    assert len(configs) == 8
    assert {(c.task, c.method) for c in configs} == {
        (t, m) for t in ("dense", "sparse") for m in ("ppo", "icm", "rnd", "ane")
    }


def test_preset_complexity_hops():
    configs = preset_suite("complexity")
    assert sorted({c.hop for c in configs}) == [1, 2, 3]
    assert all(c.method == "ane" for c in configs)


def test_preset_density_n_values():
    configs = preset_suite("density")
    assert sorted({c.n_questions for c in configs}) == [1, 2, 4]


def test_preset_pure_extrinsic_disabled():
    configs = preset_suite("pure")
    assert {c.method for c in configs} == {"icm", "rnd", "ane"}
    assert all(not c.extrinsic_enabled for c in configs)
    assert all(c.task == "sparse" for c in configs)


def test_preset_rnd_epoch_override():
    configs = preset_suite("sparsity")
    for c in configs:
        assert c.trainer.epochs == (4 if c.method == "rnd" else 3)


def test_preset_unknown():
    with pytest.raises(ValueError):
        preset_suite("bogus")


# ---------------------------------------------------------------- runs

def test_run_single_seed_writes_csvs(tmp_path):
    cfg = tiny_config(tmp_path)
    path = run_single_seed(cfg, 0, str(tmp_path))
    assert os.path.exists(path)
    lines = open(path).read().splitlines()
    assert lines[0] == ",".join(harness.METRIC_COLUMNS)
    assert len(lines) == 1 + 4  # header + one row per rollout
    assert os.path.exists(tmp_path / "seed0_timing.csv")
    assert os.path.exists(tmp_path / "seed0_curiosity.csv")


def test_run_experiment_three_seeds(tmp_path):
    cfg = tiny_config(tmp_path, seeds=(0, 1, 2))
    paths, failures = run_experiment(cfg)
    assert len(paths) == 3 and failures == {}
    assert os.path.exists(tmp_path / "config.ini")


def test_metrics_csv_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        out.mkdir()
        run_single_seed(tiny_config(out), 0, str(out))
    assert (out1 / "seed0_metrics.csv").read_bytes() == \
        (out2 / "seed0_metrics.csv").read_bytes()
    assert (out1 / "seed0_curiosity.csv").read_bytes() == \
        (out2 / "seed0_curiosity.csv").read_bytes()


def test_pure_exploration_columns(tmp_path):
    cfg = tiny_config(tmp_path, method="ane", extrinsic_enabled=False,
                      trainer=TrainerConfig(rollouts=6, rollout_length=32))
    path = run_single_seed(cfg, 0, str(tmp_path))
    log = harness.read_metrics_csv(path)
    assert np.all(log["mean_extrinsic_return"] == 0.0)
    assert log["mean_intrinsic"].sum() > 0.0


def test_seed_failure_recorded(tmp_path, monkeypatch):
    cfg = tiny_config(tmp_path, seeds=(0, 1))

    real = harness.run_single_seed

    def flaky(config, seed, outdir):
        if seed == 0:
            raise RuntimeError("boom")
        return real(config, seed, outdir)

    monkeypatch.setattr(harness, "run_single_seed", flaky)
    paths, failures = run_experiment(cfg)
    assert len(paths) == 1 and list(failures) == [0]
    assert "boom" in (tmp_path / "failures.txt").read_text()


# ---------------------------------------------------------------- aggregate

def write_log(path, values):
    with open(path, "w") as fh:
        fh.write(",".join(harness.METRIC_COLUMNS) + "\n")
        for i, v in enumerate(values, start=1):
            fh.write(f"{i},{i * 16},{v},{v},{v},0\n")


def test_aggregate_identical_logs_zero_std(tmp_path):
    for s in (0, 1):
        write_log(tmp_path / f"seed{s}_metrics.csv", [0.5, 0.25])
    agg = aggregate([str(tmp_path / f"seed{s}_metrics.csv") for s in (0, 1)])
    mean, std = agg["success_rate"]
    np.testing.assert_allclose(mean, [0.5, 0.25])
    np.testing.assert_allclose(std, [0.0, 0.0])


def test_aggregate_population_std(tmp_path):
    for s, v in enumerate((0.0, 1.0, 2.0)):
        write_log(tmp_path / f"seed{s}_metrics.csv", [v])
    agg = aggregate([str(tmp_path / f"seed{s}_metrics.csv") for s in range(3)])
    mean, std = agg["success_rate"]
    assert mean[0] == pytest.approx(1.0)
    assert std[0] == pytest.approx(np.sqrt(2.0 / 3.0))


def test_aggregate_single_log_is_identity(tmp_path):
    write_log(tmp_path / "seed0_metrics.csv", [0.1, 0.9, 0.4])
    agg = aggregate([str(tmp_path / "seed0_metrics.csv")])
    mean, std = agg["mean_extrinsic_return"]
    np.testing.assert_allclose(mean, [0.1, 0.9, 0.4])
    np.testing.assert_allclose(std, 0.0)


def test_aggregate_misaligned_rejected(tmp_path):
    write_log(tmp_path / "seed0_metrics.csv", [0.1, 0.9])
    write_log(tmp_path / "seed1_metrics.csv", [0.1])
    with pytest.raises(ValueError, match="misaligned"):
        aggregate([str(tmp_path / "seed0_metrics.csv"),
                   str(tmp_path / "seed1_metrics.csv")])


def test_aggregate_empty_rejected():
    with pytest.raises(ValueError):
        aggregate([])


# ---------------------------------------------------------------- plotting

def make_aggregate(values):
    n = len(values)
    return {
        "rollout_index": np.arange(1, n + 1, dtype=float),
        "env_steps": np.arange(1, n + 1, dtype=float) * 16,
        "success_rate": (np.asarray(values, dtype=float),
                         np.full(n, 0.05)),
    }


def test_emit_plot_deterministic(tmp_path):
    aggs = {"ane": make_aggregate([0.0, 0.2, 0.5]),
            "ppo": make_aggregate([0.0, 0.0, 0.1])}
    p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
    emit_plot(aggs, str(p1))
    emit_plot(aggs, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    text = p1.read_text()
    assert text.startswith("<svg")
    assert text.count("<polygon") == 2  # one band per method
    assert text.count("<polyline") == 2
    assert "ane" in text and "ppo" in text


def test_emit_plot_empty_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit_plot({}, str(tmp_path / "x.svg"))


def test_emit_plot_degenerate_band(tmp_path):
    agg = make_aggregate([0.3, 0.3])
    agg["success_rate"] = (agg["success_rate"][0], np.zeros(2))
    emit_plot({"solo": agg}, str(tmp_path / "solo.svg"))
    assert (tmp_path / "solo.svg").exists()


# ---------------------------------------------------------------- cli

def test_cli_run_and_aggregate(tmp_path, capsys):
    outdir = tmp_path / "run"
    rc = cli_main([
        "run", "--task", "sparse", "--method", "ppo", "--seeds", "0",
        "--rollouts", "3", "--rollout-length", "16", "--max-steps", "10",
        "--outdir", str(outdir),
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "seed0_metrics.csv" in out

    rc = cli_main(["aggregate", str(outdir)])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("rollout_index,env_steps,mean_extrinsic_return_mean")
    assert len(lines) == 4


def test_cli_plot(tmp_path, capsys):
    outdir = tmp_path / "run"
    cli_main([
        "run", "--task", "sparse", "--method", "ppo", "--seeds", "0,1",
        "--rollouts", "2", "--rollout-length", "16", "--max-steps", "10",
        "--outdir", str(outdir),
    ])
    capsys.readouterr()
    svg = tmp_path / "out.svg"
    rc = cli_main(["plot", str(outdir), "-o", str(svg)])
    assert rc == 0
    assert svg.read_text().startswith("<svg")


def test_cli_bad_config_exit_code(tmp_path, capsys):
    rc = cli_main(["run", "--method", "ane", "--alpha", "0.3",
                   "--outdir", str(tmp_path)])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_cli_question_file(tmp_path, capsys):
    from askexplore import questions as qm

    pool = qm.enumerate_questions(1)[:40]
    qfile = tmp_path / "pool.txt"
    qm.save_question_file(qfile, pool)
    outdir = tmp_path / "run"
    rc = cli_main([
        "run", "--task", "sparse", "--method", "ane", "--hop", "1",
        "--seeds", "0", "--rollouts", "2", "--rollout-length", "8",
        "--max-steps", "10", "--question-file", str(qfile),
        "--outdir", str(outdir),
    ])
    assert rc == 0
    log = harness.read_metrics_csv(str(outdir / "seed0_metrics.csv"))
    assert len(log["rollout_index"]) == 2
