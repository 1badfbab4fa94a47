import json

import numpy as np
import pytest

import sextic_pinn.loss as loss_mod
from sextic_pinn import network
from sextic_pinn.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from sextic_pinn.report import read_history_csv, read_table_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list_problems(capsys):
    code, out, _ = run(capsys, "list-problems")
    assert code == EXIT_OK
    assert [line.split(":")[0] for line in out.splitlines()] == ["example1", "example2"]


def test_usage_errors(capsys):
    assert run(capsys)[0] == EXIT_USAGE
    assert run(capsys, "train", "--epochs", "many")[0] == EXIT_USAGE
    assert run(capsys, "--help")[0] == EXIT_OK


def test_train_zero_epochs_writes_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "train", "--epochs", "0", "--output-dir", str(tmp_path))
    assert code == EXIT_OK
    for name in ("model.ckpt", "history.csv", "table.csv"):
        assert (tmp_path / name).is_file()
    assert len(read_history_csv(tmp_path / "history.csv")) == 1
    assert len(read_table_csv(tmp_path / "table.csv").rows) == 11
    settings = json.loads(out[out.index("{"):out.index("}") + 1])
    assert settings["epochs"] == 0 and settings["problem"] == "example1"


def test_unknown_problem(tmp_path, capsys):
    code, _, err = run(capsys, "train", "--problem", "nosuch", "--output-dir", str(tmp_path))
    assert code == EXIT_USAGE
    assert "example1" in err and "example2" in err
    assert not (tmp_path / "model.ckpt").exists()


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"epochs": 5, "momentum": 0.9}))
    code, _, err = run(capsys, "train", "--config", str(cfg))
    assert code == EXIT_USAGE and "momentum" in err


def test_flags_override_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"epochs": 500, "seed": 3, "problem": "example2",
                               "output_dir": str(tmp_path / "o")}))
    code, out, _ = run(capsys, "train", "--config", str(cfg), "--epochs", "7", "--log-every", "7")
    assert code == EXIT_OK
    settings = json.loads(out[out.index("{"):out.index("}") + 1])
    assert settings["epochs"] == 7 and settings["seed"] == 3 and settings["problem"] == "example2"
    assert [r.epoch for r in read_history_csv(tmp_path / "o" / "history.csv")] == [0, 7]


def test_bad_threads_variable(monkeypatch, capsys):
    monkeypatch.setenv("SEXTIC_PINN_THREADS", "lots")
    assert run(capsys, "list-problems")[0] == EXIT_USAGE


def test_divergence_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "train", "--optimizer", "sgd", "--learning-rate", "10",
                       "--epochs", "50", "--output-dir", str(tmp_path))
    assert code == EXIT_NUMERIC
    assert (tmp_path / "model.ckpt").is_file()
    network.load_checkpoint(tmp_path / "model.ckpt")


def test_evaluate(tmp_path, capsys):
    run(capsys, "train", "--epochs", "0", "--problem", "example2", "--output-dir", str(tmp_path))
    code, out, _ = run(capsys, "evaluate", str(tmp_path / "model.ckpt"), "--problem", "example2",
                       "--grid-size", "2", "--output", str(tmp_path / "e.csv"))
    assert code == EXIT_OK
    rows = read_table_csv(tmp_path / "e.csv").rows
    assert [r.x for r in rows] == [0.0, 1.0]
    assert rows[1].analytical == pytest.approx(2.71828183, abs=5e-9)


def test_evaluate_exact_checkpoint_has_zero_error(tmp_path, capsys, monkeypatch):
    # a checkpoint whose network reproduces an exact solution tabulates with zero error
    import sextic_pinn.problem as problem_mod

    cfg = network.NetworkConfig(hidden_sizes=(1,), hidden_activation="linear")
    net = network.MlpParams(cfg, [[[2.0]], [[1.0]]], [[1.0], [0.0]])
    network.save_checkpoint(net, tmp_path / "m.ckpt")
    line = problem_mod.make_problem(
        "line", (0, 1), lambda x, d: d[:, 6], lambda x, d: np.eye(7)[6][None].repeat(len(x), 0), [],
        exact=lambda x, k: 2 * x + 1 if k == 0 else (np.full_like(x, 2.0) if k == 1 else 0 * x))
    real = problem_mod.builtin
    monkeypatch.setattr(problem_mod, "builtin", lambda n: line if n == "line" else real(n))
    code, out, _ = run(capsys, "evaluate", str(tmp_path / "m.ckpt"), "--problem", "line",
                       "--output", str(tmp_path / "e.csv"))
    assert code == EXIT_OK
    assert read_table_csv(tmp_path / "e.csv").max_abs_error == 0.0


def test_evaluate_corrupt_checkpoint(tmp_path, capsys):
    bad = tmp_path / "m.ckpt"
    bad.write_text("{not json")
    code, _, err = run(capsys, "evaluate", str(bad), "--problem", "example1")
    assert code == EXIT_NUMERIC and "checkpoint" in err
    assert run(capsys, "evaluate", str(tmp_path / "absent"), "--problem", "example1")[0] == EXIT_USAGE


def test_gradcheck_defaults_pass(capsys):
    code, out, _ = run(capsys, "gradcheck")
    assert code == EXIT_OK
    assert out.count("ok") == 8 and "FAIL" not in out


@pytest.mark.parametrize("problem", ["example1", "example2"])
def test_gradcheck_seeds_agree(problem, capsys):
    codes = {run(capsys, "gradcheck", "--problem", problem, "--seed", str(s))[0] for s in range(42, 47)}
    assert codes == {EXIT_OK}


def test_gradcheck_catches_corrupted_jacobian(monkeypatch, capsys):
    real = loss_mod.derivatives_and_jacobian

    def corrupted(*args, **kw):
        d, jac = real(*args, **kw)
        jac = jac.copy()
        jac[..., 0] *= 1.001
        return d, jac

    monkeypatch.setattr(loss_mod, "derivatives_and_jacobian", corrupted)
    code, out, _ = run(capsys, "gradcheck")
    assert code == EXIT_NUMERIC and "FAIL" in out


def test_train_is_byte_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        args = ["train", "--problem", "example2", "--epochs", "300", "--log-every", "25",
                "--output-dir", str(tmp_path / d)]
        assert run(capsys, *args)[0] == EXIT_OK
    for name in ("table.csv", "history.csv", "model.ckpt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.slow
def test_train_example1_defaults_reach_table_accuracy(tmp_path, capsys):
    code, _, _ = run(capsys, "train", "--problem", "example1", "--output-dir", str(tmp_path))
    assert code == EXIT_OK
    table = read_table_csv(tmp_path / "table.csv")
    assert table.max_abs_error <= 1e-3
