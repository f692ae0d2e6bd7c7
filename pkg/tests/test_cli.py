import json
import os

import numpy as np
import pytest

from cfardetect import cfar, cli
from cfardetect.sim import read_dataset

TINY_CFG = """
scenario.m = 16
scenario.k = 32
scenario.pfa = 0.05
scenario.n_train = 64
scenario.n_cal = 200
scenario.n_test = 20
scenario.snr_db = 0,20
scenario.doppler_bins = 0,8
scenario.seed = 314
detectors = mf_true,amf_scm,svdd,dsvdd
svdd.nu = 0.1
train.epochs = 2
train.milestones = 1
train.batch_size = 32
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Full simulate -> fit -> evaluate pipeline on a tiny scenario."""
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "run.cfg"
    cfg.write_text(TINY_CFG)
    out = root / "out"
    for cmd in ("simulate", "fit", "evaluate"):
        rc = cli.main([cmd, "--config", str(cfg), "--out", str(out)])
        assert rc == 0, cmd
    return cfg, out


class TestSimulate:
    def test_artifacts_exist(self, workdir):
        _, out = workdir
        for name in (cli.TRAIN_NAME, cli.CAL_NAME, cli.MANIFEST_NAME):
            assert (out / name).exists()

    def test_split_contents(self, workdir):
        _, out = workdir
        header, train = read_dataset(out / cli.TRAIN_NAME)
        assert header["k"] == 0  # bare training cells
        assert len(train) == 64
        header, cal = read_dataset(out / cli.CAL_NAME)
        assert header["k"] == 32
        assert len(cal) == 200

    def test_manifest_resolves_and_reruns(self, workdir, tmp_path):
        _, out = workdir
        manifest = json.loads((out / cli.MANIFEST_NAME).read_text())
        assert manifest["config"]["scenario.seed"] == "314"
        # manifest is itself a valid --config
        out2 = tmp_path / "again"
        rc = cli.main(["simulate", "--config", str(out / cli.MANIFEST_NAME),
                       "--out", str(out2)])
        assert rc == 0
        assert (out2 / cli.TRAIN_NAME).read_bytes() == \
               (out / cli.TRAIN_NAME).read_bytes()
        assert (out2 / cli.MANIFEST_NAME).read_bytes() == \
               (out / cli.MANIFEST_NAME).read_bytes()

    def test_seed_override_changes_data(self, workdir, tmp_path):
        cfg, out = workdir
        out2 = tmp_path / "seeded"
        rc = cli.main(["simulate", "--config", str(cfg), "--out", str(out2),
                       "--seed", "999"])
        assert rc == 0
        assert (out2 / cli.TRAIN_NAME).read_bytes() != \
               (out / cli.TRAIN_NAME).read_bytes()
        manifest = json.loads((out2 / cli.MANIFEST_NAME).read_text())
        assert manifest["config"]["scenario.seed"] == "999"


class TestFit:
    def test_model_files_exist(self, workdir):
        _, out = workdir
        assert (out / cli.SVDD_MODEL_NAME).exists()
        assert (out / cli.DSVDD_MODEL_NAME).exists()

    def test_epoch_log(self, workdir):
        _, out = workdir
        lines = (out / cli.DSVDD_LOG_NAME).read_text().strip().split("\n")
        assert lines[0] == "epoch,mean_loss,lr"
        assert len(lines) == 3  # 2 epochs configured

    def test_fit_without_simulate_fails_actionably(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(TINY_CFG)
        rc = cli.main(["fit", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "simulate" in capsys.readouterr().err


class TestEvaluate:
    def test_report_shape(self, workdir):
        _, out = workdir
        rows = cfar.read_report(out / "report_gaussian.csv")
        assert len(rows) == 4 * 2 * 2  # detectors x bins x SNRs
        assert {r.detector for r in rows} == {"mf_true", "amf_scm", "svdd", "dsvdd"}
        for r in rows:
            assert 0.0 <= r.pd <= 1.0
            assert r.ci_low <= r.pd <= r.ci_high
            assert r.n_trials == 20

    def test_reruns_byte_identical(self, workdir, tmp_path):
        _, out = workdir
        report = out / "report_gaussian.csv"
        first = report.read_bytes()
        rc = cli.main(["evaluate", "--config", str(out / cli.MANIFEST_NAME),
                       "--out", str(out)])
        assert rc == 0
        assert report.read_bytes() == first

    def test_evaluate_without_fit_fails_actionably(self, workdir, tmp_path, capsys):
        cfg, _ = workdir
        out = tmp_path / "nofit"
        rc = cli.main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        rc = cli.main(["evaluate", "--config", str(cfg), "--out", str(out)])
        assert rc == 1
        assert "fit" in capsys.readouterr().err

    def test_plots_written(self, workdir, tmp_path):
        cfg, out = workdir
        plot_cfg = tmp_path / "plots.cfg"
        plot_cfg.write_text(TINY_CFG + "output.plots = true\n"
                            "detectors = mf_true,amf_scm\n")
        out2 = tmp_path / "plotted"
        assert cli.main(["simulate", "--config", str(plot_cfg), "--out", str(out2)]) == 0
        assert cli.main(["evaluate", "--config", str(plot_cfg), "--out", str(out2)]) == 0
        assert (out2 / "pd_curves_gaussian.svg").exists()
        assert (out2 / "pd_map_mf_true_gaussian.svg").exists()


class TestValidationErrors:
    def test_bad_config_exits_one(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("scenario.pfa = 0\n")
        rc = cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_key_exits_one(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("scenario.unknown = 1\n")
        assert cli.main(["simulate", "--config", str(cfg),
                         "--out", str(tmp_path / "o")]) == 1

    def test_cal_too_small_for_pfa(self, tmp_path, capsys):
        # 50 calibration samples cannot pin down a 0.01 quantile
        cfg = tmp_path / "small.cfg"
        cfg.write_text("scenario.n_train = 10\nscenario.n_cal = 50\n"
                       "scenario.n_test = 5\nscenario.pfa = 0.01\n"
                       "detectors = mf_true\nscenario.snr_db = 10\n"
                       "scenario.doppler_bins = 0\n")
        out = tmp_path / "o"
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        rc = cli.main(["evaluate", "--config", str(cfg), "--out", str(out)])
        assert rc == 2  # every detector failed calibration
        assert "failure" in capsys.readouterr().err


class TestVerify:
    def test_healthy_checks_pass(self, capsys):
        rc = cli.main(["verify"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "all checks passed" in out
        assert "PASS" in out and "FAIL" not in out

    def test_mutated_tyler_detected(self, capsys):
        rc = cli.main(["verify", "--mutate", "tyler"])
        captured = capsys.readouterr()
        assert rc == 2
        assert "FAIL" in captured.out
        assert "tyler_scale_invariance" in captured.out
