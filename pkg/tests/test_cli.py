"""Command-line interface: flags, exit codes, CSV round-trips, reports."""

import subprocess
import sys

import numpy as np

from balancebench import cli, plant, sim
from balancebench.pid import PidConfig, PidGains

GOLDEN_TEXT = """\
HN N Z P P
HN N Z HP HP
HN HN Z HP HP
HN N Z P HP
N N Z P HP
"""


def run_cli(*argv):
    return cli.main(list(argv))


class TestSimulate:
    def test_reference_pid_run(self, tmp_path, capsys):
        out = tmp_path / "run.csv"
        rc = run_cli("simulate", "--controller", "pid", "--kp", "50", "--ki", "0.8",
                     "--kd", "0.05", "--initial-pitch", "0.1", "--out", str(out))
        assert rc == cli.EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "t,pitch,pitch_rate,u"
        assert len(lines) == 10002  # header + floor(10/0.001)+1 samples
        err = capsys.readouterr().err
        assert "[config] mass_m=0.2" in err
        assert "[config] formula_mode=native" in err
        assert "[config] dt=0.001" in err
        assert "[config] setpoint=0.0" in err

    def test_lqr_run(self, tmp_path):
        out = tmp_path / "lqr.csv"
        rc = run_cli("simulate", "--controller", "lqr", "--q11", "10", "--q22", "100",
                     "--r", "0.001", "--initial-pitch", "0.1", "--out", str(out))
        assert rc == cli.EXIT_OK
        assert out.exists()

    def test_missing_out_is_config_error(self, capsys):
        rc = run_cli("simulate", "--controller", "pid")
        assert rc == cli.EXIT_CONFIG
        assert "error:" in capsys.readouterr().err

    def test_unknown_flag_rejected(self, tmp_path):
        rc = run_cli("simulate", "--controller", "pid", "--out",
                     str(tmp_path / "x.csv"), "--bogus", "1")
        assert rc == cli.EXIT_CONFIG

    def test_invalid_gain_rejected(self, tmp_path, capsys):
        rc = run_cli("simulate", "--controller", "pid", "--kp", "-5",
                     "--out", str(tmp_path / "x.csv"))
        assert rc == cli.EXIT_CONFIG
        assert "error:" in capsys.readouterr().err

    def test_diverged_run_exits_2_but_writes_csv(self, tmp_path):
        out = tmp_path / "diverge.csv"
        rc = run_cli("simulate", "--controller", "pid", "--kp", "0", "--ki", "0",
                     "--kd", "0", "--initial-pitch", "0.01", "--out", str(out))
        assert rc == cli.EXIT_DIVERGED
        assert out.exists()
        parsed = cli.read_trajectory_csv(out)
        assert abs(parsed.pitch[-1]) > 1.5

    def test_plot_writes_figure(self, tmp_path):
        out = tmp_path / "run.csv"
        png = tmp_path / "run.png"
        rc = run_cli("simulate", "--controller", "pid", "--t-final", "1",
                     "--out", str(out), "--plot", str(png))
        assert rc == cli.EXIT_OK
        assert png.exists() and png.stat().st_size > 0

    def test_fuzzy_run_with_rulebase_file(self, tmp_path):
        rules = tmp_path / "grid.rules"
        rules.write_text(GOLDEN_TEXT, encoding="utf-8")
        out = tmp_path / "fz.csv"
        rc = run_cli("simulate", "--controller", "fuzzy-pd", "--rulebase", str(rules),
                     "--t-final", "1", "--out", str(out))
        assert rc in (cli.EXIT_OK, cli.EXIT_DIVERGED)
        assert out.exists()

    def test_disturb_flags_must_pair(self, tmp_path):
        rc = run_cli("simulate", "--controller", "pid", "--disturb-time", "1.0",
                     "--out", str(tmp_path / "x.csv"))
        assert rc == cli.EXIT_CONFIG


class TestCsvRoundTrip:
    def test_round_trip_is_exact(self, tmp_path):
        sc = sim.SimConfig(t_final=1.0, initial=plant.PitchState(0.1, 0.0))
        tr = sim.run(plant.PlantParams(), plant.MODE_NATIVE,
                     PidConfig(gains=PidGains(50.0, 0.8, 0.05)), sc)
        path = tmp_path / "tr.csv"
        cli.write_trajectory_csv(tr, path)
        parsed = cli.read_trajectory_csv(path)
        assert parsed.dt == tr.dt
        assert np.array_equal(parsed.t, tr.t)
        assert np.array_equal(parsed.pitch, tr.pitch)
        assert np.array_equal(parsed.pitch_rate, tr.pitch_rate)
        assert np.array_equal(parsed.u, tr.u)

    def test_lf_line_endings(self, tmp_path):
        sc = sim.SimConfig(t_final=0.01, dt=0.001)
        tr = sim.run(plant.PlantParams(), plant.MODE_NATIVE,
                     PidConfig(gains=PidGains(1.0, 0.0, 0.0)), sc)
        path = tmp_path / "tr.csv"
        cli.write_trajectory_csv(tr, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")

    def test_reader_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,phi\n0,0\n", encoding="utf-8")
        rc = run_cli("compare", str(path))
        assert rc == cli.EXIT_CONFIG


class TestLqrGain:
    def test_double_integrator_overrides(self, capsys):
        rc = run_cli("lqr-gain", "--a21", "0", "--b2", "1",
                     "--q11", "1", "--q22", "1", "--r", "1")
        assert rc == cli.EXIT_OK
        out = capsys.readouterr().out
        values = {}
        for line in out.splitlines():
            if "=" in line:
                key, _, rest = line.partition("=")
                values[key.strip()] = rest.strip()
        assert abs(float(values["k1"]) - 1.0) < 1e-9
        assert abs(float(values["k2"]) - np.sqrt(3.0)) < 1e-9
        assert float(values["care_residual"]) < 1e-9
        assert values["hurwitz"] == "yes"
        assert "s^2" in values["closed_loop_poly"]

    def test_default_plant_residual(self, capsys):
        rc = run_cli("lqr-gain")
        assert rc == cli.EXIT_OK
        out = capsys.readouterr().out
        residual = [l for l in out.splitlines() if l.startswith("care_residual")][0]
        assert float(residual.split("=")[1]) < 1e-9

    def test_zero_r_is_config_error(self):
        assert run_cli("lqr-gain", "--r", "0") == cli.EXIT_CONFIG

    def test_unstabilizable_override_is_solver_failure(self, capsys):
        rc = run_cli("lqr-gain", "--a21", "1", "--b2", "0")
        assert rc == cli.EXIT_SOLVER
        assert "solver failure" in capsys.readouterr().err


class TestFuzzyEval:
    def test_center_point_is_zero(self, capsys):
        rc = run_cli("fuzzy-eval", "--error", "0", "--error-rate", "0")
        assert rc == cli.EXIT_OK
        out = capsys.readouterr().out
        u_line = [l for l in out.splitlines() if l.startswith("u =")][0]
        assert abs(float(u_line.split("=")[1])) < 1e-9
        assert any(l.startswith("rule ") for l in out.splitlines())

    def test_positive_corner(self, capsys):
        rc = run_cli("fuzzy-eval", "--error", "0.5", "--error-rate", "2.0")
        assert rc == cli.EXIT_OK
        out = capsys.readouterr().out
        u_line = [l for l in out.splitlines() if l.startswith("u =")][0]
        assert float(u_line.split("=")[1]) > 0.0

    def test_short_rulebase_rejected(self, tmp_path):
        path = tmp_path / "short.rules"
        path.write_text("HN N Z P P\nHN N Z HP HP\nHN HN Z HP HP\nHN N Z P HP\n",
                        encoding="utf-8")
        rc = run_cli("fuzzy-eval", "--error", "0", "--error-rate", "0",
                     "--rulebase", str(path))
        assert rc == cli.EXIT_CONFIG


class TestCompare:
    def test_text_report(self, tmp_path, capsys):
        sc = sim.SimConfig(t_final=1.0, initial=plant.PitchState(0.1, 0.0))
        for name, kp in (("a", 50.0), ("b", 100.0)):
            tr = sim.run(plant.PlantParams(), plant.MODE_NATIVE,
                         PidConfig(gains=PidGains(kp, 0.8, 0.05)), sc)
            cli.write_trajectory_csv(tr, tmp_path / f"{name}.csv")
        rc = run_cli("compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"))
        assert rc == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "a" in out and "b" in out and "verdict" in out

    def test_csv_report(self, tmp_path, capsys):
        sc = sim.SimConfig(t_final=1.0, initial=plant.PitchState(0.1, 0.0))
        tr = sim.run(plant.PlantParams(), plant.MODE_NATIVE,
                     PidConfig(gains=PidGains(50.0, 0.8, 0.05)), sc)
        cli.write_trajectory_csv(tr, tmp_path / "one.csv")
        rc = run_cli("compare", "--csv", str(tmp_path / "one.csv"))
        assert rc == cli.EXIT_OK
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "label,verdict,settling_time,overshoot_pct,rms_error,peak_abs_u"
        assert out.splitlines()[1].startswith("one,")


class TestSuite:
    def test_fast_suite_writes_everything(self, tmp_path, capsys):
        outdir = tmp_path / "suite"
        rc = run_cli("suite", "--outdir", str(outdir), "--dt", "0.01", "--t-final", "2")
        assert rc in (cli.EXIT_OK, cli.EXIT_DIVERGED)
        csvs = sorted(p.name for p in outdir.glob("*.csv"))
        assert len(csvs) == 8
        assert (outdir / "report.txt").exists()
        assert (outdir / "comparison.png").exists()
        assert len(list(outdir.glob("*.png"))) == 9  # 8 runs + comparison
        out = capsys.readouterr().out
        assert "label" in out and "fuzzy-pd" in out

    def test_fast_suite_deterministic_bytes(self, tmp_path):
        args = ("--dt", "0.01", "--t-final", "2", "--no-figures")
        d1, d2 = tmp_path / "s1", tmp_path / "s2"
        assert run_cli("suite", "--outdir", str(d1), *args) == \
               run_cli("suite", "--outdir", str(d2), *args)
        names = sorted(p.name for p in d1.glob("*.csv"))
        assert names == sorted(p.name for p in d2.glob("*.csv"))
        for name in names:
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_outdir_collision_with_file(self, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("x", encoding="utf-8")
        rc = run_cli("suite", "--outdir", str(blocker), "--dt", "0.01", "--t-final", "1")
        assert rc == cli.EXIT_CONFIG


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        out = tmp_path / "m.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "balancebench", "simulate", "--controller", "pid",
             "--t-final", "0.5", "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert out.exists()
        assert "[config]" in proc.stderr
