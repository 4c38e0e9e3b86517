import math
import os
import subprocess
import sys

from pamlab.cli import main


def run_cli(args, cwd):
    """Run the CLI in-process from `cwd`, returning (exit_code, files)."""
    old = os.getcwd()
    os.chdir(cwd)
    try:
        code = main(args)
    finally:
        os.chdir(old)
    return code


class TestConfigHandling:
    def test_unknown_kind_is_config_error(self, tmp_path):
        code = run_cli(["solve", "--kind", "WAT"], tmp_path)
        assert code == 1

    def test_bad_flag_value_is_config_error(self, tmp_path):
        code = run_cli(["solve", "--t-end", "-3"], tmp_path)
        assert code == 1

    def test_unknown_flag_is_config_error(self, tmp_path):
        code = run_cli(["solve", "--no-such-flag", "1"], tmp_path)
        assert code == 1

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "# demo config\n"
            "kind = CONSTANT\n"
            "d = 1\n"
            "L = 8\n"
            "kappa = 0.0\n"
            "t_end = 1.5\n"
            "n_paths = 200\n"
            "master_seed = 99\n"
        )
        out = tmp_path / "solve.csv"
        code = run_cli(
            ["solve", "--config", str(cfg), "--t-end", "2.0",
             "--output", str(out)],
            tmp_path,
        )
        assert code == 0
        text = out.read_text()
        assert "# t_end = 2.0" in text      # flag overrode the file
        assert "# kind = CONSTANT" in text
        assert "# master_seed = 99" in text

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("frobnicate = 3\n")
        assert run_cli(["solve", "--config", str(cfg)], tmp_path) == 1

    def test_sweep_grid_must_be_sorted(self, tmp_path):
        code = run_cli(["sweep", "--kappa-grid", "2,1", "--t-end", "12",
                        "--n-env", "4"], tmp_path)
        assert code == 1

    def test_simulation_failure_exit_code(self, tmp_path):
        # Valid config, but the voter run exceeds its consensus-time cap at
        # simulation time: distinct exit code from config errors.
        code = run_cli(
            ["solve", "--kind", "SVM", "--rho", "0.5", "--d", "1",
             "--L", "8", "--t-end", "20", "--n-paths", "100"],
            tmp_path,
        )
        assert code == 2


class TestSolveCommand:
    def test_constant_kappa0_closed_form(self, tmp_path, capsys):
        out = tmp_path / "solve.csv"
        code = run_cli(
            ["solve", "--kind", "CONSTANT", "--d", "1", "--L", "8",
             "--kappa", "0", "--t-end", "1.5", "--n-paths", "500",
             "--rho", "1.0", "--output", str(out)],
            tmp_path,
        )
        assert code == 0
        text = out.read_text()
        rows = [
            line for line in text.splitlines()
            if line and not line.startswith("#")
        ]
        header, data = rows[0].split(","), rows[1].split(",")
        log_u0 = float(data[header.index("log_u0")])
        assert abs(log_u0 - 1.5) < 1e-8   # gamma*c*t = 1*1*1.5
        fk_mean = float(next(
            line.split("=")[1] for line in text.splitlines()
            if line.startswith("# fk_mean")
        ))
        assert abs(fk_mean - math.exp(1.5)) < 1e-8 * math.exp(1.5)
        captured = capsys.readouterr().out
        assert "closed form" in captured

    def test_trajectory_roundtrip_via_cli(self, tmp_path):
        traj_path = tmp_path / "t.bin"
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        base = ["solve", "--kind", "SEP", "--rho", "0.5", "--d", "1",
                "--L", "8", "--kappa", "0.5", "--t-end", "1.0",
                "--n-paths", "300", "--master-seed", "7"]
        assert run_cli(
            base + ["--save-trajectory", str(traj_path),
                    "--output", str(out1)], tmp_path
        ) == 0
        assert run_cli(
            base + ["--load-trajectory", str(traj_path),
                    "--output", str(out2)], tmp_path
        ) == 0
        ignore = ("# load_trajectory", "# save_trajectory", "# output")
        rows1 = [r for r in out1.read_text().splitlines()
                 if not r.startswith(ignore)]
        rows2 = [r for r in out2.read_text().splitlines()
                 if not r.startswith(ignore)]
        assert rows1 == rows2


class TestDeterminismAndIsolation:
    def test_sweep_byte_identical_and_worker_independent(self, tmp_path):
        args = ["sweep", "--kind", "ISRW", "--d", "1", "--L", "16",
                "--kappa-grid", "0,0.5", "--t-end", "12", "--n-env", "4",
                "--master-seed", "5", "--output", "sweep.csv"]
        outs = []
        for name, extra in (("r1", []), ("r2", []),
                            ("r3", ["--workers", "2"])):
            sub = tmp_path / name
            sub.mkdir()
            assert run_cli(args + extra, sub) == 0
            outs.append((sub / "sweep.csv").read_bytes())
        # byte-identical across reruns AND across worker counts
        assert outs[0] == outs[1]
        assert outs[0] == outs[2]

    def test_commands_write_only_their_output(self, tmp_path):
        before = set(os.listdir(tmp_path))
        out = tmp_path / "corr.csv"
        assert run_cli(
            ["correlate", "--kind", "SEP", "--rho", "0.5", "--d", "1",
             "--L", "8", "--t-list", "0.5", "--x-list", "0",
             "--n-env", "1000", "--output", str(out)],
            tmp_path,
        ) == 0
        after = set(os.listdir(tmp_path))
        assert after - before == {"corr.csv"}


class TestSelfcheck:
    def test_selfcheck_passes_and_is_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        assert run_cli(["selfcheck", "--output", str(out1)], tmp_path) == 0
        assert run_cli(["selfcheck", "--output", str(out2)], tmp_path) == 0
        strip = lambda b: b"\n".join(
            ln for ln in b.splitlines() if not ln.startswith(b"# output")
        )
        assert strip(out1.read_bytes()) == strip(out2.read_bytes())
        text = out1.read_text()
        assert "FAIL" not in text

    def test_selfcheck_script_entry(self, tmp_path):
        # End to end through the console entry point.
        out = tmp_path / "sc.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "pamlab.cli", "selfcheck",
             "--output", str(out)],
            capture_output=True, text=True, cwd=tmp_path,
        )
        assert proc.returncode == 0, proc.stderr
        assert "PASS" in proc.stdout


class TestCorrelateAndConditions:
    def test_correlate_schema(self, tmp_path):
        out = tmp_path / "corr.csv"
        assert run_cli(
            ["correlate", "--kind", "ISRW", "--d", "1", "--L", "16",
             "--t-list", "0.5,1", "--x-list", "0,e", "--n-env", "1500",
             "--output", str(out)],
            tmp_path,
        ) == 0
        lines = [l for l in out.read_text().splitlines()
                 if not l.startswith("#")]
        assert lines[0] == ("check_name,kind,d,L,rho,x,t,n_env,empirical,"
                            "std_error,exact,z_score")
        assert len(lines) == 1 + 4
        z = abs(float(lines[1].split(",")[-1]))
        assert z < 10

    def test_conditions_schema(self, tmp_path):
        out = tmp_path / "cond.csv"
        assert run_cli(
            ["conditions", "--kind", "SEP", "--rho", "0.5", "--d", "1",
             "--L", "16", "--t-list", "5,10", "--n-env", "64",
             "--output", str(out)],
            tmp_path,
        ) == 0
        lines = [l for l in out.read_text().splitlines()
                 if not l.startswith("#")]
        assert lines[0].startswith("check_name,kind,d,L,rho,T,n_env")
        names = {l.split(",")[0] for l in lines[1:]}
        assert names == {"E1", "E2", "E4bar"}
