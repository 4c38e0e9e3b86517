import pytest

from pamplots import PlotSpec, SchemaError, build_figure, read_table, render
from pamplots.cli import main as cli_main


class TestCsvReader:
    def test_meta_and_rows(self, sweep_csv):
        table = read_table(sweep_csv)
        assert table.meta["kind"] == "SEP"
        assert table.meta_float("rho") == 0.5
        assert table.columns[0] == "kappa"
        assert table.rows[0]["lambda_hat"] == 0.31

    def test_empty_cells_become_none(self, cond_csv):
        table = read_table(cond_csv)
        e1 = [r for r in table.rows if r["check_name"] == "E1"][0]
        assert e1["exact"] is None

    def test_no_data_rows_is_schema_error(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# command = sweep\nkappa,p\n")
        with pytest.raises(SchemaError, match="no data rows"):
            read_table(path)


class TestSpecValidation:
    def test_unknown_kind_rejected(self, sweep_csv):
        with pytest.raises(ValueError, match="unknown figure kind"):
            PlotSpec(str(sweep_csv), "histogram", "out.png")

    def test_schema_mismatch_is_error_never_a_guess(self, corr_csv,
                                                    tmp_path):
        spec = PlotSpec(str(corr_csv), "lyapunov_vs_kappa",
                        str(tmp_path / "x.png"))
        with pytest.raises(SchemaError, match="missing required column"):
            build_figure(spec)

    def test_missing_floor_metadata_is_error(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text(
            "kappa,p,t,lambda_hat,std_error,replicas,heavy_tail_flag\n"
            "0.5,0,12.0,0.14,0.02,4,0\n"
        )
        spec = PlotSpec(str(path), "lyapunov_vs_kappa",
                        str(tmp_path / "x.png"))
        with pytest.raises(SchemaError, match="header comment"):
            build_figure(spec)


def _horizontal_levels(fig):
    ax = fig.axes[0]
    levels = []
    for line in ax.lines:
        ydata = line.get_ydata()
        if len(ydata) == 2 and ydata[0] == ydata[1]:
            levels.append(float(ydata[0]))
    return levels


class TestFigures:
    def test_lyapunov_plot_has_floor_reference_line(self, sweep_csv,
                                                    tmp_path):
        spec = PlotSpec(str(sweep_csv), "lyapunov_vs_kappa",
                        str(tmp_path / "lk.png"))
        fig = build_figure(spec)
        assert 0.5 * 0.2 in _horizontal_levels(fig)  # rho * gamma

    def test_trace_plot_has_floor_reference_line(self, sweep_csv, tmp_path):
        spec = PlotSpec(str(sweep_csv), "lambda_trace",
                        str(tmp_path / "tr.png"))
        fig = build_figure(spec)
        assert 0.5 * 0.2 in _horizontal_levels(fig)

    def test_single_kappa_sweep_renders_with_floor(self, tmp_path):
        # One grid point still gets its error bar and the floor line.
        path = tmp_path / "one.csv"
        path.write_text(
            "# rho = 1.0\n# gamma = 1.0\n"
            "kappa,p,t,lambda_hat,std_error,replicas,heavy_tail_flag\n"
            "0.5,0,12.0,1.1,0.05,8,0\n"
        )
        spec = PlotSpec(str(path), "lyapunov_vs_kappa",
                        str(tmp_path / "one.png"))
        fig = build_figure(spec)
        assert 1.0 in _horizontal_levels(fig)
        out = render(spec)
        assert (tmp_path / "one.png").stat().st_size > 0
        assert out.endswith("one.png")

    def test_correlation_overlay_renders(self, corr_csv, tmp_path):
        out = tmp_path / "corr.png"
        render(PlotSpec(str(corr_csv), "correlation_overlay", str(out)))
        assert out.stat().st_size > 0

    def test_conditions_growth_renders(self, cond_csv, tmp_path):
        out = tmp_path / "cond.png"
        render(PlotSpec(str(cond_csv), "conditions_growth", str(out)))
        assert out.stat().st_size > 0

    @pytest.mark.parametrize("suffix", [".png", ".svg"])
    def test_render_is_byte_deterministic(self, sweep_csv, tmp_path, suffix):
        a = tmp_path / f"a{suffix}"
        b = tmp_path / f"b{suffix}"
        render(PlotSpec(str(sweep_csv), "lyapunov_vs_kappa", str(a)))
        render(PlotSpec(str(sweep_csv), "lyapunov_vs_kappa", str(b)))
        assert a.read_bytes() == b.read_bytes()

    def test_multiple_csv_inputs_concatenate(self, sweep_csv, tmp_path):
        other = tmp_path / "sweep2.csv"
        other.write_text(
            "# rho = 0.5\n# gamma = 0.2\n"
            "kappa,p,t,lambda_hat,std_error,replicas,heavy_tail_flag\n"
            "8.0,0,12.0,0.11,0.02,4,0\n"
        )
        spec = PlotSpec((str(sweep_csv), str(other)), "lyapunov_vs_kappa",
                        str(tmp_path / "m.png"))
        fig = build_figure(spec)
        xs = fig.axes[0].lines[0].get_xdata()
        assert max(xs) == 8.0


class TestCli:
    def test_render_command(self, sweep_csv, tmp_path):
        out = tmp_path / "cli.png"
        code = cli_main([
            "render", "--kind", "lambda_trace",
            "--csv", str(sweep_csv), "--out", str(out),
        ])
        assert code == 0
        assert out.stat().st_size > 0

    def test_schema_error_exit_code(self, corr_csv, tmp_path):
        code = cli_main([
            "render", "--kind", "lyapunov_vs_kappa",
            "--csv", str(corr_csv), "--out", str(tmp_path / "x.png"),
        ])
        assert code == 1

    def test_bad_kind_exit_code(self, sweep_csv, tmp_path):
        code = cli_main([
            "render", "--kind", "not_a_kind",
            "--csv", str(sweep_csv), "--out", str(tmp_path / "x.png"),
        ])
        assert code == 1
