import csv
import json
from fractions import Fraction

import pytest

from cubeforms import cli
from cubeforms.cli import (
    CSV_HEADER,
    ConfigError,
    bundled_config_names,
    bundled_config_path,
    parse_config,
    parse_custom_space,
    parse_monomial_form,
)
from cubeforms.forms import DiffForm

TINY_CFG = """
[space]
kind = Qminus
r = 1
k = 0
n = 2

[mesh]
family = uniform
N = 2 4

[run]
quad = 5
"""


class TestCustomSpaceGrammar:
    def test_monomial_one_form(self):
        got = parse_monomial_form("x1^2*x2*dx(1)", 2)
        assert got == DiffForm.monomial_form(2, (1,), (2, 1))

    def test_coefficient_and_zero_form(self):
        got = parse_monomial_form("-3/2*x2", 2)
        assert got == DiffForm.monomial_form(2, (), (0, 1), Fraction(-3, 2))

    def test_volume_form(self):
        got = parse_monomial_form("dx(1,2)", 2)
        assert got == DiffForm.basis_form(2, (1, 2))

    def test_space_list(self):
        space = parse_custom_space("dx(1); x2*dx(1); dx(2); x1*dx(2)", 2)
        assert space.dim == 4 and space.k == 1

    @pytest.mark.parametrize(
        "bad", ["x0*dx(1)", "dx(2,1)", "x1**2", "dx(1)*dx(2)", "y1", ""]
    )
    def test_rejects_garbage(self, bad):
        with pytest.raises(ConfigError):
            parse_custom_space(bad, 2)

    def test_mixed_degrees_rejected(self):
        with pytest.raises(ConfigError):
            parse_custom_space("dx(1); dx(1,2)", 2)


class TestConfigRoundTrip:
    @pytest.mark.parametrize("name", bundled_config_names())
    def test_bundled_configs_parse_and_round_trip(self, name):
        text = bundled_config_path(name).read_text()
        cfg = parse_config(text)
        again = parse_config(cfg.to_text())
        assert cfg == again

    def test_missing_sections(self):
        with pytest.raises(ConfigError):
            parse_config("[space]\nkind = Qminus\nr = 1\nk = 0\nn = 2\n")

    def test_bad_kind(self):
        with pytest.raises(ConfigError):
            parse_config(TINY_CFG.replace("Qminus", "Qplus"))

    def test_shear_length_checked(self):
        text = TINY_CFG.replace("family = uniform", "family = parallelotope\nshear = 0 1/2")
        with pytest.raises(ConfigError):
            parse_config(text)


class TestCheckCommand:
    def test_small_bounds_pass(self, capsys):
        rc = cli.main(["check", "--max-n", "2", "--max-r", "1", "--pullback-maps", "1"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "checks passed" in out
        assert "FAIL" not in out

    def test_corrupted_check_named_on_failure(self, capsys, monkeypatch):
        from cubeforms import verify

        def corrupted(max_n, max_r, pullback_maps):
            return [("dimension r=1 k=0 n=2", False, "injected corruption")]

        monkeypatch.setattr(verify, "run_all", corrupted)
        rc = cli.main(["check"])
        captured = capsys.readouterr()
        assert rc == 1
        assert "FAIL dimension r=1 k=0 n=2" in captured.out
        assert "dimension r=1 k=0 n=2" in captured.err


class TestRatesCommand:
    def test_qminus_range(self, capsys):
        rc = cli.main(["rates", "--kind", "Qminus", "--r", "1..3", "--k", "2", "--n", "2"])
        out = capsys.readouterr().out
        assert rc == 0
        rates = [line.split()[-1] for line in out.splitlines()[1:]]
        assert rates == ["0", "1", "2"]

    def test_serendipity_catalog(self, capsys):
        rc = cli.main(["rates", "--kind", "serendipity", "--r", "1..6", "--n", "3"])
        out = capsys.readouterr().out
        assert rc == 0
        rates = [line.split()[-1] for line in out.splitlines()[1:]]
        assert rates == ["2", "2", "2", "2", "2", "3"]

    def test_p_first_order_3d(self, capsys):
        rc = cli.main(["rates", "--kind", "P", "--r", "6", "--k", "3", "--n", "3"])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.splitlines()[1].split()[-1] == "1"

    def test_bad_space_args_usage_error(self, capsys):
        rc = cli.main(["rates", "--kind", "SLambda1_2d", "--r", "2", "--k", "0", "--n", "3"])
        assert rc == 2


class TestConvergeCommand:
    def test_tiny_run_writes_outputs(self, tmp_path, capsys):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text(TINY_CFG)
        rc = cli.main(["converge", str(cfg), "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert rc == 0
        csv_path = tmp_path / "tiny.csv"
        assert csv_path.exists()
        with open(csv_path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == CSV_HEADER.split(",")
        assert len(rows) == 3
        assert rows[1][8] == ""  # rate_pair empty on the first data row
        record = json.loads((tmp_path / "tiny.json").read_text())
        assert record["report"]["errors"] == [float(r[7]) for r in rows[1:]]
        assert "rate (last pair)" in out

    def test_missing_config(self, capsys):
        assert cli.main(["converge", "/nonexistent/nope.cfg"]) == 2

    def test_malformed_config(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("[space]\nkind = Qminus\n")
        assert cli.main(["converge", str(cfg)]) == 2

    def test_assert_rates_pass_and_fail(self, tmp_path, capsys):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text(TINY_CFG)
        assert (
            cli.main(["converge", str(cfg), "--out", str(tmp_path), "--assert-rates", "0.5"])
            == 0
        )
        assert (
            cli.main(
                ["converge", str(cfg), "--out", str(tmp_path), "--assert-rates", "0.001"]
            )
            == 1
        )

    def test_numerical_failure_exit_code(self, tmp_path):
        cfg = tmp_path / "coarse.cfg"
        cfg.write_text(TINY_CFG.replace("quad = 5", "quad = 1"))
        assert cli.main(["converge", str(cfg), "--out", str(tmp_path)]) == 3

    def test_threads_do_not_change_output(self, tmp_path):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text(TINY_CFG)
        cli.main(["converge", str(cfg), "--out", str(tmp_path / "a")])
        cli.main(["converge", str(cfg), "--out", str(tmp_path / "b"), "--threads", "3"])
        rows_a = (tmp_path / "a" / "tiny.csv").read_text()
        rows_b = (tmp_path / "b" / "tiny.csv").read_text()
        assert rows_a == rows_b

    def test_bundled_name_resolution(self, tmp_path):
        rc = cli.main(
            ["converge", "q1k0_uniform", "--out", str(tmp_path), "--quad", "4"]
        )
        assert rc == 0
        assert (tmp_path / "q1k0_uniform.csv").exists()
