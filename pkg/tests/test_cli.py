"""CLI surface: records on stdout, exit codes, config files, ranges."""

import numpy as np
import pytest

from qfm.cli import RunConfig, load_config_file, main, parse_axis, parse_value


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def record_fields(line):
    return dict(kv.split("=", 1) for kv in line.split())


class TestParseValue:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("50kHz", 50e3),
            ("5MHz", 5e6),
            ("10mV", 10e-3),
            ("1%", 0.01),
            ("4.81", 4.81),
            ("1e-3", 1e-3),
            ("5ms", 5e-3),
            ("2us", 2e-6),
            ("-3mV", -3e-3),
        ],
    )
    def test_suffixes(self, text, expected):
        assert parse_value(text) == pytest.approx(expected, rel=1e-12)

    def test_rejects_garbage(self):
        for bad in ("", "fast", "10 furlongs", "1..2"):
            with pytest.raises(ValueError):
                parse_value(bad)

    def test_axis_forms(self):
        assert np.allclose(parse_axis("2,4,6"), [2, 4, 6])
        assert np.allclose(parse_axis("10:14:2"), [10, 12, 14])
        log = parse_axis("1e2:1e4:log")
        assert len(log) == 21 and log[0] == pytest.approx(1e2) and log[-1] == pytest.approx(1e4)
        assert len(parse_axis("1e2:1e4:log5")) == 5
        assert np.allclose(parse_axis("6"), [6.0])
        with pytest.raises(ValueError):
            parse_axis("1:2:3:4")


class TestSimulate:
    def test_defaults_reproduce_reference(self, capsys):
        code, out, _ = run(capsys, "simulate")
        assert code == 0
        fields = record_fields(out.strip())
        assert fields["n"] == "171"
        assert float(fields["q"]) == pytest.approx(299.8, abs=0.1)
        assert fields["convention"] == "last_above"

    def test_invalid_k_exits_2_naming_bound(self, capsys):
        code, out, err = run(capsys, "simulate", "--k", "0.5")
        assert code == 2
        assert out == ""
        assert "k" in err and "1" in err

    def test_pessimistic_flags(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--offset", "10e-3", "--dk", "0.01", "--sign", "plus"
        )
        assert code == 0
        fields = record_fields(out.strip())
        # LAST_ABOVE against the 0.175017 V threshold crosses at count 166
        assert fields["n"] == "166"
        assert float(fields["error"]) == pytest.approx(-0.0298, abs=0.002)

    def test_si_suffix_flags(self, capsys):
        code, out, _ = run(capsys, "simulate", "--f0", "50kHz", "--dk", "1%", "--offset", "10mV")
        assert code == 0
        assert record_fields(out.strip())["n"] == "166"

    def test_trace_output(self, capsys, tmp_path):
        trace = tmp_path / "trace.csv"
        code, _, _ = run(capsys, "simulate", "--trace", str(trace))
        assert code == 0
        lines = trace.read_text().splitlines()
        assert lines[0].startswith("cycle,")
        assert len(lines) == 174

    def test_simulation_failure_exits_3(self, capsys):
        code, _, err = run(capsys, "simulate", "--offset", "0.5", "--sign", "minus", "--dk", "0.01")
        assert code == 3
        assert "threshold" in err


class TestSweep:
    def test_theoretical_row_count(self, capsys, tmp_path):
        out_csv = tmp_path / "sweep.csv"
        code, out, _ = run(
            capsys, "sweep", "theoretical",
            "--k", "2,4,6,8,16", "--q", "10:1000:1", "--out", str(out_csv),
        )
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "k,q_true,n,q_measured,rel_error"
        assert len(lines) == 1 + 5 * 991
        assert "rows=4955" in out

    def test_worstcase_bounded(self, capsys, tmp_path):
        out_csv = tmp_path / "wc.csv"
        code, _, _ = run(
            capsys, "sweep", "worstcase",
            "--k", "4:8:0.5", "--q", "100:1000:9",
            "--dk", "0.01", "--offset", "10e-3", "--out", str(out_csv),
        )
        assert code == 0
        errs = [
            abs(float(line.split(",")[4]))
            for line in out_csv.read_text().splitlines()[1:]
        ]
        assert max(errs) < 0.10

    def test_frequency_regimes_on_emitted_table(self, capsys, tmp_path):
        out_csv = tmp_path / "freq.csv"
        code, _, _ = run(
            capsys, "sweep", "frequency",
            "--f0", "1e3,1e4,5e4,1e6,2e6", "--spp", "25", "--out", str(out_csv),
        )
        assert code == 0
        rows = [line.split(",") for line in out_csv.read_text().splitlines()[1:]]
        err = {float(r[0]): abs(float(r[3])) for r in rows}
        assert err[1e3] > err[1e4]       # leakage-dominated low end
        assert err[2e6] > err[1e6]       # detector failure at the top
        assert err[5e4] <= min(err[1e3], err[2e6])

    def test_svg_emitted(self, capsys, tmp_path):
        out_csv = tmp_path / "t.csv"
        out_svg = tmp_path / "t.svg"
        code, _, _ = run(
            capsys, "sweep", "theoretical",
            "--k", "6", "--q", "100:200:5",
            "--out", str(out_csv), "--svg", str(out_svg),
        )
        assert code == 0
        import xml.etree.ElementTree as ET

        ET.fromstring(out_svg.read_text())

    def test_unwritable_out_exits_4(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "sweep", "theoretical",
            "--k", "6", "--q", "100:110:1",
            "--out", str(tmp_path / "missing_dir" / "x.csv"),
        )
        assert code == 4
        assert err


class TestSynthAndMeasure:
    def test_synth_first_row(self, capsys, tmp_path):
        out = tmp_path / "clean.csv"
        code, _, _ = run(capsys, "synth", "--out", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,v"
        assert lines[1] == "0,1"

    def test_synth_determinism(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        code, _, _ = run(capsys, "synth", "--seed", "3", "--noise", "1e-4", "--out", str(a))
        assert code == 0
        code, _, _ = run(capsys, "synth", "--seed", "3", "--noise", "1e-4", "--out", str(b))
        assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_measure_clean_synth(self, capsys, tmp_path):
        wave = tmp_path / "wave.csv"
        run(capsys, "synth", "--duration", "5ms", "--out", str(wave))
        code, out, _ = run(capsys, "measure", str(wave))
        assert code == 0
        lines = out.strip().splitlines()
        counting = record_fields(lines[0].replace("method=counting ", ""))
        fit = record_fields(lines[1].replace("method=fit ", ""))
        disagreement = float(lines[2].split("=")[1])
        assert counting["n"] == "171"
        assert float(counting["q"]) == pytest.approx(299.8, abs=0.1)
        assert float(fit["q"]) == pytest.approx(300.0, abs=0.3)
        assert disagreement < 0.002

    def test_measure_noisy_synth(self, capsys, tmp_path):
        # auto hysteresis rides over noise two decades under the signal
        wave = tmp_path / "noisy.csv"
        run(capsys, "synth", "--noise", "1e-4", "--seed", "7", "--out", str(wave))
        code, out, _ = run(capsys, "measure", str(wave))
        assert code == 0
        q = float(record_fields(out.strip().splitlines()[0].split(" ", 1)[1])["q"])
        assert q == pytest.approx(300.0, rel=0.01)

    def test_truncated_record_exits_5(self, capsys, tmp_path):
        wave = tmp_path / "short.csv"
        run(capsys, "synth", "--duration", "2ms", "--out", str(wave))
        code, _, err = run(capsys, "measure", str(wave))
        assert code == 5
        assert "insufficient record" in err
        assert "more record" in err

    def test_synth_unwritable_out_exits_4(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "synth", "--out", str(tmp_path / "no_dir" / "w.csv")
        )
        assert code == 4
        assert err

    def test_garbage_file_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("this is not\na waveform\n")
        code, _, err = run(capsys, "measure", str(bad))
        assert code == 2
        assert err

    def test_missing_file_exits_2(self, capsys, tmp_path):
        code, _, _ = run(capsys, "measure", str(tmp_path / "nope.csv"))
        assert code == 2


class TestConfigFile:
    def test_file_then_flag_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("q = 300\nk = 6\noffset = 10mV  # comparator\ndk = 1%\n")
        code, out, _ = run(capsys, "simulate", "--config", str(cfg))
        assert code == 0
        assert record_fields(out.strip())["n"] == "166"
        # flag overrides the file value
        code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--offset", "0", "--dk", "0")
        assert record_fields(out.strip())["n"] == "171"

    def test_env_var_config(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "env.cfg"
        cfg.write_text("k = 8\n")
        monkeypatch.setenv("QFM_CONFIG", str(cfg))
        code, out, _ = run(capsys, "simulate")
        assert code == 0
        result = record_fields(out.strip())
        assert result["n"] != "171"  # k=8 counts further down the envelope

    def test_unknown_key_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("qq = 300\n")
        code, _, err = run(capsys, "simulate", "--config", str(cfg))
        assert code == 2
        assert "qq" in err

    def test_dump_config_round_trip(self, capsys, tmp_path):
        out_path = tmp_path / "dumped.cfg"
        code, _, _ = run(
            capsys, "dump-config", "--q", "123", "--offset", "10mV",
            "--convention", "first_at_or_below", "--out", str(out_path),
        )
        assert code == 0
        reloaded = RunConfig()
        load_config_file(out_path, reloaded)
        expected = RunConfig()
        expected.q = 123.0
        expected.offset = 10e-3
        expected.convention = "first_at_or_below"
        assert reloaded == expected

    def test_dump_config_stdout(self, capsys):
        code, out, _ = run(capsys, "dump-config")
        assert code == 0
        assert "f0 = 50000" in out
        assert "convention = last_above" in out
