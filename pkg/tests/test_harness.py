import json

import pytest

from permlab.harness import (
    ExperimentConfig,
    execute,
    load_config,
    main,
    render_csv,
    run,
)


class TestConfig:
    def test_minimal_config_gets_defaults(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"subcommand": "wtrace"}')
        cfg = load_config(str(path))
        assert cfg.subcommand == "wtrace"
        assert cfg.seed == 0 and cfg.trials == 1
        assert cfg.queries is None

    def test_unknown_key_rejected_by_name(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"subcommand": "wtrace", "foo": 1}')
        with pytest.raises(ValueError, match="'foo'"):
            load_config(str(path))

    def test_parse_error_reports_line_and_column(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"subcommand": "wtrace",\n  broken}')
        with pytest.raises(ValueError, match="line 2"):
            load_config(str(path))

    def test_round_trip_is_canonical(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"trials": 3, "subcommand": "fix", "seed": 9}')
        cfg = load_config(str(path))
        canon = cfg.canonical_json()
        path2 = tmp_path / "cfg2.json"
        path2.write_text(canon)
        assert load_config(str(path2)).canonical_json() == canon

    def test_unknown_subcommand_rejected(self):
        with pytest.raises(ValueError, match="subcommand"):
            ExperimentConfig(subcommand="dance")


class TestRunners:
    def test_verify_random_sweep_n1(self):
        cfg = ExperimentConfig(subcommand="verify", n=1, seed=5, trials=4)
        code, header, rows = execute(cfg)
        assert code == 0  # at n=1 the soundness flag holds (no even members)
        assert header[0] == "instance_id"
        assert len(rows) == 4
        labels = [r[3] for r in rows]
        assert labels == ["YES", "NO", "YES", "NO"]

    def test_verify_exhaustive_no_documents_violations(self):
        cfg = ExperimentConfig(subcommand="verify", n=2, exhaustive_no=True, seed=0)
        code, header, rows = execute(cfg)
        assert len(rows) == 448
        assert all(abs(r[7] - 0.75) < 1e-9 for r in rows)
        # every row exceeds the 2/3 soundness flag, so the run reports failure
        assert code == 1

    def test_verify_fractional(self):
        cfg = ExperimentConfig(subcommand="verify", N=6, seed=1, trials=2)
        code, header, rows = execute(cfg)
        assert rows[0][1] == 6
        yes_row = rows[0]
        assert abs(yes_row[6] - 5 / 6) < 1e-10

    def test_verify_requires_size(self):
        with pytest.raises(ValueError, match="verify"):
            execute(ExperimentConfig(subcommand="verify"))

    def test_dilate_rows_and_flag(self):
        cfg = ExperimentConfig(subcommand="dilate", queries=1, trials=2, seed=3)
        code, header, rows = execute(cfg)
        assert code == 0
        assert header == ["trial", "k", "trace_distance"]
        assert len(rows) == 4  # (t+1) rows per trial
        assert all(r[2] <= 1e-9 for r in rows)

    def test_fix_runner(self):
        cfg = ExperimentConfig(subcommand="fix", trials=3, seed=7)
        code, header, rows = execute(cfg)
        assert code == 0
        assert len(rows) == 3
        assert all(r[4] is True for r in rows)

    def test_crossover_runner(self):
        cfg = ExperimentConfig(subcommand="crossover", alpha=0.25, variant="parity")
        code, header, rows = execute(cfg)
        assert code == 0
        assert header == ["n", "log_upper", "log_lower"]
        assert len(rows) == 64
        assert rows[0][0] == 1

    def test_relation_runner_subset_defaults(self):
        cfg = ExperimentConfig(subcommand="relation")
        code, header, rows = execute(cfg)
        assert code == 0
        m, m_prime, l_max, bound = rows[0]
        assert (m, m_prime) == (10, 5)
        assert bound == pytest.approx((m * m_prime / l_max) ** 0.5)

    def test_relation_runner_preimage(self):
        cfg = ExperimentConfig(subcommand="relation", kind="preimage", n=1)
        code, header, rows = execute(cfg)
        assert rows[0][:3] == [1, 1, 1]

    def test_wtrace_runner(self):
        cfg = ExperimentConfig(subcommand="wtrace", queries=3, seed=2, trials=2)
        code, header, rows = execute(cfg)
        assert code == 0
        assert header == ["t", "w_t", "drop", "sqrt_lmax"]
        assert len(rows) == 8
        assert rows[0][2] == ""  # no drop before the first query


class TestDeterminism:
    def test_same_config_same_bytes(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            cfg = ExperimentConfig(
                subcommand="fix", trials=4, seed=11, out=str(out)
            )
            run(cfg)
        assert out1.read_bytes() == out2.read_bytes()

    def test_different_seed_different_bytes(self, tmp_path):
        outs = []
        for seed in (1, 2):
            out = tmp_path / f"s{seed}.csv"
            run(ExperimentConfig(subcommand="wtrace", seed=seed, out=str(out)))
            outs.append(out.read_bytes())
        assert outs[0] != outs[1]

    def test_float_formatting_17_digits(self):
        text = render_csv(["x"], [[1 / 3]])
        assert "0.33333333333333331" in text


class TestCli:
    def test_main_writes_csv(self, tmp_path):
        out = tmp_path / "rel.csv"
        code = main(["relation", "--V", "6", "--kx", "2", "--ky", "3", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "m,m_prime,l_max,bound"
        assert len(lines) == 2

    def test_main_merges_config_and_flags(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"subcommand": "wtrace", "queries": 2, "seed": 1}))
        out = tmp_path / "w.csv"
        code = main(["wtrace", "--config", str(cfg_path), "--seed", "9", "--out", str(out)])
        assert code == 0
        # flag seed overrides the file seed; file queries survives
        text = out.read_text()
        assert len(text.splitlines()) == 1 + 3  # header + t=0..2
        out2 = tmp_path / "w2.csv"
        assert main(["wtrace", "--queries", "2", "--seed", "9", "--out", str(out2)]) == 0
        assert out.read_bytes() == out2.read_bytes()

    def test_main_reports_config_errors(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text('{"subcommand": "wtrace", "nope": true}')
        code = main(["wtrace", "--config", str(cfg_path)])
        assert code == 2
        assert "nope" in capsys.readouterr().err

    def test_main_stdout_csv(self, capsys):
        code = main(["crossover", "--alpha", "0.25", "--variant", "uniform"])
        assert code == 0
        captured = capsys.readouterr()
        assert captured.out.startswith("n,log_upper,log_lower")
        assert "crossover at n = 2" in captured.err
