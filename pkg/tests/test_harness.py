import csv
import io

import numpy as np
import pytest

from conftest import CASE1, CASE2, LOAN_CSV, loan_context_log, random_log
from logprivacy.cli import cli_main
from logprivacy.embedding import EmbeddingModel, TrainConfig, train_act2vec
from logprivacy.eventlog import EventLog, read_log, variants
from logprivacy.harness import (
    RESULT_COLUMNS,
    SweepConfig,
    compare_measures,
    read_config_file,
    rows_to_csv,
    run_sweep,
)

LOAN_FLAGS = ["--timestamp-column", "time", "--timestamp-format", "%H:%M"]
FAST = TrainConfig(epochs=3, seed=1)


@pytest.fixture
def loan_csv(tmp_path):
    p = tmp_path / "loan_log.csv"
    p.write_bytes(LOAN_CSV)
    return p


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSweep:
    def test_row_count_and_order(self):
        log = random_log(np.random.default_rng(0), 40, 4)
        cfg = SweepConfig(k_values=[2, 4], t_values=[0.5, 1.0], train_config=FAST)
        rows = run_sweep(log, cfg).rows
        assert len(rows) == 8
        assert [(r.measure, r.k, r.t_close) for r in rows[:4]] == [
            ("levenshtein", 2, 0.5), ("levenshtein", 2, 1.0), ("levenshtein", 4, 0.5), ("levenshtein", 4, 1.0)]
        assert all(not r.error for r in rows)

    def test_default_grid_size(self):
        cfg = SweepConfig()
        assert len(cfg.measures) * len(cfg.k_values) * len(cfg.t_values) == 80

    def test_k1_is_identity(self, loan_log):
        cfg = SweepConfig(k_values=[1], t_values=[1.0], train_config=FAST)
        for r in run_sweep(loan_log, cfg).rows:
            assert (r.behavioural_appropriateness, r.truly_sampled_score, r.total_duration_error) == (1.0, 100.0, 0.0)
            assert r.merges == 0 and r.output_traces == 3

    def test_merge_decisions_differ(self):
        # the loan log plus a variant that is one edit from Case 2 but semantically remote
        fraud_mail = ("Check Loan Req.", "Report fraud", "Set up contract", "Mail contract")
        log = EventLog.from_sequences([CASE1, CASE1, fraud_mail, fraud_mail, CASE2])
        model = train_act2vec(loan_context_log(), TrainConfig(seed=0))
        cfg = SweepConfig(k_values=[2], t_values=[1.0])
        lev, emb = run_sweep(log, cfg, model=model).rows
        assert [m.target for m in lev.report.merges] == [fraud_mail]
        assert [m.target for m in emb.report.merges] == [CASE1]

    def test_failing_setting_is_recorded(self, loan_log):
        broken = EmbeddingModel(("x",), np.ones((1, 2)), np.zeros((1, 2)))
        rows = run_sweep(loan_log, SweepConfig(k_values=[2], t_values=[1.0]), model=broken).rows
        assert rows[0].error == ""
        assert "ValueError" in rows[1].error

    def test_deterministic_csv(self):
        log = random_log(np.random.default_rng(5), 60, 5)
        cfg = SweepConfig(k_values=[2, 8], t_values=[0.25, 1.0], train_config=FAST)
        a = rows_to_csv(run_sweep(log, cfg).rows)
        b = rows_to_csv(run_sweep(log, cfg).rows)
        assert a == b
        assert a.splitlines()[0].split(",") == RESULT_COLUMNS

    def test_parallel_matches_serial(self):
        log = random_log(np.random.default_rng(6), 50, 5)
        cfg = SweepConfig(k_values=[2, 4], t_values=[0.5, 1.0], train_config=FAST)
        par = SweepConfig(k_values=[2, 4], t_values=[0.5, 1.0], train_config=FAST, jobs=2)
        assert rows_to_csv(run_sweep(log, cfg).rows) == rows_to_csv(run_sweep(log, par).rows)

    def test_comparison_rows(self, loan_log):
        rows = run_sweep(loan_log, SweepConfig(k_values=[2], t_values=[0.5, 1.0], train_config=FAST)).rows
        comp = compare_measures(rows)
        assert len(comp) == 2
        assert all(c["embedding_tss_at_least_levenshtein"] in ("yes", "no") for c in comp)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(k_values=[])
        with pytest.raises(ValueError):
            SweepConfig(measures=["hamming"])

    def test_config_file(self, tmp_path):
        p = tmp_path / "c.conf"
        p.write_text("# grid\nk-values = 2, 4\nt_values = 0.5  # inline\n\n")
        assert read_config_file(p) == {"k_values": "2, 4", "t_values": "0.5"}
        p.write_text("oops\n")
        with pytest.raises(ValueError, match="c.conf:1"):
            read_config_file(p)


class TestCli:
    def test_no_command(self, capsys):
        assert cli_main([]) == 1

    def test_sweep_without_input(self, capsys):
        assert cli_main(["sweep"]) == 1
        assert "--in" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert cli_main(["stats", "--in", "x.csv", "--bogus"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        assert cli_main(["stats", "--in", str(tmp_path / "none.xes")]) == 2

    def test_bad_csv_is_data_error(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("case,activity,timestamp\n1,A,yesterday\n")
        assert cli_main(["stats", "--in", str(p)]) == 2
        assert "row 2" in capsys.readouterr().err

    def test_stats(self, loan_csv, capsys):
        assert cli_main(["stats", "--in", str(loan_csv), "--followers", *LOAN_FLAGS]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[1] == "loan_log.csv & 3 & 3 & 1.0 & 1"
        assert out[2].startswith("x=1: ")

    def test_anonymize_levenshtein(self, loan_csv, tmp_path):
        out = tmp_path / "anon.csv"
        report = tmp_path / "report.csv"
        argv = ["anonymize", "--k", "2", "--t", "1.0", "--distance", "levenshtein",
                "--in", str(loan_csv), "--out", str(out), "--report", str(report), *LOAN_FLAGS]
        assert cli_main(argv) == 0
        anon = read_log(out)
        assert all(v.count >= 2 for v in variants(anon))
        kinds = [r["kind"] for r in read_rows(report.read_text())]
        assert kinds.count("merge") == 2

    def test_anonymize_embedding_with_saved_model(self, loan_csv, tmp_path):
        model = tmp_path / "m.json"
        assert cli_main(["train", "--in", str(loan_csv), "--out", str(model), "--epochs", "2",
                         "--seed", "3", "--export-csv", str(tmp_path / "m.csv"), *LOAN_FLAGS]) == 0
        assert (tmp_path / "m.csv").read_text().startswith("label,v_1,")
        out = tmp_path / "anon.xes"
        assert cli_main(["anonymize", "--k", "3", "--t", "1.0", "--distance", "embedding",
                         "--embedding-model", str(model), "--in", str(loan_csv),
                         "--out", str(out), *LOAN_FLAGS]) == 0
        assert len(variants(read_log(out))) == 1

    def test_anonymize_rejects_bad_k(self, loan_csv, tmp_path, capsys):
        assert cli_main(["anonymize", "--k", "0", "--t", "1.0", "--in", str(loan_csv),
                         "--out", str(tmp_path / "o.csv"), *LOAN_FLAGS]) == 2

    def test_evaluate(self, loan_csv, tmp_path):
        report = tmp_path / "eval.csv"
        assert cli_main(["evaluate", "--original", str(loan_csv), "--anonymized", str(loan_csv),
                         "--report", str(report), *LOAN_FLAGS]) == 0
        values = {r["metric"]: float(r["value"]) for r in read_rows(report.read_text())}
        assert values["behavioural_appropriateness"] == 1.0
        assert values["truly_sampled_score"] == 100.0
        assert values["total_duration_error"] == 0.0

    def test_sweep_flags_beat_config(self, loan_csv, tmp_path):
        conf = tmp_path / "s.conf"
        conf.write_text("k_values = 4\nt_values = 0.5, 1.0\nmeasures = levenshtein\nepochs = 2\n")
        out = tmp_path / "rows.csv"
        assert cli_main(["sweep", "--in", str(loan_csv), "--config", str(conf), "--k-values", "1,2",
                         "--out", str(out), *LOAN_FLAGS]) == 0
        rows = read_rows(out.read_text())
        assert [(r["measure"], r["k"], r["t_close"]) for r in rows] == [
            ("levenshtein", "1", "0.5"), ("levenshtein", "1", "1.0"),
            ("levenshtein", "2", "0.5"), ("levenshtein", "2", "1.0")]
        assert {r["log"] for r in rows} == {"loan_log"}

    def test_sweep_outputs(self, loan_csv, tmp_path):
        files = {n: tmp_path / f"{n}.csv" for n in ("rows", "timings", "comparison")}
        argv = ["sweep", "--in", str(loan_csv), "--k-values", "2", "--t-values", "1.0", "--epochs", "2",
                "--seed", "4", "--out", str(files["rows"]), "--timings", str(files["timings"]),
                "--comparison", str(files["comparison"]), "--save-model", str(tmp_path / "m.json"),
                *LOAN_FLAGS]
        assert cli_main(argv) == 0
        first = files["rows"].read_bytes()
        assert len(read_rows(first.decode())) == 2
        assert "embedding trained at" in files["timings"].read_text()
        assert len(read_rows(files["comparison"].read_text())) == 1
        assert EmbeddingModel.load(tmp_path / "m.json").labels
        assert cli_main(argv) == 0
        assert files["rows"].read_bytes() == first

    def test_data_dir_env(self, loan_csv, monkeypatch, capsys):
        monkeypatch.setenv("LOGPRIVACY_DATA_DIR", str(loan_csv.parent))
        assert cli_main(["stats", "--in", "loan_log.csv", *LOAN_FLAGS]) == 0

