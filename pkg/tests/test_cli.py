"""Command-line interface tests, driven through an in-process runner."""

import json

import pytest
from click.testing import CliRunner

from tutorkit.cli import main
from tutorkit.sim import generate_interaction_log, write_interaction_log


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def log_path(tmp_path):
    records, _, _ = generate_interaction_log(40, 12, seed=3)
    path = tmp_path / "responses.ndjson"
    write_interaction_log(records, path)
    return str(path)


def fit_params(runner, log_path, tmp_path) -> str:
    out = str(tmp_path / "params.json")
    result = runner.invoke(main, ["fit", log_path, "--out", out])
    assert result.exit_code == 0, result.output
    return out


class TestHelp:
    def test_group_lists_commands(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for command in ("serve", "fit", "auc", "gain", "simulate", "stats",
                        "validate-bank"):
            assert command in result.output

    def test_serve_help_shows_defaults(self, runner):
        result = runner.invoke(main, ["serve", "--help"])
        assert result.exit_code == 0
        assert "8000" in result.output
        assert "--provider" in result.output


class TestServe:
    @pytest.fixture()
    def captured_run(self, monkeypatch):
        import uvicorn

        calls = {}

        def fake_run(app, **kwargs):
            calls["app"] = app
            calls.update(kwargs)

        monkeypatch.setattr(uvicorn, "run", fake_run)
        return calls

    def test_defaults(self, runner, captured_run, tmp_path):
        with runner.isolated_filesystem(temp_dir=tmp_path):
            result = runner.invoke(main, ["serve"])
        assert result.exit_code == 0, result.output
        assert "http://127.0.0.1:8000" in result.output
        assert "(provider: mock)" in result.output
        assert captured_run["host"] == "127.0.0.1"
        assert captured_run["port"] == 8000

    def test_config_file_supplies_settings(self, runner, captured_run, tmp_path):
        doc = {
            "host": "0.0.0.0",
            "port": 9001,
            "data_dir": str(tmp_path / "store"),
            "gateway": {"provider": "mock", "timeout": 5.0},
        }
        config = tmp_path / "service.json"
        config.write_text(json.dumps(doc), encoding="utf-8")
        result = runner.invoke(main, ["serve", "--config", str(config)])
        assert result.exit_code == 0, result.output
        assert captured_run["host"] == "0.0.0.0"
        assert captured_run["port"] == 9001
        ctx = captured_run["app"].state.ctx
        assert ctx.config.data_dir == str(tmp_path / "store")
        assert ctx.config.gateway.timeout == 5.0

    def test_flags_override_config_file(self, runner, captured_run, tmp_path):
        config = tmp_path / "service.json"
        config.write_text(json.dumps({"host": "0.0.0.0", "port": 9001}),
                          encoding="utf-8")
        with runner.isolated_filesystem(temp_dir=tmp_path):
            result = runner.invoke(
                main, ["serve", "--config", str(config), "--port", "9002"]
            )
        assert result.exit_code == 0, result.output
        assert captured_run["host"] == "0.0.0.0"
        assert captured_run["port"] == 9002

    def test_environment_overrides_config_file(self, runner, captured_run,
                                               tmp_path, monkeypatch):
        monkeypatch.setenv("TUTORKIT_LLM_PROVIDER", "live")
        monkeypatch.setenv("TUTORKIT_LLM_ENDPOINT", "http://env.test/v1")
        config = tmp_path / "service.json"
        config.write_text(json.dumps({"gateway": {"provider": "mock"}}),
                          encoding="utf-8")
        with runner.isolated_filesystem(temp_dir=tmp_path):
            result = runner.invoke(main, ["serve", "--config", str(config)])
        assert result.exit_code == 0, result.output
        assert "(provider: live)" in result.output

    def test_bad_gateway_setting_fails_cleanly(self, runner, captured_run, tmp_path):
        config = tmp_path / "service.json"
        config.write_text(json.dumps({"gateway": {"reply_speed": "fast"}}),
                          encoding="utf-8")
        result = runner.invoke(main, ["serve", "--config", str(config)])
        assert result.exit_code == 1
        assert "unknown gateway settings" in result.output

    def test_non_object_config_rejected(self, runner, captured_run, tmp_path):
        config = tmp_path / "service.json"
        config.write_text("[1, 2]", encoding="utf-8")
        result = runner.invoke(main, ["serve", "--config", str(config)])
        assert result.exit_code == 1
        assert "JSON object" in result.output


class TestFit:
    def test_writes_parameter_document(self, runner, log_path, tmp_path):
        out = tmp_path / "params.json"
        result = runner.invoke(main, ["fit", log_path, "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "records:" in result.output
        assert "converged:" in result.output
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert len(doc["items"]) == 12
        assert {"seed", "iterations", "converged"} <= set(doc["meta"])
        first = doc["items"][0]
        assert {"item_id", "a", "d"} <= set(first)

    def test_item_ids_sorted_in_output(self, runner, log_path, tmp_path):
        out = tmp_path / "params.json"
        runner.invoke(main, ["fit", log_path, "--out", str(out)])
        doc = json.loads(out.read_text(encoding="utf-8"))
        ids = [row["item_id"] for row in doc["items"]]
        assert ids == sorted(ids)

    def test_no_priors_flag_accepted(self, runner, log_path, tmp_path):
        out = tmp_path / "ml.json"
        result = runner.invoke(
            main, ["fit", log_path, "--out", str(out), "--no-priors"]
        )
        assert result.exit_code == 0, result.output

    def test_malformed_log_is_clean_failure(self, runner, tmp_path):
        bad = tmp_path / "bad.ndjson"
        bad.write_text("not json\n", encoding="utf-8")
        result = runner.invoke(main, ["fit", str(bad), "--out", str(tmp_path / "o")])
        assert result.exit_code == 1
        assert "Error:" in result.output
        assert "bad.ndjson:1:" in result.output

    def test_missing_log_file(self, runner, tmp_path):
        result = runner.invoke(
            main, ["fit", str(tmp_path / "absent"), "--out", str(tmp_path / "o")]
        )
        assert result.exit_code == 2  # argument validation, not a domain error


class TestAuc:
    def test_scores_in_unit_interval(self, runner, log_path, tmp_path):
        params = fit_params(runner, log_path, tmp_path)
        result = runner.invoke(main, ["auc", params, log_path])
        assert result.exit_code == 0, result.output
        value = float(result.output.split("auc:")[1].strip())
        assert 0.0 <= value <= 1.0
        assert value > 0.5  # fitted on the same log; better than chance

    def test_accepts_bank_document_as_params(self, runner, tmp_path):
        from tutorkit.bank import bank_to_doc, bundled_bank

        bank = bundled_bank()
        bank_path = tmp_path / "bank.json"
        bank_path.write_text(json.dumps(bank_to_doc(bank)), encoding="utf-8")
        item_ids = [ex.item_id for ex in bank.exercises[:6]]
        records = []
        for sid in ("S1", "S2", "S3", "S4"):
            for n, item_id in enumerate(item_ids):
                records.append(
                    {"student_id": sid, "item_id": item_id, "correct": n % 2}
                )
        log = tmp_path / "log.ndjson"
        log.write_text(
            "".join(json.dumps(r) + "\n" for r in records), encoding="utf-8"
        )
        result = runner.invoke(main, ["auc", str(bank_path), str(log)])
        assert result.exit_code == 0, result.output

    def test_single_class_log_fails_cleanly(self, runner, log_path, tmp_path):
        params = fit_params(runner, log_path, tmp_path)
        log = tmp_path / "ones.ndjson"
        log.write_text(
            json.dumps({"student_id": "S1", "item_id": "I001", "correct": 1}) + "\n",
            encoding="utf-8",
        )
        result = runner.invoke(main, ["auc", params, str(log)])
        assert result.exit_code == 1
        assert "Error:" in result.output


class TestGain:
    def test_gain_from_bank_document(self, runner, tmp_path):
        from tutorkit.bank import bank_to_doc, bundled_bank

        bank_path = tmp_path / "bank.json"
        bank_path.write_text(
            json.dumps(bank_to_doc(bundled_bank())), encoding="utf-8"
        )
        result = runner.invoke(
            main,
            ["gain", "--pre", "0", "--post", "1",
             "--items", str(bank_path), "--concept", "Pronouns"],
        )
        assert result.exit_code == 0, result.output
        assert "Pronouns (20 items)" in result.output
        value = float(result.output.split("gain:")[1].strip())
        assert 0.0 < value < 0.5

    def test_gain_zero_when_theta_unchanged(self, runner, tmp_path):
        from tutorkit.bank import bank_to_doc, bundled_bank

        bank_path = tmp_path / "bank.json"
        bank_path.write_text(
            json.dumps(bank_to_doc(bundled_bank())), encoding="utf-8"
        )
        result = runner.invoke(
            main,
            ["gain", "--pre", "0.7", "--post", "0.7",
             "--items", str(bank_path), "--concept", "Punctuation"],
        )
        assert result.exit_code == 0
        assert float(result.output.split("gain:")[1].strip()) == 0.0

    def test_gain_from_labeled_parameter_document(self, runner, tmp_path):
        doc = {
            "items": [
                {"item_id": "X1", "a": 1.0, "d": -1.0, "concept": "Verbs"},
                {"item_id": "X2", "a": 1.0, "d": 0.0, "concept": "Verbs"},
                {"item_id": "X3", "a": 1.0, "d": 1.0, "concept": "Nouns"},
            ],
            "meta": {},
        }
        path = tmp_path / "params.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        result = runner.invoke(
            main,
            ["gain", "--pre", "0", "--post", "1",
             "--items", str(path), "--concept", "Verbs"],
        )
        assert result.exit_code == 0, result.output
        assert "Verbs (2 items)" in result.output

    def test_unlabeled_parameter_document_is_rejected(self, runner, tmp_path):
        doc = {"items": [{"item_id": "X1", "a": 1.0, "d": 0.0}], "meta": {}}
        path = tmp_path / "params.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        result = runner.invoke(
            main,
            ["gain", "--pre", "0", "--post", "1",
             "--items", str(path), "--concept", "Verbs"],
        )
        assert result.exit_code == 1
        assert "concept labels" in result.output

    def test_unknown_concept_in_bank(self, runner, tmp_path):
        from tutorkit.bank import bank_to_doc, bundled_bank

        bank_path = tmp_path / "bank.json"
        bank_path.write_text(
            json.dumps(bank_to_doc(bundled_bank())), encoding="utf-8"
        )
        result = runner.invoke(
            main,
            ["gain", "--pre", "0", "--post", "1",
             "--items", str(bank_path), "--concept", "Algebra"],
        )
        assert result.exit_code == 1
        assert "unknown concept" in result.output


class TestSimulate:
    def test_small_cohort_report(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main, ["simulate", "--n", "20", "--seed", "5", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert "students:" in result.output
        assert "first-response correctness:" in result.output
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert doc["n_students"] == 20
        assert doc["seed"] == 5
        assert doc["selection"] == "estimated"

    def test_same_seed_same_output(self, runner):
        first = runner.invoke(main, ["simulate", "--n", "15", "--seed", "9"])
        second = runner.invoke(main, ["simulate", "--n", "15", "--seed", "9"])
        assert first.output == second.output

    def test_selection_choice_is_validated(self, runner):
        result = runner.invoke(main, ["simulate", "--n", "5", "--selection", "greedy"])
        assert result.exit_code == 2
        assert "Invalid value" in result.output

    def test_nonpositive_cohort_fails_cleanly(self, runner):
        result = runner.invoke(main, ["simulate", "--n", "0"])
        assert result.exit_code == 1
        assert "Error:" in result.output

    def test_explicit_parameter_document_matches_default(self, runner, tmp_path):
        from tutorkit.bank import bundled_bank

        doc = {
            "items": [
                {
                    "item_id": ex.item_id,
                    "a": ex.params.discrimination,
                    "d": ex.params.difficulty,
                }
                for ex in bundled_bank().exercises
            ],
            "meta": {},
        }
        path = tmp_path / "params.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        explicit = runner.invoke(
            main, ["simulate", "--n", "10", "--seed", "2", "--params", str(path)]
        )
        default = runner.invoke(main, ["simulate", "--n", "10", "--seed", "2"])
        assert explicit.exit_code == 0, explicit.output
        assert explicit.output == default.output


class TestStats:
    def test_bundled_transcripts_by_default(self, runner):
        result = runner.invoke(main, ["stats"])
        assert result.exit_code == 0, result.output
        assert "dialogues:                     4" in result.output
        assert "total turns:                   17" in result.output
        assert "avg. turns per dialogue:       4.25" in result.output
        assert "avg. words per tutor turn:     4.50" in result.output
        assert f"avg. words per student turn:   {13 / 7:.2f}" in result.output

    def test_explicit_transcript_path(self, runner, tmp_path):
        events = [
            {"kind": "pretest_submitted", "payload": {}},
            {"kind": "tutor_message", "payload": {"text": "Hello there, friend."}},
            {"kind": "student_message", "payload": {"text": "Hi."}},
            {"kind": "session_finished", "payload": {}},
        ]
        path = tmp_path / "one.ndjson"
        path.write_text(
            "".join(json.dumps(e) + "\n" for e in events), encoding="utf-8"
        )
        result = runner.invoke(main, ["stats", str(path)])
        assert result.exit_code == 0, result.output
        assert "dialogues:                     1" in result.output
        assert "total turns:                   2" in result.output

    def test_malformed_transcript_fails_with_location(self, runner, tmp_path):
        path = tmp_path / "broken.ndjson"
        good = json.dumps({"kind": "pretest_submitted", "payload": {}})
        path.write_text(f"{good}\nnot json\n", encoding="utf-8")
        result = runner.invoke(main, ["stats", str(path)])
        assert result.exit_code == 1
        assert "broken.ndjson:2:" in result.output


class TestValidateBank:
    def test_bundled_bank_is_valid(self, runner):
        result = runner.invoke(main, ["validate-bank"])
        assert result.exit_code == 0, result.output
        assert "items: 60" in result.output
        assert "bank is valid" in result.output
        for concept in ("Pronouns", "Punctuation", "Transitions"):
            assert concept in result.output

    def test_explicit_bank_document(self, runner, tmp_path):
        from tutorkit.bank import bank_to_doc, bundled_bank

        path = tmp_path / "bank.json"
        path.write_text(json.dumps(bank_to_doc(bundled_bank())), encoding="utf-8")
        result = runner.invoke(main, ["validate-bank", str(path)])
        assert result.exit_code == 0
        assert "bank is valid" in result.output

    def test_invalid_bank_fails_cleanly(self, runner, tmp_path):
        path = tmp_path / "bank.json"
        path.write_text(json.dumps([{"item_id": "X"}]), encoding="utf-8")
        result = runner.invoke(main, ["validate-bank", str(path)])
        assert result.exit_code == 1
        assert "Error:" in result.output
        assert "bank is valid" not in result.output
