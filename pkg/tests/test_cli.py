import io
import re

import pytest

from incnlu.cli import main
from incnlu.data import TrainingDataset
from incnlu.interpreter import load as load_bundle

from conftest import make_example, toy_rows

WIRE_RE = re.compile(r"^\S*\t\d\.\d{6}\t(\S+:\S+:\d+:\d+(;\S+:\S+:\d+:\d+)*)?$")


@pytest.fixture(scope="session")
def cli_env(tmp_path_factory):
    """A trained bundle plus the data files the CLI tests poke at."""
    import contextlib

    from incnlu.data import save_json

    root = tmp_path_factory.mktemp("cli")
    data = root / "toy.json"
    save_json(TrainingDataset([make_example(*r) for r in toy_rows()]), data)
    bundle = root / "bundle"
    with contextlib.redirect_stdout(io.StringIO()):
        code = main(["train", "--data", str(data), "--out", str(bundle)])
    assert code == 0
    return {"root": root, "data": data, "bundle": bundle}


class TestTrain:
    def test_reports_counts_and_writes_a_bundle(self, cli_env, capsys):
        out = cli_env["root"] / "bundle2"
        code = main(["train", "--data", str(cli_env["data"]), "--out", str(out)])
        captured = capsys.readouterr()
        assert code == 0
        assert "trained on 14 utterances" in captured.out
        assert (out / "manifest.json").exists()
        assert (out / "config.yml").exists()
        assert (out / "intent_sium" / "model.tsv").exists()

    def test_accepts_a_config_file(self, cli_env, tmp_path, capsys):
        config = tmp_path / "two.yml"
        config.write_text(
            'language: "en"\npipeline:\n- name: "tokenizer_whitespace"\n- name: "intent_sium"\n',
            encoding="utf-8",
        )
        out = tmp_path / "bundle"
        code = main(
            ["train", "--config", str(config), "--data", str(cli_env["data"]), "--out", str(out)]
        )
        assert code == 0
        assert "trained on" in capsys.readouterr().out
        loaded = load_bundle(out)
        assert [c.name for c in loaded.components] == ["tokenizer_whitespace", "intent_sium"]

    def test_missing_required_flag_exits_one(self, cli_env, capsys):
        with pytest.raises(SystemExit) as err:
            main(["train", "--data", str(cli_env["data"])])
        assert err.value.code == 1
        assert "--out" in capsys.readouterr().err

    def test_unknown_subcommand_exits_one(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 1
        assert "invalid choice" in capsys.readouterr().err

    def test_missing_data_file_exits_one(self, cli_env, tmp_path, capsys):
        code = main(
            ["train", "--data", str(tmp_path / "absent.json"), "--out", str(tmp_path / "b")]
        )
        assert code == 1
        assert "not found" in capsys.readouterr().err


class TestParse:
    def test_parses_a_file_of_utterances(self, cli_env, tmp_path, capsys):
        batch = tmp_path / "batch.txt"
        batch.write_text("book a table for two\nplay some jazz\n\n", encoding="utf-8")
        code = main(["parse", "--model", str(cli_env["bundle"]), "--input", str(batch)])
        lines = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert len(lines) == 2  # the blank line produces no output
        for line in lines:
            assert WIRE_RE.match(line), line
        intent, confidence, entities = lines[0].split("\t")
        assert intent == "BookRestaurant"
        assert 0.0 < float(confidence) <= 1.0
        assert entities == "party_size:two:4:5"
        assert lines[1].startswith("PlayMusic\t")

    def test_reads_stdin_when_no_input_given(self, cli_env, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("weather in denver\n"))
        code = main(["parse", "--model", str(cli_env["bundle"])])
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("GetWeather\t")

    def test_missing_bundle_exits_one(self, tmp_path, capsys):
        code = main(["parse", "--model", str(tmp_path / "nothing"), "--input", "/dev/null"])
        assert code == 1
        assert "manifest" in capsys.readouterr().err


class TestStream:
    def _run(self, cli_env, feed, monkeypatch, capsys):
        monkeypatch.setattr("sys.stdin", io.StringIO(feed))
        code = main(["stream", "--model", str(cli_env["bundle"])])
        captured = capsys.readouterr()
        return code, captured.out.strip().splitlines(), captured.err

    def test_one_result_line_per_edit(self, cli_env, monkeypatch, capsys):
        code, lines, err = self._run(cli_env, "weather\nin\nboston\n", monkeypatch, capsys)
        assert code == 0 and err == ""
        assert len(lines) == 3
        for line in lines:
            assert WIRE_RE.match(line), line
        assert lines[-1].split("\t")[0] == "GetWeather"

    def test_revoke_rewinds_to_the_clean_result(self, cli_env, monkeypatch, capsys):
        feed = "weather\nin\ndenver\n<REVOKE>\nboston\n"
        code, lines, _ = self._run(cli_env, feed, monkeypatch, capsys)
        assert code == 0
        assert len(lines) == 5
        # after the detour the stream must land exactly where a clean run does
        clean_code, clean_lines, _ = self._run(
            cli_env, "weather\nin\nboston\n", monkeypatch, capsys
        )
        assert clean_code == 0
        assert lines[-1] == clean_lines[-1]
        # and the post-revoke line matches the two-word prefix of the clean run
        assert lines[3] == clean_lines[1]

    def test_blank_line_starts_a_new_utterance(self, cli_env, monkeypatch, capsys):
        code, lines, _ = self._run(cli_env, "play\n\njazz\n", monkeypatch, capsys)
        assert code == 0
        assert len(lines) == 2
        fresh_code, fresh_lines, _ = self._run(cli_env, "jazz\n", monkeypatch, capsys)
        assert fresh_code == 0
        assert lines[1] == fresh_lines[0]

    def test_revoke_on_empty_session_reports_and_continues(self, cli_env, monkeypatch, capsys):
        code, lines, err = self._run(cli_env, "<REVOKE>\nboston\n", monkeypatch, capsys)
        assert code == 0
        assert err.startswith("error:")
        assert len(lines) == 1  # the session survived the bad edit


class TestEval:
    def test_passing_run_exits_zero_and_writes_the_report(self, cli_env, tmp_path, capsys):
        report = tmp_path / "report.kv"
        code = main(
            [
                "eval",
                "--model", str(cli_env["bundle"]),
                "--test", str(cli_env["data"]),
                "--noise-rate", "0.4",
                "--report", str(report),
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "all consistency checks pass: yes" in out
        kv = dict(
            line.split("=", 1) for line in report.read_text(encoding="utf-8").strip().splitlines()
        )
        assert kv["all_checks_pass"] == "1"
        assert kv["equivalence.exact"] == kv["equivalence.total"] == "14"
        assert kv["noise.rate_0.4.passed"] == "14"

    def test_out_of_range_noise_rate_exits_one(self, cli_env, capsys):
        code = main(
            [
                "eval",
                "--model", str(cli_env["bundle"]),
                "--test", str(cli_env["data"]),
                "--noise-rate", "1.5",
            ]
        )
        assert code == 1
        assert "noise-rate" in capsys.readouterr().err
