"""Evaluation harness: loading, running, taxonomy, metrics, reports, fetch."""

import http.server
import json
import math
import random
import threading

import pytest

from trilogic.fol import (
    Answered, ExecFailed, Inconsistent, ParseFailed, SourceSpan, Truth,
    Verdict, WorldAssumption,
)
from trilogic.harness import (
    DatasetRecord, ENGINES, FigureCategory, Metrics, RunRecord,
    TranslationRecord, apply_world_assumption, classify_outcome,
    compute_metrics, evaluate, fetch_translations, load_dataset,
    load_translations, pearson, render_report, run_translation,
)

from conftest import DATA_DIR


def write_jsonl(path, lines):
    path.write_text("".join(json.dumps(obj) + "\n" for obj in lines),
                    encoding="utf-8")


class TestLoadDataset:
    def test_micro_fixture(self):
        records = load_dataset(DATA_DIR / "micro" / "dataset.jsonl")
        assert [r.id for r in records] == ["m1", "m2", "m3", "m4"]
        assert records[0].gold is Truth.TRUE
        assert records[3].gold is Truth.FALSE
        assert records[0].tags == {"dataset": "micro"}

    def test_invalid_json_names_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        p.write_text('{"id": "a", "gold": "True", "assumption": "OWA"}\n{oops\n')
        with pytest.raises(ValueError, match="line 2: invalid JSON"):
            load_dataset(p)

    def test_missing_key_names_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        write_jsonl(p, [{"id": "a", "gold": "True"}])
        with pytest.raises(ValueError, match="line 1: missing 'assumption'"):
            load_dataset(p)

    def test_duplicate_id_names_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        write_jsonl(p, [{"id": "a", "gold": "True", "assumption": "OWA"},
                        {"id": "a", "gold": "False", "assumption": "OWA"}])
        with pytest.raises(ValueError, match="line 2: duplicate id 'a'"):
            load_dataset(p)

    def test_bad_gold_label_names_line(self, tmp_path):
        p = tmp_path / "d.jsonl"
        write_jsonl(p, [{"id": "a", "gold": "Maybe", "assumption": "OWA"}])
        with pytest.raises(ValueError, match="^line 1: bad gold label 'Maybe'$"):
            load_dataset(p)

    def test_closed_world_gold_cannot_be_unknown(self, tmp_path):
        p = tmp_path / "d.jsonl"
        write_jsonl(p, [{"id": "a", "gold": "Unknown", "assumption": "CWA"}])
        with pytest.raises(ValueError,
                           match="line 1: record 'a': closed-world gold"):
            load_dataset(p)

    def test_boolean_gold_accepted(self, tmp_path):
        p = tmp_path / "d.jsonl"
        write_jsonl(p, [{"id": "a", "gold": True, "assumption": "CWA"}])
        assert load_dataset(p)[0].gold is Truth.TRUE


class TestLoadTranslations:
    def test_micro_fixture(self):
        ts = load_translations(DATA_DIR / "micro" / "translations_prover9.jsonl")
        assert len(ts) == 4
        assert {t.dialect for t in ts} == {"prover9"}

    def test_unknown_dialect(self, tmp_path):
        p = tmp_path / "t.jsonl"
        write_jsonl(p, [{"id": "a", "dialect": "coq", "text": "x"}])
        with pytest.raises(ValueError, match="line 1: unknown dialect 'coq'"):
            load_translations(p)

    def test_duplicate_pair(self, tmp_path):
        p = tmp_path / "t.jsonl"
        write_jsonl(p, [{"id": "a", "dialect": "z3", "text": "x"},
                        {"id": "a", "dialect": "z3", "text": "y"}])
        with pytest.raises(ValueError, match="line 2: duplicate translation"):
            load_translations(p)

    def test_same_id_different_dialects_ok(self, tmp_path):
        p = tmp_path / "t.jsonl"
        write_jsonl(p, [{"id": "a", "dialect": "z3", "text": "x"},
                        {"id": "a", "dialect": "prover9", "text": "y"}])
        assert len(load_translations(p)) == 2


class TestRunTranslation:
    def test_parse_error_becomes_parse_failed(self):
        out = run_translation("Premises:\np(A\nConclusion:\nq(A)\n",
                              "prover9", "resolution")
        assert isinstance(out, ParseFailed)
        assert out.span is not None

    def test_engine_dialect_pairing_enforced(self):
        with pytest.raises(ValueError, match="does not accept dialect"):
            run_translation("x", "pyke", "resolution")
        with pytest.raises(ValueError, match="does not accept dialect"):
            run_translation("x", "prover9", "chaining")

    def test_each_engine_answers(self):
        p9 = "Premises:\np(A)\nConclusion:\np(A)\n"
        z3 = "P(A)\nreturn P(A)\n"
        pk = ("Predicates:\np($x, bool)\n\nFacts:\np(Anne, True)\n\n"
              "Query:\np(Anne)\n")
        for text, dialect, engine in ((p9, "prover9", "resolution"),
                                      (z3, "z3", "sat"),
                                      (pk, "pyke", "chaining")):
            out = run_translation(text, dialect, engine)
            assert isinstance(out, Answered)
            assert out.verdict.value is Truth.TRUE


class TestClassifyOutcome:
    def test_all_four_categories(self):
        a = Answered(Verdict(Truth.TRUE))
        assert classify_outcome(a, True) is FigureCategory.EXEC_CORRECT
        assert classify_outcome(a, False) is FigureCategory.EXEC_INCORRECT
        p = ParseFailed("bad", SourceSpan(1, 1))
        assert classify_outcome(p, False) is FigureCategory.NONEXEC_PARSE
        x = ExecFailed("boom")
        assert classify_outcome(x, False) is FigureCategory.NONEXEC_RUNTIME

    def test_inconsistent_counts_as_runtime(self):
        assert classify_outcome(Inconsistent(), False) \
            is FigureCategory.NONEXEC_RUNTIME


class TestWorldAssumption:
    def test_cwa_maps_unknown_to_false(self):
        out = apply_world_assumption(Answered(Verdict(Truth.UNKNOWN)),
                                     WorldAssumption.CWA)
        assert out.verdict.value is Truth.FALSE

    def test_cwa_is_idempotent(self):
        once = apply_world_assumption(Answered(Verdict(Truth.UNKNOWN)),
                                      WorldAssumption.CWA)
        twice = apply_world_assumption(once, WorldAssumption.CWA)
        assert once == twice

    def test_owa_passes_through(self):
        out = Answered(Verdict(Truth.UNKNOWN))
        assert apply_world_assumption(out, WorldAssumption.OWA) is out

    def test_definite_answers_untouched(self):
        out = Answered(Verdict(Truth.TRUE))
        assert apply_world_assumption(out, WorldAssumption.CWA) is out

    def test_failures_untouched(self):
        out = ExecFailed("boom")
        assert apply_world_assumption(out, WorldAssumption.CWA) is out


def micro_runs(jobs=1):
    records = load_dataset(DATA_DIR / "micro" / "dataset.jsonl")
    translations = load_translations(
        DATA_DIR / "micro" / "translations_prover9.jsonl")
    return evaluate(records, translations, "prover9", "resolution", jobs=jobs)


class TestEvaluate:
    def test_micro_categories(self):
        runs = micro_runs()
        assert [r.category.value for r in runs] == [
            "ExecCorrect", "ExecIncorrect", "NonExecParse", "ExecCorrect"]

    def test_missing_translation_is_parse_failure(self):
        records = load_dataset(DATA_DIR / "micro" / "dataset.jsonl")
        runs = evaluate(records, [], "prover9", "resolution")
        assert all(r.category is FigureCategory.NONEXEC_PARSE for r in runs)
        assert runs[0].outcome.detail == "translation absent"

    def test_jobs_do_not_change_results(self):
        def stable(runs):
            return [(r.id, r.category, r.correct, r.outcome) for r in runs]

        assert stable(micro_runs(jobs=1)) == stable(micro_runs(jobs=8))

    def test_unknown_engine_rejected(self):
        with pytest.raises(ValueError, match="unknown engine"):
            evaluate([], [], "prover9", "tableau")

    def test_results_sorted_by_id(self):
        runs = micro_runs()
        assert [r.id for r in runs] == sorted(r.id for r in runs)


class TestComputeMetrics:
    def test_micro_metrics(self):
        m = compute_metrics(micro_runs())[0]
        assert m.group == "dataset=micro"
        assert (m.total, m.exec_correct, m.exec_incorrect,
                m.nonexec_parse, m.nonexec_runtime) == (4, 2, 1, 1, 0)
        assert m.exec_rate == pytest.approx(0.75)
        assert m.accuracy == pytest.approx(0.50)

    def test_group_by_engine_and_dialect(self):
        m = compute_metrics(micro_runs(), group_by=("dialect", "engine"))[0]
        assert m.group == "dialect=prover9|engine=resolution"

    def test_missing_tag_groups_under_dash(self):
        m = compute_metrics(micro_runs(), group_by=("nope",))[0]
        assert m.group == "nope=-"

    def test_empty_input_gives_no_rows(self):
        assert compute_metrics([]) == []

    def test_all_correct_pins_both_rates_at_one(self):
        runs = [RunRecord(f"r{i}", "prover9", "resolution",
                          Answered(Verdict(Truth.TRUE)),
                          FigureCategory.EXEC_CORRECT, True, 0.0, False,
                          {"dataset": "edge"})
                for i in range(3)]
        m = compute_metrics(runs)[0]
        assert m.exec_rate == pytest.approx(1.0)
        assert m.accuracy == pytest.approx(1.0)

    def test_all_parse_failures_pin_both_rates_at_zero(self):
        runs = [RunRecord(f"r{i}", "prover9", "resolution", ExecFailed("x"),
                          FigureCategory.NONEXEC_PARSE, False, 0.0, False,
                          {"dataset": "edge"})
                for i in range(3)]
        m = compute_metrics(runs)[0]
        assert m.exec_rate == pytest.approx(0.0)
        assert m.accuracy == pytest.approx(0.0)

    def test_accuracy_never_exceeds_exec_rate_on_fuzzed_runs(self):
        rng = random.Random(42)
        cats = list(FigureCategory)
        for trial in range(1000):
            n = rng.randint(1, 30)
            runs = []
            for i in range(n):
                cat = rng.choice(cats)
                outcome = Answered(Verdict(Truth.TRUE)) \
                    if cat in (FigureCategory.EXEC_CORRECT,
                               FigureCategory.EXEC_INCORRECT) \
                    else ExecFailed("x")
                runs.append(RunRecord(
                    f"r{i}", "prover9", "resolution", outcome, cat,
                    cat is FigureCategory.EXEC_CORRECT, 0.0, False,
                    {"dataset": "fuzz"}))
            m = compute_metrics(runs)[0]
            assert m.accuracy <= m.exec_rate + 1e-12
            assert 0.0 <= m.accuracy <= 1.0
            assert 0.0 <= m.exec_rate <= 1.0


class TestPearson:
    def test_identity_is_one(self):
        assert pearson([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_perfect_inverse(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_known_value(self):
        # by hand: Sxy 5.5, Sxx 5, Syy 8.75
        r = pearson([1, 2, 3, 4], [1, 3, 2, 5])
        assert r == pytest.approx(5.5 / math.sqrt(5 * 8.75))

    def test_degenerate_input_raises(self):
        with pytest.raises(ValueError, match="degenerate input"):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(ValueError, match="degenerate input"):
            pearson([1], [2])


class TestRenderReport:
    def test_markdown_table(self):
        text = render_report(compute_metrics(micro_runs())).decode()
        assert "| dataset=micro | prover9 | resolution | 4 | 75.00% | 50.00% |" in text
        assert "ExecCorrect 50.00%, ExecIncorrect 25.00%, " \
               "NonExecParse 25.00%, NonExecRuntime 0.00%" in text

    def test_csv_fixed_header_and_crlf(self):
        raw = render_report(compute_metrics(micro_runs()), "csv")
        lines = raw.decode().split("\r\n")
        assert lines[0] == ("group,dialect,engine,total,exec_correct,"
                            "exec_incorrect,nonexec_parse,nonexec_runtime,"
                            "exec_rate,accuracy,resource_limited")
        assert lines[1] == "dataset=micro,prover9,resolution,4,2,1,1,0,0.7500,0.5000,0"

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="unknown report format"):
            render_report([], "xml")


class TestFetchFile:
    def test_filters_to_requested_records(self):
        records = load_dataset(DATA_DIR / "micro" / "dataset.jsonl")[:2]
        out = fetch_translations(
            {"provider": "file",
             "path": str(DATA_DIR / "micro" / "translations_prover9.jsonl")},
            records)
        assert sorted(t.id for t in out) == ["m1", "m2"]

    def test_missing_records_logged_not_fatal(self, tmp_path, caplog):
        p = tmp_path / "t.jsonl"
        write_jsonl(p, [{"id": "m1", "dialect": "prover9", "text": "x"}])
        records = load_dataset(DATA_DIR / "micro" / "dataset.jsonl")
        with caplog.at_level("WARNING", logger="trilogic.harness"):
            out = fetch_translations({"provider": "file", "path": str(p)},
                                     records)
        assert len(out) == 1
        assert "no translation found" in caplog.text

    def test_unknown_provider(self):
        with pytest.raises(ValueError, match="unknown provider"):
            fetch_translations({"provider": "carrier-pigeon"}, [])


class _StubHandler(http.server.BaseHTTPRequestHandler):
    """Echoes a canned completion; records the prompts it was sent."""

    prompts: list = []
    fail_ids: set = set()

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        prompt = body["messages"][0]["content"]
        type(self).prompts.append(prompt)
        if any(fid in prompt for fid in self.fail_ids):
            self.send_response(500)
            self.end_headers()
            return
        payload = {"choices": [{"text": f"echo: {prompt}"}]}
        raw = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    _StubHandler.prompts = []
    _StubHandler.fail_ids = set()
    server = http.server.HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()
    thread.join()


class TestFetchHttp:
    def config(self, url, tmp_path, cache=None):
        template = tmp_path / "prompt.txt"
        template.write_text("translate {id}: {text}", encoding="utf-8")
        cfg = {
            "provider": "http",
            "url": url,
            "request_template": {"model": "stub", "messages":
                                 [{"role": "user", "content": ""}]},
            "prompt_field": "messages.0.content",
            "completion_field": "choices.0.text",
            "prompt_templates": {"prover9": str(template)},
        }
        if cache is not None:
            cfg["cache"] = str(cache)
        return cfg

    def records(self):
        return [DatasetRecord("m1", Truth.TRUE, WorldAssumption.OWA,
                              {"text": "Anne is white."}),
                DatasetRecord("m2", Truth.TRUE, WorldAssumption.OWA,
                              {"text": "Bob is round."})]

    def test_posts_templated_prompts_and_collects_completions(
            self, stub_server, tmp_path):
        out = fetch_translations(self.config(stub_server, tmp_path),
                                 self.records())
        assert [t.id for t in out] == ["m1", "m2"]
        assert out[0].text == "echo: translate m1: Anne is white."
        assert out[0].dialect == "prover9"
        assert _StubHandler.prompts == ["translate m1: Anne is white.",
                                        "translate m2: Bob is round."]

    def test_cache_appends_jsonl(self, stub_server, tmp_path):
        cache = tmp_path / "cache.jsonl"
        fetch_translations(self.config(stub_server, tmp_path, cache),
                           self.records())
        cached = load_translations(cache)
        assert [t.id for t in cached] == ["m1", "m2"]
        assert cached[0].provider == stub_server

    def test_server_error_degrades_per_record(self, stub_server, tmp_path,
                                              caplog):
        _StubHandler.fail_ids = {"m1"}
        with caplog.at_level("WARNING", logger="trilogic.harness"):
            out = fetch_translations(self.config(stub_server, tmp_path),
                                     self.records())
        assert [t.id for t in out] == ["m2"]
        assert "fetch failed" in caplog.text

    def test_missing_tag_skips_record(self, stub_server, tmp_path, caplog):
        records = [DatasetRecord("m3", Truth.TRUE, WorldAssumption.OWA, {})]
        with caplog.at_level("WARNING", logger="trilogic.harness"):
            out = fetch_translations(self.config(stub_server, tmp_path),
                                     records)
        assert out == []
        assert "prompt template needs" in caplog.text

    def test_unknown_dialect_in_templates(self, stub_server, tmp_path):
        cfg = self.config(stub_server, tmp_path)
        cfg["prompt_templates"] = {"coq": cfg["prompt_templates"]["prover9"]}
        with pytest.raises(ValueError, match="unknown dialect 'coq'"):
            fetch_translations(cfg, self.records())


class TestEngineTable:
    def test_engine_names(self):
        assert ENGINES == ("resolution", "sat", "chaining")
