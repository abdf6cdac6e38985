import json
import subprocess
import sys

from econkg.cli import main

from conftest import GOLDEN_TRIPLES, GOLDEN_UNIQUE_TRIPLES, fixture_path, write_jsonl


def run_cli(*argv):
    return main(list(argv))


class TestDemo:
    def test_demo_writes_golden_outputs(self, tmp_path, capsys):
        out = tmp_path / "demo"
        assert run_cli("demo", "--out-dir", str(out)) == 0
        raw = [json.loads(line) for line in
               (out / "triples_raw.jsonl").read_text().splitlines()]
        assert {(r["subject"], r["relation"], r["object"]) for r in raw} == GOLDEN_TRIPLES
        unique = [json.loads(line) for line in
                  (out / "triples.jsonl").read_text().splitlines()]
        assert {(r["subject"], r["polarity"], r["object"]) for r in unique} \
            == GOLDEN_UNIQUE_TRIPLES
        assert (out / "graph.dot").exists()
        assert (out / "graph.json").exists()
        assert (out / "demo.manifest.json").exists()
        stdout = capsys.readouterr().out
        assert "migrant worker shortage" in stdout

    def test_demo_deterministic(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run_cli("demo", "--out-dir", str(out_a)) == 0
        assert run_cli("demo", "--out-dir", str(out_b)) == 0
        manifest_a = json.loads((out_a / "demo.manifest.json").read_text())
        manifest_b = json.loads((out_b / "demo.manifest.json").read_text())
        digests_a = {p.split("/")[-1]: d for p, d in manifest_a["outputs"].items()}
        digests_b = {p.split("/")[-1]: d for p, d in manifest_b["outputs"].items()}
        assert digests_a == digests_b


class TestUsage:
    def test_no_arguments_exit_2(self, capsys):
        assert run_cli() == 2

    def test_unknown_subcommand_exit_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "econkg.cli", "frobnicate"],
            capture_output=True, text=True)
        assert proc.returncode == 2

    def test_missing_config_exit_1(self, tmp_path, capsys):
        rc = run_cli("forecast", "--config", str(tmp_path / "missing.toml"),
                     "--out-dir", str(tmp_path / "out"))
        assert rc == 1
        assert "missing.toml" in capsys.readouterr().err


class TestStages:
    def test_ingest_round_trip_and_manifest_determinism(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        write_jsonl(corpus, [{"id": "a", "title": "t", "text": "GDP rose. CPI fell."}])
        outs = []
        for sub in ("x", "y"):
            out = tmp_path / sub
            assert run_cli("ingest", "--corpus", str(corpus), "--out-dir", str(out)) == 0
            manifest = json.loads((out / "ingest.manifest.json").read_text())
            outs.append({p.split("/")[-1]: d for p, d in manifest["outputs"].items()})
        assert outs[0] == outs[1]

    def test_extract_then_graph_then_select(self, tmp_path):
        extract_out = tmp_path / "extract"
        rc = run_cli(
            "extract",
            "--corpus", fixture_path("demo_corpus.jsonl"),
            "--variables", fixture_path("demo_variables.csv"),
            "--relations", fixture_path("demo_relations.csv"),
            "--out-dir", str(extract_out),
        )
        assert rc == 0
        graph_out = tmp_path / "graph"
        rc = run_cli("graph", "--triples", str(extract_out / "triples.jsonl"),
                     "--centers", "inflation", "--out-dir", str(graph_out))
        assert rc == 0
        graph = json.loads((graph_out / "graph.json").read_text())
        assert len(graph["nodes"]) == 4
        assert len(graph["edges"]) == 3

        panel = tmp_path / "panel.csv"
        panel.write_text(
            "month,CPI,FOOD\n" + "".join(
                f"200{i // 12}-{i % 12 + 1:02d},{100 + i},{50 + i}\n" for i in range(24)))
        aliases = tmp_path / "aliases.csv"
        aliases.write_text("entity,column\ninflation,CPI\nfood prices,FOOD\n")
        select_out = tmp_path / "select"
        rc = run_cli("select", "--graph", str(graph_out / "graph.json"),
                     "--panel", str(panel), "--aliases", str(aliases),
                     "--target", "inflation", "--hops", "1",
                     "--out-dir", str(select_out))
        assert rc == 0
        selected = json.loads((select_out / "selected_columns.json").read_text())
        assert selected["columns"] == ["CPI", "FOOD"]

    def test_bootstrap_batch_mode(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        write_jsonl(corpus, [
            {"id": "d1", "text": "base rate pushes upward policy rate"},
            {"id": "d2", "text": "alpha rate raises base rate"},
            {"id": "d3", "text": "the committee met on a rainy afternoon"},
            {"id": "d4", "text": "several unrelated remarks closed the report"},
        ])
        variables = tmp_path / "variables.csv"
        variables.write_text("name,variants\nbase rate,\npolicy rate,\n")
        relations = tmp_path / "relations.csv"
        relations.write_text("keyword,polarity\nraise,increase\n")
        labels = tmp_path / "labels.jsonl"
        write_jsonl(labels, [
            {"candidate": "pushes upward", "kind": "relation",
             "decision": "accept", "polarity": "increase"},
            {"candidate": "alpha rate", "kind": "variable", "decision": "accept"},
        ])
        out = tmp_path / "boot"
        # seed frozen on a draw whose negative sample leaves "alpha rate" free
        rc = run_cli("bootstrap", "--corpus", str(corpus),
                     "--variables", str(variables), "--relations", str(relations),
                     "--labels", str(labels), "--threshold", "0.4", "--k", "50",
                     "--seed", "5", "--out-dir", str(out))
        assert rc == 0
        grown = (out / "lexicon_variables.csv").read_text()
        assert "alpha rate" in grown
        assert "pushes upward" in (out / "lexicon_relations.csv").read_text()
        log_lines = (out / "iteration_log.jsonl").read_text().splitlines()
        assert any(json.loads(line)["type"] == "decision" for line in log_lines)

    def test_bootstrap_without_labels_errors(self, tmp_path, capsys):
        corpus = tmp_path / "corpus.jsonl"
        write_jsonl(corpus, [{"id": "d", "text": "nothing here"}])
        variables = tmp_path / "v.csv"
        variables.write_text("name,variants\na b,\nc d,\n")
        relations = tmp_path / "r.csv"
        relations.write_text("keyword,polarity\n")
        rc = run_cli("bootstrap", "--corpus", str(corpus),
                     "--variables", str(variables), "--relations", str(relations),
                     "--out-dir", str(tmp_path / "out"))
        assert rc == 1
        assert "no adjudicator" in capsys.readouterr().err

    def test_coref_stage(self, tmp_path):
        out = tmp_path / "coref"
        decisions = tmp_path / "decisions.jsonl"
        write_jsonl(decisions, [
            {"a": "CPI", "b": "inflation", "confirm": True, "canonical": "inflation"}])
        rc = run_cli("coref",
                     "--variables", fixture_path("demo_variables.csv"),
                     "--relations", fixture_path("demo_relations.csv"),
                     "--decisions", str(decisions),
                     "--out-dir", str(out))
        assert rc == 0
        mapping = json.loads((out / "canonical_map.json").read_text())
        assert mapping["CPI"] == "inflation"
        assert (out / "coref_proposals.jsonl").exists()
