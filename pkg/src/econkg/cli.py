"""Command-line driver chaining the pipeline stages for headless, reproducible runs."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .bootstrap import BootstrapConfig, BootstrapError, LabelPool, run_until_converged
from .coref import CanonicalMap, EmbeddingSource, MergeDecision, merge_entities, propose_duplicates
from .corpus import CorpusError, ingest_documents, serialize_corpus
from .kgraph import build_graph, export_graph, load_graph_json, subgraph_around
from .lexicon import LexiconError, load_seed_lexicons
from .manifest import write_manifest
from .mentions import MentionFinder
from .triples import dedup_triples, extract_triples, read_triples_jsonl, write_triples_jsonl

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


class CliError(RuntimeError):
    pass


def _fixture(name: str) -> str:
    from importlib import resources

    return str(resources.files("econkg.fixtures") / name)


def _require_file(path, flag: str) -> str:
    if not os.path.exists(path):
        raise CliError(f"{flag}: no such file: {path}")
    return str(path)


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- stage implementations ----------------------------------------------------

def cmd_ingest(args) -> int:
    started = time.monotonic()
    corpus_path = _require_file(args.corpus, "--corpus")
    corpus = ingest_documents(corpus_path, format=args.format)
    os.makedirs(args.out_dir, exist_ok=True)
    out_path = os.path.join(args.out_dir, "corpus.jsonl")
    serialize_corpus(corpus, out_path)
    write_manifest("ingest", args.out_dir, vars(args), [corpus_path], [out_path],
                   seed=args.seed, started=started)
    print(f"ingested {len(corpus)} documents -> {out_path}")
    return 0


def _load_lexicon(args):
    return load_seed_lexicons(
        _require_file(args.variables, "--variables"),
        _require_file(args.relations, "--relations"),
    )


def cmd_bootstrap(args) -> int:
    started = time.monotonic()
    corpus = ingest_documents(_require_file(args.corpus, "--corpus"))
    lexicon = _load_lexicon(args)
    if args.interactive:
        raise CliError("interactive adjudication runs through the curation "
                       "service: start `econkg serve` and open the UI")
    if not args.labels:
        raise BootstrapError("no adjudicator: provide --labels files or --interactive")
    pool = LabelPool.from_files([_require_file(p, "--labels") for p in args.labels])
    config = BootstrapConfig(
        threshold=args.threshold, k=args.k, max_iterations=args.max_iterations,
        seed=args.seed,
    )
    result = run_until_converged(corpus, lexicon, pool, config)
    os.makedirs(args.out_dir, exist_ok=True)
    variables_out = os.path.join(args.out_dir, "lexicon_variables.csv")
    relations_out = os.path.join(args.out_dir, "lexicon_relations.csv")
    log_out = os.path.join(args.out_dir, "iteration_log.jsonl")
    result.lexicon.to_files(variables_out, relations_out)
    with open(log_out, "w", encoding="utf-8", newline="\n") as fh:
        for record in result.log:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    write_manifest("bootstrap", args.out_dir, vars(args),
                   [args.corpus, args.variables, args.relations, *args.labels],
                   [variables_out, relations_out, log_out],
                   seed=args.seed, started=started)
    print(f"bootstrap {'converged' if result.converged else 'stopped'} after "
          f"{result.iterations} iterations; "
          f"{len(result.lexicon.variables)} variables, "
          f"{len(result.lexicon.relations)} relations")
    return 0


def cmd_coref(args) -> int:
    started = time.monotonic()
    lexicon = _load_lexicon(args)
    source = EmbeddingSource.load(_require_file(args.vectors, "--vectors")) \
        if args.vectors else None
    entities = sorted({s for e in lexicon.variables.values() for s in e.surfaces()})
    proposals = propose_duplicates(entities, source, tau=args.tau,
                                   lexicon=lexicon, dimension=args.dimension)
    os.makedirs(args.out_dir, exist_ok=True)
    proposals_out = os.path.join(args.out_dir, "coref_proposals.jsonl")
    with open(proposals_out, "w", encoding="utf-8", newline="\n") as fh:
        for a, b, score in proposals:
            fh.write(json.dumps({"a": a, "b": b, "score": score},
                                ensure_ascii=False) + "\n")
    outputs = [proposals_out]
    inputs = [args.variables, args.relations] + ([args.vectors] if args.vectors else [])
    if args.decisions:
        decisions = []
        with open(_require_file(args.decisions, "--decisions"), encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    decisions.append(MergeDecision(
                        a=rec["a"], b=rec["b"],
                        confirm=bool(rec.get("confirm", True)),
                        canonical=rec.get("canonical")))
        freq = {e.name: e.frequency for e in lexicon.variables.values()}
        canonical = merge_entities(decisions, frequencies=freq)
        map_out = os.path.join(args.out_dir, "canonical_map.json")
        _write_text(map_out, json.dumps(dict(sorted(canonical.items())),
                                        indent=2, ensure_ascii=False) + "\n")
        outputs.append(map_out)
        inputs.append(args.decisions)
    write_manifest("coref", args.out_dir, vars(args), inputs, outputs,
                   seed=args.seed, started=started)
    print(f"{len(proposals)} duplicate proposals -> {proposals_out}")
    return 0


def _canonical_from_file(path) -> CanonicalMap:
    with open(path, encoding="utf-8") as fh:
        return CanonicalMap(json.load(fh))


def cmd_extract(args) -> int:
    started = time.monotonic()
    corpus = ingest_documents(_require_file(args.corpus, "--corpus"))
    lexicon = _load_lexicon(args)
    if args.canonical:
        canonical = _canonical_from_file(_require_file(args.canonical, "--canonical"))
    else:
        canonical = CanonicalMap.from_lexicon(lexicon)
    finder = MentionFinder(lexicon)
    triples = []
    for sentence in corpus.sentences():
        triples.extend(extract_triples(sentence, lexicon, finder))
    deduped = dedup_triples(triples, canonical)
    os.makedirs(args.out_dir, exist_ok=True)
    raw_out = os.path.join(args.out_dir, "triples_raw.jsonl")
    dedup_out = os.path.join(args.out_dir, "triples.jsonl")
    write_triples_jsonl(triples, raw_out)
    write_triples_jsonl(deduped, dedup_out)
    inputs = [args.corpus, args.variables, args.relations]
    if args.canonical:
        inputs.append(args.canonical)
    write_manifest("extract", args.out_dir, vars(args), inputs,
                   [raw_out, dedup_out], seed=args.seed, started=started)
    print(f"{len(triples)} triples ({len(deduped)} unique) -> {dedup_out}")
    return 0


def cmd_graph(args) -> int:
    started = time.monotonic()
    triples = read_triples_jsonl(_require_file(args.triples, "--triples"))
    centers = [c.strip() for c in (args.centers or "").split(",") if c.strip()]
    graph = build_graph(triples, centers=centers)
    if args.center and args.hops:
        graph = subgraph_around(graph, args.center, args.hops)
    os.makedirs(args.out_dir, exist_ok=True)
    json_out = os.path.join(args.out_dir, "graph.json")
    dot_out = os.path.join(args.out_dir, "graph.dot")
    _write_text(json_out, export_graph(graph, "graph-JSON"))
    _write_text(dot_out, export_graph(graph, "DOT"))
    write_manifest("graph", args.out_dir, vars(args), [args.triples],
                   [json_out, dot_out], seed=args.seed, started=started)
    print(f"graph with {len(graph.nodes)} nodes, {len(graph.edges)} edges -> {json_out}")
    return 0


def cmd_select(args) -> int:
    started = time.monotonic()
    from .forecast import kg_feature_set, load_alias_map, load_panel

    with open(_require_file(args.graph, "--graph"), encoding="utf-8") as fh:
        graph = load_graph_json(fh.read())
    panel = load_panel(_require_file(args.panel, "--panel"))
    name_map = load_alias_map(_require_file(args.aliases, "--aliases"))
    columns = kg_feature_set(graph, args.target, panel, name_map, hops=args.hops)
    os.makedirs(args.out_dir, exist_ok=True)
    out_path = os.path.join(args.out_dir, "selected_columns.json")
    _write_text(out_path, json.dumps(
        {"target": args.target, "hops": args.hops, "columns": columns},
        indent=2, ensure_ascii=False) + "\n")
    write_manifest("select", args.out_dir, vars(args),
                   [args.graph, args.panel, args.aliases], [out_path],
                   seed=args.seed, started=started)
    print(f"{len(columns)} columns -> {out_path}")
    return 0


def cmd_forecast(args) -> int:
    started = time.monotonic()
    from .forecast import (ExperimentConfig, TargetSpec, load_alias_map,
                           load_panel, plot_report, run_experiment, write_report)

    config_path = _require_file(args.config, "--config")
    with open(config_path, "rb") as fh:
        raw = tomllib.load(fh)
    exp = raw.get("experiment")
    if not isinstance(exp, dict):
        raise CliError(f"{config_path}: missing [experiment] table")
    try:
        targets = [TargetSpec(
            name=t["name"],
            baseline_column=t["baseline_column"],
            kg_entity=t["kg_entity"],
            kg_column=t.get("kg_column"),
        ) for t in exp.get("targets", [])]
        config = ExperimentConfig(
            targets=targets,
            horizons=list(exp.get("horizons", range(1, 13))),
            lag_window=int(exp.get("lag_window", 3)),
            test_fraction=float(exp.get("test_fraction", 0.2)),
            hops=int(exp.get("hops", 1)),
            lambda_grid_size=int(exp.get("lambda_grid_size", 50)),
            lambda_min_ratio=float(exp.get("lambda_min_ratio", 1e-3)),
            n_folds=int(exp.get("n_folds", 5)),
            dm_loss=exp.get("dm_loss", "squared"),
            seed=int(exp.get("seed", args.seed)),
            dummy_columns=list(exp.get("dummy_columns", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{config_path}: bad experiment config: {exc}") from exc
    baseline_panel = load_panel(_require_file(exp["baseline_panel"], "baseline_panel"))
    kg_panel = load_panel(_require_file(exp["kg_panel"], "kg_panel"))
    with open(_require_file(exp["graph"], "graph"), encoding="utf-8") as fh:
        graph = load_graph_json(fh.read())
    name_map = load_alias_map(_require_file(exp["aliases"], "aliases"))

    report = run_experiment(config, baseline_panel, kg_panel, graph, name_map)
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = write_report(report, args.out_dir)
    outputs.extend(plot_report(report, args.out_dir))
    write_manifest("forecast", args.out_dir, vars(args),
                   [config_path, exp["baseline_panel"], exp["kg_panel"],
                    exp["graph"], exp["aliases"]],
                   outputs, seed=config.seed, started=started)
    print(f"report for {len(report.results)} (target, horizon) pairs -> {args.out_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(
        corpus_path=_require_file(args.corpus, "--corpus"),
        variables_path=_require_file(args.variables, "--variables"),
        relations_path=_require_file(args.relations, "--relations"),
        data_dir=args.data_dir,
        token=args.token,
    )
    if args.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=_require_file(args.ui_dir, "--ui-dir"),
                                   html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_demo(args) -> int:
    """End-to-end worked example on the bundled fixtures."""
    started = time.monotonic()
    corpus_path = _fixture("demo_corpus.jsonl")
    variables_path = _fixture("demo_variables.csv")
    relations_path = _fixture("demo_relations.csv")
    corpus = ingest_documents(corpus_path)
    lexicon = load_seed_lexicons(variables_path, relations_path)
    finder = MentionFinder(lexicon)
    triples = []
    for sentence in corpus.sentences():
        triples.extend(extract_triples(sentence, lexicon, finder))
    canonical = CanonicalMap.from_lexicon(lexicon)
    deduped = dedup_triples(triples, canonical)
    graph = build_graph(deduped, centers=["inflation"])

    os.makedirs(args.out_dir, exist_ok=True)
    raw_out = os.path.join(args.out_dir, "triples_raw.jsonl")
    dedup_out = os.path.join(args.out_dir, "triples.jsonl")
    json_out = os.path.join(args.out_dir, "graph.json")
    dot_out = os.path.join(args.out_dir, "graph.dot")
    write_triples_jsonl(triples, raw_out)
    write_triples_jsonl(deduped, dedup_out)
    _write_text(json_out, export_graph(graph, "graph-JSON"))
    _write_text(dot_out, export_graph(graph, "DOT"))
    write_manifest("demo", args.out_dir, vars(args),
                   [corpus_path, variables_path, relations_path],
                   [raw_out, dedup_out, json_out, dot_out],
                   seed=args.seed, started=started)
    print("extracted triples:")
    for t in triples:
        print(f"  {{{t.subject}, {t.relation_keyword}, {t.object}}}")
    print("unique triples after name unification:")
    for t in deduped:
        print(f"  {{{t.subject}, {t.relation_keyword}, {t.object}}}")
    print(f"graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges -> {dot_out}")
    return 0


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="econkg",
        description="Build knowledge graphs of economic-variable linkages and "
                    "run KG-guided forecasting experiments.",
    )
    parser.add_argument("--version", action="version", version=f"econkg {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--out-dir", default=f"out/{name}", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="seed for stochastic stages")
        return p

    p = add("ingest", cmd_ingest, "normalize a corpus JSONL file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", default="auto", choices=["auto", "plain", "pre-tokenized"])

    p = add("bootstrap", cmd_bootstrap, "expand the lexicons with batch labels")
    p.add_argument("--corpus", required=True)
    p.add_argument("--variables", required=True)
    p.add_argument("--relations", required=True)
    p.add_argument("--labels", nargs="*", default=[], help="batch label JSONL files")
    p.add_argument("--interactive", action="store_true")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--max-iterations", type=int, default=10)

    p = add("coref", cmd_coref, "propose duplicates and build the canonical map")
    p.add_argument("--variables", required=True)
    p.add_argument("--relations", required=True)
    p.add_argument("--vectors", help="word-vector text file")
    p.add_argument("--tau", type=float, default=0.15)
    p.add_argument("--dimension", type=int, default=64)
    p.add_argument("--decisions", help="confirmed merge decisions JSONL")

    p = add("extract", cmd_extract, "extract and deduplicate triples")
    p.add_argument("--corpus", required=True)
    p.add_argument("--variables", required=True)
    p.add_argument("--relations", required=True)
    p.add_argument("--canonical", help="canonical map JSON from the coref stage")

    p = add("graph", cmd_graph, "assemble the knowledge graph from triples")
    p.add_argument("--triples", required=True)
    p.add_argument("--centers", help="comma-separated center variables")
    p.add_argument("--center", help="restrict output to a subgraph around this node")
    p.add_argument("--hops", type=int, default=0)

    p = add("select", cmd_select, "KG-guided feature selection for a target")
    p.add_argument("--graph", required=True)
    p.add_argument("--panel", required=True)
    p.add_argument("--aliases", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--hops", type=int, default=1)

    p = add("forecast", cmd_forecast, "run the forecasting comparison experiment")
    p.add_argument("--config", required=True, help="experiment TOML file")

    p = add("serve", cmd_serve, "start the curation HTTP service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--variables", required=True)
    p.add_argument("--relations", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default="out/serve")
    p.add_argument("--token", help="require this value in the X-Auth-Token header")
    p.add_argument("--ui-dir", help="serve the curation UI from this directory")

    add("demo", cmd_demo, "run the bundled worked example end to end")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "fn", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.fn(args)
    except (CliError, BootstrapError, CorpusError, LexiconError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
