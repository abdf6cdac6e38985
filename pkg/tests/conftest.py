import json
from importlib import resources

import pytest

from econkg.corpus import Corpus, Document, Sentence, ingest_documents
from econkg.lexicon import Lexicon, RelationEntry, VariableEntry, load_seed_lexicons

GOLDEN_PARAGRAPH = (
    "Dr. Gao concluded that a long-term systematic migrant worker shortage "
    "began to appear in the Chinese migrant labor market around 2005, which "
    "greatly increased the growth rate of migrant workers' wages, resulted "
    "in the increase of food prices, and pushed up the increase in consumer "
    "price index, making the average level of inflation probably 100 to 200 "
    "basis points higher."
)

GOLDEN_TRIPLES = {
    ("migrant worker shortage", "increase", "growth rate of migrant workers' wages"),
    ("growth rate of migrant workers' wages", "resulted in the increase", "food prices"),
    ("food prices", "push up", "consumer price index"),
    ("food prices", "make higher", "inflation"),
}

GOLDEN_UNIQUE_TRIPLES = {
    ("migrant worker shortage", "increase", "growth rate of migrant workers' wages"),
    ("growth rate of migrant workers' wages", "increase", "food prices"),
    ("food prices", "increase", "inflation"),
}


def fixture_path(name: str) -> str:
    return str(resources.files("econkg.fixtures") / name)


@pytest.fixture(scope="session")
def demo_corpus() -> Corpus:
    return ingest_documents(fixture_path("demo_corpus.jsonl"))


@pytest.fixture(scope="session")
def demo_lexicon() -> Lexicon:
    return load_seed_lexicons(
        fixture_path("demo_variables.csv"), fixture_path("demo_relations.csv")
    )


def make_sentence(text: str, doc_id: str = "d", index: int = 0) -> Sentence:
    from econkg.corpus import tokenize

    return Sentence(doc_id=doc_id, index=index, tokens=tokenize(text), raw=text)


def make_corpus(sentences_by_doc: dict[str, list[str]]) -> Corpus:
    docs = []
    for doc_id, texts in sentences_by_doc.items():
        sentences = tuple(
            make_sentence(text, doc_id=doc_id, index=i) for i, text in enumerate(texts)
        )
        docs.append(Document(id=doc_id, sentences=sentences))
    return Corpus(documents=docs)


def separable_corpus() -> tuple[Corpus, Lexicon]:
    """Corpus where true variables are exactly the phrases containing 'rate'.

    Seeds know two of them; 'deposit rate' and 'loan rate' are planted unseen.
    """
    texts = [
        "the saving rate moved while the weather stayed calm",
        "analysts saw the inflation rate and the deposit rate drift apart",
        "the loan rate rose as shipping costs and port queues built up",
        "commentary about gardens and recipes filled the remaining pages",
        "the saving rate and the inflation rate were revised in march",
    ]
    corpus = make_corpus({"doc-1": texts})
    lexicon = Lexicon()
    lexicon.add_variable(VariableEntry(name="saving rate"))
    lexicon.add_variable(VariableEntry(name="inflation rate"))
    lexicon.add_relation(RelationEntry(keyword="push up", polarity="increase"))
    return corpus, lexicon


def write_jsonl(path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


_WORDS = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "lam", "mu", "nu", "xi", "omicron", "pi", "rho",
    "sigma", "tau", "upsilon", "phi", "chi", "psi", "omega",
]

_REL_PHRASES = [
    ("pushes upward", "increase"), ("drags down", "decrease"),
    ("moves with", "neutral"), ("boosts strongly", "increase"),
    ("cuts back", "decrease"), ("varies alongside", "neutral"),
]

_FILLERS = [
    "the weather report mentioned scattered clouds over the coast",
    "a festival filled the town square with music and food stalls",
    "several committees postponed their meetings until next spring",
    "the library extended its opening hours for the exam season",
]


def synthetic_forecast_files(tmp_path, n_months: int = 279, seed: int = 1234,
                             delay: int = 12, rho: float = 0.97):
    """Seeded data-generating process for the forecasting comparison.

    The target is driven by three alternative series with a ``delay``-month
    lag, plus observation noise. The baseline panel holds the target and 11
    unrelated series; only the KG panel carries the three drivers, and the
    bundled graph links them to the target. The generating equation is the
    oracle: models with access to the drivers can forecast horizons beyond
    ``delay`` far better than models that only see the target's own past.
    """
    import os

    import numpy as np

    from econkg.coref import CanonicalMap
    from econkg.kgraph import build_graph, export_graph
    from econkg.triples import RdfTriple, dedup_triples

    os.makedirs(tmp_path, exist_ok=True)
    rng = np.random.default_rng(seed)
    total = n_months + delay

    def ar1(rho_, sigma, n):
        x = np.zeros(n)
        for t in range(1, n):
            x[t] = rho_ * x[t - 1] + sigma * rng.normal()
        return x

    alts = [ar1(rho, 0.3, total) for _ in range(3)]
    weights = [6.0, 5.0, -5.5]
    noise = rng.normal(size=total) * 2.0
    level = 200.0
    y = np.full(total, level)
    for j, w in zip(range(3), weights):
        y += w * np.concatenate([np.zeros(delay), alts[j][:-delay]])
    y += noise
    y = y[delay:]
    alts = [a[delay:] for a in alts]
    junk = [ar1(0.9, 1.0, total)[delay:] for _ in range(11)]

    month_ordinal_base = 1996 * 12 + 3  # 1996-04
    months = [f"{(month_ordinal_base + i) // 12:04d}-"
              f"{(month_ordinal_base + i) % 12 + 1:02d}" for i in range(n_months)]

    def write_panel(path, columns):
        names = list(columns)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("month," + ",".join(names) + "\n")
            for i, m in enumerate(months):
                cells = [f"{columns[c][i]:.10f}" for c in names]
                fh.write(m + "," + ",".join(cells) + "\n")

    baseline_path = tmp_path / "baseline_panel.csv"
    kg_path = tmp_path / "kg_panel.csv"
    write_panel(baseline_path, {"TGT": y, **{f"S{i:02d}": junk[i] for i in range(11)}})
    write_panel(kg_path, {"TGT": y, "ALT1": alts[0], "ALT2": alts[1], "ALT3": alts[2]})

    triples = dedup_triples([
        RdfTriple("alt one", "lifts", "increase", "target"),
        RdfTriple("alt two", "lifts", "increase", "target"),
        RdfTriple("alt three", "cuts", "decrease", "target"),
    ], CanonicalMap.identity())
    graph = build_graph(triples, centers=["target"])
    graph_path = tmp_path / "graph.json"
    graph_path.write_text(export_graph(graph, "graph-JSON"))

    aliases_path = tmp_path / "aliases.csv"
    aliases_path.write_text(
        "entity,column\ntarget,TGT\nalt one,ALT1\nalt two,ALT2\nalt three,ALT3\n")
    return {
        "baseline_panel": baseline_path,
        "kg_panel": kg_path,
        "graph": graph_path,
        "aliases": aliases_path,
    }


def planted_setup(n_vars: int = 20, n_rels: int = 6):
    """Synthetic corpus with known ground truth for bootstrap recovery tests.

    Every true variable ends in the token 'rate', giving the phrase model a
    learnable signal. Planted relation keywords connect two seed variables so
    the relation-gap rule surfaces them; planted variables appear next to a
    seed keyword so the variable-gap rule surfaces them.
    """
    assert n_vars <= len(_WORDS) and n_rels <= len(_REL_PHRASES)
    planted_vars = [f"{w} rate" for w in _WORDS[:n_vars]]
    planted_rels = dict(_REL_PHRASES[:n_rels])

    texts = []
    for keyword in planted_rels:
        texts.append(f"base rate {keyword} policy rate")
    for v in planted_vars:
        texts.append(f"{v} raises base rate")
    texts.extend(_FILLERS)
    corpus = make_corpus({"synthetic": texts})

    lexicon = Lexicon()
    lexicon.add_variable(VariableEntry(name="base rate"))
    lexicon.add_variable(VariableEntry(name="policy rate"))
    lexicon.add_relation(RelationEntry(keyword="raise", polarity="increase"))

    planted_var_set = {v.casefold() for v in planted_vars}

    def oracle_source(batch):
        from econkg.bootstrap import LabelDecision

        decisions = []
        for item in batch.items:
            text = item.text.casefold()
            if batch.kind == "variable" and text in planted_var_set:
                decisions.append(LabelDecision(item.text, "variable", "accept"))
            elif batch.kind == "relation" and text in planted_rels:
                decisions.append(LabelDecision(item.text, "relation", "accept",
                                               polarity=planted_rels[text]))
            else:
                decisions.append(LabelDecision(item.text, batch.kind, "reject"))
        return decisions

    return corpus, lexicon, oracle_source, planted_vars, planted_rels
