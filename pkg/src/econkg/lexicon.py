"""The evolving variable set and relation-keyword set, plus the phrase-confidence model.

A :class:`Lexicon` holds variable entries (canonical name + alias variants) and
relation entries (keyword + polarity class). The bootstrap loop grows both.
:class:`PhraseModel` is a deterministic logistic classifier scoring how likely
an arbitrary corpus phrase is to name a variable.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import Corpus, Phrase, generate_phrases, tokenize

__all__ = [
    "POLARITIES",
    "VariableEntry",
    "RelationEntry",
    "Lexicon",
    "LexiconError",
    "load_seed_lexicons",
    "classify_relation_polarity",
    "PhraseModel",
    "train_phrase_model",
    "score_phrase",
]

POLARITIES = ("increase", "decrease", "neutral")


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class VariableEntry:
    name: str
    variants: tuple[str, ...] = ()
    source: str = "seed"  # seed | bootstrapped | human
    frequency: int = 0

    def surfaces(self) -> tuple[str, ...]:
        return (self.name, *self.variants)


@dataclass(frozen=True)
class RelationEntry:
    keyword: str
    polarity: str
    source: str = "seed"

    def __post_init__(self):
        if not self.keyword:
            raise LexiconError("relation keyword must be non-empty")
        if self.polarity not in POLARITIES:
            raise LexiconError(
                f"unknown polarity {self.polarity!r} for keyword {self.keyword!r}"
            )


@dataclass
class Lexicon:
    """Single-writer container; reads are safe against a frozen snapshot."""

    variables: dict[str, VariableEntry] = field(default_factory=dict)
    relations: dict[str, RelationEntry] = field(default_factory=dict)

    def _known_variable_surfaces(self) -> set[str]:
        out = set()
        for entry in self.variables.values():
            for s in entry.surfaces():
                out.add(s.casefold())
        return out

    def has_variable_surface(self, text: str) -> bool:
        return text.casefold() in self._known_variable_surfaces()

    def variable_entry_for_surface(self, text: str) -> VariableEntry | None:
        fold = text.casefold()
        for entry in self.variables.values():
            if any(s.casefold() == fold for s in entry.surfaces()):
                return entry
        return None

    def add_variable(self, entry: VariableEntry) -> None:
        if not entry.name:
            raise LexiconError("variable name must be non-empty")
        if entry.name in entry.variants:
            raise LexiconError(f"variants of {entry.name!r} must not contain the name")
        known = self._known_variable_surfaces()
        for surface in entry.surfaces():
            if surface.casefold() in known:
                raise LexiconError(f"duplicate variable surface {surface!r}")
        self.variables[entry.name] = entry

    def add_variant(self, name: str, variant: str) -> None:
        if name not in self.variables:
            raise LexiconError(f"unknown variable {name!r}")
        if variant.casefold() in self._known_variable_surfaces():
            raise LexiconError(f"duplicate variable surface {variant!r}")
        entry = self.variables[name]
        self.variables[name] = replace(entry, variants=entry.variants + (variant,))

    def add_relation(self, entry: RelationEntry) -> None:
        if entry.keyword.casefold() in {k.casefold() for k in self.relations}:
            raise LexiconError(f"duplicate relation keyword {entry.keyword!r}")
        self.relations[entry.keyword] = entry

    def copy(self) -> "Lexicon":
        return Lexicon(variables=dict(self.variables), relations=dict(self.relations))

    def check_invariants(self) -> None:
        surfaces: set[str] = set()
        for entry in self.variables.values():
            for s in entry.surfaces():
                fold = s.casefold()
                if fold in surfaces:
                    raise LexiconError(f"surface {s!r} appears twice")
                surfaces.add(fold)
        for entry in self.relations.values():
            if entry.polarity not in POLARITIES:
                raise LexiconError(f"illegal polarity on {entry.keyword!r}")

    def to_files(self, variables_path, relations_path) -> None:
        with open(variables_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["name", "variants"])
            for name in sorted(self.variables):
                entry = self.variables[name]
                writer.writerow([entry.name, "|".join(entry.variants)])
        with open(relations_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["keyword", "polarity"])
            for keyword in sorted(self.relations):
                entry = self.relations[keyword]
                writer.writerow([entry.keyword, entry.polarity])


def load_seed_lexicons(variables_path, relations_path) -> Lexicon:
    """Load the seed variable and relation CSVs.

    variables.csv: ``name,variants`` with ``|``-separated variants (may be
    empty). relations.csv: ``keyword,polarity``. Header rows required.
    """
    lexicon = Lexicon()
    with open(variables_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "name" not in reader.fieldnames:
            raise LexiconError(f"{variables_path}: missing 'name' header")
        for row in reader:
            name = (row.get("name") or "").strip()
            if not name:
                raise LexiconError(f"{variables_path}: empty variable name")
            raw_variants = (row.get("variants") or "").strip()
            variants = tuple(v.strip() for v in raw_variants.split("|") if v.strip())
            lexicon.add_variable(VariableEntry(name=name, variants=variants, source="seed"))
    with open(relations_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "keyword" not in reader.fieldnames:
            raise LexiconError(f"{relations_path}: missing 'keyword' header")
        for row in reader:
            keyword = (row.get("keyword") or "").strip()
            polarity = (row.get("polarity") or "").strip()
            lexicon.add_relation(RelationEntry(keyword=keyword, polarity=polarity, source="seed"))
    return lexicon


def classify_relation_polarity(lexicon: Lexicon, keyword: str) -> str:
    """Polarity class of a known relation keyword; raises on unknown keywords."""
    fold = keyword.casefold()
    for entry in lexicon.relations.values():
        if entry.keyword.casefold() == fold:
            return entry.polarity
    raise KeyError(f"unknown relation keyword {keyword!r}")


# --- phrase confidence model -------------------------------------------------

def _phrase_features(text: str) -> list[str]:
    feats = [f"phrase={text}"]
    toks = tokenize(text.casefold())
    feats.append(f"len={len(toks)}")  # entity names cluster at short lengths
    feats.extend(f"tok={t}" for t in toks)
    padded = "^" + " ".join(toks) + "$"
    feats.extend(f"tri={padded[i:i + 3]}" for i in range(len(padded) - 2))
    return feats


@dataclass(frozen=True)
class PhraseModel:
    """Logistic regression over phrase-identity, token and char-trigram counts."""

    feature_index: dict[str, int]
    weights: np.ndarray  # shape (n_features + 1,); last entry is the bias
    snapshot_id: str

    def _vector(self, text: str) -> np.ndarray:
        x = np.zeros(len(self.feature_index) + 1)
        for feat in _phrase_features(text):
            idx = self.feature_index.get(feat)
            if idx is not None:
                x[idx] += 1.0
        x[-1] = 1.0
        return x

    def score_text(self, text: str) -> float:
        z = float(self._vector(text) @ self.weights)
        return float(1.0 / (1.0 + np.exp(-z)))


def _collect_phrase_texts(corpus: Corpus, n_max: int) -> list[str]:
    seen: dict[str, None] = {}
    for sentence in corpus.sentences():
        for phrase in generate_phrases(sentence, n_max):
            seen.setdefault(phrase.text.casefold(), None)
    return list(seen)


def train_phrase_model(
    lexicon: Lexicon,
    corpus: Corpus,
    negative_ratio: float = 5.0,
    n_max: int = 5,
    seed: int = 0,
    epochs: int = 400,
    learning_rate: float = 1.0,
    l2: float = 1e-4,
) -> PhraseModel:
    """Fit the variable-vs-not classifier on the current lexicon.

    Positives are known variable surfaces that occur as corpus phrases;
    negatives are other corpus phrases sampled at ``negative_ratio`` per
    positive with a fixed RNG seed. Training is full-batch gradient descent
    with a fixed budget, so identical inputs give identical weights.
    """
    if len(lexicon.variables) < 2:
        raise LexiconError("need at least 2 variable entries to train")
    if len(corpus) == 0:
        raise LexiconError("corpus is empty")
    if negative_ratio <= 0:
        raise ValueError("negative_ratio must be positive")

    corpus_phrases = _collect_phrase_texts(corpus, n_max)
    known = lexicon._known_variable_surfaces()
    positives = sorted(p for p in corpus_phrases if p in known)
    if not positives:
        raise LexiconError("no training signal: no lexicon surface occurs in the corpus")
    candidates = sorted(p for p in corpus_phrases if p not in known)
    rng = np.random.default_rng(seed)
    n_neg = min(len(candidates), int(round(negative_ratio * len(positives))))
    negatives = sorted(rng.choice(len(candidates), size=n_neg, replace=False).tolist())
    negatives = [candidates[i] for i in negatives]

    texts = positives + negatives
    labels = np.array([1.0] * len(positives) + [0.0] * len(negatives))
    feature_index: dict[str, int] = {}
    for text in texts:
        for feat in _phrase_features(text):
            feature_index.setdefault(feat, len(feature_index))

    X = np.zeros((len(texts), len(feature_index) + 1))
    for i, text in enumerate(texts):
        for feat in _phrase_features(text):
            X[i, feature_index[feat]] += 1.0
    X[:, -1] = 1.0

    w = np.zeros(X.shape[1])
    n = len(texts)
    for _ in range(epochs):
        p = 1.0 / (1.0 + np.exp(-(X @ w)))
        grad = X.T @ (p - labels) / n
        grad[:-1] += l2 * w[:-1]  # bias unregularized
        w -= learning_rate * grad

    snapshot = hashlib.sha256(
        json.dumps(
            {"pos": positives, "neg": negatives, "seed": seed, "epochs": epochs,
             "lr": learning_rate, "l2": l2},
            sort_keys=True,
        ).encode()
    ).hexdigest()[:16]
    model = PhraseModel(feature_index=feature_index, weights=w, snapshot_id=snapshot)

    for text in positives:
        if model.score_text(text) <= 0.5:
            raise LexiconError(
                f"training did not separate positives (phrase {text!r} scored <= 0.5); "
                "increase epochs or learning rate"
            )
    return model


def score_phrase(model: PhraseModel, phrase: Phrase | str) -> float:
    """Confidence in (0, 1) that the phrase names a variable; deterministic."""
    text = phrase if isinstance(phrase, str) else phrase.text
    return model.score_text(text.casefold())
