"""Recursive weakly supervised expansion of the variable and relation sets.

Each iteration runs four phases: propose relation keywords from sentences rich
in known variables but poor in known keywords; retrain the phrase model and
propose variable candidates corpus-wide; propose variables from sentences that
contain known keywords but few known variables; retrain and propose corpus-wide
again. A human adjudicator (interactive session or batch label files) decides
every candidate; the loop stops when a full iteration adds nothing, or at the
iteration cap. Rejected candidates are never proposed again.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .corpus import Corpus, Sentence, generate_phrases
from .lexicon import (
    Lexicon,
    LexiconError,
    PhraseModel,
    RelationEntry,
    VariableEntry,
    train_phrase_model,
)
from .mentions import MentionFinder

__all__ = [
    "BootstrapError",
    "BootstrapConfig",
    "CandidateItem",
    "CandidateBatch",
    "LabelDecision",
    "SentenceRef",
    "ApplyResult",
    "LabelPool",
    "BootstrapSession",
    "propose_variable_candidates",
    "propose_relation_candidates",
    "find_relation_gap_sentences",
    "find_variable_gap_sentences",
    "apply_labels",
    "run_until_converged",
]

PHASES = ("relations", "variables-global", "variables-gap", "variables-global-2")


class BootstrapError(ValueError):
    pass


@dataclass(frozen=True)
class BootstrapConfig:
    threshold: float = 0.5
    k: int = 20
    min_vars: int = 2  # relation-gap rule: at least this many variables
    max_rels: int = 0  # ... and at most this many known keywords
    min_rels: int = 1  # variable-gap rule: at least this many keywords
    max_vars: int = 1  # ... and at most this many known variables
    n_max: int = 5
    negative_ratio: float = 5.0
    seed: int = 0
    max_iterations: int = 10

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must lie in (0, 1]")
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.min_vars < 2 or self.max_rels < 0 or self.min_rels < 1 or self.max_vars < 0:
            raise ValueError("gap-sentence thresholds out of range")


@dataclass(frozen=True)
class CandidateItem:
    text: str
    confidence: float
    examples: tuple[tuple[str, int], ...] = ()  # (doc_id, sentence index)


@dataclass(frozen=True)
class CandidateBatch:
    iteration: int
    kind: str  # variable | relation
    items: tuple[CandidateItem, ...]
    status: str = "open"  # open | resolved
    batch_id: str = ""
    phase: str = ""


@dataclass(frozen=True)
class LabelDecision:
    candidate: str
    kind: str  # variable | relation
    decision: str  # accept | reject
    polarity: str | None = None
    canonical_name: str | None = None

    def __post_init__(self):
        if self.kind not in ("variable", "relation"):
            raise BootstrapError(f"unknown candidate kind {self.kind!r}")
        if self.decision not in ("accept", "reject"):
            raise BootstrapError(f"unknown decision {self.decision!r}")


@dataclass(frozen=True)
class SentenceRef:
    doc_id: str
    index: int
    variable_count: int
    relation_count: int


@dataclass(frozen=True)
class ApplyResult:
    lexicon: Lexicon
    rejects: frozenset[tuple[str, str]]  # (kind, folded text)
    added_variables: int = 0
    added_relations: int = 0
    added_variants: int = 0
    rejected: int = 0

    @property
    def added(self) -> int:
        return self.added_variables + self.added_relations + self.added_variants


def _phrase_occurrences(corpus: Corpus, n_max: int) -> dict[str, list[tuple[str, int]]]:
    """Folded phrase text -> sentence references, in corpus order."""
    occurrences: dict[str, list[tuple[str, int]]] = {}
    for sentence in corpus.sentences():
        seen_here: set[str] = set()
        for phrase in generate_phrases(sentence, n_max):
            text = phrase.text.casefold()
            if text in seen_here:
                continue
            seen_here.add(text)
            occurrences.setdefault(text, []).append((sentence.doc_id, sentence.index))
    return occurrences


def propose_variable_candidates(
    model: PhraseModel,
    corpus: Corpus,
    lexicon: Lexicon,
    threshold: float,
    k: int,
    n_max: int = 5,
    exclude: frozenset[tuple[str, str]] = frozenset(),
    iteration: int = 0,
    restrict_to: set[tuple[str, int]] | None = None,
    phase: str = "variables-global",
    batch_id: str = "",
) -> CandidateBatch:
    """Top-k corpus phrases by confidence, at or above the threshold.

    Phrases already in the variable set (name or variant) and previously
    rejected candidates are excluded. ``restrict_to`` limits the scored
    phrases to those occurring in the referenced sentences.
    """
    if not 0.0 < threshold:
        raise ValueError("threshold must be positive")
    occurrences = _phrase_occurrences(corpus, n_max)
    items = []
    for text, refs in occurrences.items():
        if lexicon.has_variable_surface(text):
            continue
        if ("variable", text) in exclude:
            continue
        if restrict_to is not None and not any(ref in restrict_to for ref in refs):
            continue
        confidence = model.score_text(text)
        if confidence >= threshold:
            items.append(CandidateItem(text=text, confidence=confidence,
                                       examples=tuple(refs[:3])))
    items.sort(key=lambda item: (-item.confidence, item.text))
    return CandidateBatch(
        iteration=iteration,
        kind="variable",
        items=tuple(items[:k]),
        batch_id=batch_id or f"variable-{iteration}",
        phase=phase,
    )


def _sentence_counts(sentence: Sentence, finder: MentionFinder) -> tuple[int, int]:
    variables = finder.variable_mentions(sentence)
    relations = finder.relation_mentions(sentence, variables)
    return len({v.entry_name for v in variables}), len(relations)


def find_relation_gap_sentences(
    corpus: Corpus,
    lexicon: Lexicon,
    min_vars: int = 2,
    max_rels: int = 0,
) -> list[SentenceRef]:
    """Sentences with many known variables but few known relation keywords."""
    if min_vars < 2 or max_rels < 0:
        raise ValueError("min_vars must be >= 2 and max_rels >= 0")
    finder = MentionFinder(lexicon)
    refs = []
    for sentence in corpus.sentences():
        n_vars, n_rels = _sentence_counts(sentence, finder)
        if n_vars >= min_vars and n_rels <= max_rels:
            refs.append(SentenceRef(sentence.doc_id, sentence.index, n_vars, n_rels))
    refs.sort(key=lambda r: (-r.variable_count, r.relation_count, r.doc_id, r.index))
    return refs


def find_variable_gap_sentences(
    corpus: Corpus,
    lexicon: Lexicon,
    min_rels: int = 1,
    max_vars: int = 1,
) -> list[SentenceRef]:
    """Sentences with known relation keywords but few known variables."""
    if min_rels < 1 or max_vars < 0:
        raise ValueError("min_rels must be >= 1 and max_vars >= 0")
    finder = MentionFinder(lexicon)
    refs = []
    for sentence in corpus.sentences():
        n_vars, n_rels = _sentence_counts(sentence, finder)
        if n_rels >= min_rels and n_vars <= max_vars:
            refs.append(SentenceRef(sentence.doc_id, sentence.index, n_vars, n_rels))
    refs.sort(key=lambda r: (-r.relation_count, r.variable_count, r.doc_id, r.index))
    return refs


def propose_relation_candidates(
    corpus: Corpus,
    lexicon: Lexicon,
    gap_sentences: list[SentenceRef],
    k: int = 20,
    n_max: int = 5,
    exclude: frozenset[tuple[str, str]] = frozenset(),
    iteration: int = 0,
    batch_id: str = "",
) -> CandidateBatch:
    """Connective n-grams between adjacent variable mentions in gap sentences.

    Candidates are ranked by how many gap sentences they connect; the human
    adjudicator supplies the polarity on acceptance.
    """
    finder = MentionFinder(lexicon)
    known_keywords = {kw.casefold() for kw in lexicon.relations}
    counts: dict[str, int] = {}
    examples: dict[str, list[tuple[str, int]]] = {}
    for ref in gap_sentences:
        sentence = corpus.sentence(ref.doc_id, ref.index)
        variables = finder.variable_mentions(sentence)
        folded = [t.casefold() for t in sentence.tokens]
        for left, right in zip(variables, variables[1:]):
            gap = range(left.end, right.start)
            for start in gap:
                for n in range(1, min(n_max, gap.stop - start) + 1):
                    text = " ".join(folded[start : start + n])
                    if text in known_keywords or ("relation", text) in exclude:
                        continue
                    if lexicon.has_variable_surface(text):
                        continue
                    counts[text] = counts.get(text, 0) + 1
                    examples.setdefault(text, [])
                    if len(examples[text]) < 3 and (ref.doc_id, ref.index) not in examples[text]:
                        examples[text].append((ref.doc_id, ref.index))
    if not counts:
        return CandidateBatch(iteration=iteration, kind="relation", items=(),
                              batch_id=batch_id or f"relation-{iteration}",
                              phase="relations")
    top = max(counts.values())
    items = [
        CandidateItem(text=text, confidence=count / top, examples=tuple(examples[text]))
        for text, count in counts.items()
    ]
    items.sort(key=lambda item: (-item.confidence, item.text))
    return CandidateBatch(
        iteration=iteration,
        kind="relation",
        items=tuple(items[:k]),
        batch_id=batch_id or f"relation-{iteration}",
        phase="relations",
    )


def apply_labels(
    lexicon: Lexicon,
    decisions: list[LabelDecision],
    rejects: frozenset[tuple[str, str]] = frozenset(),
    source: str = "human",
) -> ApplyResult:
    """Apply adjudication decisions to a fresh lexicon snapshot.

    Accepted relations must carry a polarity. An accepted variable with a
    ``canonical_name`` becomes a variant of that entry instead of a new one.
    Rejected candidates extend the persistent reject list.
    """
    new_lexicon = lexicon.copy()
    new_rejects = set(rejects)
    added_vars = added_rels = added_variants = rejected = 0
    for d in decisions:
        fold = d.candidate.casefold()
        if d.decision == "reject":
            new_rejects.add((d.kind, fold))
            rejected += 1
            continue
        if d.kind == "relation":
            if d.polarity is None:
                raise BootstrapError(
                    f"accepted relation {d.candidate!r} requires a polarity"
                )
            new_lexicon.add_relation(
                RelationEntry(keyword=d.candidate, polarity=d.polarity, source=source)
            )
            added_rels += 1
        else:
            if d.canonical_name is not None:
                new_lexicon.add_variant(d.canonical_name, d.candidate)
                added_variants += 1
            else:
                new_lexicon.add_variable(
                    VariableEntry(name=d.candidate, source=source)
                )
                added_vars += 1
    new_lexicon.check_invariants()
    return ApplyResult(
        lexicon=new_lexicon,
        rejects=frozenset(new_rejects),
        added_variables=added_vars,
        added_relations=added_rels,
        added_variants=added_variants,
        rejected=rejected,
    )


class LabelPool:
    """Batch adjudicator: a lookup table of decisions keyed by (kind, text).

    Candidates without a stored decision are rejected, which keeps headless
    runs deterministic and guarantees convergence.
    """

    def __init__(self, decisions: dict[tuple[str, str], LabelDecision]):
        self._decisions = decisions

    @classmethod
    def from_files(cls, paths) -> "LabelPool":
        decisions: dict[tuple[str, str], LabelDecision] = {}
        for path in paths:
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    d = LabelDecision(
                        candidate=rec["candidate"],
                        kind=rec["kind"],
                        decision=rec["decision"],
                        polarity=rec.get("polarity"),
                        canonical_name=rec.get("canonical_name"),
                    )
                    decisions[(d.kind, d.candidate.casefold())] = d
        return cls(decisions)

    @classmethod
    def from_log(cls, log: list[dict]) -> "LabelPool":
        decisions = {}
        for rec in log:
            if rec.get("type") != "decision":
                continue
            d = LabelDecision(
                candidate=rec["candidate"],
                kind=rec["kind"],
                decision=rec["decision"],
                polarity=rec.get("polarity"),
                canonical_name=rec.get("canonical_name"),
            )
            decisions[(d.kind, d.candidate.casefold())] = d
        return cls(decisions)

    def __call__(self, batch: CandidateBatch) -> list[LabelDecision]:
        out = []
        for item in batch.items:
            stored = self._decisions.get((batch.kind, item.text.casefold()))
            if stored is None:
                stored = LabelDecision(candidate=item.text, kind=batch.kind,
                                       decision="reject")
            out.append(stored)
        return out


class BootstrapSession:
    """Stateful driver of the iteration phases, one open batch at a time.

    Used directly by :func:`run_until_converged` and, request by request, by
    the curation HTTP service. The session owns its lexicon snapshot
    exclusively (single writer).
    """

    def __init__(self, corpus: Corpus, lexicon: Lexicon, config: BootstrapConfig):
        self.corpus = corpus
        self.lexicon = lexicon.copy()
        self.config = config
        self.rejects: frozenset[tuple[str, str]] = frozenset()
        self.iteration = 0
        self.state = "idle"  # idle | awaiting_labels | iterating | converged
        self.open_batch: CandidateBatch | None = None
        self.log: list[dict] = []
        self.capped = False
        self._phase_idx = 0
        self._accepted_in_iteration = 0
        self._batch_count = 0
        self._model: PhraseModel | None = None
        self._model_stale = True

    # -- internals ------------------------------------------------------

    def _train(self) -> PhraseModel | None:
        if not self._model_stale:
            return self._model
        try:
            # vary the sampling seed by iteration (first iteration uses the
            # configured seed): a candidate drawn into one round's negative
            # sample is not suppressed forever
            self._model = train_phrase_model(
                self.lexicon,
                self.corpus,
                negative_ratio=self.config.negative_ratio,
                n_max=self.config.n_max,
                seed=self.config.seed + max(0, self.iteration - 1),
            )
        except LexiconError as exc:
            self._model = None
            self.log.append({"type": "note", "iteration": self.iteration,
                             "note": f"phrase model unavailable: {exc}"})
        self._model_stale = False
        return self._model

    def _next_batch_id(self) -> str:
        self._batch_count += 1
        return f"b{self._batch_count:05d}"

    def _make_batch(self, phase: str) -> CandidateBatch:
        cfg = self.config
        batch_id = self._next_batch_id()
        if phase == "relations":
            gaps = find_relation_gap_sentences(self.corpus, self.lexicon,
                                               cfg.min_vars, cfg.max_rels)
            return replace(
                propose_relation_candidates(
                    self.corpus, self.lexicon, gaps, k=cfg.k, n_max=cfg.n_max,
                    exclude=self.rejects, iteration=self.iteration,
                    batch_id=batch_id),
                phase=phase,
            )
        model = self._train()
        if model is None:
            return CandidateBatch(iteration=self.iteration, kind="variable",
                                  items=(), batch_id=batch_id, phase=phase)
        restrict = None
        if phase == "variables-gap":
            gaps = find_variable_gap_sentences(self.corpus, self.lexicon,
                                               cfg.min_rels, cfg.max_vars)
            restrict = {(r.doc_id, r.index) for r in gaps}
        return propose_variable_candidates(
            model, self.corpus, self.lexicon, cfg.threshold, cfg.k,
            n_max=cfg.n_max, exclude=self.rejects, iteration=self.iteration,
            restrict_to=restrict, phase=phase, batch_id=batch_id,
        )

    def _log_batch(self, batch: CandidateBatch) -> None:
        self.log.append({
            "type": "batch",
            "iteration": batch.iteration,
            "phase": batch.phase,
            "kind": batch.kind,
            "batch_id": batch.batch_id,
            "items": [
                {"text": i.text, "confidence": i.confidence,
                 "examples": [list(e) for e in i.examples]}
                for i in batch.items
            ],
        })

    def _advance(self) -> None:
        """Move to the next non-empty batch; flip to converged at a fixed point."""
        self.state = "iterating"
        while True:
            if self._phase_idx == 0:
                if self.iteration > 0:
                    fixed_point = self._accepted_in_iteration == 0
                    self.log.append({"type": "iteration", "iteration": self.iteration,
                                     "added": self._accepted_in_iteration,
                                     "converged": fixed_point})
                    if fixed_point:
                        self.state = "converged"
                        self.open_batch = None
                        return
                if self.iteration >= self.config.max_iterations:
                    self.capped = True
                    self.log.append({"type": "note", "iteration": self.iteration,
                                     "note": "iteration cap reached"})
                    self.state = "converged"
                    self.open_batch = None
                    return
                self.iteration += 1
                self._accepted_in_iteration = 0
            phase = PHASES[self._phase_idx]
            batch = self._make_batch(phase)
            self._phase_idx = (self._phase_idx + 1) % len(PHASES)
            if batch.items:
                self._log_batch(batch)
                self.open_batch = batch
                self.state = "awaiting_labels"
                return

    # -- public surface ---------------------------------------------------

    def start(self) -> None:
        if self.state != "idle":
            raise BootstrapError(f"cannot start from state {self.state!r}")
        if self.config.max_iterations == 0:
            self.state = "converged"
            return
        self._advance()

    def submit(self, decisions: list[LabelDecision], batch_id: str | None = None) -> ApplyResult:
        if self.state != "awaiting_labels" or self.open_batch is None:
            raise BootstrapError(f"no open batch in state {self.state!r}")
        if batch_id is not None and batch_id != self.open_batch.batch_id:
            raise BootstrapError("stale batch id")
        batch = self.open_batch
        known = {item.text.casefold() for item in batch.items}
        for d in decisions:
            if d.kind != batch.kind or d.candidate.casefold() not in known:
                raise BootstrapError(f"decision for unknown candidate {d.candidate!r}")
        result = apply_labels(self.lexicon, decisions, self.rejects, source="bootstrapped")
        self.lexicon = result.lexicon
        self.rejects = result.rejects
        self._accepted_in_iteration += result.added
        if result.added:
            self._model_stale = True
        for d in decisions:
            self.log.append({
                "type": "decision", "iteration": batch.iteration, "phase": batch.phase,
                "candidate": d.candidate, "kind": d.kind, "decision": d.decision,
                "polarity": d.polarity, "canonical_name": d.canonical_name,
            })
        self.open_batch = None
        self._advance()
        return result


@dataclass(frozen=True)
class RunResult:
    lexicon: Lexicon
    log: list[dict]
    iterations: int
    converged: bool
    rejects: frozenset[tuple[str, str]]


def run_until_converged(
    corpus: Corpus,
    lexicon: Lexicon,
    label_source,
    config: BootstrapConfig | None = None,
) -> RunResult:
    """Drive the loop with an adjudicator until a fixed point or the cap.

    ``label_source`` is any callable mapping a :class:`CandidateBatch` to
    decisions: a :class:`LabelPool` built from batch label files, or an
    interactive adapter. Replaying a run's log through ``LabelPool.from_log``
    reproduces the identical final lexicon.
    """
    if label_source is None:
        raise BootstrapError("no adjudicator: provide an interactive session or batch labels")
    config = config or BootstrapConfig()
    session = BootstrapSession(corpus, lexicon, config)
    session.start()
    while session.state == "awaiting_labels":
        decisions = label_source(session.open_batch)
        session.submit(decisions)
    return RunResult(
        lexicon=session.lexicon,
        log=session.log,
        iterations=session.iteration,
        converged=session.state == "converged" and not session.capped,
        rejects=session.rejects,
    )
