"""Document ingestion, sentence splitting, tokenization and n-gram phrase generation.

The corpus is the immutable substrate every extraction stage works on: documents
hold sentences, sentences hold position-indexed tokens, and phrases are
contiguous token n-grams addressed by (start, end) spans.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

__all__ = [
    "Document",
    "Sentence",
    "Phrase",
    "Corpus",
    "SplitConfig",
    "tokenize",
    "split_sentences",
    "generate_phrases",
    "ingest_documents",
    "serialize_corpus",
]


class CorpusError(ValueError):
    """Raised for malformed corpus files or inconsistent documents."""


# Words (with internal apostrophes/hyphens) keep an optional trailing
# apostrophe so possessive plurals like "workers'" stay one token.
_TOKEN_RE = re.compile(r"[\w]+(?:['’\-][\w]+)*['’]?", re.UNICODE)

DEFAULT_TERMINATORS = ".!?。！？;"

# Period after these (case-folded) words does not end a sentence.
DEFAULT_ABBREVIATIONS = frozenset(
    {"dr", "mr", "mrs", "ms", "prof", "st", "no", "vs", "etc", "e.g", "i.e", "cf", "al"}
)


@dataclass(frozen=True)
class SplitConfig:
    """Sentence-boundary rules; both fields are deliberately configurable."""

    terminators: str = DEFAULT_TERMINATORS
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    tokens: tuple[str, ...]
    raw: str

    def folded(self) -> tuple[str, ...]:
        """Case-folded tokens used for matching."""
        return tuple(t.casefold() for t in self.tokens)


@dataclass(frozen=True)
class Document:
    id: str
    title: str = ""
    date: str | None = None
    sentences: tuple[Sentence, ...] = ()

    def __post_init__(self):
        for i, s in enumerate(self.sentences):
            if s.index != i:
                raise CorpusError(
                    f"document {self.id!r}: sentence indices not contiguous at {i}"
                )


@dataclass(frozen=True)
class Phrase:
    tokens: tuple[str, ...]
    span: tuple[int, int]  # [start, end) token offsets within the sentence

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.documents)

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self.documents == other.documents

    def sentences(self):
        for doc in self.documents:
            yield from doc.sentences

    def document(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise KeyError(doc_id)

    def sentence(self, doc_id: str, index: int) -> Sentence:
        return self.document(doc_id).sentences[index]


def tokenize(text: str) -> tuple[str, ...]:
    """Split text into word tokens, dropping punctuation between words."""
    return tuple(_TOKEN_RE.findall(text))


def _is_boundary(text: str, pos: int, config: SplitConfig) -> bool:
    ch = text[pos]
    if ch not in config.terminators:
        return False
    if ch == ".":
        # Periods need a following space/quote/EOS (keeps "3.5" intact) and
        # must not close a known abbreviation.
        nxt = text[pos + 1] if pos + 1 < len(text) else None
        if nxt is not None and not (nxt.isspace() or nxt in "\"'”’)»"):
            return False
        m = re.search(r"([\w.]+)\.$", text[: pos + 1])
        if m and m.group(1).casefold() in config.abbreviations:
            return False
    return True


def split_sentences(
    document_text: str,
    doc_id: str = "",
    config: SplitConfig | None = None,
) -> list[Sentence]:
    """Partition text into sentences at terminal punctuation.

    Empty text yields an empty list. Raw slices keep the terminator; tokens
    come from :func:`tokenize`.
    """
    config = config or SplitConfig()
    pieces: list[str] = []
    start = 0
    for pos in range(len(document_text)):
        if _is_boundary(document_text, pos, config):
            piece = document_text[start : pos + 1].strip()
            if piece:
                pieces.append(piece)
            start = pos + 1
    tail = document_text[start:].strip()
    if tail:
        pieces.append(tail)
    sentences = []
    for i, raw in enumerate(pieces):
        sentences.append(Sentence(doc_id=doc_id, index=i, tokens=tokenize(raw), raw=raw))
    return sentences


def generate_phrases(sentence: Sentence, n_max: int) -> list[Phrase]:
    """All contiguous token n-grams with 1 <= n <= n_max, ordered by (start, n).

    For a T-token sentence the count is sum over n of (T - n + 1).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    toks = sentence.tokens
    out: list[Phrase] = []
    for start in range(len(toks)):
        for n in range(1, min(n_max, len(toks) - start) + 1):
            out.append(Phrase(tokens=toks[start : start + n], span=(start, start + n)))
    return out


def _document_from_record(record: dict, line_no: int, config: SplitConfig) -> Document:
    if not isinstance(record, dict) or "id" not in record:
        raise CorpusError(f"line {line_no}: record must be an object with an 'id'")
    doc_id = record["id"]
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusError(f"line {line_no}: 'id' must be a non-empty string")
    title = record.get("title", "")
    date = record.get("date")
    if "sentences" in record:
        raws = record.get("raws")
        sentences = []
        for i, toks in enumerate(record["sentences"]):
            if not isinstance(toks, list) or not all(isinstance(t, str) for t in toks):
                raise CorpusError(f"line {line_no}: sentence {i} is not a token array")
            raw = raws[i] if raws else " ".join(toks)
            sentences.append(Sentence(doc_id=doc_id, index=i, tokens=tuple(toks), raw=raw))
        return Document(id=doc_id, title=title, date=date, sentences=tuple(sentences))
    if "text" in record:
        if not isinstance(record["text"], str):
            raise CorpusError(f"line {line_no}: 'text' must be a string")
        sentences = split_sentences(record["text"], doc_id=doc_id, config=config)
        return Document(id=doc_id, title=title, date=date, sentences=tuple(sentences))
    raise CorpusError(f"line {line_no}: record needs either 'text' or 'sentences'")


def ingest_documents(
    path,
    format: str = "auto",
    config: SplitConfig | None = None,
) -> Corpus:
    """Read a JSONL corpus file, one document per line.

    Records carry either raw ``text`` (split and tokenized here) or
    pre-tokenized ``sentences``. ``format`` may pin the expected shape to
    ``plain`` or ``pre-tokenized``; ``auto`` accepts both.
    """
    if format not in ("auto", "plain", "pre-tokenized"):
        raise ValueError(f"unknown corpus format {format!r}")
    config = config or SplitConfig()
    documents: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {line_no}: invalid JSON ({exc.msg})") from exc
            if format == "plain" and "text" not in record:
                raise CorpusError(f"line {line_no}: expected a 'text' record")
            if format == "pre-tokenized" and "sentences" not in record:
                raise CorpusError(f"line {line_no}: expected a 'sentences' record")
            doc = _document_from_record(record, line_no, config)
            if doc.id in seen:
                raise CorpusError(f"line {line_no}: duplicate document id {doc.id!r}")
            seen.add(doc.id)
            documents.append(doc)
    return Corpus(documents=documents)


def serialize_corpus(corpus: Corpus, path) -> None:
    """Write a corpus back to JSONL in the pre-tokenized shape.

    Original raw sentences are kept in a parallel ``raws`` array so that
    ingest(serialize(c)) == c.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus.documents:
            record = {
                "id": doc.id,
                "title": doc.title,
                "sentences": [list(s.tokens) for s in doc.sentences],
                "raws": [s.raw for s in doc.sentences],
            }
            if doc.date is not None:
                record["date"] = doc.date
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
