"""Extract {variable, relation, variable} triples from sentences and deduplicate them.

Pairing rule: each kept relation keyword takes as object the nearest variable
mention to its right and as subject the nearest variable mention to its left
whose lexicon entry differs from the object's (the co-reference skip). The
emitted subject/object strings are the lexicon surfaces that matched, so
aliases stay visible until deduplication canonicalizes them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .coref import CanonicalMap
from .corpus import Sentence
from .lexicon import Lexicon
from .mentions import MentionFinder

__all__ = ["Provenance", "RdfTriple", "extract_triples", "dedup_triples",
           "write_triples_jsonl", "read_triples_jsonl"]


@dataclass(frozen=True)
class Provenance:
    doc_id: str
    sentence_index: int
    keyword_span: tuple[int, int]  # (anchor, last matched token + 1)


@dataclass(frozen=True)
class RdfTriple:
    subject: str
    relation_keyword: str
    polarity: str
    object: str
    provenance: tuple[Provenance, ...] = ()


def extract_triples(
    sentence: Sentence,
    lexicon: Lexicon,
    finder: MentionFinder | None = None,
) -> list[RdfTriple]:
    """Triples for one sentence; sentences lacking the pattern yield none.

    Pass a prebuilt :class:`MentionFinder` when extracting many sentences
    against the same lexicon snapshot.
    """
    if not lexicon.variables or not lexicon.relations:
        return []
    if finder is None:
        finder = MentionFinder(lexicon)
    variables = finder.variable_mentions(sentence)
    relations = finder.relation_mentions(sentence, variables)
    triples: list[RdfTriple] = []
    for mention in relations:
        occupied = set(mention.positions)
        obj = None
        for v in sorted(variables, key=lambda v: v.start):
            if v.start > mention.anchor and occupied.isdisjoint(range(v.start, v.end)):
                obj = v
                break
        if obj is None:
            continue
        subj = None
        for v in sorted(variables, key=lambda v: -v.end):
            if v.end - 1 >= mention.anchor:
                continue
            if not occupied.isdisjoint(range(v.start, v.end)):
                continue
            if v.entry_name == obj.entry_name:
                continue  # co-referent with the object; skip further left
            subj = v
            break
        if subj is None:
            continue
        triples.append(
            RdfTriple(
                subject=subj.surface,
                relation_keyword=mention.keyword,
                polarity=mention.polarity,
                object=obj.surface,
                provenance=(
                    Provenance(
                        doc_id=sentence.doc_id,
                        sentence_index=sentence.index,
                        keyword_span=(mention.anchor, mention.positions[-1] + 1),
                    ),
                ),
            )
        )
    return triples


def dedup_triples(triples: list[RdfTriple], canonical: CanonicalMap) -> list[RdfTriple]:
    """Canonicalize names and keep the first triple per (subject, polarity, object).

    Provenance lists of merged duplicates are concatenated in input order.
    Self-loops created by canonicalization are dropped.
    """
    out: list[RdfTriple] = []
    index: dict[tuple[str, str, str], int] = {}
    for triple in triples:
        subject = canonical(triple.subject)
        obj = canonical(triple.object)
        if subject == obj:
            continue
        key = (subject, triple.polarity, obj)
        if key in index:
            i = index[key]
            out[i] = replace(out[i], provenance=out[i].provenance + triple.provenance)
        else:
            index[key] = len(out)
            out.append(replace(triple, subject=subject, object=obj))
    return out


def write_triples_jsonl(triples: list[RdfTriple], path) -> None:
    """One record per triple; provenance is the first occurrence."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in triples:
            p = t.provenance[0] if t.provenance else Provenance("", -1, (0, 0))
            record = {
                "subject": t.subject,
                "relation": t.relation_keyword,
                "polarity": t.polarity,
                "object": t.object,
                "doc": p.doc_id,
                "sent": p.sentence_index,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_triples_jsonl(path) -> list[RdfTriple]:
    triples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            triples.append(
                RdfTriple(
                    subject=rec["subject"],
                    relation_keyword=rec["relation"],
                    polarity=rec["polarity"],
                    object=rec["object"],
                    provenance=(Provenance(rec.get("doc", ""), rec.get("sent", -1), (0, 0)),),
                )
            )
    return triples
