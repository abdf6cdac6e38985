"""Locate variable and relation-keyword mentions inside sentences.

Variables match their lexicon surfaces (name or variant) verbatim on
case-folded tokens, longest match first, leftmost, without overlaps.
Relation keywords match with light inflection normalization (pushed -> push,
making -> make) and, for multi-token keywords, as an ordered token
subsequence, so "making ... higher" is one mention of "make higher".
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Sentence, tokenize
from .lexicon import Lexicon

__all__ = ["VariableMention", "RelationMention", "MentionFinder"]


@dataclass(frozen=True)
class VariableMention:
    entry_name: str  # canonical lexicon entry
    surface: str  # the stored name/variant string that matched
    start: int
    end: int  # exclusive token offset


@dataclass(frozen=True)
class RelationMention:
    keyword: str  # canonical keyword as stored in the lexicon
    polarity: str
    positions: tuple[int, ...]  # matched token indices, ascending

    @property
    def anchor(self) -> int:
        return self.positions[0]

    @property
    def anchor_end(self) -> int:
        """Last index of the contiguous run starting at the anchor."""
        end = self.positions[0]
        for p in self.positions[1:]:
            if p == end + 1:
                end = p
            else:
                break
        return end


def _fold(token: str) -> str:
    return token.casefold().rstrip("'’")


def _normal_forms(token: str) -> frozenset[str]:
    t = _fold(token)
    forms = {t}
    for suffix in ("ing", "ed", "es", "d", "s"):
        if t.endswith(suffix):
            stem = t[: -len(suffix)]
            if len(stem) >= 3:
                forms.add(stem)
                forms.add(stem + "e")
                if len(stem) >= 4 and stem[-1] == stem[-2]:
                    forms.add(stem[:-1])
    return frozenset(forms)


class MentionFinder:
    """Precompiled matcher for one lexicon snapshot."""

    def __init__(self, lexicon: Lexicon):
        self._surfaces: list[tuple[tuple[str, ...], str, str]] = []
        for entry in lexicon.variables.values():
            for surface in entry.surfaces():
                toks = tuple(_fold(t) for t in tokenize(surface))
                if toks:
                    self._surfaces.append((toks, entry.name, surface))
        # longest first, then lexicographic for determinism
        self._surfaces.sort(key=lambda item: (-len(item[0]), item[0]))

        self._keywords: list[tuple[tuple[frozenset[str], ...], str, str]] = []
        for entry in lexicon.relations.values():
            toks = tuple(_normal_forms(t) for t in tokenize(entry.keyword))
            if toks:
                self._keywords.append((toks, entry.keyword, entry.polarity))
        self._keywords.sort(key=lambda item: (-len(item[0]), item[1]))

    # -- variables ------------------------------------------------------

    def variable_mentions(self, sentence: Sentence) -> list[VariableMention]:
        folded = [_fold(t) for t in sentence.tokens]
        mentions: list[VariableMention] = []
        pos = 0
        while pos < len(folded):
            hit = None
            for toks, entry_name, surface in self._surfaces:
                if tuple(folded[pos : pos + len(toks)]) == toks:
                    hit = VariableMention(entry_name, surface, pos, pos + len(toks))
                    break
            if hit is not None:
                mentions.append(hit)
                pos = hit.end
            else:
                pos += 1
        return mentions

    # -- relation keywords ----------------------------------------------

    def _match_keyword_at(self, forms, kw_forms, start: int) -> tuple[int, ...] | None:
        if not forms[start] & kw_forms[0]:
            return None
        positions = [start]
        cursor = start + 1
        for kw_tok in kw_forms[1:]:
            while cursor < len(forms) and not (forms[cursor] & kw_tok):
                cursor += 1
            if cursor >= len(forms):
                return None
            positions.append(cursor)
            cursor += 1
        return tuple(positions)

    def relation_mentions(
        self,
        sentence: Sentence,
        variable_mentions: list[VariableMention] | None = None,
    ) -> list[RelationMention]:
        """Kept relation mentions, anchor order.

        Two rules prune raw matches. Overlaps are resolved longest keyword
        first on matched token positions. Then consecutive mentions must be
        separated by a variable mention: a keyword with no variable between
        it and the previous kept keyword belongs to the same predicate
        phrase (e.g. the bare "increase" inside "pushed up the increase in
        X") and is dropped.
        """
        if variable_mentions is None:
            variable_mentions = self.variable_mentions(sentence)
        forms = [_normal_forms(t) for t in sentence.tokens]

        candidates: list[RelationMention] = []
        for kw_forms, keyword, polarity in self._keywords:
            for start in range(len(forms)):
                positions = self._match_keyword_at(forms, kw_forms, start)
                if positions is not None:
                    candidates.append(RelationMention(keyword, polarity, positions))
        candidates.sort(key=lambda m: (-len(m.positions), m.anchor, m.keyword))

        taken: set[int] = set()
        kept: list[RelationMention] = []
        for mention in candidates:
            if taken.isdisjoint(mention.positions):
                kept.append(mention)
                taken.update(mention.positions)
        kept.sort(key=lambda m: m.anchor)

        separated: list[RelationMention] = []
        for mention in kept:
            if separated:
                boundary = separated[-1].anchor_end
                has_var_between = any(
                    v.start > boundary and v.end - 1 < mention.anchor
                    for v in variable_mentions
                )
                if not has_var_between:
                    continue
            separated.append(mention)
        return separated
