"""Entity similarity and name unification.

Two variable names are compared through word vectors with the score
``sim(u, v) = 1 - cos(u, v)``: 0 for identical directions, 1 for orthogonal
vectors, 2 for opposite ones. Small scores mark duplicate candidates; a human
confirms pairs, and confirmed pairs are closed into equivalence classes that
map every member to one canonical name.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .corpus import tokenize
from .lexicon import Lexicon

__all__ = [
    "EntityVector",
    "EmbeddingSource",
    "CanonicalMap",
    "MergeDecision",
    "embed_entity",
    "similarity",
    "propose_duplicates",
    "merge_entities",
]


class CorefError(ValueError):
    pass


@dataclass(frozen=True)
class EntityVector:
    name: str
    vector: np.ndarray
    provenance: str  # file | token-average | char-hash fallback


class EmbeddingSource:
    """Word vectors loaded from a plain-text file: ``token v1 v2 ... vd`` per line."""

    def __init__(self, vectors: dict[str, np.ndarray], dimension: int):
        self.vectors = vectors
        self.dimension = dimension

    @classmethod
    def load(cls, path, dimension: int | None = None) -> "EmbeddingSource":
        vectors: dict[str, np.ndarray] = {}
        dim = dimension
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                token, values = parts[0], parts[1:]
                vec = np.array([float(v) for v in values])
                if dim is None:
                    dim = len(vec)
                elif len(vec) != dim:
                    raise CorefError(
                        f"line {line_no}: vector for {token!r} has dimension "
                        f"{len(vec)}, expected {dim}"
                    )
                vectors[token.casefold()] = vec
        if dim is None:
            raise CorefError("empty vector file")
        return cls(vectors, dim)

    def lookup(self, token: str) -> np.ndarray | None:
        return self.vectors.get(token.casefold())


def _char_hash_vector(name: str, dimension: int) -> np.ndarray:
    """Deterministic character-trigram feature hashing; never the zero vector."""
    text = "^" + " ".join(tokenize(name.casefold())) + "$"
    vec = np.zeros(dimension)
    for i in range(len(text) - 2):
        digest = hashlib.sha1(text[i : i + 3].encode("utf-8")).digest()
        idx = int.from_bytes(digest[:4], "big") % dimension
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        vec[idx] += sign
    if not np.any(vec):
        vec[0] = 1.0
    return vec


def embed_entity(
    name: str,
    source: EmbeddingSource | None = None,
    dimension: int = 64,
) -> EntityVector:
    """Vector for an entity name.

    When every token of the name is in the embedding vocabulary the result is
    the component-wise mean of the token vectors; otherwise a char-trigram
    hash into ``dimension`` components is used so every name embeds.
    """
    if source is not None and dimension != source.dimension:
        raise CorefError(
            f"requested dimension {dimension} does not match the "
            f"loaded vectors ({source.dimension})"
        )
    tokens = tokenize(name.casefold())
    if source is not None and tokens:
        token_vectors = [source.lookup(t) for t in tokens]
        if all(v is not None for v in token_vectors):
            stacked = np.stack(token_vectors)
            provenance = "file" if len(tokens) == 1 else "token-average"
            vec = stacked.mean(axis=0)
            if np.any(vec):
                return EntityVector(name=name, vector=vec, provenance=provenance)
    return EntityVector(
        name=name, vector=_char_hash_vector(name, dimension), provenance="char-hash fallback"
    )


def similarity(u: EntityVector | np.ndarray, v: EntityVector | np.ndarray) -> float:
    """1 - cosine(u, v); 0 means same direction, 2 means opposite."""
    a = u.vector if isinstance(u, EntityVector) else np.asarray(u, dtype=float)
    b = v.vector if isinstance(v, EntityVector) else np.asarray(v, dtype=float)
    if a.shape != b.shape:
        raise CorefError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise CorefError("similarity undefined for zero-norm vectors")
    return float(1.0 - (a @ b) / (na * nb))


def propose_duplicates(
    entities: list[str],
    source: EmbeddingSource | None = None,
    tau: float = 0.15,
    lexicon: Lexicon | None = None,
    dimension: int = 64,
) -> list[tuple[str, str, float]]:
    """All unordered pairs with score <= tau, ascending by score.

    Pairs the lexicon already links as aliases of one entry are included with
    score 0 regardless of their vectors.
    """
    if not 0.0 <= tau <= 2.0:
        raise ValueError("tau must lie in [0, 2]")
    alias_pairs: set[tuple[str, str]] = set()
    if lexicon is not None:
        entity_set = set(entities)
        for entry in lexicon.variables.values():
            present = [s for s in entry.surfaces() if s in entity_set]
            for i in range(len(present)):
                for j in range(i + 1, len(present)):
                    alias_pairs.add(tuple(sorted((present[i], present[j]))))

    vectors = {e: embed_entity(e, source, dimension) for e in entities}
    proposals: dict[tuple[str, str], float] = {pair: 0.0 for pair in alias_pairs}
    names = sorted(set(entities))
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            pair = (names[i], names[j])
            if pair in proposals:
                continue
            score = similarity(vectors[pair[0]], vectors[pair[1]])
            if score <= tau:
                proposals[pair] = score
    return sorted(
        [(a, b, score) for (a, b), score in proposals.items()],
        key=lambda item: (item[2], item[0], item[1]),
    )


@dataclass(frozen=True)
class MergeDecision:
    a: str
    b: str
    confirm: bool = True
    canonical: str | None = None


class CanonicalMap:
    """Total, idempotent mapping from entity names to canonical names."""

    def __init__(self, mapping: dict[str, str] | None = None):
        self._mapping = dict(mapping or {})
        for target in list(self._mapping.values()):
            existing = self._mapping.get(target, target)
            if existing != target:
                raise CorefError(f"canonical name {target!r} maps to {existing!r}")
            self._mapping[target] = target

    def __call__(self, name: str) -> str:
        return self._mapping.get(name, name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CanonicalMap):
            return NotImplemented
        names = set(self._mapping) | set(other._mapping)
        return all(self(n) == other(n) for n in names)

    def items(self):
        return self._mapping.items()

    @classmethod
    def identity(cls) -> "CanonicalMap":
        return cls({})

    @classmethod
    def from_lexicon(cls, lexicon: Lexicon) -> "CanonicalMap":
        """Variants map to their entry name; names map to themselves."""
        mapping = {}
        for entry in lexicon.variables.values():
            mapping[entry.name] = entry.name
            for variant in entry.variants:
                mapping[variant] = entry.name
        return cls(mapping)


def merge_entities(
    decisions: list[MergeDecision],
    frequencies: dict[str, int] | None = None,
) -> CanonicalMap:
    """Close confirmed pairs into equivalence classes and pick canonical names.

    An explicit canonical choice wins; two different explicit choices inside
    one class are a conflict. Otherwise the highest-frequency member is used,
    ties broken lexicographically.
    """
    frequencies = frequencies or {}
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    chosen: dict[str, str] = {}  # member -> explicitly chosen canonical
    for d in decisions:
        if not d.confirm:
            continue
        union(d.a, d.b)
        if d.canonical is not None:
            union(d.a, d.canonical)
            chosen[d.a] = d.canonical
            chosen[d.b] = d.canonical

    components: dict[str, list[str]] = {}
    for name in parent:
        components.setdefault(find(name), []).append(name)

    mapping: dict[str, str] = {}
    for members in components.values():
        explicit = sorted({chosen[m] for m in members if m in chosen})
        if len(explicit) > 1:
            raise CorefError(
                f"conflicting canonical names {explicit} within component {sorted(members)}"
            )
        if explicit:
            canonical = explicit[0]
        else:
            canonical = min(members, key=lambda m: (-frequencies.get(m, 0), m))
        for m in members:
            mapping[m] = canonical
    return CanonicalMap(mapping)
