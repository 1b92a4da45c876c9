"""Ranked retrieval over the corpus and association to model attributes.

Scoring contract (mirrored by the brute-force reference scorer in the
test suite):

* tokens: lowercase, split on non-alphanumeric characters, drop tokens
  shorter than two characters and stopwords; pure numerics are preserved;
* document vector: for each term, the field-weighted raw term frequency
  (weights over title / description / extra text) times idf;
* idf(t) = ln((doc_count + 1) / (df(t) + 1)) + 1, df counted over any field;
* query vector: raw term frequency times idf, including terms absent from
  the corpus (they contribute to the query norm only);
* score = cosine similarity; only documents sharing at least one query
  term are candidates, so every direct match has matched terms.

Association runs one query per model attribute over the text "key value",
then expands each direct match through corpus cross references with a
fixed score decay of 0.5 per hop. Duplicates merge keeping the higher
score; on ties the direct match wins. Scoring is isolated in
``_score_candidates`` so an alternative ranking function can be slotted
in without touching the index layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import groupby

from .corpus import ALL_KINDS, Corpus, DocKind
from .errors import ConfigError, IndexMismatchError, ModelValidationError
from .model import SystemModel, validate_model
from .stopwords import STOPWORDS

FIELDS = ("title", "description", "extra_text")
DEFAULT_FIELD_WEIGHTS = {"title": 3.0, "description": 2.0, "extra_text": 1.0}
CROSSREF_DECAY = 0.5


def tokenize(text: str) -> list[str]:
    """Normalize free text into retrieval terms."""
    terms = []
    for is_word, run in groupby(text.lower(), key=str.isalnum):
        if not is_word:
            continue
        token = "".join(run)
        if len(token) < 2 or token in STOPWORDS:
            continue
        terms.append(token)
    return terms


@dataclass(frozen=True)
class AssociationConfig:
    """Knobs for one association run; expressible as JSON
    ``{top_k, threshold, crossref_depth, kinds}``."""

    top_k: int = 25
    threshold: float = 0.05
    crossref_depth: int = 2
    kinds: frozenset[DocKind] = ALL_KINDS

    def __post_init__(self):
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if self.threshold < 0:
            raise ConfigError(f"threshold must be >= 0, got {self.threshold}")
        if self.crossref_depth < 0:
            raise ConfigError(f"crossref_depth must be >= 0, got {self.crossref_depth}")
        object.__setattr__(self, "kinds", frozenset(self.kinds))
        if not self.kinds:
            raise ConfigError("kinds must not be empty")

    def to_json(self) -> dict:
        return {"top_k": self.top_k, "threshold": self.threshold,
                "crossref_depth": self.crossref_depth,
                "kinds": sorted(k.value for k in self.kinds)}

    @classmethod
    def from_json(cls, obj) -> "AssociationConfig":
        if obj is None:
            return cls()
        if not isinstance(obj, dict):
            raise ConfigError("association config must be a JSON object")
        kwargs = {}
        if "top_k" in obj:
            kwargs["top_k"] = _as_int(obj["top_k"], "top_k")
        if "threshold" in obj:
            kwargs["threshold"] = _as_float(obj["threshold"], "threshold")
        if "crossref_depth" in obj:
            kwargs["crossref_depth"] = _as_int(obj["crossref_depth"], "crossref_depth")
        if "kinds" in obj:
            kinds = set()
            for name in obj["kinds"]:
                try:
                    kinds.add(DocKind(name))
                except ValueError:
                    raise ConfigError(f"unknown kind {name!r}") from None
            kwargs["kinds"] = frozenset(kinds)
        return cls(**kwargs)


def _as_int(value, name) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return value


def _as_float(value, name) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class Match:
    """One ranked association between a query and a document."""

    doc_id: str
    score: float
    matched_terms: frozenset[str] = frozenset()
    via: str = "direct"  # "direct" | "crossref"
    via_source: str | None = None


@dataclass(frozen=True)
class RetrievalIndex:
    """Inverted index with per-term, per-field statistics.

    ``postings`` maps each term to a sorted list of (doc id, per-field term
    frequency); ``doc_lengths`` holds the field-weighted token count per
    document. Immutable after build; concurrent queries are safe.
    """

    postings: dict[str, list[tuple[str, dict[str, int]]]]
    doc_count: int
    doc_lengths: dict[str, float]
    field_weights: dict[str, float]
    doc_kinds: dict[str, DocKind]
    doc_norms: dict[str, float]
    idf: dict[str, float]
    corpus_stamp: str


def build_index(corpus: Corpus, field_weights: dict[str, float] | None = None
                ) -> RetrievalIndex:
    """Index every corpus document over title / description / extra text."""
    weights = dict(DEFAULT_FIELD_WEIGHTS)
    if field_weights:
        for name, value in field_weights.items():
            if name not in FIELDS:
                raise ConfigError(f"unknown field {name!r}")
            weights[name] = value
    for name, value in weights.items():
        if not value > 0:
            raise ConfigError(f"field weight {name!r} must be positive, got {value}")

    postings: dict[str, dict[str, dict[str, int]]] = {}
    doc_lengths: dict[str, float] = {}
    doc_kinds: dict[str, DocKind] = {}
    for doc_id, doc in corpus.documents.items():
        doc_kinds[doc_id] = doc.kind
        length = 0.0
        for field_name in FIELDS:
            text = getattr(doc, field_name) or ""
            terms = tokenize(text)
            length += weights[field_name] * len(terms)
            for term in terms:
                per_doc = postings.setdefault(term, {})
                per_field = per_doc.setdefault(doc_id, {})
                per_field[field_name] = per_field.get(field_name, 0) + 1
        doc_lengths[doc_id] = length

    doc_count = len(corpus.documents)
    idf = {term: math.log((doc_count + 1) / (len(per_doc) + 1)) + 1.0
           for term, per_doc in postings.items()}

    norms_sq: dict[str, float] = {doc_id: 0.0 for doc_id in corpus.documents}
    sorted_postings: dict[str, list[tuple[str, dict[str, int]]]] = {}
    for term in sorted(postings):
        entries = []
        for doc_id in sorted(postings[term]):
            per_field = postings[term][doc_id]
            weighted_tf = sum(weights[f] * tf for f, tf in per_field.items())
            norms_sq[doc_id] += (weighted_tf * idf[term]) ** 2
            entries.append((doc_id, per_field))
        sorted_postings[term] = entries

    return RetrievalIndex(
        postings=sorted_postings, doc_count=doc_count, doc_lengths=doc_lengths,
        field_weights=weights, doc_kinds=doc_kinds,
        doc_norms={d: math.sqrt(v) for d, v in norms_sq.items()},
        idf=idf, corpus_stamp=corpus.build_stamp)


def _score_candidates(index: RetrievalIndex, terms: list[str]) -> dict[str, Match]:
    """Cosine scores for every document sharing at least one query term."""
    query_tf: dict[str, int] = {}
    for term in terms:
        query_tf[term] = query_tf.get(term, 0) + 1

    fallback_idf = math.log(index.doc_count + 1) + 1.0
    query_norm = math.sqrt(sum((tf * index.idf.get(term, fallback_idf)) ** 2
                               for term, tf in query_tf.items()))
    dots: dict[str, float] = {}
    matched: dict[str, set[str]] = {}
    for term, tf in query_tf.items():
        entries = index.postings.get(term)
        if not entries:
            continue
        query_weight = tf * index.idf[term]
        for doc_id, per_field in entries:
            weighted_tf = sum(index.field_weights[f] * count
                              for f, count in per_field.items())
            dots[doc_id] = dots.get(doc_id, 0.0) + query_weight * weighted_tf * index.idf[term]
            matched.setdefault(doc_id, set()).add(term)

    return {doc_id: Match(doc_id=doc_id,
                          score=dot / (query_norm * index.doc_norms[doc_id]),
                          matched_terms=frozenset(matched[doc_id]))
            for doc_id, dot in dots.items()}


def _ranked(matches) -> list[Match]:
    return sorted(matches, key=lambda m: (-m.score, m.doc_id))


def query(index: RetrievalIndex, text: str,
          config: AssociationConfig | None = None) -> list[Match]:
    """Rank corpus documents against free text.

    Applies the kind filter, drops scores below the threshold, and
    truncates to top_k. A query with no usable terms returns [].
    """
    config = config or AssociationConfig()
    terms = tokenize(text)
    if not terms:
        return []
    candidates = _score_candidates(index, terms)
    eligible = [m for m in candidates.values()
                if index.doc_kinds[m.doc_id] in config.kinds
                and m.score >= config.threshold]
    return _ranked(eligible)[:config.top_k]


@dataclass(frozen=True)
class AttackSurface:
    """Association output: per-attribute ranked matches.

    Keys of ``per_attribute`` are (entity id, attribute key) pairs, where
    the entity is a component or a connection. Every attribute of the
    model appears, including those with no matches.
    """

    model_id: str
    corpus_stamp: str
    per_attribute: dict[tuple[str, str], tuple[Match, ...]]
    config: AssociationConfig = field(default_factory=AssociationConfig)


def associate(model: SystemModel, index: RetrievalIndex, corpus: Corpus,
              config: AssociationConfig | None = None) -> AttackSurface:
    """Associate attack vector documents to every attribute of the model.

    For each component and connection attribute the query text is
    "key value". Direct matches are expanded through cross references up
    to ``crossref_depth`` hops with a score decay of 0.5 per hop; the
    kind filter applies to expanded matches as well. A pure function of
    (model, corpus snapshot, config).
    """
    config = config or AssociationConfig()
    if index.corpus_stamp != corpus.build_stamp:
        raise IndexMismatchError(
            "index was not built from this corpus snapshot "
            f"({index.corpus_stamp} != {corpus.build_stamp})")
    missing = set(index.doc_kinds) - set(corpus.documents)
    if missing:
        raise IndexMismatchError(f"indexed documents missing from corpus: {sorted(missing)}")
    violations = validate_model(model)
    if violations:
        raise ModelValidationError("cannot associate an invalid model", violations)

    entities = [(c.id, c.attributes) for c in model.components]
    entities += [(k.id, k.attributes) for k in model.connections]

    per_attribute: dict[tuple[str, str], tuple[Match, ...]] = {}
    for entity_id, attributes in sorted(entities):
        for attr in attributes:
            direct = query(index, f"{attr.key} {attr.value}", config)
            best = {m.doc_id: m for m in direct}
            for origin in direct:
                _expand_match(origin, corpus, config, best)
            ranked = _ranked(best.values())[:config.top_k]
            per_attribute[(entity_id, attr.key)] = tuple(ranked)

    return AttackSurface(model_id=model.id, corpus_stamp=corpus.build_stamp,
                         per_attribute=per_attribute, config=config)


def _expand_match(origin: Match, corpus: Corpus, config: AssociationConfig,
                  best: dict[str, Match]) -> None:
    seen = {origin.doc_id}
    frontier = {origin.doc_id}
    score = origin.score
    for _ in range(config.crossref_depth):
        frontier = {ref for doc_id in frontier
                    for ref in corpus.documents[doc_id].cross_refs
                    if ref in corpus.documents} - seen
        if not frontier:
            break
        seen |= frontier
        score *= CROSSREF_DECAY
        for doc_id in sorted(frontier):
            if corpus.documents[doc_id].kind not in config.kinds:
                continue
            incumbent = best.get(doc_id)
            if incumbent is None or score > incumbent.score:
                best[doc_id] = Match(doc_id=doc_id, score=score, via="crossref",
                                     via_source=origin.doc_id)


# ---------------------------------------------------------------------------
# Surface (de)serialization
# ---------------------------------------------------------------------------


def surface_to_json(surface: AttackSurface) -> dict:
    return {
        "model_id": surface.model_id,
        "corpus_stamp": surface.corpus_stamp,
        "config": surface.config.to_json(),
        "attributes": [
            {"entity": entity, "key": key,
             "matches": [
                 {"doc_id": m.doc_id, "score": m.score,
                  "matched_terms": sorted(m.matched_terms),
                  "via": m.via, "via_source": m.via_source}
                 for m in matches]}
            for (entity, key), matches in sorted(surface.per_attribute.items())],
    }


def surface_from_json(obj: dict) -> AttackSurface:
    per_attribute = {}
    for row in obj.get("attributes", ()):
        matches = tuple(Match(doc_id=m["doc_id"], score=float(m["score"]),
                              matched_terms=frozenset(m.get("matched_terms") or ()),
                              via=m.get("via", "direct"),
                              via_source=m.get("via_source"))
                        for m in row.get("matches", ()))
        per_attribute[(row["entity"], row["key"])] = matches
    return AttackSurface(model_id=obj.get("model_id", ""),
                         corpus_stamp=obj.get("corpus_stamp", ""),
                         per_attribute=per_attribute,
                         config=AssociationConfig.from_json(obj.get("config")))
