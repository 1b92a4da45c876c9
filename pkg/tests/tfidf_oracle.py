"""Brute-force TF-IDF cosine reference scorer.

An independent implementation of the retrieval scoring contract, written
directly over document dictionaries with no inverted index, no shared
code with the engine beyond the frozen stopword data. Used to verify
engine rankings and scores.
"""

import math

# The stopword contract, copied verbatim (test_retrieval asserts this stays
# in sync with the engine's list).
STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because
been before being below between both but by can could did do does doing
down during each few for from further had has have having he her here hers
him his how if in into is it its itself just me more most my myself no nor
not now of off on once only or other our ours out over own same she should
so some such than that the their theirs them then there these they this
those through to too under until up very was we were what when where which
while who whom why will with would you your yours yourself
""".split())

FIELD_WEIGHTS = {"title": 3.0, "description": 2.0, "extra_text": 1.0}


def tokenize(text):
    tokens = []
    current = []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return [t for t in tokens if len(t) >= 2 and t not in STOPWORDS]


def _counts(terms):
    out = {}
    for term in terms:
        out[term] = out.get(term, 0) + 1
    return out


def _doc_fields(doc):
    """Accept either AttackVectorDocument-like objects or plain dicts."""
    if isinstance(doc, dict):
        return doc.get("title", ""), doc.get("description", ""), doc.get("extra_text") or ""
    return doc.title, doc.description, doc.extra_text or ""


def _doc_kind(doc):
    if isinstance(doc, dict):
        return doc.get("kind")
    return doc.kind


def score_all(docs, query_text, field_weights=None):
    """Cosine score per doc id for every document sharing a query term.

    ``docs`` maps doc id to a document (object or dict with title /
    description / extra_text fields).
    """
    weights = field_weights or FIELD_WEIGHTS
    doc_count = len(docs)

    # Per-document weighted term frequencies, one full vector per doc.
    weighted_tf = {}
    for doc_id, doc in docs.items():
        title, description, extra = _doc_fields(doc)
        vector = {}
        for weight, text in ((weights["title"], title),
                             (weights["description"], description),
                             (weights["extra_text"], extra)):
            for term, count in _counts(tokenize(text)).items():
                vector[term] = vector.get(term, 0.0) + weight * count
        weighted_tf[doc_id] = vector

    df = {}
    for vector in weighted_tf.values():
        for term in vector:
            df[term] = df.get(term, 0) + 1

    def idf(term):
        return math.log((doc_count + 1) / (df.get(term, 0) + 1)) + 1.0

    doc_vectors = {doc_id: {term: tf * idf(term) for term, tf in vector.items()}
                   for doc_id, vector in weighted_tf.items()}
    doc_norms = {doc_id: math.sqrt(sum(v * v for v in vector.values()))
                 for doc_id, vector in doc_vectors.items()}

    query_vector = {term: count * idf(term)
                    for term, count in _counts(tokenize(query_text)).items()}
    query_norm = math.sqrt(sum(v * v for v in query_vector.values()))

    scores = {}
    for doc_id, vector in doc_vectors.items():
        dot = sum(weight * vector[term]
                  for term, weight in query_vector.items() if term in vector)
        if dot > 0.0:
            scores[doc_id] = dot / (query_norm * doc_norms[doc_id])
    return scores


def rank(docs, query_text, field_weights=None, kinds=None, threshold=0.0, top_k=None):
    """Ranked (doc_id, score) pairs under the same config semantics as the engine."""
    scores = score_all(docs, query_text, field_weights)
    eligible = [(doc_id, score) for doc_id, score in scores.items()
                if score >= threshold
                and (kinds is None or _doc_kind(docs[doc_id]) in kinds)]
    eligible.sort(key=lambda pair: (-pair[1], pair[0]))
    if top_k is not None:
        eligible = eligible[:top_k]
    return eligible


def reachable(crossrefs, start, depth):
    """Breadth-first closure over a plain {id: set(ids)} mapping, excluding
    targets absent from the mapping. Independent of the engine's traversal."""
    found = {start}
    frontier = {start}
    for _ in range(depth):
        step = set()
        for node in frontier:
            for ref in crossrefs.get(node, ()):
                if ref in crossrefs and ref not in found:
                    step.add(ref)
        if not step:
            break
        found |= step
        frontier = step
    return found
