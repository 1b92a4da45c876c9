"""Attack vector corpora: parsing, normalization, cross-references, snapshots.

Three native feed shapes are normalized into one document type so retrieval
can treat attack patterns, weaknesses, and vulnerabilities as a single
searchable pool:

* attack-pattern catalogs (CAPEC-style XML): id, name, description,
  related weaknesses;
* weakness catalogs (CWE-style XML): id, name, description, observed
  example CVE ids, related attack patterns;
* vulnerability feeds (NVD-style JSON): id, description, optional CVSS
  base score, optional CWE mapping.

Only the fields used by retrieval are normalized; unknown fields are
ignored. CVSS scores are carried as severity labels and never aggregated
into a risk number.
"""

from __future__ import annotations

import hashlib
import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from enum import Enum

from .errors import EmptyCorpusError, ParseError, SnapshotError, UnknownDocumentError


class DocKind(str, Enum):
    ATTACK_PATTERN = "attack_pattern"
    WEAKNESS = "weakness"
    VULNERABILITY = "vulnerability"


KIND_PREFIX = {
    DocKind.ATTACK_PATTERN: "CAPEC-",
    DocKind.WEAKNESS: "CWE-",
    DocKind.VULNERABILITY: "CVE-",
}

ALL_KINDS = frozenset(DocKind)


def kind_for_id(doc_id: str) -> DocKind | None:
    for kind, prefix in KIND_PREFIX.items():
        if doc_id.startswith(prefix):
            return kind
    return None


class Scheme(str, Enum):
    CVSS_V2 = "cvss_v2"
    CVSS_V3 = "cvss_v3"
    CORPUS_NATIVE = "corpus_native"


class Band(str, Enum):
    NONE = "none"
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


BAND_RANK = {Band.NONE: 0, Band.LOW: 1, Band.MEDIUM: 2, Band.HIGH: 3, Band.CRITICAL: 4}


def band_for_score(scheme: Scheme, score: float) -> Band:
    """Standard banding for a CVSS base score."""
    if scheme == Scheme.CVSS_V3:
        if score == 0.0:
            return Band.NONE
        if score < 4.0:
            return Band.LOW
        if score < 7.0:
            return Band.MEDIUM
        if score < 9.0:
            return Band.HIGH
        return Band.CRITICAL
    if scheme == Scheme.CVSS_V2:
        if score < 4.0:
            return Band.LOW
        if score < 7.0:
            return Band.MEDIUM
        return Band.HIGH
    raise ValueError(f"no fixed banding for scheme {scheme}")


@dataclass(frozen=True)
class SeverityLabel:
    """A severity tag. Severity is a property of one record, not a risk score."""

    scheme: Scheme
    band: Band
    raw: float | None = None


@dataclass(frozen=True)
class AttackVectorDocument:
    """One normalized record from any of the three corpora."""

    id: str
    kind: DocKind
    title: str
    description: str
    extra_text: str | None = None
    severity: SeverityLabel | None = None
    cross_refs: frozenset[str] = frozenset()

    def __post_init__(self):
        prefix = KIND_PREFIX[self.kind]
        if not self.id.startswith(prefix):
            raise ValueError(f"id {self.id!r} does not carry the {prefix!r} prefix")
        if not self.title.strip():
            raise ValueError(f"{self.id}: empty title")
        if not self.description.strip():
            raise ValueError(f"{self.id}: empty description")
        object.__setattr__(self, "cross_refs", frozenset(self.cross_refs) - {self.id})


@dataclass(frozen=True)
class Corpus:
    """The validated document pool. Immutable; ``build_stamp`` is a content
    hash, so equal snapshots produce equal stamps."""

    documents: dict[str, AttackVectorDocument]
    dangling_refs: frozenset[tuple[str, str]]
    build_stamp: str

    def __len__(self) -> int:
        return len(self.documents)


# ---------------------------------------------------------------------------
# Native format parsers
# ---------------------------------------------------------------------------

_CVE_ID = re.compile(r"CVE-[A-Za-z0-9]+-\d+")


def _xml_root(document: str) -> ET.Element:
    try:
        return ET.fromstring(document)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ParseError(f"malformed XML: {exc.msg}", line=line, column=column) from exc


def _find_all(root: ET.Element, local: str):
    return [el for el in root.iter() if el.tag.rsplit("}", 1)[-1] == local]


def _prose(el: ET.Element | None) -> str:
    if el is None:
        return ""
    return " ".join("".join(el.itertext()).split())


def _first_child(el: ET.Element, local: str) -> ET.Element | None:
    for child in el:
        if child.tag.rsplit("}", 1)[-1] == local:
            return child
    return None


def parse_attack_patterns(document: str, *, warnings: list[str] | None = None
                          ) -> list[AttackVectorDocument]:
    """Parse a CAPEC-style XML catalog into attack-pattern documents.

    Entries missing an id, name, or description are skipped with a recorded
    warning; related weakness ids become ``CWE-n`` cross references.
    """
    sink = warnings if warnings is not None else []
    root = _xml_root(document)
    docs: list[AttackVectorDocument] = []
    seen: set[str] = set()
    for entry in _find_all(root, "Attack_Pattern"):
        raw_id, name = entry.get("ID"), entry.get("Name")
        if not raw_id or not name:
            sink.append("skipped attack pattern entry missing ID or Name")
            continue
        doc_id = f"CAPEC-{raw_id}"
        if doc_id in seen:
            sink.append(f"skipped duplicate attack pattern {doc_id}")
            continue
        description = _prose(_first_child(entry, "Description"))
        if not description:
            sink.append(f"skipped {doc_id}: empty description")
            continue
        extra_parts = [_prose(el) for el in _find_all(entry, "Prerequisite")]
        extra_parts += [_prose(el) for el in _find_all(entry, "Mitigation")]
        extra_parts += [_prose(el) for el in _find_all(entry, "Consequence")]
        refs = {f"CWE-{el.get('CWE_ID')}"
                for el in _find_all(entry, "Related_Weakness") if el.get("CWE_ID")}
        docs.append(AttackVectorDocument(
            id=doc_id, kind=DocKind.ATTACK_PATTERN, title=name,
            description=description,
            extra_text=" ".join(p for p in extra_parts if p) or None,
            cross_refs=frozenset(refs)))
        seen.add(doc_id)
    return docs


def parse_weaknesses(document: str, *, warnings: list[str] | None = None
                     ) -> list[AttackVectorDocument]:
    """Parse a CWE-style XML catalog into weakness documents.

    Observed-example CVE ids and related attack patterns become cross
    references. Duplicate ids keep the first occurrence.
    """
    sink = warnings if warnings is not None else []
    root = _xml_root(document)
    docs: list[AttackVectorDocument] = []
    seen: set[str] = set()
    for entry in _find_all(root, "Weakness"):
        raw_id, name = entry.get("ID"), entry.get("Name")
        if not raw_id or not name:
            sink.append("skipped weakness entry missing ID or Name")
            continue
        doc_id = f"CWE-{raw_id}"
        if doc_id in seen:
            sink.append(f"skipped duplicate weakness {doc_id}")
            continue
        description = _prose(_first_child(entry, "Description"))
        if not description:
            sink.append(f"skipped {doc_id}: empty description")
            continue
        extra_parts = [_prose(el) for el in _find_all(entry, "Mitigation")]
        extra_parts += [_prose(el) for el in _find_all(entry, "Consequence")]
        refs = {f"CAPEC-{el.get('CAPEC_ID')}"
                for el in _find_all(entry, "Related_Attack_Pattern") if el.get("CAPEC_ID")}
        for example in _find_all(entry, "Observed_Example"):
            refs.update(_CVE_ID.findall(_prose(example)))
        docs.append(AttackVectorDocument(
            id=doc_id, kind=DocKind.WEAKNESS, title=name, description=description,
            extra_text=" ".join(p for p in extra_parts if p) or None,
            cross_refs=frozenset(refs)))
        seen.add(doc_id)
    return docs


def parse_vulnerabilities(document: str, *, warnings: list[str] | None = None
                          ) -> list[AttackVectorDocument]:
    """Parse an NVD-style JSON feed into vulnerability documents.

    Accepts either a top-level array of entries or an object with an
    ``entries`` array. Each entry carries ``id`` and ``description``;
    optional ``cvssV3``/``cvssV2`` base scores map to severity labels and
    an optional ``cwe`` mapping (number, "CWE-n", or a list) becomes
    cross references. Rejected or empty descriptions skip the entry.
    """
    sink = warnings if warnings is not None else []
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", line=exc.lineno,
                         column=exc.colno) from exc
    if isinstance(raw, dict):
        entries = raw.get("entries")
    else:
        entries = raw
    if not isinstance(entries, list):
        raise ParseError("expected a JSON array of CVE entries "
                         "(or an object with an 'entries' array)")

    docs: list[AttackVectorDocument] = []
    seen: set[str] = set()
    for position, entry in enumerate(entries):
        if not isinstance(entry, dict):
            sink.append(f"skipped entry {position}: not an object")
            continue
        doc_id = entry.get("id")
        if not isinstance(doc_id, str) or not doc_id.startswith("CVE-"):
            sink.append(f"skipped entry {position}: missing or non-CVE id")
            continue
        if doc_id in seen:
            sink.append(f"skipped duplicate vulnerability {doc_id}")
            continue
        description = (entry.get("description") or "").strip()
        if not description or description.startswith("** REJECT"):
            sink.append(f"skipped {doc_id}: rejected or empty description")
            continue
        severity = None
        for field_name, scheme in (("cvssV3", Scheme.CVSS_V3), ("cvssV2", Scheme.CVSS_V2)):
            score = entry.get(field_name)
            if score is None:
                continue
            try:
                value = float(score)
            except (TypeError, ValueError):
                sink.append(f"{doc_id}: ignored non-numeric {field_name} score")
                continue
            if not 0.0 <= value <= 10.0:
                sink.append(f"{doc_id}: ignored out-of-range {field_name} score {value}")
                continue
            severity = SeverityLabel(scheme, band_for_score(scheme, value), value)
            break
        refs = set()
        cwe = entry.get("cwe")
        for item in cwe if isinstance(cwe, list) else [cwe] if cwe is not None else []:
            text = str(item)
            refs.add(text if text.startswith("CWE-") else f"CWE-{text}")
        docs.append(AttackVectorDocument(
            id=doc_id, kind=DocKind.VULNERABILITY,
            title=entry.get("title") or doc_id,
            description=description, severity=severity,
            cross_refs=frozenset(refs)))
        seen.add(doc_id)
    return docs


# ---------------------------------------------------------------------------
# Corpus construction and traversal
# ---------------------------------------------------------------------------


def build_corpus(docs, *, warnings: list[str] | None = None) -> Corpus:
    """Assemble documents into a corpus.

    Duplicate ids keep the first document and record a warning. Cross
    references that do not resolve inside the corpus are collected into
    ``dangling_refs`` rather than dropped silently.
    """
    sink = warnings if warnings is not None else []
    unique: dict[str, AttackVectorDocument] = {}
    for doc in docs:
        if doc.id in unique:
            sink.append(f"duplicate document {doc.id}: keeping the first occurrence")
            continue
        unique[doc.id] = doc
    if not unique:
        raise EmptyCorpusError("corpus has no documents")
    documents = dict(sorted(unique.items()))
    dangling = frozenset((doc.id, ref) for doc in documents.values()
                         for ref in doc.cross_refs if ref not in documents)
    return Corpus(documents=documents, dangling_refs=dangling,
                  build_stamp=_stamp(documents))


def _stamp(documents: dict[str, AttackVectorDocument]) -> str:
    digest = hashlib.sha256()
    for doc in documents.values():
        digest.update(json.dumps(document_to_json(doc), sort_keys=True).encode())
        digest.update(b"\n")
    return digest.hexdigest()[:16]


def expand_crossrefs(corpus: Corpus, seed: set[str], depth: int) -> set[str]:
    """Breadth-first closure over cross references, up to ``depth`` hops.

    Dangling targets are excluded; the seed is always included.
    """
    unknown = {s for s in seed if s not in corpus.documents}
    if unknown:
        raise UnknownDocumentError(f"unknown seed ids: {sorted(unknown)}",
                                   detail=sorted(unknown))
    result = set(seed)
    frontier = set(seed)
    for _ in range(depth):
        frontier = {ref for doc_id in frontier
                    for ref in corpus.documents[doc_id].cross_refs
                    if ref in corpus.documents} - result
        if not frontier:
            break
        result |= frontier
    return result


# ---------------------------------------------------------------------------
# Snapshot persistence (line-delimited JSON)
# ---------------------------------------------------------------------------

_SCHEMES = {s.value: s for s in Scheme}
_BANDS = {b.value: b for b in Band}
_KINDS = {k.value: k for k in DocKind}


def document_to_json(doc: AttackVectorDocument) -> dict:
    severity = None
    if doc.severity is not None:
        severity = {"scheme": doc.severity.scheme.value,
                    "band": doc.severity.band.value,
                    "raw": doc.severity.raw}
    return {"id": doc.id, "kind": doc.kind.value, "title": doc.title,
            "description": doc.description, "extra_text": doc.extra_text,
            "severity": severity, "cross_refs": sorted(doc.cross_refs)}


def document_from_json(obj: dict) -> AttackVectorDocument:
    if not isinstance(obj, dict):
        raise ValueError("document must be a JSON object")
    kind = _KINDS.get(obj.get("kind"))
    if kind is None:
        raise ValueError(f"unknown kind {obj.get('kind')!r}")
    severity = None
    raw_severity = obj.get("severity")
    if raw_severity is not None:
        scheme = _SCHEMES.get(raw_severity.get("scheme"))
        band = _BANDS.get(raw_severity.get("band"))
        if scheme is None or band is None:
            raise ValueError(f"unknown severity scheme/band in {obj.get('id')!r}")
        raw = raw_severity.get("raw")
        if raw is not None:
            raw = float(raw)
            if scheme != Scheme.CORPUS_NATIVE and band_for_score(scheme, raw) != band:
                raise ValueError(
                    f"{obj.get('id')}: band {band.value!r} does not match "
                    f"{scheme.value} score {raw}")
        severity = SeverityLabel(scheme, band, raw)
    return AttackVectorDocument(
        id=obj.get("id") or "", kind=kind, title=obj.get("title") or "",
        description=obj.get("description") or "",
        extra_text=obj.get("extra_text") or None, severity=severity,
        cross_refs=frozenset(obj.get("cross_refs") or ()))


def dump_snapshot(corpus: Corpus) -> str:
    """One document per line, sorted by id; stable across runs."""
    return "".join(json.dumps(document_to_json(doc), ensure_ascii=False) + "\n"
                   for doc in corpus.documents.values())


def load_snapshot(text: str, *, warnings: list[str] | None = None) -> Corpus:
    """Rebuild a corpus from a snapshot; failures name the offending line."""
    docs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"line {lineno}: malformed JSON: {exc.msg}",
                                line=lineno) from exc
        try:
            docs.append(document_from_json(obj))
        except ValueError as exc:
            raise SnapshotError(f"line {lineno}: {exc}", line=lineno) from exc
    return build_corpus(docs, warnings=warnings)
