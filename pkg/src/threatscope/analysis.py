"""Filtering, exposure reporting, severity grouping, and surface diffing.

Everything here is a pure function over immutable inputs. No operation
produces a scalar risk score: counts, groupings, and deltas are presented
for qualitative comparison between design alternatives.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass

from .corpus import BAND_RANK, Band, Corpus, DocKind, kind_for_id
from .errors import IndexMismatchError, NonFilterError, StaleComparisonError
from .retrieval import AttackSurface, tokenize

CSV_HEADER = "component,attribute,attack_patterns,weaknesses,vulnerabilities,total"


@dataclass(frozen=True)
class FilterSpec:
    """Criteria narrowing an attack surface; unset fields do not filter."""

    include_kinds: frozenset[DocKind] | None = None
    keyword: str | None = None
    min_severity_band: Band | None = None
    component_ids: frozenset[str] | None = None

    @property
    def is_identity(self) -> bool:
        return (self.include_kinds is None and self.keyword is None
                and self.min_severity_band is None and self.component_ids is None)


def combine_filters(first: FilterSpec, second: FilterSpec) -> FilterSpec:
    """The conjunction of two filters: applying both in sequence equals
    applying the combined spec once."""
    keywords = [k for k in (first.keyword, second.keyword) if k is not None]
    if first.min_severity_band is None:
        band = second.min_severity_band
    elif second.min_severity_band is None:
        band = first.min_severity_band
    else:
        band = max(first.min_severity_band, second.min_severity_band,
                   key=BAND_RANK.__getitem__)
    return FilterSpec(
        include_kinds=_intersect(first.include_kinds, second.include_kinds),
        keyword=" ".join(keywords) if keywords else None,
        min_severity_band=band,
        component_ids=_intersect(first.component_ids, second.component_ids))


def _intersect(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a & b


def filter_surface(surface: AttackSurface, spec: FilterSpec, corpus: Corpus,
                   *, warnings: list[str] | None = None) -> AttackSurface:
    """Narrow a surface; every surviving ranked list is a subsequence of
    its input list.

    A spec with no criteria is rejected (NON_FILTER). A keyword that
    tokenizes to nothing contributes no criterion and records a warning;
    if no other criterion is set the surface is returned unchanged.
    """
    sink = warnings if warnings is not None else []
    if spec.is_identity:
        raise NonFilterError("filter spec has no criteria set")

    keyword_terms: list[str] = []
    if spec.keyword is not None:
        keyword_terms = tokenize(spec.keyword)
        if not keyword_terms:
            sink.append(f"IDENTITY: keyword {spec.keyword!r} has no usable terms")
            spec = FilterSpec(include_kinds=spec.include_kinds, keyword=None,
                              min_severity_band=spec.min_severity_band,
                              component_ids=spec.component_ids)
            if spec.is_identity:
                return surface

    doc_ok: dict[str, bool] = {}

    def admits(doc_id: str) -> bool:
        cached = doc_ok.get(doc_id)
        if cached is not None:
            return cached
        doc = corpus.documents.get(doc_id)
        if doc is None:
            raise IndexMismatchError(f"surface references {doc_id!r} missing from corpus")
        ok = True
        if spec.include_kinds is not None and doc.kind not in spec.include_kinds:
            ok = False
        if ok and keyword_terms:
            text_terms = set(tokenize(doc.title)) | set(tokenize(doc.description))
            ok = all(term in text_terms for term in keyword_terms)
        if ok and spec.min_severity_band is not None:
            band = doc.severity.band if doc.severity else Band.NONE
            ok = BAND_RANK[band] >= BAND_RANK[spec.min_severity_band]
        doc_ok[doc_id] = ok
        return ok

    per_attribute = {}
    for (entity, key), matches in surface.per_attribute.items():
        if spec.component_ids is not None and entity not in spec.component_ids:
            continue
        per_attribute[(entity, key)] = tuple(m for m in matches if admits(m.doc_id))

    return AttackSurface(model_id=surface.model_id, corpus_stamp=surface.corpus_stamp,
                         per_attribute=per_attribute, config=surface.config)


# ---------------------------------------------------------------------------
# Exposure reporting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    component: str
    attribute: str
    attack_patterns: int
    weaknesses: int
    vulnerabilities: int

    @property
    def total(self) -> int:
        return self.attack_patterns + self.weaknesses + self.vulnerabilities


@dataclass(frozen=True)
class ExposureReport:
    """Match counts per attribute, including zero-match attributes."""

    model_id: str
    rows: tuple[ReportRow, ...]

    @property
    def total(self) -> int:
        return sum(row.total for row in self.rows)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for row in self.rows:
            writer.writerow([row.component, row.attribute, row.attack_patterns,
                             row.weaknesses, row.vulnerabilities, row.total])
        return out.getvalue()

    def to_json(self) -> dict:
        return {"model_id": self.model_id,
                "rows": [{"component": r.component, "attribute": r.attribute,
                          "attack_patterns": r.attack_patterns,
                          "weaknesses": r.weaknesses,
                          "vulnerabilities": r.vulnerabilities,
                          "total": r.total} for r in self.rows],
                "total": self.total}


def exposure_report(surface: AttackSurface) -> ExposureReport:
    """One row per (entity, attribute) in the surface, sorted for stable output."""
    rows = []
    for (entity, key) in sorted(surface.per_attribute):
        counts = {DocKind.ATTACK_PATTERN: 0, DocKind.WEAKNESS: 0, DocKind.VULNERABILITY: 0}
        for match in surface.per_attribute[(entity, key)]:
            kind = kind_for_id(match.doc_id)
            if kind is not None:
                counts[kind] += 1
        rows.append(ReportRow(component=entity, attribute=key,
                              attack_patterns=counts[DocKind.ATTACK_PATTERN],
                              weaknesses=counts[DocKind.WEAKNESS],
                              vulnerabilities=counts[DocKind.VULNERABILITY]))
    return ExposureReport(model_id=surface.model_id, rows=tuple(rows))


# ---------------------------------------------------------------------------
# Surface diffing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttributeDelta:
    added: tuple[str, ...]
    removed: tuple[str, ...]


@dataclass(frozen=True)
class SurfaceDiff:
    """Change in the attack surface between two analyses over one corpus."""

    per_attribute: dict[tuple[str, str], AttributeDelta]
    per_component: dict[str, int]
    net_delta: int

    @property
    def empty(self) -> bool:
        return not self.per_attribute and self.net_delta == 0

    def to_json(self) -> dict:
        return {
            "attributes": [
                {"entity": entity, "key": key,
                 "added": list(delta.added), "removed": list(delta.removed)}
                for (entity, key), delta in sorted(self.per_attribute.items())],
            "per_component": dict(sorted(self.per_component.items())),
            "net_delta": self.net_delta,
            "empty": self.empty,
        }


def compare_surfaces(before: AttackSurface, after: AttackSurface) -> SurfaceDiff:
    """Per-attribute added/removed documents and the induced count deltas.

    Both surfaces must reference the same corpus snapshot; otherwise the
    comparison is meaningless and rejected as STALE_COMPARISON.
    """
    if before.corpus_stamp != after.corpus_stamp:
        raise StaleComparisonError(
            "surfaces were built against different corpus snapshots",
            detail={"before": before.corpus_stamp, "after": after.corpus_stamp})

    per_attribute: dict[tuple[str, str], AttributeDelta] = {}
    per_component: dict[str, int] = {}
    for attr_key in sorted(set(before.per_attribute) | set(after.per_attribute)):
        before_ids = {m.doc_id for m in before.per_attribute.get(attr_key, ())}
        after_ids = {m.doc_id for m in after.per_attribute.get(attr_key, ())}
        added = tuple(sorted(after_ids - before_ids))
        removed = tuple(sorted(before_ids - after_ids))
        if not added and not removed:
            continue
        per_attribute[attr_key] = AttributeDelta(added=added, removed=removed)
        entity = attr_key[0]
        per_component[entity] = per_component.get(entity, 0) + len(added) - len(removed)

    per_component = {k: v for k, v in per_component.items() if v != 0}
    net = sum(len(d.added) - len(d.removed) for d in per_attribute.values())
    return SurfaceDiff(per_attribute=per_attribute, per_component=per_component,
                       net_delta=net)


def severity_view(surface: AttackSurface, corpus: Corpus
                  ) -> dict[Band, list[tuple[tuple[str, str], str]]]:
    """Group matches by severity band; unlabeled documents fall under None.

    Output is a grouping only, never an aggregate score.
    """
    grouped: dict[Band, list[tuple[tuple[str, str], str]]] = {}
    for attr_key in sorted(surface.per_attribute):
        for match in surface.per_attribute[attr_key]:
            doc = corpus.documents.get(match.doc_id)
            if doc is None:
                raise IndexMismatchError(
                    f"surface references {match.doc_id!r} missing from corpus")
            band = doc.severity.band if doc.severity else Band.NONE
            grouped.setdefault(band, []).append((attr_key, match.doc_id))
    return grouped
