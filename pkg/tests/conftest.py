"""Shared fixtures: the demo SCADA model plus the corpus fixtures every
module exercises (trio chain, distractor scenario, full workbench pool)."""

from __future__ import annotations

from pathlib import Path

import pytest

from threatscope.corpus import (
    build_corpus,
    parse_attack_patterns,
    parse_vulnerabilities,
    parse_weaknesses,
)
from threatscope.model import parse_model
from threatscope.retrieval import build_index

FIXTURES = Path(__file__).parent / "fixtures"

TRIO_IDS = ("CAPEC-88", "CWE-78", "CVE-TEST-0001")


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def demo_model_text() -> str:
    return read_fixture("demo_model.graphml")


@pytest.fixture(scope="session")
def demo_model(demo_model_text):
    return parse_model(demo_model_text)


@pytest.fixture(scope="session")
def all_docs():
    """Every fixture document, keyed by id."""
    docs = []
    docs += parse_attack_patterns(read_fixture("capec_small.xml"))
    docs += parse_weaknesses(read_fixture("cwe_78.xml"))
    docs += parse_weaknesses(read_fixture("cwe_distractors.xml"))
    docs += parse_vulnerabilities(read_fixture("cve_feed.json"))
    return {doc.id: doc for doc in docs}


def select(all_docs, ids):
    return [all_docs[doc_id] for doc_id in ids]


@pytest.fixture(scope="session")
def trio_corpus(all_docs):
    """CAPEC-88 -> CWE-78 -> CVE-TEST-0001 chain (CWE-77 ref dangles)."""
    return build_corpus(select(all_docs, TRIO_IDS))


@pytest.fixture(scope="session")
def scenario_corpus(all_docs):
    """CWE-78 plus the eleven distractor weaknesses."""
    ids = [doc_id for doc_id, doc in sorted(all_docs.items())
           if doc_id.startswith("CWE-")]
    assert "CWE-78" in ids and len(ids) == 12
    return build_corpus(select(all_docs, ids))


@pytest.fixture(scope="session")
def workbench_corpus(all_docs):
    """The full fixture pool: all kinds, resolvable and dangling refs."""
    return build_corpus(list(all_docs.values()))


@pytest.fixture(scope="session")
def trio_index(trio_corpus):
    return build_index(trio_corpus)


@pytest.fixture(scope="session")
def scenario_index(scenario_corpus):
    return build_index(scenario_corpus)


@pytest.fixture(scope="session")
def workbench_index(workbench_corpus):
    return build_index(workbench_corpus)


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[acceptance] {name}: {report.outcome.upper()}")
