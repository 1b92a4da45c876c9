#!/usr/bin/env python3
"""Regenerate the recorded service responses the dashboard tests replay.

Runs the real HTTP service in process, performs one analyst session
(upload corpus and demo model, analyze, edit the BPCS entry point,
re-analyze, diff), and writes every exchange to
frontend/test/fixtures/recorded_session.json.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from threatscope.corpus import (
    build_corpus,
    dump_snapshot,
    parse_attack_patterns,
    parse_vulnerabilities,
    parse_weaknesses,
)
from threatscope.service import SessionState, create_app

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
OUT = ROOT / "frontend" / "test" / "fixtures" / "recorded_session.json"

BPCS_EDIT = {"op": "set_attribute", "id": "BPCS platform", "key": "entry-point",
             "value": "remote maintenance console accepts operating system commands"}


def build_snapshot() -> str:
    docs = []
    docs += parse_attack_patterns((FIXTURES / "capec_small.xml").read_text())
    docs += parse_weaknesses((FIXTURES / "cwe_78.xml").read_text())
    docs += parse_weaknesses((FIXTURES / "cwe_distractors.xml").read_text())
    docs += parse_vulnerabilities((FIXTURES / "cve_feed.json").read_text())
    return dump_snapshot(build_corpus(docs))


def main() -> None:
    recorded = {}

    def record(name, method, path, response, request_body=None):
        assert response.status_code < 500, response.text
        recorded[name] = {
            "method": method, "path": path, "status": response.status_code,
            "request_body": request_body, "body": response.json(),
        }
        return response.json()

    with TestClient(create_app(SessionState())) as client:
        snapshot = build_snapshot()
        record("corpus_put", "PUT", "/corpus", client.put("/corpus", content=snapshot))

        demo = (FIXTURES / "demo_model.graphml").read_text()
        upload = record("model_post", "POST", "/models",
                        client.post("/models", content=demo))
        model_id = upload["model_id"]

        record("model_get_v1", "GET", f"/models/{model_id}",
               client.get(f"/models/{model_id}"))

        baseline = record("analyze_v1", "POST", f"/models/{model_id}/analyze",
                          client.post(f"/models/{model_id}/analyze"))
        a1 = baseline["analysis_id"]
        record("analysis_v1", "GET", f"/analyses/{a1}", client.get(f"/analyses/{a1}"))

        record("patch_bpcs", "PATCH", f"/models/{model_id}",
               client.patch(f"/models/{model_id}", json=[BPCS_EDIT]),
               request_body=[BPCS_EDIT])
        record("model_get_v2", "GET", f"/models/{model_id}",
               client.get(f"/models/{model_id}"))

        edited = record("analyze_v2", "POST", f"/models/{model_id}/analyze",
                        client.post(f"/models/{model_id}/analyze"))
        a2 = edited["analysis_id"]
        record("analysis_v2", "GET", f"/analyses/{a2}", client.get(f"/analyses/{a2}"))

        record("diff_self", "GET", f"/analyses/{a1}/diff/{a1}",
               client.get(f"/analyses/{a1}/diff/{a1}"))
        record("diff_v1_v2", "GET", f"/analyses/{a1}/diff/{a2}",
               client.get(f"/analyses/{a1}/diff/{a2}"))

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(recorded, indent=2) + "\n", encoding="utf-8")

    bpcs_rows = [row for row in recorded["analysis_v2"]["body"]["attributes"]
                 if row["entity"] == "BPCS platform" and row["key"] == "entry-point"]
    doc_ids = [m["doc_id"] for m in bpcs_rows[0]["matches"]]
    assert "CWE-78" in doc_ids, doc_ids
    print(f"wrote {OUT} ({len(recorded)} exchanges); "
          f"BPCS entry-point matches after edit: {doc_ids}")


if __name__ == "__main__":
    main()
