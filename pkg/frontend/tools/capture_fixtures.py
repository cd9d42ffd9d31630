"""Record real API responses into test/fixtures/bundle.json.

The explorer's vitest suite replays these captures through a mock fetch, so
every number the UI tests check was produced by the actual server, not typed
in by hand. Re-run after any change to the API surface:

    python3 frontend/tools/capture_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from ledgerlens import GenModel, GenParams, Scenario, generate
from ledgerlens.api import LedgerService, create_app
from ledgerlens.model import derive_tx_id, format_timestamp
from ledgerlens.parser import tx_canonical_bytes
from ledgerlens.store import LedgerStore

OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "bundle.json"

BASE_TS = 1704067200


def fan_dump() -> tuple[bytes, list[str]]:
    # two mints feeding one spend, then a two-hop chain
    tx1 = {"model": "utxo", "inputs": [],
           "outputs": [{"address": "a1", "value": 10}], "signers": ["a1"]}
    tx2 = {"model": "utxo", "inputs": [],
           "outputs": [{"address": "a2", "value": 5}], "signers": ["a2"]}
    id1 = derive_tx_id(tx_canonical_bytes(tx1))
    id2 = derive_tx_id(tx_canonical_bytes(tx2))
    tx3 = {"model": "utxo",
           "inputs": [{"tx": id1, "index": 0}, {"tx": id2, "index": 0}],
           "outputs": [{"address": "a3", "value": 14}], "signers": ["a1", "a2"]}
    id3 = derive_tx_id(tx_canonical_bytes(tx3))
    tx4 = {"model": "utxo", "inputs": [{"tx": id3, "index": 0}],
           "outputs": [{"address": "a4", "value": 13}], "signers": ["a3"]}
    id4 = derive_tx_id(tx_canonical_bytes(tx4))
    tx5 = {"model": "utxo", "inputs": [{"tx": id4, "index": 0}],
           "outputs": [{"address": "a5", "value": 12}], "signers": ["a4"]}
    id5 = derive_tx_id(tx_canonical_bytes(tx5))

    lines = []
    prev = "0" * 64
    for height, txs in enumerate([[tx1, tx2], [tx3], [tx4], [tx5]]):
        block_hash = f"{height:02d}" * 32
        lines.append(json.dumps({
            "height": height,
            "hash": block_hash,
            "prev_hash": prev,
            "timestamp": format_timestamp(BASE_TS + height * 600),
            "channel": "main",
            "txs": txs,
        }, separators=(",", ":")))
        prev = block_hash
    return ("\n".join(lines) + "\n").encode(), [id1, id2, id3, id4, id5]


def client_for(dump: bytes) -> TestClient:
    app = create_app(LedgerService(LedgerStore()))
    client = TestClient(app, raise_server_exceptions=False)
    resp = client.post("/v1/ingest?mode=strict", content=dump)
    assert resp.status_code == 200, resp.text
    return client


def get(client: TestClient, url: str) -> dict:
    resp = client.get(url)
    return {"url": url, "status": resp.status_code, "body": resp.json()}


def post(client: TestClient, url: str, payload=None) -> dict:
    resp = client.post(url, json=payload) if payload is not None else client.post(url)
    return {
        "url": url,
        "status": resp.status_code,
        "request": payload,
        "body": resp.json(),
    }


def main() -> None:
    dump, ids = fan_dump()
    fan = client_for(dump)
    origin = ids[2]
    bogus = "f" * 64

    grants_params = GenParams(
        seed=7, model=GenModel.ACCOUNT, channels=2, blocks=6,
        txs_per_block=8, addresses=10, multi_input_rate=0.0,
        scenario=Scenario.GRANTS,
    )
    ledger = generate(grants_params)
    grants = client_for(ledger.dump)
    # full window: 6 blocks an hour apart, channel offsets of a few seconds
    start, end = BASE_TS, BASE_TS + 7 * 3600
    addr_url = f"/v1/graph/accounts?start={start}&end={end}&granularity=address"
    entity_url = f"/v1/graph/accounts?start={start}&end={end}&granularity=entity"

    bundle = {
        "fan": {
            "origin": origin,
            "tx_ids": ids,
            "trace_k0": get(fan, f"/v1/trace?tx={origin}&dir=both&hops=0"),
            "trace_k1": get(fan, f"/v1/trace?tx={origin}&dir=both&hops=1"),
            "trace_k2": get(fan, f"/v1/trace?tx={origin}&dir=both&hops=2"),
            "trace_unknown": get(fan, f"/v1/trace?tx={bogus}&dir=both&hops=1"),
        },
        "grants": {
            "window": {"start": start, "end": end},
            "truth": {
                "grants_per_org": ledger.truth["grants_per_org"],
                "org_labels": ledger.truth["org_labels"],
            },
            "address_graph": get(grants, addr_url),
            "entity_graph_missing": get(grants, entity_url),
            "rules_invalid": post(grants, "/v1/clustering/rules", {
                "rules": [{"kind": "merge", "addresses": ["org-00"]}],
            }),
            "rules_post": post(grants, "/v1/clustering/rules", {
                "rules": [{"kind": "merge", "addresses": ["org-00", "org-02"]}],
            }),
            "label_post": post(grants, "/v1/labels", {
                "target": "org-00", "label": "Shared Lab",
            }),
            "address_graph_labeled": get(grants, addr_url),
            "rebuild_post": post(grants, "/v1/clustering/rebuild"),
            "entity_graph_after": get(grants, entity_url),
            "status": get(grants, "/v1/status"),
        },
    }

    for name, cap in [("rules_post", 200), ("label_post", 200),
                      ("rebuild_post", 200), ("entity_graph_after", 200),
                      ("rules_invalid", 400), ("entity_graph_missing", 404)]:
        got = bundle["grants"][name]["status"]
        assert got == cap, f"{name}: expected {cap}, got {got}"

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(bundle, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
