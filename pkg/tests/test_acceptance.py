"""End-to-end gate: one test per shipping criterion, each printing a
PASS/FAIL line so `pytest -v -s tests/test_acceptance.py` reads as a
checklist. Every oracle here is computed independently of the code path it
checks (reference BFS, generator ground truth, brute-force closure)."""

import itertools
import json
import random
import resource
import time
from collections import deque

import jsonschema
import pytest
from fastapi.testclient import TestClient

from ledgerlens import (
    BucketWidth,
    ClusteringService,
    Direction,
    GenModel,
    GenParams,
    Granularity,
    LedgerStore,
    ParseMode,
    TxModel,
    account_graph,
    build_partition,
    co_spend_groups,
    generate,
    parse_stream,
    stats,
    trace,
)
from ledgerlens.api import LedgerService, create_app
from ledgerlens.schemas import SCHEMAS

from conftest import BASE_TS, ingest_dump

DAY = 86400


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"\n[{status}] {name}{suffix}")
    assert ok, f"{name}{suffix}"


# --------------------------------------------------------------- trace oracle

def reference_bfs(adj_out, adj_in, detailed, origin, direction, k):
    """Plain dict BFS over the truth edge list, no package code involved."""
    hops = {origin: 0}
    queue = deque([origin])
    while queue:
        node = queue.popleft()
        if hops[node] == k:
            continue
        neighbors = []
        if direction in ("forward", "both"):
            neighbors += adj_out.get(node, [])
        if direction in ("backward", "both"):
            neighbors += adj_in.get(node, [])
        for nxt in neighbors:
            if nxt not in hops:
                hops[nxt] = hops[node] + 1
                queue.append(nxt)
    edges = {
        (src, oi, dst, ii)
        for src, outs in detailed.items() if src in hops
        for (oi, dst, ii) in outs if dst in hops
    }
    return hops, edges


def test_trace_matches_reference_bfs():
    made = generate(GenParams(seed=101, model=GenModel.UTXO, channels=2,
                              blocks=100, txs_per_block=50, addresses=400,
                              multi_input_rate=0.35))
    assert made.truth["counts"]["txs"] == 10_000
    started = time.monotonic()
    store = ingest_dump(made.dump)

    adj_out: dict = {}
    adj_in: dict = {}
    detailed: dict = {}
    for edge in made.truth["expected_edges"]:
        src, dst = edge["source_tx"], edge["target_tx"]
        adj_out.setdefault(src, []).append(dst)
        adj_in.setdefault(dst, []).append(src)
        detailed.setdefault(src, []).append(
            (edge["output_index"], dst, edge["input_index"])
        )

    all_ids = [s.tx.id for s in store.all_txs()]
    rng = random.Random(2024)
    mismatches = 0
    for _ in range(100):
        origin = rng.choice(all_ids)
        direction = rng.choice(["forward", "backward", "both"])
        k = rng.randint(0, 4)
        got = trace(store, origin, k, Direction(direction))
        want_hops, want_edges = reference_bfs(
            adj_out, adj_in, detailed, origin, direction, k
        )
        got_hops = {n.tx_id: n.hop for n in got.nodes}
        got_edges = {
            (e.source_tx, e.output_index, e.target_tx, e.input_index)
            for e in got.edges
        }
        if got_hops != want_hops or got_edges != want_edges:
            mismatches += 1
    elapsed = time.monotonic() - started
    report(
        "trace oracle: 100 random queries over a 10,000-tx dump",
        mismatches == 0 and elapsed < 60,
        f"{mismatches} mismatches, {elapsed:.1f}s",
    )


def test_small_fan_narrative(fig1a_store, fig1a):
    one = trace(fig1a_store, fig1a.id3, 1, Direction.BOTH)
    two = trace(fig1a_store, fig1a.id3, 2, Direction.BOTH)
    ok = (
        {n.tx_id for n in one.nodes}
        == {fig1a.id1, fig1a.id2, fig1a.id3, fig1a.id4}
        and len(one.edges) == 3
        and one.truncated is True
        and {n.tx_id for n in two.nodes}
        == {fig1a.id1, fig1a.id2, fig1a.id3, fig1a.id4, fig1a.id5}
        and two.truncated is False
    )
    report("five-tx fan: 1 hop stops at the join, 2 hops completes", ok)


# ---------------------------------------------------------- clustering oracle

def brute_force_closure(groups, known):
    sets = {a: {a} for a in known}
    for group in groups:
        fused = set()
        for addr in group:
            fused |= sets[addr]
        for addr in fused:
            sets[addr] = fused
    return {a: min(s) for a, s in sets.items()}


def test_clustering_matches_truth_and_brute_force(gen_rates):
    failures = []
    for rate, made in sorted(gen_rates.items()):
        store = ingest_dump(made.dump)
        view = ClusteringService().rebuild(store, [])
        truth_partition = {
            addr: cid
            for cid, members in made.truth["expected_clusters"].items()
            for addr in members
        }
        if view.partition != truth_partition:
            failures.append(f"rate {rate}: truth mismatch")
        groups = co_spend_groups(store)
        brute = brute_force_closure(groups, store.known_addresses())
        if view.partition != brute:
            failures.append(f"rate {rate}: brute-force mismatch")
        for perm in itertools.islice(itertools.permutations(groups), 0, 6):
            if build_partition(perm, [], store.known_addresses()) != view.partition:
                failures.append(f"rate {rate}: order sensitivity")
                break
    report(
        "clustering oracle: ground truth, brute force, permutation invariance",
        not failures, "; ".join(failures) or "rates 0 / 0.25 / 0.5",
    )


# ------------------------------------------------------ aggregation invariants

def test_interaction_values_conserve_outputs(medium_store, mixed_store, gen_rates):
    stores = [medium_store, mixed_store] + [
        ingest_dump(made.dump) for made in gen_rates.values()
    ]
    checked = 0
    bad = 0
    for store in stores:
        stamps = [s.tx.timestamp for s in store.all_txs()]
        received: dict = {}
        for item in store.interactions_by_window(min(stamps), max(stamps) + 1):
            key = (item.tx, item.to_addr)
            received[key] = received.get(key, 0) + item.value
        spent: set = set()
        for stored in store.all_txs():
            tx = stored.tx
            if tx.model is TxModel.UTXO:
                per_address: dict = {}
                for out in tx.outputs:
                    per_address[out.address] = per_address.get(out.address, 0) + out.value
                for address, value in per_address.items():
                    checked += 1
                    if received.get((tx.id, address), 0) != value:
                        bad += 1
            for edge in store.edges_by_tx(tx.id)[0]:
                key = (edge.source_tx, edge.output_index)
                if key in spent:
                    bad += 1
                spent.add(key)
    report(
        "aggregation: per-output interaction totals and single-spend hold",
        bad == 0, f"{checked} outputs checked across {len(stores)} stores",
    )


def test_entity_address_value_conservation(medium_store, mixed_store, fig1a_store):
    fixtures = {
        "medium": medium_store, "mixed": mixed_store, "fan": fig1a_store,
    }
    rng = random.Random(99)
    bad = []
    windows = 0
    for name, store in fixtures.items():
        view = ClusteringService().rebuild(store, [])
        stamps = [s.tx.timestamp for s in store.all_txs()]
        lo, hi = min(stamps), max(stamps) + 1
        spans = [(lo, hi)]
        while len(spans) < 1 + 50 // len(fixtures):
            a = rng.randrange(lo - 3600, hi)
            spans.append((a, rng.randrange(a + 1, hi + 3600)))
        for start, end in spans:
            windows += 1
            address = account_graph(store, start, end, Granularity.ADDRESS)
            entity = account_graph(store, start, end, Granularity.ENTITY, view=view)
            lhs = sum(e.total_value for e in entity.edges) + sum(
                n.metrics.intra_value for n in entity.nodes
            )
            rhs = sum(e.total_value for e in address.edges)
            if lhs != rhs:
                bad.append(f"{name} [{start},{end})")
    report(
        "account graphs: entity edges + intra value equal address edges",
        not bad, f"{windows} windows over {len(fixtures)} fixtures",
    )


# --------------------------------------------------- idempotence, determinism

def test_idempotent_ingest_and_deterministic_bytes(gen_medium, fig1a):
    params = GenParams(seed=11, model=GenModel.UTXO, channels=2, blocks=30,
                       txs_per_block=25, addresses=80, multi_input_rate=0.25)
    regenerated = generate(params)
    dump_stable = regenerated.dump == gen_medium.dump

    store = ingest_dump(fig1a.dump)
    before = store.snapshot()
    blocks, _ = parse_stream(fig1a.dump, ParseMode.STRICT)
    after = store.ingest(blocks)
    ingest_stable = after == before

    api = TestClient(create_app(LedgerService(store)))
    probes = [
        ("/v1/status", {}),
        ("/v1/trace", {"tx": fig1a.id3, "hops": "2"}),
        ("/v1/graph/accounts",
         {"start": str(BASE_TS), "end": str(BASE_TS + DAY)}),
        ("/v1/stats", {"start": str(BASE_TS), "end": str(BASE_TS + DAY)}),
    ]
    bytes_stable = all(
        api.get(p, params=q).content == api.get(p, params=q).content
        for p, q in probes
    )
    report(
        "idempotence: re-ingest is a no-op, dumps and responses byte-stable",
        dump_stable and ingest_stable and bytes_stable,
        f"dump={dump_stable} ingest={ingest_stable} bytes={bytes_stable}",
    )


# ------------------------------------------------------------------ api contract

def test_api_contract(fig1a):
    api = TestClient(create_app(LedgerService(ingest_dump(fig1a.dump))),
                     raise_server_exceptions=False)
    api.post("/v1/clustering/rules",
             json={"rules": [{"kind": "merge", "addresses": ["a4", "a5"]}]})
    api.post("/v1/clustering/rebuild")
    window = {"start": str(BASE_TS), "end": str(BASE_TS + DAY)}
    checks = [
        ("status", api.get("/v1/status")),
        ("block", api.get("/v1/blocks/main/0")),
        ("transaction", api.get(f"/v1/transactions/{fig1a.id3}")),
        ("address_transactions", api.get("/v1/addresses/a1/transactions")),
        ("graph_view", api.get("/v1/trace", params={"tx": fig1a.id3})),
        ("graph_view", api.get("/v1/graph/accounts", params=window)),
        ("graph_view", api.get("/v1/graph/accounts",
                               params={**window, "granularity": "entity"})),
        ("stats", api.get("/v1/stats", params=window)),
        ("clustering", api.get("/v1/clustering/current")),
        ("label_applied", api.post("/v1/labels",
                                   json={"target": "a1", "label": "probe"})),
        ("label_state", api.get("/v1/labels", params={"target": "a1"})),
        ("label_import", api.post(
            "/v1/labels/import",
            content=json.dumps({"target": "a2", "label": "bulk"}).encode())),
        ("ingest_report", api.post("/v1/ingest", content=fig1a.dump)),
    ]
    schema_failures = []
    for name, response in checks:
        if response.status_code != 200:
            schema_failures.append(f"{name}: HTTP {response.status_code}")
            continue
        try:
            jsonschema.validate(response.json(), SCHEMAS[name])
        except jsonschema.ValidationError as exc:
            schema_failures.append(f"{name}: {exc.message}")

    missing = api.get("/v1/transactions/" + "ab" * 32)
    envelope_ok = missing.status_code == 404 and missing.json() == {
        "error": "not_found",
        "detail": missing.json()["detail"],
    }
    jsonschema.validate(missing.json(), SCHEMAS["error"])

    api.post("/v1/labels", json={"target": "a3", "label": "fresh",
                                 "applied_at": 1_700_000_000})
    readback = api.get("/v1/labels", params={"target": "a3"}).json()
    ryw_ok = readback["effective"]["label"] == "fresh"

    report(
        "api contract: schemas validate, 404 envelope, label read-your-write",
        not schema_failures and envelope_ok and ryw_ok,
        "; ".join(schema_failures) or f"{len(checks)} endpoint responses",
    )


# -------------------------------------------------------------- throughput

def test_throughput_100k_txs():
    made = generate(GenParams(seed=42, model=GenModel.UTXO, channels=2,
                              blocks=250, txs_per_block=200, addresses=500,
                              multi_input_rate=0.3))
    assert made.truth["counts"]["txs"] == 100_000
    started = time.monotonic()
    blocks, parse_report = parse_stream(made.dump, ParseMode.STRICT)
    store = LedgerStore()
    store.ingest(blocks)
    elapsed = time.monotonic() - started
    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / (1024 ** 2)
    counts = store.snapshot().counts
    ok = (
        not parse_report.errors
        and counts.txs == 100_000
        and elapsed < 60
        and peak_gb < 2
    )
    report(
        "throughput: 100,000-tx dump parsed, linked and indexed",
        ok, f"{elapsed:.1f}s, peak {peak_gb:.2f} GB",
    )
