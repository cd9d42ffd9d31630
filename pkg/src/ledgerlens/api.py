"""HTTP query service: REST/JSON endpoints over a ledger store.

Response bodies are built as plain dicts and dumped with fixed separators, so
a given (snapshot, clustering version, query) triple always yields the same
bytes. Every response carries the snapshot id it was computed against, and
each request resolves exactly one snapshot up front, so a concurrent ingest
never bleeds into a response halfway through.

Errors use one envelope: {"error": <code>, "detail": <human text>} with
400 for bad input, 404 for missing things, 409 for ledger conflicts and
403 when a read-only server receives a mutation.
"""

from __future__ import annotations

import argparse
import base64
import json

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from .clustering import ClusteringService, ClusterRule, ClusterView
from .errors import (
    HopLimitExceeded,
    InvalidParams,
    InvalidRule,
    LedgerError,
    MalformedRecord,
    NotFound,
    ReadOnlyStore,
)
from .graphs import BucketWidth, Granularity, GroupBy, account_graph, stats
from .labels import LabelService
from .model import TxEdge, TxModel, parse_timestamp
from .parser import ParseMode, parse_stream
from .schemas import SCHEMAS
from .store import LedgerStore, StoreSnapshot
from .trace import Direction, TraceSubgraph, trace

DEFAULT_MAX_HOPS = 16
DEFAULT_PAGE_LIMIT = 1000
MAX_PAGE_LIMIT = 10000

_HTTP_STATUS = {
    "malformed_record": 400,
    "model_violation": 400,
    "invalid_params": 400,
    "invalid_rule": 400,
    "empty_window": 400,
    "hop_limit_exceeded": 400,
    "not_found": 404,
    "unknown_clustering_version": 404,
    "unknown_target": 404,
    "chain_mismatch": 409,
    "duplicate_tx_id": 409,
    "tip_conflict": 409,
    "read_only": 403,
    "store_version": 503,
}

_ERRORS_BY_CODE = {cls.code: cls for cls in LedgerError.__subclasses__()}


def _error_for(code: str, detail: str) -> LedgerError:
    return _ERRORS_BY_CODE.get(code, LedgerError)(detail)


def _json(payload: dict, status: int = 200) -> Response:
    body = json.dumps(payload, separators=(",", ":"), ensure_ascii=False)
    return Response(content=body.encode("utf-8"), status_code=status,
                    media_type="application/json")


def _error_response(code: str, detail: str) -> Response:
    return _json({"error": code, "detail": detail}, _HTTP_STATUS.get(code, 500))


def _parse_instant(raw: str, name: str) -> int:
    """Window bounds accept epoch seconds or RFC 3339 text."""
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return parse_timestamp(raw)
    except (LedgerError, TypeError):
        raise InvalidParams(f"{name} must be epoch seconds or an RFC 3339 instant, got {raw!r}") from None


def _parse_int(raw: str, name: str) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise InvalidParams(f"{name} must be an integer, got {raw!r}") from None


def _encode_cursor(channel: str, height: int, tx_index: int) -> str:
    raw = json.dumps([channel, height, tx_index], separators=(",", ":")).encode()
    return base64.urlsafe_b64encode(raw).decode().rstrip("=")


def _decode_cursor(cursor: str) -> tuple[str, int, int]:
    try:
        padded = cursor + "=" * (-len(cursor) % 4)
        item = json.loads(base64.urlsafe_b64decode(padded))
        channel, height, tx_index = item
        if isinstance(channel, str) and isinstance(height, int) and isinstance(tx_index, int):
            return channel, height, tx_index
    except Exception:
        pass
    raise InvalidParams(f"malformed cursor {cursor!r}")


# ------------------------------------------------------------- serialization

def _edge_dict(edge: TxEdge) -> dict:
    return {
        "source_tx": edge.source_tx,
        "output_index": edge.output_index,
        "target_tx": edge.target_tx,
        "input_index": edge.input_index,
        "value": edge.value,
        "owner": edge.owner,
        "timestamp": edge.timestamp,
    }


def _tx_summary(tx) -> dict:
    return {
        "id": tx.id,
        "model": tx.model.value,
        "channel": tx.channel,
        "block_height": tx.block_height,
        "tx_index": tx.tx_index,
        "timestamp": tx.timestamp,
    }


def serialize_trace(result: TraceSubgraph, snapshot_id: int) -> dict:
    nodes = [
        {
            "id": n.tx_id,
            "kind": "tx",
            "hop": n.hop,
            "timestamp": n.timestamp,
            "contract": n.contract,
        }
        for n in result.nodes
    ]
    merged: dict[tuple[str, str], list[int]] = {}
    for e in result.edges:
        acc = merged.setdefault((e.source_tx, e.target_tx), [0, 0, e.timestamp])
        acc[0] += e.value
        acc[1] += 1
    edges = [
        {"from": src, "to": dst, "value": value, "count": count, "timestamp": ts}
        for (src, dst), (value, count, ts) in sorted(merged.items())
    ]
    return {
        "kind": "transaction_dag",
        "nodes": nodes,
        "edges": edges,
        "meta": {
            "snapshot_id": snapshot_id,
            "truncated": result.truncated,
            "origin": result.origin,
            "direction": result.direction.value,
            "max_hops": result.k,
        },
    }


def serialize_account_graph(graph, snapshot_id: int) -> dict:
    node_kind = "address" if graph.granularity is Granularity.ADDRESS else "entity"
    nodes = [
        {
            "id": n.id,
            "kind": node_kind,
            "label": n.label,
            "metrics": {
                "tx_count": n.metrics.tx_count,
                "total_in_value": n.metrics.total_in_value,
                "total_out_value": n.metrics.total_out_value,
                "member_count": n.metrics.member_count,
                "intra_value": n.metrics.intra_value,
            },
        }
        for n in graph.nodes
    ]
    edges = [
        {"from": e.from_id, "to": e.to_id, "value": e.total_value, "count": e.count}
        for e in graph.edges
    ]
    meta = {
        "snapshot_id": snapshot_id,
        "clustering_version": graph.clustering_version,
        "window": {"start": graph.start, "end": graph.end},
        "granularity": graph.granularity.value,
    }
    return {"kind": "account_graph", "nodes": nodes, "edges": edges, "meta": meta}


def _label_dict(rec) -> dict:
    return rec.to_dict()


# ------------------------------------------------------------------- service

class LedgerService:
    """Glues store, clustering versions, pending rules and labels together,
    and replays journaled annotation events when a persisted store reopens."""

    def __init__(self, store: LedgerStore, max_hops: int = DEFAULT_MAX_HOPS,
                 readonly: bool = False):
        self.store = store
        self.max_hops = max_hops
        self.readonly = readonly
        self.clustering = ClusteringService()
        self.pending_rules: tuple[ClusterRule, ...] = ()
        self.labels = LabelService(
            known=lambda target: store.has_address(target),
            on_applied=lambda rec: store.append_aux("label", rec.to_dict()),
        )
        for tag, data in store.aux_records():
            if tag == "label":
                self.labels.replay(data)
            elif tag == "rules":
                self.pending_rules = tuple(ClusterRule.from_dict(r) for r in data["rules"])
            elif tag == "rebuild":
                rules = tuple(ClusterRule.from_dict(r) for r in data["rules"])
                self.clustering.rebuild(self.store, rules)

    def guard_write(self) -> None:
        if self.readonly:
            raise ReadOnlyStore("server is running with --readonly")

    def set_rules(self, rules: tuple[ClusterRule, ...]) -> None:
        self.guard_write()
        known = set(self.store.known_addresses())
        for rule in rules:
            for addr in rule.addresses:
                if addr not in known:
                    raise InvalidRule(f"rule references unknown address {addr!r}")
        self.pending_rules = rules
        self.store.append_aux("rules", {"rules": [r.to_dict() for r in rules]})

    def rebuild_clustering(self) -> ClusterView:
        self.guard_write()
        view = self.clustering.rebuild(self.store, self.pending_rules)
        self.store.append_aux("rebuild", {"rules": [r.to_dict() for r in view.rules]})
        return view

    def ingest_dump(self, body: bytes, mode: ParseMode) -> tuple[dict, StoreSnapshot]:
        self.guard_write()
        kept: list[bytes] = []
        duplicates = 0
        for line in body.splitlines():
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                kept.append(line)  # the parser reports it with a line number
                continue
            if isinstance(record, dict) and isinstance(record.get("hash"), str):
                location = self.store.block_location(record["hash"])
                if location is not None and location == (record.get("channel"), record.get("height")):
                    duplicates += 1
                    continue
            kept.append(line)
        anchors = {
            ch: self.store.tip_anchor(ch) for ch in self.store.channels()
        }
        blocks, report = parse_stream(kept, mode, anchors=anchors)
        if mode is ParseMode.STRICT and report.errors:
            first = report.errors[0]
            raise _error_for(first["kind"], first["detail"])
        self.store.ingest(blocks)
        payload = report.to_dict()
        payload["blocks_duplicate"] = duplicates
        return payload, self.store.snapshot()

    def cluster_label(self, cluster_id: str) -> str | None:
        rec = self.labels.effective(cluster_id)
        return rec.label if rec is not None else None


def serialize_clustering(service: LedgerService, view: ClusterView,
                         snapshot_id: int, include_members: bool) -> dict:
    core = {
        "version": view.version,
        "built_at_snapshot": view.snapshot_id,
        "rules_applied": [r.to_dict() for r in view.rules],
        "cluster_count": len(view.members_by_id),
        "address_count": len(view.partition),
    }
    if include_members:
        core["clusters"] = [
            {
                "id": cid,
                "label": service.cluster_label(cid),
                "member_count": len(members),
                "members": list(members),
            }
            for cid, members in sorted(view.members_by_id.items())
        ]
    return {"snapshot_id": snapshot_id, "clustering": core}


# ----------------------------------------------------------------------- app

def create_app(service: LedgerService) -> FastAPI:
    app = FastAPI(title="ledgerlens", openapi_url=None, docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = service.store

    @app.exception_handler(LedgerError)
    async def ledger_error_handler(_request: Request, exc: LedgerError):
        return _error_response(exc.code, exc.detail)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_request: Request, exc: RequestValidationError):
        return _error_response("invalid_params", str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(_request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(exc.status_code, "error")
        return _json({"error": code, "detail": str(exc.detail)}, exc.status_code)

    @app.get("/v1/status")
    async def status():
        snap = store.snapshot()
        version = service.clustering.latest_version()
        return _json(
            {
                "snapshot_id": snap.snapshot_id,
                "tips": [
                    {"channel": t.channel, "height": t.height, "hash": t.hash}
                    for t in snap.tips
                ],
                "counts": snap.counts.to_dict(),
                "clustering_version": version if version > 0 else None,
                "readonly": service.readonly,
            }
        )

    @app.get("/v1/schemas")
    async def schemas():
        return _json({"schemas": SCHEMAS})

    @app.get("/v1/blocks/{channel}/{height}")
    async def block(channel: str, height: str):
        snap = store.snapshot()
        stored = store.block_by_height(channel, _parse_int(height, "height"), snap)
        blk = stored.block
        return _json(
            {
                "snapshot_id": snap.snapshot_id,
                "block": {
                    "channel": blk.channel,
                    "height": blk.height,
                    "hash": blk.hash,
                    "prev_hash": blk.prev_hash,
                    "timestamp": blk.timestamp,
                    "tx_ids": [tx.id for tx in blk.txs],
                },
            }
        )

    @app.get("/v1/transactions/{tx_id}")
    async def transaction(tx_id: str):
        snap = store.snapshot()
        stored = store.tx_by_id(tx_id, snap)
        out, inc = store.edges_by_tx(tx_id, snap)
        tx = stored.tx
        body = {
            "id": tx.id,
            "model": tx.model.value,
            "channel": tx.channel,
            "block_height": tx.block_height,
            "tx_index": tx.tx_index,
            "timestamp": tx.timestamp,
            "contract": tx.contract,
            "signers": list(tx.signers),
            "fee": stored.fee,
        }
        if tx.model is TxModel.UTXO:
            body["inputs"] = [{"tx": i.source_tx, "index": i.output_index} for i in tx.inputs]
            body["outputs"] = [{"address": o.address, "value": o.value} for o in tx.outputs]
        else:
            body["from"] = tx.transfer.from_addr
            body["to"] = tx.transfer.to_addr
            body["value"] = tx.transfer.value
            body["nonce"] = tx.transfer.nonce
        body["edges"] = {
            "in": [_edge_dict(e) for e in inc],
            "out": [_edge_dict(e) for e in out],
        }
        return _json({"snapshot_id": snap.snapshot_id, "tx": body})

    @app.get("/v1/addresses/{address}/transactions")
    async def address_transactions(address: str, limit: str | None = None,
                                   cursor: str | None = None):
        snap = store.snapshot()
        page_limit = DEFAULT_PAGE_LIMIT if limit is None else _parse_int(limit, "limit")
        if not (1 <= page_limit <= MAX_PAGE_LIMIT):
            raise InvalidParams(f"limit must be in 1..{MAX_PAGE_LIMIT}, got {page_limit}")
        txs = store.txs_by_address(address, snap)
        if cursor is not None:
            after = _decode_cursor(cursor)
            txs = [
                s for s in txs
                if (s.tx.channel, s.tx.block_height, s.tx.tx_index) > after
            ]
        page = txs[:page_limit]
        next_cursor = None
        if len(txs) > page_limit:
            last = page[-1].tx
            next_cursor = _encode_cursor(last.channel, last.block_height, last.tx_index)
        return _json(
            {
                "snapshot_id": snap.snapshot_id,
                "address": address,
                "txs": [_tx_summary(s.tx) for s in page],
                "next_cursor": next_cursor,
            }
        )

    @app.get("/v1/trace")
    async def trace_endpoint(tx: str | None = None, dir: str = "both", hops: str = "1"):
        snap = store.snapshot()
        if not tx:
            raise InvalidParams("tx query parameter is required")
        try:
            direction = Direction(dir)
        except ValueError:
            raise InvalidParams(f"dir must be forward, backward or both, got {dir!r}") from None
        k = _parse_int(hops, "hops")
        if k > service.max_hops:
            raise HopLimitExceeded(f"hops {k} exceeds the configured maximum {service.max_hops}")
        result = trace(store, tx, k, direction, snap)
        return _json(serialize_trace(result, snap.snapshot_id))

    @app.get("/v1/graph/accounts")
    async def graph_accounts(start: str | None = None, end: str | None = None,
                             granularity: str = "address",
                             clustering_version: str | None = None):
        snap = store.snapshot()
        if start is None or end is None:
            raise InvalidParams("start and end query parameters are required")
        window = (_parse_instant(start, "start"), _parse_instant(end, "end"))
        try:
            level = Granularity(granularity)
        except ValueError:
            raise InvalidParams(f"granularity must be address or entity, got {granularity!r}") from None
        view = None
        if level is Granularity.ENTITY:
            version = None if clustering_version is None else _parse_int(
                clustering_version, "clustering_version")
            view = service.clustering.get(version)
        graph = account_graph(
            store, window[0], window[1], level, view, snap,
            label_of=lambda node_id: service.cluster_label(node_id),
        )
        return _json(serialize_account_graph(graph, snap.snapshot_id))

    @app.get("/v1/stats")
    async def stats_endpoint(start: str | None = None, end: str | None = None,
                             bucket: str = "day", group_by: str = "none"):
        snap = store.snapshot()
        if start is None or end is None:
            raise InvalidParams("start and end query parameters are required")
        window = (_parse_instant(start, "start"), _parse_instant(end, "end"))
        try:
            width = BucketWidth(bucket)
        except ValueError:
            raise InvalidParams(f"bucket must be day or hour, got {bucket!r}") from None
        try:
            grouping = GroupBy(group_by)
        except ValueError:
            raise InvalidParams(
                f"group_by must be none, channel or contract, got {group_by!r}") from None
        result = stats(store, window[0], window[1], width, grouping, snap)
        return _json(
            {
                "snapshot_id": snap.snapshot_id,
                "window": {"start": result.start, "end": result.end},
                "bucket": result.bucket.value,
                "group_by": result.group_by.value,
                "series": [
                    {
                        "key": s.key,
                        "points": [{"start": p.start, "tx_count": p.tx_count} for p in s.points],
                    }
                    for s in result.series
                ],
            }
        )

    @app.get("/v1/clustering/current")
    async def clustering_current():
        snap = store.snapshot()
        view = service.clustering.get(None)
        return _json(serialize_clustering(service, view, snap.snapshot_id, include_members=True))

    @app.get("/v1/clustering/{version}")
    async def clustering_version(version: str):
        snap = store.snapshot()
        view = service.clustering.get(_parse_int(version, "version"))
        return _json(serialize_clustering(service, view, snap.snapshot_id, include_members=True))

    @app.post("/v1/clustering/rules")
    async def clustering_rules(request: Request):
        body = await _read_json_object(request)
        raw_rules = body.get("rules")
        if not isinstance(raw_rules, list):
            raise InvalidRule("body must be {\"rules\": [...]}")
        rules = tuple(ClusterRule.from_dict(r) for r in raw_rules)
        service.set_rules(rules)
        snap = store.snapshot()
        return _json(
            {
                "snapshot_id": snap.snapshot_id,
                "pending_rules": [r.to_dict() for r in service.pending_rules],
            }
        )

    @app.post("/v1/clustering/rebuild")
    async def clustering_rebuild():
        view = service.rebuild_clustering()
        snap = store.snapshot()
        return _json(serialize_clustering(service, view, snap.snapshot_id, include_members=False))

    @app.get("/v1/labels")
    async def labels_get(target: str | None = None):
        snap = store.snapshot()
        if not target:
            raise InvalidParams("target query parameter is required")
        if not store.has_address(target, snap):
            raise NotFound(f"target {target!r} is not a known address or cluster")
        effective = service.labels.effective(target)
        history = service.labels.records_for(target)
        return _json(
            {
                "snapshot_id": snap.snapshot_id,
                "target": target,
                "effective": None if effective is None else _label_dict(effective),
                "history": [_label_dict(r) for r in history],
            }
        )

    @app.post("/v1/labels")
    async def labels_post(request: Request):
        service.guard_write()
        body = await _read_json_object(request)
        unknown = set(body) - {"target", "label", "applied_at"}
        if unknown:
            raise MalformedRecord(f"unknown label fields: {sorted(unknown)}")
        rec = service.labels.add(
            body.get("target"), body.get("label"), body.get("applied_at")
        )
        snap = store.snapshot()
        return _json({"snapshot_id": snap.snapshot_id, "applied": _label_dict(rec)})

    @app.post("/v1/labels/import")
    async def labels_import(request: Request):
        service.guard_write()
        raw = await request.body()
        records: list = []
        for line in raw.splitlines():
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                records.append({"_malformed": str(exc)})
        outcome = service.labels.import_batch(records)
        snap = store.snapshot()
        return _json({"snapshot_id": snap.snapshot_id, **outcome.to_dict()})

    @app.post("/v1/ingest")
    async def ingest(request: Request, mode: str = "strict"):
        try:
            parse_mode = ParseMode(mode)
        except ValueError:
            raise InvalidParams(f"mode must be strict or lenient, got {mode!r}") from None
        body = await request.body()
        report, snap = service.ingest_dump(body, parse_mode)
        return _json({"snapshot_id": snap.snapshot_id, "report": report})

    return app


async def _read_json_object(request: Request) -> dict:
    raw = await request.body()
    try:
        body = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"request body is not valid JSON: {exc}") from None
    if not isinstance(body, dict):
        raise MalformedRecord("request body must be a JSON object")
    return body


def build_service(store_path: str | None, max_hops: int = DEFAULT_MAX_HOPS,
                  readonly: bool = False) -> LedgerService:
    store = LedgerStore(store_path) if store_path else LedgerStore()
    return LedgerService(store, max_hops=max_hops, readonly=readonly)


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="ledger-serve",
        description="Serve ledger analytics (trace, clustering, graphs) over HTTP.",
    )
    parser.add_argument("--store", default=None,
                        help="store journal path; omitted means in-memory only")
    parser.add_argument("--bind", default="127.0.0.1:8080", help="host:port to listen on")
    parser.add_argument("--max-hops", type=int, default=DEFAULT_MAX_HOPS,
                        help="largest allowed trace depth")
    parser.add_argument("--readonly", action="store_true",
                        help="reject all mutating endpoints")
    args = parser.parse_args(argv)
    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text.isdigit():
        parser.error(f"--bind must look like host:port, got {args.bind!r}")
    service = build_service(args.store, max_hops=args.max_hops, readonly=args.readonly)
    app = create_app(service)

    import uvicorn

    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")


if __name__ == "__main__":
    main()
