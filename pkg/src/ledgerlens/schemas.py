"""Published JSON Schemas for every REST response body.

The registry is the contract: tests validate live responses against these,
and clients can fetch them to generate bindings. Schemas are strict
(additionalProperties false) so accidental response drift fails loudly.
"""

from __future__ import annotations

_HEX64 = {"type": "string", "pattern": "^[0-9a-f]{64}$"}
_ADDRESS = {"type": "string", "minLength": 1, "maxLength": 256}
_NONNEG = {"type": "integer", "minimum": 0}
_EPOCH = {"type": "integer"}
_SNAPSHOT_ID = {"type": "integer", "minimum": 0}

_TX_EDGE = {
    "type": "object",
    "required": [
        "source_tx", "output_index", "target_tx", "input_index",
        "value", "owner", "timestamp",
    ],
    "properties": {
        "source_tx": _HEX64,
        "output_index": _NONNEG,
        "target_tx": _HEX64,
        "input_index": _NONNEG,
        "value": _NONNEG,
        "owner": _ADDRESS,
        "timestamp": _EPOCH,
    },
    "additionalProperties": False,
}

_NODE_METRICS = {
    "type": "object",
    "required": [
        "tx_count", "total_in_value", "total_out_value", "member_count", "intra_value",
    ],
    "properties": {
        "tx_count": _NONNEG,
        "total_in_value": _NONNEG,
        "total_out_value": _NONNEG,
        "member_count": {"type": "integer", "minimum": 1},
        "intra_value": _NONNEG,
    },
    "additionalProperties": False,
}

_GRAPH_NODE = {
    "type": "object",
    "required": ["id", "kind"],
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "kind": {"enum": ["tx", "address", "entity"]},
        "hop": _NONNEG,
        "label": {"type": ["string", "null"]},
        "metrics": _NODE_METRICS,
        "timestamp": _EPOCH,
        "contract": {"type": ["string", "null"]},
    },
    "additionalProperties": False,
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "tx"}}},
            "then": {"required": ["hop", "timestamp", "contract"]},
            "else": {"required": ["label", "metrics"]},
        }
    ],
}

_GRAPH_EDGE = {
    "type": "object",
    "required": ["from", "to", "value", "count"],
    "properties": {
        "from": {"type": "string", "minLength": 1},
        "to": {"type": "string", "minLength": 1},
        "value": _NONNEG,
        "count": {"type": "integer", "minimum": 1},
        "timestamp": _EPOCH,
    },
    "additionalProperties": False,
}

GRAPH_VIEW = {
    "type": "object",
    "required": ["kind", "nodes", "edges", "meta"],
    "properties": {
        "kind": {"enum": ["transaction_dag", "account_graph"]},
        "nodes": {"type": "array", "items": _GRAPH_NODE},
        "edges": {"type": "array", "items": _GRAPH_EDGE},
        "meta": {
            "type": "object",
            "required": ["snapshot_id"],
            "properties": {
                "snapshot_id": _SNAPSHOT_ID,
                "clustering_version": {"type": ["integer", "null"]},
                "window": {
                    "type": "object",
                    "required": ["start", "end"],
                    "properties": {"start": _EPOCH, "end": _EPOCH},
                    "additionalProperties": False,
                },
                "truncated": {"type": "boolean"},
                "origin": _HEX64,
                "direction": {"enum": ["forward", "backward", "both"]},
                "max_hops": _NONNEG,
                "granularity": {"enum": ["address", "entity"]},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

_CLUSTER_RULE = {
    "oneOf": [
        {
            "type": "object",
            "required": ["kind", "addresses"],
            "properties": {
                "kind": {"const": "merge"},
                "addresses": {"type": "array", "items": _ADDRESS, "minItems": 2},
            },
            "additionalProperties": False,
        },
        {
            "type": "object",
            "required": ["kind", "address"],
            "properties": {"kind": {"const": "isolate"}, "address": _ADDRESS},
            "additionalProperties": False,
        },
        {
            "type": "object",
            "required": ["kind", "name", "enabled"],
            "properties": {
                "kind": {"const": "heuristic"},
                "name": {"const": "multi-input"},
                "enabled": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
    ]
}

_LABEL_RECORD = {
    "type": "object",
    "required": ["target", "label", "source", "applied_at"],
    "properties": {
        "target": _ADDRESS,
        "label": {"type": "string", "minLength": 1, "maxLength": 128},
        "source": {"enum": ["user", "import"]},
        "applied_at": _EPOCH,
    },
    "additionalProperties": False,
}

_TX_SUMMARY = {
    "type": "object",
    "required": ["id", "model", "channel", "block_height", "tx_index", "timestamp"],
    "properties": {
        "id": _HEX64,
        "model": {"enum": ["utxo", "account"]},
        "channel": {"type": "string", "minLength": 1},
        "block_height": _NONNEG,
        "tx_index": _NONNEG,
        "timestamp": _EPOCH,
    },
    "additionalProperties": False,
}

_CLUSTERING_CORE = {
    "version": {"type": "integer", "minimum": 1},
    "built_at_snapshot": _SNAPSHOT_ID,
    "rules_applied": {"type": "array", "items": _CLUSTER_RULE},
    "cluster_count": _NONNEG,
    "address_count": _NONNEG,
}

SCHEMAS: dict[str, dict] = {
    "error": {
        "type": "object",
        "required": ["error", "detail"],
        "properties": {
            "error": {"type": "string", "minLength": 1},
            "detail": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "status": {
        "type": "object",
        "required": ["snapshot_id", "tips", "counts", "clustering_version", "readonly"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "tips": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["channel", "height", "hash"],
                    "properties": {
                        "channel": {"type": "string", "minLength": 1},
                        "height": _NONNEG,
                        "hash": _HEX64,
                    },
                    "additionalProperties": False,
                },
            },
            "counts": {
                "type": "object",
                "required": ["blocks", "txs", "edges", "interactions"],
                "properties": {
                    "blocks": _NONNEG,
                    "txs": _NONNEG,
                    "edges": _NONNEG,
                    "interactions": _NONNEG,
                },
                "additionalProperties": False,
            },
            "clustering_version": {"type": ["integer", "null"]},
            "readonly": {"type": "boolean"},
        },
        "additionalProperties": False,
    },
    "block": {
        "type": "object",
        "required": ["snapshot_id", "block"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "block": {
                "type": "object",
                "required": [
                    "channel", "height", "hash", "prev_hash", "timestamp", "tx_ids",
                ],
                "properties": {
                    "channel": {"type": "string", "minLength": 1},
                    "height": _NONNEG,
                    "hash": _HEX64,
                    "prev_hash": _HEX64,
                    "timestamp": _EPOCH,
                    "tx_ids": {"type": "array", "items": _HEX64},
                },
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
    "transaction": {
        "type": "object",
        "required": ["snapshot_id", "tx"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "tx": {
                "type": "object",
                "required": [
                    "id", "model", "channel", "block_height", "tx_index",
                    "timestamp", "contract", "signers", "fee", "edges",
                ],
                "properties": {
                    "id": _HEX64,
                    "model": {"enum": ["utxo", "account"]},
                    "channel": {"type": "string", "minLength": 1},
                    "block_height": _NONNEG,
                    "tx_index": _NONNEG,
                    "timestamp": _EPOCH,
                    "contract": {"type": ["string", "null"]},
                    "signers": {"type": "array", "items": _ADDRESS},
                    "fee": {"type": ["integer", "null"]},
                    "inputs": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["tx", "index"],
                            "properties": {"tx": _HEX64, "index": _NONNEG},
                            "additionalProperties": False,
                        },
                    },
                    "outputs": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["address", "value"],
                            "properties": {"address": _ADDRESS, "value": _NONNEG},
                            "additionalProperties": False,
                        },
                    },
                    "from": _ADDRESS,
                    "to": _ADDRESS,
                    "value": _NONNEG,
                    "nonce": _NONNEG,
                    "edges": {
                        "type": "object",
                        "required": ["in", "out"],
                        "properties": {
                            "in": {"type": "array", "items": _TX_EDGE},
                            "out": {"type": "array", "items": _TX_EDGE},
                        },
                        "additionalProperties": False,
                    },
                },
                "additionalProperties": False,
                "allOf": [
                    {
                        "if": {"properties": {"model": {"const": "utxo"}}},
                        "then": {"required": ["inputs", "outputs"]},
                        "else": {"required": ["from", "to", "value", "nonce"]},
                    }
                ],
            },
        },
        "additionalProperties": False,
    },
    "address_transactions": {
        "type": "object",
        "required": ["snapshot_id", "address", "txs", "next_cursor"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "address": _ADDRESS,
            "txs": {"type": "array", "items": _TX_SUMMARY},
            "next_cursor": {"type": ["string", "null"]},
        },
        "additionalProperties": False,
    },
    "graph_view": GRAPH_VIEW,
    "stats": {
        "type": "object",
        "required": ["snapshot_id", "window", "bucket", "group_by", "series"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "window": {
                "type": "object",
                "required": ["start", "end"],
                "properties": {"start": _EPOCH, "end": _EPOCH},
                "additionalProperties": False,
            },
            "bucket": {"enum": ["day", "hour"]},
            "group_by": {"enum": ["none", "channel", "contract"]},
            "series": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["key", "points"],
                    "properties": {
                        "key": {"type": "string"},
                        "points": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "required": ["start", "tx_count"],
                                "properties": {"start": _EPOCH, "tx_count": _NONNEG},
                                "additionalProperties": False,
                            },
                        },
                    },
                    "additionalProperties": False,
                },
            },
        },
        "additionalProperties": False,
    },
    "clustering": {
        "type": "object",
        "required": ["snapshot_id", "clustering"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "clustering": {
                "type": "object",
                "required": [
                    "version", "built_at_snapshot", "rules_applied",
                    "cluster_count", "address_count", "clusters",
                ],
                "properties": {
                    **_CLUSTERING_CORE,
                    "clusters": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["id", "label", "member_count", "members"],
                            "properties": {
                                "id": _ADDRESS,
                                "label": {"type": ["string", "null"]},
                                "member_count": {"type": "integer", "minimum": 1},
                                "members": {"type": "array", "items": _ADDRESS},
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
    "clustering_summary": {
        "type": "object",
        "required": ["snapshot_id", "clustering"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "clustering": {
                "type": "object",
                "required": [
                    "version", "built_at_snapshot", "rules_applied",
                    "cluster_count", "address_count",
                ],
                "properties": _CLUSTERING_CORE,
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
    "rules_pending": {
        "type": "object",
        "required": ["snapshot_id", "pending_rules"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "pending_rules": {"type": "array", "items": _CLUSTER_RULE},
        },
        "additionalProperties": False,
    },
    "label_state": {
        "type": "object",
        "required": ["snapshot_id", "target", "effective", "history"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "target": _ADDRESS,
            "effective": {"oneOf": [{"type": "null"}, _LABEL_RECORD]},
            "history": {"type": "array", "items": _LABEL_RECORD},
        },
        "additionalProperties": False,
    },
    "label_applied": {
        "type": "object",
        "required": ["snapshot_id", "applied"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "applied": _LABEL_RECORD,
        },
        "additionalProperties": False,
    },
    "label_import": {
        "type": "object",
        "required": ["snapshot_id", "applied", "rejected", "errors"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "applied": _NONNEG,
            "rejected": _NONNEG,
            "errors": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["index", "error", "detail"],
                    "properties": {
                        "index": _NONNEG,
                        "error": {"type": "string"},
                        "detail": {"type": "string"},
                    },
                    "additionalProperties": False,
                },
            },
        },
        "additionalProperties": False,
    },
    "ingest_report": {
        "type": "object",
        "required": ["snapshot_id", "report"],
        "properties": {
            "snapshot_id": _SNAPSHOT_ID,
            "report": {
                "type": "object",
                "required": [
                    "blocks_ok", "blocks_rejected", "blocks_duplicate",
                    "txs_ok", "errors",
                ],
                "properties": {
                    "blocks_ok": _NONNEG,
                    "blocks_rejected": _NONNEG,
                    "blocks_duplicate": _NONNEG,
                    "txs_ok": _NONNEG,
                    "errors": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["height", "kind", "detail"],
                            "properties": {
                                "height": {"type": ["integer", "null"]},
                                "kind": {"type": "string"},
                                "detail": {"type": "string"},
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
}
