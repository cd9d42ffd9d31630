"""Ledger analytics toolkit: parse multi-channel block dumps, link value
flows into a transaction DAG, cluster addresses into entities, and serve the
results over a REST API."""

from .aggregate import (
    DanglingInput,
    DoubleSpend,
    Interaction,
    LinkResult,
    ResolvedOutput,
    compute_fee,
    derive_interactions,
    link_inputs,
)
from .clustering import (
    ClusteringService,
    ClusterRule,
    ClusterView,
    RuleKind,
    build_partition,
    co_spend_groups,
)
from .errors import (
    ChainMismatch,
    DuplicateTxId,
    EmptyWindow,
    HopLimitExceeded,
    InvalidParams,
    InvalidRule,
    LedgerError,
    MalformedRecord,
    ModelViolation,
    NotFound,
    ReadOnlyStore,
    StoreVersionError,
    TipConflict,
    UnknownClusteringVersion,
    UnknownTarget,
)
from .generate import GeneratedLedger, GenModel, GenParams, Scenario, generate
from .graphs import (
    AccountGraph,
    BucketWidth,
    Granularity,
    GroupBy,
    account_graph,
    stats,
)
from .labels import (
    MAX_LABEL_LEN,
    ImportOutcome,
    LabelRecord,
    LabelService,
    LabelSource,
)
from .model import (
    InputRef,
    Output,
    ParsedBlock,
    ParsedTransaction,
    Transfer,
    TxEdge,
    TxModel,
    derive_tx_id,
    format_timestamp,
    parse_timestamp,
)
from .parser import ParseMode, ParseReport, parse_block, parse_stream
from .store import LedgerStore, StoreSnapshot
from .trace import Direction, TraceNode, TraceSubgraph, trace

__version__ = "0.1.0"
