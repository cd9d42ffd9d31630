"""Input-to-output linking and account-interaction derivation.

UTXO value attribution uses a proportional split: each output's value is
divided between the distinct input owners in proportion to their input
contribution, rounded down, with the remainder assigned to the
lexicographically smallest owner so per-output sums stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .model import ParsedTransaction, TxEdge, TxModel


@dataclass(frozen=True, slots=True)
class Interaction:
    """One directed value move between two addresses (Fig-style account edge)."""

    from_addr: str
    to_addr: str
    value: int
    timestamp: int
    tx: str
    channel: str
    contract: str | None = None


@dataclass(frozen=True, slots=True)
class DanglingInput:
    """An input whose referenced output is not in the store. Kept as data, not an error."""

    target_tx: str
    input_index: int
    missing_source: str
    missing_index: int


@dataclass(frozen=True, slots=True)
class DoubleSpend:
    """An input referencing an output that an earlier edge already consumed."""

    target_tx: str
    input_index: int
    source_tx: str
    output_index: int


@dataclass(frozen=True, slots=True)
class ResolvedOutput:
    address: str
    value: int
    already_spent: bool


@dataclass(slots=True)
class LinkResult:
    edges: list[TxEdge]
    dangling: list[DanglingInput]
    double_spends: list[DoubleSpend]


# Maps (source tx id, output index) to the referenced output, or None when
# the source is unknown / the index is out of range / the channel differs.
OutputResolver = Callable[[str, int], ResolvedOutput | None]


def link_inputs(tx: ParsedTransaction, resolver: OutputResolver) -> LinkResult:
    """Resolve a UTXO transaction's inputs against previously seen outputs.

    Each resolvable input becomes a TxEdge carrying the referenced output's
    value and owner. Unresolvable inputs become DanglingInputs. An input whose
    output is already consumed (including by an earlier input of this same tx)
    is reported as a DoubleSpend and produces no edge; the first edge wins.
    """
    if tx.model is not TxModel.UTXO:
        raise ValueError("link_inputs applies to UTXO transactions only")
    result = LinkResult(edges=[], dangling=[], double_spends=[])
    spent_here: set[tuple[str, int]] = set()
    for index, ref in enumerate(tx.inputs):
        key = (ref.source_tx, ref.output_index)
        resolved = resolver(ref.source_tx, ref.output_index)
        if resolved is None:
            result.dangling.append(
                DanglingInput(tx.id, index, ref.source_tx, ref.output_index)
            )
            continue
        if resolved.already_spent or key in spent_here:
            result.double_spends.append(
                DoubleSpend(tx.id, index, ref.source_tx, ref.output_index)
            )
            continue
        spent_here.add(key)
        result.edges.append(
            TxEdge(
                source_tx=ref.source_tx,
                output_index=ref.output_index,
                target_tx=tx.id,
                input_index=index,
                value=resolved.value,
                owner=resolved.address,
                timestamp=tx.timestamp,
            )
        )
    return result


def owner_contributions(edges: list[TxEdge]) -> dict[str, int]:
    """Total input value per distinct owner address."""
    contrib: dict[str, int] = {}
    for edge in edges:
        contrib[edge.owner] = contrib.get(edge.owner, 0) + edge.value
    return contrib


def derive_interactions(tx: ParsedTransaction, edges: list[TxEdge]) -> list[Interaction]:
    """Derive address-level interactions for one transaction.

    Account model: exactly one interaction. UTXO model: one interaction per
    (distinct input owner, output) pair under the proportional split rule.
    Transactions with no resolved input value (mints included) attribute each
    output to its own address as a self-source.
    """
    if tx.model is TxModel.ACCOUNT:
        assert tx.transfer is not None
        t = tx.transfer
        return [
            Interaction(t.from_addr, t.to_addr, t.value, tx.timestamp, tx.id, tx.channel, tx.contract)
        ]

    contrib = owner_contributions(edges)
    total_in = sum(contrib.values())
    interactions: list[Interaction] = []
    if total_in == 0:
        # Mint (or fully unresolved) transaction: outputs are self-sourced.
        for out in tx.outputs:
            interactions.append(
                Interaction(out.address, out.address, out.value, tx.timestamp, tx.id, tx.channel, tx.contract)
            )
        return interactions

    owners = sorted(contrib)
    for out in tx.outputs:
        shares = {a: out.value * contrib[a] // total_in for a in owners}
        remainder = out.value - sum(shares.values())
        shares[owners[0]] += remainder
        for a in owners:
            interactions.append(
                Interaction(a, out.address, shares[a], tx.timestamp, tx.id, tx.channel, tx.contract)
            )
    return interactions


def compute_fee(tx: ParsedTransaction, edges: list[TxEdge]) -> int | None:
    """Resolved input total minus output total for spending UTXO txs.

    Mints create value rather than spend it, so their fee is 0 by definition.
    Account transactions carry no fee information. Can go negative only when
    inputs are unresolved (partial dumps).
    """
    if tx.model is not TxModel.UTXO:
        return None
    if tx.is_mint:
        return 0
    total_in = sum(e.value for e in edges)
    total_out = sum(o.value for o in tx.outputs)
    return total_in - total_out
