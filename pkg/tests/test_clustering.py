import itertools
import random

import pytest

from ledgerlens import (
    ClusteringService,
    ClusterRule,
    InvalidRule,
    NotFound,
    RuleKind,
    UnknownClusteringVersion,
    build_partition,
    co_spend_groups,
)

from conftest import chain, dump_bytes, ingest_dump


def merge(*addrs):
    return ClusterRule(RuleKind.MERGE, tuple(addrs))


def isolate(addr):
    return ClusterRule(RuleKind.ISOLATE, (addr,))


def toggle(enabled):
    return ClusterRule(RuleKind.HEURISTIC, heuristic="multi-input", enabled=enabled)


def brute_force(groups, merges, isolated, known):
    """Transitive closure the slow way: repeatedly merge overlapping sets."""
    sets = [{a} for a in known]
    pools = [set(g) - isolated for g in groups]
    pools += [set(m) - isolated for m in merges]
    changed = True
    while changed:
        changed = False
        for pool in pools:
            touching = [s for s in sets if s & pool]
            if len(touching) > 1:
                fused = set().union(*touching)
                sets = [s for s in sets if not (s & pool)] + [fused]
                changed = True
    out = {}
    for s in sets:
        cid = min(s)
        for a in s:
            out[a] = cid
    return out


class TestRuleValidation:
    def test_merge_needs_two(self):
        with pytest.raises(InvalidRule):
            merge("a1")
        with pytest.raises(InvalidRule):
            merge("a1", "a1")

    def test_isolate_takes_one(self):
        with pytest.raises(InvalidRule):
            ClusterRule(RuleKind.ISOLATE, ("a1", "a2"))
        with pytest.raises(InvalidRule):
            ClusterRule(RuleKind.ISOLATE, ())

    def test_heuristic_name_checked(self):
        with pytest.raises(InvalidRule):
            ClusterRule(RuleKind.HEURISTIC, heuristic="change-address", enabled=True)
        with pytest.raises(InvalidRule):
            ClusterRule(RuleKind.HEURISTIC, heuristic="multi-input", enabled=None)

    def test_from_dict_round_trip(self):
        records = [
            {"kind": "merge", "addresses": ["a1", "a2", "a3"]},
            {"kind": "isolate", "address": "a9"},
            {"kind": "heuristic", "name": "multi-input", "enabled": False},
        ]
        for record in records:
            assert ClusterRule.from_dict(record).to_dict() == record

    def test_from_dict_rejects_unknown(self):
        with pytest.raises(InvalidRule):
            ClusterRule.from_dict({"kind": "split", "address": "a1"})
        with pytest.raises(InvalidRule):
            ClusterRule.from_dict({"kind": "isolate", "address": "a1", "why": "x"})
        with pytest.raises(InvalidRule):
            ClusterRule.from_dict({"kind": "merge", "addresses": "a1,a2"})
        with pytest.raises(InvalidRule):
            ClusterRule.from_dict("merge a1 a2")

    def test_unknown_address_in_rule(self):
        with pytest.raises(InvalidRule):
            build_partition([], [merge("a1", "ghost")], ["a1", "a2"])


class TestPartition:
    KNOWN = ["a1", "a2", "a3", "a4", "a5", "a6"]

    def test_groups_close_transitively(self):
        part = build_partition([("a1", "a2"), ("a2", "a3")], [], self.KNOWN)
        assert part["a1"] == part["a2"] == part["a3"] == "a1"
        assert part["a4"] == "a4"

    def test_merge_rule_joins(self):
        part = build_partition([], [merge("a4", "a5")], self.KNOWN)
        assert part["a4"] == part["a5"] == "a4"

    def test_isolate_wins_over_heuristic(self):
        part = build_partition([("a1", "a2", "a3")], [isolate("a2")], self.KNOWN)
        assert part["a2"] == "a2"
        assert part["a1"] == part["a3"] == "a1"

    def test_isolate_wins_over_merge(self):
        part = build_partition([], [merge("a1", "a2", "a3"), isolate("a1")],
                               self.KNOWN)
        assert part["a1"] == "a1"
        assert part["a2"] == part["a3"] == "a2"

    def test_heuristic_toggle_off(self):
        groups = [("a1", "a2"), ("a3", "a4")]
        part = build_partition(groups, [toggle(False), merge("a5", "a6")],
                               self.KNOWN)
        assert part["a1"] == "a1" and part["a2"] == "a2"
        assert part["a5"] == part["a6"]

    def test_conflicting_toggles_mean_off(self):
        groups = [("a1", "a2")]
        for rules in itertools.permutations([toggle(True), toggle(False)]):
            part = build_partition(groups, rules, self.KNOWN)
            assert part["a1"] == "a1"

    def test_rule_order_is_irrelevant(self):
        groups = [("a1", "a2"), ("a4", "a5")]
        rules = [merge("a2", "a3"), isolate("a5"), toggle(True)]
        expected = build_partition(groups, rules, self.KNOWN)
        for perm in itertools.permutations(rules):
            assert build_partition(groups, perm, self.KNOWN) == expected

    def test_group_order_is_irrelevant(self):
        groups = [("a1", "a2"), ("a2", "a3"), ("a5", "a6")]
        expected = build_partition(groups, [], self.KNOWN)
        for perm in itertools.permutations(groups):
            assert build_partition(perm, [], self.KNOWN) == expected

    def test_matches_brute_force_random(self):
        rng = random.Random(7)
        known = [f"a{i:02d}" for i in range(18)]
        for trial in range(30):
            groups = [
                tuple(rng.sample(known, rng.randint(2, 4)))
                for _ in range(rng.randint(0, 8))
            ]
            merge_sets = [
                tuple(rng.sample(known, rng.randint(2, 3)))
                for _ in range(rng.randint(0, 3))
            ]
            isolated = set(rng.sample(known, rng.randint(0, 2)))
            rules = [merge(*m) for m in merge_sets] + [isolate(a) for a in isolated]
            got = build_partition(groups, rules, known)
            want = brute_force(groups, merge_sets, isolated, known)
            assert got == want, f"trial {trial}"

    def test_every_known_address_mapped(self):
        part = build_partition([("a1", "a2")], [], self.KNOWN)
        assert sorted(part) == self.KNOWN


class TestCoSpendGroups:
    def test_fan_fixture_groups(self, fig1a_store):
        groups = co_spend_groups(fig1a_store)
        assert groups == [("a1", "a2")]

    def test_single_input_spends_excluded(self):
        m = {"model": "utxo", "inputs": [],
             "outputs": [{"address": "s1", "value": 9}], "signers": ["s1"]}
        from conftest import tx_id_of
        sp = {"model": "utxo", "inputs": [{"tx": tx_id_of(m), "index": 0}],
              "outputs": [{"address": "s2", "value": 9}], "signers": ["s1"]}
        store = ingest_dump(dump_bytes(chain([[m], [sp]])))
        assert co_spend_groups(store) == []

    def test_same_owner_two_inputs_excluded(self):
        from conftest import tx_id_of
        m = {"model": "utxo", "inputs": [],
             "outputs": [{"address": "s1", "value": 4}, {"address": "s1", "value": 6}],
             "signers": ["s1"]}
        sp = {"model": "utxo",
              "inputs": [{"tx": tx_id_of(m), "index": 0}, {"tx": tx_id_of(m), "index": 1}],
              "outputs": [{"address": "s2", "value": 10}], "signers": ["s1"]}
        store = ingest_dump(dump_bytes(chain([[m], [sp]])))
        assert co_spend_groups(store) == []

    def test_account_txs_contribute_nothing(self):
        from ledgerlens import GenModel, GenParams, generate
        ledger = generate(GenParams(seed=3, model=GenModel.ACCOUNT, channels=1,
                                    blocks=5, txs_per_block=10, addresses=20,
                                    multi_input_rate=0.5))
        store = ingest_dump(ledger.dump)
        assert store.snapshot().counts.txs == 50
        assert co_spend_groups(store) == []


class TestService:
    def test_versions_are_immutable_history(self, fig1a_store):
        service = ClusteringService()
        v1 = service.rebuild(fig1a_store, [])
        v2 = service.rebuild(fig1a_store, [isolate("a1")])
        assert (v1.version, v2.version) == (1, 2)
        assert service.get(1).cluster_of("a1") == "a1"
        assert service.get(1).cluster_of("a2") == "a1"
        assert service.get(2).cluster_of("a2") == "a2"
        assert service.get() is v2
        assert service.latest_version() == 2

    def test_missing_versions(self, fig1a_store):
        service = ClusteringService()
        with pytest.raises(UnknownClusteringVersion):
            service.get()
        service.rebuild(fig1a_store, [])
        for bad in (0, 2, -1, "1"):
            with pytest.raises(UnknownClusteringVersion):
                service.get(bad)

    def test_members_and_ids(self, fig1a_store):
        view = ClusteringService().rebuild(fig1a_store, [])
        assert view.members("a1") == ("a1", "a2")
        with pytest.raises(NotFound):
            view.members("a2")
        assert view.cluster_ids() == ["a1", "a3", "a4", "a5"]

    def test_unseen_address_is_singleton(self, fig1a_store):
        view = ClusteringService().rebuild(fig1a_store, [])
        assert view.cluster_of("later-arrival") == "later-arrival"

    def test_rebuild_pins_snapshot(self, fig1a):
        store = ingest_dump(dump_bytes(fig1a.records[:2]))
        service = ClusteringService()
        view = service.rebuild(store, [])
        ingest_dump(fig1a.dump, store)
        assert view.snapshot_id == 1
        assert "a4" not in view.partition
        fresh = service.rebuild(store, [])
        assert "a4" in fresh.partition
