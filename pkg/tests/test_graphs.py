import random

import pytest

from ledgerlens import (
    BucketWidth,
    ClusteringService,
    EmptyWindow,
    Granularity,
    GroupBy,
    UnknownClusteringVersion,
    account_graph,
    stats,
)

from conftest import BASE_TS, chain, dump_bytes, ingest_dump

DAY = 86400
HOUR = 3600


def transfer(src, dst, value, nonce):
    return {"model": "account", "from": src, "to": dst, "value": value,
            "nonce": nonce}


def edges_as_tuples(graph):
    return [(e.from_id, e.to_id, e.count, e.total_value) for e in graph.edges]


def node_map(graph):
    return {n.id: n.metrics for n in graph.nodes}


class TestAddressGraph:
    def test_repeat_payment_folds_into_one_edge(self):
        records = chain([[transfer("acc-a", "acc-b", 5, 0)],
                         [transfer("acc-a", "acc-b", 3, 1)]])
        store = ingest_dump(dump_bytes(records))
        graph = account_graph(store, BASE_TS, BASE_TS + DAY, Granularity.ADDRESS)
        assert edges_as_tuples(graph) == [("acc-a", "acc-b", 2, 8)]
        metrics = node_map(graph)
        assert metrics["acc-a"].total_out_value == 8
        assert metrics["acc-b"].total_in_value == 8
        assert metrics["acc-a"].tx_count == 2

    def test_fan_fixture_edges(self, fig1a_store, fig1a):
        graph = account_graph(fig1a_store, BASE_TS, BASE_TS + DAY,
                              Granularity.ADDRESS)
        assert edges_as_tuples(graph) == [
            ("a1", "a1", 1, 10),  # mint credits its own outputs
            ("a1", "a3", 1, 10),
            ("a2", "a2", 1, 5),
            ("a2", "a3", 1, 4),
            ("a3", "a4", 1, 13),
            ("a4", "a5", 1, 12),
        ]
        metrics = node_map(graph)
        assert metrics["a1"].total_in_value == 10
        assert metrics["a1"].total_out_value == 20
        assert metrics["a1"].tx_count == 2
        assert metrics["a5"].total_in_value == 12
        assert metrics["a5"].total_out_value == 0
        assert all(m.member_count == 1 for m in metrics.values())
        assert all(m.intra_value == 0 for m in metrics.values())

    def test_window_excludes_outside_interactions(self, fig1a_store):
        graph = account_graph(fig1a_store, BASE_TS + 600, BASE_TS + 1200,
                              Granularity.ADDRESS)
        assert edges_as_tuples(graph) == [
            ("a1", "a3", 1, 10), ("a2", "a3", 1, 4),
        ]
        assert sorted(node_map(graph)) == ["a1", "a2", "a3"]

    def test_empty_window_rejected(self, fig1a_store):
        with pytest.raises(EmptyWindow):
            account_graph(fig1a_store, BASE_TS, BASE_TS, Granularity.ADDRESS)
        with pytest.raises(EmptyWindow):
            account_graph(fig1a_store, BASE_TS + 10, BASE_TS, Granularity.ADDRESS)

    def test_quiet_window_is_empty_graph(self, fig1a_store):
        graph = account_graph(fig1a_store, BASE_TS + DAY, BASE_TS + 2 * DAY,
                              Granularity.ADDRESS)
        assert graph.nodes == () and graph.edges == ()


class TestEntityGraph:
    @pytest.fixture()
    def clustered(self, fig1a_store):
        view = ClusteringService().rebuild(fig1a_store, [])
        return fig1a_store, view

    def test_intra_cluster_folds_into_node(self, clustered):
        store, view = clustered
        graph = account_graph(store, BASE_TS, BASE_TS + DAY, Granularity.ENTITY,
                              view=view)
        assert edges_as_tuples(graph) == [
            ("a1", "a3", 2, 14),
            ("a3", "a4", 1, 13),
            ("a4", "a5", 1, 12),
        ]
        metrics = node_map(graph)
        assert metrics["a1"].intra_value == 15  # both mints stay inside
        assert metrics["a1"].total_in_value == 15
        assert metrics["a1"].total_out_value == 29
        assert metrics["a1"].member_count == 2
        assert metrics["a1"].tx_count == 3
        assert metrics["a3"].member_count == 1

    def test_value_conserved_across_granularity(self, clustered):
        store, view = clustered
        address = account_graph(store, BASE_TS, BASE_TS + DAY,
                                Granularity.ADDRESS)
        entity = account_graph(store, BASE_TS, BASE_TS + DAY,
                               Granularity.ENTITY, view=view)
        address_total = sum(e.total_value for e in address.edges)
        entity_total = sum(e.total_value for e in entity.edges)
        intra_total = sum(n.metrics.intra_value for n in entity.nodes)
        assert entity_total + intra_total == address_total
        assert sum(e.count for e in address.edges) == (
            sum(e.count for e in entity.edges)
            + 2  # the two folded mint self-loops
        )

    def test_entity_requires_view(self, fig1a_store):
        with pytest.raises(UnknownClusteringVersion):
            account_graph(fig1a_store, BASE_TS, BASE_TS + DAY,
                          Granularity.ENTITY)

    def test_version_echoed(self, clustered):
        store, view = clustered
        graph = account_graph(store, BASE_TS, BASE_TS + DAY,
                              Granularity.ENTITY, view=view)
        assert graph.clustering_version == view.version
        address = account_graph(store, BASE_TS, BASE_TS + DAY,
                                Granularity.ADDRESS)
        assert address.clustering_version is None

    def test_stale_view_leaves_new_addresses_alone(self, fig1a):
        store = ingest_dump(dump_bytes(fig1a.records[:2]))
        view = ClusteringService().rebuild(store, [])
        ingest_dump(fig1a.dump, store)
        graph = account_graph(store, BASE_TS, BASE_TS + DAY,
                              Granularity.ENTITY, view=view)
        ids = {n.id for n in graph.nodes}
        assert "a4" in ids and "a5" in ids  # singletons under their own id

    def test_random_windows_conserve(self, medium_store):
        view = ClusteringService().rebuild(medium_store, [])
        lo = min(s.tx.timestamp for s in medium_store.all_txs())
        hi = max(s.tx.timestamp for s in medium_store.all_txs()) + 1
        rng = random.Random(5)
        for _ in range(12):
            a = rng.randrange(lo - HOUR, hi)
            b = rng.randrange(a + 1, hi + HOUR)
            address = account_graph(medium_store, a, b, Granularity.ADDRESS)
            entity = account_graph(medium_store, a, b, Granularity.ENTITY,
                                   view=view)
            assert (
                sum(e.total_value for e in entity.edges)
                + sum(n.metrics.intra_value for n in entity.nodes)
                == sum(e.total_value for e in address.edges)
            )

    def test_labels_attached(self, clustered):
        store, view = clustered
        names = {"a1": "treasury"}
        graph = account_graph(store, BASE_TS, BASE_TS + DAY, Granularity.ENTITY,
                              view=view, label_of=names.get)
        by_id = {n.id: n.label for n in graph.nodes}
        assert by_id["a1"] == "treasury"
        assert by_id["a3"] is None


class TestStats:
    @pytest.fixture()
    def hourly_store(self):
        groups = [
            [transfer("s1", "s2", 1, 0)],                         # BASE
            [transfer("s1", "s2", 1, 1), transfer("s2", "s1", 1, 0)],  # +1h
            [],                                                   # +2h
            [transfer("s1", "s2", 1, 2)],                         # +3h
        ]
        return ingest_dump(dump_bytes(chain(groups, step=HOUR)))

    def test_hour_buckets_zero_filled(self, hourly_store):
        got = stats(hourly_store, BASE_TS, BASE_TS + 4 * HOUR, BucketWidth.HOUR)
        assert len(got.series) == 1 and got.series[0].key == ""
        assert [(p.start - BASE_TS, p.tx_count) for p in got.series[0].points] == [
            (0, 1), (HOUR, 2), (2 * HOUR, 0), (3 * HOUR, 1),
        ]

    def test_day_bucket_rolls_up(self, hourly_store):
        got = stats(hourly_store, BASE_TS, BASE_TS + DAY, BucketWidth.DAY)
        assert [(p.start, p.tx_count) for p in got.series[0].points] == [
            (BASE_TS, 4),
        ]

    def test_window_is_half_open(self, hourly_store):
        # end boundary excluded: the +3h tx sits exactly at end
        got = stats(hourly_store, BASE_TS, BASE_TS + 3 * HOUR, BucketWidth.HOUR)
        assert sum(p.tx_count for p in got.series[0].points) == 3
        # start boundary included, one past it excluded
        opened = stats(hourly_store, BASE_TS + 1, BASE_TS + 4 * HOUR,
                       BucketWidth.HOUR)
        assert sum(p.tx_count for p in opened.series[0].points) == 3
        exact = stats(hourly_store, BASE_TS, BASE_TS + 4 * HOUR, BucketWidth.HOUR)
        assert sum(p.tx_count for p in exact.series[0].points) == 4

    def test_first_bucket_floors_to_boundary(self, hourly_store):
        got = stats(hourly_store, BASE_TS + 1800, BASE_TS + 2 * HOUR,
                    BucketWidth.HOUR)
        starts = [p.start for p in got.series[0].points]
        assert starts == [BASE_TS, BASE_TS + HOUR]
        # only txs inside the requested window are counted, even though the
        # first bucket starts before it
        assert [p.tx_count for p in got.series[0].points] == [0, 2]

    def test_utc_alignment(self, hourly_store):
        got = stats(hourly_store, BASE_TS + 1, BASE_TS + DAY, BucketWidth.DAY)
        assert got.series[0].points[0].start % DAY == 0

    def test_ungrouped_always_one_series(self, hourly_store):
        got = stats(hourly_store, BASE_TS + 10 * DAY, BASE_TS + 11 * DAY,
                    BucketWidth.DAY)
        assert len(got.series) == 1
        assert all(p.tx_count == 0 for p in got.series[0].points)

    def test_group_by_channel_is_additive(self, mixed_store):
        lo = min(s.tx.timestamp for s in mixed_store.all_txs())
        hi = max(s.tx.timestamp for s in mixed_store.all_txs()) + 1
        plain = stats(mixed_store, lo, hi, BucketWidth.HOUR)
        grouped = stats(mixed_store, lo, hi, BucketWidth.HOUR, GroupBy.CHANNEL)
        assert [s.key for s in grouped.series] == ["ch-00", "ch-01"]
        for i, point in enumerate(plain.series[0].points):
            assert point.tx_count == sum(
                s.points[i].tx_count for s in grouped.series
            )

    def test_group_by_contract_blank_key(self, mixed_store):
        lo = min(s.tx.timestamp for s in mixed_store.all_txs())
        hi = max(s.tx.timestamp for s in mixed_store.all_txs()) + 1
        grouped = stats(mixed_store, lo, hi, BucketWidth.DAY, GroupBy.CONTRACT)
        keys = [s.key for s in grouped.series]
        assert "" in keys  # txs without a contract
        assert keys == sorted(keys)
        total = sum(p.tx_count for s in grouped.series for p in s.points)
        assert total == mixed_store.snapshot().counts.txs

    def test_groups_without_activity_omitted(self, hourly_store):
        got = stats(hourly_store, BASE_TS, BASE_TS + HOUR, BucketWidth.HOUR,
                    GroupBy.CONTRACT)
        assert [s.key for s in got.series] == [""]

    def test_empty_window_rejected(self, hourly_store):
        with pytest.raises(EmptyWindow):
            stats(hourly_store, BASE_TS, BASE_TS, BucketWidth.HOUR)

    def test_snapshot_bound(self, fig1a):
        store = ingest_dump(dump_bytes(fig1a.records[:1]))
        old = store.snapshot()
        ingest_dump(fig1a.dump, store)
        frozen = stats(store, BASE_TS, BASE_TS + DAY, BucketWidth.DAY, snap=old)
        assert sum(p.tx_count for p in frozen.series[0].points) == 2
        live = stats(store, BASE_TS, BASE_TS + DAY, BucketWidth.DAY)
        assert sum(p.tx_count for p in live.series[0].points) == 5
