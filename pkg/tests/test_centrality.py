import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from portnet import _kernels
from portnet._kernels import _pykernels
from portnet.centrality import (
    CentralityParams,
    DegenerateCentralityError,
    PageRankNonConvergence,
    aggregate,
    betweenness,
    closeness,
    compute_centralities,
    degrees,
    pagerank,
    read_centrality_table,
    write_centrality_table,
    zscore,
)
from portnet.network import PortsNetwork

import oracles


def star_out(n_leaves=4):
    return PortsNetwork({(0, i): 1 for i in range(1, n_leaves + 1)})


def cycle(n):
    return PortsNetwork({(i, (i + 1) % n): 1 for i in range(n)})


def complete(n):
    return PortsNetwork({(u, v): 1 for u in range(n) for v in range(n) if u != v})


class TestDegrees:
    def test_out_star(self):
        di, do = degrees(star_out(4))
        assert do[0] == 4 and di[0] == 0
        assert (di[1:] == 1).all() and (do[1:] == 0).all()

    def test_cycle(self):
        di, do = degrees(cycle(3))
        assert (di == 1).all() and (do == 1).all()

    def test_matches_adjacency_matrix(self):
        rng = np.random.default_rng(0)
        net = PortsNetwork(oracles.random_digraph(rng, 20, 0.25))
        adj = oracles.adjacency(net)
        di, do = degrees(net)
        assert (di == adj.sum(axis=0)).all()
        assert (do == adj.sum(axis=1)).all()


class TestPageRank:
    def test_cycle_is_uniform(self):
        for weighted in (False, True):
            pr = pagerank(cycle(6), weighted=weighted)
            assert pr == pytest.approx(np.full(6, 1 / 6), abs=1e-12)

    def test_equal_weights_match_unweighted(self):
        edges = {(u, v): 3 for u in range(5) for v in range(5)
                 if u != v and (u + v) % 3 != 1}
        edges.update({(i, (i + 1) % 5): 3 for i in range(5)})
        net = PortsNetwork(edges)
        assert pagerank(net, weighted=True) == pytest.approx(
            pagerank(net, weighted=False), abs=1e-10
        )

    def test_five_node_fixture_against_dense_oracle(self):
        edges = {(0, 1): 1, (1, 2): 4, (2, 0): 2, (2, 3): 7, (3, 4): 1,
                 (4, 0): 3, (1, 4): 2, (4, 2): 5}
        net = PortsNetwork(edges)
        for weighted in (False, True):
            got = pagerank(net, weighted=weighted, tol=1e-14)
            want = oracles.dense_pagerank(oracles.weight_matrix(net), 0.85, weighted)
            assert got == pytest.approx(want, abs=1e-10)

    def test_sums_to_one(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            net = PortsNetwork(oracles.random_scc_digraph(rng, 12, 20))
            for weighted in (False, True):
                pr = pagerank(net, weighted=weighted)
                assert pr.sum() == pytest.approx(1.0, abs=1e-8)
                assert (pr >= 0).all()

    def test_relabeling_equivariance(self):
        rng = np.random.default_rng(23)
        edges = oracles.random_scc_digraph(rng, 10, 15)
        net = PortsNetwork(edges)
        perm = rng.permutation(10)
        relabeled = PortsNetwork({(int(perm[u]), int(perm[v])): w
                                  for (u, v), w in edges.items()})
        pr, prl = pagerank(net), pagerank(relabeled)
        for old in range(10):
            new_pos = int(np.searchsorted(relabeled.nodes, perm[old]))
            assert prl[new_pos] == pytest.approx(pr[old], abs=1e-12)

    def test_nonconvergence_carries_last_iterate(self):
        edges = {(0, 1): 1, (1, 2): 4, (2, 0): 2, (2, 3): 7, (3, 4): 1, (4, 0): 3}
        with pytest.raises(PageRankNonConvergence) as exc:
            pagerank(PortsNetwork(edges), tol=1e-30, max_iter=3)
        assert exc.value.last.shape == (5,)
        assert exc.value.last.sum() == pytest.approx(1.0, abs=1e-9)

    def test_dangling_handled_on_non_scc(self):
        net = PortsNetwork({(0, 1): 1, (1, 2): 1})  # 2 is dangling
        pr = pagerank(net)
        assert pr.sum() == pytest.approx(1.0, abs=1e-10)

    def test_raw_log_drops_single_trip_edges(self):
        # with ln(w), the weight-1 edge contributes nothing
        net = PortsNetwork({(0, 1): 1, (0, 2): 5, (1, 0): 2, (2, 0): 2})
        pr_log1p = pagerank(net, weighted=True, log1p=True)
        pr_raw = pagerank(net, weighted=True, log1p=False)
        assert not np.allclose(pr_log1p, pr_raw)


class TestBetweenness:
    def test_directed_path(self):
        net = PortsNetwork({(0, 1): 1, (1, 2): 1})
        assert betweenness(net) == pytest.approx([0.0, 1.0, 0.0])

    def test_complete_graph_zero(self):
        assert betweenness(complete(5)) == pytest.approx(np.zeros(5))

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            n = int(rng.integers(3, 13))
            edges = oracles.random_digraph(rng, n, 0.3)
            if not edges:
                continue
            net = PortsNetwork(edges)
            got = betweenness(net)
            want = oracles.brute_betweenness(oracles.adjacency(net))
            assert got == pytest.approx(want, abs=1e-9)

    def test_parallel_matches_serial(self):
        rng = np.random.default_rng(37)
        net = PortsNetwork(oracles.random_scc_digraph(rng, 120, 400))
        serial = betweenness(net, threads=1, chunk_size=16)
        parallel = betweenness(net, threads=2, chunk_size=16)
        assert parallel == pytest.approx(serial, abs=1e-9)

    def test_weight_invariance(self):
        edges = {(0, 1): 1, (1, 2): 1, (2, 0): 1, (0, 2): 1}
        heavy = {e: w * 17 for e, w in edges.items()}
        assert betweenness(PortsNetwork(edges)) == pytest.approx(
            betweenness(PortsNetwork(heavy))
        )


class TestCloseness:
    def test_complete_graph(self):
        for n in (3, 5, 8):
            cc, flagged = closeness(complete(n))
            assert not flagged.any()
            assert cc == pytest.approx(np.full(n, n / (n - 1)))

    def test_directed_three_cycle(self):
        cc, _ = closeness(cycle(3))
        assert cc == pytest.approx(np.ones(3))

    def test_asymmetric_fixture_against_oracle(self):
        net = PortsNetwork({(0, 1): 1, (1, 2): 1, (2, 3): 1, (3, 0): 1, (0, 2): 1})
        cc, flagged = closeness(net)
        want = oracles.brute_closeness_in(oracles.adjacency(net))
        assert not flagged.any()
        assert cc == pytest.approx(want, abs=1e-12)

    def test_unreachable_node_flagged(self):
        # 2 is a sink: every node reaches it, but it reaches nobody, so the
        # incoming-distance sums for 0 and 1 are undefined
        net = PortsNetwork({(0, 1): 1, (1, 0): 1, (0, 2): 1})
        cc, flagged = closeness(net)
        assert flagged[0] and flagged[1] and not flagged[2]
        assert np.isnan(cc[0]) and np.isnan(cc[1])
        assert cc[2] == pytest.approx(3 / 3)

    def test_direction_flag(self):
        net = PortsNetwork({(0, 1): 1, (1, 2): 1, (2, 0): 1, (0, 2): 1})
        cc_in, _ = closeness(net, "in")
        cc_out, _ = closeness(net, "out")
        dist = oracles.floyd_warshall(oracles.adjacency(net))
        assert cc_in == pytest.approx(3 / dist.sum(axis=0))
        assert cc_out == pytest.approx(3 / dist.sum(axis=1))


class TestZscore:
    def test_two_values(self):
        z = zscore(np.array([2.0, 4.0]))
        assert z == pytest.approx([-0.7071067811865475, 0.7071067811865475])

    def test_idempotent_on_standardized_input(self):
        rng = np.random.default_rng(2)
        z = zscore(rng.normal(size=50))
        assert zscore(z) == pytest.approx(z, abs=1e-12)

    def test_constant_is_error(self):
        with pytest.raises(DegenerateCentralityError):
            zscore(np.full(10, 3.3))

    def test_too_few_values_is_error(self):
        with pytest.raises(DegenerateCentralityError):
            zscore(np.array([1.0]))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=60).filter(
        lambda v: max(v) - min(v) > 1e-6))
    @settings(max_examples=100, deadline=None)
    def test_mean_zero_sd_one(self, values):
        z = zscore(np.array(values))
        assert abs(z.mean()) < 1e-9
        assert abs(z.std(ddof=1) - 1.0) < 1e-9


class TestAggregate:
    def _zmap(self, n, rng):
        return {c: zscore(rng.normal(size=n)) for c in
                ("DI", "DO", "PR", "wPR", "BC", "CC")}

    def test_equal_scores_pass_through(self):
        n = 6
        v = zscore(np.arange(n, dtype=float))
        a, _ = aggregate({c: v for c in ("DI", "DO", "PR", "wPR", "BC", "CC")},
                         np.arange(n))
        assert a == pytest.approx(v)

    def test_mismatched_port_sets_error(self):
        zmap = self._zmap(5, np.random.default_rng(0))
        zmap["CC"] = zmap["CC"][:4]
        with pytest.raises(ValueError):
            aggregate(zmap, np.arange(5))

    def test_mean_is_zero(self):
        a, _ = aggregate(self._zmap(30, np.random.default_rng(4)), np.arange(30))
        assert abs(a.mean()) < 1e-9

    def test_rank_ties_broken_by_port_id(self):
        z = np.array([1.0, 1.0, -2.0])
        zmap = {c: z for c in ("DI", "DO", "PR", "wPR", "BC", "CC")}
        _, rank = aggregate(zmap, np.array([20, 10, 5]))
        assert list(rank) == [2, 1, 3]  # port 10 beats port 20 on the tie

    def test_hub_graph_hub_has_max_aggregate(self):
        # hub 0 bidirectionally connected to all, periphery a sparse ring
        n = 12
        edges = {}
        for i in range(1, n):
            edges[(0, i)] = 1
            edges[(i, 0)] = 1
        for i in range(1, n):
            j = 1 + (i % (n - 1))
            if i != j:
                edges[(i, j)] = 1
        table = compute_centralities(PortsNetwork(edges))
        assert table.rank[0] == 1
        assert table.a[0] == max(table.a)

    def test_ranking_invariant_under_affine_transforms(self):
        rng = np.random.default_rng(12)
        net = PortsNetwork(oracles.random_scc_digraph(rng, 25, 80))
        base = compute_centralities(net)
        for _ in range(20):
            scale = float(rng.uniform(0.1, 10))
            shift = float(rng.uniform(-5, 5))
            pick = rng.choice(list(base.raw))
            raw = {k: (v * scale + shift if k == pick else v)
                   for k, v in base.raw.items()}
            z = {k: zscore(v) for k, v in raw.items()}
            a, rank = aggregate(z, net.nodes)
            assert (rank == base.rank).all()
            assert a == pytest.approx(base.a, abs=1e-9)


class TestWeightSensitivity:
    def test_only_wpr_reacts_to_weight_scaling(self):
        rng = np.random.default_rng(44)
        edges = oracles.random_scc_digraph(rng, 15, 40)
        net1 = PortsNetwork(edges)
        bumped = dict(edges)
        key = sorted(bumped)[0]
        bumped[key] = bumped[key] * 50
        net2 = PortsNetwork(bumped)
        assert betweenness(net1) == pytest.approx(betweenness(net2))
        assert closeness(net1)[0] == pytest.approx(closeness(net2)[0])
        assert degrees(net1)[0] == pytest.approx(degrees(net2)[0])
        assert pagerank(net1) == pytest.approx(pagerank(net2), abs=1e-12)
        assert not np.allclose(pagerank(net1, weighted=True),
                               pagerank(net2, weighted=True), atol=1e-6)


class TestKernelBackends:
    def test_pure_python_matches_active_backend(self):
        rng = np.random.default_rng(8)
        net = PortsNetwork(oracles.random_scc_digraph(rng, 60, 200))
        sources = np.arange(net.n_nodes, dtype=np.int64)
        args = (net.indptr, net.indices, net.rindptr, net.rindices,
                net.n_nodes, sources)
        bc_active = _kernels.brandes_partial(*args)
        bc_py = _pykernels.brandes_partial(*args)
        assert (bc_active == bc_py).all()  # bit-identical
        agg_active = _kernels.bfs_aggregate(net.indptr, net.indices, net.n_nodes, sources)
        agg_py = _pykernels.bfs_aggregate(net.indptr, net.indices, net.n_nodes, sources)
        for a, b in zip(agg_active, agg_py):
            assert (a == b).all()


class TestTableIo:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(90)
        net = PortsNetwork(oracles.random_scc_digraph(rng, 20, 60))
        table = compute_centralities(net)
        path = tmp_path / "centrality.csv"
        write_centrality_table(table, path)
        again = read_centrality_table(path)
        assert (again.port_ids == table.port_ids).all()
        for c in table.raw:
            assert (again.raw[c] == table.raw[c]).all()
            assert (again.z[c] == table.z[c]).all()
        assert (again.a == table.a).all()
        assert (again.rank == table.rank).all()
        header = path.read_text().splitlines()[0]
        assert header == "port_id,DI,DO,PR,wPR,BC,CC,zDI,zDO,zPR,zwPR,zBC,zCC,A,rank"
