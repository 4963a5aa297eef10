"""Graph construction, density scoring, and corrosion-search tests.

The corrosion search is checked against an independent brute-force replay:
plain-Python corrosion, depth-first components, and direct score sums.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from visrep.category_graph import (
    CategoryGraph,
    build_graph,
    categories_to_mask,
    connected_components,
    corrode,
    density_score,
    empty_graph,
    extract_categories,
)
from visrep.features import KeypointSet
from visrep.splash import HotspotEdges
from visrep.superpixels import SuperpixelLabeling


def graph_of(edge_list) -> CategoryGraph:
    """Build a CategoryGraph from (a, b, weight) triples."""
    if not edge_list:
        return empty_graph()
    edges = np.array([sorted((a, b)) for a, b, _ in edge_list], dtype=np.int64)
    weights = np.array([w for _, _, w in edge_list], dtype=np.float64)
    return CategoryGraph(np.unique(edges), edges, weights)


def two_triangles(bridge: float | None = None) -> CategoryGraph:
    edges = [(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0), (4, 5, 1.0), (4, 6, 1.0), (5, 6, 1.0)]
    if bridge is not None:
        edges.append((3, 4, bridge))
    return graph_of(edges)


# ---------------------------------------------------------------- oracle

def oracle_components(nodes, edges) -> tuple:
    """Depth-first connected components, singletons included."""
    adj = {int(n): set() for n in nodes}
    for a, b in edges:
        adj[int(a)].add(int(b))
        adj[int(b)].add(int(a))
    seen, comps = set(), []
    for start in sorted(adj):
        if start in seen:
            continue
        stack, comp = [start], set()
        while stack:
            n = stack.pop()
            if n in comp:
                continue
            comp.add(n)
            stack.extend(adj[n] - comp)
        seen |= comp
        comps.append(tuple(sorted(comp)))
    return tuple(sorted(comps, key=min))


def oracle_score(comps, edges, weights, alpha: float) -> float:
    total = 0.0
    for comp in comps:
        members = set(comp)
        internal = [w for (a, b), w in zip(edges, weights) if a in members and b in members]
        if internal:
            total += sum(internal) / len(internal)
    return total - alpha * len(comps)


def oracle_extract(g: CategoryGraph, alpha: float):
    """Replay every corrosion step and keep the strict argmax (earliest tie)."""
    nodes = [int(n) for n in g.nodes]
    edges = [(int(a), int(b)) for a, b in g.edges]
    weights = [float(w) for w in g.weights]
    best_comps = oracle_components(nodes, edges)
    best_score = oracle_score(best_comps, edges, weights, alpha)
    best_step = 0
    step = 0
    while edges:
        step += 1
        w_min = min(weights)
        pairs = [
            (e, w - w_min) for e, w in zip(edges, weights) if w - w_min > 1e-12
        ]
        edges = [e for e, _ in pairs]
        weights = [w for _, w in pairs]
        comps = oracle_components(nodes, edges)
        score = oracle_score(comps, edges, weights, alpha)
        if score > best_score:
            best_comps, best_score, best_step = comps, score, step
    return best_comps, best_score, best_step


def random_graph(rng: np.random.Generator) -> CategoryGraph:
    n_nodes = int(rng.integers(2, 9))
    nodes = np.arange(1, n_nodes + 1)
    possible = [(a, b) for a in nodes for b in nodes if a < b]
    rng.shuffle(possible)
    n_edges = int(rng.integers(1, min(12, len(possible)) + 1))
    chosen = sorted(possible[:n_edges])
    weights = rng.integers(1, 6, size=n_edges).astype(np.float64)
    return CategoryGraph(nodes, np.array(chosen, dtype=np.int64), weights)


@st.composite
def small_graphs(draw) -> CategoryGraph:
    """Arbitrary graphs in the oracle-checkable regime: ≤ 8 nodes, ≤ 12
    integer-weighted edges."""
    n_nodes = draw(st.integers(min_value=2, max_value=8))
    possible = [(a, b) for a in range(1, n_nodes + 1) for b in range(a + 1, n_nodes + 1)]
    n_edges = draw(st.integers(min_value=1, max_value=min(12, len(possible))))
    order = draw(st.permutations(range(len(possible))))
    chosen = sorted(possible[i] for i in order[:n_edges])
    weights = draw(
        st.lists(st.integers(min_value=1, max_value=5), min_size=n_edges, max_size=n_edges)
    )
    return CategoryGraph(
        np.arange(1, n_nodes + 1),
        np.array(chosen, dtype=np.int64),
        np.array(weights, dtype=np.float64),
    )


# ---------------------------------------------------------------- tests

class TestGraphProperties:
    """Hypothesis-driven invariants of the corrosion search."""

    @settings(max_examples=80, deadline=None)
    @given(g=small_graphs(), alpha=st.sampled_from([0.25, 0.5, 1.0]))
    def test_extraction_matches_oracle(self, g, alpha):
        part = extract_categories(g, alpha)
        comps, score, step = oracle_extract(g, alpha)
        assert part.components == comps
        assert abs(part.score - score) <= 1e-9
        assert part.corrosion_step == step

    @settings(max_examples=60, deadline=None)
    @given(g=small_graphs(), alpha=st.sampled_from([0.25, 0.5, 1.0]))
    def test_corrosion_step_bounded_by_distinct_weights(self, g, alpha):
        part = extract_categories(g, alpha)
        assert part.corrosion_step <= len({float(w) for w in g.weights})

    @settings(max_examples=60, deadline=None)
    @given(g=small_graphs(), alpha=st.sampled_from([0.25, 0.5, 1.0]), salt=st.integers(0, 2**16))
    def test_node_relabeling_maps_the_result(self, g, alpha, salt):
        rng = np.random.default_rng(salt)
        mapping = dict(zip(g.nodes.tolist(), (1 + rng.permutation(len(g.nodes))).tolist()))
        edges = np.sort(
            np.array([[mapping[int(a)], mapping[int(b)]] for a, b in g.edges]), axis=1
        )
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        relabeled = CategoryGraph(
            np.sort(np.array(list(mapping.values()))), edges[order], g.weights[order]
        )
        ours = extract_categories(g, alpha)
        theirs = extract_categories(relabeled, alpha)
        mapped = tuple(
            sorted(
                (tuple(sorted(mapping[n] for n in comp)) for comp in ours.components),
                key=min,
            )
        )
        assert theirs.components == mapped
        assert abs(theirs.score - ours.score) <= 1e-9
        assert theirs.corrosion_step == ours.corrosion_step


class TestDensityScore:
    def test_two_disjoint_triangles_score_one(self):
        g = two_triangles()
        comps = ((1, 2, 3), (4, 5, 6))
        assert abs(density_score(g, comps, 0.5) - 1.0) < 1e-9

    def test_bridged_triangles_merged_score(self):
        g = two_triangles(bridge=0.1)
        comps = ((1, 2, 3, 4, 5, 6),)
        assert abs(density_score(g, comps, 0.5) - (6.1 / 7 - 0.5)) < 1e-9

    def test_alpha_zero_sums_component_averages(self):
        g = graph_of([(1, 2, 2.0), (3, 4, 4.0), (4, 5, 6.0)])
        comps = ((1, 2), (3, 4, 5))
        assert abs(density_score(g, comps, 0.0) - (2.0 + 5.0)) < 1e-9

    def test_component_without_internal_edges_scores_zero(self):
        g = graph_of([(1, 2, 3.0)])
        assert abs(density_score(g, ((1,), (2,)), 0.0) - 0.0) < 1e-9

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            g = random_graph(rng)
            comps = oracle_components(g.nodes, g.edges)
            ref = density_score(g, comps, 0.5)
            inner = tuple(
                tuple(int(x) for x in rng.permutation(list(c))) for c in comps
            )
            shuffled = tuple(inner[i] for i in rng.permutation(len(inner)))
            assert abs(density_score(g, shuffled, 0.5) - ref) < 1e-12

    def test_rejects_overlapping_components(self):
        g = graph_of([(1, 2, 1.0), (2, 3, 1.0)])
        with pytest.raises(ValueError, match="disjoint"):
            density_score(g, ((1, 2), (2, 3)), 0.5)

    def test_rejects_foreign_nodes(self):
        g = graph_of([(1, 2, 1.0)])
        with pytest.raises(ValueError, match="outside"):
            density_score(g, ((1, 2, 99),), 0.5)


class TestCorrode:
    def test_uniform_weights_disconnect_in_one_step(self):
        g = graph_of([(1, 2, 2.0), (2, 3, 2.0)])
        assert corrode(g).n_edges == 0

    def test_1_3_3_becomes_2_2(self):
        g = graph_of([(1, 2, 1.0), (2, 3, 3.0), (3, 4, 3.0)])
        out = corrode(g)
        assert np.allclose(sorted(out.weights), [2.0, 2.0])
        assert out.n_edges == 2

    def test_single_edge_goes_edgeless(self):
        assert corrode(graph_of([(1, 2, 2.0)])).n_edges == 0

    def test_edgeless_graph_rejected(self):
        with pytest.raises(ValueError, match="corrode"):
            corrode(empty_graph())

    def test_terminates_within_distinct_weight_count(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            g = random_graph(rng)
            bound = len(set(g.weights.tolist()))
            steps = 0
            while g.n_edges:
                g = corrode(g)
                steps += 1
            assert steps <= bound


class TestExtractCategories:
    def test_bridged_triangles_split_at_step_one(self):
        part = extract_categories(two_triangles(bridge=0.1), alpha=0.5)
        assert part.components == ((1, 2, 3), (4, 5, 6))
        assert part.corrosion_step == 1
        assert abs(part.score - 0.8) < 1e-9

    def test_single_edge_kept_at_step_zero(self):
        part = extract_categories(graph_of([(1, 2, 3.0)]), alpha=0.5)
        assert part.components == ((1, 2),)
        assert part.corrosion_step == 0
        assert abs(part.score - 2.5) < 1e-9

    def test_empty_graph_empty_partition(self):
        part = extract_categories(empty_graph(), alpha=0.5)
        assert part.components == ()
        assert part.score == 0.0

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            g = random_graph(rng)
            for alpha in (0.25, 0.5, 1.0):
                got = extract_categories(g, alpha)
                comps, score, step = oracle_extract(g, alpha)
                assert got.components == comps
                assert abs(got.score - score) < 1e-9
                assert got.corrosion_step == step

    def test_alpha_monotone_in_component_count(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            g = random_graph(rng)
            counts = [
                len(extract_categories(g, alpha).components)
                for alpha in (0.25, 0.5, 1.0, 2.0, 4.0)
            ]
            assert all(a >= b for a, b in zip(counts, counts[1:]))


class TestBuildGraph:
    @staticmethod
    def make_sp(assign_row: list[int]) -> SuperpixelLabeling:
        labels = np.array([assign_row], dtype=np.int64)
        count = labels.max()
        centers = np.zeros((count, 2))
        return SuperpixelLabeling(labels, centers, np.zeros((count, 3)))

    def test_three_edges_same_pair_weight_three(self):
        # keypoints 0,1,2 in superpixel 4; keypoint 3 in superpixel 7
        sp = self.make_sp([4, 4, 4, 7])
        kps = KeypointSet(np.array([[0, 0], [1, 0], [2, 0], [3, 0]]))
        hot = HotspotEdges(np.array([[0, 3], [1, 3], [2, 3]]), 1.0)
        g = build_graph(hot, sp, kps)
        assert g.edges.tolist() == [[4, 7]]
        assert g.weights.tolist() == [3.0]
        assert g.nodes.tolist() == [4, 7]

    def test_self_loop_contributes_nothing(self):
        sp = self.make_sp([2, 2])
        kps = KeypointSet(np.array([[0, 0], [1, 0]]))
        hot = HotspotEdges(np.array([[0, 1]]), 1.0)
        assert build_graph(hot, sp, kps).n_edges == 0

    def test_empty_hotspots_empty_graph(self):
        sp = self.make_sp([1, 2])
        kps = KeypointSet(np.array([[0, 0], [1, 0]]))
        g = build_graph(HotspotEdges(np.empty((0, 2), dtype=np.int64), 0.0), sp, kps)
        assert g.n_edges == 0 and len(g.nodes) == 0

    def test_invalid_keypoint_index_rejected(self):
        sp = self.make_sp([1, 2])
        kps = KeypointSet(np.array([[0, 0], [1, 0]]))
        with pytest.raises(IndexError):
            build_graph(HotspotEdges(np.array([[0, 5]]), 1.0), sp, kps)


class TestCategoriesToMask:
    @staticmethod
    def quad_labeling() -> SuperpixelLabeling:
        labels = np.array([[1, 1, 2, 2], [3, 3, 4, 4]], dtype=np.int64)
        return SuperpixelLabeling(labels, np.zeros((4, 2)), np.zeros((4, 3)))

    def test_empty_partition_all_zero(self):
        part = extract_categories(empty_graph(), 0.5)
        seg = categories_to_mask(part, self.quad_labeling())
        assert (seg.label_map == 0).all()
        assert seg.categories == ()

    def test_one_component_paints_union(self):
        part = extract_categories(graph_of([(1, 4, 2.0)]), 0.5)
        seg = categories_to_mask(part, self.quad_labeling())
        expect = np.array([[1, 1, 0, 0], [0, 0, 1, 1]])
        assert np.array_equal(seg.label_map, expect)

    def test_two_components_disjoint_labels(self):
        part = extract_categories(
            graph_of([(1, 2, 5.0), (3, 4, 5.0)]), alpha=0.5
        )
        seg = categories_to_mask(part, self.quad_labeling())
        assert set(np.unique(seg.label_map)) == {1, 2}
        assert ((seg.label_map == 1).sum(), (seg.label_map == 2).sum()) == (4, 4)

    def test_min_nodes_filters_small_components(self):
        part = extract_categories(graph_of([(1, 2, 5.0)]), alpha=0.5)
        seg = categories_to_mask(part, self.quad_labeling(), min_nodes=3)
        assert (seg.label_map == 0).all()

    def test_patterns_expose_member_superpixels(self):
        part = extract_categories(graph_of([(1, 4, 2.0)]), 0.5)
        seg = categories_to_mask(part, self.quad_labeling())
        pats = seg.to_patterns()
        assert len(pats) == 1 and len(pats[0]) == 2
        got = {tuple(sorted(inst.tolist())) for inst in pats[0]}
        assert got == {(0, 1), (6, 7)}
