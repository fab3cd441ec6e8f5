#!/usr/bin/env python3
"""
Exact colorful edge cover: reduction to budgeted matching, the tropical gadget and liftings.
"""

import random
import time

import pytest

from faircover.core.exceptions import ContractViolation, InputError
from faircover.models import BmInstance, CoverageRequirements, GeneratorConfig, VertexColoredGraph
from faircover.services.cec_service import (
    cec_service,
    embed_bm_into_tm,
    lift_bm_to_cec,
    lift_tm_to_bm,
    reduce_bm_to_tm,
    reduce_cec_to_bm,
    solve_bm,
    solve_cec,
)
from faircover.services.coverage_service import is_feasible_cec, is_matching
from faircover.services.generator_service import gen_random_bm, gen_random_cec
from faircover.services.matching_service import (
    constrained_max_matching,
    matching_service,
    max_cardinality_matching,
    solve_tropical,
)
from faircover.services.oracle_service import brute_force_bm, brute_force_cec, oracle_service


def graph(n, edges, colors):
    return VertexColoredGraph(n=n, vertex_colors=tuple(colors), edges=tuple(edges), num_colors=max(colors, default=None))


def bm(n, edges, colors, requirements):
    return BmInstance(graph=graph(n, edges, colors), requirements=CoverageRequirements(values=tuple(requirements)))


# ---------------- Edge cover -> budgeted matching ----------------
def test_reduce_cec_to_bm_single_edge():
    g = graph(2, [(1, 2)], [1, 1])
    reduced, cec_map = reduce_cec_to_bm(g, [2])
    assert reduced.graph.n == 4
    assert reduced.graph.edges == ((1, 2), (1, 3), (2, 4))
    assert reduced.graph.vertex_colors == (1, 1, 2, 2)
    assert reduced.requirements.values == (2, 0)
    assert cec_map.aux_of == {1: 3, 2: 4}
    assert cec_map.extra_color == 2


def test_reduce_cec_to_bm_isolated_vertex_makes_infeasible():
    g = graph(3, [(1, 2)], [1, 1, 1])
    assert reduce_cec_to_bm(g, [3]) is None
    reduced, cec_map = reduce_cec_to_bm(g, [2])
    assert cec_map.removed_isolated == (3,)
    assert reduced.graph.n == 4


def test_reduce_cec_to_bm_empty_requirements():
    g = VertexColoredGraph(n=0, vertex_colors=(), edges=())
    reduced, _ = reduce_cec_to_bm(g, [])
    assert reduced.graph.n == 0
    assert solve_bm(reduced) == frozenset()


def test_reduce_cec_to_bm_rejects_unknown_colors():
    with pytest.raises(InputError):
        reduce_cec_to_bm(graph(2, [(1, 2)], [1, 2]), [1])


def test_lift_bm_to_cec():
    g = graph(2, [(1, 2)], [1, 1])
    _, cec_map = reduce_cec_to_bm(g, [2])
    assert lift_bm_to_cec({1}, cec_map, g) == {1}

    _, cec_map = reduce_cec_to_bm(g, [1])
    # edge 2 is (v1, a(v1)); v1's only original edge is edge 1
    assert lift_bm_to_cec({2}, cec_map, g) == {1}

    with pytest.raises(ContractViolation):
        lift_bm_to_cec({1, 2}, cec_map, g)


# ---------------- Budgeted matching -> tropical matching ----------------
def test_reduce_bm_to_tm_single_edge():
    tm, bm_tm_map = reduce_bm_to_tm(bm(2, [(1, 2)], [1, 1], [1]))
    assert tm.graph.n == 5
    assert bm_tm_map.blocks == {1: (3,)}
    assert (bm_tm_map.c_t, bm_tm_map.d_t) == (4, 5)
    assert tm.graph.edges == ((1, 2), (1, 3), (2, 3), (4, 5))
    assert tm.graph.vertex_colors == (1, 2, 3, 3, 4)


def test_reduce_bm_to_tm_full_requirements_leave_blocks_empty():
    tm, bm_tm_map = reduce_bm_to_tm(bm(4, [(1, 2), (3, 4)], [1, 1, 2, 2], [2, 2]))
    assert bm_tm_map.blocks == {1: (), 2: ()}
    assert tm.graph.m == 3
    tropical = matching_service.solve_tropical(tm)
    assert tropical == {1, 2, 3}
    assert lift_tm_to_bm(tropical, bm_tm_map) == {1, 2}


def test_reduce_bm_to_tm_block_sizes():
    # color classes of sizes 3, 2, 2, 2 with budget [2, 1, 1, 1]
    colors = [1, 1, 1, 2, 2, 3, 3, 4, 4]
    edges = [(1, 4), (2, 6), (3, 8), (5, 7), (7, 9)]
    instance = bm(9, edges, colors, [2, 1, 1, 1])
    tm, bm_tm_map = reduce_bm_to_tm(instance)
    sizes = {x: len(block) for x, block in bm_tm_map.blocks.items()}
    assert sizes == {1: 1, 2: 1, 3: 1, 4: 1}
    assert tm.graph.n == 9 + 4 + 2
    assert len(bm_tm_map.block_edges[1]) == 3


def test_reduce_bm_to_tm_infeasible_budget():
    assert reduce_bm_to_tm(bm(2, [(1, 2)], [1, 1], [3])) is None


def test_lift_tm_to_bm():
    tm, bm_tm_map = reduce_bm_to_tm(bm(2, [(1, 2)], [1, 1], [1]))
    assert lift_tm_to_bm({1, 4}, bm_tm_map) == {1}
    with pytest.raises(ContractViolation):
        lift_tm_to_bm({2, 3}, bm_tm_map)
    with pytest.raises(ContractViolation):
        lift_tm_to_bm({1}, bm_tm_map)


def test_lift_all_auxiliary_tropical_matching():
    tm, bm_tm_map = reduce_bm_to_tm(bm(2, [(1, 2)], [1, 1], [0]))
    assert bm_tm_map.blocks == {1: (3, 4)}
    # (3,1), (4,2) and (c_t, d_t)
    all_aux = {bm_tm_map.block_edge_id[(3, 1)], bm_tm_map.block_edge_id[(4, 2)], bm_tm_map.cd_edge}
    assert lift_tm_to_bm(all_aux, bm_tm_map) == frozenset()


def test_embed_bm_into_tm():
    tm, bm_tm_map = reduce_bm_to_tm(bm(2, [(1, 2)], [1, 1], [1]))
    embedded = embed_bm_into_tm({1}, bm_tm_map)
    assert embedded == {1, 4}

    tm, bm_tm_map = reduce_bm_to_tm(bm(2, [(1, 2)], [1, 1], [0]))
    embedded = embed_bm_into_tm(set(), bm_tm_map)
    assert len(embedded) == 2 + 1
    assert is_matching(tm.graph, embedded)


# ---------------- Solvers ----------------
def test_solve_bm_examples():
    assert len(solve_bm(bm(2, [(1, 2)], [1, 1], [1]))) == 1
    square = bm(4, [(1, 2), (2, 3), (3, 4), (1, 4)], [1, 1, 2, 2], [2, 2])
    result = solve_bm(square)
    assert len(result) == 2
    assert cec_service.is_feasible_bm(square, result)
    assert solve_bm(bm(3, [(1, 2), (2, 3)], [1, 2, 1], [0, 0])) == frozenset()


def test_solve_cec_examples():
    path = graph(3, [(1, 2), (2, 3)], [1, 1, 1])
    assert solve_cec(path, [3]) == {1, 2}

    star = graph(4, [(1, 2), (1, 3), (1, 4)], [1, 1, 1, 1])
    assert len(solve_cec(star, [4])) == 3
    assert solve_cec(star, [0]) == frozenset()


def test_solve_cec_infeasible():
    g = graph(3, [(1, 2)], [1, 1, 2])
    assert solve_cec(g, [1, 1]) is None


def test_classical_edge_cover_special_case():
    rng = random.Random(8)
    checked = 0
    while checked < 40:
        g, _ = gen_random_cec(GeneratorConfig(
            seed=rng.getrandbits(64), min_vertices=2, max_vertices=9, density=0.45, num_colors=rng.randint(1, 3),
        ))
        degree = g.degrees()
        if any(degree[v] == 0 for v in range(1, g.n + 1)):
            continue
        checked += 1
        full = [len(g.color_class(x)) for x in range(1, g.num_colors + 1)]
        result = solve_cec(g, full)
        assert len(result) == g.n - len(max_cardinality_matching(g))


# ---------------- Corpus checks ----------------
def test_solve_cec_matches_brute_force():
    rng = random.Random(99)
    for k in range(200):
        g, req = gen_random_cec(GeneratorConfig(
            seed=rng.getrandbits(64), min_vertices=2, max_vertices=8, density=0.4,
            num_colors=rng.randint(1, 3), max_edges=14,
            policy="random-any" if k % 4 == 0 else "random-feasible",
        ))
        expected = brute_force_cec(g, req)
        result = solve_cec(g, req)
        if expected is None:
            assert result is None
        else:
            assert is_feasible_cec(g, req, result)
            assert len(result) == len(expected)


def test_reduction_identities_on_random_budgeted_matchings():
    rng = random.Random(123)
    for _ in range(100):
        instance = gen_random_bm(GeneratorConfig(
            seed=rng.getrandbits(64), min_vertices=2, max_vertices=5, density=0.45, num_colors=rng.randint(1, 2),
        ))
        reduced = reduce_bm_to_tm(instance)
        assert reduced is not None
        tm, bm_tm_map = reduced
        n = instance.graph.n

        for m in oracle_service._all_matchings(instance.graph):
            if cec_service.is_feasible_bm(instance, m):
                embedded = embed_bm_into_tm(m, bm_tm_map)
                assert len(embedded) == n - len(m) + 1
                assert is_matching(tm.graph, embedded)
                assert matching_service.hits_all_colors(tm.graph, embedded, tm.colors)

        for m in oracle_service._all_matchings(tm.graph):
            if matching_service.hits_all_colors(tm.graph, m, tm.colors):
                assert bm_tm_map.cd_edge in m

        tropical = oracle_service.brute_force_tm(tm, cap=200)
        lifted = lift_tm_to_bm(tropical, bm_tm_map)
        assert len(lifted) == n - len(tropical) + 1
        assert len(lifted) == len(brute_force_bm(instance))


def test_gadget_shape_on_random_corpus():
    rng = random.Random(321)
    for _ in range(100):
        g, req = gen_random_cec(GeneratorConfig(
            seed=rng.getrandbits(64), min_vertices=2, max_vertices=7, density=0.4,
            num_colors=rng.randint(1, 3), max_edges=12,
        ))
        reduced = reduce_cec_to_bm(g, req)
        assert reduced is not None
        instance, cec_map = reduced
        n_prime = g.n - len(cec_map.removed_isolated)
        assert instance.graph.n == 2 * n_prime
        assert instance.graph.m == g.m + n_prime

        tm, bm_tm_map = reduce_bm_to_tm(instance)
        n, m = instance.graph.n, instance.graph.m
        class_sizes = [len(instance.graph.color_class(x)) for x in range(1, len(instance.requirements) + 1)]
        assert tm.graph.n <= 2 * n + 2
        assert tm.graph.m <= m + sum(s * s for s in class_sizes) + 1

        assert tm.graph.degrees()[bm_tm_map.d_t] == 1
        assert tm.graph.edges[bm_tm_map.cd_edge - 1] == (bm_tm_map.c_t, bm_tm_map.d_t)
        assert tm.graph.color(bm_tm_map.c_t) == bm_tm_map.color_c
        assert tm.graph.color(bm_tm_map.d_t) == bm_tm_map.color_d

        tropical = solve_tropical(tm)
        assert bm_tm_map.cd_edge in tropical
        without_pair = VertexColoredGraph(
            n=tm.graph.n, vertex_colors=tm.graph.vertex_colors, edges=tm.graph.edges[:-1],
        )
        forced = constrained_max_matching(without_pair, range(1, n + 1))
        assert len(tropical) == 1 + len(forced)


@pytest.mark.slow
def test_solve_cec_performance_smoke():
    g, req = gen_random_cec(GeneratorConfig(
        seed=60, min_vertices=60, max_vertices=60, density=0.23, num_colors=4, max_edges=400,
    ))
    started = time.perf_counter()
    result = solve_cec(g, req)
    assert time.perf_counter() - started < 60
    assert result is not None
    assert is_feasible_cec(g, req, result)
