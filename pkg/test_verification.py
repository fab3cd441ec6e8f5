#!/usr/bin/env python3
"""
Brute-force oracles, local optimality checks and the seeded generators.
"""

import random

import pytest

from faircover.core.exceptions import OracleCapExceeded
from faircover.models import (
    AxisLine,
    BmInstance,
    CoverageRequirements,
    CoverPointsInstance,
    CvcEdge,
    CvcInstance,
    GeneratorConfig,
    TmInstance,
    VertexColoredGraph,
)
from faircover.services.cec_service import solve_cec
from faircover.services.generator_service import (
    gen_random_bm,
    gen_random_cec,
    gen_random_cvc,
    gen_random_geometry,
    gen_random_tm,
)
from faircover.services.matching_service import max_cardinality_matching
from faircover.services.oracle_service import (
    brute_force_bm,
    brute_force_cec,
    brute_force_cvc,
    brute_force_tm,
    oracle_service,
)


def star(requirements):
    return CvcInstance(
        n=4,
        edges=tuple(CvcEdge(endpoints=(1, leaf), color=1) for leaf in (2, 3, 4)),
        num_colors=1,
        requirements=tuple(requirements),
    )


def path(n):
    return VertexColoredGraph(n=n, vertex_colors=(1,) * n, edges=tuple((i, i + 1) for i in range(1, n)))


# ---------------- Oracles ----------------
def test_brute_force_cvc():
    assert brute_force_cvc(star([2])) == {1}
    assert brute_force_cvc(star([0])) == frozenset()
    assert brute_force_cvc(star([4])) is None


def test_brute_force_cvc_cap():
    big = CvcInstance(n=17, edges=(), num_colors=1, requirements=(0,))
    with pytest.raises(OracleCapExceeded):
        brute_force_cvc(big)
    assert brute_force_cvc(big, cap=17) == frozenset()


def test_brute_force_cec_and_matchings():
    assert len(brute_force_cec(path(3), [3])) == 2
    assert brute_force_cec(path(3), [0]) == frozenset()

    pair = VertexColoredGraph(n=2, vertex_colors=(1, 2), edges=((1, 2),))
    assert brute_force_tm(TmInstance(graph=pair)) == {1}

    zero = BmInstance(graph=path(4), requirements=CoverageRequirements(values=(0,)))
    assert brute_force_bm(zero) == frozenset()
    full = BmInstance(graph=path(4), requirements=CoverageRequirements(values=(4,)))
    assert brute_force_bm(full) == {1, 3}


def test_all_matchings_of_a_path():
    matchings = list(oracle_service._all_matchings(path(4)))
    assert matchings[0] == ()
    assert sorted(matchings) == [(), (1,), (1, 3), (2,), (3,)]


def test_geometric_oracle_cap():
    lines = tuple(AxisLine(orientation="h", coordinate=k) for k in range(17))
    inst = CoverPointsInstance(lines=lines, points=(), requirements=(0,))
    with pytest.raises(OracleCapExceeded):
        oracle_service.brute_force_cover_points(inst)


# ---------------- Local checks ----------------
def test_no_removable_vertex():
    assert oracle_service.no_removable_vertex(star([2]), {1})
    assert not oracle_service.no_removable_vertex(star([2]), {1, 2})


def test_no_removable_edge():
    assert oracle_service.no_removable_edge(path(3), [3], {1, 2})
    assert not oracle_service.no_removable_edge(path(3), [2], {1, 2})


def test_no_augmenting_edge():
    assert oracle_service.no_augmenting_edge(path(4), {2})
    assert not oracle_service.no_augmenting_edge(path(4), {1})


def test_local_checks_hold_on_oracle_optima():
    rng = random.Random(41)
    for _ in range(80):
        cfg = GeneratorConfig(
            seed=rng.getrandbits(64), min_vertices=2, max_vertices=8, density=0.4,
            num_colors=rng.randint(1, 3), max_edges=14, pendant_rate=0.15,
        )
        inst = gen_random_cvc(cfg)
        cover = brute_force_cvc(inst)
        if cover is not None:
            assert oracle_service.no_removable_vertex(inst, cover)

        g, req = gen_random_cec(cfg)
        edge_cover = brute_force_cec(g, req)
        if edge_cover is not None:
            assert oracle_service.no_removable_edge(g, req, edge_cover)
            assert oracle_service.no_removable_edge(g, req, solve_cec(g, req))

        assert oracle_service.no_augmenting_edge(g, oracle_service.brute_force_max_matching(g))
        assert oracle_service.no_augmenting_edge(g, max_cardinality_matching(g))




# ---------------- Generators ----------------
def test_generators_are_deterministic():
    cfg = GeneratorConfig(seed=42, num_colors=3, pendant_rate=0.3)
    assert gen_random_cvc(cfg) == gen_random_cvc(cfg)
    assert gen_random_cec(cfg) == gen_random_cec(cfg)
    assert gen_random_bm(cfg) == gen_random_bm(cfg)
    assert gen_random_tm(cfg) == gen_random_tm(cfg)
    assert gen_random_geometry(cfg, "hit-lines") == gen_random_geometry(cfg, "hit-lines")


def test_density_extremes():
    assert gen_random_cvc(GeneratorConfig(seed=5, density=0.0)).m == 0

    complete = gen_random_tm(GeneratorConfig(seed=5, min_vertices=5, max_vertices=5, density=1.0, num_colors=2))
    assert complete.graph.m == 10
    assert complete.colors == [1, 2]


def test_generated_requirements_respect_policy():
    for seed in range(20):
        inst = gen_random_cvc(GeneratorConfig(seed=seed, policy="tight"))
        assert list(inst.requirements) == inst.color_class_sizes()

        bm = gen_random_bm(GeneratorConfig(seed=seed, max_edges=12))
        assert brute_force_bm(bm) is not None


def test_max_edges_is_respected():
    inst = gen_random_cvc(GeneratorConfig(seed=3, min_vertices=10, max_vertices=10, density=1.0, max_edges=7))
    assert inst.m == 7


def test_generator_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(seed=1, min_vertices=5, max_vertices=4)
    with pytest.raises(ValueError):
        GeneratorConfig(seed=1, density=1.5)
    with pytest.raises(ValueError):
        GeneratorConfig(seed=-1)
