#!/usr/bin/env python3
"""
LP-rounding pipeline for colorful vertex cover, checked against the brute-force oracle.
"""

import math
import random
import time
from fractions import Fraction as F

import pytest

from faircover.core.config import settings
from faircover.core.exceptions import ContractViolation, InputError
from faircover.models import (
    CvcEdge,
    CvcInstance,
    GeneratorConfig,
    LpSolution,
    LpStatus,
    Relation,
    SeparatedSolution,
    SparseLpData,
)
from faircover.services.coverage_service import is_feasible_cvc
from faircover.services.cvc_service import (
    build_cvc_lp,
    build_sparse_lp,
    cvc_service,
    round_sparse,
    separate,
    solve_additive,
    solve_eps,
    solve_greedy,
    solve_relaxation,
)
from faircover.services.generator_service import gen_random_cvc
from faircover.services.lp_service import lp_service, verify_extreme_point
from faircover.services.oracle_service import brute_force_cvc


def cvc(n, edges, requirements):
    return CvcInstance(
        n=n,
        edges=tuple(CvcEdge(endpoints=e, color=c) for e, c in edges),
        num_colors=len(requirements),
        requirements=tuple(requirements),
    )


def star(requirements=(2,)):
    return cvc(4, [((1, 2), 1), ((1, 3), 1), ((1, 4), 1)], requirements)


def corpus(seed, count, colors=(1, 2, 3)):
    rng = random.Random(seed)
    for _ in range(count):
        yield gen_random_cvc(GeneratorConfig(
            seed=rng.getrandbits(64),
            min_vertices=3,
            max_vertices=12,
            density=0.35,
            num_colors=rng.choice(colors),
            max_edges=20,
            pendant_rate=0.1,
        ))


# ---------------- Relaxation ----------------
def test_build_cvc_lp_single_edge():
    lp, mapping = build_cvc_lp(cvc(2, [((1, 2), 1)], (1,)))
    assert lp.num_vars == 3
    assert len(lp.constraints) == 2
    assert mapping.x_index == (0,)
    assert mapping.y_index == (1, 2)
    assert lp.objective == {1: 1, 2: 1}


def test_build_cvc_lp_without_edges():
    lp, mapping = build_cvc_lp(cvc(2, [], (0,)))
    assert lp.num_vars == 2
    assert mapping.x_index == ()
    coverage = lp.constraints[0]
    assert coverage.coefficients == {}
    assert coverage.relation is Relation.GE and coverage.rhs == 0


def test_build_cvc_lp_pendant_sanity_row():
    lp, mapping = build_cvc_lp(cvc(1, [((1,), 1)], (1,)))
    sanity = lp.constraints[mapping.sanity_row[0]]
    assert sanity.coefficients == {mapping.y_index[0]: 1, mapping.x_index[0]: -1}
    assert sanity.relation is Relation.GE


def test_price_sanity_polytope_star():
    x, y = cvc_service.price_sanity_polytope(star(), [F(1)])
    assert y == (1, 0, 0, 0)
    assert x == (1, 1, 1)

    x, y = cvc_service.price_sanity_polytope(star(), [F(0)])
    assert y == (0, 0, 0, 0)
    assert x == (0, 0, 0)


def test_price_sanity_polytope_pendant():
    pendant = cvc(1, [((1,), 1)], (1,))
    assert cvc_service.price_sanity_polytope(pendant, [F(2)]) == ((1,), (1,))
    assert cvc_service.price_sanity_polytope(pendant, [F(1, 2)]) == ((0,), (0,))


def test_price_sanity_polytope_is_half_integral():
    triangle = cvc(3, [((1, 2), 1), ((2, 3), 1), ((1, 3), 1)], (3,))
    x, y = cvc_service.price_sanity_polytope(triangle, [F(1)])
    assert y == (F(1, 2),) * 3
    assert x == (1, 1, 1)


def test_relaxation_of_triangle(monkeypatch):
    triangle = cvc(3, [((1, 2), 1), ((2, 3), 1), ((1, 3), 1)], (3,))
    lp, mapping = build_cvc_lp(triangle)
    for method in ("decomposition", "simplex"):
        monkeypatch.setattr(settings, "cvc_relaxation", method)
        sol = solve_relaxation(triangle, lp, mapping)
        assert sol.objective_value == F(3, 2)


def test_relaxation_decomposition_matches_simplex(monkeypatch):
    for inst in corpus(31, 60):
        if not cvc_service.requirements_attainable(inst):
            continue
        lp, mapping = build_cvc_lp(inst)
        monkeypatch.setattr(settings, "cvc_relaxation", "decomposition")
        priced = solve_relaxation(inst, lp, mapping)
        monkeypatch.setattr(settings, "cvc_relaxation", "simplex")
        basic = solve_relaxation(inst, lp, mapping)
        assert lp_service.violations(lp, priced.values) == []
        assert priced.objective_value == basic.objective_value
        assert verify_extreme_point(lp, basic)




# ---------------- Separation ----------------
def point(*values):
    return LpSolution(status=LpStatus.OPTIMAL, values=tuple(F(v) for v in values))


def test_separate_prefers_larger_endpoint():
    inst = cvc(2, [((1, 2), 1)], (0,))
    _, mapping = build_cvc_lp(inst)
    sep = separate(point("4/5", "3/10", "1/2"), mapping, inst)
    assert sep.phi == (2,)
    assert sep.y_tilde == (F(3, 5), F(1))
    assert sep.x_tilde == (F(1),)


def test_separate_breaks_ties_by_lower_id():
    inst = cvc(2, [((1, 2), 1)], (0,))
    _, mapping = build_cvc_lp(inst)
    sep = separate(point("4/5", "2/5", "2/5"), mapping, inst)
    assert sep.phi == (1,)
    assert sep.x_tilde == (F(4, 5),)


def test_separate_integral_solution_is_unchanged():
    inst = cvc(3, [((1, 2), 1), ((2, 3), 1)], (2,))
    _, mapping = build_cvc_lp(inst)
    sep = separate(point(1, 1, 0, 1, 0), mapping, inst)
    assert sep.y_tilde == (0, 1, 0)
    assert sep.x_tilde == (1, 1)


def test_separate_contract():
    inst = cvc(2, [((1, 2), 1)], (1,))
    _, mapping = build_cvc_lp(inst)
    with pytest.raises(ContractViolation):
        separate(LpSolution(status=LpStatus.INFEASIBLE), mapping, inst)
    with pytest.raises(ContractViolation):
        separate(point(1, 0, 0), mapping, inst)


# ---------------- Sparse LP and rounding ----------------
def test_sparse_lp_single_color_has_budget_row_only():
    inst = star((2,))
    sep = SeparatedSolution(x_tilde=(F(1),) * 3, y_tilde=(F(1), F(0), F(0), F(0)), phi=(1, 1, 1))
    lp, data = build_sparse_lp(sep, inst)
    assert len(lp.constraints) == 1
    assert lp.constraints[0].relation is Relation.LE
    assert data.budget == 1
    assert data.counts[0] == (3, 0, 0, 0)


def test_sparse_lp_coverage_row_for_second_color():
    inst = cvc(4, [((1, 3), 1), ((2, 4), 2)], (1, 1))
    sep = SeparatedSolution(x_tilde=(F(1), F(1)), y_tilde=(F(1), F(1), F(0), F(0)), phi=(1, 2))
    lp, data = build_sparse_lp(sep, inst)
    assert len(lp.constraints) == 2
    coverage = lp.constraints[0]
    assert coverage.coefficients == {1: 1}
    assert coverage.relation is Relation.GE and coverage.rhs == 1
    assert lp.objective == {0: 1}


def test_round_sparse():
    data = SparseLpData(counts=((1, 1, 1, 0), (0, 0, 0, 1)), budget=F(2), requirements=(1, 0))
    rounded, gamma = round_sparse(point(1, "1/2", "3/10", 0), data)
    assert rounded == (1, 1, 1, 0)
    assert gamma == {1, 2, 3}

    rounded, gamma = round_sparse(point(1, 0, 1, 0), data)
    assert rounded == (1, 0, 1, 0)


def test_round_sparse_contract():
    data = SparseLpData(counts=((1, 1),), budget=F(1), requirements=(2,))
    with pytest.raises(ContractViolation):
        round_sparse(point("1/2", "1/2"), data)
    with pytest.raises(ContractViolation):
        round_sparse(LpSolution(status=LpStatus.INFEASIBLE), data)


# ---------------- End-to-end solvers ----------------
def test_solve_additive_examples():
    result = solve_additive(star((2,)))
    assert result is not None
    assert is_feasible_cvc(star((2,)), result)
    assert len(result) <= 2 * 1 + 1

    assert solve_additive(star((0,))) == frozenset()

    disjoint = cvc(4, [((1, 2), 1), ((3, 4), 2)], (1, 1))
    result = solve_additive(disjoint)
    assert is_feasible_cvc(disjoint, result)
    assert 2 <= len(result) <= 6


def test_solve_additive_infeasible():
    assert solve_additive(star((4,))) is None


def test_solve_eps_examples():
    triangle = cvc(3, [((1, 2), 1), ((2, 3), 1), ((1, 3), 1)], (3,))
    result = solve_eps(triangle, "1")
    assert is_feasible_cvc(triangle, result)
    assert len(result) <= 6

    assert solve_eps(star((2,)), F(1, 2)) == {1}
    assert solve_eps(cvc(3, [((1, 2), 1), ((2, 3), 2)], (0, 0)), 1) == frozenset()
    assert solve_eps(star((4,)), 1) is None


def test_solve_eps_rejects_non_positive_epsilon():
    with pytest.raises(InputError):
        solve_eps(star(), 0)
    with pytest.raises(InputError):
        solve_eps(star(), "-1/2")


def test_solve_greedy():
    assert solve_greedy(star((2,))) == {1}
    assert solve_greedy(star((0,))) == frozenset()
    assert solve_greedy(star((4,))) is None


def test_run_additive_exposes_every_stage():
    trace = cvc_service.run_additive(star((3,)))
    assert trace.lp_solution.objective_value == 1
    assert trace.separated.cost <= 2 * trace.lp_solution.objective_value
    assert trace.gamma == {i for i, z in enumerate(trace.rounded, start=1) if z}


# ---------------- Corpus guarantees ----------------
def test_additive_guarantee_on_random_corpus():
    for inst in corpus(2024, 200):
        optimum = brute_force_cvc(inst)
        trace = cvc_service.run_additive(inst)
        if optimum is None:
            assert trace is None
            continue
        omega = inst.num_colors

        # separated solution satisfies every relaxation row and costs at most twice the LP optimum
        values = cvc_service.relaxation_values(trace.separated, trace.mapping)
        assert lp_service.violations(trace.cvc_lp, values) == []
        assert trace.separated.cost <= 2 * trace.lp_solution.objective_value

        # sparse LP extreme point has at most omega fractional coordinates
        assert verify_extreme_point(trace.sparse_lp, trace.sparse_solution)
        assert len(trace.sparse_solution.fractional_indices()) <= omega

        assert is_feasible_cvc(inst, trace.gamma)
        assert len(trace.gamma) <= 2 * len(optimum) + omega


@pytest.mark.parametrize("epsilon", [F(1, 4), F(1, 2), F(1)])
def test_eps_guarantee_on_random_corpus(epsilon):
    for inst in corpus(2024, 200):
        optimum = brute_force_cvc(inst)
        result = solve_eps(inst, epsilon)
        if optimum is None:
            assert result is None
            continue
        assert is_feasible_cvc(inst, result)
        if len(optimum) <= math.ceil(inst.num_colors / epsilon):
            assert len(result) == len(optimum)
        else:
            assert len(result) <= (2 + epsilon) * len(optimum)


def test_partial_vertex_cover_slice():
    for inst in corpus(77, 40, colors=(1,)):
        optimum = brute_force_cvc(inst)
        result = solve_additive(inst)
        if optimum is None:
            assert result is None
        else:
            assert is_feasible_cvc(inst, result)
            assert len(result) <= 2 * len(optimum) + 1


def test_greedy_is_feasible_on_random_corpus():
    for inst in corpus(5, 60):
        result = solve_greedy(inst)
        assert (result is None) == (brute_force_cvc(inst) is None)
        if result is not None:
            assert is_feasible_cvc(inst, result)


def test_additive_mid_size_runs_quickly():
    inst = gen_random_cvc(GeneratorConfig(
        seed=4, min_vertices=60, max_vertices=60, density=0.15, num_colors=3, max_edges=300,
    ))
    started = time.perf_counter()
    result = solve_additive(inst)
    assert time.perf_counter() - started < 30
    assert is_feasible_cvc(inst, result)


@pytest.mark.slow
def test_additive_performance_smoke():
    inst = gen_random_cvc(GeneratorConfig(
        seed=9, min_vertices=200, max_vertices=200, density=0.05, num_colors=5, max_edges=1000,
    ))
    started = time.perf_counter()
    result = solve_additive(inst)
    assert time.perf_counter() - started < 120
    assert result is not None
    assert is_feasible_cvc(inst, result)
