# faircover/services/cvc_service.py
import logging
import math
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import networkx as nx

from faircover.core.config import settings
from faircover.core.exceptions import ContractViolation, InputError, InvariantViolation
from faircover.models import (
    AdditiveTrace,
    CvcInstance,
    CvcLpMapping,
    LinearConstraint,
    LinearProgram,
    LpSolution,
    LpStatus,
    Relation,
    SeparatedSolution,
    Sense,
    SparseLpData,
    VertexSet,
    format_fraction,
    to_fraction,
)
from faircover.services.coverage_service import coverage_service
from faircover.services.lp_service import lp_service

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


class CvcService:
    """LP-rounding approximation for colorful vertex cover"""

    def build_cvc_lp(self, inst: CvcInstance) -> Tuple[LinearProgram, CvcLpMapping]:
        """
        Natural relaxation: minimize sum y_i subject to per-color coverage rows
        and one sanity row per edge; every variable in [0, 1].

        Variables are x_1..x_m followed by y_1..y_n; rows are the coverage rows
        for colors 1..ω followed by the sanity rows for edges 1..m.
        """
        m, n = inst.m, inst.n
        x_index = tuple(range(m))
        y_index = tuple(range(m, m + n))

        rows: List[LinearConstraint] = []
        for t in range(1, inst.num_colors + 1):
            rows.append(LinearConstraint(
                coefficients={x_index[j - 1]: 1 for j in inst.color_class(t)},
                relation=Relation.GE,
                rhs=inst.requirements[t - 1],
                name=f"cover[{t}]",
            ))
        for j, edge in enumerate(inst.edges, start=1):
            coeffs = {y_index[v - 1]: 1 for v in edge.endpoints}
            coeffs[x_index[j - 1]] = -1
            rows.append(LinearConstraint(coefficients=coeffs, relation=Relation.GE, rhs=0, name=f"sanity[{j}]"))

        lp = LinearProgram(
            num_vars=m + n,
            lower=[0] * (m + n),
            upper=[1] * (m + n),
            constraints=tuple(rows),
            objective={y: 1 for y in y_index},
            sense=Sense.MINIMIZE,
        )
        mapping = CvcLpMapping(
            x_index=x_index,
            y_index=y_index,
            coverage_row=tuple(range(inst.num_colors)),
            sanity_row=tuple(range(inst.num_colors, inst.num_colors + m)),
        )
        return lp, mapping

    # ---------------- Relaxation ----------------
    def solve_relaxation(
        self, inst: CvcInstance, cvc_lp: LinearProgram, mapping: CvcLpMapping, dump_dir: Optional[str] = None
    ) -> LpSolution:
        """
        Optimal solution of the relaxation of an attainable instance.

        "simplex" returns the basic optimum of the full LP. "decomposition"
        keeps only the coverage rows in a master LP over convex weights of
        points of the sanity polytope (box plus sanity rows) and prices new
        points with a minimum cut until no point has negative reduced cost.
        The result is optimal but need not be a vertex of the full LP.
        """
        if settings.cvc_relaxation == "simplex":
            return lp_service.solve_to_optimal_basic(cvc_lp, dump_dir=dump_dir)
        lp_service.write_dump(cvc_lp, dump_dir)

        omega = inst.num_colors
        columns: List[Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]] = [((ONE,) * inst.m, (ONE,) * inst.n)]
        seen = set(columns)
        steps = 0
        while True:
            master = self._master_lp(inst, columns)
            solution = lp_service.optimize(master)
            if not solution.is_optimal:
                raise InvariantViolation(f"master LP reported {solution.status.value}")
            steps += solution.iterations
            prices, convexity = solution.duals[:omega], solution.duals[omega]

            x, y = self.price_sanity_polytope(inst, prices)
            reduced = sum(y, ZERO) - sum((prices[e.color - 1] * xj for e, xj in zip(inst.edges, x)), ZERO)
            if reduced >= convexity:
                break
            if (x, y) in seen:
                raise InvariantViolation("pricing returned a column the master LP already holds")
            seen.add((x, y))
            columns.append((x, y))

        logger.debug(f"Relaxation priced {len(columns)} columns, master objective {solution.objective_value}")
        values = [ZERO] * cvc_lp.num_vars
        for weight, (x, y) in zip(solution.values, columns):
            if not weight:
                continue
            for j, k in enumerate(mapping.x_index):
                values[k] += weight * x[j]
            for i, k in enumerate(mapping.y_index):
                values[k] += weight * y[i]
        return lp_service.solution_at(cvc_lp, values, iterations=steps)

    def price_sanity_polytope(
        self, inst: CvcInstance, weights: Sequence[Fraction]
    ) -> Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]:
        """
        Minimize sum_i y_i - sum_j w_color(j) x_j over 0 <= x, y <= 1 with
        every sanity row, for non-negative weights.

        The optimum is half-integral. It is read off a minimum cut of the
        bipartite double cover: copy a_v counts when cut from the source, copy
        b_v when cut from the sink, y_v = (a_v + b_v) / 2, and each copy of an
        edge left uncovered costs its weight. Every edge then takes
        x_j = min(1, sum of its endpoint y).

        Returns:
            (x, y) indexed like the edges and vertices of ``inst``
        """
        if any(w < 0 for w in weights):
            raise InvariantViolation(f"coverage prices must be non-negative, got {[format_fraction(w) for w in weights]}")
        scale = 1
        for w in weights:
            scale = scale * w.denominator // math.gcd(scale, w.denominator)

        network = nx.DiGraph()
        network.add_nodes_from(("s", "t"))
        for v in range(1, inst.n + 1):
            network.add_edge("s", ("a", v), capacity=scale)
            network.add_edge(("b", v), "t", capacity=scale)

        def connect(tail, head, capacity: int) -> None:
            if network.has_edge(tail, head):
                network[tail][head]["capacity"] += capacity
            else:
                network.add_edge(tail, head, capacity=capacity)

        for edge in inst.edges:
            penalty = int(weights[edge.color - 1] * scale)
            if not penalty:
                continue
            if edge.is_pendant:
                u = edge.endpoints[0]
                connect(("a", u), "t", penalty)
                connect("s", ("b", u), penalty)
            else:
                u, v = edge.endpoints
                connect(("a", u), ("b", v), penalty)
                connect(("a", v), ("b", u), penalty)

        _, (source_side, _) = nx.minimum_cut(network, "s", "t")
        y = tuple(
            Fraction((("a", v) not in source_side) + (("b", v) in source_side), 2) for v in range(1, inst.n + 1)
        )
        x = tuple(min(ONE, sum((y[v - 1] for v in edge.endpoints), ZERO)) for edge in inst.edges)
        return x, y

    def _master_lp(self, inst: CvcInstance, columns) -> LinearProgram:
        """Convex weights of the columns; the origin takes up the rest of the unit mass"""
        k = len(columns)
        coverage = [[ZERO] * inst.num_colors for _ in range(k)]
        for c, (x, _) in enumerate(columns):
            for edge, xj in zip(inst.edges, x):
                coverage[c][edge.color - 1] += xj
        rows = [
            LinearConstraint(
                coefficients={c: coverage[c][t - 1] for c in range(k) if coverage[c][t - 1]},
                relation=Relation.GE,
                rhs=inst.requirements[t - 1],
                name=f"cover[{t}]",
            )
            for t in range(1, inst.num_colors + 1)
        ]
        rows.append(LinearConstraint(coefficients={c: 1 for c in range(k)}, relation=Relation.LE, rhs=1,
                                     name="convexity"))
        return LinearProgram(
            num_vars=k,
            lower=[0] * k,
            upper=[1] * k,
            constraints=tuple(rows),
            objective={c: sum(y, ZERO) for c, (_, y) in enumerate(columns) if any(y)},
            sense=Sense.MINIMIZE,
        )

    def separate(self, sol: LpSolution, mapping: CvcLpMapping, inst: CvcInstance) -> SeparatedSolution:
        """
        Assign every edge to its endpoint of larger y (lower id on ties) and
        double: y~_i = min(1, 2 y_i), x~_j = y~ of the assigned endpoint.
        """
        if not sol.is_optimal:
            raise ContractViolation(f"separation needs an optimal LP solution, got {sol.status.value}")
        lp, _ = self.build_cvc_lp(inst)
        if len(sol.values) != lp.num_vars or lp_service.violations(lp, sol.values):
            raise ContractViolation("separation input is not feasible for the relaxation")

        y_bar = [sol.values[k] for k in mapping.y_index]
        y_tilde = tuple(min(ONE, 2 * y) for y in y_bar)
        phi = []
        for edge in inst.edges:
            if edge.is_pendant:
                phi.append(edge.endpoints[0])
                continue
            u, v = edge.endpoints  # sorted, so u < v
            phi.append(v if y_bar[v - 1] > y_bar[u - 1] else u)
        x_tilde = tuple(y_tilde[p - 1] for p in phi)
        return SeparatedSolution(x_tilde=x_tilde, y_tilde=y_tilde, phi=tuple(phi))

    def relaxation_values(self, sep: SeparatedSolution, mapping: CvcLpMapping) -> Tuple[Fraction, ...]:
        """Lay a separated solution out as a point of the relaxation"""
        values = [Fraction(0)] * (len(mapping.x_index) + len(mapping.y_index))
        for j, k in enumerate(mapping.x_index):
            values[k] = sep.x_tilde[j]
        for i, k in enumerate(mapping.y_index):
            values[k] = sep.y_tilde[i]
        return tuple(values)

    def build_sparse_lp(self, sep: SeparatedSolution, inst: CvcInstance) -> Tuple[LinearProgram, SparseLpData]:
        """
        One z_i in [0, 1] per vertex; maximize the color-1 edges charged to the
        chosen vertices subject to coverage rows for colors 2..ω and the budget
        sum z_i <= k, where k is the cost of the separated solution.
        """
        n, omega = inst.n, inst.num_colors
        counts = [[0] * n for _ in range(omega)]
        for edge, owner in zip(inst.edges, sep.phi):
            counts[edge.color - 1][owner - 1] += 1
        budget = sep.cost

        rows = [
            LinearConstraint(
                coefficients={i: c for i, c in enumerate(counts[t - 1]) if c},
                relation=Relation.GE,
                rhs=inst.requirements[t - 1],
                name=f"cover[{t}]",
            )
            for t in range(2, omega + 1)
        ]
        rows.append(LinearConstraint(coefficients={i: 1 for i in range(n)}, relation=Relation.LE,
                                     rhs=budget, name="budget"))
        lp = LinearProgram(
            num_vars=n,
            lower=[0] * n,
            upper=[1] * n,
            constraints=tuple(rows),
            objective={i: c for i, c in enumerate(counts[0]) if c},
            sense=Sense.MAXIMIZE,
        )
        data = SparseLpData(
            counts=tuple(tuple(row) for row in counts),
            budget=budget,
            requirements=inst.requirements,
        )
        return lp, data

    def round_sparse(self, z_hat: LpSolution, data: SparseLpData) -> Tuple[Tuple[int, ...], VertexSet]:
        """
        Round every positive coordinate up to 1.

        Returns:
            The 0/1 vector z* and the vertex set Γ it selects
        """
        omega = len(data.requirements)
        if not z_hat.is_optimal:
            raise ContractViolation(f"rounding needs an optimal solution, got {z_hat.status.value}")
        objective = sum((c * z for c, z in zip(data.counts[0], z_hat.values)), Fraction(0))
        if objective < data.requirements[0]:
            raise ContractViolation(f"objective {objective} is below the color-1 requirement {data.requirements[0]}")

        fractional = z_hat.fractional_indices()
        if len(fractional) > omega:
            raise InvariantViolation(
                f"{len(fractional)} fractional coordinates exceed the {omega} allowed at an extreme point"
            )
        rounded = tuple(1 if z > 0 else 0 for z in z_hat.values)
        gamma = frozenset(i for i, z in enumerate(rounded, start=1) if z)

        if len(gamma) > data.budget + omega:
            raise InvariantViolation(f"rounded set of size {len(gamma)} exceeds k + ω = {data.budget + omega}")
        for t in range(omega):
            achieved = sum(c for c, z in zip(data.counts[t], rounded) if z)
            if achieved < data.requirements[t]:
                raise InvariantViolation(f"rounded set covers {achieved} < {data.requirements[t]} edges of color {t + 1}")
        return rounded, gamma

    def run_additive(self, inst: CvcInstance, dump_dir: Optional[str] = None) -> Optional[AdditiveTrace]:
        """Run the full relaxation, separation, sparse-LP and rounding pipeline"""
        if not self.requirements_attainable(inst):
            return None

        cvc_lp, mapping = self.build_cvc_lp(inst)
        lp_solution = self.solve_relaxation(inst, cvc_lp, mapping, dump_dir=dump_dir)
        if not lp_solution.is_optimal:
            raise InvariantViolation(f"relaxation of an attainable instance reported {lp_solution.status.value}")
        logger.info(f"Relaxation optimum {lp_solution.objective_value} after {lp_solution.iterations} steps")

        separated = self.separate(lp_solution, mapping, inst)
        sparse_lp, sparse_data = self.build_sparse_lp(separated, inst)
        sparse_solution = lp_service.solve_to_optimal_basic(sparse_lp, dump_dir=dump_dir)
        if sparse_solution.status is not LpStatus.OPTIMAL:
            raise InvariantViolation(f"sparse LP reported {sparse_solution.status.value}")
        logger.info(
            f"Sparse LP optimum {sparse_solution.objective_value} with "
            f"{len(sparse_solution.fractional_indices())} fractional coordinates, budget {sparse_data.budget}"
        )

        rounded, gamma = self.round_sparse(sparse_solution, sparse_data)
        return AdditiveTrace(
            cvc_lp=cvc_lp,
            mapping=mapping,
            lp_solution=lp_solution,
            separated=separated,
            sparse_lp=sparse_lp,
            sparse_data=sparse_data,
            sparse_solution=sparse_solution,
            rounded=rounded,
            gamma=gamma,
        )

    def solve_additive(self, inst: CvcInstance, dump_dir: Optional[str] = None) -> Optional[VertexSet]:
        """Feasible set of size at most 2·OPT + ω, or None when the instance is infeasible"""
        trace = self.run_additive(inst, dump_dir=dump_dir)
        return None if trace is None else trace.gamma

    def solve_eps(self, inst: CvcInstance, epsilon, dump_dir: Optional[str] = None) -> Optional[VertexSet]:
        """
        (2 + ε)-approximation: exhaustive search over sets of size up to ⌈ω/ε⌉,
        falling back to the additive pipeline when none is feasible.
        """
        epsilon = to_fraction(epsilon)
        if epsilon <= 0:
            raise InputError(f"epsilon must be positive, got {epsilon}")
        if not self.requirements_attainable(inst):
            return None
        if coverage_service.is_feasible_cvc(inst, ()):
            return frozenset()

        kappa_max = min(math.ceil(Fraction(inst.num_colors) / epsilon), inst.n)
        for kappa in range(1, kappa_max + 1):
            found = self._first_feasible_of_size(inst, kappa)
            if found is not None:
                logger.info(f"Exhaustive search found an optimum of size {kappa}")
                return found
        logger.info(f"No feasible set of size <= {kappa_max}; using the additive pipeline")
        return self.solve_additive(inst, dump_dir=dump_dir)

    def solve_greedy(self, inst: CvcInstance) -> Optional[VertexSet]:
        """
        Baseline: repeatedly add the vertex covering the most still-useful edges,
        each color's gain capped by its residual requirement; lowest id on ties.
        """
        if not self.requirements_attainable(inst):
            return None
        residual = list(inst.requirements)
        covered = [False] * inst.m
        incident: List[List[int]] = [[] for _ in range(inst.n + 1)]
        for j, edge in enumerate(inst.edges):
            for v in edge.endpoints:
                incident[v].append(j)

        chosen = set()
        while any(r > 0 for r in residual):
            best_vertex, best_gain = None, 0
            for v in range(1, inst.n + 1):
                if v in chosen:
                    continue
                per_color = [0] * inst.num_colors
                for j in incident[v]:
                    if not covered[j]:
                        per_color[inst.edges[j].color - 1] += 1
                gain = sum(min(c, r) for c, r in zip(per_color, residual))
                if gain > best_gain:
                    best_vertex, best_gain = v, gain
            if best_vertex is None:
                raise InvariantViolation("greedy stalled on an attainable instance")
            chosen.add(best_vertex)
            for j in incident[best_vertex]:
                if not covered[j]:
                    covered[j] = True
                    t = inst.edges[j].color - 1
                    residual[t] = max(0, residual[t] - 1)
        return frozenset(chosen)

    def requirements_attainable(self, inst: CvcInstance) -> bool:
        """r_t <= |C_t| for every color; selecting every vertex then covers everything"""
        for t, (size, r) in enumerate(zip(inst.color_class_sizes(), inst.requirements), start=1):
            if r > size:
                logger.warning(f"Color {t} requires {r} edges but only {size} exist; instance is infeasible")
                return False
        return True

    def _first_feasible_of_size(self, inst: CvcInstance, kappa: int) -> Optional[VertexSet]:
        for subset in combinations(range(1, inst.n + 1), kappa):
            if coverage_service.is_feasible_cvc(inst, subset):
                return frozenset(subset)
        return None


# Global CVC service instance
cvc_service = CvcService()

build_cvc_lp = cvc_service.build_cvc_lp
separate = cvc_service.separate
build_sparse_lp = cvc_service.build_sparse_lp
round_sparse = cvc_service.round_sparse
solve_relaxation = cvc_service.solve_relaxation
solve_additive = cvc_service.solve_additive
solve_eps = cvc_service.solve_eps
solve_greedy = cvc_service.solve_greedy
