# faircover/services/cec_service.py
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from faircover.core.exceptions import ContractViolation, InputError, InvariantViolation
from faircover.models import (
    BmInstance,
    BmTmMap,
    CecBmMap,
    CoverageRequirements,
    EdgeSet,
    Matching,
    TmInstance,
    VertexColoredGraph,
    as_requirements,
)
from faircover.services.coverage_service import coverage_service
from faircover.services.matching_service import matching_service

logger = logging.getLogger(__name__)


class CecService:
    """Exact colorful edge cover through budgeted and tropical matching"""

    # ---------------- Edge cover -> budgeted matching ----------------
    def reduce_cec_to_bm(
        self, g: VertexColoredGraph, req: Union[CoverageRequirements, Sequence[int]]
    ) -> Optional[Tuple[BmInstance, CecBmMap]]:
        """
        Drop isolated vertices, then give every surviving vertex v a pendant
        neighbour a(v) of an extra color whose requirement is 0.

        Returns:
            (BM instance, map) or None when a requirement exceeds the
            surviving vertices of its color
        """
        req = as_requirements(req)
        omega = len(req)
        self._check_colors(g, omega)

        degree = g.degrees()
        survivors = [v for v in range(1, g.n + 1) if degree[v] > 0]
        removed = tuple(v for v in range(1, g.n + 1) if degree[v] == 0)
        if removed:
            logger.debug(f"Removing {len(removed)} isolated vertices: {list(removed)}")

        available = [0] * omega
        for v in survivors:
            available[g.color(v) - 1] += 1
        for x, (r, count) in enumerate(zip(req, available), start=1):
            if r > count:
                logger.warning(f"Color {x} requires {r} vertices but only {count} are non-isolated; infeasible")
                return None

        n_prime = len(survivors)
        to_bm = {v: k for k, v in enumerate(survivors, start=1)}
        aux_of = {v: n_prime + k for k, v in enumerate(survivors, start=1)}
        extra_color = omega + 1

        edges = [(to_bm[a], to_bm[b]) for a, b in g.edges]
        aux_edge_owner: Dict[int, int] = {}
        for v in survivors:
            edges.append((to_bm[v], aux_of[v]))
            aux_edge_owner[len(edges)] = v
        colors = [g.color(v) for v in survivors] + [extra_color] * n_prime

        bm = BmInstance(
            graph=VertexColoredGraph(n=2 * n_prime, vertex_colors=tuple(colors), edges=tuple(edges),
                                     num_colors=extra_color),
            requirements=CoverageRequirements(values=tuple(req) + (0,)),
        )
        cec_map = CecBmMap(
            bm=bm,
            to_bm=to_bm,
            aux_of=aux_of,
            aux_edge_owner=aux_edge_owner,
            bm_edge_to_original={j: j for j in range(1, g.m + 1)},
            extra_color=extra_color,
            removed_isolated=removed,
        )
        return bm, cec_map

    def lift_bm_to_cec(self, matching: Iterable[int], cec_map: CecBmMap, g: VertexColoredGraph) -> EdgeSet:
        """
        Keep original edges; replace every (u, a(u)) by u's lowest-id edge.
        """
        matching = frozenset(matching)
        bm = cec_map.bm
        if not self.is_feasible_bm(bm, matching):
            raise ContractViolation("matching is not feasible for the budgeted matching instance")

        incident = g.incident_edges()
        lifted = set()
        for j in sorted(matching):
            if j in cec_map.bm_edge_to_original:
                lifted.add(cec_map.bm_edge_to_original[j])
            else:
                owner = cec_map.aux_edge_owner[j]
                lifted.add(incident[owner][0])

        if not coverage_service.is_feasible_cec(g, bm.requirements.values[:-1], lifted):
            raise InvariantViolation("lifted edge set misses a requirement")
        return frozenset(lifted)

    # ---------------- Budgeted matching -> tropical matching ----------------
    def reduce_bm_to_tm(self, bm: BmInstance) -> Optional[Tuple[TmInstance, BmTmMap]]:
        """
        Gadget: every original vertex gets a unique color, each color x gets a
        block V^x of n_x - r_x vertices of color C joined completely to C_x, and
        a pendant pair (c_t, d_t) colored C and D closes the construction.
        """
        g = bm.graph
        n, omega = g.n, len(bm.requirements)
        classes = {x: g.color_class(x) for x in range(1, omega + 1)}
        for x in range(1, omega + 1):
            if bm.requirements[x - 1] > len(classes[x]):
                logger.warning(f"Color {x} requires {bm.requirements[x - 1]} of {len(classes[x])} vertices; infeasible")
                return None

        color_c, color_d = n + 1, n + 2
        colors: List[int] = list(range(1, n + 1))
        edges: List[Tuple[int, int]] = list(g.edges)
        blocks: Dict[int, Tuple[int, ...]] = {}
        block_edges: Dict[int, Tuple[int, ...]] = {}
        block_edge_id: Dict[Tuple[int, int], int] = {}

        next_id = n + 1
        for x in range(1, omega + 1):
            size = len(classes[x]) - bm.requirements[x - 1]
            blocks[x] = tuple(range(next_id, next_id + size))
            next_id += size
            colors.extend([color_c] * size)
        for x in range(1, omega + 1):
            ids = []
            for w in blocks[x]:
                for v in classes[x]:
                    edges.append((w, v))
                    block_edge_id[(w, v)] = len(edges)
                    ids.append(len(edges))
            block_edges[x] = tuple(ids)

        c_t, d_t = next_id, next_id + 1
        colors.extend([color_c, color_d])
        edges.append((c_t, d_t))

        tm = TmInstance(graph=VertexColoredGraph(n=d_t, vertex_colors=tuple(colors), edges=tuple(edges)))
        bm_tm_map = BmTmMap(
            bm=bm,
            tm=tm,
            blocks=blocks,
            block_edges=block_edges,
            block_edge_id=block_edge_id,
            c_t=c_t,
            d_t=d_t,
            cd_edge=len(edges),
            color_c=color_c,
            color_d=color_d,
        )
        logger.debug(f"Tropical gadget: {tm.graph.n} vertices, {tm.graph.m} edges")
        return tm, bm_tm_map

    def lift_tm_to_bm(self, matching: Iterable[int], bm_tm_map: BmTmMap) -> Matching:
        """The edges of a tropical matching that belong to the original graph"""
        matching = frozenset(matching)
        tm_graph = bm_tm_map.tm.graph
        if not coverage_service.is_matching(tm_graph, matching):
            raise ContractViolation("tropical input is not a matching")
        if not matching_service.hits_all_colors(tm_graph, matching, bm_tm_map.tm.colors):
            raise ContractViolation("tropical input misses a color")

        lifted = frozenset(j for j in matching if j <= bm_tm_map.original_edge_count)
        n = bm_tm_map.bm.graph.n
        if len(lifted) != n - len(matching) + 1:
            raise InvariantViolation(f"lifted size {len(lifted)} breaks the n - |M_t| + 1 identity")
        if not self.is_feasible_bm(bm_tm_map.bm, lifted):
            raise InvariantViolation("lifted matching misses a requirement")
        return lifted

    def embed_bm_into_tm(self, matching: Iterable[int], bm_tm_map: BmTmMap) -> Matching:
        """
        Forward direction of the gadget: the matching, the pendant pair and a
        greedy assignment of each color's unmatched vertices into its block.
        """
        matching = frozenset(matching)
        bm = bm_tm_map.bm
        if not self.is_feasible_bm(bm, matching):
            raise ContractViolation("matching is not feasible for the budgeted matching instance")

        matched = coverage_service.covered_vertices(bm.graph, matching)
        embedded = set(matching)
        embedded.add(bm_tm_map.cd_edge)
        for x, block in bm_tm_map.blocks.items():
            unmatched = [v for v in bm.graph.color_class(x) if v not in matched]
            if len(unmatched) > len(block):
                raise InvariantViolation(f"color {x} has {len(unmatched)} unmatched vertices for a block of {len(block)}")
            for w, v in zip(block, unmatched):
                embedded.add(bm_tm_map.block_edge_id[(w, v)])
        return frozenset(embedded)

    # ---------------- Solvers ----------------
    def solve_bm(self, bm: BmInstance) -> Optional[Matching]:
        """Minimum-size matching meeting every color requirement"""
        reduced = self.reduce_bm_to_tm(bm)
        if reduced is None:
            return None
        tm, bm_tm_map = reduced
        tropical = matching_service.solve_tropical(tm)
        if tropical is None:
            logger.info("Tropical gadget has no color-feasible matching; budgeted instance is infeasible")
            return None
        return self.lift_tm_to_bm(tropical, bm_tm_map)

    def solve_cec(
        self, g: VertexColoredGraph, req: Union[CoverageRequirements, Sequence[int]]
    ) -> Optional[EdgeSet]:
        """Minimum-size edge set covering at least r_x vertices of every color x"""
        reduced = self.reduce_cec_to_bm(g, req)
        if reduced is None:
            return None
        bm, cec_map = reduced
        matching = self.solve_bm(bm)
        if matching is None:
            return None
        lifted = self.lift_bm_to_cec(matching, cec_map, g)
        if len(lifted) != len(matching):
            raise InvariantViolation(f"lifting an optimal matching of size {len(matching)} gave {len(lifted)} edges")
        logger.info(f"Colorful edge cover of size {len(lifted)}")
        return lifted

    def is_feasible_bm(self, bm: BmInstance, matching: Iterable[int]) -> bool:
        matching = frozenset(matching)
        return coverage_service.is_matching(bm.graph, matching) and coverage_service.is_feasible_cec(
            bm.graph, bm.requirements, matching
        )

    def _check_colors(self, g: VertexColoredGraph, omega: int) -> None:
        for v, c in enumerate(g.vertex_colors, start=1):
            if c > omega:
                raise InputError(f"vertex {v} has color {c} but only {omega} requirements are given")


# Global CEC service instance
cec_service = CecService()

reduce_cec_to_bm = cec_service.reduce_cec_to_bm
lift_bm_to_cec = cec_service.lift_bm_to_cec
reduce_bm_to_tm = cec_service.reduce_bm_to_tm
lift_tm_to_bm = cec_service.lift_tm_to_bm
embed_bm_into_tm = cec_service.embed_bm_into_tm
solve_bm = cec_service.solve_bm
solve_cec = cec_service.solve_cec
