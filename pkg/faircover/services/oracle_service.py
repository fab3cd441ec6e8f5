# faircover/services/oracle_service.py
import logging
from itertools import combinations
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from faircover.core.config import settings
from faircover.core.exceptions import OracleCapExceeded
from faircover.models import (
    AxisLine,
    BmInstance,
    ColoredPoint,
    CoverageRequirements,
    CoverPointsInstance,
    CvcInstance,
    EdgeSet,
    HitLinesInstance,
    Matching,
    TmInstance,
    VertexColoredGraph,
    VertexSet,
    as_requirements,
)
from faircover.services.coverage_service import coverage_service
from faircover.services.geometry_service import geometry_service
from faircover.services.matching_service import matching_service

logger = logging.getLogger(__name__)


class OracleService:
    """
    Exhaustive reference solvers.

    Minimization oracles enumerate candidate sets by increasing size in
    lexicographic order and return the first feasible one; every oracle
    refuses inputs above its cap instead of running for hours.
    """

    def brute_force_cvc(self, inst: CvcInstance, cap: Optional[int] = None) -> Optional[VertexSet]:
        self._enforce(inst.n, settings.oracle_vertex_cap if cap is None else cap, "vertices")
        for size in range(inst.n + 1):
            for subset in combinations(range(1, inst.n + 1), size):
                if coverage_service.is_feasible_cvc(inst, subset):
                    return frozenset(subset)
        return None

    def brute_force_cec(
        self,
        g: VertexColoredGraph,
        req: Union[CoverageRequirements, Sequence[int]],
        cap: Optional[int] = None,
    ) -> Optional[EdgeSet]:
        self._enforce(g.m, settings.oracle_edge_cap if cap is None else cap, "edges")
        req = as_requirements(req)
        for size in range(g.m + 1):
            for subset in combinations(range(1, g.m + 1), size):
                if coverage_service.is_feasible_cec(g, req, subset):
                    return frozenset(subset)
        return None

    def brute_force_bm(self, bm: BmInstance, cap: Optional[int] = None) -> Optional[Matching]:
        g = bm.graph
        self._enforce(g.m, settings.oracle_edge_cap if cap is None else cap, "edges")
        feasible = [
            m for m in self._all_matchings(g)
            if coverage_service.is_feasible_cec(g, bm.requirements, m)
        ]
        if not feasible:
            return None
        return frozenset(min(feasible, key=lambda m: (len(m), m)))

    def brute_force_tm(self, inst: TmInstance, cap: Optional[int] = None) -> Optional[Matching]:
        g = inst.graph
        self._enforce(g.m, settings.oracle_tm_edge_cap if cap is None else cap, "edges")
        colors = inst.colors
        best: Optional[Tuple[int, ...]] = None
        for m in self._all_matchings(g):
            if not matching_service.hits_all_colors(g, m, colors):
                continue
            if best is None or len(m) > len(best) or (len(m) == len(best) and m < best):
                best = m
        return None if best is None else frozenset(best)

    def brute_force_max_matching(self, g: VertexColoredGraph, cap: Optional[int] = None) -> Matching:
        self._enforce(g.m, settings.oracle_edge_cap if cap is None else cap, "edges")
        return frozenset(min(self._all_matchings(g), key=lambda m: (-len(m), m)))

    def brute_force_constrained_matching(
        self, g: VertexColoredGraph, required: Iterable[int], cap: Optional[int] = None
    ) -> Optional[Matching]:
        """Largest matching covering every required vertex"""
        self._enforce(g.m, settings.oracle_edge_cap if cap is None else cap, "edges")
        targets = frozenset(required)
        best: Optional[Tuple[int, ...]] = None
        for m in self._all_matchings(g):
            if not targets <= coverage_service.covered_vertices(g, m):
                continue
            if best is None or len(m) > len(best):
                best = m
        return None if best is None else frozenset(best)

    # ---------------- Geometry ----------------
    def brute_force_cover_points(
        self, inst: CoverPointsInstance, cap: Optional[int] = None
    ) -> Optional[List[AxisLine]]:
        """Fewest lines covering the required points, recounted geometrically"""
        lines = inst.lines
        self._enforce(len(lines), settings.oracle_vertex_cap if cap is None else cap, "lines")
        omega = len(inst.requirements)
        for size in range(len(lines) + 1):
            for subset in combinations(lines, size):
                counts = geometry_service.points_covered(subset, inst.points, omega)
                if all(c >= r for c, r in zip(counts, inst.requirements)):
                    return list(subset)
        return None

    def brute_force_hit_lines(
        self, inst: HitLinesInstance, cap: Optional[int] = None
    ) -> Optional[List[ColoredPoint]]:
        """Fewest points hitting the required lines, recounted geometrically"""
        candidates: List[ColoredPoint] = []
        seen = set()
        for point in inst.points:
            if point.location not in seen and any(line.contains(point) for line in inst.lines):
                seen.add(point.location)
                candidates.append(point)
        self._enforce(len(candidates), settings.oracle_edge_cap if cap is None else cap, "useful points")
        omega = len(inst.requirements)
        for size in range(len(candidates) + 1):
            for subset in combinations(candidates, size):
                counts = geometry_service.lines_hit(inst.lines, subset, omega)
                if all(c >= r for c, r in zip(counts, inst.requirements)):
                    return list(subset)
        return None

    # ---------------- Local checks ----------------
    def no_removable_vertex(self, inst: CvcInstance, vertices: Iterable[int]) -> bool:
        """True when dropping any single vertex breaks feasibility"""
        chosen = frozenset(vertices)
        return not any(coverage_service.is_feasible_cvc(inst, chosen - {v}) for v in chosen)

    def no_removable_edge(
        self, g: VertexColoredGraph, req: Union[CoverageRequirements, Sequence[int]], edges: Iterable[int]
    ) -> bool:
        chosen = frozenset(edges)
        return not any(coverage_service.is_feasible_cec(g, req, chosen - {j}) for j in chosen)

    def no_augmenting_edge(self, g: VertexColoredGraph, matching: Iterable[int]) -> bool:
        """True when no single edge can be added to the matching"""
        covered = coverage_service.covered_vertices(g, matching)
        return all(a in covered or b in covered for a, b in g.edges)

    def _all_matchings(self, g: VertexColoredGraph) -> Iterator[Tuple[int, ...]]:
        """Every matching of g as an ascending tuple of edge ids, the empty one first"""
        edges = g.edges

        def extend(start: int, used: frozenset, chosen: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
            yield chosen
            for j in range(start, len(edges) + 1):
                a, b = edges[j - 1]
                if a in used or b in used:
                    continue
                yield from extend(j + 1, used | {a, b}, chosen + (j,))

        return extend(1, frozenset(), ())

    def _enforce(self, size: int, cap: int, what: str) -> None:
        if size > cap:
            logger.info(f"Oracle cap hit: {size} {what} > {cap}")
            raise OracleCapExceeded(f"oracle refuses {size} {what}; the cap is {cap}")


# Global oracle service instance
oracle_service = OracleService()

brute_force_cvc = oracle_service.brute_force_cvc
brute_force_cec = oracle_service.brute_force_cec
brute_force_bm = oracle_service.brute_force_bm
brute_force_tm = oracle_service.brute_force_tm
