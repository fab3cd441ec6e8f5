# faircover/services/coverage_service.py
from typing import Dict, Iterable, List, Optional, Sequence, Union

from faircover.core.exceptions import InputError
from faircover.models import (
    CoverageRequirements,
    CvcInstance,
    EdgeSet,
    VertexColoredGraph,
    VertexSet,
    as_requirements,
)


class CoverageService:
    """Coverage accounting and feasibility checks shared by every solver"""

    def coverage_by_vertices(self, inst: CvcInstance, vertices: Iterable[int]) -> List[int]:
        """
        Count, per color, the edges having at least one endpoint in the vertex set

        Args:
            inst: Colorful vertex cover instance
            vertices: Selected vertex ids

        Returns:
            List whose entry t - 1 is the number of covered edges of color t
        """
        chosen = self._check_vertices(inst.n, vertices)
        counts = [0] * inst.num_colors
        for edge in inst.edges:
            if any(v in chosen for v in edge.endpoints):
                counts[edge.color - 1] += 1
        return counts

    def coverage_by_edges(self, g: VertexColoredGraph, edges: Iterable[int], num_colors: Optional[int] = None) -> List[int]:
        """
        Count, per color, the distinct vertices incident to the selected edges

        Args:
            g: Vertex-colored graph
            edges: Selected edge ids
            num_colors: Length of the result; defaults to the graph's color count

        Returns:
            List whose entry x - 1 is the number of covered vertices of color x
        """
        chosen = self._check_edges(g.m, edges)
        omega = g.color_count if num_colors is None else num_colors
        covered = set()
        for j in chosen:
            covered.update(g.edges[j - 1])
        counts = [0] * omega
        for v in covered:
            c = g.color(v)
            if c <= omega:
                counts[c - 1] += 1
        return counts

    def is_feasible_cvc(self, inst: CvcInstance, vertices: Iterable[int]) -> bool:
        counts = self.coverage_by_vertices(inst, vertices)
        return all(c >= r for c, r in zip(counts, inst.requirements))

    def is_feasible_cec(
        self,
        g: VertexColoredGraph,
        req: Union[CoverageRequirements, Sequence[int]],
        edges: Iterable[int],
    ) -> bool:
        req = as_requirements(req)
        counts = self.coverage_by_edges(g, edges, num_colors=len(req))
        return all(c >= r for c, r in zip(counts, req))

    def is_matching(self, g: VertexColoredGraph, edges: Iterable[int]) -> bool:
        seen = set()
        for j in self._check_edges(g.m, edges):
            a, b = g.edges[j - 1]
            if a in seen or b in seen:
                return False
            seen.update((a, b))
        return True

    def covered_vertices(self, g: VertexColoredGraph, edges: Iterable[int]) -> VertexSet:
        covered = set()
        for j in self._check_edges(g.m, edges):
            covered.update(g.edges[j - 1])
        return frozenset(covered)

    def normalize_to_stars(self, g: VertexColoredGraph, edges: Iterable[int]) -> EdgeSet:
        """
        Drop middle edges of 3-edge paths until the selection is a star forest.

        Scans by ascending edge id and restarts after every removal; an edge is a
        middle edge when both its endpoints have degree >= 2 inside the selection.
        """
        current = sorted(self._check_edges(g.m, edges))
        degree: Dict[int, int] = {}
        for j in current:
            for v in g.edges[j - 1]:
                degree[v] = degree.get(v, 0) + 1

        removed = True
        while removed:
            removed = False
            for j in current:
                a, b = g.edges[j - 1]
                if degree[a] >= 2 and degree[b] >= 2:
                    current.remove(j)
                    degree[a] -= 1
                    degree[b] -= 1
                    removed = True
                    break
        return frozenset(current)

    def _check_vertices(self, n: int, vertices: Iterable[int]) -> VertexSet:
        chosen = frozenset(vertices)
        for v in chosen:
            if not isinstance(v, int) or not 1 <= v <= n:
                raise InputError(f"vertex id {v} outside 1..{n}")
        return chosen

    def _check_edges(self, m: int, edges: Iterable[int]) -> EdgeSet:
        chosen = frozenset(edges)
        for j in chosen:
            if not isinstance(j, int) or not 1 <= j <= m:
                raise InputError(f"edge id {j} outside 1..{m}")
        return chosen


# Global coverage service instance
coverage_service = CoverageService()

coverage_by_vertices = coverage_service.coverage_by_vertices
coverage_by_edges = coverage_service.coverage_by_edges
is_feasible_cvc = coverage_service.is_feasible_cvc
is_feasible_cec = coverage_service.is_feasible_cec
is_matching = coverage_service.is_matching
normalize_to_stars = coverage_service.normalize_to_stars
covered_vertices = coverage_service.covered_vertices
