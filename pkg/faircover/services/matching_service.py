# faircover/services/matching_service.py
import logging
from collections import Counter
from typing import Dict, FrozenSet, Iterable, List, Optional, Set

import networkx as nx

from faircover.core.config import settings
from faircover.core.exceptions import InputError, InvariantViolation
from faircover.models import Matching, TmInstance, VertexColoredGraph

logger = logging.getLogger(__name__)


class MatchingService:
    """Blossom-based matchings and the exact tropical matching solver"""

    def max_cardinality_matching(self, g: VertexColoredGraph) -> Matching:
        """Maximum-cardinality matching of a simple graph, as edge ids"""
        return self._blossom(self._to_networkx(g, {}), maxcardinality=True)

    def constrained_max_matching(self, g: VertexColoredGraph, required: Iterable[int]) -> Optional[Matching]:
        """
        Largest matching among those covering every vertex of ``required``

        Every edge weighs W * |e ∩ T| + 1 with W = n + 1. W exceeds any matching
        size, so a maximum-weight matching first maximizes the number of covered
        T-vertices and then the cardinality.

        Returns:
            The matching, or None when no matching covers all of T
        """
        targets = frozenset(required)
        for v in targets:
            if not 1 <= v <= g.n:
                raise InputError(f"vertex id {v} outside 1..{g.n}")
        if not targets:
            return self.max_cardinality_matching(g)

        heavy = g.n + 1
        weights = {
            j: heavy * ((a in targets) + (b in targets)) + 1
            for j, (a, b) in enumerate(g.edges, start=1)
        }
        matching = self._blossom(self._to_networkx(g, weights), maxcardinality=False)
        covered = set()
        for j in matching:
            covered.update(g.edges[j - 1])
        if not targets <= covered:
            logger.debug(f"No matching covers all {len(targets)} required vertices")
            return None
        return matching

    def solve_tropical(self, inst: TmInstance) -> Optional[Matching]:
        """
        Maximum matching hitting at least one vertex of every color

        Any such matching covers every vertex whose color is a singleton, so
        the best matching covering those vertices is optimal whenever it also
        hits the remaining colors; gadget-shaped instances always end there.
        Otherwise an exact branch-and-bound takes over.
        """
        g = inst.graph
        if g.n == 0:
            return frozenset()
        class_size = Counter(g.vertex_colors)
        singletons = [v for v in range(1, g.n + 1) if class_size[g.color(v)] == 1]

        base = self.constrained_max_matching(g, singletons)
        if base is None:
            logger.info("Singleton-colored vertices cannot all be matched; instance is infeasible")
            return None
        if self.hits_all_colors(g, base, class_size.keys()):
            logger.info(f"Tropical optimum of size {len(base)} found by the singleton dispatch")
            return base

        logger.info("Singleton dispatch missed a color; switching to branch-and-bound")
        return _TropicalSearch(g, self).run()

    def hits_all_colors(self, g: VertexColoredGraph, matching: Iterable[int], colors: Iterable[int]) -> bool:
        hit = set()
        for j in matching:
            a, b = g.edges[j - 1]
            hit.add(g.color(a))
            hit.add(g.color(b))
        return set(colors) <= hit

    def _to_networkx(self, g: VertexColoredGraph, weights: Dict[int, int], vertices: Optional[Set[int]] = None) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(1, g.n + 1) if vertices is None else sorted(vertices))
        for j, (a, b) in enumerate(g.edges, start=1):
            if vertices is None or (a in vertices and b in vertices):
                graph.add_edge(a, b, eid=j, weight=weights.get(j, 1))
        return graph

    def _blossom(self, graph: nx.Graph, maxcardinality: bool) -> Matching:
        pairs = nx.max_weight_matching(graph, maxcardinality=maxcardinality, weight="weight")
        return frozenset(graph[a][b]["eid"] for a, b in pairs)

    def residual_matching(self, g: VertexColoredGraph, free: Set[int]) -> Matching:
        """Maximum matching of the subgraph induced by ``free``"""
        return self._blossom(self._to_networkx(g, {}, vertices=free), maxcardinality=True)


class _TropicalSearch:
    """
    Branch on the edges touching the uncovered color with fewest free vertices.

    A node is pruned when its size plus the maximum matching of the free
    vertices cannot beat the incumbent, or when some uncovered color has no
    edge left between free vertices.
    """

    def __init__(self, g: VertexColoredGraph, matchings: MatchingService):
        self.g = g
        self.matchings = matchings
        self.best: Optional[FrozenSet[int]] = None
        self.best_size = -1
        self.nodes = 0
        self.limit = settings.tm_branch_node_limit

    def run(self) -> Optional[Matching]:
        free = set(range(1, self.g.n + 1))
        uncovered = frozenset(self.g.vertex_colors)
        self._branch([], free, uncovered)
        logger.info(f"Branch-and-bound explored {self.nodes} nodes, best size {self.best_size}")
        return self.best

    def _branch(self, chosen: List[int], free: Set[int], uncovered: FrozenSet[int]) -> None:
        self.nodes += 1
        if self.limit is not None and self.nodes > self.limit:
            raise InvariantViolation(f"tropical search exceeded {self.limit} nodes")

        residual = self.matchings.residual_matching(self.g, free)
        if len(chosen) + len(residual) <= self.best_size:
            return
        if not uncovered:
            self.best = frozenset(chosen) | residual
            self.best_size = len(self.best)
            return

        options: Dict[int, List[int]] = {x: [] for x in uncovered}
        for j, (a, b) in enumerate(self.g.edges, start=1):
            if a in free and b in free:
                for x in {self.g.color(a), self.g.color(b)} & uncovered:
                    options[x].append(j)
        if any(not edges for edges in options.values()):
            return

        def free_count(x: int) -> int:
            return sum(1 for v in free if self.g.color(v) == x)

        target = min(sorted(uncovered), key=free_count)
        for j in options[target]:
            a, b = self.g.edges[j - 1]
            self._branch(
                chosen + [j],
                free - {a, b},
                uncovered - {self.g.color(a), self.g.color(b)},
            )


# Global matching service instance
matching_service = MatchingService()

max_cardinality_matching = matching_service.max_cardinality_matching
constrained_max_matching = matching_service.constrained_max_matching
solve_tropical = matching_service.solve_tropical
