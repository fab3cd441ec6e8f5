# faircover/services/generator_service.py
import logging
import random
from typing import List, Sequence, Tuple, Union

from faircover.models import (
    AxisLine,
    BmInstance,
    ColoredPoint,
    CoverageRequirements,
    CoverPointsInstance,
    CvcEdge,
    CvcInstance,
    GeneratorConfig,
    HitLinesInstance,
    Orientation,
    TmInstance,
    VertexColoredGraph,
)

logger = logging.getLogger(__name__)


class GeneratorService:
    """Seeded random instances; the same config always yields the same instance"""

    def gen_random_cvc(self, cfg: GeneratorConfig) -> CvcInstance:
        rng = random.Random(cfg.seed)
        n = rng.randint(cfg.min_vertices, cfg.max_vertices)
        endpoints: List[Tuple[int, ...]] = list(self._random_pairs(rng, n, cfg.density))
        for v in range(1, n + 1):
            if rng.random() < cfg.pendant_rate:
                endpoints.append((v,))
        endpoints = self._cap(rng, endpoints, cfg.max_edges)
        colors = self._colors(rng, len(endpoints), cfg.num_colors)
        edges = tuple(CvcEdge(endpoints=e, color=c) for e, c in zip(endpoints, colors))

        sizes = [0] * cfg.num_colors
        for c in colors:
            sizes[c - 1] += 1
        requirements = self._requirements(rng, sizes, cfg.policy)
        logger.debug(f"Generated CVC instance: n={n}, m={len(edges)}, r={list(requirements)}")
        return CvcInstance(n=n, edges=edges, num_colors=cfg.num_colors, requirements=requirements)

    def gen_random_cec(self, cfg: GeneratorConfig) -> Tuple[VertexColoredGraph, CoverageRequirements]:
        rng = random.Random(cfg.seed)
        g = self._random_colored_graph(rng, cfg)
        degree = g.degrees()
        coverable = [0] * cfg.num_colors
        for v in range(1, g.n + 1):
            if degree[v]:
                coverable[g.color(v) - 1] += 1
        requirements = self._requirements(rng, coverable, cfg.policy)
        return g, CoverageRequirements(values=requirements)

    def gen_random_bm(self, cfg: GeneratorConfig) -> BmInstance:
        """Feasible requirements are bounded by a random maximal matching"""
        rng = random.Random(cfg.seed)
        g = self._random_colored_graph(rng, cfg)
        order = list(range(1, g.m + 1))
        rng.shuffle(order)
        matched = set()
        for j in order:
            a, b = g.edges[j - 1]
            if a not in matched and b not in matched:
                matched.update((a, b))
        reachable = [0] * cfg.num_colors
        for v in matched:
            reachable[g.color(v) - 1] += 1
        requirements = self._requirements(rng, reachable, cfg.policy)
        return BmInstance(graph=g, requirements=CoverageRequirements(values=requirements))

    def gen_random_tm(self, cfg: GeneratorConfig) -> TmInstance:
        rng = random.Random(cfg.seed)
        return TmInstance(graph=self._random_colored_graph(rng, cfg))

    def gen_random_geometry(
        self, cfg: GeneratorConfig, kind: str
    ) -> Union[CoverPointsInstance, HitLinesInstance]:
        """
        Lines on a grid_size x grid_size integer grid and points drawn from it.

        For "cover-points" the points carry colors and some of them repeat;
        for "hit-lines" the lines do.
        """
        if kind not in ("cover-points", "hit-lines"):
            raise ValueError(f"unknown geometric kind {kind!r}")
        rng = random.Random(cfg.seed)
        grid = range(cfg.grid_size)
        slots = [(Orientation.HORIZONTAL, c) for c in grid] + [(Orientation.VERTICAL, c) for c in grid]
        count = min(rng.randint(cfg.min_vertices, cfg.max_vertices), len(slots))
        slots = sorted(rng.sample(slots, count), key=lambda s: (s[0].value, s[1]))

        locations = [(x, y) for x in grid for y in grid if rng.random() < cfg.density]
        if kind == "cover-points":
            locations += [loc for loc in locations if rng.random() < cfg.pendant_rate]
        locations = self._cap(rng, locations, cfg.max_edges)

        omega = cfg.num_colors
        if kind == "cover-points":
            lines = tuple(AxisLine(orientation=o, coordinate=c) for o, c in slots)
            colors = self._colors(rng, len(locations), omega)
            points = tuple(ColoredPoint(x=x, y=y, color=c) for (x, y), c in zip(locations, colors))
            coverable = [0] * omega
            for p in points:
                if any(line.contains(p) for line in lines):
                    coverable[p.color - 1] += 1
            requirements = self._requirements(rng, coverable, cfg.policy)
            return CoverPointsInstance(lines=lines, points=points, requirements=requirements)

        colors = self._colors(rng, len(slots), omega)
        lines = tuple(AxisLine(orientation=o, coordinate=k, color=c) for (o, k), c in zip(slots, colors))
        points = tuple(ColoredPoint(x=x, y=y) for x, y in locations)
        hittable = [0] * omega
        for line in lines:
            if any(line.contains(p) for p in points):
                hittable[line.color - 1] += 1
        requirements = self._requirements(rng, hittable, cfg.policy)
        return HitLinesInstance(lines=lines, points=points, requirements=requirements)

    def _random_colored_graph(self, rng: random.Random, cfg: GeneratorConfig) -> VertexColoredGraph:
        n = rng.randint(cfg.min_vertices, cfg.max_vertices)
        edges = self._cap(rng, list(self._random_pairs(rng, n, cfg.density)), cfg.max_edges)
        colors = self._colors(rng, n, cfg.num_colors)
        return VertexColoredGraph(n=n, vertex_colors=tuple(colors), edges=tuple(edges), num_colors=cfg.num_colors)

    def _random_pairs(self, rng: random.Random, n: int, density: float):
        for u in range(1, n + 1):
            for v in range(u + 1, n + 1):
                if rng.random() < density:
                    yield (u, v)

    def _cap(self, rng: random.Random, items: list, limit) -> list:
        """Keep a random subset of at most ``limit`` items, preserving their order"""
        if limit is None or len(items) <= limit:
            return items
        keep = sorted(rng.sample(range(len(items)), limit))
        return [items[i] for i in keep]

    def _colors(self, rng: random.Random, count: int, omega: int) -> List[int]:
        """Random colors in 1..omega; every color appears once count >= omega"""
        colors = [rng.randint(1, omega) for _ in range(count)]
        if count >= omega:
            colors[:omega] = range(1, omega + 1)
            rng.shuffle(colors)
        return colors

    def _requirements(self, rng: random.Random, maxima: Sequence[int], policy: str) -> Tuple[int, ...]:
        if policy == "tight":
            return tuple(maxima)
        if policy == "random-any":
            return tuple(rng.randint(0, top + 1) for top in maxima)
        return tuple(rng.randint(0, top) for top in maxima)


# Global generator service instance
generator_service = GeneratorService()

gen_random_cvc = generator_service.gen_random_cvc
gen_random_cec = generator_service.gen_random_cec
gen_random_bm = generator_service.gen_random_bm
gen_random_tm = generator_service.gen_random_tm
gen_random_geometry = generator_service.gen_random_geometry
