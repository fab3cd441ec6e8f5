# faircover/services/geometry_service.py
import logging
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from faircover.core.exceptions import InputError
from faircover.models import (
    AxisLine,
    CecInstance,
    CecTranslation,
    ColoredPoint,
    CoverageRequirements,
    CoverPointsInstance,
    CvcEdge,
    CvcInstance,
    CvcTranslation,
    HitLinesInstance,
    Orientation,
    VertexColoredGraph,
    VertexSet,
)
from faircover.services.cec_service import cec_service
from faircover.services.cvc_service import cvc_service

logger = logging.getLogger(__name__)


class GeometryService:
    """Axis-parallel lines and points as colorful cover instances"""

    def points_lines_to_cvc(
        self, lines: Sequence[AxisLine], points: Sequence[ColoredPoint], req: Sequence[int]
    ) -> CvcTranslation:
        """
        Lines become vertices; every colored point becomes an edge between the
        lines through it, or a pendant edge when only one line passes through it.

        Args:
            lines: Candidate lines, vertex v is lines[v - 1]
            points: Colored points, duplicates kept as parallel edges
            req: Number of points of each color to cover

        Returns:
            Translation whose ``feasible`` flag is False when some color has
            fewer coverable points than required
        """
        lines, points = tuple(lines), tuple(points)
        omega = len(req)
        on_line = self._lines_through(lines, points)

        edges: List[CvcEdge] = []
        edge_points: List[int] = []
        dropped: List[int] = []
        for k, point in enumerate(points, start=1):
            if point.color is None or not 1 <= point.color <= omega:
                raise InputError(f"point {k} needs a color in 1..{omega}")
            through = on_line[k - 1]
            if not through:
                dropped.append(k)
                continue
            edges.append(CvcEdge(endpoints=tuple(through), color=point.color))
            edge_points.append(k)
        if dropped:
            logger.warning(f"Dropping {len(dropped)} points that lie on no line: {dropped}")

        instance = CvcInstance(n=len(lines), edges=tuple(edges), num_colors=omega, requirements=tuple(req))
        coverable = instance.color_class_sizes()
        feasible = all(c >= r for c, r in zip(coverable, req))
        if not feasible:
            logger.warning(f"Coverable points per color {coverable} fall short of {list(req)}")
        return CvcTranslation(
            instance=instance,
            lines=lines,
            edge_points=tuple(edge_points),
            dropped_points=tuple(dropped),
            feasible=feasible,
        )

    def lines_points_to_cec(
        self, lines: Sequence[AxisLine], points: Sequence[ColoredPoint], req: Sequence[int]
    ) -> CecTranslation:
        """
        Colored lines become vertices and distinct point locations become edges.

        A point on a single line gets a fresh dummy partner colored ω + 1 with
        requirement 0; repeated locations keep their first occurrence only.
        """
        lines, points = tuple(lines), tuple(points)
        omega = len(req)
        for v, line in enumerate(lines, start=1):
            if line.color is None or not 1 <= line.color <= omega:
                raise InputError(f"line {v} needs a color in 1..{omega}")
        on_line = self._lines_through(lines, points)

        seen = set()
        duplicates: List[int] = []
        dropped: List[int] = []
        edges: List[Tuple[int, int]] = []
        edge_points: List[int] = []
        dummies: List[int] = []
        for k, point in enumerate(points, start=1):
            if point.location in seen:
                duplicates.append(k)
                continue
            seen.add(point.location)
            through = on_line[k - 1]
            if not through:
                dropped.append(k)
                continue
            if len(through) == 1:
                dummy = len(lines) + len(dummies) + 1
                dummies.append(dummy)
                through = [through[0], dummy]
            edges.append((through[0], through[1]))
            edge_points.append(k)
        if dropped:
            logger.warning(f"Dropping {len(dropped)} points that lie on no line: {dropped}")
        if duplicates:
            logger.debug(f"Ignoring repeated point locations: {duplicates}")

        colors = [line.color for line in lines] + [omega + 1] * len(dummies)
        values = tuple(req) + ((0,) if dummies else ())
        graph = VertexColoredGraph(
            n=len(colors), vertex_colors=tuple(colors), edges=tuple(edges), num_colors=len(values)
        )
        return CecTranslation(
            instance=CecInstance(graph=graph, requirements=CoverageRequirements(values=values)),
            lines=lines,
            dummy_vertices=tuple(dummies),
            edge_points=tuple(edge_points),
            points=points,
            dropped_points=tuple(dropped),
            duplicate_points=tuple(duplicates),
        )

    def lift_cvc_solution(self, vertices: Iterable[int], translation: CvcTranslation) -> List[AxisLine]:
        result = []
        for v in sorted(set(vertices)):
            if not 1 <= v <= len(translation.lines):
                raise InputError(f"vertex id {v} is not a line of this instance")
            result.append(translation.lines[v - 1])
        return result

    def lift_cec_solution(self, edges: Iterable[int], translation: CecTranslation) -> List[ColoredPoint]:
        result = []
        for j in sorted(set(edges)):
            if not 1 <= j <= len(translation.edge_points):
                raise InputError(f"edge id {j} is not a point of this instance")
            result.append(translation.points[translation.edge_points[j - 1] - 1])
        return result

    # ---------------- Geometric recount ----------------
    def points_covered(
        self, chosen: Iterable[AxisLine], points: Sequence[ColoredPoint], num_colors: int
    ) -> List[int]:
        """Per-color number of points lying on a chosen line, repeats counted"""
        chosen = list(chosen)
        counts = [0] * num_colors
        for point in points:
            if point.color and point.color <= num_colors and any(line.contains(point) for line in chosen):
                counts[point.color - 1] += 1
        return counts

    def lines_hit(
        self, lines: Sequence[AxisLine], chosen: Iterable[ColoredPoint], num_colors: int
    ) -> List[int]:
        """Per-color number of lines passing through a chosen point"""
        chosen = list(chosen)
        counts = [0] * num_colors
        for line in lines:
            if line.color and line.color <= num_colors and any(line.contains(p) for p in chosen):
                counts[line.color - 1] += 1
        return counts

    # ---------------- Solvers ----------------
    def solve_cover_points(
        self,
        inst: CoverPointsInstance,
        solver: Optional[Callable[[CvcInstance], Optional[VertexSet]]] = None,
    ) -> Optional[List[AxisLine]]:
        """Few lines covering the required points of every color; additive pipeline by default"""
        translation = self.points_lines_to_cvc(inst.lines, inst.points, inst.requirements)
        if not translation.feasible:
            return None
        solver = solver or cvc_service.solve_additive
        vertices = solver(translation.instance)
        if vertices is None:
            return None
        return self.lift_cvc_solution(vertices, translation)

    def solve_hit_lines(self, inst: HitLinesInstance) -> Optional[List[ColoredPoint]]:
        """Minimum number of points hitting the required lines of every color"""
        translation = self.lines_points_to_cec(inst.lines, inst.points, inst.requirements)
        cec = translation.instance
        edges = cec_service.solve_cec(cec.graph, cec.requirements)
        if edges is None:
            return None
        return self.lift_cec_solution(edges, translation)

    def _lines_through(self, lines: Tuple[AxisLine, ...], points: Tuple[ColoredPoint, ...]) -> List[List[int]]:
        """For every point, the ids of the horizontal then the vertical line through it"""
        horizontal: Dict[Fraction, int] = {}
        vertical: Dict[Fraction, int] = {}
        for v, line in enumerate(lines, start=1):
            target = horizontal if line.orientation is Orientation.HORIZONTAL else vertical
            target[line.coordinate] = v
        through = []
        for point in points:
            ids = [horizontal.get(point.y), vertical.get(point.x)]
            through.append([v for v in ids if v is not None])
        return through


# Global geometry service instance
geometry_service = GeometryService()

points_lines_to_cvc = geometry_service.points_lines_to_cvc
lines_points_to_cec = geometry_service.lines_points_to_cec
lift_cvc_solution = geometry_service.lift_cvc_solution
lift_cec_solution = geometry_service.lift_cec_solution
