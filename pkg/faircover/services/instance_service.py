# faircover/services/instance_service.py
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError

from faircover.core.exceptions import InputError
from faircover.models import (
    AxisLine,
    BmInstance,
    CecInstance,
    ColoredPoint,
    CoverageRequirements,
    CoverPointsInstance,
    CvcEdge,
    CvcInstance,
    HitLinesInstance,
    Instance,
    Orientation,
    ProblemKind,
    TmInstance,
    VertexColoredGraph,
    format_fraction,
    to_fraction,
)

logger = logging.getLogger(__name__)

SINGLE_SECTIONS = ("vertices", "colors", "require")

ALLOWED = {
    "cvc": {"vertices", "colors", "require", "edge"},
    "cec": {"vertices", "colors", "require", "vcolor", "edge"},
    "bm": {"vertices", "colors", "require", "vcolor", "edge"},
    "tm": {"vertices", "colors", "vcolor", "edge"},
    "cover-points": {"colors", "require", "line", "point"},
    "hit-lines": {"colors", "require", "line", "point"},
}


@dataclass
class _Directive:
    line: int
    args: List[str]


class InstanceService:
    """Line-oriented instance files: `problem <kind>` header, one directive per line, `#` comments"""

    def parse_instance(self, text: str) -> Instance:
        """
        Parse an instance file.

        Raises:
            InputError: with the offending line number for syntax errors,
                out-of-range ids and repeated or missing sections
        """
        kind, sections, lists = self._tokenize(text)
        try:
            if kind == "cvc":
                return self._build_cvc(sections, lists)
            if kind in ("cec", "bm"):
                return self._build_cec(kind, sections, lists)
            if kind == "tm":
                return self._build_tm(sections, lists)
            return self._build_geometry(kind, sections, lists)
        except ValidationError as e:
            raise InputError(f"invalid {kind} instance: {e.errors()[0]['msg']}") from e

    def serialize_instance(self, inst: Instance) -> str:
        kind = self.problem_kind(inst)
        out = [f"problem {kind}"]
        if isinstance(inst, CvcInstance):
            out += [f"vertices {inst.n}", f"colors {inst.num_colors}", self._require(inst.requirements)]
            for edge in inst.edges:
                u, v = (edge.endpoints[0], "-") if edge.is_pendant else edge.endpoints
                out.append(f"edge {u} {v} {edge.color}")
        elif isinstance(inst, (CecInstance, TmInstance)):
            g = inst.graph
            out.append(f"vertices {g.n}")
            if isinstance(inst, CecInstance):
                out += [f"colors {len(inst.requirements)}", self._require(inst.requirements)]
            elif g.num_colors is not None:
                out.append(f"colors {g.num_colors}")
            out += [f"vcolor {v} {c}" for v, c in enumerate(g.vertex_colors, start=1)]
            out += [f"edge {a} {b}" for a, b in g.edges]
        else:
            out.append(self._require(inst.requirements))
            for line in inst.lines:
                color = "" if line.color is None else f" {line.color}"
                out.append(f"line {line.orientation.value} {format_fraction(line.coordinate)}{color}")
            for p in inst.points:
                color = "" if p.color is None else f" {p.color}"
                out.append(f"point {format_fraction(p.x)} {format_fraction(p.y)}{color}")
        return "\n".join(out) + "\n"

    def problem_kind(self, inst: Instance) -> ProblemKind:
        if isinstance(inst, CvcInstance):
            return "cvc"
        if isinstance(inst, BmInstance):
            return "bm"
        if isinstance(inst, CecInstance):
            return "cec"
        if isinstance(inst, TmInstance):
            return "tm"
        if isinstance(inst, CoverPointsInstance):
            return "cover-points"
        if isinstance(inst, HitLinesInstance):
            return "hit-lines"
        raise InputError(f"not an instance: {type(inst).__name__}")

    # ---------------- Tokenizing ----------------
    def _tokenize(self, text: str) -> Tuple[str, Dict[str, _Directive], Dict[str, List[_Directive]]]:
        kind: Optional[str] = None
        sections: Dict[str, _Directive] = {}
        lists: Dict[str, List[_Directive]] = {"edge": [], "vcolor": [], "line": [], "point": []}

        for lineno, raw in enumerate(text.splitlines(), start=1):
            tokens = raw.split("#", 1)[0].split()
            if not tokens:
                continue
            keyword, args = tokens[0], tokens[1:]
            if kind is None:
                if keyword != "problem":
                    raise InputError("missing problem header", line=lineno)
                if len(args) != 1 or args[0] not in ALLOWED:
                    raise InputError(f"unknown problem kind {' '.join(args)!r}", line=lineno)
                kind = args[0]
                continue
            if keyword == "problem":
                raise InputError("second problem header", line=lineno)
            if keyword not in ALLOWED[kind]:
                raise InputError(f"unexpected directive {keyword!r} in a {kind} file", line=lineno)
            if keyword in SINGLE_SECTIONS:
                if keyword in sections:
                    raise InputError(
                        f"duplicate {keyword!r} section (first on line {sections[keyword].line})", line=lineno
                    )
                sections[keyword] = _Directive(lineno, args)
            else:
                lists[keyword].append(_Directive(lineno, args))

        if kind is None:
            raise InputError("missing problem header")
        logger.debug(f"Tokenized {kind} file: {sum(len(v) for v in lists.values())} item lines")
        return kind, sections, lists

    # ---------------- Builders ----------------
    def _build_cvc(self, sections, lists) -> CvcInstance:
        n = self._single_int(sections, "vertices")
        omega = self._single_int(sections, "colors", minimum=1)
        requirements = self._requirements(sections, omega)
        edges = []
        for d in lists["edge"]:
            self._arity(d, 3, "edge <u> <v> <color>")
            u = self._id(d, d.args[0], n, "vertex")
            color = self._id(d, d.args[2], omega, "color")
            if d.args[1] == "-":
                endpoints: Tuple[int, ...] = (u,)
            else:
                v = self._id(d, d.args[1], n, "vertex")
                if u == v:
                    raise InputError(f"self-loop at vertex {u}; write 'edge {u} - {color}' for a pendant edge",
                                     line=d.line)
                endpoints = (u, v)
            edges.append(CvcEdge(endpoints=endpoints, color=color))
        return CvcInstance(n=n, edges=tuple(edges), num_colors=omega, requirements=requirements)

    def _build_cec(self, kind: str, sections, lists) -> CecInstance:
        n = self._single_int(sections, "vertices")
        omega = self._single_int(sections, "colors", minimum=1)
        requirements = self._requirements(sections, omega)
        graph = self._colored_graph(n, omega, lists)
        model = BmInstance if kind == "bm" else CecInstance
        return model(graph=graph, requirements=CoverageRequirements(values=requirements))

    def _build_tm(self, sections, lists) -> TmInstance:
        n = self._single_int(sections, "vertices")
        omega = self._single_int(sections, "colors", minimum=1) if "colors" in sections else None
        return TmInstance(graph=self._colored_graph(n, omega, lists))

    def _build_geometry(self, kind: str, sections, lists):
        if "require" not in sections:
            raise InputError("missing 'require' section")
        require = sections["require"]
        omega = len(require.args)
        if omega == 0:
            raise InputError("'require' needs at least one value", line=require.line)
        if "colors" in sections:
            declared = self._single_int(sections, "colors", minimum=1)
            if declared != omega:
                raise InputError(f"require lists {omega} values but colors is {declared}", line=require.line)
        requirements = self._requirements(sections, omega)
        lines_colored = kind == "hit-lines"

        lines = []
        for d in lists["line"]:
            if len(d.args) not in (2, 3):
                raise InputError("expected 'line h|v <coord> [color]'", line=d.line)
            try:
                orientation = Orientation(d.args[0])
            except ValueError:
                raise InputError(f"line orientation must be 'h' or 'v', got {d.args[0]!r}", line=d.line)
            color = self._optional_color(d, d.args[2:], omega, lines_colored, "line")
            lines.append(AxisLine(orientation=orientation, coordinate=self._rational(d, d.args[1]), color=color))
        seen = {}
        for d, line in zip(lists["line"], lines):
            key = (line.orientation, line.coordinate)
            if key in seen:
                raise InputError(f"{line.label()} already declared on line {seen[key]}", line=d.line)
            seen[key] = d.line

        points = []
        for d in lists["point"]:
            if len(d.args) not in (2, 3):
                raise InputError("expected 'point <x> <y> [color]'", line=d.line)
            color = self._optional_color(d, d.args[2:], omega, not lines_colored, "point")
            points.append(ColoredPoint(x=self._rational(d, d.args[0]), y=self._rational(d, d.args[1]), color=color))

        model = HitLinesInstance if lines_colored else CoverPointsInstance
        return model(lines=tuple(lines), points=tuple(points), requirements=requirements)

    def _colored_graph(self, n: int, omega: Optional[int], lists) -> VertexColoredGraph:
        colors: Dict[int, int] = {}
        for d in lists["vcolor"]:
            self._arity(d, 2, "vcolor <v> <color>")
            v = self._id(d, d.args[0], n, "vertex")
            if v in colors:
                raise InputError(f"vertex {v} colored twice", line=d.line)
            colors[v] = self._id(d, d.args[1], omega, "color")
        missing = [v for v in range(1, n + 1) if v not in colors]
        if missing:
            raise InputError(f"no vcolor line for vertices {missing}")

        edges = []
        seen = set()
        for d in lists["edge"]:
            self._arity(d, 2, "edge <u> <v>")
            u = self._id(d, d.args[0], n, "vertex")
            v = self._id(d, d.args[1], n, "vertex")
            if u == v:
                raise InputError(f"self-loop at vertex {u}", line=d.line)
            pair = (min(u, v), max(u, v))
            if pair in seen:
                raise InputError(f"duplicate edge {u} {v}", line=d.line)
            seen.add(pair)
            edges.append((u, v))
        return VertexColoredGraph(
            n=n, vertex_colors=tuple(colors[v] for v in range(1, n + 1)), edges=tuple(edges), num_colors=omega
        )

    # ---------------- Field helpers ----------------
    def _single_int(self, sections, name: str, minimum: int = 0) -> int:
        if name not in sections:
            raise InputError(f"missing {name!r} section")
        d = sections[name]
        self._arity(d, 1, f"{name} <count>")
        value = self._int(d, d.args[0])
        if value < minimum:
            raise InputError(f"{name} must be at least {minimum}", line=d.line)
        return value

    def _requirements(self, sections, omega: int) -> Tuple[int, ...]:
        if "require" not in sections:
            raise InputError("missing 'require' section")
        d = sections["require"]
        if len(d.args) != omega:
            raise InputError(f"require lists {len(d.args)} values for {omega} colors", line=d.line)
        values = tuple(self._int(d, token) for token in d.args)
        if any(r < 0 for r in values):
            raise InputError("requirements must be non-negative", line=d.line)
        return values

    def _optional_color(self, d: _Directive, extra: List[str], omega: int, wanted: bool, what: str) -> Optional[int]:
        if wanted and not extra:
            raise InputError(f"{what} needs a color in this problem", line=d.line)
        if not wanted and extra:
            raise InputError(f"{what} colors are not allowed in this problem", line=d.line)
        return self._id(d, extra[0], omega, "color") if extra else None

    def _arity(self, d: _Directive, count: int, usage: str) -> None:
        if len(d.args) != count:
            raise InputError(f"expected '{usage}'", line=d.line)

    def _int(self, d: _Directive, token: str) -> int:
        try:
            return int(token)
        except ValueError:
            raise InputError(f"expected an integer, got {token!r}", line=d.line)

    def _id(self, d: _Directive, token: str, upper: Optional[int], what: str) -> int:
        value = self._int(d, token)
        if value < 1 or (upper is not None and value > upper):
            bound = "" if upper is None else f"..{upper}"
            raise InputError(f"{what} id {value} outside 1{bound}", line=d.line)
        return value

    def _rational(self, d: _Directive, token: str):
        try:
            return to_fraction(token)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"expected an integer or p/q rational, got {token!r}", line=d.line)

    def _require(self, values) -> str:
        return "require " + " ".join(str(r) for r in values)


# Global instance service
instance_service = InstanceService()

parse_instance = instance_service.parse_instance
serialize_instance = instance_service.serialize_instance
