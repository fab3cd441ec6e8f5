# faircover/models/__init__.py
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


VertexSet = FrozenSet[int]
EdgeSet = FrozenSet[int]
Matching = FrozenSet[int]


def to_fraction(value) -> Fraction:
    """Exact conversion for ints, Fractions and "p/q" strings"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def format_fraction(value: Fraction) -> str:
    value = to_fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ---------------- Graphs ----------------
class CvcEdge(FrozenModel):
    """An edge of a colorful vertex cover instance; one endpoint means a pendant edge"""
    endpoints: Tuple[int, ...]
    color: int

    @field_validator("endpoints")
    @classmethod
    def _check_endpoints(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(v) not in (1, 2):
            raise ValueError(f"edge must have 1 or 2 endpoints, got {len(v)}")
        if len(v) == 2:
            if v[0] == v[1]:
                raise ValueError(f"self-loop at vertex {v[0]}; use a pendant edge instead")
            v = tuple(sorted(v))
        return v

    @property
    def is_pendant(self) -> bool:
        return len(self.endpoints) == 1


class CvcInstance(FrozenModel):
    """Edge-colored multigraph with per-color coverage requirements"""
    n: int = Field(ge=0)
    edges: Tuple[CvcEdge, ...] = ()
    num_colors: int = Field(ge=1)
    requirements: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_ids(self) -> "CvcInstance":
        if len(self.requirements) != self.num_colors:
            raise ValueError(f"expected {self.num_colors} requirements, got {len(self.requirements)}")
        if any(r < 0 for r in self.requirements):
            raise ValueError("requirements must be non-negative")
        for j, edge in enumerate(self.edges, start=1):
            if not 1 <= edge.color <= self.num_colors:
                raise ValueError(f"edge {j} has color {edge.color} outside 1..{self.num_colors}")
            for v in edge.endpoints:
                if not 1 <= v <= self.n:
                    raise ValueError(f"edge {j} has endpoint {v} outside 1..{self.n}")
        return self

    @property
    def m(self) -> int:
        return len(self.edges)

    def color_class(self, t: int) -> List[int]:
        """Edge ids (1-based) of color t"""
        return [j for j, e in enumerate(self.edges, start=1) if e.color == t]

    def color_class_sizes(self) -> List[int]:
        sizes = [0] * self.num_colors
        for e in self.edges:
            sizes[e.color - 1] += 1
        return sizes


class VertexColoredGraph(FrozenModel):
    """Simple graph with one color per vertex; edges are stored as sorted pairs"""
    n: int = Field(ge=0)
    vertex_colors: Tuple[int, ...]
    edges: Tuple[Tuple[int, int], ...] = ()
    num_colors: Optional[int] = None

    @field_validator("edges")
    @classmethod
    def _normalize_edges(cls, v: Tuple[Tuple[int, int], ...]) -> Tuple[Tuple[int, int], ...]:
        seen = set()
        normalized = []
        for j, (a, b) in enumerate(v, start=1):
            if a == b:
                raise ValueError(f"edge {j} is a self-loop at vertex {a}")
            pair = (a, b) if a < b else (b, a)
            if pair in seen:
                raise ValueError(f"edge {j} duplicates {pair}")
            seen.add(pair)
            normalized.append(pair)
        return tuple(normalized)

    @model_validator(mode="after")
    def _check_ids(self) -> "VertexColoredGraph":
        if len(self.vertex_colors) != self.n:
            raise ValueError(f"expected {self.n} vertex colors, got {len(self.vertex_colors)}")
        for v, c in enumerate(self.vertex_colors, start=1):
            if c < 1:
                raise ValueError(f"vertex {v} has non-positive color {c}")
            if self.num_colors is not None and c > self.num_colors:
                raise ValueError(f"vertex {v} has color {c} outside 1..{self.num_colors}")
        for j, (a, b) in enumerate(self.edges, start=1):
            if not (1 <= a <= self.n and 1 <= b <= self.n):
                raise ValueError(f"edge {j} has an endpoint outside 1..{self.n}")
        return self

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def color_count(self) -> int:
        if self.num_colors is not None:
            return self.num_colors
        return max(self.vertex_colors, default=0)

    def color(self, v: int) -> int:
        return self.vertex_colors[v - 1]

    def color_class(self, x: int) -> List[int]:
        """Vertex ids of color x"""
        return [v for v, c in enumerate(self.vertex_colors, start=1) if c == x]

    def degrees(self) -> List[int]:
        deg = [0] * (self.n + 1)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def incident_edges(self) -> Dict[int, List[int]]:
        """Vertex id -> ascending ids of its incident edges"""
        incident: Dict[int, List[int]] = {v: [] for v in range(1, self.n + 1)}
        for j, (a, b) in enumerate(self.edges, start=1):
            incident[a].append(j)
            incident[b].append(j)
        return incident


class CoverageRequirements(FrozenModel):
    """Per-color targets r_1..r_ω"""
    values: Tuple[int, ...]

    @field_validator("values")
    @classmethod
    def _non_negative(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(r < 0 for r in v):
            raise ValueError("requirements must be non-negative")
        return v

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, t: int) -> int:
        return self.values[t]

    def __iter__(self):
        return iter(self.values)


def as_requirements(req: Union[CoverageRequirements, Sequence[int]]) -> CoverageRequirements:
    if isinstance(req, CoverageRequirements):
        return req
    return CoverageRequirements(values=tuple(req))


class CecInstance(FrozenModel):
    """Colorful edge cover input: vertex-colored graph plus requirements"""
    graph: VertexColoredGraph
    requirements: CoverageRequirements

    @model_validator(mode="after")
    def _colors_in_range(self) -> "CecInstance":
        omega = len(self.requirements)
        for v, c in enumerate(self.graph.vertex_colors, start=1):
            if c > omega:
                raise ValueError(f"vertex {v} has color {c} but only {omega} requirements are given")
        return self


class BmInstance(CecInstance):
    """Budgeted matching input; same shape as a colorful edge cover instance"""


class TmInstance(FrozenModel):
    """Tropical matching input: every color id in use must be hit by the matching"""
    graph: VertexColoredGraph

    @property
    def colors(self) -> List[int]:
        return sorted(set(self.graph.vertex_colors))


# ---------------- Linear programs ----------------
class Relation(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class Sense(str, Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _fraction_map(v) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for j, a in dict(v).items():
        a = to_fraction(a)
        if a:
            out[int(j)] = a
    return out


class LinearConstraint(FrozenModel):
    """Sparse row: sum coefficients[j] * x_j <relation> rhs"""
    coefficients: Dict[int, Fraction]
    relation: Relation
    rhs: Fraction
    name: str = ""

    @field_validator("coefficients", mode="before")
    @classmethod
    def _coerce_coefficients(cls, v):
        return _fraction_map(v)

    @field_validator("rhs", mode="before")
    @classmethod
    def _coerce_rhs(cls, v):
        return to_fraction(v)

    def activity(self, values: Sequence[Fraction]) -> Fraction:
        return sum((a * values[j] for j, a in self.coefficients.items()), Fraction(0))

    def is_satisfied(self, values: Sequence[Fraction]) -> bool:
        lhs = self.activity(values)
        if self.relation is Relation.LE:
            return lhs <= self.rhs
        if self.relation is Relation.GE:
            return lhs >= self.rhs
        return lhs == self.rhs


class LinearProgram(FrozenModel):
    """LP over bounded variables; lower bounds are finite, an upper bound of None means +inf"""
    num_vars: int = Field(ge=0)
    lower: Tuple[Fraction, ...]
    upper: Tuple[Optional[Fraction], ...]
    constraints: Tuple[LinearConstraint, ...] = ()
    objective: Dict[int, Fraction] = Field(default_factory=dict)
    sense: Sense = Sense.MINIMIZE

    @field_validator("lower", mode="before")
    @classmethod
    def _coerce_lower(cls, v):
        return tuple(to_fraction(a) for a in v)

    @field_validator("upper", mode="before")
    @classmethod
    def _coerce_upper(cls, v):
        return tuple(None if a is None else to_fraction(a) for a in v)

    @field_validator("objective", mode="before")
    @classmethod
    def _coerce_objective(cls, v):
        return _fraction_map(v)

    @model_validator(mode="after")
    def _check_shape(self) -> "LinearProgram":
        if len(self.lower) != self.num_vars or len(self.upper) != self.num_vars:
            raise ValueError("bound vectors must have one entry per variable")
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if hi is not None and lo > hi:
                raise ValueError(f"variable {j} has lower bound {lo} above upper bound {hi}")
        for i, row in enumerate(self.constraints):
            for j in row.coefficients:
                if not 0 <= j < self.num_vars:
                    raise ValueError(f"row {i} references variable {j} outside 0..{self.num_vars - 1}")
        for j in self.objective:
            if not 0 <= j < self.num_vars:
                raise ValueError(f"objective references variable {j} outside 0..{self.num_vars - 1}")
        return self

    def objective_value(self, values: Sequence[Fraction]) -> Fraction:
        return sum((c * values[j] for j, c in self.objective.items()), Fraction(0))


class LpSolution(FrozenModel):
    """Solver output; tight sets hold row indices and variable indices at a bound"""
    status: LpStatus
    values: Tuple[Fraction, ...] = ()
    objective_value: Optional[Fraction] = None
    tight_rows: FrozenSet[int] = frozenset()
    tight_lower: FrozenSet[int] = frozenset()
    tight_upper: FrozenSet[int] = frozenset()
    iterations: int = 0
    duals: Tuple[Fraction, ...] = ()   # row i -> multiplier, in the sense of the stated objective

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    def fractional_indices(self) -> List[int]:
        return [j for j, v in enumerate(self.values) if v.denominator != 1]


# ---------------- Colorful vertex cover pipeline ----------------
class CvcLpMapping(FrozenModel):
    """Where each x_j, y_i and each row of the relaxation lives in the LP"""
    x_index: Tuple[int, ...]          # edge j (1-based) -> x_index[j - 1]
    y_index: Tuple[int, ...]          # vertex i (1-based) -> y_index[i - 1]
    coverage_row: Tuple[int, ...]     # color t -> coverage_row[t - 1]
    sanity_row: Tuple[int, ...]       # edge j -> sanity_row[j - 1]


class SeparatedSolution(FrozenModel):
    """Fractional solution where every edge draws its coverage from a single endpoint"""
    x_tilde: Tuple[Fraction, ...]
    y_tilde: Tuple[Fraction, ...]
    phi: Tuple[int, ...]              # edge j -> vertex id phi[j - 1]

    @property
    def cost(self) -> Fraction:
        return sum(self.y_tilde, Fraction(0))


class SparseLpData(FrozenModel):
    counts: Tuple[Tuple[int, ...], ...]   # counts[t - 1][i - 1] = m_{t,i}
    budget: Fraction
    requirements: Tuple[int, ...]


class AdditiveTrace(FrozenModel):
    """Every intermediate object of one run of the additive pipeline"""
    cvc_lp: LinearProgram
    mapping: CvcLpMapping
    lp_solution: LpSolution
    separated: SeparatedSolution
    sparse_lp: LinearProgram
    sparse_data: SparseLpData
    sparse_solution: LpSolution
    rounded: Tuple[int, ...]
    gamma: VertexSet


# ---------------- Reductions ----------------
class CecBmMap(FrozenModel):
    """Bookkeeping of the doubled graph: every surviving vertex v gets a pendant a(v)"""
    bm: BmInstance
    to_bm: Dict[int, int]              # original vertex -> BM vertex
    aux_of: Dict[int, int]             # original vertex -> BM id of a(v)
    aux_edge_owner: Dict[int, int]     # BM edge id of (v, a(v)) -> original vertex v
    bm_edge_to_original: Dict[int, int]
    extra_color: int
    removed_isolated: Tuple[int, ...]


class BmTmMap(FrozenModel):
    """Bookkeeping of the tropical gadget built from a budgeted matching instance"""
    bm: BmInstance
    tm: TmInstance
    blocks: Dict[int, Tuple[int, ...]]             # color x -> ids of V^x
    block_edges: Dict[int, Tuple[int, ...]]        # color x -> ids of E^x
    block_edge_id: Dict[Tuple[int, int], int]      # (w in V^x, v in C_x) -> edge id
    c_t: int
    d_t: int
    cd_edge: int
    color_c: int
    color_d: int

    @property
    def original_edge_count(self) -> int:
        return self.bm.graph.m


# ---------------- Geometry ----------------
class Orientation(str, Enum):
    HORIZONTAL = "h"
    VERTICAL = "v"


class AxisLine(FrozenModel):
    """Horizontal line y = coordinate or vertical line x = coordinate"""
    orientation: Orientation
    coordinate: Fraction
    color: Optional[int] = None

    @field_validator("coordinate", mode="before")
    @classmethod
    def _coerce_coordinate(cls, v):
        return to_fraction(v)

    def contains(self, point: "ColoredPoint") -> bool:
        if self.orientation is Orientation.HORIZONTAL:
            return point.y == self.coordinate
        return point.x == self.coordinate

    def label(self) -> str:
        axis = "y" if self.orientation is Orientation.HORIZONTAL else "x"
        return f"{axis}={format_fraction(self.coordinate)}"


class ColoredPoint(FrozenModel):
    x: Fraction
    y: Fraction
    color: Optional[int] = None

    @field_validator("x", "y", mode="before")
    @classmethod
    def _coerce_coordinates(cls, v):
        return to_fraction(v)

    @property
    def location(self) -> Tuple[Fraction, Fraction]:
        return (self.x, self.y)

    def label(self) -> str:
        return f"({format_fraction(self.x)}, {format_fraction(self.y)})"


def _check_distinct_lines(lines: Sequence[AxisLine]) -> None:
    seen = set()
    for k, line in enumerate(lines, start=1):
        key = (line.orientation, line.coordinate)
        if key in seen:
            raise ValueError(f"line {k} duplicates {line.label()}")
        seen.add(key)


class CoverPointsInstance(FrozenModel):
    """Colored points to be covered by a few uncolored axis-parallel lines"""
    lines: Tuple[AxisLine, ...]
    points: Tuple[ColoredPoint, ...]
    requirements: Tuple[int, ...]

    @model_validator(mode="after")
    def _check(self) -> "CoverPointsInstance":
        _check_distinct_lines(self.lines)
        omega = len(self.requirements)
        if omega < 1:
            raise ValueError("at least one color requirement is needed")
        for k, p in enumerate(self.points, start=1):
            if p.color is None or not 1 <= p.color <= omega:
                raise ValueError(f"point {k} needs a color in 1..{omega}")
        return self


class HitLinesInstance(FrozenModel):
    """Colored axis-parallel lines to be hit by a few uncolored points"""
    lines: Tuple[AxisLine, ...]
    points: Tuple[ColoredPoint, ...]
    requirements: Tuple[int, ...]

    @model_validator(mode="after")
    def _check(self) -> "HitLinesInstance":
        _check_distinct_lines(self.lines)
        omega = len(self.requirements)
        for k, line in enumerate(self.lines, start=1):
            if line.color is None or not 1 <= line.color <= omega:
                raise ValueError(f"line {k} needs a color in 1..{omega}")
        return self


class CvcTranslation(FrozenModel):
    instance: CvcInstance
    lines: Tuple[AxisLine, ...]                 # vertex id v -> lines[v - 1]
    edge_points: Tuple[int, ...]                # edge id j -> index (1-based) of its point
    dropped_points: Tuple[int, ...]
    feasible: bool


class CecTranslation(FrozenModel):
    instance: CecInstance
    lines: Tuple[AxisLine, ...]                 # vertex ids 1..len(lines) are lines
    dummy_vertices: Tuple[int, ...]
    edge_points: Tuple[int, ...]                # edge id j -> index (1-based) of its point
    points: Tuple[ColoredPoint, ...]
    dropped_points: Tuple[int, ...]
    duplicate_points: Tuple[int, ...]


# ---------------- Verification ----------------
class GeneratorConfig(FrozenModel):
    """Seeded random instance recipe"""
    seed: int = Field(ge=0, lt=2 ** 64)
    min_vertices: int = Field(default=4, ge=0)
    max_vertices: int = Field(default=8, ge=0)
    density: float = Field(default=0.4, ge=0.0, le=1.0)
    num_colors: int = Field(default=2, ge=1)
    policy: Literal["random-feasible", "random-any", "tight"] = "random-feasible"
    max_edges: Optional[int] = Field(default=None, ge=0)
    pendant_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    grid_size: int = Field(default=4, ge=1)

    @model_validator(mode="after")
    def _check_range(self) -> "GeneratorConfig":
        if self.min_vertices > self.max_vertices:
            raise ValueError("vertex-count range is empty")
        return self


# ---------------- Reports ----------------
ProblemKind = Literal["cvc", "cec", "bm", "tm", "cover-points", "hit-lines"]
Instance = Union[CvcInstance, CecInstance, BmInstance, TmInstance, CoverPointsInstance, HitLinesInstance]


class RunReport(BaseModel):
    """Machine-readable outcome of one solver run"""
    source: Optional[str] = None
    problem: Optional[ProblemKind] = None
    algorithm: Optional[str] = None
    feasible: bool = False
    solution_size: Optional[int] = None
    selected: List[Union[int, str]] = Field(default_factory=list)
    requirements: List[int] = Field(default_factory=list)
    coverage: List[int] = Field(default_factory=list)
    oracle_optimum: Optional[int] = None
    oracle_status: Optional[str] = None
    guarantee: Optional[str] = None
    guarantee_ok: Optional[bool] = None
    wall_time_ms: Optional[float] = None
    error: Optional[str] = None
    exit_code: int = 0
