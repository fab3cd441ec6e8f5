# faircover/services/runner_service.py
import logging
import math
import time
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from faircover.core.exceptions import (
    ContractViolation,
    InputError,
    InvariantViolation,
    OracleCapExceeded,
)
from faircover.models import (
    CecInstance,
    CoverPointsInstance,
    CvcInstance,
    GeneratorConfig,
    HitLinesInstance,
    Instance,
    ProblemKind,
    RunReport,
    TmInstance,
    format_fraction,
    to_fraction,
)
from faircover.services.cec_service import cec_service
from faircover.services.coverage_service import coverage_service
from faircover.services.cvc_service import cvc_service
from faircover.services.generator_service import generator_service
from faircover.services.geometry_service import geometry_service
from faircover.services.instance_service import instance_service
from faircover.services.matching_service import matching_service
from faircover.services.oracle_service import oracle_service

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_INPUT_ERROR = 3
EXIT_INTERNAL_ERROR = 4

CVC_ALGORITHMS = ("cvc-additive", "cvc-eps", "cvc-greedy")

ALGORITHMS: Dict[str, Tuple[str, ...]] = {
    "cvc": CVC_ALGORITHMS + ("oracle",),
    "cover-points": CVC_ALGORITHMS + ("oracle",),
    "cec": ("cec-exact", "oracle"),
    "hit-lines": ("cec-exact", "oracle"),
    "bm": ("bm-exact", "oracle"),
    "tm": ("tm-exact", "oracle"),
}

DEFAULT_EPSILON = Fraction(1, 2)


class RunnerService:
    """Dispatch one instance to a solver and describe the outcome as a RunReport"""

    def default_algorithm(self, kind: ProblemKind) -> str:
        return ALGORITHMS[kind][0]

    def run_instance(
        self,
        inst: Instance,
        algorithm: Optional[str] = None,
        epsilon=None,
        verify: bool = False,
        source: Optional[str] = None,
        timing: bool = True,
        dump_dir: Optional[str] = None,
    ) -> RunReport:
        """
        Solve and optionally compare against the brute-force oracle.

        Errors never escape: they land in ``error`` with exit code 3 for bad
        input and 4 for broken internal guarantees. LPs of the vertex cover
        pipeline are written to ``dump_dir`` when it is given.
        """
        kind = instance_service.problem_kind(inst)
        algorithm = algorithm or self.default_algorithm(kind)
        report = RunReport(source=source, problem=kind, algorithm=algorithm)
        started = time.perf_counter()
        try:
            if algorithm not in ALGORITHMS[kind]:
                raise InputError(f"algorithm {algorithm!r} does not solve {kind}; use one of {list(ALGORITHMS[kind])}")
            eps = self._epsilon(algorithm, epsilon)
            selected, size = self._solve(inst, algorithm, eps, dump_dir)
            report.requirements = self._requirements(inst)
            if selected is None:
                report.feasible = False
                report.exit_code = EXIT_INFEASIBLE
            else:
                report.feasible = True
                report.solution_size = size
                report.selected = selected
                report.coverage = self._coverage(inst, selected)
                self._check_coverage(inst, report)
            if verify:
                self._verify(inst, algorithm, eps, report)
        except InputError as e:
            logger.error(f"Input error: {e}")
            report.error = str(e)
            report.exit_code = EXIT_INPUT_ERROR
        except (ContractViolation, InvariantViolation) as e:
            logger.error(f"Internal error: {e}")
            report.error = str(e)
            report.exit_code = EXIT_INTERNAL_ERROR
        if timing:
            report.wall_time_ms = round((time.perf_counter() - started) * 1000, 3)
        return report

    def run_text(self, text: str, source: Optional[str] = None, **options) -> RunReport:
        try:
            inst = instance_service.parse_instance(text)
        except InputError as e:
            logger.error(f"Cannot parse {source or 'input'}: {e}")
            return RunReport(source=source, algorithm=options.get("algorithm"), error=str(e),
                             exit_code=EXIT_INPUT_ERROR)
        return self.run_instance(inst, source=source, **options)

    def run_file(self, path: Path, **options) -> RunReport:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            return RunReport(source=str(path), error=f"cannot read {path}: {e.strerror}", exit_code=EXIT_INPUT_ERROR)
        return self.run_text(text, source=str(path), **options)

    def run_directory(self, directory: Path, **options) -> List[RunReport]:
        """Every *.txt and *.inst file of the directory, in sorted name order"""
        directory = Path(directory)
        if not directory.is_dir():
            raise InputError(f"{directory} is not a directory")
        files = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix in (".txt", ".inst"))
        logger.info(f"Batch run over {len(files)} files in {directory}")
        return [self.run_file(p, **options) for p in files]

    def generate(self, kind: ProblemKind, cfg: GeneratorConfig) -> Instance:
        if kind == "cvc":
            return generator_service.gen_random_cvc(cfg)
        if kind == "cec":
            g, req = generator_service.gen_random_cec(cfg)
            return CecInstance(graph=g, requirements=req)
        if kind == "bm":
            return generator_service.gen_random_bm(cfg)
        if kind == "tm":
            return generator_service.gen_random_tm(cfg)
        if kind in ("cover-points", "hit-lines"):
            return generator_service.gen_random_geometry(cfg, kind)
        raise InputError(f"unknown problem kind {kind!r}")

    # ---------------- Solving ----------------
    def _solve(
        self, inst: Instance, algorithm: str, eps: Optional[Fraction], dump_dir: Optional[str] = None
    ) -> Tuple[Optional[list], Optional[int]]:
        if algorithm == "oracle":
            return self._oracle(inst)
        if isinstance(inst, CvcInstance):
            found = self._cvc_solver(algorithm, eps, dump_dir)(inst)
            return self._ids(found)
        if isinstance(inst, CoverPointsInstance):
            lines = geometry_service.solve_cover_points(inst, self._cvc_solver(algorithm, eps, dump_dir))
            return (None, None) if lines is None else ([line.label() for line in lines], len(lines))
        if isinstance(inst, HitLinesInstance):
            points = geometry_service.solve_hit_lines(inst)
            return (None, None) if points is None else ([p.label() for p in points], len(points))
        if isinstance(inst, TmInstance):
            return self._ids(matching_service.solve_tropical(inst))
        if algorithm == "bm-exact":
            return self._ids(cec_service.solve_bm(inst))
        return self._ids(cec_service.solve_cec(inst.graph, inst.requirements))

    def _oracle(self, inst: Instance) -> Tuple[Optional[list], Optional[int]]:
        if isinstance(inst, CvcInstance):
            return self._ids(oracle_service.brute_force_cvc(inst))
        if isinstance(inst, CoverPointsInstance):
            lines = oracle_service.brute_force_cover_points(inst)
            return (None, None) if lines is None else ([line.label() for line in lines], len(lines))
        if isinstance(inst, HitLinesInstance):
            points = oracle_service.brute_force_hit_lines(inst)
            return (None, None) if points is None else ([p.label() for p in points], len(points))
        if isinstance(inst, TmInstance):
            return self._ids(oracle_service.brute_force_tm(inst))
        if instance_service.problem_kind(inst) == "bm":
            return self._ids(oracle_service.brute_force_bm(inst))
        return self._ids(oracle_service.brute_force_cec(inst.graph, inst.requirements))

    def _cvc_solver(self, algorithm: str, eps: Optional[Fraction], dump_dir: Optional[str] = None):
        if algorithm == "cvc-eps":
            return lambda inst: cvc_service.solve_eps(inst, eps, dump_dir=dump_dir)
        if algorithm == "cvc-greedy":
            return cvc_service.solve_greedy
        return lambda inst: cvc_service.solve_additive(inst, dump_dir=dump_dir)

    def _ids(self, found) -> Tuple[Optional[list], Optional[int]]:
        if found is None:
            return None, None
        return sorted(found), len(found)

    def _epsilon(self, algorithm: str, epsilon) -> Optional[Fraction]:
        if algorithm != "cvc-eps":
            return None
        try:
            eps = DEFAULT_EPSILON if epsilon is None else to_fraction(epsilon)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"epsilon must be a rational like 1/2, got {epsilon!r}")
        if eps <= 0:
            raise InputError(f"epsilon must be positive, got {format_fraction(eps)}")
        return eps

    # ---------------- Coverage ----------------
    def _requirements(self, inst: Instance) -> List[int]:
        if isinstance(inst, TmInstance):
            return []
        if isinstance(inst, CecInstance):
            return list(inst.requirements.values)
        return list(inst.requirements)

    def _coverage(self, inst: Instance, selected: list) -> List[int]:
        """Per-color coverage of the reported selection, recomputed from scratch"""
        if isinstance(inst, CvcInstance):
            return coverage_service.coverage_by_vertices(inst, selected)
        if isinstance(inst, CecInstance):
            return coverage_service.coverage_by_edges(inst.graph, selected, num_colors=len(inst.requirements))
        if isinstance(inst, TmInstance):
            return coverage_service.coverage_by_edges(inst.graph, selected)
        omega = len(inst.requirements)
        if isinstance(inst, CoverPointsInstance):
            chosen = [line for line in inst.lines if line.label() in set(selected)]
            return geometry_service.points_covered(chosen, inst.points, omega)
        chosen = [p for p in inst.points if p.label() in set(selected)]
        return geometry_service.lines_hit(inst.lines, chosen, omega)

    def _check_coverage(self, inst: Instance, report: RunReport) -> None:
        if isinstance(inst, TmInstance):
            missed = [x for x in inst.colors if report.coverage[x - 1] == 0]
            if missed:
                raise InvariantViolation(f"tropical matching misses colors {missed}")
            return
        short = [t for t, (c, r) in enumerate(zip(report.coverage, report.requirements), start=1) if c < r]
        if short:
            raise InvariantViolation(f"reported solution falls short on colors {short}")

    # ---------------- Verification ----------------
    def _verify(self, inst: Instance, algorithm: str, eps: Optional[Fraction], report: RunReport) -> None:
        try:
            _, optimum = self._oracle(inst)
        except OracleCapExceeded as e:
            report.oracle_status = f"skipped: {e}"
            return
        report.oracle_status = "infeasible" if optimum is None else "optimal"
        report.oracle_optimum = optimum
        report.guarantee = self._guarantee_text(inst, algorithm, eps)

        if optimum is None or not report.feasible:
            report.guarantee_ok = (optimum is None) == (not report.feasible)
        elif report.guarantee is None:
            report.guarantee_ok = None
        else:
            report.guarantee_ok = self._guarantee_holds(inst, algorithm, eps, report.solution_size, optimum)

        if report.guarantee_ok is False:
            raise InvariantViolation(
                f"{algorithm} returned size {report.solution_size} against oracle optimum {optimum} "
                f"({report.guarantee or 'feasibility verdicts differ'})"
            )

    def _guarantee_text(self, inst: Instance, algorithm: str, eps: Optional[Fraction]) -> Optional[str]:
        if algorithm == "cvc-additive":
            return f"size <= 2*OPT + {len(inst.requirements)}"
        if algorithm == "cvc-eps":
            return f"size <= (2 + {format_fraction(eps)})*OPT"
        if algorithm == "cvc-greedy":
            return None
        if isinstance(inst, TmInstance):
            return "size == OPT (maximum)"
        return "size == OPT"

    def _guarantee_holds(self, inst: Instance, algorithm: str, eps: Optional[Fraction], size: int, optimum: int) -> bool:
        if algorithm == "cvc-additive":
            return size <= 2 * optimum + len(inst.requirements)
        if algorithm == "cvc-eps":
            if optimum <= math.ceil(Fraction(len(inst.requirements)) / eps):
                return size == optimum
            return size <= (2 + eps) * optimum
        return size == optimum


# Global runner service instance
runner_service = RunnerService()

run_instance = runner_service.run_instance
run_file = runner_service.run_file
