# faircover/services/lp_service.py
import hashlib
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from faircover.core.config import settings
from faircover.core.exceptions import InputError, InvariantViolation
from faircover.models import (
    LinearConstraint,
    LinearProgram,
    LpSolution,
    LpStatus,
    Relation,
    Sense,
    format_fraction,
    to_fraction,
)

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


def _eliminate(row: Dict[int, Fraction], pivot_row: Dict[int, Fraction], factor: Fraction) -> None:
    """row -= factor * pivot_row, dropping exact zeros"""
    for j, a in pivot_row.items():
        v = row.get(j, ZERO) - factor * a
        if v:
            row[j] = v
        else:
            row.pop(j, None)


class _Tableau:
    """
    Canonical-form tableau of a bounded-variable LP.

    Every structural variable is shifted so its lower bound is 0. Row i reads
    sum_j rows[i][j] * x_j = rhs with rows[i][basis[i]] == 1 and no other basic
    column present. Nonbasic variables always sit at 0 or at their upper bound.
    """

    def __init__(self, lp: LinearProgram):
        self.num_structural = lp.num_vars
        self.upper: List[Optional[Fraction]] = [
            None if hi is None else hi - lo for lo, hi in zip(lp.lower, lp.upper)
        ]
        self.values: List[Fraction] = [ZERO] * lp.num_vars
        self.rows: List[Dict[int, Fraction]] = []
        self.basis: List[int] = []
        self.artificial: Set[int] = set()
        self.dual_source: List[Tuple[int, Fraction]] = []   # row -> (column, factor): dual = factor * d[column]
        self.reduced: Dict[int, Fraction] = {}
        self.iterations = 0

        for constraint in lp.constraints:
            coeffs = dict(constraint.coefficients)
            rhs = constraint.rhs - sum((a * lp.lower[j] for j, a in coeffs.items()), ZERO)
            slack_sign = {Relation.LE: 1, Relation.GE: -1}.get(constraint.relation)
            slack = None
            if slack_sign is not None:
                slack = self._new_column()
                coeffs[slack] = Fraction(slack_sign)

            if slack is not None and (rhs == 0 or (rhs > 0) == (slack_sign > 0)):
                if slack_sign < 0:
                    coeffs = {j: -a for j, a in coeffs.items()}
                    rhs = -rhs
                basic = slack
                self.dual_source.append((slack, Fraction(-slack_sign)))
            else:
                sign = -1 if rhs < 0 else 1
                if sign < 0:
                    coeffs = {j: -a for j, a in coeffs.items()}
                    rhs = -rhs
                basic = self._new_column()
                self.artificial.add(basic)
                coeffs[basic] = ONE
                if slack is not None:
                    self.dual_source.append((slack, Fraction(-slack_sign)))
                else:
                    self.dual_source.append((basic, Fraction(-sign)))
            self.rows.append(coeffs)
            self.basis.append(basic)
            self.values[basic] = rhs

    def _new_column(self) -> int:
        self.upper.append(None)
        self.values.append(ZERO)
        return len(self.values) - 1

    def solve(self, objective: Dict[int, Fraction], pricing: str) -> LpStatus:
        """Phase 1 on the artificial sum, then phase 2 minimizing ``objective``"""
        if self.artificial:
            costs = {a: ONE for a in self.artificial}
            d = self._reduced_costs(costs)
            self._run(d, pricing)
            infeasibility = sum((self.values[a] for a in self.artificial), ZERO)
            logger.debug(f"Phase 1 finished after {self.iterations} steps, infeasibility {infeasibility}")
            if infeasibility > 0:
                return LpStatus.INFEASIBLE
            self._drive_out_artificials()
            for a in self.artificial:
                self.upper[a] = ZERO

        self.reduced = self._reduced_costs(objective)
        return self._run(self.reduced, pricing)

    def duals(self) -> List[Fraction]:
        """Row multipliers of the minimization, read off the reduced costs of slack or artificial columns"""
        return [factor * self.reduced.get(column, ZERO) for column, factor in self.dual_source]

    def _reduced_costs(self, costs: Dict[int, Fraction]) -> Dict[int, Fraction]:
        d = dict(costs)
        for i, row in enumerate(self.rows):
            cb = costs.get(self.basis[i])
            if cb:
                _eliminate(d, row, cb)
        return d

    def _run(self, d: Dict[int, Fraction], pricing: str) -> LpStatus:
        degenerate = False
        while True:
            choice = self._entering(d, bland=pricing == "bland" or degenerate)
            if choice is None:
                return LpStatus.OPTIMAL
            q, direction = choice
            step = self._step(q, direction, d)
            if step is None:
                return LpStatus.UNBOUNDED
            degenerate = step == 0

    def _entering(self, d: Dict[int, Fraction], bland: bool) -> Optional[Tuple[int, int]]:
        best: Optional[Tuple[int, int]] = None
        best_score = ZERO
        for j in sorted(d):
            dj = d[j]
            upper = self.upper[j]
            if upper == 0:
                continue
            value = self.values[j]
            if dj < 0 and value == 0:
                direction = 1
            elif dj > 0 and upper is not None and value == upper:
                direction = -1
            else:
                continue
            if bland:
                return j, direction
            if abs(dj) > best_score:
                best, best_score = (j, direction), abs(dj)
        return best

    def _step(self, q: int, direction: int, d: Dict[int, Fraction]) -> Optional[Fraction]:
        """Move x_q as far as the bounds allow; returns the step length or None if unbounded"""
        step = self.upper[q]
        leave_row: Optional[int] = None
        leave_key = q
        for i, row in enumerate(self.rows):
            a = row.get(q)
            if not a:
                continue
            rate = -a * direction
            b = self.basis[i]
            if rate < 0:
                limit = self.values[b] / -rate
            else:
                ub = self.upper[b]
                if ub is None:
                    continue
                limit = (ub - self.values[b]) / rate
            if step is None or limit < step or (limit == step and b < leave_key):
                step, leave_row, leave_key = limit, i, b

        if step is None:
            return None
        if step:
            self.values[q] += direction * step
            for i, row in enumerate(self.rows):
                a = row.get(q)
                if a:
                    self.values[self.basis[i]] -= a * direction * step
        if leave_row is not None:
            self._pivot(leave_row, q, d)
        self.iterations += 1
        return step

    def _pivot(self, r: int, q: int, d: Optional[Dict[int, Fraction]]) -> None:
        pivot_row = self.rows[r]
        piv = pivot_row[q]
        if piv != 1:
            pivot_row = {j: a / piv for j, a in pivot_row.items()}
            self.rows[r] = pivot_row
        for i, row in enumerate(self.rows):
            if i != r:
                f = row.get(q)
                if f:
                    _eliminate(row, pivot_row, f)
        if d is not None:
            f = d.get(q)
            if f:
                _eliminate(d, pivot_row, f)
        self.basis[r] = q

    def _drive_out_artificials(self) -> None:
        for r, b in enumerate(self.basis):
            if b not in self.artificial:
                continue
            candidates = [j for j in self.rows[r] if j not in self.artificial]
            if candidates:
                self._pivot(r, min(candidates), None)
            else:
                logger.debug(f"Row {r} is redundant; its artificial stays basic at 0")


class LpService:
    """Exact rational simplex returning extreme-point optima"""

    def solve_to_optimal_basic(self, lp: LinearProgram, dump_dir: Optional[str] = None) -> LpSolution:
        """
        Solve an LP exactly and return an optimal basic feasible solution

        Args:
            lp: Linear program with finite lower bounds
            dump_dir: Write the LP here before solving; defaults to ``settings.lp_dump_dir``

        Returns:
            LpSolution whose status is optimal, infeasible or unbounded
        """
        if not isinstance(lp, LinearProgram):
            raise InputError(f"expected a LinearProgram, got {type(lp).__name__}")
        self.write_dump(lp, dump_dir)
        return self.optimize(lp)

    def optimize(self, lp: LinearProgram) -> LpSolution:
        """The simplex itself, without the dump side effect"""
        logger.debug(f"Solving LP: {lp.num_vars} variables, {len(lp.constraints)} rows, {lp.sense.value}")
        objective = dict(lp.objective)
        if lp.sense is Sense.MAXIMIZE:
            objective = {j: -c for j, c in objective.items()}

        tableau = _Tableau(lp)
        status = tableau.solve(objective, settings.lp_pricing)
        if status is not LpStatus.OPTIMAL:
            logger.info(f"LP is {status.value} after {tableau.iterations} steps")
            return LpSolution(status=status, iterations=tableau.iterations)

        values = tuple(lo + tableau.values[j] for j, lo in enumerate(lp.lower))
        duals = tableau.duals()
        if lp.sense is Sense.MAXIMIZE:
            duals = [-y for y in duals]
        logger.debug(f"LP optimal after {tableau.iterations} steps")
        return self.solution_at(lp, values, iterations=tableau.iterations, duals=duals)

    def solution_at(
        self,
        lp: LinearProgram,
        values: Sequence[Fraction],
        iterations: int = 0,
        duals: Sequence[Fraction] = (),
    ) -> LpSolution:
        """Wrap a point known to be optimal, recording its tight sets"""
        values = tuple(values)
        violations = self.violations(lp, values)
        if violations:
            raise InvariantViolation(f"solver returned an infeasible point: {violations[0]}")
        tight_rows, tight_lower, tight_upper = self._tight_sets(lp, values)
        return LpSolution(
            status=LpStatus.OPTIMAL,
            values=values,
            objective_value=lp.objective_value(values),
            tight_rows=tight_rows,
            tight_lower=tight_lower,
            tight_upper=tight_upper,
            iterations=iterations,
            duals=tuple(duals),
        )

    def verify_extreme_point(self, lp: LinearProgram, sol: LpSolution) -> bool:
        """True iff the constraints tight at ``sol`` have rank equal to the variable count"""
        if sol.status is not LpStatus.OPTIMAL or len(sol.values) != lp.num_vars:
            raise InputError("solution does not carry a value for every variable")
        violations = self.violations(lp, sol.values)
        if violations:
            raise InputError(f"solution is infeasible: {violations[0]}")

        tight_rows, tight_lower, tight_upper = self._tight_sets(lp, sol.values)
        vectors: List[Dict[int, Fraction]] = [dict(lp.constraints[i].coefficients) for i in sorted(tight_rows)]
        vectors.extend({j: ONE} for j in sorted(tight_lower | tight_upper))
        return self.rank(vectors) == lp.num_vars

    def violations(self, lp: LinearProgram, values: Sequence[Fraction]) -> List[str]:
        found = []
        for j, (v, lo, hi) in enumerate(zip(values, lp.lower, lp.upper)):
            if v < lo or (hi is not None and v > hi):
                found.append(f"variable {j} = {format_fraction(v)} outside its bounds")
        for i, row in enumerate(lp.constraints):
            if not row.is_satisfied(values):
                label = f" ({row.name})" if row.name else ""
                found.append(f"row {i}{label} violated")
        return found

    def rank(self, vectors: Iterable[Dict[int, Fraction]]) -> int:
        """Rank of sparse rational vectors by Gaussian elimination to echelon form"""
        pivots: Dict[int, Dict[int, Fraction]] = {}
        for vec in vectors:
            row = {j: a for j, a in vec.items() if a}
            while row:
                col = min(row)
                p = pivots.get(col)
                if p is None:
                    break
                _eliminate(row, p, row[col])
            if row:
                col = min(row)
                piv = row[col]
                pivots[col] = {j: a / piv for j, a in row.items()}
        return len(pivots)

    def _tight_sets(self, lp: LinearProgram, values: Sequence[Fraction]):
        tight_rows = frozenset(i for i, row in enumerate(lp.constraints) if row.activity(values) == row.rhs)
        tight_lower = frozenset(j for j, v in enumerate(values) if v == lp.lower[j])
        tight_upper = frozenset(j for j, v in enumerate(values) if lp.upper[j] is not None and v == lp.upper[j])
        return tight_rows, tight_lower, tight_upper

    # ---------------- Plain-text dump ----------------
    def dump_lp(self, lp: LinearProgram) -> str:
        """One line per objective, bound and constraint; rationals written as p/q"""
        def dense(coeffs: Dict[int, Fraction]) -> str:
            return " ".join(format_fraction(coeffs.get(j, ZERO)) for j in range(lp.num_vars))

        lines = [f"# lp {lp.num_vars} variables {len(lp.constraints)} rows"]
        lines.append(f"objective {lp.sense.value} {dense(lp.objective)}".rstrip())
        for j, (lo, hi) in enumerate(zip(lp.lower, lp.upper)):
            lines.append(f"bounds {j} {format_fraction(lo)} {'inf' if hi is None else format_fraction(hi)}")
        for row in lp.constraints:
            parts = ["row", dense(row.coefficients), row.relation.value, format_fraction(row.rhs)]
            lines.append(" ".join(p for p in parts if p))
        return "\n".join(lines) + "\n"

    def parse_lp_dump(self, text: str) -> LinearProgram:
        sense = Sense.MINIMIZE
        objective: Dict[int, Fraction] = {}
        bounds: Dict[int, Tuple[Fraction, Optional[Fraction]]] = {}
        rows: List[LinearConstraint] = []
        num_vars = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            try:
                if tokens[0] == "objective":
                    sense = Sense(tokens[1])
                    coeffs = [to_fraction(t) for t in tokens[2:]]
                    num_vars = len(coeffs)
                    objective = {j: a for j, a in enumerate(coeffs) if a}
                elif tokens[0] == "bounds":
                    hi = None if tokens[3] == "inf" else to_fraction(tokens[3])
                    bounds[int(tokens[1])] = (to_fraction(tokens[2]), hi)
                elif tokens[0] == "row":
                    coeffs = [to_fraction(t) for t in tokens[1:-2]]
                    rows.append(LinearConstraint(
                        coefficients={j: a for j, a in enumerate(coeffs) if a},
                        relation=Relation(tokens[-2]),
                        rhs=to_fraction(tokens[-1]),
                    ))
                else:
                    raise InputError(f"unknown directive '{tokens[0]}'", line=lineno)
            except (IndexError, ValueError, ZeroDivisionError) as e:
                if isinstance(e, InputError):
                    raise
                raise InputError(f"cannot parse '{line}': {e}", line=lineno)
        if num_vars is None:
            raise InputError("missing objective line")
        lower = [bounds.get(j, (ZERO, None))[0] for j in range(num_vars)]
        upper = [bounds.get(j, (ZERO, None))[1] for j in range(num_vars)]
        return LinearProgram(num_vars=num_vars, lower=lower, upper=upper,
                             constraints=tuple(rows), objective=objective, sense=sense)

    def write_dump(self, lp: LinearProgram, directory: Optional[str] = None) -> Optional[Path]:
        """Write ``lp`` under ``directory`` (or ``settings.lp_dump_dir``) as lp-<hash>.txt"""
        directory = directory or settings.lp_dump_dir
        if not directory:
            return None
        text = self.dump_lp(lp)
        path = Path(directory)
        path.mkdir(parents=True, exist_ok=True)
        target = path / f"lp-{hashlib.sha1(text.encode()).hexdigest()[:12]}.txt"
        target.write_text(text)
        logger.debug(f"LP written to {target}")
        return target


# Global LP service instance
lp_service = LpService()

solve_to_optimal_basic = lp_service.solve_to_optimal_basic
verify_extreme_point = lp_service.verify_extreme_point
dump_lp = lp_service.dump_lp
parse_lp_dump = lp_service.parse_lp_dump
