"""Bundled LP solver: exact rational simplex plus a floating-point mode.

The rational mode runs a dense two-phase primal simplex on an integer
tableau with a single running denominator (integer pivoting), so every
intermediate quantity is exact and sign tests are integer sign tests.
Bland's rule guarantees termination; the default "auto" rule uses
Dantzig pricing and falls back to Bland during degenerate stalls, which
keeps pivot counts low on the highly degenerate lifted-cut polytopes.

Objectives can be swapped on a solved tableau (`reoptimize`), which is
what makes exact Dinkelbach ratio searches cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional

from .errors import InputError

STALL_LIMIT = 40  # consecutive degenerate pivots before switching to Bland
FLOAT_TOL = 1e-9


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iteration-limit
    objective: Optional[object]
    values: dict
    pivots: int = 0
    duals: Optional[list] = None  # one per original constraint, exact mode only
    duality_gap: Optional[Fraction] = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class Simplex:
    """Two-phase primal simplex over a program's standardized rows.

    Standardization: rows scaled to integers, right-hand sides made
    nonnegative, slack/surplus columns appended, artificials for rows
    without a natural basic column.  All variables are nonnegative.
    """

    def __init__(self, program, mode: str = "rational", pivot_rule: str = "auto",
                 max_iters: int = 200_000):
        if mode not in ("rational", "float"):
            raise InputError(f"unknown mode {mode!r}")
        if pivot_rule not in ("auto", "bland", "dantzig"):
            raise InputError(f"unknown pivot rule {pivot_rule!r}")
        self.mode = mode
        self.rule = pivot_rule
        self.max_iters = max_iters
        self.program = program
        self.variables = list(program.variables)
        self.var_pos = {v: j for j, v in enumerate(self.variables)}
        self.pivots = 0
        self.tol = FLOAT_TOL if mode == "float" else 0
        self._build_tableau()

    # -- construction -----------------------------------------------------

    def _build_tableau(self):
        nv = len(self.variables)
        rows = []
        for coeffs, sense, rhs in self.program.constraints:
            vec = [Fraction(0)] * nv
            for var, c in coeffs.items():
                if var not in self.var_pos:
                    raise InputError(f"constraint references unknown variable {var!r}")
                vec[self.var_pos[var]] += Fraction(c)
            rhs = Fraction(rhs)
            sign = 1
            if rhs < 0:
                vec = [-c for c in vec]
                rhs, sign = -rhs, -1
                sense = {"<=": ">=", ">=": "<=", "==": "=="}[sense]
            rows.append((vec, sense, rhs, sign))

        self.n_slack = sum(1 for _, s, _, _ in rows if s in ("<=", ">="))
        self.n_art = sum(1 for _, s, _, _ in rows if s != "<=")
        m = len(rows)
        width = nv + self.n_slack + self.n_art + 1
        self.m, self.nv, self.width = m, nv, width
        self.rhs_col = width - 1
        self.art_cols = set()

        T = []
        basis = []
        slack_at = nv
        art_at = nv + self.n_slack
        # per remaining row: (original constraint index, scale, sign, unit col, unit sign)
        self.row_meta = []
        for orig, (vec, sense, rhs, sign) in enumerate(rows):
            scale = lcm(rhs.denominator, *(c.denominator for c in vec)) if vec else rhs.denominator
            irow = [int(c * scale) for c in vec]
            irow += [0] * (self.n_slack + self.n_art)
            irow.append(int(rhs * scale))
            if sense == "<=":
                irow[slack_at] = 1
                basis.append(slack_at)
                self.row_meta.append((orig, scale, sign, slack_at, 1))
                slack_at += 1
            elif sense == ">=":
                irow[slack_at] = -1
                unit = (slack_at, -1)
                slack_at += 1
                irow[art_at] = 1
                basis.append(art_at)
                self.art_cols.add(art_at)
                self.row_meta.append((orig, scale, sign) + unit)
                art_at += 1
            else:
                irow[art_at] = 1
                basis.append(art_at)
                self.art_cols.add(art_at)
                self.row_meta.append((orig, scale, sign, art_at, 1))
                art_at += 1
            T.append(irow)

        # real cost row, scaled to integers
        self.obj_factor = -1 if self.program.sense == "max" else 1
        cost = [Fraction(0)] * nv
        for var, c in self.program.objective.items():
            cost[self.var_pos[var]] += self.obj_factor * Fraction(c)
        self.cost_scale = lcm(1, *(c.denominator for c in cost))
        T.append([int(c * self.cost_scale) for c in cost] + [0] * (width - nv))

        # phase-1 cost row: minimize the sum of artificials
        prow = [0] * width
        for i in range(m):
            if basis[i] in self.art_cols:
                row = T[i]
                for j in range(width):
                    prow[j] -= row[j]
        for c in self.art_cols:
            prow[c] = 0
        T.append(prow)

        if self.mode == "float":
            self.T = [[float(x) for x in row] for row in T]
            self.den = 1.0
        else:
            self.T = T
            self.den = 1
        self.basis = basis
        self.barred = set()
        # Unit columns survive row drops, so dual extraction keeps its own
        # immutable copy of the per-original-row metadata.
        self.dual_meta = list(self.row_meta)

    # -- pivoting ---------------------------------------------------------

    def _pivot(self, r: int, c: int):
        T = self.T
        prow = T[r]
        p = prow[c]
        if self.mode == "float":
            inv = 1.0 / p
            prow = T[r] = [x * inv for x in prow]
            for i in range(len(T)):
                if i == r:
                    continue
                f = T[i][c]
                if f != 0.0:
                    row = T[i]
                    new = [a - f * b for a, b in zip(row, prow)]
                    new[c] = 0.0
                    T[i] = new
        else:
            d = self.den
            for i in range(len(T)):
                if i == r:
                    continue
                row = T[i]
                f = row[c]
                if f:
                    T[i] = [(a * p - f * b) // d for a, b in zip(row, prow)]
                else:
                    T[i] = [(a * p) // d for a in row]
            self.den = p
        self.basis[r] = c
        self.pivots += 1

    def _choose_entering(self, cost_row: int, bland: bool) -> int:
        row = self.T[cost_row]
        barred = self.barred
        tol = -self.tol
        best, best_j = tol, -1
        for j in range(self.width - 1):
            v = row[j]
            if v < best and j not in barred:
                if bland:
                    return j
                best, best_j = v, j
        return best_j

    def _choose_leaving(self, c: int) -> int:
        """Min-ratio row; ties go to the smallest basis index (Bland-safe)."""
        T = self.T
        rhs = self.rhs_col
        tol = self.tol
        best_num = best_den = None
        best_i = -1
        for i in range(self.m):
            a = T[i][c]
            if a > tol:
                num = T[i][rhs]
                if best_i < 0:
                    take = True
                else:
                    l, r = num * best_den, best_num * a
                    take = l < r or (l == r and self.basis[i] < self.basis[best_i])
                if take:
                    best_num, best_den, best_i = num, a, i
        return best_i

    def _run(self, cost_row: int) -> str:
        bland = self.rule == "bland"
        stall = 0
        while self.pivots < self.max_iters:
            c = self._choose_entering(cost_row, bland)
            if c < 0:
                return "optimal"
            r = self._choose_leaving(c)
            if r < 0:
                return "unbounded"
            degenerate = self.T[r][self.rhs_col] == 0
            self._pivot(r, c)
            if self.rule == "auto":
                if degenerate:
                    stall += 1
                    if stall >= STALL_LIMIT:
                        bland = True
                else:
                    stall, bland = 0, False
        return "iteration-limit"

    # -- solving ----------------------------------------------------------

    def solve(self) -> LpResult:
        status = self._run(self.m + 1)
        if status != "optimal":
            return self._result(status)
        infeas = sum(self.T[i][self.rhs_col] for i in range(self.m)
                     if self.basis[i] in self.art_cols)
        if infeas > (1e-7 if self.mode == "float" else 0):
            return self._result("infeasible")
        self._clear_artificials()
        self._feasible_basis = True
        return self._result(self._run(self.m))

    def _clear_artificials(self):
        """Pivot basic artificials out; drop rows that turn out redundant."""
        drop = []
        for i in range(self.m):
            if self.basis[i] not in self.art_cols:
                continue
            pos, neg = -1, -1
            for j in range(self.nv + self.n_slack):
                x = self.T[i][j]
                if x > self.tol:
                    pos = j
                    break
                if neg < 0 and x < -self.tol:
                    neg = j
            if pos >= 0:
                self._pivot(i, pos)
            elif neg >= 0:
                self.T[i] = [-x for x in self.T[i]]
                self._pivot(i, neg)
            else:
                drop.append(i)
        for i in reversed(drop):
            del self.T[i]
            del self.basis[i]
            del self.row_meta[i]
            self.m -= 1
        self.barred |= self.art_cols

    def reoptimize(self, new_objective: dict, sense: Optional[str] = None) -> LpResult:
        """Swap the objective on a solved feasible tableau and re-run.

        Reduced costs are rebuilt against the current basis, so the search
        resumes from the previous optimal vertex.
        """
        if not getattr(self, "_feasible_basis", False):
            raise InputError("reoptimize needs a solved feasible tableau; call solve() first")
        self.current_objective = dict(new_objective)
        sense = sense or self.program.sense
        self.obj_factor = -1 if sense == "max" else 1
        cost = [Fraction(0)] * self.nv
        for var, c in new_objective.items():
            cost[self.var_pos[var]] += self.obj_factor * Fraction(c)
        if self.mode == "float":
            crow = [float(c) for c in cost] + [0.0] * (self.width - self.nv)
            for i in range(self.m):
                b = self.basis[i]
                cb = float(cost[b]) if b < self.nv else 0.0
                if cb != 0.0:
                    row = self.T[i]
                    crow = [a - cb * x for a, x in zip(crow, row)]
            self.cost_scale = 1
        else:
            scale = lcm(1, *(c.denominator for c in cost))
            self.cost_scale = scale
            d = self.den
            crow = [int(c * scale) * d for c in cost] + [0] * (self.width - self.nv)
            for i in range(self.m):
                b = self.basis[i]
                cb = int(cost[b] * scale) if b < self.nv else 0
                if cb:
                    row = self.T[i]
                    crow = [a - cb * x for a, x in zip(crow, row)]
        self.T[self.m] = crow
        return self._result(self._run(self.m), objective_override=self.current_objective)

    # -- results ----------------------------------------------------------

    def _value(self, raw):
        return raw if self.mode == "float" else Fraction(raw, self.den)

    def _result(self, status: str, objective_override: Optional[dict] = None) -> LpResult:
        zero = 0.0 if self.mode == "float" else Fraction(0)
        values = {v: zero for v in self.variables}
        for i in range(self.m):
            b = self.basis[i]
            if b < self.nv:
                values[self.variables[b]] = self._value(self.T[i][self.rhs_col])
        obj_coeffs = objective_override if objective_override is not None \
            else self.program.objective
        obj = None
        if status in ("optimal", "iteration-limit"):
            if self.mode == "float":
                obj = sum(float(c) * values[v] for v, c in obj_coeffs.items())
            else:
                obj = sum((Fraction(c) * values[v] for v, c in obj_coeffs.items()),
                          Fraction(0))
        duals = gap = None
        if status == "optimal" and self.mode == "rational":
            duals, gap = self._certificate(obj)
        return LpResult(status=status, objective=obj, values=values,
                        pivots=self.pivots, duals=duals, duality_gap=gap)

    def _certificate(self, primal_obj: Fraction):
        """Duals per original constraint, rebuilt from unit-column reduced costs."""
        crow = self.T[self.m]
        denom = self.den * self.cost_scale
        duals = [Fraction(0)] * len(self.program.constraints)
        dual_obj = Fraction(0)
        for orig, scale, sign, col, unit_sign in self.dual_meta:
            y_std = -unit_sign * Fraction(crow[col], denom) * self.obj_factor
            duals[orig] = y_std * scale * sign
            _, _, rhs = self.program.constraints[orig]
            dual_obj += duals[orig] * Fraction(rhs)
        gap = primal_obj - dual_obj
        return duals, gap


def solve(program, mode: str = "rational", pivot_rule: str = "auto",
          max_iters: int = 200_000) -> LpResult:
    """Solve an LpProgram; deterministic for a fixed pivot rule."""
    return Simplex(program, mode=mode, pivot_rule=pivot_rule, max_iters=max_iters).solve()


# ---------------------------------------------------------------------------
# External solver seam.  The bundled simplex stays the reference; adapters
# registered here can be picked with solve_with(engine=...), e.g. for
# cross-checking against an installed LP library.
# ---------------------------------------------------------------------------

_ENGINES = {}


def register_engine(name: str, solver_fn):
    """solver_fn(program) -> LpResult (float-precision is acceptable)."""
    _ENGINES[name] = solver_fn


def solve_with(program, engine: str = "bundled", **kwargs) -> LpResult:
    if engine == "bundled":
        return solve(program, **kwargs)
    if engine in _ENGINES:
        return _ENGINES[engine](program)
    if engine == "scipy":
        return _scipy_solve(program)
    raise InputError(f"unknown LP engine {engine!r}")


def _scipy_solve(program) -> LpResult:
    try:
        from scipy.optimize import linprog
    except ImportError as exc:  # pragma: no cover
        raise InputError("scipy engine requested but scipy is not installed") from exc
    variables = list(program.variables)
    pos = {v: j for j, v in enumerate(variables)}
    factor = -1.0 if program.sense == "max" else 1.0
    c = [0.0] * len(variables)
    for v, coef in program.objective.items():
        c[pos[v]] += factor * float(coef)
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for coeffs, sense, rhs in program.constraints:
        row = [0.0] * len(variables)
        for v, coef in coeffs.items():
            row[pos[v]] += float(coef)
        if sense == "<=":
            a_ub.append(row)
            b_ub.append(float(rhs))
        elif sense == ">=":
            a_ub.append([-x for x in row])
            b_ub.append(-float(rhs))
        else:
            a_eq.append(row)
            b_eq.append(float(rhs))
    res = linprog(c, A_ub=a_ub or None, b_ub=b_ub or None,
                  A_eq=a_eq or None, b_eq=b_eq or None,
                  bounds=[(0, None)] * len(variables), method="highs")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status,
                                                                 "iteration-limit")
    values = {v: (float(res.x[pos[v]]) if res.x is not None else 0.0)
              for v in variables}
    obj = None
    if status == "optimal":
        obj = sum(float(coef) * values[v] for v, coef in program.objective.items())
    return LpResult(status=status, objective=obj, values=values)
