"""Exact linear programming over the rationals.

A dense two-phase primal simplex with Bland's pivot rule. All arithmetic is
exact: inputs are `fractions.Fraction` (or int), every pivot renormalizes
rationals, and there is no floating point and no tolerance anywhere in the
solve path. The solver is deterministic: columns follow variable declaration
order, rows follow constraint declaration order, and ties in the pivot rule
are broken by lowest index, so re-solving the same program yields the same
tableau path bit for bit.

Dual values use the shadow-price convention: ``dual[row]`` is the derivative
of the optimal objective with respect to that row's right-hand side. Under
this convention a maximization problem has nonnegative duals on ``<=`` rows
and nonpositive duals on ``>=`` rows (reversed for minimization).

Every optimal solve is re-verified against the original data before it is
returned: exact primal feasibility, exact objective, the strong-duality
identity ``sum(dual * rhs) == objective``, complementary slackness on every
row, dual sign conditions, and optimality of the final reduced costs.
:func:`stats` exposes counters over these checks so a long experiment can
assert at the end that no solve ever slipped.

Pivot arithmetic uses gmpy2's ``mpq`` when available (several times faster
than ``Fraction``); values are converted back to ``Fraction`` at the API
boundary so callers never see gmpy2 types.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InfeasibleFaceError, LPError, LPInternalError

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _Q = Fraction


def _to_q(value):
    """Coerce an int/Fraction into the internal rational type."""
    if isinstance(value, int):
        return _Q(value)
    if isinstance(value, Fraction):
        return _Q(value.numerator, value.denominator)
    if isinstance(value, type(_Q(0))):
        return value
    raise LPError(f"expected an exact rational (int or Fraction), got {value!r}")


def _to_frac(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


class Sense(Enum):
    MIN = "min"
    MAX = "max"


class Relation(Enum):
    LE = "<="
    EQ = "=="
    GE = ">="


class Status(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Variable:
    """A decision variable. ``lower``/``upper`` of ``None`` mean unbounded."""

    name: str
    lower: Fraction | int | None = 0
    upper: Fraction | int | None = None


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: Mapping[str, Fraction | int]
    relation: Relation
    rhs: Fraction | int


@dataclass
class LinearProgram:
    variables: list[Variable]
    constraints: list[Constraint]
    sense: Sense
    objective: Mapping[str, Fraction | int]


@dataclass(frozen=True)
class LPSolution:
    """Result of a solve. ``dual`` maps constraint names to shadow prices.

    Bounds other than ``x >= 0`` are handled through synthesized rows named
    ``_lb[var]`` / ``_ub[var]``; their prices appear in ``dual`` as well so
    the strong-duality identity stays exact.
    """

    status: Status
    primal: dict[str, Fraction]
    dual: dict[str, Fraction]
    objective_value: Fraction | None


_STATS = {"solves": 0, "optimal": 0, "checks": 0, "check_failures": 0}


def stats() -> dict[str, int]:
    """Counters over solves and internal exactness self-checks."""
    return dict(_STATS)


def reset_stats() -> None:
    for key in _STATS:
        _STATS[key] = 0


# ---------------------------------------------------------------------------
# internal representation


class _Row:
    __slots__ = ("name", "coeffs", "relation", "rhs", "synthetic")

    def __init__(self, name, coeffs, relation, rhs, synthetic=False):
        self.name = name
        self.coeffs = coeffs  # dense list over structural columns, in _Q
        self.relation = relation
        self.rhs = rhs
        self.synthetic = synthetic


def _build_columns(variables: Sequence[Variable]):
    """Map each variable to structural columns and synthesized bound rows.

    A variable with lower bound exactly 0 becomes one nonnegative column.
    Anything else becomes a free pair (x+ - x-) plus explicit bound rows,
    which keeps the dual bookkeeping uniform: every finite bound surfaces
    as a row with its own price.
    """
    col_of_var: dict[str, list[tuple[int, int]]] = {}  # name -> [(col, sign)]
    ncols = 0
    bound_rows: list[tuple[str, str, Relation, object]] = []  # (rowname, var, rel, rhs)
    for v in variables:
        if v.lower == 0:
            col_of_var[v.name] = [(ncols, 1)]
            ncols += 1
        else:
            col_of_var[v.name] = [(ncols, 1), (ncols + 1, -1)]
            ncols += 2
            if v.lower is not None:
                bound_rows.append((f"_lb[{v.name}]", v.name, Relation.GE, _to_q(v.lower)))
        if v.upper is not None:
            bound_rows.append((f"_ub[{v.name}]", v.name, Relation.LE, _to_q(v.upper)))
    return col_of_var, ncols, bound_rows


def solve(lp: LinearProgram) -> LPSolution:
    """Solve an exact LP; see the module docstring for conventions."""
    _STATS["solves"] += 1
    names = [v.name for v in lp.variables]
    if len(set(names)) != len(names):
        raise LPError("duplicate variable name")
    name_set = set(names)
    for con in lp.constraints:
        for key in con.coeffs:
            if key not in name_set:
                raise LPError(f"constraint {con.name!r} references unknown variable {key!r}")
    for key in lp.objective:
        if key not in name_set:
            raise LPError(f"objective references unknown variable {key!r}")
    con_names = [c.name for c in lp.constraints]
    if len(set(con_names)) != len(con_names):
        raise LPError("duplicate constraint name")
    for cname in con_names:
        if cname.startswith("_lb[") or cname.startswith("_ub["):
            raise LPError(f"constraint name {cname!r} collides with synthesized bound rows")

    col_of_var, nstruct, bound_specs = _build_columns(lp.variables)

    zero = _Q(0)
    rows: list[_Row] = []
    for con in lp.constraints:
        dense = [zero] * nstruct
        for var, cv in con.coeffs.items():
            q = _to_q(cv)
            for col, sign in col_of_var[var]:
                dense[col] = q if sign == 1 else -q
        rows.append(_Row(con.name, dense, con.relation, _to_q(con.rhs)))
    for rowname, var, rel, rhs in bound_specs:
        dense = [zero] * nstruct
        for col, sign in col_of_var[var]:
            dense[col] = _Q(sign)
        rows.append(_Row(rowname, dense, rel, rhs, synthetic=True))

    cost = [zero] * nstruct
    for var, cv in lp.objective.items():
        q = _to_q(cv)
        for col, sign in col_of_var[var]:
            cost[col] = q if sign == 1 else -q
    internal_sign = 1 if lp.sense is Sense.MIN else -1
    if internal_sign == -1:
        cost = [-c for c in cost]

    status, col_values, internal_obj, row_duals_internal = _simplex(rows, cost, nstruct)

    if status is not Status.OPTIMAL:
        return LPSolution(status, {}, {}, None)

    primal: dict[str, Fraction] = {}
    for v in lp.variables:
        total = zero
        for col, sign in col_of_var[v.name]:
            total = total + col_values[col] if sign == 1 else total - col_values[col]
        primal[v.name] = _to_frac(total)
    objective_value = _to_frac(internal_obj if internal_sign == 1 else -internal_obj)

    dual: dict[str, Fraction] = {}
    for row, y in zip(rows, row_duals_internal):
        dual[row.name] = _to_frac(y if internal_sign == 1 else -y)

    solution = LPSolution(Status.OPTIMAL, primal, dual, objective_value)
    _verify(lp, rows, solution)
    _STATS["optimal"] += 1
    return solution


def _simplex(rows: list[_Row], cost, nstruct):
    """Two-phase dense simplex. Returns (status, column values, objective,
    per-row internal duals)."""
    m = len(rows)
    # Normalize into local copies (nonnegative rhs; >= rows with zero rhs
    # become <= for free); the caller's row objects stay untouched.
    flips = [1] * m
    relations: list[Relation] = []
    norm_coeffs: list[list] = []
    norm_rhs: list = []
    for i, row in enumerate(rows):
        rel = row.relation
        coeffs, rhs = row.coeffs, row.rhs
        if rhs < 0 or (rel is Relation.GE and rhs == 0):
            coeffs = [-c for c in coeffs]
            rhs = -rhs
            flips[i] = -1
            if rel is Relation.LE:
                rel = Relation.GE
            elif rel is Relation.GE:
                rel = Relation.LE
        relations.append(rel)
        norm_coeffs.append(list(coeffs))
        norm_rhs.append(rhs)

    nslack = sum(1 for r in relations if r is Relation.LE)
    nsurp = sum(1 for r in relations if r is Relation.GE)
    nart = sum(1 for r in relations if r is not Relation.LE)
    ncols = nstruct + nslack + nsurp + nart
    first_art = nstruct + nslack + nsurp

    zero = _Q(0)
    one = _Q(1)
    tableau: list[list] = []
    basis: list[int] = []
    unit_col = [0] * m  # per row: its slack or artificial column (for duals)
    s_at = nstruct
    a_at = first_art
    for i in range(m):
        line = norm_coeffs[i] + [zero] * (ncols - nstruct) + [norm_rhs[i]]
        rel = relations[i]
        if rel is Relation.LE:
            line[s_at] = one
            basis.append(s_at)
            unit_col[i] = s_at
            s_at += 1
        else:
            if rel is Relation.GE:
                line[s_at] = -one
                s_at += 1
            line[a_at] = one
            basis.append(a_at)
            unit_col[i] = a_at
            a_at += 1
        tableau.append(line)

    # Phase-2 reduced costs (basic columns all cost 0 initially) and the
    # phase-1 row (cost 1 on artificials, reduced against the basic ones).
    cost2 = list(cost) + [zero] * (ncols - nstruct) + [zero]
    cost1 = [zero] * (ncols + 1)
    for i in range(m):
        if basis[i] >= first_art:
            line = tableau[i]
            for j in range(ncols + 1):
                if line[j]:
                    cost1[j] -= line[j]
    for j in range(first_art, ncols):
        cost1[j] += one

    def pivot(pr: int, pc: int, extra_rows) -> None:
        prow = tableau[pr]
        p = prow[pc]
        if p != one:
            inv = one / p
            tableau[pr] = prow = [v * inv for v in prow]
        for line in tableau:
            if line is prow:
                continue
            f = line[pc]
            if f:
                for j in range(ncols + 1):
                    if prow[j]:
                        line[j] -= f * prow[j]
        for line in extra_rows:
            f = line[pc]
            if f:
                for j in range(ncols + 1):
                    if prow[j]:
                        line[j] -= f * prow[j]
        basis[pr] = pc

    def run(costrow, limit, extra_rows) -> bool:
        """Bland's rule loop; returns False on an unbounded ray."""
        while True:
            pc = -1
            for j in range(limit):
                if costrow[j] < 0:
                    pc = j
                    break
            if pc < 0:
                return True
            pr = -1
            best = None
            best_basis = -1
            for i in range(m):
                a = tableau[i][pc]
                if a > 0:
                    ratio = tableau[i][-1] / a
                    if best is None or ratio < best or (ratio == best and basis[i] < best_basis):
                        best, pr, best_basis = ratio, i, basis[i]
            if pr < 0:
                return False
            pivot(pr, pc, extra_rows)

    if nart:
        ok = run(cost1, ncols, [cost1, cost2])
        if not ok:
            raise LPInternalError("phase-1 objective reported unbounded")
        if cost1[-1] != 0:  # phase-1 optimum is -cost1[-1]
            return Status.INFEASIBLE, None, None, None
        # Drive leftover artificials out of the basis where possible; rows
        # that cannot pivot are redundant and keep a zero artificial basic.
        for i in range(m):
            if basis[i] >= first_art:
                line = tableau[i]
                for j in range(first_art):
                    if line[j] != 0:
                        pivot(i, j, [cost1, cost2])
                        break

    ok = run(cost2, first_art, [cost2])
    if not ok:
        return Status.UNBOUNDED, None, None, None
    for j in range(first_art):
        if cost2[j] < 0:
            raise LPInternalError("non-optimal reduced cost after phase 2")

    col_values = [zero] * ncols
    for i in range(m):
        col_values[basis[i]] = tableau[i][-1]
    internal_obj = -cost2[-1]
    duals = []
    for i in range(m):
        y = -cost2[unit_col[i]]
        if relations[i] is Relation.GE and unit_col[i] < first_art:
            raise LPInternalError("GE row lost its artificial column")
        duals.append(y * flips[i])
    return Status.OPTIMAL, col_values, internal_obj, duals


def _verify(lp: LinearProgram, rows: list[_Row], sol: LPSolution) -> None:
    """Exact post-solve audit; raises LPInternalError on any discrepancy."""
    _STATS["checks"] += 1
    try:
        x = sol.primal
        obj = Fraction(0)
        for var, cv in lp.objective.items():
            obj += Fraction(cv) * x[var]
        if obj != sol.objective_value:
            raise LPInternalError("objective mismatch against primal point")
        for v in lp.variables:
            if v.lower is not None and x[v.name] < v.lower:
                raise LPInternalError(f"lower bound violated for {v.name}")
            if v.upper is not None and x[v.name] > v.upper:
                raise LPInternalError(f"upper bound violated for {v.name}")
        duality_sum = Fraction(0)
        maximizing = lp.sense is Sense.MAX
        for con in lp.constraints:
            activity = Fraction(0)
            for var, cv in con.coeffs.items():
                activity += Fraction(cv) * x[var]
            rhs = Fraction(con.rhs)
            slack = activity - rhs
            if con.relation is Relation.LE and slack > 0:
                raise LPInternalError(f"row {con.name!r} violated")
            if con.relation is Relation.GE and slack < 0:
                raise LPInternalError(f"row {con.name!r} violated")
            if con.relation is Relation.EQ and slack != 0:
                raise LPInternalError(f"row {con.name!r} violated")
            y = sol.dual[con.name]
            if y * slack != 0:
                raise LPInternalError(f"complementary slackness fails on {con.name!r}")
            if con.relation is Relation.LE and (y < 0 if maximizing else y > 0):
                raise LPInternalError(f"dual sign wrong on {con.name!r}")
            if con.relation is Relation.GE and (y > 0 if maximizing else y < 0):
                raise LPInternalError(f"dual sign wrong on {con.name!r}")
            duality_sum += y * rhs
        for row in rows:
            if row.synthetic:
                duality_sum += sol.dual[row.name] * _to_frac(row.rhs)
        if duality_sum != sol.objective_value:
            raise LPInternalError("strong duality identity fails")
    except LPInternalError:
        _STATS["check_failures"] += 1
        raise


def max_over_face(lp: LinearProgram, fixed_value: Fraction | int, probe: Mapping[str, Fraction | int]) -> Fraction:
    """Maximize ``probe`` over the LP's face where the objective equals
    ``fixed_value`` (appends that equality and re-solves).

    Raises InfeasibleFaceError if the face is empty, i.e. ``fixed_value``
    is not attained by any feasible point.
    """
    face = face_program(lp, fixed_value, probe)
    sol = solve(face)
    if sol.status is Status.INFEASIBLE:
        raise InfeasibleFaceError(f"objective value {fixed_value} is not attainable")
    if sol.status is Status.UNBOUNDED:
        raise LPError("probe objective is unbounded on the face")
    return sol.objective_value


def face_program(lp: LinearProgram, fixed_value: Fraction | int, probe: Mapping[str, Fraction | int]) -> LinearProgram:
    """The LP whose feasible set is ``lp``'s face at ``fixed_value`` and whose
    objective is ``probe`` (maximized). Shared by max_over_face and callers
    that also need the maximizing point itself."""
    taken = {c.name for c in lp.constraints}
    pin_name = "_face"
    while pin_name in taken:
        pin_name += "+"
    pin = Constraint(pin_name, dict(lp.objective), Relation.EQ, fixed_value)
    return LinearProgram(
        variables=list(lp.variables),
        constraints=list(lp.constraints) + [pin],
        sense=Sense.MAX,
        objective=dict(probe),
    )
