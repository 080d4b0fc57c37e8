"""Maximum-weight b-matchings: LP relaxation and an exact search.

The LP is the capacitated generalization of the classic assignment
relaxation: maximize sum of w_e x_e subject to each vertex holding at most
c_v contract units and each edge used at most once. The x_e <= 1 rows are
kept as explicit constraints even when redundant so that every edge has a
dual price z_e; stable-outcome extraction needs (y, z) uniformly.

The exact side is a depth-first branch and bound over edges in id order,
guarded by an edge-count limit. Among maximum-weight matchings it returns
the one whose sorted edge-id sequence is lexicographically smallest, which
pins down snapshot tests. The bound is capacity-aware: a suffix of edges
can never contribute more than its top-k weights, where k is half the
remaining capacity units (each contract consumes one unit at both ends).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import lp
from .errors import InstanceError, TooLargeError
from .model import Coalition, Instance

EXACT_EDGE_LIMIT = 25


@dataclass(frozen=True)
class IntegralityReport:
    """LP and IP sides of the same maximum-weight b-matching problem.

    ``lp_primal`` maps edge id to its fractional value; ``dual_y`` prices
    vertex capacity, ``dual_z`` prices the per-edge unit rows. ``ip_value``
    and ``integral`` are None on reports produced by the LP side alone.
    """

    lp_value: Fraction
    lp_primal: Mapping[int, Fraction]
    dual_y: Mapping[str, Fraction]
    dual_z: Mapping[int, Fraction]
    ip_value: Fraction | None = None
    integral: bool | None = None


def _inside_edges(inst: Instance, S: Coalition) -> list[int]:
    unknown = set(S) - set(inst.vertices)
    if unknown:
        raise InstanceError(f"coalition contains unknown vertices {sorted(unknown)!r}")
    return [eid for eid, e in enumerate(inst.edges) if e.u in S and e.v in S]


def bmatching_lp(inst: Instance, S: Coalition | None = None) -> IntegralityReport:
    """Solve the fractional relaxation over the edges inside ``S``.

    Returns the LP value, the fractional primal point, and the dual prices
    (y on capacity rows, z on unit rows); vertices of ``S`` that touch no
    inside edge get y = 0.
    """
    if S is None:
        S = inst.grand_coalition
    inside = _inside_edges(inst, S)
    variables = [lp.Variable(f"x{eid}") for eid in inside]
    touched: dict[str, list[int]] = {}
    for eid in inside:
        e = inst.edges[eid]
        touched.setdefault(e.u, []).append(eid)
        touched.setdefault(e.v, []).append(eid)
    constraints = [
        lp.Constraint(
            f"cap[{v}]",
            {f"x{eid}": 1 for eid in eids},
            lp.Relation.LE,
            inst.capacity[v],
        )
        for v, eids in sorted(touched.items())
    ]
    constraints += [
        lp.Constraint(f"unit[{eid}]", {f"x{eid}": 1}, lp.Relation.LE, 1)
        for eid in inside
    ]
    objective = {f"x{eid}": inst.edges[eid].weight for eid in inside}
    sol = lp.solve(lp.LinearProgram(variables, constraints, lp.Sense.MAX, objective))
    if sol.status is not lp.Status.OPTIMAL:  # pragma: no cover - bounded, feasible
        raise InstanceError(f"matching relaxation reported {sol.status.value}")
    value = sol.objective_value if inside else Fraction(0)
    primal = {eid: sol.primal[f"x{eid}"] for eid in inside}
    dual_y = {v: sol.dual.get(f"cap[{v}]", Fraction(0)) for v in S}
    dual_z = {eid: sol.dual[f"unit[{eid}]"] for eid in inside}
    return IntegralityReport(value, primal, dual_y, dual_z)


def bmatching_exact(
    inst: Instance, S: Coalition | None = None, edge_limit: int = EXACT_EDGE_LIMIT
) -> tuple[Fraction, frozenset]:
    """Exact maximum-weight b-matching inside ``S`` by branch and bound.

    Returns ``(value, edge ids)``; among optimal matchings the returned one
    has the lexicographically smallest sorted edge-id sequence. Raises
    TooLarge when the induced edge count exceeds ``edge_limit``.
    """
    if S is None:
        S = inst.grand_coalition
    inside = _inside_edges(inst, S)
    if len(inside) > edge_limit:
        raise TooLargeError(
            f"{len(inside)} edges inside the coalition exceeds the exact-search "
            f"limit of {edge_limit}"
        )
    if not inside:
        return Fraction(0), frozenset()

    ends = [(inst.edges[eid].u, inst.edges[eid].v) for eid in inside]
    weights = [inst.edges[eid].weight for eid in inside]
    m = len(inside)

    # suffix_top[k] = weights of edges[k:] sorted descending, with prefix sums,
    # so a bound lookup is one indexing operation.
    suffix_sums: list[list[Fraction]] = []
    for k in range(m + 1):
        tail = sorted(weights[k:], reverse=True)
        acc = [Fraction(0)]
        for w in tail:
            acc.append(acc[-1] + w)
        suffix_sums.append(acc)

    caps = {v: inst.capacity[v] for v in S}
    cap_units = sum(caps.values())

    def best_from(k: int, caps: dict, cap_units: int) -> Fraction:
        """Value of the best matching using edges[k:] under residual caps."""
        best = Fraction(0)

        def dfs(i: int, cur: Fraction, units: int) -> None:
            nonlocal best
            if cur > best:
                best = cur
            if i == m:
                return
            acc = suffix_sums[i]
            room = min(len(acc) - 1, units // 2)
            if cur + acc[room] <= best:
                return
            u, v = ends[i]
            if caps[u] > 0 and caps[v] > 0:
                caps[u] -= 1
                caps[v] -= 1
                dfs(i + 1, cur + weights[i], units - 2)
                caps[u] += 1
                caps[v] += 1
            dfs(i + 1, cur, units)

        dfs(k, Fraction(0), cap_units)
        return best

    opt = best_from(0, caps, cap_units)

    # Lexicographically smallest optimal matching: walk positions left to
    # right, stopping as soon as the chosen prefix already attains the
    # optimum (a prefix precedes all of its extensions), otherwise taking
    # the smallest index whose inclusion keeps the optimum reachable.
    chosen: list[int] = []
    cur = Fraction(0)
    k = 0
    while cur != opt:
        for j in range(k, m):
            u, v = ends[j]
            if caps[u] > 0 and caps[v] > 0:
                caps[u] -= 1
                caps[v] -= 1
                cap_units -= 2
                if cur + weights[j] + best_from(j + 1, caps, cap_units) == opt:
                    cur += weights[j]
                    chosen.append(inside[j])
                    k = j + 1
                    break
                caps[u] += 1
                caps[v] += 1
                cap_units += 2
        else:  # pragma: no cover - opt is reachable by construction
            raise AssertionError("optimal completion lost during reconstruction")
    return opt, frozenset(chosen)


def integrality_report(inst: Instance, edge_limit: int = EXACT_EDGE_LIMIT) -> IntegralityReport:
    """Both sides of the relaxation on the whole instance.

    The IP value comes from the exact search when the edge count is within
    the guard; otherwise an integral LP vertex certifies ip = lp without
    enumeration, and failing both the instance is too large.
    """
    report = bmatching_lp(inst)
    if len(inst.edges) <= edge_limit:
        ip_value, _ = bmatching_exact(inst, edge_limit=edge_limit)
    elif all(x.denominator == 1 for x in report.lp_primal.values()):
        ip_value = report.lp_value
    else:
        raise TooLargeError(
            f"{len(inst.edges)} edges exceeds the exact-search limit and the "
            "relaxation vertex is fractional"
        )
    return IntegralityReport(
        lp_value=report.lp_value,
        lp_primal=report.lp_primal,
        dual_y=report.dual_y,
        dual_z=report.dual_z,
        ip_value=ip_value,
        integral=report.lp_value == ip_value,
    )
