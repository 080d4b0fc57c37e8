"""Stable outcomes: verification, construction, and core membership.

An outcome is stable when no non-contracted pair could both strictly gain by
signing together. Each agent's resistance is its outside share alpha_v: an
agent with spare capacity signs for free (alpha_v = 0), while a saturated
agent must abandon its least valuable contract, forfeiting its smallest
share. Stability of edge (u,v) outside the contract set means
alpha_u + alpha_v >= w_uv. With unit capacities this is exactly the
Kleinberg-Tardos condition x_u + x_v >= w_uv.

Construction goes through LP duality. On instances where the matching
relaxation has an integral optimum, the dual prices (y on vertices, z on
edges) split every contract into nonnegative shares summing to its weight
(complementary slackness), and dual feasibility makes the result stable.
When the relaxation is not integral no stable outcome exists, and the
fractional optimum is returned as the certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import lp, matching
from .errors import InstanceError, NotStableError, TooLargeError
from .model import (
    Allocation,
    Coalition,
    Instance,
    Mode,
    Outcome,
    coalition_value,
    validate_outcome,
)

ENUMERATION_VERTEX_LIMIT = 14


def _exact_edge_budget(inst: Instance) -> int:
    """Edge budget for the exact matching search on this instance.

    The search cost is governed by how many edges a matching can hold, not
    by the edge count alone: with unit capacities and few vertices even a
    complete graph enumerates in milliseconds. Dense small instances must
    stay decidable here (the relaxation can be fractional exactly when the
    instance is interesting), so the guard widens to the full edge set.
    """
    if inst.mode == Mode.GENERAL_UNIT_CAP and inst.n <= ENUMERATION_VERTEX_LIMIT:
        return max(matching.EXACT_EDGE_LIMIT, len(inst.edges))
    return matching.EXACT_EDGE_LIMIT


@dataclass(frozen=True)
class StabilityViolation:
    """A non-contract edge whose endpoints would both gain by signing."""

    edge: tuple
    slack: Fraction  # alpha_u + alpha_v - w_uv, negative here


@dataclass(frozen=True)
class NonexistenceCertificate:
    """Proof that no stable outcome exists: the relaxation beats every
    integral matching, witnessed by its fractional optimum."""

    lp_value: Fraction
    ip_value: Fraction
    fractional_witness: Mapping[int, Fraction]


def outside_shares(inst: Instance, o: Outcome) -> dict:
    """alpha_v for every vertex: 0 with spare capacity, else the smallest
    share among v's contracts."""
    degree = {v: 0 for v in inst.vertices}
    smallest: dict[str, Fraction] = {}
    for eid in o.contracts:
        e = inst.edges[eid]
        for end in (e.u, e.v):
            degree[end] += 1
            share = o.splits[(eid, end)]
            if end not in smallest or share < smallest[end]:
                smallest[end] = share
    return {
        v: smallest[v] if degree[v] >= inst.capacity[v] else Fraction(0)
        for v in inst.vertices
    }


def is_stable(inst: Instance, o: Outcome) -> tuple[bool, list[StabilityViolation]]:
    """Check every non-contract edge against the outside shares."""
    validate_outcome(inst, o)
    alpha = outside_shares(inst, o)
    violations = []
    for eid, e in enumerate(inst.edges):
        if eid in o.contracts:
            continue
        slack = alpha[e.u] + alpha[e.v] - e.weight
        if slack < 0:
            violations.append(StabilityViolation((e.u, e.v), slack))
    return not violations, violations


def find_stable(inst: Instance) -> Outcome | NonexistenceCertificate:
    """Construct a stable outcome, or certify that none exists.

    Existence is equivalent to the matching relaxation having an integral
    optimum. On the integral side the contract set is the deterministic
    exact optimum (or the relaxation's own 0/1 vertex when the instance is
    beyond the exact-search guard) and the splits come from the dual
    prices: the edge's first endpoint receives y_u + z_e, the second y_v.
    """
    budget = _exact_edge_budget(inst)
    report = matching.integrality_report(inst, edge_limit=budget)
    if not report.integral:
        return NonexistenceCertificate(
            report.lp_value, report.ip_value, report.lp_primal
        )
    if len(inst.edges) <= budget:
        _, M = matching.bmatching_exact(inst, edge_limit=budget)
    else:
        M = frozenset(eid for eid, val in report.lp_primal.items() if val == 1)
    splits = {}
    for eid in M:
        e = inst.edges[eid]
        splits[(eid, e.u)] = report.dual_y[e.u] + report.dual_z[eid]
        splits[(eid, e.v)] = report.dual_y[e.v]
    outcome = Outcome(frozenset(M), splits)
    ok, violations = is_stable(inst, outcome)
    if not ok:  # pragma: no cover - contradicts LP duality
        raise NotStableError(f"dual-built outcome is unstable: {violations}")
    return outcome


def realize_stable(inst: Instance, x: Allocation) -> Outcome:
    """Split a target earnings vector into a stable outcome.

    Picks the deterministic maximum-weight contract set, then solves a
    feasibility LP over the splits: shares are nonnegative, sum to each
    contract's weight, add up to x_v at every vertex, and admit outside
    shares satisfying every non-contract edge. Raises NotStable when no
    such split exists (e.g. x is not in the core, or not efficient).
    """
    missing = set(inst.vertices) - set(x)
    if missing:
        raise InstanceError(f"allocation misses vertices {sorted(missing)!r}")
    _, M = matching.bmatching_exact(inst, edge_limit=_exact_edge_budget(inst))
    degree = {v: 0 for v in inst.vertices}
    for eid in M:
        e = inst.edges[eid]
        degree[e.u] += 1
        degree[e.v] += 1
    saturated = {v for v in inst.vertices if degree[v] >= inst.capacity[v]}

    variables = []
    constraints = []
    incident: dict[str, list[int]] = {v: [] for v in inst.vertices}
    for eid in sorted(M):
        e = inst.edges[eid]
        variables.append(lp.Variable(f"z[{eid},{e.u}]"))
        variables.append(lp.Variable(f"z[{eid},{e.v}]"))
        constraints.append(lp.Constraint(
            f"sum[{eid}]",
            {f"z[{eid},{e.u}]": 1, f"z[{eid},{e.v}]": 1},
            lp.Relation.EQ,
            e.weight,
        ))
        incident[e.u].append(eid)
        incident[e.v].append(eid)
    for v in inst.vertices:
        if incident[v]:
            constraints.append(lp.Constraint(
                f"earn[{v}]",
                {f"z[{eid},{v}]": 1 for eid in incident[v]},
                lp.Relation.EQ,
                x[v],
            ))
        elif x[v] != 0:
            raise NotStableError(
                f"{v!r} holds no contract but is allocated {x[v]}"
            )
    # Outside-share variables for saturated vertices, dominated by every
    # share; feasibility with these lower estimates implies stability with
    # the true (minimum-share) values.
    for v in sorted(saturated):
        variables.append(lp.Variable(f"alpha[{v}]", lower=None))
        for eid in incident[v]:
            constraints.append(lp.Constraint(
                f"dom[{v},{eid}]",
                {f"alpha[{v}]": 1, f"z[{eid},{v}]": -1},
                lp.Relation.LE,
                0,
            ))
    for eid, e in enumerate(inst.edges):
        if eid in M:
            continue
        coeffs = {}
        if e.u in saturated:
            coeffs[f"alpha[{e.u}]"] = 1
        if e.v in saturated:
            coeffs[f"alpha[{e.v}]"] = 1
        constraints.append(lp.Constraint(
            f"stab[{eid}]", coeffs, lp.Relation.GE, e.weight
        ))
    sol = lp.solve(lp.LinearProgram(variables, constraints, lp.Sense.MAX, {}))
    if sol.status is not lp.Status.OPTIMAL:
        raise NotStableError(
            "no stable splitting of this allocation over the optimal "
            "contract set exists"
        )
    splits = {}
    for eid in M:
        e = inst.edges[eid]
        splits[(eid, e.u)] = sol.primal[f"z[{eid},{e.u}]"]
        splits[(eid, e.v)] = sol.primal[f"z[{eid},{e.v}]"]
    outcome = Outcome(frozenset(M), splits)
    ok, violations = is_stable(inst, outcome)
    if not ok:  # pragma: no cover - the LP constraints forbid this
        raise NotStableError(f"split LP produced an unstable outcome: {violations}")
    return outcome


def core_membership(inst: Instance, x: Allocation) -> tuple[bool, Coalition | None]:
    """Is x in the core? On failure, also return a deficient coalition.

    Within the enumeration guard every coalition is checked and the witness
    has maximum deficiency v(S) - x(S). Beyond the guard the constrained
    bipartite structure is used instead: it suffices to check single
    vertices and stars around B-vertices, and the witness is the worst such
    coalition (a certified violator, though unions of disjoint violated
    stars can be more deficient).
    """
    missing = set(inst.vertices) - set(x)
    if missing:
        raise InstanceError(f"allocation misses vertices {sorted(missing)!r}")
    n = len(inst.vertices)
    if n <= ENUMERATION_VERTEX_LIMIT:
        return _membership_by_enumeration(inst, x)
    if inst.mode == Mode.CONSTRAINED_BIPARTITE:
        return _membership_by_stars(inst, x)
    raise TooLargeError(
        f"{n} vertices exceeds the enumeration limit of "
        f"{ENUMERATION_VERTEX_LIMIT} and the instance is not constrained "
        "bipartite"
    )


def _membership_by_enumeration(inst: Instance, x: Allocation) -> tuple[bool, Coalition | None]:
    verts = inst.vertices
    n = len(verts)
    xs = [Fraction(0)] * (1 << n)
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        xs[mask] = xs[mask ^ (1 << low)] + x[verts[low]]
    worst = None
    worst_mask = 0
    for mask in range(1, 1 << n):
        S = frozenset(verts[i] for i in range(n) if mask >> i & 1)
        deficiency = coalition_value(inst, S) - xs[mask]
        if worst is None or deficiency > worst:
            worst, worst_mask = deficiency, mask
    grand = (1 << n) - 1
    efficient = xs[grand] == coalition_value(inst, inst.grand_coalition)
    if efficient and (worst is None or worst <= 0):
        return True, None
    witness = frozenset(verts[i] for i in range(n) if worst_mask >> i & 1)
    return False, witness


def _membership_by_stars(inst: Instance, x: Allocation) -> tuple[bool, Coalition | None]:
    worst = Fraction(0)
    witness: Coalition | None = None
    for v in inst.vertices:
        if -x[v] > worst:
            worst, witness = -x[v], frozenset({v})
    for b in inst.vertices:
        if inst.side[b] != "B":
            continue
        margins = []
        for eid in inst.incident[b]:
            a = inst.other_end(eid, b)
            margin = inst.edges[eid].weight - x[a]
            if margin > 0:
                margins.append((margin, a))
        margins.sort(key=lambda t: (-t[0], t[1]))
        take = margins[: inst.capacity[b]]
        deficiency = sum((m for m, _ in take), Fraction(0)) - x[b]
        if deficiency > worst:
            worst = deficiency
            witness = frozenset({b} | {a for _, a in take})
    if worst > 0:
        return False, witness
    total = sum((x[v] for v in inst.vertices), Fraction(0))
    if total != coalition_value(inst, inst.grand_coalition):
        return False, inst.grand_coalition
    return True, None
