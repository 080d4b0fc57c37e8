"""Balanced outcomes, prekernel surpluses, and the local transfer dynamics.

A stable outcome is balanced when every contract splits its net surplus
equally: each endpoint's share minus its best outside option (the most it
could extract from an alternative partner, who would have to be compensated
for abandoning their own least valuable contract) is the same on both sides.
This is the networked version of Nash bargaining: with no outside options it
reduces to the 50/50 split.

The transfer dynamics repairs imbalance locally: take the most imbalanced
contract and move half the imbalance from the advantaged endpoint to the
other, clamped so shares stay nonnegative, no stability constraint breaks,
and the worst imbalance over all contracts does not rise (a transfer that
enriches a vertex weakens the outside options of that vertex's neighbors,
which can push a different contract's imbalance up — the clamp shrinks or
redirects such steps). Convergence is geometric, not finite, so the
stopping rule is a tolerance on the worst imbalance.

Prekernel surpluses s_ij = max excess over coalitions containing i but not
j are computed by exhaustive enumeration within the guard; on larger
constrained bipartite instances the maximizing coalition decomposes into
vertex-disjoint stars, and the best star packing is found by an integral
LP (a greedy star-by-star sum is wrong when two B-centers compete for the
same A-vertex).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import lp
from .errors import (
    InstanceError,
    LPInternalError,
    NotAContractEdgeError,
    NotEfficientError,
    NotStableError,
    TooLargeError,
    WrongModeError,
)
from .model import (
    Allocation,
    Coalition,
    Instance,
    Mode,
    Outcome,
    coalition_value,
    validate_outcome,
)
from .stable import ENUMERATION_VERTEX_LIMIT, is_stable, outside_shares

DEFAULT_TOL = Fraction(1, 10**9)
DEFAULT_MAX_ROUNDS = 10_000


@dataclass(frozen=True)
class SurplusValue:
    """s_ij with a maximizing coalition (contains i, excludes j)."""

    i: str
    j: str
    value: Fraction
    witness: Coalition


@dataclass(frozen=True)
class BalanceReport:
    """Worst-case and per-contract imbalance of a stable outcome.

    ``per_edge[eid]`` is (share_u - beta_u) - (share_v - beta_v) in the
    edge's stored endpoint order; ``epsilon`` is the largest absolute
    imbalance (0 with no contracts) and ``worst_edge`` attains it.
    """

    epsilon: Fraction
    worst_edge: int | None
    per_edge: Mapping[int, Fraction]
    tol: Fraction
    balanced: bool


@dataclass(frozen=True)
class TransferRecord:
    """One transfer along one contract; positive moves money from the
    edge's stored u endpoint to its v endpoint, negative the reverse."""

    round: int
    edge: int
    transfer: Fraction
    epsilon: Fraction  # worst imbalance after this round


@dataclass(frozen=True)
class DynamicsResult:
    outcome: Outcome
    trace: tuple
    converged: bool
    initial_epsilon: Fraction
    final_epsilon: Fraction


def outside_option(inst: Instance, o: Outcome, v: str, eid: int) -> Fraction:
    """beta_v in the context of contract ``eid``: the best net value v could
    get from a non-contracted neighbor, who must first be paid their own
    outside share."""
    if eid not in o.contracts:
        raise NotAContractEdgeError(f"edge {eid} is not a contract")
    e = inst.edges[eid]
    if v not in (e.u, e.v):
        raise NotAContractEdgeError(f"{v!r} is not an endpoint of contract {eid}")
    alpha = outside_shares(inst, o)
    return _beta(inst, o, alpha, v)


def _beta(inst: Instance, o: Outcome, alpha: Mapping[str, Fraction], v: str) -> Fraction:
    best = Fraction(0)
    for eid in inst.incident[v]:
        if eid in o.contracts:
            continue
        u = inst.other_end(eid, v)
        offer = inst.edges[eid].weight - alpha[u]
        if offer > best:
            best = offer
    return best


def _edge_imbalances(inst: Instance, o: Outcome, alpha) -> dict[int, Fraction]:
    per_edge = {}
    for eid in sorted(o.contracts):
        e = inst.edges[eid]
        net_u = o.splits[(eid, e.u)] - _beta(inst, o, alpha, e.u)
        net_v = o.splits[(eid, e.v)] - _beta(inst, o, alpha, e.v)
        per_edge[eid] = net_u - net_v
    return per_edge


def is_balanced(inst: Instance, o: Outcome, tol: Fraction = Fraction(0)) -> BalanceReport:
    """Measure imbalance on every contract; requires a stable outcome."""
    ok, violations = is_stable(inst, o)
    if not ok:
        raise NotStableError(
            f"balance is defined on stable outcomes only; violations: {violations}"
        )
    per_edge = _edge_imbalances(inst, o, outside_shares(inst, o))
    worst: Fraction = Fraction(0)
    worst_edge = None
    for eid, imbalance in per_edge.items():
        if abs(imbalance) > worst:
            worst = abs(imbalance)
            worst_edge = eid
    return BalanceReport(worst, worst_edge, per_edge, tol, worst <= tol)


_STEP_LATTICE = 1 << 64


def _clamped_step(inst: Instance, o: Outcome, alpha, payer: str, eid: int,
                  half: Fraction) -> Fraction:
    """Largest transfer out of payer's share on eid, at most ``half``,
    keeping the share nonnegative and every stability constraint at the
    payer satisfied.

    The result is floored onto the 2^-64 lattice. Exact half-imbalance
    steps compound denominators round over round until every operation
    crawls; on the lattice the splits' denominators stay bounded for the
    whole run. Flooring never exceeds a clamp, and the acceptance check
    re-evaluates the stepped outcome exactly, so this costs at most
    2^-64 of progress per round - far below any usable tolerance."""
    share = o.splits[(eid, payer)]
    step = min(half, share)
    degree = sum(1 for f in inst.incident[payer] if f in o.contracts)
    if degree >= inst.capacity[payer]:
        needed = Fraction(0)
        for f in inst.incident[payer]:
            if f in o.contracts:
                continue
            w = inst.other_end(f, payer)
            requirement = inst.edges[f].weight - alpha[w]
            if requirement > needed:
                needed = requirement
        step = min(step, share - needed)
    if step <= 0:
        return Fraction(0)
    return Fraction(int(step * _STEP_LATTICE), _STEP_LATTICE)


def _solve_linear(matrix, rhs):
    """Solve ``matrix @ x == rhs`` exactly by Gauss-Jordan elimination.

    Free variables are set to zero; returns None when the system is
    inconsistent. Sizes here are tiny (one row per contract)."""
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    rows = [list(matrix[i]) + [rhs[i]] for i in range(m)]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        f = rows[r][c]
        rows[r] = [x / f for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                g = rows[i][c]
                rows[i] = [a - g * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    if any(rows[i][n] != 0 for i in range(r, m)):
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = rows[i][n]
    return x


def _imbalance_jacobian(inst: Instance, o: Outcome, alpha, contracts):
    """Derivative of each contract's imbalance in each contract's transfer.

    A unit transfer along contract k moves money from its stored u to its
    stored v. Around the current point the imbalances are affine in the
    transfer vector as long as no argmax in a beta and no argmin in an
    alpha switches; this returns the derivative for the current selection
    (ties broken by share then edge id, matching the evaluated values).
    Contract k's own imbalance always has slope -2 in its own transfer; the
    off-diagonal terms come from betas quoting a neighbor whose alpha is
    pinned to one of the moving contracts.
    """
    idx = {eid: k for k, eid in enumerate(contracts)}
    m = len(contracts)

    def alpha_grad(t):
        degree = sum(1 for f in inst.incident[t] if f in o.contracts)
        if degree < inst.capacity[t]:
            return {}
        g = min((f for f in inst.incident[t] if f in o.contracts),
                key=lambda f: (o.splits[(f, t)], f))
        e = inst.edges[g]
        return {idx[g]: Fraction(-1 if t == e.u else 1)}

    def beta_grad(w):
        best = Fraction(0)
        active = None
        for f in sorted(inst.incident[w]):
            if f in o.contracts:
                continue
            t = inst.other_end(f, w)
            offer = inst.edges[f].weight - alpha[t]
            if offer > best:
                best = offer
                active = t
        if active is None:
            return {}
        return {k: -c for k, c in alpha_grad(active).items()}

    J = [[Fraction(0)] * m for _ in range(m)]
    for j, eid in enumerate(contracts):
        e = inst.edges[eid]
        J[j][j] -= 2
        for k, c in beta_grad(e.u).items():
            J[j][k] -= c
        for k, c in beta_grad(e.v).items():
            J[j][k] += c
    return J


_STEP_LADDER = 24  # halvings tried before a transfer is declared blocked
_SLOW_FACTOR = Fraction(255, 256)  # relative progress below this is "slow"


def balance_dynamics(
    inst: Instance,
    o0: Outcome,
    tol: Fraction = DEFAULT_TOL,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    schedule: str = "max-first",
) -> DynamicsResult:
    """Run clamped half-imbalance transfers until balanced or out of rounds.

    ``schedule`` is "max-first" (most imbalanced contract first, ties to the
    lowest edge id) or "round-robin" (contracts cyclically by id). Every
    accepted move keeps the worst imbalance from rising, so the epsilon
    trace is non-increasing by construction; a move is preferred when it
    strictly lowers the worst imbalance (the step is halved up to a fixed
    ladder looking for one, then the next contract in the schedule is
    tried).

    Single-edge transfers alone can deadlock or crawl: contracts coupled
    through cross edges may each push the other's imbalance past the
    maximum whenever only one of them moves, while moving both together
    heads straight for the balanced point. Whenever single transfers are
    blocked or shave off less than 1/256 of the maximum, the round
    additionally solves - exactly, under the currently active outside
    options - for the joint transfer vector that zeroes every imbalance at
    once, and walks along it with halved damping until a move passes the
    same acceptance test; the better of the two candidates wins. As a last
    resort a synchronized sweep shifts every contract (then only the
    contracts tied at the maximum) by a damped fraction of its own
    half-imbalance. Moves that merely pull a tied contract below the
    maximum (leaving epsilon equal) are allowed a bounded number of times
    in a row, because they unlock strict progress on the next round.

    A multi-contract move is recorded as one TransferRecord per shifted
    contract, all carrying the same round index and the post-round epsilon.
    ``converged`` is False when the round budget runs out or every move is
    blocked.
    """
    if inst.mode == Mode.BIPARTITE_CAP:
        raise WrongModeError(
            "the transfer dynamics is defined for the unit-capacity and "
            "constrained bipartite modes"
        )
    if schedule not in ("max-first", "round-robin"):
        raise ValueError(f"unknown schedule {schedule!r}")
    report = is_balanced(inst, o0, tol)  # also enforces validity + stability
    splits = dict(o0.splits)
    contracts = sorted(o0.contracts)
    o = o0
    trace: list[TransferRecord] = []
    initial_eps = report.epsilon
    eps = report.epsilon
    rr_next = 0
    stalled = 0
    for rnd in range(1, max_rounds + 1):
        if eps <= tol:
            break
        alpha = outside_shares(inst, o)
        per_edge = _edge_imbalances(inst, o, alpha)
        if schedule == "max-first":
            order = sorted(contracts, key=lambda eid: (-abs(per_edge[eid]), eid))
        else:
            order = [contracts[(rr_next + k) % len(contracts)]
                     for k in range(len(contracts))]
        max_tied = [eid for eid in contracts if abs(per_edge[eid]) == eps]

        def evaluate(moves):
            # exact epsilon after applying the given transfers (signed:
            # positive moves from stored u to stored v), or None when they
            # jointly break stability (single transfers cannot, but
            # simultaneous ones drop several thresholds at once)
            trial = dict(splits)
            for eid, delta in moves:
                e = inst.edges[eid]
                trial[(eid, e.u)] -= delta
                trial[(eid, e.v)] += delta
            o2 = Outcome(o0.contracts, trial)
            if len(moves) > 1 and not is_stable(inst, o2)[0]:
                return None
            per2 = _edge_imbalances(inst, o2, outside_shares(inst, o2))
            return o2, per2, max(abs(v) for v in per2.values())

        def signed_clamp(eid, delta):
            # clamp a signed transfer to what the paying side can afford
            e = inst.edges[eid]
            payer = e.u if delta > 0 else e.v
            bound = _clamped_step(inst, o, alpha, payer, eid, abs(delta))
            return bound if delta > 0 else -bound

        def sweep_moves(scope, scale):
            moves = []
            for eid in scope:
                imbalance = per_edge[eid]
                if imbalance == 0:
                    continue
                delta = signed_clamp(eid, imbalance * scale / 2)
                if delta != 0:
                    moves.append((eid, delta))
            return moves

        def joint_moves(target, scale):
            # one damped step of the exact joint solve that zeroes every
            # imbalance at once under the current active selection
            moves = []
            for k, eid in enumerate(contracts):
                if target[k] == 0:
                    continue
                delta = signed_clamp(eid, target[k] * scale)
                if delta != 0:
                    moves.append((eid, delta))
            return moves

        def acceptable(outcome):
            # keep the maximum from rising, and demand visible progress on
            # it: either the maximum itself drops, or one of the contracts
            # tied at the maximum falls below it (a no-op wiggle on some
            # minor contract would burn rounds without ever converging)
            if outcome is None:
                return False
            per2, eps2 = outcome[1], outcome[2]
            if eps2 > eps:
                return False
            return eps2 < eps or any(abs(per2[f]) < eps for f in max_tied)

        chosen = None
        for eid in order:
            imbalance = per_edge[eid]
            if imbalance == 0:
                continue
            delta = signed_clamp(eid, imbalance / 2)
            for _ in range(_STEP_LADDER + 1):
                if delta == 0:
                    break
                outcome = evaluate([(eid, delta)])
                if acceptable(outcome):
                    chosen = ([(eid, delta)], outcome[0], outcome[2])
                    break
                if outcome[2] <= eps:
                    break  # a smaller step on this edge stays unproductive
                delta /= 2
            if chosen:
                break
        if chosen is None or chosen[2] > eps * _SLOW_FACTOR:
            # Single transfers are blocked or barely moving: contracts
            # coupled through cross edges can each push the other past the
            # maximum whenever only one of them moves, while a joint move
            # heads straight for the balanced point. Solve for the transfer
            # vector zeroing every imbalance under the current active
            # selection and walk along it, damped until it is accepted.
            target = _solve_linear(
                _imbalance_jacobian(inst, o, alpha, contracts),
                [-per_edge[f] for f in contracts],
            )
            if target is not None and not any(target):
                target = None
            scale = Fraction(1)
            for _ in range(_STEP_LADDER + 1):
                if not target:
                    break
                moves = joint_moves(target, scale)
                if moves:
                    outcome = evaluate(moves)
                    if acceptable(outcome) and (
                        chosen is None or outcome[2] < chosen[2]
                    ):
                        chosen = (moves, outcome[0], outcome[2])
                        break
                scale /= 2
        if chosen is None:
            for scope in (contracts, max_tied):
                scale = Fraction(1)
                for _ in range(_STEP_LADDER + 1):
                    moves = sweep_moves(scope, scale)
                    if len(moves) > 1:
                        outcome = evaluate(moves)
                        if acceptable(outcome):
                            chosen = (moves, outcome[0], outcome[2])
                            break
                    scale /= 2
                if chosen:
                    break

        if chosen is None:
            # imbalance remains but every move is blocked by a clamp
            break
        moves, o, eps2 = chosen
        if eps2 < eps:
            stalled = 0
        else:
            stalled += 1
            if stalled > max(8, 2 * len(contracts)):
                break
        eps = eps2
        splits = dict(o.splits)
        if schedule == "round-robin":
            rr_next = (contracts.index(moves[0][0]) + 1) % len(contracts)
        ok, violations = is_stable(inst, o)
        assert ok, f"transfer broke stability on round {rnd}: {violations}"
        for eid, step in moves:
            trace.append(TransferRecord(rnd, eid, step, eps))
    return DynamicsResult(o, tuple(trace), eps <= tol, initial_eps, eps)


def _value_table(inst: Instance) -> list:
    verts = inst.vertices
    n = len(verts)
    table = [Fraction(0)] * (1 << n)
    for mask in range(1, 1 << n):
        S = frozenset(verts[i] for i in range(n) if mask >> i & 1)
        table[mask] = coalition_value(inst, S)
    return table


def _surplus_from_table(inst: Instance, table, x: Allocation, i: str, j: str) -> SurplusValue:
    verts = inst.vertices
    n = len(verts)
    pos = {v: k for k, v in enumerate(verts)}
    xi = [x[v] for v in verts]
    xs = [Fraction(0)] * (1 << n)
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        xs[mask] = xs[mask ^ (1 << low)] + xi[low]
    need, avoid = 1 << pos[i], 1 << pos[j]
    best = None
    best_mask = 0
    for mask in range(1, 1 << n):
        if not mask & need or mask & avoid:
            continue
        excess = table[mask] - xs[mask]
        if best is None or excess > best:
            best, best_mask = excess, mask
    witness = frozenset(verts[k] for k in range(n) if best_mask >> k & 1)
    return SurplusValue(i, j, best, witness)


STAR_CENTER_LIMIT = 12


def _surplus_star_packing(inst: Instance, x: Allocation, i: str, j: str) -> SurplusValue:
    """Exact s_ij on constrained bipartite instances beyond the enumeration
    guard. The maximizing coalition is a union of vertex-disjoint stars
    centered on B-vertices plus loose members, so it suffices to enumerate
    which centers open (2^|B| cases, gated) and assign A-leaves to the open
    centers by a transportation LP, whose optimum is integral. A single
    joint LP does not work here: the per-center membership charge is a
    fixed cost, and its relaxation overshoots the true optimum.
    """
    b_side = [v for v in inst.vertices if inst.side[v] == "B" and v != j]
    if len(b_side) > STAR_CENTER_LIMIT:
        raise TooLargeError(
            f"{len(b_side)} B-vertices exceeds the star-packing limit of "
            f"{STAR_CENTER_LIMIT}"
        )
    # vertices that belong to the coalition whether or not they are matched:
    # i itself (when not a center) and anyone the coalition is paid to carry
    forced_loose = [v for v in inst.vertices
                    if inst.side[v] != "B" and v != j and (v == i or x[v] < 0)]
    loose = set(forced_loose)
    base = -sum((x[v] for v in forced_loose), Fraction(0))
    cols: dict[str, list[tuple[int, str, Fraction]]] = {}
    for eid, e in enumerate(inst.edges):
        if j in (e.u, e.v):
            continue
        a, b = (e.u, e.v) if inst.side[e.u] == "A" else (e.v, e.u)
        margin = e.weight if a in loose else e.weight - x[a]
        cols.setdefault(b, []).append((eid, a, margin))

    best: Fraction | None = None
    best_members: frozenset | None = None
    for mask in range(1 << len(b_side)):
        opened = [b_side[k] for k in range(len(b_side)) if mask >> k & 1]
        if inst.side[i] == "B" and i not in opened:
            continue
        const = base - sum((x[b] for b in opened), Fraction(0))
        picked: list[str] = []
        value = const
        pool = [entry for b in opened for entry in cols.get(b, [])]
        if pool:
            variables = [lp.Variable(f"z[{eid}]") for eid, _, _ in pool]
            objective = {f"z[{eid}]": margin for eid, _, margin in pool}
            constraints = []
            for a in sorted({a for _, a, _ in pool}):
                constraints.append(lp.Constraint(
                    f"once[{a}]",
                    {f"z[{eid}]": 1 for eid, av, _ in pool if av == a},
                    lp.Relation.LE, 1,
                ))
            for b in opened:
                if cols.get(b):
                    constraints.append(lp.Constraint(
                        f"cap[{b}]",
                        {f"z[{eid}]": 1 for eid, _, _ in cols[b]},
                        lp.Relation.LE, inst.capacity[b],
                    ))
            sol = lp.solve(lp.LinearProgram(variables, constraints, lp.Sense.MAX, objective))
            if sol.status is not lp.Status.OPTIMAL:  # pragma: no cover
                raise LPInternalError(f"leaf assignment reported {sol.status.value}")
            if any(val.denominator != 1 for val in sol.primal.values()):  # pragma: no cover
                raise LPInternalError("transportation vertex is fractional")
            value += sol.objective_value
            picked = [a for eid, a, _ in pool if sol.primal[f"z[{eid}]"] == 1]
        if best is None or value > best:
            best = value
            best_members = frozenset(opened) | loose | set(picked)
    return SurplusValue(i, j, best, best_members)


def prekernel_surplus(inst: Instance, x: Allocation, i: str, j: str) -> SurplusValue:
    """Exact s_ij(x) = max excess over coalitions containing i, not j."""
    if i == j or i not in inst.index_of or j not in inst.index_of:
        raise InstanceError(f"surplus needs two distinct vertices, got {i!r}, {j!r}")
    if len(inst.vertices) <= ENUMERATION_VERTEX_LIMIT:
        return _surplus_from_table(inst, _value_table(inst), x, i, j)
    if inst.mode == Mode.CONSTRAINED_BIPARTITE:
        return _surplus_star_packing(inst, x, i, j)
    raise TooLargeError(
        f"{len(inst.vertices)} vertices exceeds the enumeration limit and "
        "the instance is not constrained bipartite"
    )


def is_prekernel(
    inst: Instance, x: Allocation, tol: Fraction = Fraction(0)
) -> tuple[bool, tuple | None]:
    """All pairwise surpluses balance within tol. Returns the worst pair."""
    total = sum((x[v] for v in inst.vertices), Fraction(0))
    if total != coalition_value(inst, inst.grand_coalition):
        raise NotEfficientError(
            f"allocation pays {total}, the grand coalition earns "
            f"{coalition_value(inst, inst.grand_coalition)}"
        )
    n = len(inst.vertices)
    if n <= ENUMERATION_VERTEX_LIMIT:
        table = _value_table(inst)
        surplus = lambda i, j: _surplus_from_table(inst, table, x, i, j)  # noqa: E731
    elif inst.mode == Mode.CONSTRAINED_BIPARTITE:
        surplus = lambda i, j: _surplus_star_packing(inst, x, i, j)  # noqa: E731
    else:
        raise TooLargeError(
            f"{n} vertices exceeds the enumeration limit and the instance "
            "is not constrained bipartite"
        )
    worst = Fraction(0)
    worst_pair = None
    for i in inst.vertices:
        for j in inst.vertices:
            if i >= j:
                continue
            gap = abs(surplus(i, j).value - surplus(j, i).value)
            if gap > worst:
                worst = gap
                worst_pair = (i, j)
    return worst <= tol, worst_pair
