"""Nucleolus of the matching game: the unique imputation that
lexicographically minimizes the non-increasingly sorted excess vector.

Both entry points run the classical iterated-LP peeling scheme: maximize
the worst coalition surplus x(S) - v(S) over the not-yet-pinned family,
pin the coalitions whose surplus is constant on the optimal face, and
repeat until the pinned equalities determine a unique point.  They differ
only in the constraint family:

* :func:`nucleolus_bruteforce` uses every proper nonempty coalition.
  Values come from a full subset table built by a mode-specific recursion
  over vertex bitmasks; rows enter the programs lazily (a table scan finds
  violated coalitions), which keeps each LP small while still certifying
  optimality against the whole family.
* :func:`nucleolus_pruned` (ConstrainedBipartite only) uses all singletons
  plus the star coalitions {b} + T with T among b's neighbours, |T| <= c_b.
  A-side capacities are 1, so every b-matching decomposes into disjoint
  such stars and the small family pins the same point.  Violated stars are
  found exactly: sorting the margins x_a - w_ab puts the minimum-surplus
  star first, and a best-first partition search yields next-best stars
  whenever the best ones are already pinned at an earlier level.

Tightness detection is face probing: S is pinned at level eps iff the
maximum of x(S) over the optimal face equals v(S) + eps.  A probe can only
pin rows that genuinely stay tight on the face (the probe maximum bounds
the face from above), so a row the probe misses costs one extra round at
the same level, never a wrong answer; consecutive rounds at one level are
merged into a single reported :class:`Level`.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from . import lp, model
from .errors import (
    InstanceError,
    LengthMismatchError,
    LPInternalError,
    TooLargeError,
    WrongModeError,
)
from .model import Allocation, Coalition, Instance, Mode

__all__ = [
    "ALL",
    "BRUTEFORCE_VERTEX_LIMIT",
    "Comparison",
    "ExcessRecord",
    "Level",
    "LevelSequence",
    "NucleolusRun",
    "excess_profile",
    "lex_compare",
    "nucleolus_bruteforce",
    "nucleolus_pruned",
]

# 2^n coalition enumeration: tables and full-family scans stop here.
BRUTEFORCE_VERTEX_LIMIT = 12

# How many violated rows a single separation pass may add to the program.
_SEPARATION_BATCH = 40


class Comparison(Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


@dataclass(frozen=True)
class ExcessRecord:
    """A coalition together with its excess e(S, x) = v(S) - x(S)."""

    coalition: Coalition
    excess: Fraction


@dataclass(frozen=True)
class Level:
    """One pinned excess level.

    Every coalition in ``family`` has surplus x(S) - v(S) equal to
    ``epsilon`` at the nucleolus, and already had it constant on the whole
    optimal face of the round that pinned it.
    """

    epsilon: Fraction
    family: frozenset


@dataclass(frozen=True)
class LevelSequence:
    """Audit trail of the peeling rounds, one entry per distinct level."""

    levels: tuple

    def __post_init__(self) -> None:
        for earlier, later in zip(self.levels, self.levels[1:]):
            assert earlier.epsilon < later.epsilon, "levels must increase"
        seen: set = set()
        for level in self.levels:
            assert not (seen & level.family), "level families must be disjoint"
            seen |= level.family

    def __iter__(self):
        return iter(self.levels)

    def __len__(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class NucleolusRun:
    """A computed nucleolus together with its pinned-level audit trail."""

    allocation: Allocation
    levels: LevelSequence


class _AllFamily:
    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "ALL"


#: Sentinel family argument: every proper nonempty coalition.
ALL = _AllFamily()


# ---------------------------------------------------------------------------
# subset value tables


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _value_table(inst: Instance) -> list:
    """v(S) for every vertex subset, indexed by bitmask over inst.vertices."""
    if inst.mode == Mode.GENERAL_UNIT_CAP:
        return _table_by_pairing(inst)
    if inst.mode == Mode.CONSTRAINED_BIPARTITE:
        return _table_by_stars(inst)
    # Arbitrary two-sided capacities have no one-vertex recursion; defer to
    # the per-coalition solver (exact on bipartite instances at any density).
    verts = inst.vertices
    n = len(verts)
    table = [Fraction(0)] * (1 << n)
    for mask in range(1, 1 << n):
        members = frozenset(verts[i] for i in _bits(mask))
        table[mask] = model.coalition_value(inst, members)
    return table


def _table_by_pairing(inst: Instance) -> list:
    """Unit capacities: either the highest member of S stays unmatched or it
    pairs with a neighbour, leaving a smaller subset either way."""
    n = len(inst.vertices)
    idx = inst.index_of
    nbr: list = [[] for _ in range(n)]
    for e in inst.edges:
        i, j = idx[e.u], idx[e.v]
        nbr[i].append((j, e.weight))
        nbr[j].append((i, e.weight))
    zero = Fraction(0)
    table = [zero] * (1 << n)
    for mask in range(1, 1 << n):
        i = mask.bit_length() - 1
        rest = mask ^ (1 << i)
        best = table[rest]
        for j, w in nbr[i]:
            if rest >> j & 1:
                cand = w + table[rest ^ (1 << j)]
                if cand > best:
                    best = cand
        table[mask] = best
    return table


def _table_by_stars(inst: Instance) -> list:
    """A-side capacities are 1: the highest B-member of S either sits idle or
    serves one of its feasible leaf sets, leaving a smaller subset."""
    n = len(inst.vertices)
    verts = inst.vertices
    idx = inst.index_of
    all_b = 0
    for v in verts:
        if inst.side[v] == "B":
            all_b |= 1 << idx[v]
    leaf_weight: list = [{} for _ in range(n)]
    for e in inst.edges:
        a, b = (e.u, e.v) if inst.side[e.u] == "A" else (e.v, e.u)
        leaf_weight[idx[b]][idx[a]] = e.weight
    stars: list = [()] * n
    for bi in _bits(all_b):
        cap = inst.capacity[verts[bi]]
        leaves = sorted(leaf_weight[bi].items())
        feasible = []
        for take in range(1, min(cap, len(leaves)) + 1):
            for combo in combinations(leaves, take):
                t = 0
                total = Fraction(0)
                for ai, w in combo:
                    t |= 1 << ai
                    total += w
                feasible.append((t, total))
        stars[bi] = tuple(feasible)
    zero = Fraction(0)
    table = [zero] * (1 << n)
    for mask in range(1, 1 << n):
        bm = mask & all_b
        if not bm:
            continue  # only A-vertices: no internal edges
        bi = bm.bit_length() - 1
        rest = mask ^ (1 << bi)
        best = table[rest]
        for t, total in stars[bi]:
            if t & mask == t:
                cand = total + table[rest ^ t]
                if cand > best:
                    best = cand
        table[mask] = best
    return table


# ---------------------------------------------------------------------------
# the peeling engine


def _mask_sum(x: list, mask: int) -> Fraction:
    total = Fraction(0)
    for i in _bits(mask):
        total += x[i]
    return total


class _Basis:
    """Incrementally row-reduced rational basis for dependence tests."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.rows: list = []  # reduced rows, one pivot column each
        self.pivots: list = []

    def _reduce(self, vec: list) -> list:
        vec = vec[:]
        for row, piv in zip(self.rows, self.pivots):
            if vec[piv]:
                scale = vec[piv] / row[piv]
                vec = [a - scale * b for a, b in zip(vec, row)]
        return vec

    def contains(self, vec: list) -> bool:
        return not any(self._reduce(vec))

    def add(self, vec: list) -> bool:
        """Insert ``vec``; returns False when it was already in the span."""
        reduced = self._reduce(vec)
        piv = next((i for i, a in enumerate(reduced) if a), None)
        if piv is None:
            return False
        self.rows.append(reduced)
        self.pivots.append(piv)
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)


def _level_program(n: int, grand: Fraction, working: dict, fixed: dict) -> lp.LinearProgram:
    """One peeling LP: maximize eps subject to x >= 0, x(N) = v(N), pinned
    equalities, and x(S) - eps >= v(S) on the working rows."""
    variables = [lp.Variable(f"x{i}") for i in range(n)]
    variables.append(lp.Variable("eps", lower=None))
    constraints = [
        lp.Constraint("eff", {f"x{i}": 1 for i in range(n)}, lp.Relation.EQ, grand)
    ]
    for mask, (value, level) in fixed.items():
        coeffs = {f"x{i}": 1 for i in _bits(mask)}
        constraints.append(lp.Constraint(f"S{mask}", coeffs, lp.Relation.EQ, value + level))
    for mask, value in working.items():
        coeffs = {f"x{i}": 1 for i in _bits(mask)}
        coeffs["eps"] = -1
        constraints.append(lp.Constraint(f"S{mask}", coeffs, lp.Relation.GE, value))
    return lp.LinearProgram(variables, constraints, lp.Sense.MAX, {"eps": 1})


def _peel(
    inst: Instance,
    grand: Fraction,
    initial: dict,
    separate: Callable[[list, Fraction, dict, dict], list],
) -> tuple:
    """Run the peeling scheme; returns (x by vertex index, LevelSequence).

    ``initial`` maps the singleton bitmasks to their values.
    ``separate(x, eps, working, pinned, implied)`` must return violated
    rows as (surplus, mask, value) triples: coalitions outside ``working``
    and ``pinned`` for which ``implied(mask)`` is false and whose surplus
    at x is strictly below eps.  It may return any nonempty subset of them
    when some exist, and must return [] only when none exist.

    Row management keeps the programs small.  A row whose indicator lies in
    the span of the efficiency row and the pinned span-extending rows has
    x(S) constant wherever those equalities hold (that is what ``implied``
    tests): as a working row it is pinned without a probe and never becomes
    an equality in the programs, and separation does not generate it at all
    - its level is a no-op that neither moves the faces nor helps pin the
    point, so skipping it leaves the computed allocation unchanged.  Only
    span-extending rows are probed and carried as explicit equalities, so
    the programs hold at most n of them.  Slack non-singleton rows are
    dropped after each round; separation re-finds them if they ever bind
    again.
    """
    verts = inst.vertices
    n = len(verts)
    working = dict(initial)
    lp_rows: dict = {}  # pinned and span-extending: enforced as equalities
    pinned: dict = {}  # every pinned mask -> (value, level epsilon)
    levels: list = []
    basis = _Basis(n)
    basis.add([Fraction(1)] * n)

    def implied(mask: int) -> bool:
        return basis.contains([Fraction(1 if mask >> i & 1 else 0) for i in range(n)])

    while True:
        # Row generation until the LP optimum is certified by separation.
        while True:
            program = _level_program(n, grand, working, lp_rows)
            sol = lp.solve(program)
            if sol.status is not lp.Status.OPTIMAL:  # pragma: no cover
                raise LPInternalError(f"peeling round reported {sol.status.value}")
            eps = sol.objective_value
            x = [sol.primal[f"x{i}"] for i in range(n)]
            violated = separate(x, eps, working, pinned, implied)
            if not violated:
                break
            violated.sort()
            for _, mask, value in violated[:_SEPARATION_BATCH]:
                working[mask] = value
        # Pin the rows whose surplus is constant on the optimal face.  At
        # least one working row is tight on the whole face (otherwise the
        # barycentre of per-row witnesses would beat eps), and a face-tight
        # row is tight at x in particular, so it is among the rows handled
        # below.  Span-dependent tight rows pin for free; the rest are
        # probed collectively: maximize the summed group over the face.
        # Every term is pointwise at least its own bound there, so if the
        # maximum equals the summed bounds every member is constant and the
        # whole group pins; otherwise the maximizing point is a witness -
        # any member slack at it (at least one is) is not constant and
        # drops out, and the shrunken group is probed again.  Constant
        # members are tight at every face point, so they survive every
        # witness round and are eventually pinned together.
        tight = [m for m, value in working.items() if _mask_sum(x, m) == value + eps]
        newly: list = []
        remaining: list = []
        for mask in tight:
            if implied(mask):
                pinned[mask] = (working.pop(mask), eps)
                newly.append(mask)
            else:
                remaining.append(mask)
        if not newly and len(remaining) == 1:
            confirmed = remaining  # the lone candidate is the face-tight row
            remaining = []
        else:
            confirmed = []
        while remaining:
            target = sum((working[m] + eps for m in remaining), Fraction(0))
            probe: dict = {}
            for mask in remaining:
                for i in _bits(mask):
                    key = f"x{i}"
                    probe[key] = probe.get(key, 0) + 1
            face_sol = lp.solve(lp.face_program(program, eps, probe))
            if face_sol.status is not lp.Status.OPTIMAL:  # pragma: no cover
                raise LPInternalError(f"face probe reported {face_sol.status.value}")
            if face_sol.objective_value == target:
                confirmed.extend(remaining)
                break
            point = [face_sol.primal[f"x{i}"] for i in range(n)]
            remaining = [
                m for m in remaining if _mask_sum(point, m) == working[m] + eps
            ]
        for mask in confirmed:
            value = working.pop(mask)
            pinned[mask] = (value, eps)
            if basis.add([Fraction(1 if mask >> i & 1 else 0) for i in range(n)]):
                lp_rows[mask] = (value, eps)
            newly.append(mask)
        if not newly:  # pragma: no cover - excluded by the argument above
            raise LPInternalError("no coalition pinned in a peeling round")
        if levels and eps == levels[-1][0]:
            levels[-1][1].extend(newly)
        elif levels and eps < levels[-1][0]:  # pragma: no cover
            raise LPInternalError("peeling level decreased")
        else:
            levels.append((eps, list(newly)))
        # Done once the pinned equalities determine a unique point.
        if basis.rank == n:
            sequence = LevelSequence(
                tuple(
                    Level(
                        level_eps,
                        frozenset(
                            frozenset(verts[i] for i in _bits(m)) for m in masks
                        ),
                    )
                    for level_eps, masks in levels
                )
            )
            return x, sequence
        working = {
            m: value
            for m, value in working.items()
            if m.bit_count() == 1 or _mask_sum(x, m) == value + eps
        }


# ---------------------------------------------------------------------------
# separation oracles


def _table_separator(inst: Instance, table: list) -> Callable:
    """Full-family separation by scanning the subset table.

    While the current bound and every pinned level are nonnegative, the
    scan may skip coalitions whose induced graph is disconnected: v and x
    are both additive over the components, so such a coalition's surplus is
    the sum of its parts' surpluses, and with every part at or above
    min(eps, 0-or-better pinned levels) the sum only drops strictly below
    eps when every part is pinned - in which case the row is implied and
    not a candidate anyway.  Rounds with a negative bound (possible in the
    unit-capacity mode, whose core can be empty) scan everything.
    """
    n = len(inst.vertices)
    idx = inst.index_of
    adjacent = [0] * n
    for e in inst.edges:
        i, j = idx[e.u], idx[e.v]
        adjacent[i] |= 1 << j
        adjacent[j] |= 1 << i
    connected = [False] * (1 << n)
    for mask in range(1, 1 << n):
        if mask & (mask - 1) == 0:
            connected[mask] = True
            continue
        seen = mask & -mask
        frontier = seen
        while frontier:
            grow = 0
            for i in _bits(frontier):
                grow |= adjacent[i]
            frontier = grow & mask & ~seen
            seen |= frontier
        connected[mask] = seen == mask

    def separate(
        x: list, eps: Fraction, working: dict, pinned: dict, implied: Callable
    ) -> list:
        full = (1 << n) - 1
        xs = [Fraction(0)] * (full + 1)
        for mask in range(1, full + 1):
            low = mask & -mask
            xs[mask] = xs[mask ^ low] + x[low.bit_length() - 1]
        connected_only = eps >= 0 and all(
            level >= 0 for _, level in pinned.values()
        )
        out = []
        for mask in range(1, full):
            if connected_only and not connected[mask]:
                continue
            if mask in working or mask in pinned:
                continue
            surplus = xs[mask] - table[mask]
            if surplus < eps and not implied(mask):
                out.append((surplus, mask, table[mask]))
        return out

    return separate


def _stars_by_surplus(margins: list, cap: int):
    """Yield (leaf mask, margin total, weight total) for every leaf subset
    of size <= cap, in nondecreasing margin-total order.

    ``margins`` is sorted ascending by margin.  Best-first partition
    search: each popped node is a constrained subproblem (memberships of a
    leaf prefix forced), solved greedily by taking free negative margins
    while capacity lasts; its children re-force the prefix and flip one
    free decision, partitioning the remaining subsets without overlap.
    """
    d = len(margins)
    values = [m for m, _, _ in margins]

    def completion(start: int, chosen: tuple):
        take = list(chosen)
        total = sum((values[i] for i in chosen), Fraction(0))
        for q in range(start, d):
            if len(take) >= cap or values[q] >= 0:
                break
            take.append(q)
            total += values[q]
        return total, tuple(take)

    counter = 0
    total, take = completion(0, ())
    heap = [(total, counter, 0, take)]
    while heap:
        total, _, start, take = heapq.heappop(heap)
        tmask = 0
        wsum = Fraction(0)
        for i in take:
            tmask |= 1 << margins[i][1]
            wsum += margins[i][2]
        yield tmask, total, wsum
        takeset = set(take)
        for q in range(start, d):
            branch = tuple(i for i in take if i < q)
            if q not in takeset:
                branch += (q,)
                if len(branch) > cap:
                    continue
            counter += 1
            ctotal, ctake = completion(q + 1, branch)
            heapq.heappush(heap, (ctotal, counter, q + 1, ctake))


def _star_separator(inst: Instance) -> Callable:
    """Star-family separation: per centre, walk stars by increasing surplus
    and stop at the first one that is not pinned."""
    verts = inst.vertices
    idx = inst.index_of
    centres = []
    for v in verts:
        if inst.side[v] == "B":
            centres.append((idx[v], inst.capacity[v]))
    leaves: dict = {bi: [] for bi, _ in centres}
    for e in inst.edges:
        a, b = (e.u, e.v) if inst.side[e.u] == "A" else (e.v, e.u)
        leaves[idx[b]].append((idx[a], e.weight))

    def separate(
        x: list, eps: Fraction, working: dict, pinned: dict, implied: Callable
    ) -> list:
        out = []
        for bi, cap in centres:
            if not leaves[bi]:
                continue
            margins = sorted((x[ai] - w, ai, w) for ai, w in leaves[bi])
            for tmask, msum, wsum in _stars_by_surplus(margins, cap):
                mask = 1 << bi | tmask
                if mask in pinned or implied(mask):
                    # Settled rows may sit below eps legitimately; keep
                    # walking.  The grand coalition (not a family row) is
                    # caught here too: all-ones is always in the span.
                    continue
                if mask in working:
                    break  # holds at x, and all later stars are no better
                surplus = x[bi] + msum
                if surplus < eps:
                    out.append((surplus, mask, wsum))
                break
        return out

    return separate


# ---------------------------------------------------------------------------
# public operations


def nucleolus_bruteforce(inst: Instance) -> Allocation:
    """The nucleolus over every proper nonempty coalition (n <= 12)."""
    verts = inst.vertices
    n = len(verts)
    if n > BRUTEFORCE_VERTEX_LIMIT:
        raise TooLargeError(
            f"{n} vertices exceeds the brute-force nucleolus limit of "
            f"{BRUTEFORCE_VERTEX_LIMIT}"
        )
    table = _value_table(inst)
    full = (1 << n) - 1
    if n == 1:
        # No proper nonempty coalitions: efficiency alone pins the point.
        return {verts[0]: table[full]}
    initial = {1 << i: table[1 << i] for i in range(n)}
    x, _ = _peel(inst, table[full], initial, _table_separator(inst, table))
    return {verts[i]: x[i] for i in range(n)}


def nucleolus_pruned(inst: Instance) -> NucleolusRun:
    """The nucleolus of a ConstrainedBipartite instance via the star family.

    Runs the same peeling scheme as :func:`nucleolus_bruteforce` but only
    over singletons and stars around B-vertices, with stars generated on
    demand; returns the allocation together with the level audit trail.
    """
    if inst.mode != Mode.CONSTRAINED_BIPARTITE:
        raise WrongModeError(
            f"pruned nucleolus requires mode {Mode.CONSTRAINED_BIPARTITE!r}, "
            f"got {inst.mode!r}"
        )
    verts = inst.vertices
    n = len(verts)
    grand = model.coalition_value(inst, frozenset(verts))
    if n == 1:
        return NucleolusRun({verts[0]: grand}, LevelSequence(()))
    initial = {1 << i: Fraction(0) for i in range(n)}
    x, sequence = _peel(inst, grand, initial, _star_separator(inst))
    return NucleolusRun({verts[i]: x[i] for i in range(n)}, sequence)


def excess_profile(inst: Instance, x: Allocation, family) -> list:
    """Excesses v(S) - x(S) over ``family``, sorted non-increasing.

    ``family`` is an iterable of coalitions, or :data:`ALL` for every
    proper nonempty coalition (guarded by the brute-force limit).  Ties are
    broken by the canonical coalition order: member index tuples compared
    lexicographically.
    """
    verts = inst.vertices
    idx = inst.index_of
    missing = set(verts) - set(x)
    if missing:
        raise InstanceError(f"allocation misses vertices {sorted(missing)!r}")
    pay = {v: Fraction(x[v]) for v in verts}

    entries: list = []
    if family is ALL:
        n = len(verts)
        if n > BRUTEFORCE_VERTEX_LIMIT:
            raise TooLargeError(
                f"ALL over {n} vertices exceeds the enumeration limit of "
                f"{BRUTEFORCE_VERTEX_LIMIT}"
            )
        table = _value_table(inst)
        for mask in range(1, (1 << n) - 1):
            members = frozenset(verts[i] for i in _bits(mask))
            entries.append((members, table[mask]))
    else:
        seen = set()
        for raw in family:
            members = frozenset(raw)
            if not members:
                raise InstanceError("the empty coalition has no excess")
            unknown = members - set(verts)
            if unknown:
                raise InstanceError(f"unknown vertices {sorted(unknown)!r}")
            if members in seen:
                continue
            seen.add(members)
            entries.append((members, model.coalition_value(inst, members)))

    records = [
        ExcessRecord(members, value - sum(pay[v] for v in members))
        for members, value in entries
    ]
    records.sort(key=lambda r: (-r.excess, tuple(sorted(idx[v] for v in r.coalition))))
    return records


def _excess_value(entry) -> Fraction:
    if isinstance(entry, ExcessRecord):
        return entry.excess
    return Fraction(entry)


def lex_compare(p: Sequence, q: Sequence) -> Comparison:
    """Lexicographic order on equal-length sorted excess lists.

    Accepts :class:`ExcessRecord` lists (as produced by
    :func:`excess_profile`) or bare rationals.  LESS means the first
    profile is nucleolus-better.
    """
    if len(p) != len(q):
        raise LengthMismatchError(
            f"profiles have different lengths ({len(p)} vs {len(q)})"
        )
    for a, b in zip(p, q):
        av, bv = _excess_value(a), _excess_value(b)
        if av < bv:
            return Comparison.LESS
        if av > bv:
            return Comparison.GREATER
    return Comparison.EQUAL
