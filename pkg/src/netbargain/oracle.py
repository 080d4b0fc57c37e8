"""Brute-force ground truth, kept deliberately independent of the solver
modules.

Everything here recomputes the game from first principles so that a bug in
the production code path cannot hide: characteristic-function tables come
from mode-specific exhaustive dynamic programs (not from the matching
module), core emptiness is decided against the full 2^n coalition family
with an exactly verified Bondareva-style certificate on the empty side, and
the nucleolus is recomputed by a second scheme that fixes coalitions by dual
positivity rather than by face probing. The only shared machinery is the
generic rational LP solver and the Instance/GameTable vocabulary.

Guards are intentional: tables stop at n = 14 and the reference nucleolus at
n = 12. The oracle exists to validate, not to perform.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import lp
from .errors import LPInternalError, TooLargeError
from .model import Allocation, Coalition, Instance, Mode

TABLE_VERTEX_LIMIT = 14
REFERENCE_VERTEX_LIMIT = 12


@dataclass(frozen=True)
class GameTable:
    """v(S) for every one of the 2^n coalitions of an instance.

    ``by_mask[m]`` is v of the coalition whose members are the vertices at
    the set bit positions of ``m`` (declaration order); ``values`` is the
    same table keyed by frozenset.
    """

    instance: Instance
    vertices: tuple
    by_mask: tuple
    values: Mapping[Coalition, Fraction]

    @property
    def instance_hash(self) -> int:
        return hash(self.instance)

    def value(self, S: Coalition) -> Fraction:
        return self.values[frozenset(S)]

    @property
    def grand_value(self) -> Fraction:
        return self.by_mask[-1]


def build_game_table(inst: Instance) -> GameTable:
    """Tabulate v over all subsets with a mode-specific exhaustive method."""
    n = len(inst.vertices)
    if n > TABLE_VERTEX_LIMIT:
        raise TooLargeError(
            f"{n} vertices exceeds the oracle table limit of {TABLE_VERTEX_LIMIT}"
        )
    if inst.mode == Mode.GENERAL_UNIT_CAP:
        by_mask = _table_matching_dp(inst)
    elif inst.mode == Mode.CONSTRAINED_BIPARTITE:
        by_mask = _table_star_dp(inst)
    else:
        by_mask = _table_edge_subsets(inst)
    values = {}
    for mask in range(1 << n):
        members = frozenset(inst.vertices[i] for i in range(n) if mask >> i & 1)
        values[members] = by_mask[mask]
    return GameTable(inst, tuple(inst.vertices), tuple(by_mask), values)


def _table_matching_dp(inst: Instance) -> list:
    """Unit capacities: T[mask] = max-weight matching inside mask, by pairing
    off the lowest vertex or leaving it single."""
    n = len(inst.vertices)
    idx = inst.index_of
    w = [[None] * n for _ in range(n)]
    for e in inst.edges:
        i, j = idx[e.u], idx[e.v]
        w[i][j] = w[j][i] = e.weight
    zero = Fraction(0)
    T = [zero] * (1 << n)
    for mask in range(1, 1 << n):
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        best = T[rest]
        wi = w[i]
        sub = rest
        while sub:
            j = (sub & -sub).bit_length() - 1
            if wi[j] is not None:
                cand = wi[j] + T[rest ^ (1 << j)]
                if cand > best:
                    best = cand
            sub ^= 1 << j
        T[mask] = best
    return T


def _table_star_dp(inst: Instance) -> list:
    """A-side capacities are 1, so every b-matching is a disjoint union of
    stars centered on B; optimize star by star over available A-vertices."""
    n = len(inst.vertices)
    A = [v for v in inst.vertices if inst.side[v] == "A"]
    B = [v for v in inst.vertices if inst.side[v] == "B"]
    apos = {v: i for i, v in enumerate(A)}
    bpos = {v: i for i, v in enumerate(B)}
    na, nb = len(A), len(B)
    nbr = [0] * nb
    wts = [dict() for _ in range(nb)]
    for e in inst.edges:
        a, b = (e.u, e.v) if inst.side[e.u] == "A" else (e.v, e.u)
        ai, bi = apos[a], bpos[b]
        nbr[bi] |= 1 << ai
        wts[bi][ai] = e.weight
    zero = Fraction(0)
    # wsum[bi][t] = total weight of b_i's edges to the A-subset t
    wsum = []
    for bi in range(nb):
        table = {0: zero}
        sub = nbr[bi]
        masks = []
        t = sub
        while t:
            masks.append(t)
            t = (t - 1) & sub
        for t in reversed(masks):
            low = (t & -t).bit_length() - 1
            table[t] = table[t ^ (1 << low)] + wts[bi][low]
        wsum.append(table)
    caps = [inst.capacity[b] for b in B]

    g = [[zero] * (1 << na) for _ in range(1 << nb)]
    for bmask in range(1, 1 << nb):
        bi = (bmask & -bmask).bit_length() - 1
        rest = bmask ^ (1 << bi)
        grest = g[rest]
        grow = g[bmask]
        cap = caps[bi]
        table = wsum[bi]
        for amask in range(1 << na):
            best = grest[amask]
            t = nbr[bi] & amask
            while t:
                if t.bit_count() <= cap:
                    cand = table[t] + grest[amask ^ t]
                    if cand > best:
                        best = cand
                t = (t - 1) & (nbr[bi] & amask)
            grow[amask] = best

    abit = {v: apos[v] for v in A}
    bbit = {v: bpos[v] for v in B}
    out = [zero] * (1 << n)
    for mask in range(1 << n):
        amask = bmask = 0
        m = mask
        while m:
            i = (m & -m).bit_length() - 1
            v = inst.vertices[i]
            if v in abit:
                amask |= 1 << abit[v]
            elif v in bbit:
                bmask |= 1 << bbit[v]
            m ^= 1 << i
        out[mask] = g[bmask][amask]
    return out


def _table_edge_subsets(inst: Instance) -> list:
    """General capacities: exhaustive take/skip search over the edges inside
    each subset, pruned by the remaining total weight."""
    n = len(inst.vertices)
    idx = inst.index_of
    zero = Fraction(0)
    out = [zero] * (1 << n)
    edges = [(idx[e.u], idx[e.v], e.weight) for e in inst.edges]
    base_caps = [inst.capacity[v] for v in inst.vertices]
    for mask in range(1, 1 << n):
        inside = [(u, v, w) for (u, v, w) in edges if mask >> u & 1 and mask >> v & 1]
        if not inside:
            continue
        suffix = [zero] * (len(inside) + 1)
        for k in range(len(inside) - 1, -1, -1):
            suffix[k] = suffix[k + 1] + inside[k][2]
        caps = list(base_caps)
        best = zero

        def dfs(k: int, cur: Fraction) -> None:
            nonlocal best
            if cur > best:
                best = cur
            if k == len(inside) or cur + suffix[k] <= best:
                return
            u, v, w = inside[k]
            if caps[u] > 0 and caps[v] > 0:
                caps[u] -= 1
                caps[v] -= 1
                dfs(k + 1, cur + w)
                caps[u] += 1
                caps[v] += 1
            dfs(k + 1, cur)

        dfs(0, zero)
        out[mask] = best
    return out


# ---------------------------------------------------------------------------
# core over the full coalition family


@dataclass(frozen=True)
class CoreReport:
    """Outcome of the full-family core feasibility decision.

    ``least_core_eps`` is the optimum of min eps s.t. x(S) + eps >= v(S) over
    every proper nonempty coalition; the core is empty iff it is positive.
    On the nonempty side ``witness`` is a core allocation; on the empty side
    ``certificate`` carries coalition weights lambda >= 0 with per-vertex
    sums at most 1 and sum(lambda * v(S)) > v(N), which no core point could
    satisfy. The certificate is re-verified exactly before it is returned.
    """

    empty: bool
    least_core_eps: Fraction
    witness: Allocation | None
    certificate: Mapping[Coalition, Fraction] | None


def _coalition_sums(x_by_index: list, n: int) -> list:
    xs = [Fraction(0)] * (1 << n)
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        xs[mask] = xs[mask ^ (1 << low)] + x_by_index[low]
    return xs


def core_lp_full(table: GameTable) -> CoreReport:
    """Decide core emptiness against all 2^n coalition constraints.

    The LP is solved by row generation, but optimality is certified against
    the complete family by exhaustive scan, so the answer is exactly the
    full LP's. (A working set keeps the tableau small; the scan keeps it
    honest.)
    """
    verts = table.vertices
    n = len(verts)
    v = table.by_mask
    grand = (1 << n) - 1
    if n == 1:
        return CoreReport(False, Fraction(0), {verts[0]: v[grand]}, None)

    working: list[int] = [1 << i for i in range(n)]
    seen = set(working)
    while True:
        variables = [lp.Variable(f"x{i}") for i in range(n)] + [
            lp.Variable("eps", lower=None)
        ]
        constraints = [
            lp.Constraint("eff", {f"x{i}": 1 for i in range(n)}, lp.Relation.EQ, v[grand])
        ]
        for mask in working:
            coeffs = {f"x{i}": 1 for i in range(n) if mask >> i & 1}
            coeffs["eps"] = 1
            constraints.append(lp.Constraint(f"S{mask}", coeffs, lp.Relation.GE, v[mask]))
        sol = lp.solve(lp.LinearProgram(variables, constraints, lp.Sense.MIN, {"eps": 1}))
        if sol.status is not lp.Status.OPTIMAL:  # pragma: no cover
            raise LPInternalError(f"least-core LP reported {sol.status.value}")
        eps = sol.objective_value
        x = [sol.primal[f"x{i}"] for i in range(n)]
        xs = _coalition_sums(x, n)
        violated = sorted(
            (xs[mask] - v[mask], mask)
            for mask in range(1, grand)
            if mask not in seen and xs[mask] - v[mask] < -eps
        )[:10]
        if not violated:
            break
        for _, mask in violated:
            working.append(mask)
            seen.add(mask)

    if eps <= 0:
        witness = {verts[i]: x[i] for i in range(n)}
        return CoreReport(False, eps, witness, None)

    # Empty: normalize the duals of the generated rows into coalition
    # weights and check the certificate against the table, exactly.
    mu = sol.dual["eff"]
    t = -mu
    weights = {}
    for mask in working:
        lam = sol.dual[f"S{mask}"]
        if lam > 0:
            weights[mask] = lam
    if t <= 0 or not weights:  # pragma: no cover - impossible at eps > 0
        raise LPInternalError("emptiness certificate has no mass")
    cert_value = Fraction(0)
    per_vertex = [Fraction(0)] * n
    certificate = {}
    for mask, lam in weights.items():
        share = lam / t
        certificate[frozenset(verts[i] for i in range(n) if mask >> i & 1)] = share
        cert_value += share * v[mask]
        for i in range(n):
            if mask >> i & 1:
                per_vertex[i] += share
    if any(s > 1 for s in per_vertex) or cert_value <= v[grand]:  # pragma: no cover
        raise LPInternalError("emptiness certificate failed exact verification")
    return CoreReport(True, eps, None, certificate)


# ---------------------------------------------------------------------------
# reference nucleolus


def _rank(rows: list) -> int:
    """Rank of a small rational matrix by Gaussian elimination."""
    mat = [list(r) for r in rows]
    rank = 0
    cols = len(mat[0]) if mat else 0
    for c in range(cols):
        pivot = None
        for r in range(rank, len(mat)):
            if mat[r][c] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        prow = mat[rank]
        inv = Fraction(1) / prow[c]
        mat[rank] = prow = [val * inv for val in prow]
        for r in range(len(mat)):
            if r != rank and mat[r][c] != 0:
                f = mat[r][c]
                mat[r] = [a - f * b for a, b in zip(mat[r], prow)]
        rank += 1
        if rank == len(mat):
            break
    return rank


def nucleolus_reference(table: GameTable) -> Allocation:
    """Nucleolus over the imputation set, recomputed for cross-checking.

    Scheme: repeatedly maximize the worst coalition surplus x(S) - v(S) over
    the not-yet-fixed family (every proper nonempty coalition), certify the
    optimum against the whole family by scanning the table, then fix every
    working row whose dual is nonzero — dual positivity forces tightness in
    every optimum, and the dual of the epsilon column guarantees at least
    one new row is fixed per round. Individual rationality is carried as
    explicit x_v >= 0 rows so the same dual rule can pin variables to zero.
    Stops when the fixed equalities determine a unique point.

    The row set is kept small the same way the solver keeps its own small:
    a coalition whose indicator lies in the span of the enforced equalities
    has x(S) constant wherever they hold, so fixing it is a no-op — such
    rows are fixed without being emitted as equalities and the table scan
    skips them, and non-singleton rows that go slack are dropped (the scan
    re-finds them if they ever bind again). Neither changes any program the
    scheme solves, so the computed point is the full-family nucleolus.
    """
    verts = table.vertices
    n = len(verts)
    if n > REFERENCE_VERTEX_LIMIT:
        raise TooLargeError(
            f"{n} vertices exceeds the reference nucleolus limit of "
            f"{REFERENCE_VERTEX_LIMIT}"
        )
    v = table.by_mask
    grand = (1 << n) - 1
    if n == 1:
        return {verts[0]: v[grand]}

    fixed_exc: dict[int, Fraction] = {}
    eq_masks: list[int] = []  # span-extending fixed coalitions: emitted as EQ
    fixed_zero: set[int] = set()
    working: list[int] = [1 << i for i in range(n)]
    span: list = [[Fraction(1)] * n]  # independent rows of enforced equalities
    implied_cache: set[int] = set()  # span only grows, so implied is forever

    def extends(vec: list) -> bool:
        return _rank(span + [vec]) > len(span)

    def implied(mask: int) -> bool:
        if mask in implied_cache:
            return True
        vec = [Fraction(1 if mask >> i & 1 else 0) for i in range(n)]
        if extends(vec):
            return False
        implied_cache.add(mask)
        return True

    while True:
        in_working = set(working)
        variables = [lp.Variable(f"x{i}", lower=None) for i in range(n)]
        variables.append(lp.Variable("eps", lower=None))
        constraints = [
            lp.Constraint("eff", {f"x{i}": 1 for i in range(n)}, lp.Relation.EQ, v[grand])
        ]
        for i in range(n):
            if i in fixed_zero:
                constraints.append(lp.Constraint(f"nn{i}", {f"x{i}": 1}, lp.Relation.EQ, 0))
            else:
                constraints.append(lp.Constraint(f"nn{i}", {f"x{i}": 1}, lp.Relation.GE, 0))
        for mask in eq_masks:
            coeffs = {f"x{i}": 1 for i in range(n) if mask >> i & 1}
            constraints.append(
                lp.Constraint(f"S{mask}", coeffs, lp.Relation.EQ, v[mask] + fixed_exc[mask])
            )
        for mask in working:
            coeffs = {f"x{i}": 1 for i in range(n) if mask >> i & 1}
            coeffs["eps"] = -1
            constraints.append(lp.Constraint(f"S{mask}", coeffs, lp.Relation.GE, v[mask]))
        sol = lp.solve(
            lp.LinearProgram(variables, constraints, lp.Sense.MAX, {"eps": 1})
        )
        if sol.status is not lp.Status.OPTIMAL:  # pragma: no cover
            raise LPInternalError(f"reference round reported {sol.status.value}")
        eps = sol.objective_value
        x = [sol.primal[f"x{i}"] for i in range(n)]

        xs = _coalition_sums(x, n)
        violated = sorted(
            (xs[mask] - v[mask], mask)
            for mask in range(1, grand)
            if mask not in fixed_exc and mask not in in_working
            and xs[mask] - v[mask] < eps
        )
        added = 0
        for _, mask in violated:
            if implied(mask):
                continue
            working.append(mask)
            added += 1
            if added == 40:
                break
        if added:
            continue

        # Certified level; fix dual-positive rows at it and pin variables
        # whose nonnegativity row carries dual weight.
        for i in range(n):
            if i not in fixed_zero and sol.dual[f"nn{i}"] != 0:
                fixed_zero.add(i)
                unit = [Fraction(1 if j == i else 0) for j in range(n)]
                if extends(unit):
                    span.append(unit)
        newly = 0
        still: list[int] = []
        for mask in working:
            if sol.dual[f"S{mask}"] != 0:
                fixed_exc[mask] = eps
                newly += 1
                vec = [Fraction(1 if mask >> i & 1 else 0) for i in range(n)]
                if extends(vec):
                    span.append(vec)
                    eq_masks.append(mask)
            else:
                still.append(mask)
        if newly == 0:  # pragma: no cover - excluded by the eps-column dual
            raise LPInternalError("no coalition fixed in a reference round")

        if len(span) == n:
            return {verts[i]: x[i] for i in range(n)}
        working = [
            mask
            for mask in still
            if mask & (mask - 1) == 0 or xs[mask] - v[mask] == eps
        ]
        if not working:
            working = [
                next(
                    m for m in range(1, grand)
                    if m not in fixed_exc and not implied(m)
                )
            ]
