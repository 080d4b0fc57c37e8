"""Game instances, outcomes, coalitions, and the characteristic function.

An :class:`Instance` is a weighted graph with per-vertex contract capacities
and a mode flag that pins down which market structure it describes:

* ``GeneralUnitCap`` — arbitrary graph, every capacity is 1, no sides.
* ``BipartiteCap`` — bipartite, arbitrary integer capacities on both sides.
* ``ConstrainedBipartite`` — bipartite where every A-side agent may enter at
  most one contract (capacity exactly 1); B-side capacities are arbitrary.

The characteristic function ``v(S)`` of the induced cooperative game is the
weight of a maximum-weight b-matching inside ``S``. Everything downstream
(stability, balance, core, nucleolus) is phrased against these types.

All values are exact rationals; instances and outcomes are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple

from .errors import (
    CapacityViolatesModeError,
    DuplicateEdgeError,
    InstanceError,
    NegativeWeightError,
    NonBipartiteEdgeError,
    OutcomeInvariantViolation,
    SelfLoopError,
)

# Coalitions are plain frozensets of agent ids; allocations are plain dicts.
Coalition = frozenset
Allocation = dict


class Mode:
    """Instance modes; values double as the on-disk spelling."""

    GENERAL_UNIT_CAP = "GeneralUnitCap"
    BIPARTITE_CAP = "BipartiteCap"
    CONSTRAINED_BIPARTITE = "ConstrainedBipartite"

    ALL = (GENERAL_UNIT_CAP, BIPARTITE_CAP, CONSTRAINED_BIPARTITE)
    BIPARTITE = (BIPARTITE_CAP, CONSTRAINED_BIPARTITE)


class Edge(NamedTuple):
    u: str
    v: str
    weight: Fraction


def _as_weight(value) -> Fraction:
    if isinstance(value, float):
        raise InstanceError(f"edge weight {value!r} is a float; weights must be exact rationals")
    return Fraction(value)


class Instance:
    """A validated, immutable game instance.

    Vertices keep their declaration order (which fixes the dense index used
    throughout), edges keep theirs (which fixes edge ids). Equality and
    hashing are by content, so instances can key caches.
    """

    __slots__ = (
        "vertices",
        "side",
        "capacity",
        "edges",
        "mode",
        "index_of",
        "incident",
        "_pair_ids",
        "_hash",
    )

    def __init__(
        self,
        vertices: Iterable[str],
        side: Mapping[str, str | None],
        capacity: Mapping[str, int],
        edges: Iterable[Edge],
        mode: str,
    ):
        self.vertices: tuple[str, ...] = tuple(vertices)
        self.side: Mapping[str, str | None] = MappingProxyType(dict(side))
        self.capacity: Mapping[str, int] = MappingProxyType(dict(capacity))
        self.edges: tuple[Edge, ...] = tuple(edges)
        self.mode: str = mode
        self.index_of: Mapping[str, int] = MappingProxyType(
            {v: i for i, v in enumerate(self.vertices)}
        )
        incident: dict[str, list[int]] = {v: [] for v in self.vertices}
        pair_ids: dict[frozenset, int] = {}
        for eid, e in enumerate(self.edges):
            incident[e.u].append(eid)
            incident[e.v].append(eid)
            pair_ids[frozenset((e.u, e.v))] = eid
        self.incident: Mapping[str, tuple[int, ...]] = MappingProxyType(
            {v: tuple(ids) for v, ids in incident.items()}
        )
        self._pair_ids: Mapping[frozenset, int] = MappingProxyType(pair_ids)
        self._hash = hash((self.vertices, tuple(sorted(self.side.items(), key=lambda kv: kv[0])),
                           tuple(sorted(self.capacity.items())), self.edges, self.mode))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def grand_coalition(self) -> Coalition:
        return frozenset(self.vertices)

    def edge_id(self, u: str, v: str) -> int | None:
        """Edge id for the unordered pair, or None if absent."""
        return self._pair_ids.get(frozenset((u, v)))

    def other_end(self, eid: int, v: str) -> str:
        e = self.edges[eid]
        return e.v if v == e.u else e.u

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and dict(self.side) == dict(other.side)
            and dict(self.capacity) == dict(other.capacity)
            and self.edges == other.edges
            and self.mode == other.mode
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return (
            f"Instance(mode={self.mode}, |V|={len(self.vertices)}, "
            f"|E|={len(self.edges)})"
        )


def build_instance(
    vertices: Iterable[str],
    edges: Iterable[tuple],
    mode: str,
    capacity: Mapping[str, int] | None = None,
    side: Mapping[str, str | None] | None = None,
) -> Instance:
    """Validate and construct an :class:`Instance`.

    ``edges`` is an iterable of ``(u, v, weight)``. ``capacity`` defaults to 1
    everywhere; ``side`` defaults to ``None`` everywhere (it is required for
    the bipartite modes, where each edge must join an A-vertex to a
    B-vertex). Raises a subclass of :class:`InstanceError` naming the first
    violated invariant.
    """
    verts = tuple(vertices)
    if len(set(verts)) != len(verts):
        raise InstanceError("duplicate vertex id")
    if mode not in Mode.ALL:
        raise InstanceError(f"unknown mode {mode!r}; expected one of {Mode.ALL}")
    vset = set(verts)

    cap = {v: 1 for v in verts}
    for v, c in (capacity or {}).items():
        if v not in vset:
            raise InstanceError(f"capacity given for unknown vertex {v!r}")
        if not isinstance(c, int) or isinstance(c, bool) or c < 1:
            raise InstanceError(f"capacity of {v!r} must be a positive integer, got {c!r}")
        cap[v] = c

    sides: dict[str, str | None] = {v: None for v in verts}
    for v, s in (side or {}).items():
        if v not in vset:
            raise InstanceError(f"side given for unknown vertex {v!r}")
        if s not in ("A", "B", None):
            raise InstanceError(f"side of {v!r} must be 'A', 'B', or None, got {s!r}")
        sides[v] = s

    built: list[Edge] = []
    seen_pairs: set[frozenset] = set()
    for raw in edges:
        u, v, w = raw
        if u not in vset or v not in vset:
            raise InstanceError(f"edge ({u!r}, {v!r}) references an unknown vertex")
        if u == v:
            raise SelfLoopError(f"self-loop at {u!r}")
        key = frozenset((u, v))
        if key in seen_pairs:
            raise DuplicateEdgeError(f"duplicate edge between {u!r} and {v!r}")
        seen_pairs.add(key)
        weight = _as_weight(w)
        if weight < 0:
            raise NegativeWeightError(f"edge ({u!r}, {v!r}) has negative weight {weight}")
        built.append(Edge(u, v, weight))

    if mode == Mode.GENERAL_UNIT_CAP:
        for v in verts:
            if cap[v] != 1:
                raise CapacityViolatesModeError(
                    f"{Mode.GENERAL_UNIT_CAP} requires capacity 1 everywhere; {v!r} has {cap[v]}"
                )
            if sides[v] is not None:
                raise InstanceError(
                    f"{Mode.GENERAL_UNIT_CAP} instances carry no sides; {v!r} is on side {sides[v]!r}"
                )
    else:
        for e in built:
            su, sv = sides[e.u], sides[e.v]
            if {su, sv} != {"A", "B"}:
                raise NonBipartiteEdgeError(
                    f"edge ({e.u!r}, {e.v!r}) must join an A-vertex to a B-vertex "
                    f"(got sides {su!r}, {sv!r})"
                )
        if mode == Mode.CONSTRAINED_BIPARTITE:
            for v in verts:
                if sides[v] == "A" and cap[v] != 1:
                    raise CapacityViolatesModeError(
                        f"{Mode.CONSTRAINED_BIPARTITE} requires capacity 1 on side A; "
                        f"{v!r} has {cap[v]}"
                    )

    return Instance(verts, sides, cap, built, mode)


@dataclass(frozen=True)
class Outcome:
    """A contract set (by edge id) with per-contract surplus splits.

    ``splits`` maps ``(edge_id, vertex)`` to that endpoint's share; for every
    contract the two shares are nonnegative and sum to the edge weight.
    """

    contracts: frozenset
    splits: Mapping[tuple, Fraction]

    def share(self, eid: int, v: str) -> Fraction:
        return self.splits[(eid, v)]


def validate_outcome(inst: Instance, o: Outcome) -> None:
    """Check the Outcome invariants against ``inst``; raise on violation."""
    degree: dict[str, int] = {v: 0 for v in inst.vertices}
    for eid in o.contracts:
        if not (0 <= eid < len(inst.edges)):
            raise OutcomeInvariantViolation(f"contract refers to unknown edge id {eid}")
        e = inst.edges[eid]
        degree[e.u] += 1
        degree[e.v] += 1
        for end in (e.u, e.v):
            if (eid, end) not in o.splits:
                raise OutcomeInvariantViolation(
                    f"missing split for contract {eid} at vertex {end!r}"
                )
            if o.splits[(eid, end)] < 0:
                raise OutcomeInvariantViolation(
                    f"negative split for contract {eid} at vertex {end!r}"
                )
        if o.splits[(eid, e.u)] + o.splits[(eid, e.v)] != e.weight:
            raise OutcomeInvariantViolation(
                f"splits on contract {eid} do not sum to its weight {e.weight}"
            )
    for (eid, end) in o.splits:
        if eid not in o.contracts:
            raise OutcomeInvariantViolation(
                f"split given for edge {eid} which is not a contract"
            )
        e = inst.edges[eid]
        if end not in (e.u, e.v):
            raise OutcomeInvariantViolation(
                f"split for contract {eid} names non-endpoint {end!r}"
            )
    for v in inst.vertices:
        if degree[v] > inst.capacity[v]:
            raise OutcomeInvariantViolation(
                f"vertex {v!r} holds {degree[v]} contracts, capacity {inst.capacity[v]}"
            )


def earnings(inst: Instance, o: Outcome) -> Allocation:
    """The earnings vector x: each vertex's total share over its contracts."""
    validate_outcome(inst, o)
    x: Allocation = {v: Fraction(0) for v in inst.vertices}
    for eid in o.contracts:
        e = inst.edges[eid]
        x[e.u] += o.splits[(eid, e.u)]
        x[e.v] += o.splits[(eid, e.v)]
    return x


def coalition_value(inst: Instance, S: Coalition) -> Fraction:
    """v(S): the weight of a maximum-weight b-matching inside ``S``.

    Dispatch: exhaustive search when the induced edge count is within the
    guard; otherwise the LP relaxation, which is exact on the bipartite
    modes (integral capacitated transportation polytope). A large
    non-bipartite coalition raises TooLarge.
    """
    from . import matching  # deferred: matching depends on these types

    unknown = set(S) - set(inst.vertices)
    if unknown:
        raise InstanceError(f"coalition contains unknown vertices {sorted(unknown)!r}")
    inside = [e for e in inst.edges if e.u in S and e.v in S]
    if not inside:
        return Fraction(0)
    limit = matching.EXACT_EDGE_LIMIT
    if inst.mode == Mode.GENERAL_UNIT_CAP and len(S) <= 14:
        # matchings hold at most |S|//2 edges, so even a complete induced
        # subgraph enumerates quickly; dense small coalitions stay exact
        limit = max(limit, len(inside))
    if len(inside) <= limit:
        value, _ = matching.bmatching_exact(inst, S, edge_limit=limit)
        return value
    if inst.mode in Mode.BIPARTITE:
        return matching.bmatching_lp(inst, S).lp_value
    return matching.bmatching_exact(inst, S)[0]  # raises TooLarge with context
