"""Shared helpers: small random instances for seeded property tests."""

import random
from fractions import Fraction as F

from netbargain.model import Instance, Mode, build_instance


def random_general(rng: random.Random, n: int | None = None, density: float = 0.5,
                   max_num: int = 12, den: int = 4) -> Instance:
    """Random GeneralUnitCap instance on n vertices with rational weights."""
    if n is None:
        n = rng.randint(2, 8)
    names = [f"v{i}" for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                edges.append((names[i], names[j], F(rng.randint(0, max_num), rng.choice([1, 2, den]))))
    return build_instance(names, edges, Mode.GENERAL_UNIT_CAP)


def random_bipartite(rng: random.Random, na: int | None = None, nb: int | None = None,
                     mode: str = Mode.BIPARTITE_CAP, density: float = 0.6,
                     max_cap: int = 3) -> Instance:
    """Random bipartite instance; side-A caps are forced to 1 in the
    constrained mode."""
    if na is None:
        na = rng.randint(1, 5)
    if nb is None:
        nb = rng.randint(1, 4)
    A = [f"a{i}" for i in range(na)]
    B = [f"b{j}" for j in range(nb)]
    side = {**{a: "A" for a in A}, **{b: "B" for b in B}}
    capacity = {}
    for a in A:
        capacity[a] = 1 if mode == Mode.CONSTRAINED_BIPARTITE else rng.randint(1, max_cap)
    for b in B:
        capacity[b] = rng.randint(1, max_cap)
    edges = []
    for a in A:
        for b in B:
            if rng.random() < density:
                edges.append((a, b, F(rng.randint(0, 10), rng.choice([1, 1, 2, 3]))))
    return build_instance(A + B, edges, mode, capacity=capacity, side=side)


def random_coalition(rng: random.Random, inst: Instance) -> frozenset:
    return frozenset(v for v in inst.vertices if rng.random() < 0.6)
