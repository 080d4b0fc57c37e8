import random
from fractions import Fraction as F
from itertools import combinations

import pytest

from netbargain.errors import (
    CapacityViolatesModeError,
    DuplicateEdgeError,
    InstanceError,
    NegativeWeightError,
    NonBipartiteEdgeError,
    OutcomeInvariantViolation,
    SelfLoopError,
)
from netbargain.model import (
    Mode,
    Outcome,
    build_instance,
    coalition_value,
    earnings,
    validate_outcome,
)

from conftest import random_general


def star_instance():
    return build_instance(
        ["a1", "a2", "a3", "b"],
        [("b", "a1", 3), ("b", "a2", 2), ("b", "a3", 1)],
        Mode.CONSTRAINED_BIPARTITE,
        capacity={"b": 2},
        side={"a1": "A", "a2": "A", "a3": "A", "b": "B"},
    )


def test_single_edge_instance():
    inst = build_instance(["a", "b"], [("a", "b", 10)], Mode.GENERAL_UNIT_CAP)
    assert inst.n == 2
    assert inst.edges[0].weight == 10
    assert inst.capacity["a"] == 1
    assert inst.edge_id("b", "a") == 0
    assert inst.other_end(0, "a") == "b"


def test_triangle_rejected_in_constrained_mode():
    with pytest.raises(NonBipartiteEdgeError):
        build_instance(
            ["a", "b", "c"],
            [("a", "b", 1), ("b", "c", 1), ("a", "c", 1)],
            Mode.CONSTRAINED_BIPARTITE,
            side={"a": "A", "b": "B", "c": "A"},
        )


def test_star_is_valid():
    inst = star_instance()
    assert inst.mode == Mode.CONSTRAINED_BIPARTITE
    assert inst.capacity["b"] == 2


def test_validation_errors():
    with pytest.raises(SelfLoopError):
        build_instance(["a"], [("a", "a", 1)], Mode.GENERAL_UNIT_CAP)
    with pytest.raises(DuplicateEdgeError):
        build_instance(["a", "b"], [("a", "b", 1), ("b", "a", 2)], Mode.GENERAL_UNIT_CAP)
    with pytest.raises(NegativeWeightError):
        build_instance(["a", "b"], [("a", "b", F(-1, 2))], Mode.GENERAL_UNIT_CAP)
    with pytest.raises(CapacityViolatesModeError):
        build_instance(["a", "b"], [("a", "b", 1)], Mode.GENERAL_UNIT_CAP, capacity={"a": 2})
    with pytest.raises(CapacityViolatesModeError):
        build_instance(
            ["a", "b"],
            [("a", "b", 1)],
            Mode.CONSTRAINED_BIPARTITE,
            capacity={"a": 2, "b": 3},
            side={"a": "A", "b": "B"},
        )
    with pytest.raises(InstanceError):
        build_instance(["a", "b"], [("a", "b", 0.5)], Mode.GENERAL_UNIT_CAP)
    with pytest.raises(InstanceError):
        build_instance(["a", "b"], [("a", "b", 1)], "Quadratic")
    with pytest.raises(InstanceError):
        build_instance(["a", "b"], [("a", "b", 1)], Mode.GENERAL_UNIT_CAP, capacity={"a": 0})


def test_instances_are_immutable_and_hashable():
    inst = star_instance()
    with pytest.raises(TypeError):
        inst.capacity["b"] = 5
    assert inst == star_instance()
    assert hash(inst) == hash(star_instance())
    assert inst != build_instance(["a", "b"], [("a", "b", 10)], Mode.GENERAL_UNIT_CAP)


def test_coalition_value_examples():
    p3 = build_instance(["a", "b", "c"], [("a", "b", 1), ("b", "c", 1)], Mode.GENERAL_UNIT_CAP)
    assert coalition_value(p3, frozenset({"a", "c"})) == 0
    assert coalition_value(p3, frozenset({"a", "b"})) == 1
    assert coalition_value(star_instance(), frozenset({"a1", "a2", "a3", "b"})) == 5
    assert coalition_value(p3, frozenset()) == 0
    with pytest.raises(InstanceError):
        coalition_value(p3, frozenset({"z"}))


def test_earnings_examples():
    se = build_instance(["a", "b"], [("a", "b", 10)], Mode.GENERAL_UNIT_CAP)
    o = Outcome(frozenset({0}), {(0, "a"): F(5), (0, "b"): F(5)})
    assert earnings(se, o) == {"a": 5, "b": 5}

    p3 = build_instance(["a", "b", "c"], [("a", "b", 1), ("b", "c", 1)], Mode.GENERAL_UNIT_CAP)
    o = Outcome(frozenset({0}), {(0, "a"): F(0), (0, "b"): F(1)})
    assert earnings(p3, o) == {"a": 0, "b": 1, "c": 0}

    star = star_instance()
    o = Outcome(
        frozenset({0, 1}),
        {(0, "a1"): F(2), (0, "b"): F(1), (1, "a2"): F(1), (1, "b"): F(1)},
    )
    assert earnings(star, o) == {"a1": 2, "a2": 1, "a3": 0, "b": 2}


def test_outcome_invariants_enforced():
    star = star_instance()
    bad_sum = Outcome(frozenset({0}), {(0, "a1"): F(1), (0, "b"): F(1)})
    with pytest.raises(OutcomeInvariantViolation):
        validate_outcome(star, bad_sum)
    negative = Outcome(frozenset({0}), {(0, "a1"): F(-1), (0, "b"): F(4)})
    with pytest.raises(OutcomeInvariantViolation):
        validate_outcome(star, negative)
    over_capacity = Outcome(
        frozenset({0, 1, 2}),
        {
            (0, "a1"): F(3), (0, "b"): F(0),
            (1, "a2"): F(2), (1, "b"): F(0),
            (2, "a3"): F(1), (2, "b"): F(0),
        },
    )
    with pytest.raises(OutcomeInvariantViolation):
        validate_outcome(star, over_capacity)
    stray_split = Outcome(frozenset({0}), {(0, "a1"): F(3), (0, "b"): F(0), (1, "b"): F(0)})
    with pytest.raises(OutcomeInvariantViolation):
        validate_outcome(star, stray_split)
    missing_split = Outcome(frozenset({0}), {(0, "a1"): F(3)})
    with pytest.raises(OutcomeInvariantViolation):
        validate_outcome(star, missing_split)


def test_coalition_value_monotone_and_superadditive():
    rng = random.Random(4242)
    for _ in range(25):
        inst = random_general(rng, n=rng.randint(3, 6))
        verts = list(inst.vertices)
        values = {}
        for r in range(len(verts) + 1):
            for combo in combinations(verts, r):
                values[frozenset(combo)] = coalition_value(inst, frozenset(combo))
        assert values[frozenset()] == 0
        for v in verts:
            assert values[frozenset({v})] == 0
        items = list(values.items())
        for S, vs in items:
            for T, vt in items:
                if S <= T:
                    assert vs <= vt
                if not (S & T):
                    assert vs + vt <= values[frozenset(S | T)]
