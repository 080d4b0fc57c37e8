import random
from fractions import Fraction as F

import pytest

from netbargain import lp
from netbargain.errors import TooLargeError
from netbargain.model import Mode, build_instance, coalition_value
from netbargain.oracle import (
    CoreReport,
    GameTable,
    build_game_table,
    core_lp_full,
    nucleolus_reference,
)

from conftest import random_bipartite, random_general


def p3():
    return build_instance(["a", "b", "c"], [("a", "b", 1), ("b", "c", 1)], Mode.GENERAL_UNIT_CAP)


def k3():
    return build_instance(
        ["a", "b", "c"],
        [("a", "b", 1), ("b", "c", 1), ("a", "c", 1)],
        Mode.GENERAL_UNIT_CAP,
    )


def star():
    return build_instance(
        ["a1", "a2", "a3", "b"],
        [("b", "a1", 3), ("b", "a2", 2), ("b", "a3", 1)],
        Mode.CONSTRAINED_BIPARTITE,
        capacity={"b": 2},
        side={"a1": "A", "a2": "A", "a3": "A", "b": "B"},
    )


def test_p3_table():
    t = build_game_table(p3())
    expected = {
        frozenset(): 0,
        frozenset("a"): 0, frozenset("b"): 0, frozenset("c"): 0,
        frozenset("ab"): 1, frozenset("bc"): 1, frozenset("ac"): 0,
        frozenset("abc"): 1,
    }
    assert dict(t.values) == {k: F(v) for k, v in expected.items()}


def test_single_edge_table():
    t = build_game_table(build_instance(["a", "b"], [("a", "b", 10)], Mode.GENERAL_UNIT_CAP))
    assert t.values[frozenset()] == 0
    assert t.values[frozenset("a")] == 0
    assert t.values[frozenset("b")] == 0
    assert t.values[frozenset("ab")] == 10
    assert t.grand_value == 10


def test_star_table():
    t = build_game_table(star())
    assert len(t.values) == 16
    assert t.values[frozenset({"b", "a1", "a3"})] == 4
    assert t.values[frozenset({"a1", "a2", "a3", "b"})] == 5
    assert t.values[frozenset({"a1", "a2", "a3"})] == 0


def test_table_guard():
    names = [f"v{i}" for i in range(15)]
    inst = build_instance(names, [], Mode.GENERAL_UNIT_CAP)
    with pytest.raises(TooLargeError):
        build_game_table(inst)


def test_tables_match_coalition_value_all_modes():
    rng = random.Random(2024)
    instances = []
    for _ in range(8):
        instances.append(random_general(rng, n=rng.randint(2, 6)))
    for _ in range(8):
        instances.append(random_bipartite(rng, na=rng.randint(1, 4), nb=rng.randint(1, 3),
                                          mode=Mode.CONSTRAINED_BIPARTITE))
    for _ in range(6):
        instances.append(random_bipartite(rng, na=rng.randint(1, 3), nb=rng.randint(1, 3),
                                          mode=Mode.BIPARTITE_CAP))
    for inst in instances:
        t = build_game_table(inst)
        for S, val in t.values.items():
            assert val == coalition_value(inst, S), (inst, sorted(S))


def test_table_invariants_hold():
    rng = random.Random(515)
    for _ in range(6):
        inst = random_general(rng, n=5)
        t = build_game_table(inst)
        masks = list(range(32))
        for s in masks:
            for u in masks:
                if s & u == 0:
                    assert t.by_mask[s] + t.by_mask[u] <= t.by_mask[s | u]
                if s | u == u:
                    assert t.by_mask[s] <= t.by_mask[u]
        for i in range(5):
            assert t.by_mask[1 << i] == 0
        assert t.by_mask[0] == 0


def test_k3_core_empty_with_certificate():
    rep = core_lp_full(build_game_table(k3()))
    assert rep.empty is True
    assert rep.least_core_eps == F(1, 3)
    assert rep.witness is None
    # the certificate is a balanced-style collection: per-vertex mass <= 1,
    # total covered value beyond v(N)
    total = sum(lam * F(1) for lam in rep.certificate.values())  # v(pair)=1
    assert all(len(S) == 2 for S in rep.certificate)
    assert total > 1


def test_p3_core_nonempty():
    rep = core_lp_full(build_game_table(p3()))
    assert rep.empty is False
    x = rep.witness
    assert sum(x.values()) == 1
    assert x["a"] + x["b"] >= 1 and x["b"] + x["c"] >= 1
    assert all(val >= 0 for val in x.values())


def test_single_edge_core_nonempty():
    rep = core_lp_full(build_game_table(
        build_instance(["a", "b"], [("a", "b", 10)], Mode.GENERAL_UNIT_CAP)))
    assert rep.empty is False


def _core_empty_explicit(table: GameTable) -> bool:
    """Independent check: the full 2^n-row LP with no row generation."""
    n = len(table.vertices)
    variables = [lp.Variable(f"x{i}") for i in range(n)] + [lp.Variable("eps", lower=None)]
    constraints = [
        lp.Constraint("eff", {f"x{i}": 1 for i in range(n)}, lp.Relation.EQ,
                      table.by_mask[(1 << n) - 1])
    ]
    for mask in range(1, (1 << n) - 1):
        coeffs = {f"x{i}": 1 for i in range(n) if mask >> i & 1}
        coeffs["eps"] = 1
        constraints.append(lp.Constraint(f"S{mask}", coeffs, lp.Relation.GE,
                                         table.by_mask[mask]))
    sol = lp.solve(lp.LinearProgram(variables, constraints, lp.Sense.MIN, {"eps": 1}))
    return sol.objective_value > 0


def test_row_generation_agrees_with_explicit_lp():
    rng = random.Random(31337)
    for _ in range(12):
        inst = random_general(rng, n=rng.randint(2, 5), density=0.7)
        t = build_game_table(inst)
        rep = core_lp_full(t)
        assert rep.empty == _core_empty_explicit(t)
        if not rep.empty:
            xs = rep.witness
            for S, val in t.values.items():
                assert sum((xs[v] for v in S), F(0)) >= val


def test_certificates_rule_out_core_points():
    """On empty-core instances the returned weights must make any candidate
    core point infeasible: sum of weighted coalition values exceeds v(N)
    while no vertex is over-covered."""
    rng = random.Random(90210)
    found = 0
    for _ in range(60):
        inst = random_general(rng, n=rng.randint(3, 6), density=0.8)
        t = build_game_table(inst)
        rep = core_lp_full(t)
        if not rep.empty:
            continue
        found += 1
        per_vertex = {v: F(0) for v in t.vertices}
        covered = F(0)
        for S, lam in rep.certificate.items():
            assert lam > 0
            covered += lam * t.values[S]
            for v in S:
                per_vertex[v] += lam
        assert covered > t.grand_value
        assert all(s <= 1 for s in per_vertex.values())
    assert found >= 5  # odd components with unit weights are common enough


def test_nucleolus_reference_fixtures():
    assert nucleolus_reference(build_game_table(p3())) == {"a": 0, "b": 1, "c": 0}
    se = build_instance(["a", "b"], [("a", "b", 10)], Mode.GENERAL_UNIT_CAP)
    assert nucleolus_reference(build_game_table(se)) == {"a": 5, "b": 5}
    p4 = build_instance(
        ["a", "b", "c", "d"],
        [("a", "b", 1), ("b", "c", 1), ("c", "d", 1)],
        Mode.GENERAL_UNIT_CAP,
    )
    assert nucleolus_reference(build_game_table(p4)) == {
        "a": F(1, 3), "b": F(2, 3), "c": F(2, 3), "d": F(1, 3)
    }
    assert nucleolus_reference(build_game_table(k3())) == {
        "a": F(1, 3), "b": F(1, 3), "c": F(1, 3)
    }
    assert nucleolus_reference(build_game_table(star())) == {
        "a1": 1, "a2": F(1, 2), "a3": 0, "b": F(7, 2)
    }


def test_nucleolus_reference_guard():
    names = [f"v{i}" for i in range(13)]
    t = build_game_table(build_instance(names, [], Mode.GENERAL_UNIT_CAP))
    with pytest.raises(TooLargeError):
        nucleolus_reference(t)


def test_nucleolus_reference_is_an_imputation_in_the_least_core():
    rng = random.Random(640)
    for _ in range(10):
        inst = random_general(rng, n=rng.randint(2, 6))
        t = build_game_table(inst)
        x = nucleolus_reference(t)
        assert sum(x.values()) == t.grand_value
        assert all(val >= 0 for val in x.values())
        rep = core_lp_full(t)
        # worst surplus of the nucleolus equals the least-core optimum
        n = len(t.vertices)
        worst = min(
            sum((x[v] for v in S), F(0)) - val
            for S, val in t.values.items()
            if 0 < len(S) < n
        )
        assert worst == -rep.least_core_eps
