import hashlib
import json
from fractions import Fraction as F

import pytest

from netbargain.errors import InstanceError, InvalidParamsError, ParseError
from netbargain.io_cli import (
    SplitMix64,
    cli_main,
    generate,
    instance_digest,
    parse_allocation,
    parse_instance,
    serialize_instance,
)
from netbargain.model import Mode, coalition_value

P3_DOC = """
{"mode": "GeneralUnitCap",
 "agents": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
 "edges": [{"u": "a", "v": "b", "w": "1"}, {"u": "b", "v": "c", "w": "1"}]}
"""

K3_DOC = json.dumps(
    {
        "mode": "GeneralUnitCap",
        "agents": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
        "edges": [
            {"u": "a", "v": "b", "w": "1"},
            {"u": "b", "v": "c", "w": "1"},
            {"u": "a", "v": "c", "w": "1"},
        ],
    }
)

P4_DOC = json.dumps(
    {
        "mode": "GeneralUnitCap",
        "agents": [{"id": v} for v in "abcd"],
        "edges": [
            {"u": "a", "v": "b", "w": "1"},
            {"u": "b", "v": "c", "w": "1"},
            {"u": "c", "v": "d", "w": "1"},
        ],
    }
)


def test_parse_p3_document():
    inst = parse_instance(P3_DOC)
    assert inst.vertices == ("a", "b", "c")
    assert len(inst.edges) == 2
    assert inst.mode == Mode.GENERAL_UNIT_CAP
    assert all(inst.capacity[v] == 1 for v in inst.vertices)


def test_parse_exact_rationals_and_reject_floats():
    doc = {
        "mode": "GeneralUnitCap",
        "agents": [{"id": "x"}, {"id": "y"}],
        "edges": [{"u": "x", "v": "y", "w": "1/3"}],
    }
    inst = parse_instance(json.dumps(doc))
    assert inst.edges[0].weight == F(1, 3)
    doc["edges"][0]["w"] = "0.5"
    with pytest.raises(ParseError):
        parse_instance(json.dumps(doc))
    doc["edges"][0]["w"] = 0.5
    with pytest.raises(ParseError):
        parse_instance(json.dumps(doc))


def test_parse_error_messages_name_the_field():
    with pytest.raises(ParseError, match="mode"):
        parse_instance('{"agents": [], "edges": []}')
    with pytest.raises(ParseError, match=r"agents\[0\]"):
        parse_instance('{"mode": "GeneralUnitCap", "agents": [5], "edges": []}')
    with pytest.raises(ParseError, match=r"edges\[0\].w"):
        parse_instance(
            '{"mode": "GeneralUnitCap", "agents": [{"id": "u"}, {"id": "v"}],'
            ' "edges": [{"u": "u", "v": "v", "w": "one"}]}'
        )
    with pytest.raises(ParseError, match="line 1"):
        parse_instance("{nope")
    # structural validation is the model's job and passes through untouched
    with pytest.raises(InstanceError):
        parse_instance(
            '{"mode": "GeneralUnitCap", "agents": [{"id": "u"}],'
            ' "edges": [{"u": "u", "v": "ghost", "w": "1"}]}'
        )


def test_roundtrip_over_generated_instances():
    for seed in range(6):
        for mode, sizes in (
            (Mode.GENERAL_UNIT_CAP, {"n": 7}),
            (Mode.BIPARTITE_CAP, {"nA": 3, "nB": 4}),
            (Mode.CONSTRAINED_BIPARTITE, {"nA": 4, "nB": 2}),
        ):
            params = {
                "mode": mode,
                "seed": seed,
                "density": F(3, 5),
                "weights": (1, 9),
                **sizes,
            }
            if mode != Mode.GENERAL_UNIT_CAP:
                params["capacity"] = (1, 3)
            inst = generate(params)
            assert parse_instance(serialize_instance(inst)) == inst


def test_generate_is_deterministic_and_respects_mode():
    params = {
        "mode": Mode.CONSTRAINED_BIPARTITE,
        "nA": 4,
        "nB": 2,
        "capacity": (1, 3),
        "weights": (1, 10),
        "density": F(1),
        "seed": 7,
    }
    a, b = generate(params), generate(params)
    assert a == b
    assert all(a.capacity[v] == 1 for v in a.vertices if a.side[v] == "A")
    assert len(a.edges) == 8  # density one: the full biclique


def test_generate_edge_cases():
    empty = generate({"mode": Mode.GENERAL_UNIT_CAP, "n": 5, "density": F(0), "seed": 3})
    assert len(empty.edges) == 0
    one_sided = generate(
        {"mode": Mode.CONSTRAINED_BIPARTITE, "nA": 0, "nB": 3,
         "capacity": (1, 2), "seed": 1}
    )
    assert len(one_sided.edges) == 0
    assert coalition_value(one_sided, one_sided.grand_coalition) == 0


def test_generate_rejects_bad_params():
    with pytest.raises(InvalidParamsError):
        generate({"mode": "Hexagonal", "n": 3, "seed": 0})
    with pytest.raises(InvalidParamsError):
        generate({"mode": Mode.GENERAL_UNIT_CAP, "n": 3, "seed": -1})
    with pytest.raises(InvalidParamsError):
        generate({"mode": Mode.GENERAL_UNIT_CAP, "n": 3, "seed": 1 << 64})
    with pytest.raises(InvalidParamsError):
        generate({"mode": Mode.GENERAL_UNIT_CAP, "n": -2, "seed": 0})
    with pytest.raises(InvalidParamsError):
        generate({"mode": Mode.GENERAL_UNIT_CAP, "n": 3, "seed": 0, "density": F(7, 5)})
    with pytest.raises(InvalidParamsError):
        generate({"mode": Mode.GENERAL_UNIT_CAP, "n": 3, "seed": 0, "capacity": (1, 4)})
    with pytest.raises(InvalidParamsError):
        generate({"mode": Mode.CONSTRAINED_BIPARTITE, "nA": 2, "seed": 0})
    with pytest.raises(InvalidParamsError):
        generate({"mode": Mode.BIPARTITE_CAP, "nA": 2, "nB": 2, "seed": 0, "weights": (9, 1)})


def test_splitmix64_matches_the_published_vector():
    g = SplitMix64(0)
    assert [g.next() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_allocation_parsing():
    inst = parse_instance(P3_DOC)
    x = parse_allocation('{"a": "0", "b": "1", "c": 0}', inst)
    assert x == {"a": F(0), "b": F(1), "c": F(0)}
    with pytest.raises(ParseError):
        parse_allocation('{"a": "0", "b": "1"}', inst)  # c missing
    with pytest.raises(ParseError):
        parse_allocation('{"a": "0", "b": "1", "c": "0", "z": "0"}', inst)
    with pytest.raises(ParseError):
        parse_allocation('{"a": 0.1, "b": "1", "c": "0"}', inst)
    with pytest.raises(ParseError):
        parse_allocation('[1, 2, 3]', inst)


# --------------------------------------------------------------------------
# the command line


def run_cli(capsys, *argv):
    code = cli_main(list(argv))
    captured = capsys.readouterr()
    try:
        report = json.loads(captured.out) if captured.out else None
    except json.JSONDecodeError:
        report = None  # e.g. --help prints usage text, not a report
    return code, report, captured.out


def test_cli_gap_on_triangle(tmp_path, capsys):
    f = tmp_path / "k3.json"
    f.write_text(K3_DOC)
    code, report, _ = run_cli(capsys, "gap", str(f))
    assert code == 0
    assert report["result"] == {
        "lp": "3/2",
        "ip": "1",
        "integral": False,
        "lp_primal": {"0": "1/2", "1": "1/2", "2": "1/2"},
    }


def test_cli_stable_nonexistence_exits_two(tmp_path, capsys):
    f = tmp_path / "k3.json"
    f.write_text(K3_DOC)
    code, report, _ = run_cli(capsys, "stable", str(f))
    assert code == 2
    assert report["result"]["stable"] is None
    cert = report["result"]["nonexistence"]
    assert (cert["lp_value"], cert["ip_value"]) == ("3/2", "1")


def test_cli_stable_success(tmp_path, capsys):
    f = tmp_path / "edge.json"
    f.write_text(
        '{"mode": "GeneralUnitCap", "agents": [{"id": "u"}, {"id": "v"}],'
        ' "edges": [{"u": "u", "v": "v", "w": "10"}]}'
    )
    code, report, _ = run_cli(capsys, "stable", str(f))
    assert code == 0
    got = report["result"]["stable"]
    assert got["contracts"] == [0]
    earnings = got["earnings"]
    assert F(earnings["u"]) + F(earnings["v"]) == 10


def test_cli_nucleolus_brute_on_p4(tmp_path, capsys):
    f = tmp_path / "p4.json"
    f.write_text(P4_DOC)
    code, report, _ = run_cli(capsys, "nucleolus", str(f), "--method", "brute")
    assert code == 0
    assert report["result"]["allocation"] == {
        "a": "1/3", "b": "2/3", "c": "2/3", "d": "1/3"
    }
    assert "levels" not in report["result"]


def test_cli_nucleolus_pruned_reports_levels(tmp_path, capsys):
    f = tmp_path / "star.json"
    f.write_text(json.dumps({
        "mode": "ConstrainedBipartite",
        "agents": [
            {"id": "a1", "side": "A"}, {"id": "a2", "side": "A"},
            {"id": "a3", "side": "A"}, {"id": "b", "side": "B", "capacity": 2},
        ],
        "edges": [
            {"u": "a1", "v": "b", "w": "3"},
            {"u": "a2", "v": "b", "w": "2"},
            {"u": "a3", "v": "b", "w": "1"},
        ],
    }))
    code, report, _ = run_cli(capsys, "nucleolus", str(f))
    assert code == 0
    assert report["result"]["allocation"] == {
        "a1": "1", "a2": "1/2", "a3": "0", "b": "7/2"
    }
    levels = report["result"]["levels"]
    eps = [F(level["epsilon"]) for level in levels]
    assert eps == sorted(eps) and len(set(eps)) == len(eps)
    assert levels[0]["epsilon"] == "0"


def test_cli_balanced_converges_and_p4_hits_thirds(tmp_path, capsys):
    f = tmp_path / "p4.json"
    f.write_text(P4_DOC)
    code, report, _ = run_cli(capsys, "balanced", str(f))
    assert code == 0
    assert report["result"]["converged"] is True
    tol = F(1, 10**9)
    for v, want in (("a", F(1, 3)), ("b", F(2, 3)), ("c", F(2, 3)), ("d", F(1, 3))):
        assert abs(F(report["result"]["balanced"]["earnings"][v]) - want) <= tol
    rounds = [F(rec["epsilon"]) for rec in report["result"]["trace"]]
    assert all(a >= b for a, b in zip(rounds, rounds[1:]))


def test_cli_balanced_out_of_rounds_exits_three(tmp_path, capsys):
    # exact balance needs infinitely many halving transfers on this path,
    # so a finite budget at tol 0 must report no convergence
    f = tmp_path / "p4.json"
    f.write_text(P4_DOC)
    code, report, _ = run_cli(
        capsys, "balanced", str(f), "--tol", "0", "--max-rounds", "40"
    )
    assert code == 3
    assert report["result"]["converged"] is False
    assert report["result"]["rounds"] == 40


def test_cli_balanced_on_triangle_exits_two(tmp_path, capsys):
    f = tmp_path / "k3.json"
    f.write_text(K3_DOC)
    code, report, _ = run_cli(capsys, "balanced", str(f))
    assert code == 2
    assert report["result"]["balanced"] is None


def test_cli_core_and_prekernel_checks(tmp_path, capsys):
    inst_file = tmp_path / "p3.json"
    inst_file.write_text(P3_DOC)
    good = tmp_path / "good.json"
    good.write_text('{"a": "0", "b": "1", "c": "0"}')
    bad = tmp_path / "bad.json"
    bad.write_text('{"a": "1", "b": "0", "c": "0"}')

    code, report, _ = run_cli(capsys, "core-check", str(inst_file), "--alloc", str(good))
    assert code == 0 and report["result"]["in_core"] is True
    assert report["result"]["deficient_coalition"] is None

    code, report, _ = run_cli(capsys, "core-check", str(inst_file), "--alloc", str(bad))
    assert code == 0 and report["result"]["in_core"] is False
    S = report["result"]["deficient_coalition"]
    assert "b" in S and "a" not in S

    code, report, _ = run_cli(capsys, "prekernel-check", str(inst_file), "--alloc", str(good))
    assert code == 0 and report["result"]["is_prekernel"] is True

    # inefficient allocations are a domain error, not a failed check
    waste = tmp_path / "waste.json"
    waste.write_text('{"a": "0", "b": "0", "c": "0"}')
    code, report, _ = run_cli(capsys, "prekernel-check", str(inst_file), "--alloc", str(waste))
    assert code == 1 and report is None


def test_cli_oracle_dump_and_parallel_agree(tmp_path, capsys):
    f = tmp_path / "gen.json"
    params = {
        "mode": Mode.CONSTRAINED_BIPARTITE, "nA": 3, "nB": 2,
        "capacity": (1, 2), "weights": (1, 8), "density": F(4, 5), "seed": 21,
    }
    f.write_text(serialize_instance(generate(params)))
    code, seq, raw_seq = run_cli(capsys, "oracle", str(f))
    assert code == 0
    assert len(seq["result"]["coalition_values"]) == 1 << 5
    assert seq["result"]["core"]["empty"] is False
    assert seq["result"]["nucleolus"] is not None
    code, par, raw_par = run_cli(capsys, "oracle", str(f), "--jobs", "2")
    assert code == 0
    assert raw_par == raw_seq  # byte-identical, jobs only split the work


def test_cli_gen_reports_are_byte_identical(capsys):
    argv = ["gen", "--mode", "ConstrainedBipartite", "--na", "4", "--nb", "2",
            "--cap-min", "1", "--cap-max", "3", "--density", "1", "--seed", "7"]
    code1, rep1, raw1 = run_cli(capsys, *argv)
    code2, rep2, raw2 = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    assert raw1 == raw2
    assert rep1["seed"] == 7
    doc = json.dumps(rep1["instance"], sort_keys=True, separators=(",", ":"))
    assert rep1["instance_sha256"] == hashlib.sha256(doc.encode()).hexdigest()
    # the embedded document reparses into the same instance
    assert serialize_instance(parse_instance(doc)) == doc


def test_cli_reports_are_deterministic_and_timing_is_opt_in(tmp_path, capsys):
    f = tmp_path / "p4.json"
    f.write_text(P4_DOC)
    _, _, first = run_cli(capsys, "nucleolus", str(f), "--method", "brute")
    _, _, second = run_cli(capsys, "nucleolus", str(f), "--method", "brute")
    assert first == second
    assert "wall_time_s" not in json.loads(first)
    _, timed, _ = run_cli(capsys, "--timing", "nucleolus", str(f), "--method", "brute")
    assert float(timed["wall_time_s"]) >= 0


def test_cli_usage_and_error_exit_codes(tmp_path, capsys):
    assert run_cli(capsys, "frobnicate")[0] == 64
    assert run_cli(capsys, "stable")[0] == 64
    assert run_cli(capsys, "balanced", "x.json", "--tol", "0.5")[0] == 64
    assert run_cli(capsys, "balanced", "x.json", "--schedule", "chaotic")[0] == 64
    assert run_cli(capsys, "oracle", "x.json", "--jobs", "0")[0] == 64
    assert run_cli(capsys, "stable", str(tmp_path / "missing.json"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"mode": "GeneralUnitCap"}')
    assert run_cli(capsys, "stable", str(bad))[0] == 1
    code, _, out = run_cli(capsys, "--help")
    assert code == 0 and out.startswith("usage:")
    # GeneralUnitCap has no star family, so the pruned method refuses it
    p4 = tmp_path / "p4.json"
    p4.write_text(P4_DOC)
    assert run_cli(capsys, "nucleolus", str(p4), "--method", "pruned")[0] == 1
