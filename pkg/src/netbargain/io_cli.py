"""Instance files, deterministic generators, and the command-line interface.

Wire format
-----------
Instances travel as single JSON documents::

    {"mode": "ConstrainedBipartite",
     "agents": [{"id": "a0", "side": "A", "capacity": 1}, ...],
     "edges":  [{"u": "a0", "v": "b0", "w": "7/2"}, ...]}

Rationals are strings ``"p/q"`` in lowest terms (a bare integer string is
fine); JSON floats are rejected everywhere so round-trips are lossless.
Allocations are JSON objects mapping agent id to such a rational.

Every command prints one :class:`RunReport` as canonical JSON (sorted keys,
compact separators, one trailing newline) on stdout and logs a short human
summary on stderr.  Reports embed the instance and its sha256 digest, so
they are self-contained, and they are byte-identical across runs of the
same command on the same input; the only exception is opting into
``--timing``, which adds a wall-clock field.

Generator
---------
``generate`` derives all choices from SplitMix64, a counter-based 64-bit
generator (state advances by 0x9E3779B97F4A7C15; output mixes the state
with two xor-multiply rounds).  Draw order is documented in the function
and fixed forever, so a (params, seed) pair names one instance on every
platform.  Uniform draws use the remainder rule ``next() % k``.

Exit codes: 0 success, 2 stable-outcome nonexistence certified, 3 dynamics
did not converge, 1 domain errors, 64 usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import balanced, matching, model, nucleolus, oracle, stable
from .errors import InvalidParamsError, NetbargainError, ParseError, TooLargeError
from .model import Instance, Mode, build_instance

__all__ = [
    "SplitMix64",
    "cli_main",
    "generate",
    "instance_digest",
    "main",
    "parse_allocation",
    "parse_instance",
    "serialize_instance",
]


# ---------------------------------------------------------------------------
# rationals on the wire


def rational_to_text(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def text_to_rational(raw, where: str) -> Fraction:
    """Exact rational from an int or a "p/q" / "p" string; floats refused."""
    if isinstance(raw, bool):
        raise ParseError(f"{where}: expected a rational, got a boolean")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        raise ParseError(
            f"{where}: {raw!r} is a float; write rationals as strings like \"1/3\""
        )
    if isinstance(raw, str):
        text = raw.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                return Fraction(int(num), int(den))
            return Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{where}: {raw!r} is not a rational \"p/q\"") from exc
    raise ParseError(f"{where}: expected a rational, got {type(raw).__name__}")


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# instance documents


def parse_instance(text: str) -> Instance:
    """Instance from a JSON document; structural validation is delegated to
    :func:`netbargain.model.build_instance` and its errors pass through."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON (line {exc.lineno}, column {exc.colno})") from exc
    if not isinstance(doc, dict):
        raise ParseError("the top-level value must be a JSON object")
    for field in ("mode", "agents", "edges"):
        if field not in doc:
            raise ParseError(f"missing field {field!r}")
    mode = doc["mode"]
    if not isinstance(mode, str):
        raise ParseError("field 'mode': expected a string")
    if not isinstance(doc["agents"], list) or not isinstance(doc["edges"], list):
        raise ParseError("fields 'agents' and 'edges' must be arrays")

    vertices: list[str] = []
    capacity: dict[str, int] = {}
    side: dict[str, str | None] = {}
    for k, agent in enumerate(doc["agents"]):
        where = f"agents[{k}]"
        if not isinstance(agent, dict):
            raise ParseError(f"{where}: expected an object")
        if "id" not in agent or not isinstance(agent["id"], str):
            raise ParseError(f"{where}: missing string field 'id'")
        vid = agent["id"]
        vertices.append(vid)
        cap = agent.get("capacity", 1)
        if not isinstance(cap, int) or isinstance(cap, bool):
            raise ParseError(f"{where}.capacity: expected an integer, got {cap!r}")
        capacity[vid] = cap
        s = agent.get("side")
        if s not in ("A", "B", None):
            raise ParseError(f"{where}.side: expected \"A\", \"B\", or null, got {s!r}")
        side[vid] = s

    edges = []
    for k, edge in enumerate(doc["edges"]):
        where = f"edges[{k}]"
        if not isinstance(edge, dict):
            raise ParseError(f"{where}: expected an object")
        for field in ("u", "v", "w"):
            if field not in edge:
                raise ParseError(f"{where}: missing field {field!r}")
        if not isinstance(edge["u"], str) or not isinstance(edge["v"], str):
            raise ParseError(f"{where}: 'u' and 'v' must be agent ids")
        edges.append((edge["u"], edge["v"], text_to_rational(edge["w"], f"{where}.w")))

    return build_instance(vertices, edges, mode, capacity=capacity, side=side)


def instance_document(inst: Instance) -> dict:
    return {
        "mode": inst.mode,
        "agents": [
            {"id": v, "side": inst.side[v], "capacity": inst.capacity[v]}
            for v in inst.vertices
        ],
        "edges": [
            {"u": e.u, "v": e.v, "w": rational_to_text(e.weight)} for e in inst.edges
        ],
    }


def serialize_instance(inst: Instance) -> str:
    return _canonical(instance_document(inst))


def instance_digest(inst: Instance) -> str:
    return hashlib.sha256(serialize_instance(inst).encode()).hexdigest()


def parse_allocation(text: str, inst: Instance) -> dict:
    """Allocation document {agent id: "p/q"} covering exactly the instance."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON (line {exc.lineno}, column {exc.colno})") from exc
    if not isinstance(doc, dict):
        raise ParseError("an allocation must be a JSON object of rationals")
    unknown = set(doc) - set(inst.vertices)
    if unknown:
        raise ParseError(f"allocation names unknown agents {sorted(unknown)!r}")
    missing = set(inst.vertices) - set(doc)
    if missing:
        raise ParseError(f"allocation misses agents {sorted(missing)!r}")
    return {v: text_to_rational(doc[v], f"allocation[{v!r}]") for v in inst.vertices}


# ---------------------------------------------------------------------------
# deterministic generation


class SplitMix64:
    """The counter-based 64-bit generator used by :func:`generate`.

    next(): state = (state + 0x9E3779B97F4A7C15) mod 2^64, then the output
    is the state mixed by two xor-shift-multiply rounds (constants
    0xBF58476D1CE4E5B9 and 0x94D049BB133111EB) and a final 31-bit xor-shift.
    """

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self._MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        return self.next() % bound

    def in_range(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)


def generate(params: dict) -> Instance:
    """Deterministic instance from generator parameters.

    ``params`` keys: ``mode``; ``n`` (GeneralUnitCap) or ``nA`` and ``nB``
    (bipartite modes); ``capacity`` as [lo, hi] (bipartite modes only);
    ``weights`` as [lo, hi] integers; ``density`` as a Fraction in [0, 1];
    ``seed`` as a 64-bit integer.  Draw order, fixed forever: capacities of
    agents in declaration order (ConstrainedBipartite A-agents are capacity
    1 and consume no draw), then for each vertex pair in lexicographic
    index order one inclusion draw (keep the edge iff next() % q < p for
    density p/q) followed, only for kept edges, by one weight draw.
    """
    mode = params.get("mode")
    if mode not in Mode.ALL:
        raise InvalidParamsError(f"mode must be one of {Mode.ALL}, got {mode!r}")
    seed = params.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 1 << 64:
        raise InvalidParamsError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    density = Fraction(params.get("density", 1))
    if not 0 <= density <= 1:
        raise InvalidParamsError(f"density must lie in [0, 1], got {density}")
    w_lo, w_hi = params.get("weights", (1, 10))
    if not (isinstance(w_lo, int) and isinstance(w_hi, int)) or not 0 <= w_lo <= w_hi:
        raise InvalidParamsError(f"weight range must be integers 0 <= lo <= hi, got {(w_lo, w_hi)!r}")
    c_lo, c_hi = params.get("capacity", (1, 1))
    if not (isinstance(c_lo, int) and isinstance(c_hi, int)) or not 1 <= c_lo <= c_hi:
        raise InvalidParamsError(f"capacity range must be integers 1 <= lo <= hi, got {(c_lo, c_hi)!r}")

    gen = SplitMix64(seed)
    num, den = density.numerator, density.denominator

    def keep() -> bool:
        return gen.below(den) < num

    if mode == Mode.GENERAL_UNIT_CAP:
        n = params.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise InvalidParamsError(f"n must be a nonnegative integer, got {n!r}")
        if (c_lo, c_hi) != (1, 1):
            raise InvalidParamsError(
                f"{Mode.GENERAL_UNIT_CAP} has capacity 1 everywhere; "
                f"a range {(c_lo, c_hi)!r} cannot apply"
            )
        verts = [f"v{i}" for i in range(n)]
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if keep():
                    edges.append((verts[i], verts[j], gen.in_range(w_lo, w_hi)))
        return build_instance(verts, edges, mode)

    na, nb = params.get("nA"), params.get("nB")
    for label, value in (("nA", na), ("nB", nb)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise InvalidParamsError(f"{label} must be a nonnegative integer, got {value!r}")
    a_side = [f"a{i}" for i in range(na)]
    b_side = [f"b{j}" for j in range(nb)]
    verts = a_side + b_side
    side = {v: "A" for v in a_side} | {v: "B" for v in b_side}
    capacity = {}
    for v in a_side:
        capacity[v] = 1 if mode == Mode.CONSTRAINED_BIPARTITE else gen.in_range(c_lo, c_hi)
    for v in b_side:
        capacity[v] = gen.in_range(c_lo, c_hi)
    edges = []
    for u in a_side:
        for v in b_side:
            if keep():
                edges.append((u, v, gen.in_range(w_lo, w_hi)))
    return build_instance(verts, edges, mode, capacity=capacity, side=side)


# ---------------------------------------------------------------------------
# result serialization


def _coalition_doc(S) -> list:
    return sorted(S)


def _allocation_doc(x: dict) -> dict:
    return {v: rational_to_text(q) for v, q in x.items()}


def _outcome_doc(inst: Instance, o: model.Outcome) -> dict:
    return {
        "contracts": sorted(o.contracts),
        "splits": [
            {"edge": eid, "agent": v, "share": rational_to_text(o.splits[(eid, v)])}
            for eid in sorted(o.contracts)
            for v in (inst.edges[eid].u, inst.edges[eid].v)
        ],
        "earnings": _allocation_doc(model.earnings(inst, o)),
    }


def _certificate_doc(cert: stable.NonexistenceCertificate) -> dict:
    return {
        "lp_value": rational_to_text(cert.lp_value),
        "ip_value": rational_to_text(cert.ip_value),
        "fractional_witness": {
            str(eid): rational_to_text(val)
            for eid, val in sorted(cert.fractional_witness.items())
        },
    }


def _levels_doc(levels: nucleolus.LevelSequence) -> list:
    return [
        {
            "epsilon": rational_to_text(level.epsilon),
            "family": sorted(_coalition_doc(S) for S in level.family),
        }
        for level in levels
    ]


# ---------------------------------------------------------------------------
# commands


def _cmd_stable(inst: Instance, args) -> tuple[int, dict]:
    result = stable.find_stable(inst)
    if isinstance(result, stable.NonexistenceCertificate):
        _log("no stable outcome exists; emitting the LP/IP gap certificate")
        return 2, {"stable": None, "nonexistence": _certificate_doc(result)}
    _log("stable outcome found")
    return 0, {"stable": _outcome_doc(inst, result)}


def _cmd_balanced(inst: Instance, args) -> tuple[int, dict]:
    start = stable.find_stable(inst)
    if isinstance(start, stable.NonexistenceCertificate):
        _log("no stable outcome exists, so no balanced outcome either")
        return 2, {"balanced": None, "nonexistence": _certificate_doc(start)}
    schedule = {"max": "max-first", "roundrobin": "round-robin"}[args.schedule]
    res = balanced.balance_dynamics(
        inst, start, tol=args.tol, max_rounds=args.max_rounds, schedule=schedule
    )
    doc = {
        "balanced": _outcome_doc(inst, res.outcome),
        "converged": res.converged,
        "rounds": len(res.trace),
        "initial_epsilon": rational_to_text(res.initial_epsilon),
        "final_epsilon": rational_to_text(res.final_epsilon),
        "trace": [
            {
                "round": rec.round,
                "edge": rec.edge,
                "transfer": rational_to_text(rec.transfer),
                "epsilon": rational_to_text(rec.epsilon),
            }
            for rec in res.trace
        ],
    }
    if not res.converged:
        _log(f"dynamics did not reach tol within {args.max_rounds} rounds")
        return 3, doc
    _log(f"dynamics converged in {len(res.trace)} rounds")
    return 0, doc


def _cmd_nucleolus(inst: Instance, args) -> tuple[int, dict]:
    if args.method == "brute":
        allocation = nucleolus.nucleolus_bruteforce(inst)
        _log("brute-force nucleolus over every proper coalition")
        return 0, {"allocation": _allocation_doc(allocation), "method": "brute"}
    run = nucleolus.nucleolus_pruned(inst)
    _log(f"pruned nucleolus pinned {len(run.levels)} levels")
    return 0, {
        "allocation": _allocation_doc(run.allocation),
        "method": "pruned",
        "levels": _levels_doc(run.levels),
    }


def _cmd_core_check(inst: Instance, args) -> tuple[int, dict]:
    x = parse_allocation(_read(args.alloc), inst)
    ok, bad = stable.core_membership(inst, x)
    _log("allocation is in the core" if ok else "allocation is not in the core")
    return 0, {
        "in_core": ok,
        "deficient_coalition": None if bad is None else _coalition_doc(bad),
    }


def _cmd_prekernel_check(inst: Instance, args) -> tuple[int, dict]:
    x = parse_allocation(_read(args.alloc), inst)
    ok, worst = balanced.is_prekernel(inst, x, tol=args.tol)
    _log("allocation passes the pairwise surplus test" if ok else "surpluses unbalanced")
    return 0, {
        "is_prekernel": ok,
        "worst_pair": None if worst is None else list(worst),
        "tol": rational_to_text(args.tol),
    }


_WORKER_DOC: Instance | None = None


def _enum_init(text: str) -> None:
    global _WORKER_DOC
    _WORKER_DOC = parse_instance(text)


def _enum_chunk(bounds: tuple) -> list:
    inst = _WORKER_DOC
    lo, hi = bounds
    verts = inst.vertices
    out = []
    for mask in range(lo, hi):
        members = frozenset(verts[i] for i in range(len(verts)) if mask >> i & 1)
        out.append(model.coalition_value(inst, members))
    return out


def _parallel_table(inst: Instance, jobs: int) -> oracle.GameTable:
    """GameTable via independent per-coalition evaluation across processes."""
    n = len(inst.vertices)
    if n > oracle.TABLE_VERTEX_LIMIT:
        raise TooLargeError(
            f"{n} vertices exceeds the oracle table limit of {oracle.TABLE_VERTEX_LIMIT}"
        )
    total = 1 << n
    step = max(64, total // (jobs * 4))
    bounds = [(lo, min(lo + step, total)) for lo in range(0, total, step)]
    text = serialize_instance(inst)
    values: list = []
    with ProcessPoolExecutor(max_workers=jobs, initializer=_enum_init, initargs=(text,)) as pool:
        for chunk in pool.map(_enum_chunk, bounds):
            values.extend(chunk)
    verts = inst.vertices
    by_set = {
        frozenset(verts[i] for i in range(n) if mask >> i & 1): values[mask]
        for mask in range(total)
    }
    return oracle.GameTable(inst, verts, tuple(values), by_set)


def _cmd_oracle(inst: Instance, args) -> tuple[int, dict]:
    if args.jobs > 1:
        table = _parallel_table(inst, args.jobs)
        _log(f"tabulated v over {len(table.by_mask)} coalitions on {args.jobs} processes")
    else:
        table = oracle.build_game_table(inst)
        _log(f"tabulated v over {len(table.by_mask)} coalitions")
    verts = inst.vertices
    n = len(verts)
    doc: dict = {
        "coalition_values": [
            {
                "members": sorted(verts[i] for i in range(n) if mask >> i & 1),
                "value": rational_to_text(table.by_mask[mask]),
            }
            for mask in range(1 << n)
        ]
    }
    core = oracle.core_lp_full(table)
    doc["core"] = {
        "empty": core.empty,
        "least_core_eps": rational_to_text(core.least_core_eps),
        "witness": None if core.witness is None else _allocation_doc(core.witness),
        "certificate": None
        if core.certificate is None
        else [
            {"coalition": _coalition_doc(S), "weight": rational_to_text(lam)}
            for S, lam in sorted(core.certificate.items(), key=lambda kv: sorted(kv[0]))
        ],
    }
    if n <= oracle.REFERENCE_VERTEX_LIMIT:
        doc["nucleolus"] = _allocation_doc(oracle.nucleolus_reference(table))
    else:
        doc["nucleolus"] = None
        _log("reference nucleolus skipped: instance exceeds its size guard")
    return 0, doc


def _cmd_gen(args) -> tuple[int, dict, Instance]:
    params = {
        "mode": args.mode,
        "seed": args.seed,
        "density": args.density,
        "weights": (args.w_min, args.w_max),
        "capacity": (args.cap_min, args.cap_max),
    }
    if args.mode == Mode.GENERAL_UNIT_CAP:
        if args.n is None:
            raise InvalidParamsError(f"--n is required for {Mode.GENERAL_UNIT_CAP}")
        params["n"] = args.n
    else:
        if args.na is None or args.nb is None:
            raise InvalidParamsError(f"--na and --nb are required for {args.mode}")
        params["nA"], params["nB"] = args.na, args.nb
    inst = generate(params)
    _log(f"generated {inst!r} from seed {args.seed}")
    return 0, {"vertices": len(inst.vertices), "edges": len(inst.edges)}, inst


def _cmd_gap(inst: Instance, args) -> tuple[int, dict]:
    report = matching.integrality_report(inst)
    _log("relaxation is integral" if report.integral else "relaxation beats every matching")
    return 0, {
        "lp": rational_to_text(report.lp_value),
        "ip": rational_to_text(report.ip_value),
        "integral": report.integral,
        "lp_primal": {
            str(eid): rational_to_text(val)
            for eid, val in sorted(report.lp_primal.items())
            if val != 0
        },
    }


# ---------------------------------------------------------------------------
# the command line


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise _UsageError(message)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path!r}: {exc.strerror}") from exc


def _rational_arg(text: str) -> Fraction:
    try:
        return text_to_rational(text, "command line")
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from exc
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="netbargain",
        description="Exact solvers for bargaining games on capacitated graphs.",
    )
    parser.add_argument(
        "--timing", action="store_true",
        help="add wall-clock seconds to the report (breaks byte-identical output)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_file(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="instance JSON file")
        return p

    with_file("stable", "construct a stable outcome or certify none exists")

    p = with_file("balanced", "run the transfer dynamics from a stable outcome")
    p.add_argument("--tol", type=_rational_arg, default=Fraction(1, 10**9))
    p.add_argument("--max-rounds", type=int, default=10_000)
    p.add_argument("--schedule", choices=("max", "roundrobin"), default="max")

    p = with_file("nucleolus", "compute the nucleolus")
    p.add_argument("--method", choices=("pruned", "brute"), default="pruned")

    p = with_file("core-check", "test an allocation for core membership")
    p.add_argument("--alloc", required=True, help="allocation JSON file")

    p = with_file("prekernel-check", "test an allocation's pairwise surpluses")
    p.add_argument("--alloc", required=True, help="allocation JSON file")
    p.add_argument("--tol", type=_rational_arg, default=Fraction(0))

    p = with_file("oracle", "dump the coalition value table and reference solutions")
    p.add_argument("--jobs", type=_positive_int, default=1,
                   help="processes for subset enumeration")

    p = sub.add_parser("gen", help="generate a deterministic instance")
    p.add_argument("--mode", required=True, choices=Mode.ALL)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, help="vertex count (GeneralUnitCap)")
    p.add_argument("--na", type=int, help="A-side size (bipartite modes)")
    p.add_argument("--nb", type=int, help="B-side size (bipartite modes)")
    p.add_argument("--density", type=_rational_arg, default=Fraction(1))
    p.add_argument("--w-min", type=int, default=1)
    p.add_argument("--w-max", type=int, default=10)
    p.add_argument("--cap-min", type=int, default=1)
    p.add_argument("--cap-max", type=int, default=1)

    with_file("gap", "LP relaxation versus exact matching on the whole graph")
    return parser


_HANDLERS = {
    "stable": _cmd_stable,
    "balanced": _cmd_balanced,
    "nucleolus": _cmd_nucleolus,
    "core-check": _cmd_core_check,
    "prekernel-check": _cmd_prekernel_check,
    "oracle": _cmd_oracle,
    "gap": _cmd_gap,
}


def cli_main(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 64
    except SystemExit as exc:  # --help and friends
        return 0 if exc.code in (0, None) else 64

    started = time.perf_counter()
    try:
        if args.command == "gen":
            code, result, inst = _cmd_gen(args)
        else:
            inst = parse_instance(_read(args.file))
            _log(
                f"parsed instance: {len(inst.vertices)} agents, "
                f"{len(inst.edges)} edges, mode {inst.mode}"
            )
            code, result = _HANDLERS[args.command](inst, args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 64
    except NetbargainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    report = {
        "command": args.command,
        "instance": instance_document(inst),
        "instance_sha256": instance_digest(inst),
        "result": result,
    }
    if args.command == "gen":
        report["seed"] = args.seed
    if args.timing:
        report["wall_time_s"] = f"{time.perf_counter() - started:.6f}"
    print(_canonical(report))
    return code


def main() -> None:  # pragma: no cover - console entry point
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":  # pragma: no cover
    main()
