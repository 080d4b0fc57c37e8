"""Exact solvers for network bargaining games on capacitated graphs.

Agents are vertices of a weighted graph; a deal on an edge splits that
edge's weight between its endpoints, and each agent can hold at most
``capacity`` deals. The package computes, in exact rational arithmetic:

- maximum-weight b-matchings, their LP relaxation and integrality gap
  (:mod:`netbargain.matching`),
- stable outcomes and core membership (:mod:`netbargain.stable`),
- balanced outcomes, the balancing dynamics and prekernel tests
  (:mod:`netbargain.balanced`),
- the nucleolus, by brute force and by an iterated-LP scheme with a
  pruned coalition family (:mod:`netbargain.nucleolus`),
- independent brute-force oracles for cross-checking
  (:mod:`netbargain.oracle`),
- a JSON instance format, a seeded generator and the ``netbargain`` CLI
  (:mod:`netbargain.io_cli`).

The top level re-exports the everyday surface; specialised pieces
(oracles, LP internals, wire format helpers) live in their modules.
"""

from netbargain.balanced import (
    BalanceReport,
    DynamicsResult,
    SurplusValue,
    TransferRecord,
    balance_dynamics,
    is_balanced,
    is_prekernel,
    outside_option,
    prekernel_surplus,
)
from netbargain.errors import (
    InstanceError,
    InvalidParamsError,
    NetbargainError,
    NotEfficientError,
    NotStableError,
    ParseError,
    TooLargeError,
    WrongModeError,
)
from netbargain.matching import (
    IntegralityReport,
    bmatching_exact,
    bmatching_lp,
    integrality_report,
)
from netbargain.model import (
    Edge,
    Instance,
    Mode,
    Outcome,
    build_instance,
    coalition_value,
    earnings,
    validate_outcome,
)
from netbargain.nucleolus import (
    Comparison,
    ExcessRecord,
    NucleolusRun,
    excess_profile,
    lex_compare,
    nucleolus_bruteforce,
    nucleolus_pruned,
)
from netbargain.stable import (
    NonexistenceCertificate,
    StabilityViolation,
    core_membership,
    find_stable,
    is_stable,
    outside_shares,
    realize_stable,
)

__version__ = "0.1.0"

__all__ = [
    "BalanceReport",
    "Comparison",
    "DynamicsResult",
    "Edge",
    "ExcessRecord",
    "InstanceError",
    "Instance",
    "IntegralityReport",
    "InvalidParamsError",
    "Mode",
    "NetbargainError",
    "NonexistenceCertificate",
    "NotEfficientError",
    "NotStableError",
    "NucleolusRun",
    "Outcome",
    "ParseError",
    "StabilityViolation",
    "SurplusValue",
    "TooLargeError",
    "TransferRecord",
    "WrongModeError",
    "balance_dynamics",
    "bmatching_exact",
    "bmatching_lp",
    "build_instance",
    "coalition_value",
    "core_membership",
    "earnings",
    "excess_profile",
    "find_stable",
    "integrality_report",
    "is_balanced",
    "is_prekernel",
    "is_stable",
    "lex_compare",
    "nucleolus_bruteforce",
    "nucleolus_pruned",
    "outside_option",
    "outside_shares",
    "prekernel_surplus",
    "realize_stable",
    "validate_outcome",
    "__version__",
]
