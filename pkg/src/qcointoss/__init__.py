"""Simulator and formula checker for multi-round quantum coin tossing.

Submodules
----------
qmath
    Real qubit states, product overlaps, a Jacobi eigensolver and POVM checks.
discrimination
    Helstrom and unambiguous discrimination, including parity of m states.
protocol
    The m-procedure protocol as a seeded, replayable state machine.
strategies
    Honest play, the conclusive / best-guess / reflection attacks and their
    closed-form success probabilities.
naive
    The EPR-based naive protocol and the basis-reroll attack.
harness
    Monte Carlo, sweeps and the verification suite behind the command line.
"""

from .discrimination import (
    build_unambiguous_povm,
    conclusive_rate,
    false_claim_pass,
    helstrom_error,
    parity_error_exact,
    parity_error_oracle,
)
from .harness import McEstimate, SweepRow, check_bias_bound, monte_carlo, sweep_attack, verify_appendix
from .naive import basis_reroll_attack, run_naive
from .protocol import (
    HONEST,
    ProtocolParams,
    SessionOutcome,
    Strategy,
    Transcript,
    Variant,
    critical_round,
    derive_params,
    run_session,
)
from .qmath import PureState, eigen_sym, psi, trace_distance, validate_povm
from .strategies import (
    attack_analytics,
    best_guess_success,
    bias_upper_bound,
    conclusive_attack,
    reflection_attack,
)

__version__ = "0.1.0"

__all__ = [
    "HONEST",
    "McEstimate",
    "ProtocolParams",
    "PureState",
    "SessionOutcome",
    "Strategy",
    "SweepRow",
    "Transcript",
    "Variant",
    "attack_analytics",
    "basis_reroll_attack",
    "best_guess_success",
    "bias_upper_bound",
    "build_unambiguous_povm",
    "check_bias_bound",
    "conclusive_attack",
    "conclusive_rate",
    "critical_round",
    "derive_params",
    "eigen_sym",
    "false_claim_pass",
    "helstrom_error",
    "monte_carlo",
    "parity_error_exact",
    "parity_error_oracle",
    "psi",
    "reflection_attack",
    "run_naive",
    "run_session",
    "sweep_attack",
    "trace_distance",
    "validate_povm",
    "verify_appendix",
]
