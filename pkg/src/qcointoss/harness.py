"""Monte Carlo estimation, parameter sweeps and the formula-verification suite.

Trials are independent sessions seeded by ``rng.derive_seed(base_seed, t)``.
Workers return raw count vectors which are summed, so the estimate does not
depend on how trials are split across processes.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import discrimination as disc
from . import rng
from .naive import NAIVE_HONEST, NaiveStrategy, basis_reroll_attack, run_naive
from .protocol import ALICE, BOB, HONEST, ProtocolParams, SessionOutcome, Strategy, derive_params, run_session
from .qmath import psi, validate_povm
from .strategies import (
    AttackAnalytics,
    BestGuessAttack,
    attack_analytics,
    bias_upper_bound,
    conclusive_attack,
    numerical_bias_maximum,
    reflection_attack,
    selective_abort,
)

SIGMA = 4.0
APPENDIX_TOL = 1e-9


# ---------------------------------------------------------------------------
# strategy names


PROTOCOL_STRATEGIES = ("honest", "conclusive", "best-guess", "reflection", "selective-abort")
NAIVE_STRATEGIES = ("naive-honest", "naive-reroll")
STRATEGY_NAMES = PROTOCOL_STRATEGIES + NAIVE_STRATEGIES


def make_strategy(name: str, target: int = 0, round: int | None = None):
    """Strategy object for a command-line name."""
    if name == "honest":
        return HONEST
    if name == "conclusive":
        return conclusive_attack(target=target, round=round)
    if name == "best-guess":
        return BestGuessAttack(target, round)
    if name == "reflection":
        return reflection_attack()
    if name == "selective-abort":
        return selective_abort(target)
    if name == "naive-honest":
        return NAIVE_HONEST
    if name == "naive-reroll":
        return basis_reroll_attack(target=target)
    raise ValueError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGY_NAMES)}")


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class McEstimate:
    """Outcome frequencies of ``trials`` sessions as seen by the observing party.

    ``counters`` tallies strategy notes as ``"<role>.<key>"`` (sessions where
    the note was truthy) and ``"<role>.<key>.completed"`` (the same, restricted
    to sessions that did not abort), plus ``"abort.<by>.step<step>"`` and
    ``"mismatch"`` (completed sessions whose two outputs differ).
    """

    trials: int
    count0: int
    count1: int
    aborts: int
    seed: int
    counters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.count0 + self.count1 + self.aborts != self.trials:
            raise ValueError("counts do not partition the trials")

    @property
    def p0(self) -> float:
        return self.count0 / self.trials

    @property
    def p1(self) -> float:
        return self.count1 / self.trials

    @property
    def abort(self) -> float:
        return self.aborts / self.trials

    @property
    def stderr0(self) -> float:
        return math.sqrt(self.p0 * (1.0 - self.p0) / self.trials)

    @property
    def stderr1(self) -> float:
        return math.sqrt(self.p1 * (1.0 - self.p1) / self.trials)

    def rate(self, key: str, given: str | None = None) -> tuple[float, float]:
        """Frequency of counter ``key`` (among sessions counted by ``given``) and its standard error."""
        den = self.counters.get(given, 0) if given is not None else self.trials
        if den == 0:
            return math.nan, math.nan
        p = self.counters.get(key, 0) / den
        return p, math.sqrt(p * (1.0 - p) / den)

    def within(self, value: float, which: int = 0, sigmas: float = SIGMA) -> bool:
        p, se = (self.p0, self.stderr0) if which == 0 else (self.p1, self.stderr1)
        return abs(p - value) <= sigmas * se

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "p0": self.p0,
            "p1": self.p1,
            "abort": self.abort,
            "stderr0": self.stderr0,
            "stderr1": self.stderr1,
            "seed": self.seed,
            "counts": [self.count0, self.count1, self.aborts],
            "counters": dict(sorted(self.counters.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "McEstimate":
        c0, c1, a = d["counts"]
        return cls(d["trials"], c0, c1, a, d["seed"], dict(d.get("counters", {})))


def _tally(outcome: SessionOutcome, observer: str, counts: list[int], counters: Counter) -> None:
    if outcome.abort is not None:
        counts[2] += 1
        counters[f"abort.{outcome.abort.by}.step{outcome.abort.step}"] += 1
    else:
        bit = outcome.alice_bit if observer == ALICE else outcome.bob_bit
        counts[bit] += 1
        if outcome.alice_bit != outcome.bob_bit:
            counters["mismatch"] += 1
    for role, notes in outcome.notes.items():
        for key, value in notes.items():
            if value:
                counters[f"{role}.{key}"] += 1
                if outcome.abort is None:
                    counters[f"{role}.{key}.completed"] += 1


@dataclass(frozen=True)
class _Job:
    params: ProtocolParams | None
    alice: object
    bob: object
    base_seed: int
    naive_m: int = 0
    observer: str = ALICE

    def session(self, seed: int) -> SessionOutcome:
        if self.params is None:
            return run_naive(self.naive_m, self.bob, seed)
        return run_session(self.params, self.alice, self.bob, seed, record=False)


def _run_chunk(job: _Job, start: int, stop: int) -> tuple[list[int], Counter]:
    counts = [0, 0, 0]
    counters: Counter = Counter()
    for t in range(start, stop):
        _tally(job.session(rng.derive_seed(job.base_seed, t)), job.observer, counts, counters)
    return counts, counters


def _execute(job: _Job, trials: int, workers: int) -> McEstimate:
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials!r}")
    if int(workers) != workers or workers < 1:
        raise ValueError(f"workers must be a positive integer, got {workers!r}")
    workers = min(int(workers), trials)
    if workers == 1:
        parts = [_run_chunk(job, 0, trials)]
    else:
        n_chunks = workers * 4
        edges = [trials * k // n_chunks for k in range(n_chunks + 1)]
        spans = [(a, b) for a, b in zip(edges, edges[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, job, a, b) for a, b in spans]
            parts = [f.result() for f in futures]
    counts = [0, 0, 0]
    counters: Counter = Counter()
    for c, k in parts:
        counts = [x + y for x, y in zip(counts, c)]
        counters.update(k)
    return McEstimate(trials, counts[0], counts[1], counts[2], job.base_seed, dict(counters))


def observer_for(alice, bob) -> str:
    """Whose output defines the coin: Alice's, unless she is the cheater facing an honest Bob."""
    if not getattr(alice, "honest", True) and getattr(bob, "honest", True):
        return BOB
    return ALICE


def monte_carlo(
    params: ProtocolParams,
    alice: Strategy = HONEST,
    bob: Strategy = HONEST,
    trials: int = 400_000,
    base_seed: int = 0,
    workers: int = 1,
) -> McEstimate:
    """Estimate p0, p1 and the abort rate over ``trials`` independent sessions.

    Parameters
    ----------
    params : ProtocolParams
    alice, bob : Strategy
    trials : int
        Number of sessions, at least 1.
    base_seed : int
        Trial t uses the seed ``rng.derive_seed(base_seed, t)``.
    workers : int
        Processes to use.  The result is identical for every value.
    """
    for role, strat in ((ALICE, alice), (BOB, bob)):
        strat.check_params(params, role)
    job = _Job(params, alice, bob, int(base_seed), observer=observer_for(alice, bob))
    return _execute(job, trials, workers)


def naive_monte_carlo(m: int, bob: NaiveStrategy = NAIVE_HONEST, trials: int = 100_000, base_seed: int = 0,
                      workers: int = 1) -> McEstimate:
    """Monte Carlo over the naive EPR protocol with honest Alice; Alice's output is the coin."""
    bob.check_m(m)
    job = _Job(None, None, bob, int(base_seed), naive_m=int(m), observer=ALICE)
    return _execute(job, trials, workers)


@dataclass(frozen=True)
class AttackReport:
    """Conclusive attack at one parameter point: closed forms next to the Monte Carlo estimate."""

    params: ProtocolParams
    analytic: AttackAnalytics
    empirical: McEstimate

    @property
    def xi(self) -> float:
        return self.empirical.p0 - 0.5

    def checks(self, sigmas: float = SIGMA) -> dict[str, bool]:
        """The three 4-sigma comparisons: p0, all-conclusive rate, swap-branch step-4 pass rate."""
        a, e = self.analytic, self.empirical
        pc, pc_se = e.rate("bob.conclusive")
        # in the swap branch only Alice's step-4 test at position m can fail
        ps, ps_se = e.rate("bob.swapped.completed", given="bob.swapped")
        return {
            "p0": e.within(a.p0, 0, sigmas),
            "pc": abs(pc - a.pc) <= sigmas * pc_se,
            "ps": abs(ps - a.ps) <= sigmas * ps_se,
        }


def attack_report(params: ProtocolParams, trials: int = 400_000, base_seed: int = 0, workers: int = 1,
                  target: int = 0, round: int | None = None) -> AttackReport:
    bob = conclusive_attack(params, target, round)
    analytic = attack_analytics(params.m, params.theta, bob.attack_round(params))
    est = monte_carlo(params, HONEST, bob, trials, base_seed, workers)
    if target == 1:
        # report in terms of the targeted outcome
        est = McEstimate(est.trials, est.count1, est.count0, est.aborts, est.seed, est.counters)
    return AttackReport(params, analytic, est)


# ---------------------------------------------------------------------------
# appendix verification


@dataclass(frozen=True)
class AppendixRow:
    m: int
    points: int
    max_dev_exact: float
    max_dev_blocks: float
    tol: float = APPENDIX_TOL

    @property
    def passed(self) -> bool:
        return self.max_dev_exact <= self.tol and self.max_dev_blocks <= self.tol


@dataclass(frozen=True)
class AppendixReport:
    rows: tuple[AppendixRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def omega_grid(points: int) -> np.ndarray:
    """``points`` angles evenly spaced over [0, pi/2]."""
    if int(points) != points or points < 1:
        raise ValueError(f"need at least one angle, got {points!r}")
    return np.linspace(0.0, math.pi / 2, int(points)) if points > 1 else np.array([math.pi / 4])


def verify_appendix(max_m: int = 8, omega_points: int = 50) -> AppendixReport:
    """Compare the parity-error closed form and block form with the dense oracle.

    Raises
    ------
    MemoryError
        For ``max_m`` above 10, where the oracle matrices get too large.
    """
    if max_m > disc.MAX_ORACLE_M:
        raise MemoryError(f"max_m = {max_m} exceeds the oracle limit {disc.MAX_ORACLE_M}")
    if int(max_m) != max_m or max_m < 1:
        raise ValueError(f"max_m must be a positive integer, got {max_m!r}")
    grid = omega_grid(omega_points)
    rows = []
    for m in range(1, int(max_m) + 1):
        dev_exact = dev_blocks = 0.0
        for omega in grid:
            oracle = disc.parity_error_oracle(m, float(omega))
            dev_exact = max(dev_exact, abs(disc.parity_error_exact(m, float(omega)) - oracle))
            dev_blocks = max(dev_blocks, abs(disc.parity_error_from_blocks(m, float(omega)) - oracle))
        rows.append(AppendixRow(m, len(grid), dev_exact, dev_blocks))
    return AppendixReport(tuple(rows))


@dataclass(frozen=True)
class SinglePairRow:
    omega: float
    helstrom_dev: float
    conclusive_dev: float
    false_pass_dev: float
    misidentification: float
    povm_violations: int


def verify_single_pair(omega_points: int = 50) -> list[SinglePairRow]:
    """Single-pair formulas against the m = 1 oracle and the explicit POVM.

    Zero is skipped for the POVM checks since no conclusive outcome exists there.
    """
    rows = []
    for omega in omega_grid(omega_points):
        omega = float(omega)
        helstrom = abs(disc.helstrom_error(omega) - disc.parity_error_oracle(1, omega))
        s0 = psi(0, omega).vector()
        s1 = psi(1, omega).vector()
        false_pass = abs(disc.false_claim_pass(omega) - float(s0 @ s1) ** 2)
        if omega == 0.0:
            rows.append(SinglePairRow(omega, helstrom, 0.0, false_pass, 0.0, 0))
            continue
        povm = disc.build_unambiguous_povm(omega)
        pr0 = povm.probabilities(s0)
        pr1 = povm.probabilities(s1)
        conclusive = max(abs(pr0[disc.CONCLUSIVE_0] - disc.conclusive_rate(omega)),
                         abs(pr1[disc.CONCLUSIVE_1] - disc.conclusive_rate(omega)))
        wrong = max(abs(pr0[disc.CONCLUSIVE_1]), abs(pr1[disc.CONCLUSIVE_0]))
        rows.append(SinglePairRow(omega, helstrom, conclusive, false_pass, wrong, len(validate_povm(povm))))
    return rows


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    m: int
    theta: float
    n: int
    i_star: int
    pc: float
    ps: float
    p0: float
    xi: float
    lower: float
    upper: float
    mc_trials: int | None = None
    mc_p0: float | None = None
    mc_p1: float | None = None
    mc_abort: float | None = None
    mc_stderr0: float | None = None

    @property
    def bounds_hold(self) -> bool:
        return self.lower <= self.xi <= self.upper


_INT_FIELDS = {"m", "n", "i_star", "mc_trials"}


def sweep_attack(m_list: Iterable[int], theta: float = math.pi / 9, trials: int = 0, base_seed: int = 0,
                 workers: int = 1) -> list[SweepRow]:
    """Analytic conclusive-attack figures for each m, with optional Monte Carlo columns."""
    m_list = list(m_list)
    if not m_list:
        raise ValueError("empty m list")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    rows = []
    for m in m_list:
        if int(m) != m or m < 2:
            raise ValueError(f"each m must be an integer >= 2, got {m!r}")
        a = attack_analytics(int(m), theta)
        params = derive_params(int(m), theta)
        row = SweepRow(int(m), theta, params.n, a.i_star, a.pc, a.ps, a.p0, a.xi, a.lower_bound, a.upper_bound)
        if trials > 0:
            est = monte_carlo(params, HONEST, conclusive_attack(), trials, base_seed, workers)
            row = dataclasses.replace(row, mc_trials=est.trials, mc_p0=est.p0, mc_p1=est.p1,
                                      mc_abort=est.abort, mc_stderr0=est.stderr0)
        rows.append(row)
    return rows


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    names = [f.name for f in dataclasses.fields(SweepRow)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow(["" if v is None else repr(v) for v in (getattr(row, k) for k in names)])


def read_sweep_csv(path) -> list[SweepRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = []
        for rec in csv.DictReader(fh):
            vals = {}
            for k, v in rec.items():
                if v == "":
                    vals[k] = None
                else:
                    vals[k] = int(v) if k in _INT_FIELDS else float(v)
            rows.append(SweepRow(**vals))
        return rows


# ---------------------------------------------------------------------------
# bias bound


@dataclass(frozen=True)
class BoundRow:
    m: int
    closed_form: float
    c_star: float
    numeric: float
    numeric_c: float

    @property
    def deviation(self) -> float:
        return abs(self.numeric - self.closed_form)

    @property
    def below_one_over_m(self) -> bool:
        return max(self.numeric, self.closed_form) <= 1.0 / self.m + 1e-12


def check_bias_bound(m_max: int = 1000, tol: float = 1e-9) -> tuple[list[BoundRow], bool]:
    """Maximum of ``c**m (1 - c**2) / 2`` on [0, 1]: closed form vs numerical search, and the 1/m bound."""
    if int(m_max) != m_max or m_max < 1:
        raise ValueError(f"m_max must be a positive integer, got {m_max!r}")
    rows = []
    for m in range(1, int(m_max) + 1):
        value, c_star = bias_upper_bound(m)
        num, num_c = numerical_bias_maximum(m)
        rows.append(BoundRow(m, value, c_star, num, num_c))
    ok = all(r.deviation <= tol and r.below_one_over_m for r in rows)
    return rows, ok


def check_bound_chain(m_values: Iterable[int] = range(2, 201), theta: float = math.pi / 9) -> list[tuple[int, dict]]:
    """Bound checks of the conclusive attack for each m; every dict value should be True."""
    return [(m, attack_analytics(m, theta).bound_checks()) for m in m_values]


# ---------------------------------------------------------------------------
# full verification


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def verify(max_m: int = 8, omega_points: int = 50, honest_trials: int = 2000, seed: int = 0,
           bound_m_max: int = 1000) -> list[Check]:
    """Run the oracle, bound and honest-statistics suites.  Deterministic."""
    checks = []
    app = verify_appendix(max_m, omega_points)
    worst = max(max(r.max_dev_exact, r.max_dev_blocks) for r in app.rows)
    checks.append(Check("appendix", app.passed, f"m=1..{max_m}, {omega_points} angles, max deviation {worst:.3g}"))

    single = verify_single_pair(omega_points)
    dev = max(max(r.helstrom_dev, r.conclusive_dev, r.false_pass_dev) for r in single)
    wrong = max(r.misidentification for r in single)
    bad = sum(r.povm_violations for r in single)
    checks.append(Check("single-pair", dev <= APPENDIX_TOL and wrong <= 1e-12 and bad == 0,
                        f"max deviation {dev:.3g}, misidentification {wrong:.3g}, POVM violations {bad}"))

    chain = check_bound_chain()
    failed = [m for m, res in chain if not all(res.values())]
    checks.append(Check("bound-chain", not failed, f"m=2..200, failures at {failed}" if failed else "m=2..200"))

    rows, ok = check_bias_bound(bound_m_max)
    dev = max(r.deviation for r in rows)
    checks.append(Check("bias-bound", ok, f"m=1..{bound_m_max}, max deviation {dev:.3g}"))

    params = derive_params(4, math.pi / 9)
    est = monte_carlo(params, HONEST, HONEST, honest_trials, seed)
    agree = est.counters.get("mismatch", 0) == 0
    ok = est.aborts == 0 and est.within(0.5) and agree
    checks.append(Check("honest", ok, f"m=4, {honest_trials} sessions, p0={est.p0:.4f} +/- {est.stderr0:.4f}, "
                                      f"aborts {est.aborts}"))
    return checks


def checks_to_json(checks: list[Check]) -> str:
    return "\n".join(json.dumps(c.to_dict(), separators=(",", ":")) for c in checks) + "\n"


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


__all__ = [
    "AppendixReport",
    "AppendixRow",
    "AttackReport",
    "attack_report",
    "BoundRow",
    "Check",
    "McEstimate",
    "NAIVE_STRATEGIES",
    "PROTOCOL_STRATEGIES",
    "STRATEGY_NAMES",
    "SweepRow",
    "check_bias_bound",
    "check_bound_chain",
    "make_strategy",
    "monte_carlo",
    "naive_monte_carlo",
    "read_sweep_csv",
    "sweep_attack",
    "verify",
    "verify_appendix",
    "verify_single_pair",
    "write_sweep_csv",
]
