"""Adversaries for the coin-tossing protocol and the closed forms that predict them.

Every attacker here plays Bob.  The conclusive attack and the best-guess
attack both intervene once, at slot (i, m) of step 3: Alice has just
announced her mask for that slot, so Bob holds i particles of every
procedure, but he has only committed i - 1 particles towards b_m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .discrimination import (
    CONCLUSIVE_0,
    CONCLUSIVE_1,
    parity_error_exact,
    parity_guess_probabilities,
    span_coordinates,
    unambiguous_probabilities,
)
from .protocol import (
    BOB,
    HONEST,
    Party,
    ProtocolParams,
    Strategy,
    StrategyInapplicable,
    Variant,
    critical_round,
)
from .qmath import ProductState

__all__ = [
    "HONEST",
    "AttackAnalytics",
    "BestGuessAttack",
    "ConclusiveAttack",
    "ReflectionAttack",
    "SelectiveAbort",
    "attack_analytics",
    "best_guess_success",
    "bias_objective",
    "bias_upper_bound",
    "conclusive_attack",
    "critical_round",
    "honest",
    "numerical_bias_maximum",
    "reflection_attack",
    "selective_abort",
]


def honest() -> Strategy:
    return HONEST


def _xor(bits) -> int:
    x = 0
    for b in bits:
        x ^= b
    return x


@dataclass(frozen=True, repr=False)
class _RoundAttack(Strategy):
    """Shared plumbing for attacks that act once at slot (round, m)."""

    target: int = 0
    round: int | None = None

    honest = False
    run_own_tests = False

    def attack_round(self, params: ProtocolParams) -> int:
        return self.round if self.round is not None else critical_round(params.m, params.theta)

    def check_params(self, params: ProtocolParams, role: str) -> None:
        if role != BOB:
            raise StrategyInapplicable(f"{self.name} is a strategy for Bob")
        if params.variant is not Variant.WITH_RETURN:
            raise StrategyInapplicable(f"{self.name} targets the with-return protocol")
        i = self.attack_round(params)
        if not 1 <= i <= params.n:
            raise StrategyInapplicable(f"attack round {i} outside 1..{params.n}")

    def measurement_slots(self, params: ProtocolParams, role: str) -> frozenset:
        return frozenset({(self.attack_round(params), params.m)})

    def _references(self, party: Party, i: int) -> tuple[ProductState, ProductState]:
        p = party.params
        return ProductState.repeated(p.state(0), i), ProductState.repeated(p.state(1), i)

    def _steer(self, party: Party, guess_a: int) -> None:
        # choose b_m so that guess_a xor B^[m-1] xor b_m equals the target
        m = party.params.m
        wanted = guess_a ^ _xor(party.bits[: m - 1]) ^ self.target
        swapped = wanted != party.bits[m - 1]
        party.notes["swapped"] = swapped
        if swapped:
            party.bits[m - 1] = wanted


@dataclass(frozen=True, repr=False)
class ConclusiveAttack(_RoundAttack):
    """Unambiguously discriminate every a_j at the critical round, then steer b_m."""

    name = "conclusive"

    def pre_announcement_measurement(self, party: Party, i: int, j: int) -> None:
        ref0, ref1 = self._references(party, i)
        outcomes = []
        for pos in range(party.params.m):
            held = ProductState(party.kept[pos])
            probs = unambiguous_probabilities(held, ref0, ref1)
            u = party.uniform("attack", i, pos + 1)
            if u < probs[CONCLUSIVE_0]:
                outcomes.append(0)
            elif u < probs[CONCLUSIVE_0] + probs[CONCLUSIVE_1]:
                outcomes.append(1)
            else:
                outcomes.append(None)
            # measured particles are spent; Bob never tests them
            party.kept[pos] = [None] * len(party.kept[pos])
        conclusive = None not in outcomes
        party.notes["conclusive"] = conclusive
        if conclusive:
            self._steer(party, _xor(outcomes))


@dataclass(frozen=True, repr=False)
class BestGuessAttack(_RoundAttack):
    """Minimum-error guess of the parity A at the attack round, then steer b_m."""

    name = "best-guess"

    def pre_announcement_measurement(self, party: Party, i: int, j: int) -> None:
        ref0, ref1 = self._references(party, i)
        coords = []
        for pos in range(party.params.m):
            x, y, _ = span_coordinates(ProductState(party.kept[pos]), ref0, ref1)
            coords.append((x, y))
            party.kept[pos] = [None] * len(party.kept[pos])
        p_zero, _ = parity_guess_probabilities(coords)
        guess = 0 if party.uniform("attack", i, 0) < p_zero else 1
        self._steer(party, guess)


@dataclass(frozen=True, repr=False)
class ReflectionAttack(Strategy):
    """Send Alice's own particles back as Bob's commitment (no-return variant only)."""

    name = "reflection"
    honest = False
    run_own_tests = False

    def check_params(self, params: ProtocolParams, role: str) -> None:
        if role != BOB:
            raise StrategyInapplicable("reflection is a strategy for Bob")
        if params.variant is not Variant.NO_RETURN:
            raise StrategyInapplicable(
                "reflection needs the no-return variant: with pairs and returns Bob cannot "
                "forward a particle he must later hand back"
            )

    def prepare_particle(self, party: Party, i: int, j: int) -> object:
        # Alice's particle for this slot arrived first; forward it unchanged
        return party.kept[j - 1].pop()

    def choose_reveal(self, party: Party, j: int) -> int:
        return party.partner_reveals[j - 1]


@dataclass(frozen=True, repr=False)
class SelectiveAbort(Strategy):
    """Play honestly, then refuse every outcome other than ``target``."""

    target: int = 0

    name = "selective-abort"
    honest = False

    def accept_outcome(self, party: Party, bit: int) -> bool:
        return bit == self.target


def conclusive_attack(params: ProtocolParams | None = None, target: int = 0, round: int | None = None) -> ConclusiveAttack:
    strategy = ConclusiveAttack(target, round)
    if params is not None:
        strategy.check_params(params, BOB)
    return strategy


def reflection_attack(params: ProtocolParams | None = None) -> ReflectionAttack:
    strategy = ReflectionAttack()
    if params is not None:
        strategy.check_params(params, BOB)
    return strategy


def selective_abort(target: int = 0) -> SelectiveAbort:
    return SelectiveAbort(target)


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class AttackAnalytics:
    m: int
    theta: float
    i_star: int
    pc: float
    ps: float
    p0: float
    xi: float

    @property
    def lower_bound(self) -> float:
        return 0.5 * (self.m - 1) ** 3 / self.m**6

    @property
    def upper_bound(self) -> float:
        return 1.0 / self.m

    def bound_checks(self) -> dict[str, bool]:
        m = self.m
        return {
            "pc >= 1/m": self.pc >= 1.0 / m,
            "ps >= (m-1)^2/m^4": self.ps >= (m - 1) ** 2 / m**4,
            "xi >= (m-1)^3/(2 m^6)": self.xi >= self.lower_bound,
            "xi <= 1/m": self.xi <= self.upper_bound,
        }


def attack_analytics(m: int, theta: float, i: int | None = None) -> AttackAnalytics:
    """Predicted success of the conclusive attack.

    PC = (1 - cos(theta)**i)**m is the chance that all m unambiguous
    measurements succeed, PS = cos(theta)**(2(i-1)) the chance that a swapped
    b_m survives Alice's step-4 test, and p0 = (1 + PC * PS) / 2.
    """
    if i is None:
        i = critical_round(m, theta)
    gamma = math.cos(theta)
    pc = (1.0 - gamma**i) ** m
    ps = gamma ** (2 * (i - 1))
    p0 = 0.5 * (1.0 + pc * ps)
    return AttackAnalytics(m, theta, i, pc, ps, p0, p0 - 0.5)


def bias_objective(c, m: int):
    """``c**m (1 - c**2) / 2`` for c in [0, 1]."""
    c = np.asarray(c, dtype=float)
    return 0.5 * c**m * (1.0 - c * c)


def bias_upper_bound(m: int) -> tuple[float, float]:
    """Maximum of :func:`bias_objective` over [0, 1] and its maximiser ``sqrt(m/(m+2))``."""
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    c_star = math.sqrt(m / (m + 2))
    value = (m / (m + 2)) ** (m / 2) / (m + 2)
    return value, c_star


def numerical_bias_maximum(m: int, grid: int = 10_000) -> tuple[float, float]:
    """Grid search refined by bounded Brent minimisation, independent of the closed form."""
    cs = np.linspace(0.0, 1.0, grid + 1)
    vals = bias_objective(cs, m)
    k = int(np.argmax(vals))
    lo = cs[max(k - 1, 0)]
    hi = cs[min(k + 1, grid)]
    res = optimize.minimize_scalar(lambda c: -float(bias_objective(c, m)), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-13})
    best_c, best_v = (res.x, -res.fun) if -res.fun >= vals[k] else (cs[k], vals[k])
    return float(best_v), float(best_c)


def best_guess_success(m: int, theta: float, i: int) -> float:
    """Probability of outcome 0 when Bob steers b_m from a minimum-error parity guess at round i.

    Equals ``(1 - PE(m, Omega_i)) (1 + PS(Omega_{i-1})) / 2`` with
    ``cos(Omega_i) = cos(theta)**i``.
    """
    if int(i) != i or i < 0:
        raise ValueError(f"round must be a non-negative integer, got {i!r}")
    gamma = math.cos(theta)
    omega_i = math.acos(min(gamma**i, 1.0))
    pe = parity_error_exact(m, omega_i)
    ps = gamma ** (2 * (i - 1)) if i >= 1 else 1.0
    return 0.5 * (1.0 - pe) * (1.0 + ps)
