"""The EPR-based naive coin toss and the basis-reroll attack that breaks it.

Alice shares m Bell pairs (|00> + |11>)/sqrt(2) with Bob.  Bob announces a
basis per position and measures his half in it; Alice measures hers in the
announced bases and announces the outcomes; Bob checks them against his own.
Each side outputs the xor of its m outcomes.

Bob can learn the coin before anyone is committed: measuring everything in
the rectilinear basis tells him Alice's outcomes exactly.  If he does not
like the parity he announces the diagonal basis at position m, which
re-randomises Alice's outcome there, and then uses his check at m as a
pretext for aborting.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .protocol import ALICE, BOB, Abort, SessionOutcome

_R = 1.0 / math.sqrt(2.0)
NORM_TOL = 1e-12


class BasisChoice(str, enum.Enum):
    RECTILINEAR = "+"
    DIAGONAL = "x"


_BASIS_VECTORS = {
    BasisChoice.RECTILINEAR: (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
    BasisChoice.DIAGONAL: (np.array([_R, _R]), np.array([_R, -_R])),
}


def _qubit_projector(basis: BasisChoice, outcome: int, qubit: int) -> np.ndarray:
    v = _BASIS_VECTORS[basis][outcome]
    p = np.outer(v, v)
    return np.kron(p, np.eye(2)) if qubit == 0 else np.kron(np.eye(2), p)


# (basis, outcome, qubit) -> 4x4 projector
_PROJECTORS = {
    (b, o, q): _qubit_projector(b, o, q) for b in BasisChoice for o in (0, 1) for q in (0, 1)
}


@dataclass
class EprRegister:
    """One shared pair; qubit 0 belongs to Alice, qubit 1 to Bob."""

    vector: np.ndarray = field(default_factory=lambda: np.array([_R, 0.0, 0.0, _R]))
    owners: tuple[str, str] = (ALICE, BOB)

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=float)
        if self.vector.shape != (4,):
            raise ValueError("an EPR register holds a 4-component state")
        if abs(float(self.vector @ self.vector) - 1.0) > NORM_TOL:
            raise ValueError("register state is not normalised")

    def probability(self, qubit: int, basis: BasisChoice, outcome: int) -> float:
        w = _PROJECTORS[(BasisChoice(basis), outcome, qubit)] @ self.vector
        return float(w @ w)

    def measure(self, qubit: int, basis: BasisChoice, u: float) -> int:
        """Projective measurement of one qubit, sampled with the uniform draw ``u``.

        The state collapses to the normalised projection onto the outcome.
        """
        basis = BasisChoice(basis)
        p0 = self.probability(qubit, basis, 0)
        outcome = 0 if u < p0 else 1
        w = _PROJECTORS[(basis, outcome, qubit)] @ self.vector
        self.vector = w / math.sqrt(float(w @ w))
        return outcome

    def measure_owned(self, role: str, basis: BasisChoice, u: float) -> int:
        return self.measure(self.owners.index(role), basis, u)


class _Side:
    """Random draws of one participant, keyed like :class:`qcointoss.protocol.Party`."""

    def __init__(self, role: str, seed: int):
        self.role = role
        self.seed = seed
        self._keys: dict[str, int] = {}

    def uniform(self, purpose: str, j: int = 0, i: int = 0) -> float:
        k = self._keys.get(purpose)
        if k is None:
            k = self._keys[purpose] = rng.stream_key(self.seed, self.role, purpose)
        return rng.uniform(k, i, j)

    def bit(self, purpose: str, j: int = 0) -> int:
        return int(self.uniform(purpose, j) >= 0.5)


class NaiveStrategy:
    """Honest Bob for the naive protocol.

    ``announce`` chooses and announces the bases (measuring Bob's halves as
    it goes), ``verify`` receives Alice's announced outcomes and returns
    Bob's final bit, or ``None`` to abort.
    """

    name = "naive-honest"
    honest = True

    def check_m(self, m: int) -> None:
        if int(m) != m or m < 1:
            raise ValueError(f"m must be a positive integer, got {m!r}")

    def announce(self, bob: _Side, registers: list[EprRegister], state: dict) -> list[BasisChoice]:
        bases = []
        outcomes = []
        for j, reg in enumerate(registers, start=1):
            basis = BasisChoice.DIAGONAL if bob.bit("basis", j) else BasisChoice.RECTILINEAR
            bases.append(basis)
            outcomes.append(reg.measure_owned(BOB, basis, bob.uniform("measure", j)))
        state["outcomes"] = outcomes
        return bases

    def verify(self, bob: _Side, registers: list[EprRegister], state: dict, announced: list[int]) -> int | None:
        if announced != state["outcomes"]:
            return None
        return _xor(state["outcomes"])

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


NAIVE_HONEST = NaiveStrategy()


@dataclass(frozen=True, repr=False)
class BasisReroll(NaiveStrategy):
    """Bob learns the coin in the rectilinear basis and rerolls position m if he lost.

    Parameters
    ----------
    target : int
        The outcome Bob wants.
    fresh_test : bool
        When False (default) the check at position m is a pretext: Bob
        reports a mismatch exactly when Alice's rerolled bit gives the other
        outcome, and otherwise adopts her bit.  When True he honestly compares
        Alice's bit with a fresh diagonal measurement of his (already
        collapsed) half and keeps that outcome.
    """

    target: int = 0
    fresh_test: bool = False

    name = "naive-reroll"
    honest = False

    def check_m(self, m: int) -> None:
        super().check_m(m)
        if m < 2:
            raise ValueError("the reroll attack needs m >= 2")

    def announce(self, bob, registers, state):
        own = [reg.measure_owned(BOB, BasisChoice.RECTILINEAR, bob.uniform("measure", j))
               for j, reg in enumerate(registers, start=1)]
        state["outcomes"] = own
        rerolled = _xor(own) != self.target
        state["rerolled"] = rerolled
        bases = [BasisChoice.RECTILINEAR] * len(registers)
        if rerolled:
            bases[-1] = BasisChoice.DIAGONAL
        return bases

    def verify(self, bob, registers, state, announced):
        own = state["outcomes"]
        m = len(own)
        if announced[: m - 1] != own[: m - 1]:
            return None
        if not state["rerolled"]:
            return _xor(own) if announced == own else None
        head = _xor(own[: m - 1])
        if self.fresh_test:
            fresh = registers[-1].measure_owned(BOB, BasisChoice.DIAGONAL, bob.uniform("fresh", m))
            return head ^ fresh if fresh == announced[-1] else None
        bit = head ^ announced[-1]
        return bit if bit == self.target else None


def basis_reroll_attack(m: int | None = None, target: int = 0, fresh_test: bool = False) -> BasisReroll:
    strategy = BasisReroll(target, fresh_test)
    if m is not None:
        strategy.check_m(m)
    return strategy


def naive_honest() -> NaiveStrategy:
    return NAIVE_HONEST


def _xor(bits) -> int:
    x = 0
    for b in bits:
        x ^= b
    return x


def run_naive(m: int, bob: NaiveStrategy = NAIVE_HONEST, seed: int = 0) -> SessionOutcome:
    """One session of the naive protocol with honest Alice.

    Returns a :class:`~qcointoss.protocol.SessionOutcome` without transcript;
    ``notes["bob"]["rerolled"]`` is set by the reroll attack.
    """
    bob.check_m(m)
    registers = [EprRegister() for _ in range(m)]
    alice_side = _Side(ALICE, int(seed))
    bob_side = _Side(BOB, int(seed))
    state: dict = {}
    bases = bob.announce(bob_side, registers, state)
    if len(bases) != m:
        raise ValueError(f"{bob.name} announced {len(bases)} bases for m = {m}")
    announced = [reg.measure_owned(ALICE, BasisChoice(b), alice_side.uniform("measure", j))
                 for j, (reg, b) in enumerate(zip(registers, bases), start=1)]
    notes = {"bob": {"rerolled": state["rerolled"]}} if "rerolled" in state else {}
    bob_bit = bob.verify(bob_side, registers, state, announced)
    if bob_bit is None:
        return SessionOutcome(Abort("test", None, BOB, "announced bits"), None, None, None, notes)
    return SessionOutcome(None, _xor(announced), bob_bit, None, notes)
