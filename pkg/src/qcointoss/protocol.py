"""The m-procedure quantum coin-tossing protocol as a deterministic state machine.

A session runs the five steps with the nested ``for i: for j:`` ordering, so
round i of every procedure j completes before round i + 1 of any procedure
starts.  Particles are tracked symbolically as :class:`~qcointoss.qmath.PureState`
values; every test is a rank-1 projector whose acceptance probability is a
product of overlaps, sampled with the counter-based generator in
:mod:`qcointoss.rng`.

Party behaviour is delegated to a :class:`Strategy`; the base class plays
honestly and adversaries override individual hooks.
"""

from __future__ import annotations

import enum
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from . import rng
from .qmath import PureState, psi

ALICE = "alice"
BOB = "bob"
FIRST = "first"
SECOND = "second"

# message kinds
PAIR = "pair"
PARTICLE = "particle"
MASK = "mask"
RETURN = "return"
REVEAL = "reveal"
ABORT = "abort"


class Variant(str, enum.Enum):
    WITH_RETURN = "with-return"
    NO_RETURN = "no-return"


class ProtocolViolation(Exception):
    """A strategy produced a move the protocol does not allow."""


class StrategyInapplicable(ValueError):
    """A strategy cannot be played under the given protocol parameters."""


def critical_round(m: int, theta: float) -> int:
    """Smallest i with ``cos(theta)**i <= (m - 1) / m**2``."""
    if int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")
    if not 0 < theta < math.pi / 2:
        raise ValueError(f"theta must lie in (0, pi/2), got {theta!r}")
    gamma = math.cos(theta)
    # relative slack absorbs rounding in cos() for exact-ratio inputs such as cos(theta) = 1/4
    target = (m - 1) / m**2 * (1 + 1e-12)
    i = max(1, math.ceil(math.log(target) / math.log(gamma)))
    while gamma**i > target:
        i += 1
    while i > 1 and gamma ** (i - 1) <= target:
        i -= 1
    return i


@dataclass(frozen=True)
class ProtocolParams:
    m: int
    n: int
    theta: float
    variant: Variant = Variant.WITH_RETURN

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0 < self.theta < math.pi / 2:
            raise ValueError(f"theta must lie in (0, pi/2), got {self.theta!r}")
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def gamma(self) -> float:
        """Overlap ``cos(theta)`` between the two coding states."""
        return math.cos(self.theta)

    @property
    def commitment_overlap(self) -> float:
        return self.gamma**self.n

    @property
    def particle_count(self) -> int:
        """Particles exchanged in one full session."""
        per_slot = 4 if self.variant is Variant.WITH_RETURN else 2
        return per_slot * self.n * self.m

    @cached_property
    def _states(self) -> tuple[PureState, PureState]:
        return psi(0, self.theta), psi(1, self.theta)

    def state(self, bit: int) -> PureState:
        return self._states[bit]


def derive_params(m: int, theta: float, n: int | None = None, variant: Variant | str = Variant.WITH_RETURN) -> ProtocolParams:
    """Protocol parameters with ``n = critical_round(m, theta) + ceil(log2 m)`` unless given."""
    if n is None:
        n = critical_round(m, theta) + math.ceil(math.log2(m))
    return ProtocolParams(m, n, theta, Variant(variant))


class Message(NamedTuple):
    seq: int
    step: int
    i: int | None
    j: int | None
    sender: str
    kind: str
    payload: object


@dataclass(frozen=True)
class Abort:
    step: int | str
    j: int | None
    by: str
    test: str


@dataclass
class Transcript:
    params: ProtocolParams
    seed: int
    alice: str
    bob: str
    messages: list[Message] = field(default_factory=list)

    def header(self) -> dict:
        return {
            "m": self.params.m,
            "n": self.params.n,
            "theta": self.params.theta,
            "variant": self.params.variant.value,
            "seed": self.seed,
            "alice": self.alice,
            "bob": self.bob,
        }

    def dumps(self) -> str:
        out = io.StringIO()
        out.write(json.dumps(self.header(), separators=(",", ":")) + "\n")
        for msg in self.messages:
            out.write(json.dumps(msg._asdict(), separators=(",", ":")) + "\n")
        return out.getvalue()

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "Transcript":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = json.loads(lines[0])
        params = ProtocolParams(head["m"], head["n"], head["theta"], Variant(head["variant"]))
        msgs = []
        for ln in lines[1:]:
            rec = json.loads(ln)
            payload = rec["payload"]
            if isinstance(payload, list):
                payload = tuple(payload)
            msgs.append(Message(rec["seq"], rec["step"], rec["i"], rec["j"], rec["sender"], rec["kind"], payload))
        return cls(params, head["seed"], head["alice"], head["bob"], msgs)

    @classmethod
    def read(cls, path) -> "Transcript":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def tags(self) -> list[str]:
        return [f"{m.step}{m.sender[0].upper()}:{m.kind}" for m in self.messages]


@dataclass
class SessionOutcome:
    abort: Abort | None
    alice_bit: int | None
    bob_bit: int | None
    transcript: Transcript | None
    notes: dict = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return self.abort is None


class Party:
    """Mutable per-session state of one participant.

    Registries are indexed by procedure ``j`` (0-based internally):
    ``kept[j]`` holds the partner's commitment particles this party keeps,
    ``returned[j]`` the party's own particles handed back by the partner.
    """

    def __init__(self, role: str, params: ProtocolParams, seed: int):
        self.role = role
        self.params = params
        self.seed = seed
        m = params.m
        self.bits: list[int] = []
        self.masks: list[list[int]] = []
        self.inbox: list[list] = []
        self.kept: list[list] = [[] for _ in range(m)]
        self.returned: list[list] = [[] for _ in range(m)]
        self.partner_reveals: list[int | None] = [None] * m
        self.tilde: list[int | None] = [None] * m
        self.notes: dict = {}
        self.scratch: dict = {}
        self._keys: dict[str, int] = {}

    def key(self, purpose: str) -> int:
        k = self._keys.get(purpose)
        if k is None:
            k = self._keys[purpose] = rng.stream_key(self.seed, self.role, purpose)
        return k

    def uniform(self, purpose: str, i: int = 0, j: int = 0) -> float:
        return rng.uniform(self.key(purpose), i, j)

    def random_bits(self, purpose: str, count: int) -> list[int]:
        key = self.key(purpose)
        return [rng.bit(key, 0, j) for j in range(count)]

    def random_grid(self, purpose: str) -> list[list[int]]:
        return rng.bits(self.key(purpose), (self.params.n, self.params.m)).tolist()


class Strategy:
    """Honest play; subclasses override the hooks where they deviate.

    Hooks receive the acting :class:`Party` and 1-based slot indices.  A
    strategy object holds configuration only; anything that changes during a
    session lives on the party (``party.scratch`` / ``party.notes``).
    """

    name = "honest"
    honest = True
    run_own_tests = True

    def check_params(self, params: ProtocolParams, role: str) -> None:
        pass

    def choose_secret_bits(self, party: Party) -> list[int]:
        return party.random_bits("secret", party.params.m)

    def choose_masks(self, party: Party) -> list[list[int]]:
        return party.random_grid("mask")

    def prepare_particle(self, party: Party, i: int, j: int) -> PureState:
        """No-return variant only: the particle sent at slot (i, j)."""
        return party.params.state(party.bits[j - 1])

    def on_receive_particles(self, party: Party, i: int, j: int) -> None:
        pass

    def measurement_slots(self, params: ProtocolParams, role: str) -> frozenset:
        """Slots (i, j) at which :meth:`pre_announcement_measurement` must run."""
        return frozenset()

    def pre_announcement_measurement(self, party: Party, i: int, j: int) -> None:
        pass

    def choose_mask_announcement(self, party: Party, i: int, j: int) -> int:
        return party.bits[j - 1] ^ party.masks[i - 1][j - 1]

    def choose_return(self, party: Party, i: int, j: int, announced: int) -> str:
        return SECOND if announced == 0 else FIRST

    def choose_reveal(self, party: Party, j: int) -> int:
        return party.bits[j - 1]

    def accept_outcome(self, party: Party, bit: int) -> bool:
        return True

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


HONEST = Strategy()


def _pass_probability(held, bit: int, params: ProtocolParams) -> float:
    """Acceptance probability of the projector onto psi(bit)**len(held)."""
    target_state = params.state(bit)
    if held.count(target_state) == len(held):
        return 1.0
    try:
        angles = Counter([s.half_angle for s in held])
    except AttributeError:
        raise ProtocolViolation("test applied to particles already consumed by a measurement") from None
    target = target_state.half_angle
    log_p = 0.0
    for angle, count in angles.items():
        c = math.cos(angle - target)
        if c == 0.0:
            return 0.0
        log_p += 2.0 * count * math.log(abs(c))
    return math.exp(log_p)


def commitment_test(held, claimed_bit: int, params: ProtocolParams, u: float) -> bool:
    """Sample the two-outcome test (E_b, 1 - E_b) on ``held`` with the uniform draw ``u``."""
    factors = held.factors if hasattr(held, "factors") else held
    if len(factors) != params.n:
        raise ValueError(f"test expects {params.n} particles, got {len(factors)}")
    return u < _pass_probability(factors, claimed_bit, params)


def final_bits(alice: Party, bob: Party) -> tuple[int, int]:
    """Alice outputs ``A xor B~``, Bob outputs ``A~ xor B``."""
    if any(t is None for t in alice.tilde) or any(t is None for t in bob.tilde):
        raise RuntimeError("final bits requested before all tests completed")
    a = _xor(alice.bits)
    b = _xor(bob.bits)
    return a ^ _xor(alice.tilde), _xor(bob.tilde) ^ b


def _xor(bits) -> int:
    x = 0
    for b in bits:
        x ^= b
    return x


def _overrides(strategy: "Strategy", hook: str) -> bool:
    return getattr(type(strategy), hook) is not getattr(Strategy, hook)


def _is_bit(x) -> bool:
    return x in (0, 1) and not isinstance(x, bool)


class _Abort(Exception):
    def __init__(self, abort: Abort):
        self.abort = abort


class _Session:
    def __init__(self, params, alice_strategy, bob_strategy, seed, record):
        self.params = params
        self.strategies = {ALICE: alice_strategy, BOB: bob_strategy}
        self.parties = {ALICE: Party(ALICE, params, seed), BOB: Party(BOB, params, seed)}
        self.seed = seed
        self.transcript = Transcript(params, seed, alice_strategy.name, bob_strategy.name) if record else None
        self._seq = 0

    def emit(self, step, i, j, sender, kind, payload):
        if self.transcript is not None:
            self.transcript.messages.append(Message(self._seq, step, i, j, sender, kind, payload))
        self._seq += 1

    def violation(self, step, j, who, what):
        raise _Abort(Abort(step, j, who, f"protocol-violation: {what}"))

    def label(self, state: PureState):
        # transcript tag of a particle: its coding bit, or its raw half-angle
        p = self.params
        if state == p.state(0):
            return 0
        if state == p.state(1):
            return 1
        return state.half_angle

    def run(self) -> SessionOutcome:
        p = self.params
        for role, strat in self.strategies.items():
            strat.check_params(p, role)
        try:
            self.step1()
            if p.variant is Variant.WITH_RETURN:
                self.step2_pairs()
                self.step3()
                self.step4()
                self.step5()
            else:
                self.step2_direct()
                self.step4()
            alice, bob = self.parties[ALICE], self.parties[BOB]
            a_bit, b_bit = final_bits(alice, bob)
            for role, bit in ((ALICE, a_bit), (BOB, b_bit)):
                if not self.strategies[role].accept_outcome(self.parties[role], bit):
                    raise _Abort(Abort("final", None, role, "refused outcome"))
        except _Abort as exc:
            ab = exc.abort
            self.emit(ab.step, None, ab.j, ab.by, ABORT, ab.test)
            return SessionOutcome(ab, None, None, self.transcript, self.notes())
        return SessionOutcome(None, a_bit, b_bit, self.transcript, self.notes())

    def notes(self):
        return {role: dict(party.notes) for role, party in self.parties.items() if party.notes}

    def step1(self):
        m = self.params.m
        for role, party in self.parties.items():
            bits = self.strategies[role].choose_secret_bits(party)
            if len(bits) != m or not all(_is_bit(b) for b in bits):
                self.violation(1, None, role, "secret bits")
            party.bits = list(bits)

    def step2_pairs(self):
        p = self.params
        s0, s1 = p.state(0), p.state(1)
        alice, bob = self.parties[ALICE], self.parties[BOB]
        sa, sb = self.strategies[ALICE], self.strategies[BOB]
        for party, strat in ((alice, sa), (bob, sb)):
            party.masks = strat.choose_masks(party)
            if len(party.masks) != p.n or any(len(row) != p.m for row in party.masks):
                self.violation(2, None, party.role, "mask grid shape")
            party.inbox = [[None] * p.m for _ in range(p.n)]
        record = self.transcript is not None
        hooks = [(sender, receiver, _overrides(rstrat, "on_receive_particles") and rstrat)
                 for sender, receiver, rstrat in ((alice, bob, sb), (bob, alice, sa))]
        if not record and not any(h for _, _, h in hooks):
            # nothing observes the order of deliveries
            pairs = ((s0, s1), (s1, s0))
            for sender, receiver, _ in hooks:
                receiver.inbox = [[pairs[c] for c in row] for row in sender.masks]
            return
        for i in range(1, p.n + 1):
            for j in range(1, p.m + 1):
                for sender, receiver, hook in hooks:
                    c = sender.masks[i - 1][j - 1]
                    receiver.inbox[i - 1][j - 1] = (s0, s1) if c == 0 else (s1, s0)
                    if record:
                        self.emit(2, i, j, sender.role, PAIR, (c, 1 - c))
                    if hook:
                        hook.on_receive_particles(receiver, i, j)

    def step2_direct(self):
        p = self.params
        alice, bob = self.parties[ALICE], self.parties[BOB]
        sa, sb = self.strategies[ALICE], self.strategies[BOB]
        for i in range(1, p.n + 1):
            for j in range(1, p.m + 1):
                for sender, sstrat, receiver, rstrat in ((alice, sa, bob, sb), (bob, sb, alice, sa)):
                    state = sstrat.prepare_particle(sender, i, j)
                    if not isinstance(state, PureState):
                        self.violation(2, j, sender.role, "particle")
                    receiver.kept[j - 1].append(state)
                    self.emit(2, i, j, sender.role, PARTICLE, self.label(state))
                    rstrat.on_receive_particles(receiver, i, j)

    def step3(self):
        p = self.params
        alice, bob = self.parties[ALICE], self.parties[BOB]
        sa, sb = self.strategies[ALICE], self.strategies[BOB]
        record = self.transcript is not None
        sides = []
        for announcer, astrat, holder, hstrat in ((alice, sa, bob, sb), (bob, sb, alice, sa)):
            sides.append((
                announcer,
                astrat,
                astrat.measurement_slots(p, announcer.role),
                _overrides(astrat, "choose_mask_announcement"),
                holder,
                hstrat,
                _overrides(hstrat, "choose_return"),
            ))
        bulk_ok = not record and not any(side[3] or side[6] for side in sides)
        event_rounds = {i for side in sides for (i, _) in side[2]}
        i = 1
        while i <= p.n:
            if bulk_ok and i not in event_rounds:
                stop = i
                while stop <= p.n and stop not in event_rounds:
                    stop += 1
                for side in sides:
                    self._bulk_rounds(side[0], side[4], i, stop)
                i = stop
                continue
            for j in range(1, p.m + 1):
                for announcer, astrat, slots, custom_announce, holder, hstrat, custom_return in sides:
                    if slots and (i, j) in slots:
                        astrat.pre_announcement_measurement(announcer, i, j)
                    if custom_announce:
                        e = astrat.choose_mask_announcement(announcer, i, j)
                        if e not in (0, 1):
                            self.violation(3, j, announcer.role, "mask announcement")
                    else:
                        e = announcer.bits[j - 1] ^ announcer.masks[i - 1][j - 1]
                    if custom_return:
                        which = hstrat.choose_return(holder, i, j, e)
                        if which not in (FIRST, SECOND):
                            self.violation(3, j, holder.role, "return choice")
                    else:
                        which = SECOND if e == 0 else FIRST
                    pair = holder.inbox[i - 1][j - 1]
                    holder.inbox[i - 1][j - 1] = None
                    if which == SECOND:
                        announcer.returned[j - 1].append(pair[1])
                        holder.kept[j - 1].append(pair[0])
                    else:
                        announcer.returned[j - 1].append(pair[0])
                        holder.kept[j - 1].append(pair[1])
                    if record:
                        self.emit(3, i, j, announcer.role, MASK, e)
                        self.emit(3, i, j, holder.role, RETURN, which)
            i += 1

    @staticmethod
    def _bulk_rounds(announcer, holder, start, stop):
        # honest announcements/returns for rounds start..stop-1 with no observer in between
        masks = announcer.masks[start - 1:stop - 1]
        inbox = holder.inbox[start - 1:stop - 1]
        rows = list(zip(masks, inbox))
        for j, bj in enumerate(announcer.bits):
            holder.kept[j].extend([in_row[j][bj ^ mask_row[j]] for mask_row, in_row in rows])
            announcer.returned[j].extend([in_row[j][1 ^ bj ^ mask_row[j]] for mask_row, in_row in rows])

    def _test(self, step, j, tester, strat, held, bit, what):
        tester.tilde[j - 1] = bit if step == 4 else tester.tilde[j - 1]
        if not strat.run_own_tests:
            return
        if len(held) != self.params.n:
            raise ValueError(f"test expects {self.params.n} particles, got {len(held)}")
        p_pass = _pass_probability(held, bit, self.params)
        # u < 1 always, so a certain pass needs no draw; draws are keyed by slot, nothing shifts
        if p_pass < 1.0 and not tester.uniform("test", step, j) < p_pass:
            if step == 4:
                tester.tilde[j - 1] = None
            raise _Abort(Abort(step, j, tester.role, what))

    def step4(self):
        p = self.params
        alice, bob = self.parties[ALICE], self.parties[BOB]
        sa, sb = self.strategies[ALICE], self.strategies[BOB]
        for j in range(1, p.m + 1):
            for revealer, rstrat, tester, tstrat in ((alice, sa, bob, sb), (bob, sb, alice, sa)):
                bit = rstrat.choose_reveal(revealer, j)
                if not _is_bit(bit):
                    self.violation(4, j, revealer.role, "reveal")
                self.emit(4, None, j, revealer.role, REVEAL, bit)
                tester.partner_reveals[j - 1] = bit
                self._test(4, j, tester, tstrat, tester.kept[j - 1], bit, f"E_{bit}")

    def step5(self):
        p = self.params
        for j in range(1, p.m + 1):
            for role in (ALICE, BOB):
                party = self.parties[role]
                own = party.bits[j - 1]
                self._test(5, j, party, self.strategies[role], party.returned[j - 1], 1 - own, f"E_{1 - own}")


def run_session(params: ProtocolParams, alice: Strategy = HONEST, bob: Strategy = HONEST, seed: int = 0, record: bool = True) -> SessionOutcome:
    """Run one session and return its outcome (with transcript when ``record``)."""
    return _Session(params, alice, bob, int(seed), record).run()
