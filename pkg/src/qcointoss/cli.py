"""Command-line entry point: ``qcointoss {verify,run,sweep,transcript,bound}``.

Exit status is 0 on success, 1 when a check fails and 2 for usage or
parameter errors.  Reports are written as one JSON record per line.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys

from . import harness
from .naive import NaiveStrategy
from .protocol import ALICE, BOB, StrategyInapplicable, Variant, derive_params, run_session
from .strategies import ConclusiveAttack, attack_analytics

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

_PI_FORM = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def angle(text: str) -> float:
    """Parse radians given as a number or as ``pi/9``, ``2*pi/9``, ``2pi/9``."""
    try:
        return float(text)
    except ValueError:
        pass
    match = _PI_FORM.match(text)
    if not match:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}")
    num = float(match.group(1)) if match.group(1) else 1.0
    den = float(match.group(2)) if match.group(2) else 1.0
    return num * math.pi / den


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _emit(record: dict, out=None) -> None:
    print(json.dumps(record, separators=(",", ":")), file=out or sys.stdout)


class _Parser(argparse.ArgumentParser):
    # argparse already exits with 2 on usage errors; keep that contract explicit
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcointoss", description="Quantum coin-tossing simulator and formula checker.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="run the oracle and bound suites")
    p.add_argument("--max-m", type=int, default=8)
    p.add_argument("--omega-points", type=int, default=50)
    p.add_argument("--honest-trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)

    strategies = ", ".join(harness.STRATEGY_NAMES)

    def session_args(p, trials: bool):
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--theta", type=angle, required=True, help="radians, e.g. 0.349 or pi/9")
        p.add_argument("--n", type=int, default=None, help="rounds (default: critical round + ceil(log2 m))")
        p.add_argument("--alice", default="honest", help=strategies)
        p.add_argument("--bob", default="honest", help=strategies)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.WITH_RETURN.value)
        p.add_argument("--target", type=int, choices=(0, 1), default=0, help="outcome the cheater wants")
        p.add_argument("--round", type=int, default=None, help="attack round (default: critical round)")
        if trials:
            p.add_argument("--trials", type=int, required=True)
            p.add_argument("--workers", type=int, default=1)
            p.add_argument("--json", dest="json_path", default=None, help="also write the estimate here")

    session_args(sub.add_parser("run", help="Monte Carlo estimate of p0, p1 and the abort rate"), True)
    p = sub.add_parser("transcript", help="write the replayable log of one session")
    session_args(p, False)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="conclusive-attack figures over several m, as CSV")
    p.add_argument("--m-list", type=int_list, required=True)
    p.add_argument("--theta", type=angle, required=True)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", dest="csv_path", required=True)

    p = sub.add_parser("bound", help="check the bias bound for m = 1..m-max")
    p.add_argument("--m-max", type=int, default=1000)
    p.add_argument("--rows", action="store_true", help="print every row, not just the summary")
    return parser


def _strategies(args):
    alice = harness.make_strategy(args.alice, args.target, args.round)
    bob = harness.make_strategy(args.bob, args.target, args.round)
    if isinstance(alice, NaiveStrategy):
        raise ValueError("naive strategies are played by Bob; Alice is always honest there")
    naive = isinstance(bob, NaiveStrategy)
    if naive and args.alice != "honest":
        raise ValueError("the naive protocol only supports an honest Alice")
    return alice, bob, naive


def cmd_verify(args) -> int:
    checks = harness.verify(args.max_m, args.omega_points, args.honest_trials, args.seed)
    for c in checks:
        _emit(c.to_dict())
    ok = all(c.passed for c in checks)
    _emit({"verify": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_run(args) -> int:
    alice, bob, naive = _strategies(args)
    if naive:
        est = harness.naive_monte_carlo(args.m, bob, args.trials, args.seed, args.workers)
        record = {"protocol": "naive", "m": args.m, "alice": "honest", "bob": bob.name, **est.to_dict()}
    else:
        params = derive_params(args.m, args.theta, args.n, args.variant)
        est = harness.monte_carlo(params, alice, bob, args.trials, args.seed, args.workers)
        record = {"protocol": params.variant.value, "m": params.m, "n": params.n, "theta": params.theta,
                  "alice": alice.name, "bob": bob.name, **est.to_dict()}
        if isinstance(bob, ConclusiveAttack):
            a = attack_analytics(params.m, params.theta, bob.attack_round(params))
            record["analytic"] = {"i_star": a.i_star, "pc": a.pc, "ps": a.ps, "p0": a.p0, "xi": a.xi}
    _emit(record)
    if args.json_path:
        with open(args.json_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")
    return EXIT_OK


def cmd_transcript(args) -> int:
    alice, bob, naive = _strategies(args)
    if naive:
        raise ValueError("transcripts are only recorded for the quantum protocol")
    params = derive_params(args.m, args.theta, args.n, args.variant)
    outcome = run_session(params, alice, bob, args.seed, record=True)
    outcome.transcript.write(args.out)
    summary = {"out": args.out, "messages": len(outcome.transcript.messages), "completed": outcome.completed,
               ALICE: outcome.alice_bit, BOB: outcome.bob_bit}
    if outcome.abort is not None:
        summary["abort"] = {"step": outcome.abort.step, "by": outcome.abort.by, "test": outcome.abort.test}
    _emit(summary)
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows = harness.sweep_attack(args.m_list, args.theta, args.trials, args.seed, args.workers)
    harness.write_sweep_csv(rows, args.csv_path)
    ok = all(r.bounds_hold for r in rows)
    _emit({"csv": args.csv_path, "rows": len(rows), "bounds_hold": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bound(args) -> int:
    rows, ok = harness.check_bias_bound(args.m_max)
    if args.rows:
        for r in rows:
            _emit({"m": r.m, "closed_form": r.closed_form, "c_star": r.c_star, "numeric": r.numeric,
                   "deviation": r.deviation, "one_over_m": 1.0 / r.m, "holds": r.below_one_over_m})
    worst = max(rows, key=lambda r: r.deviation)
    _emit({"m_max": args.m_max, "max_deviation": worst.deviation, "at_m": worst.m,
           "all_below_one_over_m": all(r.below_one_over_m for r in rows), "bound": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "verify": cmd_verify,
    "run": cmd_run,
    "transcript": cmd_transcript,
    "sweep": cmd_sweep,
    "bound": cmd_bound,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, StrategyInapplicable, MemoryError) as exc:
        print(f"qcointoss {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
