"""Command-line entry point: ``knapsack-auction <command> ...``.

Exit codes: 0 success, 1 bad input (config, parameters, unreadable or
malformed files), 2 auction aborted, 3 transcript verification failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import golden_config, load_run_config
from .errors import AuctionError, ConfigError, GroupGenerationError, TranscriptParseError
from .group import generate_group_params
from .harness import run_auction, verify_transcript
from .messages import bidder_id, dump_transcript, load_transcript
from .protocol.parties import Winner

EXIT_OK, EXIT_INPUT, EXIT_ABORTED, EXIT_VERIFY = 0, 1, 2, 3
UNIT = "units"


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_gen_params(args) -> int:
    try:
        params = generate_group_params(args.q_bits, args.seed.encode())
    except GroupGenerationError as exc:
        _err(f"parameter generation failed: {exc}")
        return EXIT_INPUT
    Path(args.out).write_text(json.dumps(params.to_dict(), indent=2) + "\n")
    print(f"q={params.q} p={params.p}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        rc = load_run_config(args.config, args.mode)
        outcome, records = run_auction(rc.auction, rc.bids, rc.adversary(), rc.rebids)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except AuctionError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT
    if args.transcript_out:
        Path(args.transcript_out).write_text(dump_transcript(records))
    if isinstance(outcome, Winner):
        second = "none" if outcome.second is None else str(outcome.second)
        print(f"highest={outcome.highest} second={second} winner={bidder_id(outcome.winner)}")
        print(f"paid={outcome.paid} {UNIT}")
        return EXIT_OK
    print(f"aborted reason={outcome.reason} culprit={outcome.culprit or 'none'}")
    if outcome.detail:
        print(f"diagnosis: {outcome.detail}")
    return EXIT_ABORTED


def cmd_verify(args) -> int:
    try:
        text = Path(args.transcript).read_text()
        records = load_transcript(text)
        # the transcript, not the file, tells which mode was run
        committed = any(r.kind == "announce" and "eta" in r.body for r in records)
        rc = load_run_config(args.config, "malicious" if committed else "honest")
    except TranscriptParseError as exc:
        where = f" seq={exc.seq}" if exc.seq is not None else ""
        _err(f"transcript parse error{where}: {exc}")
        return EXIT_INPUT
    except OSError as exc:
        _err(f"cannot read {args.transcript}: {exc.strerror}")
        return EXIT_INPUT
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_INPUT
    report = verify_transcript(records, rc.auction)
    print(f"mode={rc.auction.mode} records={len(records)}")
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_golden(args) -> int:
    text = json.dumps(golden_config(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knapsack-auction", description="Sealed-bid knapsack auction simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-params", help="generate a prime-order group")
    p.add_argument("--q-bits", type=int, required=True)
    p.add_argument("--seed", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_params)

    p = sub.add_parser("run", help="run an auction from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--transcript-out")
    p.add_argument("--mode", choices=("honest", "malicious"))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="replay the checks of a recorded transcript")
    p.add_argument("--transcript", required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("golden", help="print the worked example configuration")
    p.add_argument("--out")
    p.set_defaults(func=cmd_golden)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
