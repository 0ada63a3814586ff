"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 protocol error, 4 attack budget
exhausted, 5 connection failure, 6 peer configuration mismatch.  Every error is
reported on stderr as one JSON object ``{"error": kind, "message": ...}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .attacks import SOLVERS, SolverConfig, attack_transcript
from .bench import load_campaign, multi_round_success, run_experiment, write_outputs
from .platform import PlatformDescriptor, PlatformError, normal_form
from .protocols import (
    KoLeeConfig,
    ProtocolError,
    Transcript,
    aag_commit,
    kolee_commit,
    make_config,
    multi_round,
    party_rng,
    run_exchange,
)
from .wire import WireError, config_fingerprint, loopback_exchange, tcp_exchange
from .words import WordError, format_word, parse_word

EXIT_OK, EXIT_USAGE, EXIT_PROTOCOL, EXIT_BUDGET = 0, 2, 3, 4
DEFAULT_PLATFORM = "braid:4"


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str) -> None:
        super().__init__(message)
        self.code, self.kind = code, kind


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise CliError(EXIT_USAGE, "usage", message)


def _platform(text: Optional[str]) -> PlatformDescriptor:
    return PlatformDescriptor.parse(text or DEFAULT_PLATFORM)


def _solver_cfg(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(max_depth=args.max_depth, max_steps=args.max_steps,
                        beam_width=args.beam_width, interleave_ratio=args.interleave_ratio,
                        seed=args.seed)


def _protocol_cfg(args: argparse.Namespace):
    return make_config(args.protocol, _platform(args.platform), args.seed,
                       secret_length=args.secret_length, base_length=args.base_length,
                       k=args.k, m=args.m, word_length=args.word_length)


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def cmd_nf(args: argparse.Namespace) -> int:
    p = _platform(args.platform)
    print(format_word(normal_form(p, parse_word(args.word, p.alphabet_size))))
    return EXIT_OK


def cmd_keygen(args: argparse.Namespace) -> int:
    """One party's secret and public tokens, drawn exactly as an exchange would."""
    cfg = _protocol_cfg(args)
    rng = party_rng(args.seed, args.role, args.round)
    doc = {"protocol": args.protocol, "platform": str(cfg.platform), "role": args.role,
           "round": args.round, "config": config_fingerprint(cfg)}
    if isinstance(cfg, KoLeeConfig):
        secret, token = kolee_commit(cfg, args.role, rng)
        doc.update(secret=format_word(secret), tokens=[format_word(token)])
    else:
        template, secret, tokens = aag_commit(cfg, args.role, rng)
        doc.update(secret=format_word(secret), template=format_word(template),
                   tokens=[format_word(w) for w in tokens])
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _write_exchange(out: Path, transcript: Transcript, keys: dict[str, bytes]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "transcript.json").write_text(transcript.to_json())
    for role, key in keys.items():
        (out / f"{role}.key").write_text(key.hex() + "\n")


def cmd_exchange(args: argparse.Namespace) -> int:
    cfg = _protocol_cfg(args)
    out = Path(args.out_dir)
    if args.transport == "inproc":
        if args.role or args.tap:
            raise CliError(EXIT_USAGE, "usage", "--role and --tap need --transport tcp")
        r = run_exchange(cfg, args.seed)
        transcript, keys = r.transcript, {"alice": r.alice_key, "bob": r.bob_key}
    elif args.role:
        if not args.address:
            raise CliError(EXIT_USAGE, "usage", "--role needs --address host:port")
        if args.tap:
            raise CliError(EXIT_USAGE, "usage", "--tap is only available for the loopback run")
        res = tcp_exchange(args.role, args.address, cfg, args.seed, timeout=args.timeout)
        transcript, keys = res.transcript, {args.role: res.key}
    else:
        a, b = loopback_exchange(cfg, args.seed, Path(args.tap) if args.tap else None,
                                 timeout=args.timeout)
        transcript, keys = a.transcript, {"alice": a.key, "bob": b.key}
    _write_exchange(out, transcript, keys)
    _emit({"protocol": args.protocol, "platform": str(cfg.platform), "transport": args.transport,
           "out_dir": str(out), "keys_agree": len(set(keys.values())) == 1})
    return EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    try:
        t = Transcript.from_json(Path(args.transcript).read_text())
    except OSError as exc:
        raise CliError(EXIT_USAGE, "usage", f"cannot read transcript: {exc}") from exc
    if args.platform and PlatformDescriptor.parse(args.platform) != t.platform:
        raise CliError(EXIT_PROTOCOL, "platform-mismatch",
                       f"transcript is over {t.platform}, not {args.platform}")
    res = attack_transcript(t, _solver_cfg(args), args.solver)
    doc = res.outcome.to_dict()
    doc["key_status"] = res.key_status
    if res.key is not None:
        doc["key"] = res.key.hex()
        if args.key_out:
            Path(args.key_out).write_text(res.key.hex() + "\n")
    _emit(doc)
    return EXIT_OK if res.outcome.success else EXIT_BUDGET


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        sampler, solver, extra = load_campaign(Path(args.config))
    except OSError as exc:
        raise CliError(EXIT_USAGE, "usage", f"cannot read config: {exc}") from exc
    except ValueError as exc:
        raise CliError(EXIT_USAGE, "bad-config", str(exc)) from exc
    overrides = {}
    if args.platform:
        overrides["platform"] = _platform(args.platform)
    if args.seed_given:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace
        sampler = replace(sampler, **overrides)
        if "seed" in overrides:
            solver = replace(solver, seed=args.seed)
    workers = args.workers if args.workers is not None else extra["workers"]
    report, records = run_experiment(sampler, solver, workers, extra["fit_degree"])
    paths = write_outputs(report, records, Path(args.out), figures=not args.no_figures)
    _emit({"platform": report.platform, "outputs": [str(p) for p in paths],
           "genericity": report.genericity.classification})
    return EXIT_OK


def cmd_demo_multiround(args: argparse.Namespace) -> int:
    """Independent rounds combined into one key; an eavesdropper must break all."""
    cfg = _protocol_cfg(args)
    res = multi_round(cfg, args.rounds, args.seed)
    doc = {
        "protocol": args.protocol,
        "platform": str(cfg.platform),
        "rounds": args.rounds,
        "alice_key": res.alice_key.hex(),
        "bob_key": res.bob_key.hex(),
        "keys_agree": res.alice_key == res.bob_key,
        "round_keys": [r.alice_key.hex() for r in res.rounds],
        "model": {"p": args.p, "success": multi_round_success(args.p, args.rounds)},
    }
    if args.attack:
        scfg = _solver_cfg(args)
        broken = [attack_transcript(t, scfg, args.solver).key == r.alice_key
                  for t, r in zip(res.transcripts, res.rounds)]
        doc["attack"] = {"solver": args.solver, "rounds_broken": sum(broken),
                         "combined_key_recovered": all(broken)}
    _emit(doc)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    common.add_argument("--platform", default=None,
                        help=f"free:r, sym:n or braid:n (default {DEFAULT_PLATFORM})")

    proto = _Parser(add_help=False)
    proto.add_argument("--protocol", choices=("kolee", "aag"), default="kolee")
    proto.add_argument("--secret-length", type=int, default=20)
    proto.add_argument("--base-length", type=int, default=8, help="Ko-Lee public word length")
    proto.add_argument("-k", type=int, default=5, help="AAG: size of Alice's public tuple")
    proto.add_argument("-m", type=int, default=5, help="AAG: size of Bob's public tuple")
    proto.add_argument("--word-length", type=int, default=8, help="AAG public word length")

    solver = _Parser(add_help=False)
    solver.add_argument("--solver", choices=SOLVERS, default="composite")
    solver.add_argument("--max-depth", type=int, default=6)
    solver.add_argument("--max-steps", type=int, default=200_000)
    solver.add_argument("--beam-width", type=int, default=4)
    solver.add_argument("--interleave-ratio", type=int, default=4)

    parser = _Parser(prog="conjsec", description="Conjugacy-based key exchange workbench.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("nf", parents=[common], help="print the normal form of a word")
    p.add_argument("word", help='e.g. "g1 g2^-1 g1"')
    p.set_defaults(func=cmd_nf)

    p = sub.add_parser("keygen", parents=[common, proto], help="one party's secret and tokens")
    p.add_argument("--role", choices=("alice", "bob"), default="alice")
    p.add_argument("--round", type=int, default=0)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("exchange", parents=[common, proto], help="run a full key exchange")
    p.add_argument("--transport", choices=("inproc", "tcp"), default="inproc")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--role", choices=("alice", "bob"),
                   help="tcp: play one side only (alice listens, bob connects)")
    p.add_argument("--address", help="tcp: host:port")
    p.add_argument("--tap", help="tcp loopback: write the eavesdropper's transcript here")
    p.add_argument("--timeout", type=float, default=30.0)
    p.set_defaults(func=cmd_exchange)

    p = sub.add_parser("attack", parents=[common, solver], help="recover a key from a transcript")
    p.add_argument("--transcript", required=True)
    p.add_argument("--key-out", help="write the recovered key (hex) here")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("bench", parents=[common], help="run a benchmark campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="bench-out")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("demo-multiround", parents=[common, proto, solver],
                       help="several independent rounds combined into one key")
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--p", type=float, default=0.9, help="per-round break probability for the model")
    p.add_argument("--attack", action="store_true", help="also attack every round")
    p.set_defaults(func=cmd_demo_multiround)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.seed_given = args.seed is not None
        if args.seed is None:
            args.seed = 0
        return args.func(args)
    except CliError as exc:
        code, kind, msg = exc.code, exc.kind, str(exc)
    except WireError as exc:
        code, kind, msg = exc.exit_code, exc.kind, str(exc)
    except (WordError, PlatformError) as exc:
        code, kind, msg = EXIT_USAGE, "malformed-input", str(exc)
    except ProtocolError as exc:
        code, kind, msg = EXIT_PROTOCOL, "protocol-error", str(exc)
    except ValueError as exc:
        code, kind, msg = EXIT_USAGE, "invalid-argument", str(exc)
    print(json.dumps({"error": kind, "message": msg, "exit_code": code}), file=sys.stderr)
    return code


def run() -> None:
    sys.exit(main())
