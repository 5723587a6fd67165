"""Command line interface.

Exit codes: 0 accept/success, 1 reject, 2 usage or data error.

Every command that writes files also writes ``<output>.manifest.json``
holding the exact argument vector (including any auto-generated seed), so
``photonqfa rerun <manifest>`` reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import json
import re
import secrets
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__, serialization
from .classical import (
    ClassicalAutomaton,
    Kind,
    accept_dfa,
    accept_nfa,
    accept_prob_pfa,
    build_dfa_lm,
    build_nfa_ek,
    build_pfa_lmn,
    cut_point_scan,
)
from .grammar import grammar_to_nfa, parse_grammar
from .photonic import (
    Convention,
    PhotonExperimentConfig,
    count_threshold,
    error_probability,
    experiment_summary,
    fmt,
    random_word_lengths,
    records_to_csv,
    run_experiment,
    summary_to_json,
)
from .quantum import MeasureOnceQfa, accept_prob, amplify_majority, build_qfa_a, cut_point_for_a

EXIT_ACCEPT, EXIT_REJECT, EXIT_ERROR = 0, 1, 2
MAX_MATERIALIZED = 10_000_000
_WORD_TOKEN = re.compile(r"(\w)(?:\^(\d+))?")


class UsageError(Exception):
    pass


def _r9(x: float) -> float:
    return float(fmt(x))


def _emit(obj: dict) -> None:
    print(json.dumps(obj))


def parse_word(text: str, alphabet) -> int | list[str]:
    """Parse ``a^5``, ``abba``, ``b^2a^3`` or ``eps``.

    Unary automata get the word length back so the word is never built.
    """
    text = text.strip()
    unary = len(alphabet) == 1
    if text in ("", "eps", "ε"):
        return 0 if unary else []
    tokens = []
    pos = 0
    while pos < len(text):
        match = _WORD_TOKEN.match(text, pos)
        if not match:
            raise UsageError(f"cannot parse word {text!r} at position {pos}")
        sym, exp = match.group(1), match.group(2)
        if sym not in alphabet:
            raise UsageError(f"symbol {sym!r} not in alphabet {list(alphabet)}")
        count = int(exp) if exp is not None else 1
        if count > 2 ** 63 - 1:
            raise UsageError(f"exponent {count} exceeds 2^63 - 1")
        tokens.append((sym, count))
        pos = match.end()
    if unary:
        return sum(c for _, c in tokens)
    total = sum(c for _, c in tokens)
    if total > MAX_MATERIALIZED:
        raise UsageError(f"word of length {total} is too long for a non-unary automaton")
    return [s for s, c in tokens for _ in range(c)]


def _load(path: str):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read automaton {path}: {exc}") from None
    return serialization.from_dict(data), data.get("cut_point")


def _write_manifest(output: Path, subcommand: str, argv: list[str], params: dict,
                    outputs: list[str], seed: int | None, started: float) -> None:
    manifest = {
        "subcommand": subcommand,
        "argv": argv,
        "params": params,
        "rng_seed": seed,
        "version": __version__,
        "outputs": outputs,
        "duration_s": round(time.perf_counter() - started, 6),
    }
    Path(str(output) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_build(args, argv) -> int:
    started = time.perf_counter()
    family, params = args.family, args.params
    report: dict = {}
    cut = None
    try:
        if family == "grammar":
            if len(params) != 1:
                raise UsageError("grammar takes one file argument")
            automaton = grammar_to_nfa(parse_grammar(Path(params[0]).read_text()))
            stem = Path(params[0]).stem
        else:
            ints = [int(p) for p in params]
            expected = 2 if family == "lmn-pfa" else 1
            if len(ints) != expected:
                raise UsageError(f"{family} takes {expected} integer parameter(s)")
            stem = family + "-" + "-".join(params)
            if family == "lm-dfa":
                automaton = build_dfa_lm(ints[0])
            elif family == "ek-nfa":
                automaton = build_nfa_ek(ints[0])
            elif family == "lmn-pfa":
                automaton = build_pfa_lmn(*ints)
                cut = 0.75
                report["cut_point"] = cut
                report["isolation"] = 0.25
            else:
                automaton = build_qfa_a(ints[0])
                lam, rho = cut_point_for_a(ints[0])
                cut = lam
                report["lambda"] = _r9(lam)
                report["rho"] = _r9(rho)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    out = Path(args.output or f"{stem}.json")
    serialization.save(automaton, out, cut)
    report = {"file": str(out), "kind": serialization.to_dict(automaton)["kind"], "states": automaton.n, **report}
    if isinstance(automaton, ClassicalAutomaton) and automaton.state_names:
        report["accepting"] = [automaton.state_names[i] for i in np.flatnonzero(automaton.accepting)]
    _write_manifest(out, "build", argv, {"family": family, "params": params}, [str(out)], None, started)
    _emit(report)
    return EXIT_ACCEPT


def _probability(automaton, word) -> float:
    if isinstance(automaton, MeasureOnceQfa):
        return accept_prob(automaton, word)
    return accept_prob_pfa(automaton, word)


def cmd_accept(args, argv) -> int:
    automaton, stored_cut = _load(args.automaton)
    word = parse_word(args.word, automaton.alphabet)
    if isinstance(automaton, ClassicalAutomaton) and automaton.kind is not Kind.PFA:
        verdict = accept_dfa(automaton, word) if automaton.kind is Kind.DFA else accept_nfa(automaton, word)
        _emit({"accept": verdict})
        return EXIT_ACCEPT if verdict else EXIT_REJECT
    p = _probability(automaton, word)
    out = {"p": _r9(p)}
    cut = args.cut_point if args.cut_point is not None else stored_cut
    if args.cut_point is not None:
        out["accept"] = p > cut
    _emit(out)
    return EXIT_ACCEPT if p > (cut if cut is not None else 0.5) else EXIT_REJECT


def cmd_amplify(args, argv) -> int:
    if args.reps < 1 or args.reps % 2 == 0:
        raise UsageError(f"--reps must be a positive odd integer, got {args.reps}")
    automaton, _ = _load(args.automaton)
    if not isinstance(automaton, MeasureOnceQfa):
        raise UsageError("amplify needs a quantum automaton")
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    word = parse_word(args.word, automaton.alphabet)
    result = amplify_majority(automaton, word, args.reps, seed, args.cut_point)
    _emit({"repetitions": result.repetitions, "accept_votes": result.accept_votes,
           "vote_threshold": result.vote_threshold, "accept": result.verdict, "seed": seed})
    return EXIT_ACCEPT if result.verdict else EXIT_REJECT


def cmd_scan(args, argv) -> int:
    automaton, stored_cut = _load(args.automaton)
    cut = args.cut_point if args.cut_point is not None else stored_cut
    if cut is None:
        raise UsageError("no --cut-point given and the automaton records none")
    try:
        report = cut_point_scan(automaton, cut, args.horizon)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit({
        "cut_point": _r9(report.cut_point),
        "isolation": _r9(report.isolation),
        "horizon": report.horizon,
        "min_above": None if report.min_above is None else _r9(report.min_above),
        "max_below": None if report.max_below is None else _r9(report.max_below),
    })
    return EXIT_ACCEPT


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_simulate(args, argv) -> int:
    started = time.perf_counter()
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(63)
        argv = argv + ["--seed", str(seed)]
    if args.k_random is not None:
        count, low, high = args.k_random
        ks = random_word_lengths(count, low, high, seed)
    else:
        ks = tuple(args.k)
    try:
        cfg = PhotonExperimentConfig(args.m, args.mean, ks, args.reps, seed, Convention(args.convention))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            records = run_experiment(cfg)
            summary = experiment_summary(cfg, records)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "experiment.csv"
    summary_path = out_dir / "summary.json"
    csv_path.write_text(records_to_csv(records))
    summary_path.write_text(summary_to_json(summary))
    params = {"m": cfg.m, "mean_counts": cfg.mean_counts, "word_lengths": list(cfg.word_lengths),
              "repetitions": cfg.repetitions, "convention": cfg.convention.value}
    _write_manifest(out_dir / "experiment", "simulate", argv, params,
                    [str(csv_path), str(summary_path)], seed, started)
    _emit({"n_th": summary["n_th"], "p_err": summary["p_err_analytic"],
           "p_err_empirical": summary["p_err_empirical"], "convention": summary["convention"],
           "records": len(records), "seed": seed, "csv": str(csv_path), "summary": str(summary_path)})
    return EXIT_ACCEPT


def error_curve_rows(ms, means, convention: Convention) -> str:
    lines = ["m,mean_counts,n_th,p_err,convention,error"]
    for m in ms:
        for mean in means:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    model = error_probability(m, mean, convention)
                lines.append(f"{m},{fmt(mean)},{fmt(model.n_th)},{fmt(model.p_err)},{convention.value},")
            except ValueError as exc:
                lines.append(f"{m},{fmt(mean)},,,{convention.value},{str(exc).replace(',', ';')}")
    return "\n".join(lines) + "\n"


def cmd_error_curve(args, argv) -> int:
    started = time.perf_counter()
    if args.mean_log is not None:
        low, high, num = args.mean_log
        if not 0 < low <= high or int(num) < 1:
            raise UsageError("--mean-log needs 0 < LOW <= HIGH and NUM >= 1")
        means = np.logspace(np.log10(low), np.log10(high), int(num)).tolist()
    else:
        means = args.mean
    if not args.m or not means:
        raise UsageError("both grids must be non-empty")
    text = error_curve_rows(args.m, means, Convention(args.convention))
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        _write_manifest(out, "error-curve", argv,
                        {"m": args.m, "mean_counts": means, "convention": args.convention},
                        [str(out)], None, started)
    else:
        sys.stdout.write(text)
    return EXIT_ACCEPT


def cmd_rerun(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
        replay = manifest["argv"]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read manifest {args.manifest}: {exc}") from None
    return main(replay)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photonqfa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a named automaton and write it as JSON")
    p.add_argument("family", choices=["lm-dfa", "lm-qfa", "ek-nfa", "lmn-pfa", "grammar"])
    p.add_argument("params", nargs="+")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("accept", help="evaluate a word")
    p.add_argument("automaton")
    p.add_argument("word", help="a^k shorthand, literal symbols, or eps")
    p.add_argument("--cut-point", type=float)
    p.set_defaults(func=cmd_accept)

    p = sub.add_parser("amplify", help="majority vote over repeated measure-once runs")
    p.add_argument("automaton")
    p.add_argument("word")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--cut-point", type=float, default=0.5,
                   help="accept iff more than this fraction of trials accept (default 0.5)")
    p.set_defaults(func=cmd_amplify)

    p = sub.add_parser("scan", help="empirical cut-point isolation over a^0..a^horizon")
    p.add_argument("automaton")
    p.add_argument("--cut-point", type=float)
    p.add_argument("--horizon", type=int, default=100)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="Monte Carlo photon-counting experiment")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--mean", type=float, required=True, help="<N_c>")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=_int_list)
    group.add_argument("--k-random", type=int, nargs=3, metavar=("COUNT", "LOW", "HIGH"))
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--convention", choices=[c.value for c in Convention], default="mean")
    p.add_argument("--out", default="simulation")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("error-curve", help="analytic error probability over (m, <N_c>) grids")
    p.add_argument("-m", type=_int_list, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--mean", type=_float_list)
    group.add_argument("--mean-log", type=float, nargs=3, metavar=("LOW", "HIGH", "NUM"))
    p.add_argument("--convention", choices=[c.value for c in Convention], default="mean")
    p.add_argument("--out")
    p.set_defaults(func=cmd_error_curve)

    p = sub.add_parser("rerun", help="replay a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except (UsageError, ValueError, TypeError, OSError) as exc:
        print(f"photonqfa {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
