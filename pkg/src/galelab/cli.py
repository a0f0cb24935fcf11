"""Command-line front end.

Subcommands wire the library together: sequence generation, gambler
construction and combination, simulation to trajectory CSVs, structural
verification, and the sweep / instability / dimension reports.  Every
run echoes a reproducibility line (the fully resolved configuration,
seeds included) and embeds it in whatever artifact it writes, so
re-running a printed configuration regenerates the artifact byte for
byte.

Exit codes: 0 success, 1 validation failure, 2 I/O error, 64 usage.
Flag values win over ``--config`` file entries, which win over built-in
defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import analysis, constructions, core, engine, sequences

__all__ = ["main", "console_main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _IOError(Exception):
    pass


class _ValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# option resolution
# ---------------------------------------------------------------------------

def _load_config(path) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _IOError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise _IOError(f"config {path} is not a JSON object")
    return doc


def _resolve(args, cfg: dict, name: str, default=None, required: bool = False):
    value = getattr(args, name, None)
    if value is None:
        value = cfg.get(name, default)
    if value is None and required:
        raise _UsageError(f"missing required option --{name.replace('_', '-')}")
    return value


def _fraction(text, what: str) -> Fraction:
    try:
        return core.parse_rational(str(text))
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise _UsageError(f"bad rational for {what}: {text!r}") from exc


def _echo(config: dict) -> None:
    print("# config " + json.dumps(config, sort_keys=True))


def _check_out(path) -> None:
    """Validate an output path before any computation starts."""
    parent = os.path.dirname(os.path.abspath(str(path))) or "."
    if not os.path.isdir(parent):
        raise _IOError(f"output directory does not exist: {parent}")


# ---------------------------------------------------------------------------
# artifact loading
# ---------------------------------------------------------------------------

def _load_sequence(path) -> sequences.FileSource:
    try:
        return sequences.read_sequence(path)
    except OSError as exc:
        raise _IOError(f"cannot read sequence {path}: {exc}") from exc
    except ValueError as exc:
        raise _IOError(str(exc)) from exc


def _kv_params(ref: str) -> dict:
    params = {}
    for part in ref.split(",") if ref else []:
        key, _, value = part.partition("=")
        params[key.strip()] = value.strip()
    return params


def _resolve_gambler(ref: str) -> core.GamblerSpec:
    """A gambler file path, or a builder shorthand like ``parity:h=2``."""
    kind, sep, rest = ref.partition(":")
    if sep or kind in ("uniform", "allin"):
        params = _kv_params(rest)
        try:
            if kind == "parity":
                return constructions.build_parity_gambler(int(params["h"]))
            if kind == "fprime":
                return constructions.build_variant_gambler(int(params["h"]), "Fprime")
            if kind == "fdoubleprime":
                return constructions.build_variant_gambler(
                    int(params["h"]), "Fdoubleprime")
            if kind == "uniform":
                return constructions.uniform_gambler(int(params.get("k", 2)))
            if kind == "allin":
                return constructions.single_minded_gambler(
                    int(params.get("sym", 0)), int(params.get("k", 2)))
        except (KeyError, ValueError) as exc:
            raise _UsageError(f"bad gambler shorthand {ref!r}: {exc}") from exc
        raise _UsageError(f"unknown gambler shorthand {ref!r}")
    try:
        spec = core.load_gambler(ref)
    except OSError as exc:
        raise _IOError(f"cannot read gambler {ref}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise _IOError(f"malformed gambler file {ref}: {exc}") from exc
    report = core.validate_gambler(spec)
    if not report.ok:
        detail = "; ".join(str(v) for v in report)
        raise _ValidationError(f"invalid gambler {ref}: {detail}")
    return spec


def _require_valid(spec: core.GamblerSpec, what: str) -> None:
    report = core.validate_gambler(spec)
    if not report.ok:
        detail = "; ".join(str(v) for v in report)
        raise _ValidationError(f"{what} failed validation: {detail}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_gen_seq(args) -> int:
    cfg = _load_config(args.config)
    variant = _resolve(args, cfg, "variant", "F")
    seed = int(_resolve(args, cfg, "seed", required=True))
    n = int(_resolve(args, cfg, "n", required=True))
    out = _resolve(args, cfg, "out", required=True)
    _check_out(out)
    if variant == "raw":
        src = sequences.prng_source(seed)
        h = None
    else:
        h = int(_resolve(args, cfg, "h", required=True))
        src = sequences.f_family(h, variant, sequences.prng_source(seed))
    config = {"command": "gen-seq", "variant": variant, "h": h,
              "seed": seed, "n": n, "out": str(out)}
    _echo(config)
    try:
        sequences.write_sequence(src, n, out)
    except OSError as exc:
        raise _IOError(f"cannot write {out}: {exc}") from exc
    print(f"wrote {n} symbols of {src.describe()} to {out}")
    return EXIT_OK


def _cmd_build_gambler(args) -> int:
    cfg = _load_config(args.config)
    kind = _resolve(args, cfg, "kind", required=True)
    out = _resolve(args, cfg, "out", required=True)
    _check_out(out)
    config = {"command": "build-gambler", "kind": kind, "out": str(out)}
    if kind == "uniform":
        spec = constructions.uniform_gambler()
    elif kind == "allin":
        symbol = int(_resolve(args, cfg, "symbol", 0))
        spec = constructions.single_minded_gambler(symbol)
        config["symbol"] = symbol
    else:
        h = int(_resolve(args, cfg, "h", required=True))
        config["h"] = h
        if kind == "parity":
            spec = constructions.build_parity_gambler(h)
        elif kind == "fprime":
            spec = constructions.build_variant_gambler(h, "Fprime")
        elif kind == "fdoubleprime":
            spec = constructions.build_variant_gambler(h, "Fdoubleprime")
        else:
            raise _UsageError(f"unknown gambler kind {kind!r}")
    _require_valid(spec, f"built gambler {spec.label()}")
    _echo(config)
    try:
        core.save_gambler(spec, out, config=config)
    except OSError as exc:
        raise _IOError(f"cannot write {out}: {exc}") from exc
    print(f"wrote {spec.label()} ({spec.head_count} heads) to {out}")
    return EXIT_OK


def _cmd_combine(args) -> int:
    cfg = _load_config(args.config)
    g1_path = _resolve(args, cfg, "g1", required=True)
    g2_path = _resolve(args, cfg, "g2", required=True)
    eps = _fraction(_resolve(args, cfg, "epsilon", required=True), "--epsilon")
    out = _resolve(args, cfg, "out", required=True)
    _check_out(out)
    g1 = _resolve_gambler(str(g1_path))
    g2 = _resolve_gambler(str(g2_path))
    try:
        combined = constructions.average_gamblers(g1, g2, eps)
    except ValueError as exc:
        raise _ValidationError(str(exc)) from exc
    _require_valid(combined, "combined gambler")
    config = {"command": "combine", "g1": str(g1_path), "g2": str(g2_path),
              "epsilon": str(eps), "out": str(out)}
    _echo(config)
    try:
        core.save_gambler(combined, out, config=config)
    except OSError as exc:
        raise _IOError(f"cannot write {out}: {exc}") from exc
    print(f"wrote {combined.label()} ({combined.head_count} heads) to {out}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    gambler_ref = _resolve(args, cfg, "gambler", required=True)
    seq_path = _resolve(args, cfg, "seq", required=True)
    mode = _resolve(args, cfg, "mode", "log2")
    out = _resolve(args, cfg, "out", required=True)
    _check_out(out)
    sgales = _resolve(args, cfg, "sgale", []) or []
    spec = _resolve_gambler(str(gambler_ref))
    src = _load_sequence(seq_path)
    n = int(_resolve(args, cfg, "n", src.length))
    if n > src.length:
        raise _ValidationError(
            f"sequence {seq_path} holds {src.length} symbols, cannot simulate {n}")
    s_values = [(str(s), _fraction(s, "--sgale")) for s in sgales]
    config = {"command": "simulate", "gambler": str(gambler_ref),
              "seq": str(seq_path), "n": n, "mode": mode,
              "sgale": [str(s) for s in sgales], "out": str(out)}
    _echo(config)
    trace = engine.run_martingale(spec, src, n, mode=mode)
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            engine.write_trajectory_csv(trace, fh, s_values, config=config)
    except OSError as exc:
        raise _IOError(f"cannot write {out}: {exc}") from exc
    final = trace.final_capital.log2()
    print(f"final log2 capital after {n} steps: "
          f"{'-inf' if final == core.BANKRUPT_LOG2 else final}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    check = _resolve(args, cfg, "check", required=True)
    config = {"command": "verify", "check": check}

    if check in ("spec", "martingale", "speeds"):
        gambler_ref = _resolve(args, cfg, "gambler", required=True)
        spec = _resolve_gambler(str(gambler_ref))
        config["gambler"] = str(gambler_ref)
        if check == "spec":
            _echo(config)
            report = core.validate_gambler(spec)
            if not report.ok:
                for v in report:
                    print(f"violation {v}")
                return EXIT_VALIDATION
            print("gambler is structurally valid")
            return EXIT_OK
        if check == "martingale":
            depth = int(_resolve(args, cfg, "depth", 10))
            config["depth"] = depth
            _echo(config)
            if not engine.check_martingale_property(spec, depth):
                print(f"fair-betting identity violated below depth {depth}")
                return EXIT_VALIDATION
            print(f"fair-betting identity holds to depth {depth}")
            return EXIT_OK
        n_max = int(_resolve(args, cfg, "n_max", 100_000))
        config["n_max"] = n_max
        _echo(config)
        if not engine.check_speed_bounds(spec, n_max):
            print(f"head positions stray beyond the bound before n={n_max}")
            return EXIT_VALIDATION
        print(f"head positions stay within the bound for all n <= {n_max}")
        return EXIT_OK

    if check == "parity":
        h = int(_resolve(args, cfg, "h", required=True))
        variant = _resolve(args, cfg, "variant", "F")
        n = int(_resolve(args, cfg, "n", 10_000))
        seed = int(_resolve(args, cfg, "seed", 1))
        src = sequences.f_family(h, variant, sequences.prng_source(seed))
        config.update({"h": h, "variant": variant, "n": n, "seed": seed})
        _echo(config)
        result = sequences.verify_parity_structure(h, src, n)
        if not result.ok:
            print(f"parity structure violated at block q={result.first_violation}")
            return EXIT_VALIDATION
        print(f"parity structure verified on {src.describe()} up to index {n}")
        return EXIT_OK

    raise _UsageError(f"unknown check {check!r}")


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    h = int(_resolve(args, cfg, "h", required=True))
    n = int(_resolve(args, cfg, "n", required=True))
    out = _resolve(args, cfg, "out", required=True)
    _check_out(out)
    seq_path = _resolve(args, cfg, "seq")
    if seq_path:
        src = _load_sequence(seq_path)
    else:
        seq_seed = int(_resolve(args, cfg, "seq_seed", 1))
        variant = _resolve(args, cfg, "seq_variant", "F")
        src = sequences.f_family(h, variant, sequences.prng_source(seq_seed))
    budget = analysis.SweepBudget(
        max_t=int(_resolve(args, cfg, "max_t", 4)),
        max_q=int(_resolve(args, cfg, "max_q", 6)),
        bet_denominator_max=int(_resolve(args, cfg, "bet_denom", 8)),
        samples=int(_resolve(args, cfg, "samples", 500)),
        seed=int(_resolve(args, cfg, "rng_seed", 0)),
    )
    include_refs = _resolve(args, cfg, "include", []) or []
    include = [_resolve_gambler(str(ref)) for ref in include_refs]
    config = {"command": "sweep", "h": h, "n": n, "seq": src.describe(),
              "budget": budget.to_obj(), "include": [str(r) for r in include_refs],
              "out": str(out)}
    _echo(config)
    report = analysis.adversarial_sweep(h, src, n, budget, include=include)
    try:
        analysis.write_jsonl(out, report.to_objs())
    except OSError as exc:
        raise _IOError(f"cannot write {out}: {exc}") from exc
    print(f"max sampled exponent: "
          f"{analysis.encode_float(report.max_sampled_exponent)} "
          f"(best overall: {report.best_overall_id})")
    return EXIT_OK


def _cmd_instability(args) -> int:
    cfg = _load_config(args.config)
    h = int(_resolve(args, cfg, "h", required=True))
    seed = int(_resolve(args, cfg, "seed", required=True))
    n = int(_resolve(args, cfg, "n", required=True))
    eps = _fraction(_resolve(args, cfg, "epsilon", "1/10"), "--epsilon")
    out = _resolve(args, cfg, "out", required=True)
    _check_out(out)
    config = {"command": "instability", "h": h, "seed": seed, "n": n,
              "epsilon": str(eps), "out": str(out)}
    _echo(config)
    report = analysis.instability_experiment(h, seed, n, eps)
    try:
        analysis.write_jsonl(out, report.to_objs())
    except OSError as exc:
        raise _IOError(f"cannot write {out}: {exc}") from exc
    for tag in ("fprime", "fdoubleprime"):
        row = report.matrix[tag]
        print(f"{tag}: X={analysis.encode_float(row['X'])} "
              f"Z={analysis.encode_float(row['Z'])}")
    print(f"averaged: X={analysis.encode_float(report.averaged['X'])} "
          f"Z={analysis.encode_float(report.averaged['Z'])}")
    return EXIT_OK


def _cmd_estimate_dim(args) -> int:
    cfg = _load_config(args.config)
    seq_path = _resolve(args, cfg, "seq", required=True)
    gambler_refs = _resolve(args, cfg, "gambler", []) or []
    if not gambler_refs:
        raise _UsageError("estimate-dim needs at least one --gambler")
    out = _resolve(args, cfg, "out", required=True)
    _check_out(out)
    src = _load_sequence(seq_path)
    n = int(_resolve(args, cfg, "n", src.length))
    gamblers = [_resolve_gambler(str(ref)) for ref in gambler_refs]
    config = {"command": "estimate-dim", "seq": str(seq_path), "n": n,
              "gambler": [str(r) for r in gambler_refs], "out": str(out)}
    _echo(config)
    report = analysis.estimate_predim_upper(src, gamblers, n)
    try:
        analysis.write_jsonl(out, report.to_objs())
    except OSError as exc:
        raise _IOError(f"cannot write {out}: {exc}") from exc
    print(f"aggregate upper bound: {report.aggregate}")
    return EXIT_OK


def _cmd_report(args) -> int:
    path = args.infile
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
    except OSError as exc:
        raise _IOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _IOError(f"malformed report {path}: {exc}") from exc
    runs = [obj for obj in lines if obj.get("type") == "run"]
    for obj in lines:
        if obj.get("type") == "config":
            print("config: " + json.dumps(obj, sort_keys=True))
    print(f"{len(runs)} runs")
    for obj in runs:
        print(f"  {obj.get('gambler_id')} on {obj.get('seq_id')}: "
              f"exponent={obj.get('exponent')} "
              f"final log2 capital={obj.get('log2_capital_final')}")
    for obj in lines:
        if obj.get("type") == "summary":
            print("summary: " + json.dumps(obj, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="galelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("gen-seq", help="generate a sequence file")
    p.add_argument("--variant", choices=("F", "Fprime", "Fdoubleprime", "raw"))
    p.add_argument("--h", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_gen_seq)

    p = sub.add_parser("build-gambler", help="build and save a gambler")
    p.add_argument("--kind",
                   choices=("parity", "fprime", "fdoubleprime", "uniform", "allin"))
    p.add_argument("--h", type=int)
    p.add_argument("--symbol", type=int)
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_build_gambler)

    p = sub.add_parser("combine", help="average two gamblers into one")
    p.add_argument("--g1")
    p.add_argument("--g2")
    p.add_argument("--epsilon")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_combine)

    p = sub.add_parser("simulate", help="run a gambler over a sequence file")
    p.add_argument("--gambler")
    p.add_argument("--seq")
    p.add_argument("--n", type=int)
    p.add_argument("--mode", choices=("log2", "exact"))
    p.add_argument("--sgale", action="append")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="structural and cross checks")
    p.add_argument("--check", choices=("spec", "martingale", "speeds", "parity"))
    p.add_argument("--gambler")
    p.add_argument("--depth", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--variant", choices=("F", "Fprime", "Fdoubleprime"))
    p.add_argument("--h", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="sample random gamblers against a sequence")
    p.add_argument("--h", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seq")
    p.add_argument("--seq-seed", dest="seq_seed", type=int)
    p.add_argument("--seq-variant", dest="seq_variant",
                   choices=("F", "Fprime", "Fdoubleprime"))
    p.add_argument("--samples", type=int)
    p.add_argument("--max-t", dest="max_t", type=int)
    p.add_argument("--max-q", dest="max_q", type=int)
    p.add_argument("--bet-denom", dest="bet_denom", type=int)
    p.add_argument("--rng-seed", dest="rng_seed", type=int)
    p.add_argument("--include", action="append")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("instability", help="variant winners across both variants")
    p.add_argument("--h", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--epsilon")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_instability)

    p = sub.add_parser("estimate-dim", help="witness-based dimension upper bound")
    p.add_argument("--seq")
    p.add_argument("--gambler", action="append")
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_estimate_dim)

    p = sub.add_parser("report", help="summarize a JSON-lines report")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except _ValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _IOError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except sequences.SourceExhausted as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
