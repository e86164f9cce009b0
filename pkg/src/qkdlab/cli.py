"""Command-line front end: parameter sweeps written as CSV or JSON tables.

Every table starts with ``#`` metadata lines (tool version, subcommand,
parameters, seed). Diagnostics go to stderr. Without ``--output`` a table
goes to stdout, or to ``$QKDLAB_OUTPUT_DIR/<subcommand>.<format>`` when
that variable is set.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .attacks import bound_curve, ehpp_attack, weak_measure, weak_swap
from .binary_info import TwoStateSource
from .codes import (
    ParityCode,
    exact_total_info,
    hamming_code,
    leading_exponent,
    security_bound,
    sum_bound,
)
from .error_reduction import BoundedNoise, RurCode, monte_carlo_remainder, remainder_sweep
from .parity import (
    ParityModel,
    asymptotic_bound,
    coherent_info,
    deterministic_info,
    individual_info,
)
from .protocol import (
    InterceptResend,
    ProbeChannel,
    SessionConfig,
    run_sessions,
)

OUTPUT_DIR_ENV = "QKDLAB_OUTPUT_DIR"
log = logging.getLogger("qkdlab")


class UsageError(Exception):
    pass


def parse_sweep(text: str) -> list[float]:
    """Parse a value list.

    Accepted forms: ``"0.1"``, ``"0.1,0.2"``, ``"start:stop:steps"`` (linear,
    inclusive) and ``"log:start:stop:steps"`` (geometric, inclusive).
    """
    text = text.strip()
    try:
        if text.startswith("log:"):
            start, stop, steps = text[4:].split(":")
            if float(start) <= 0 or float(stop) <= 0:
                raise UsageError("geometric sweeps need positive endpoints")
            return [float(v) for v in np.geomspace(float(start), float(stop), int(steps))]
        if ":" in text:
            start, stop, steps = text.split(":")
            if int(steps) < 1:
                raise UsageError("a sweep needs at least one step")
            return [float(v) for v in np.linspace(float(start), float(stop), int(steps))]
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad sweep {text!r}") from exc


def parse_int_sweep(text: str) -> list[int]:
    vals = parse_sweep(text)
    out = [int(round(v)) for v in vals]
    if any(abs(v - o) > 1e-9 for v, o in zip(vals, out)):
        raise UsageError(f"integer values expected in {text!r}")
    return out


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render(
    subcommand: str,
    params: dict,
    seed: int | None,
    columns: list[str],
    rows: list[list],
    out_format: str,
    footer: list[str] = (),
) -> str:
    meta = {"tool": f"qkdlab {__version__}", "subcommand": subcommand,
            "params": params, "seed": seed}
    if out_format == "json":
        body = {"meta": meta, "columns": columns,
                "rows": [[_json_value(v) for v in r] for r in rows],
                "notes": list(footer)}
        return json.dumps(body, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# tool: qkdlab {__version__}\n")
    buf.write(f"# subcommand: {subcommand}\n")
    buf.write(f"# params: {json.dumps(params, sort_keys=True)}\n")
    buf.write(f"# seed: {seed}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(fmt(v) for v in r) + "\n")
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def emit(text: str, args: argparse.Namespace) -> None:
    target = args.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.{args.format}"
    if target is None or str(target) == "-":
        sys.stdout.write(text)
        return
    path = Path(target)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def _angle(args: argparse.Namespace, v: float) -> float:
    return math.radians(v) if args.degrees else v


def _angles(args: argparse.Namespace, vals: list[float]) -> list[float]:
    return [_angle(args, v) for v in vals]


def cmd_parity_info(args: argparse.Namespace) -> tuple:
    ns = parse_int_sweep(args.n)
    alphas = _angles(args, parse_sweep(args.alpha))
    if any(n < 1 for n in ns):
        raise UsageError("n must be positive")
    if args.mix and args.mode == "deterministic":
        raise UsageError("deterministic information is defined for pure sources only")
    wanted = {
        "coherent": ["I_M"], "individual": ["I_S"],
        "deterministic": ["I_D"], "all": ["I_M", "I_S", "I_D", "bound"],
    }[args.mode]
    rows = []
    for n in ns:
        for a in alphas:
            try:
                model = ParityModel(n, TwoStateSource(a, args.mix))
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            vals = {
                "I_M": lambda: coherent_info(model),
                "I_S": lambda: individual_info(model),
                "I_D": lambda: deterministic_info(model) if model.source.is_pure else float("nan"),
                "bound": lambda: asymptotic_bound(model),
            }
            rows.append([n, a, args.mix] + [vals[c]() for c in wanted])
    params = {"n": args.n, "alpha": args.alpha, "mode": args.mode, "mix": args.mix,
              "degrees": args.degrees}
    return params, None, ["n", "alpha", "r_mix"] + wanted, rows, []


def load_code(text: str) -> ParityCode:
    if text.startswith("hamming:"):
        try:
            return hamming_code(int(text.split(":", 1)[1]))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    path = Path(text)
    if not path.exists():
        raise UsageError(f"code file {text!r} not found")
    try:
        return ParityCode.load(path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"invalid code file {text!r}: {exc}") from exc


def cmd_ecc_info(args: argparse.Namespace) -> tuple:
    code = load_code(args.code)
    alphas = _angles(args, parse_sweep(args.alpha))
    if any(not 0 <= a <= math.pi / 4 for a in alphas):
        raise UsageError("alpha must lie in [0, pi/4]")
    e = leading_exponent(code)
    rows = []
    for a in alphas:
        total = exact_total_info(code, a) if a > 0 else 0.0
        rows.append([
            a, total, sum_bound(code, a, "exact"), sum_bound(code, a, "leading"),
            security_bound(code.n, a), total / a**e if a > 0 else float("nan"), e,
        ])
    params = {"code": args.code, "code_data": code.to_dict(), "alpha": args.alpha,
              "degrees": args.degrees}
    cols = ["alpha", "I_total", "I_sum_exact", "I_sum_leading", "security_bound",
            "coefficient", "exponent"]
    return params, None, cols, rows, []


def cmd_attack_curve(args: argparse.Namespace) -> tuple:
    ns = parse_int_sweep(args.n)
    pes = parse_sweep(args.pe)
    theta = _angle(args, args.theta) if args.theta is not None else None
    rows = []
    for n in ns:
        try:
            curve = bound_curve(args.attack, args.scheme, n, pes, theta)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rows.extend([n, p, curve[p]] for p in pes)
    params = {"scheme": args.scheme, "attack": args.attack, "n": args.n, "pe": args.pe,
              "theta": args.theta, "degrees": args.degrees}
    return params, None, ["n", "p_e", "bound"], rows, []


def parse_eve(text: str, args: argparse.Namespace, theta: float | None) -> list[tuple[str, object]]:
    """Expand an eavesdropper description into (param label, model) pairs."""
    if text == "none":
        return [("none", None)]
    kind, _, rest = text.partition(":")
    basis = "x"
    if kind == "weak-measure" and rest.endswith((":x", ":y")):
        rest, basis = rest.rsplit(":", 1)
    if not rest:
        raise UsageError(f"eavesdropper {kind!r} needs a parameter")
    vals = parse_sweep(rest)
    out = []
    try:
        for v in vals:
            if kind == "intercept":
                model = InterceptResend(v)
            elif kind == "weak-swap":
                model = ProbeChannel(weak_swap(_angle(args, v)))
            elif kind == "weak-measure":
                model = ProbeChannel(weak_measure(_angle(args, v), basis))
            elif kind == "ehpp":
                if theta is None:
                    raise UsageError("ehpp needs --theta")
                model = ProbeChannel(ehpp_attack(theta, _angle(args, v)))
            else:
                raise UsageError(f"unknown eavesdropper {kind!r}")
            out.append((f"{kind}:{fmt(v)}", model))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return out


def cmd_protocol_sim(args: argparse.Namespace) -> tuple:
    theta = _angle(args, args.theta) if args.theta is not None else None
    eves = parse_eve(args.eve, args, theta)
    seeds = [int(s.generate_state(1, dtype=np.uint64)[0])
             for s in np.random.SeedSequence(args.seed).spawn(args.sessions)]
    configs, labels = [], []
    try:
        for label, model in eves:
            for seed in seeds:
                configs.append(SessionConfig(
                    scheme=args.scheme, qubits=args.qubits, theta=theta, eve=model,
                    noise=args.noise, chi=_angle(args, args.chi),
                    estimation_fraction=args.estimation_fraction, seed=seed,
                    bases=args.bases, mode=args.mode, rur_n=args.rur_n,
                ))
                labels.append(label)
        transcripts = run_sessions(configs, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out_dir = args.out_dir or os.environ.get(OUTPUT_DIR_ENV)
    rows = []
    for i, (label, tr) in enumerate(zip(labels, transcripts)):
        s = tr.summary()
        if out_dir and not args.no_transcript:
            tr.write(out_dir, stem=f"{args.scheme}_{i:03d}")
        rows.append([args.scheme, label, s["observed_error_rate"], s["sift_fraction"],
                     s["final_key_len"], s["eve_info_bound"]])
        log.info("session %d (%s): sifted=%d observed p_e=%.5f", i, label,
                 s["sifted"], s["observed_error_rate"])
    params = {k: v for k, v in vars(args).items()
              if k not in ("func", "output", "format", "command", "workers", "out_dir",
                           "verbose", "no_transcript")}
    cols = ["scheme", "param", "p_e_observed", "sift_fraction", "key_len", "eve_bound"]
    return params, args.seed, cols, rows, []


def cmd_qec_sim(args: argparse.Namespace) -> tuple:
    kind, _, n = args.code.partition(":")
    if kind != "rur" or not n.isdigit():
        raise UsageError("code text must look like rur:2")
    try:
        code = RurCode(int(n))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    chis = _angles(args, parse_sweep(args.chi))
    if any(c < 0 for c in chis):
        raise UsageError("chi must be non-negative")
    fit_ok = args.trials >= 10_000 and sum(c > 0 for c in chis) >= 2
    sweep = remainder_sweep(code, chis, args.trials, seed=args.seed, workers=args.workers,
                            min_trials=1) if fit_ok else None
    if sweep is None:
        log.warning("fits skipped: need >= 10000 trials and two positive chi values")
        ests = [monte_carlo_remainder(code, BoundedNoise(c), args.trials, seed=args.seed,
                                      workers=args.workers) for c in chis]
    else:
        ests = list(sweep.estimates)
    rows = [[e.chi, e.trials, e.P_hat, e.Q_hat, e.P_stderr, e.Q_stderr] for e in ests]
    footer = []
    if sweep is not None:
        footer = [f"fit P_exponent={fmt(sweep.p_exponent)}",
                  f"fit one_minus_Q_exponent={fmt(sweep.q_exponent)}"]
    params = {"code": args.code, "chi": args.chi, "trials": args.trials, "degrees": args.degrees}
    cols = ["chi", "trials", "P_hat", "Q_hat", "P_stderr", "Q_stderr"]
    return params, args.seed, cols, rows, footer


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qkdlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qkdlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--output", "-o", default=None, help="output file ('-' for stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--degrees", action="store_true", help="angles given in degrees")
        sp.add_argument("--verbose", "-v", action="store_true")

    sp = sub.add_parser("parity-info", help="information on the parity of n bits")
    sp.add_argument("--n", required=True, help="string length(s), sweep grammar")
    sp.add_argument("--alpha", required=True, help="signal half-angle(s), sweep grammar")
    sp.add_argument("--mode", choices=("coherent", "individual", "deterministic", "all"),
                    default="all")
    sp.add_argument("--mix", type=float, default=0.0, help="off-diagonal reduction r_mix")
    common(sp)
    sp.set_defaults(func=cmd_parity_info)

    sp = sub.add_parser("ecc-info", help="target-parity information given a parity code")
    sp.add_argument("--code", required=True, help="hamming:r or a JSON code file")
    sp.add_argument("--alpha", required=True)
    common(sp)
    sp.set_defaults(func=cmd_ecc_info)

    sp = sub.add_parser("attack-curve", help="information bound versus error rate")
    sp.add_argument("--scheme", choices=("four-state", "two-state"), required=True)
    sp.add_argument("--attack", choices=("weak-swap", "weak-measure", "ehpp"), required=True)
    sp.add_argument("--n", required=True)
    sp.add_argument("--pe", required=True, help="error rates, sweep grammar")
    sp.add_argument("--theta", type=float, default=None)
    common(sp)
    sp.set_defaults(func=cmd_attack_curve)

    sp = sub.add_parser("protocol-sim", help="Monte Carlo QKD sessions")
    sp.add_argument("--scheme", choices=("bb84", "b92", "epr", "reversed-epr", "qec"),
                    required=True)
    sp.add_argument("--qubits", type=int, default=100_000)
    sp.add_argument("--eve", default="none",
                    help="none | intercept:ETA | weak-swap:GAMMA | weak-measure:GAMMA[:x|y] "
                         "| ehpp:THETA_PRIME (parameters accept the sweep grammar)")
    sp.add_argument("--theta", type=float, default=None)
    sp.add_argument("--noise", type=float, default=0.0)
    sp.add_argument("--chi", type=float, default=0.0)
    sp.add_argument("--bases", choices=("zx", "xy"), default="zx")
    sp.add_argument("--mode", choices=("singlet_only", "bell_operator"), default="bell_operator")
    sp.add_argument("--rur-n", type=int, default=2)
    sp.add_argument("--estimation-fraction", type=float, default=0.25)
    sp.add_argument("--sessions", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out-dir", default=None, help="directory for transcript files")
    sp.add_argument("--no-transcript", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_protocol_sim)

    sp = sub.add_parser("qec-sim", help="remainder error of the quantum repetition code")
    sp.add_argument("--code", default="rur:2")
    sp.add_argument("--chi", required=True)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_qec_sim)
    return p


COMMANDS: dict[str, Callable] = {
    "parity-info": cmd_parity_info,
    "ecc-info": cmd_ecc_info,
    "attack-curve": cmd_attack_curve,
    "protocol-sim": cmd_protocol_sim,
    "qec-sim": cmd_qec_sim,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.handlers = [handler]
    log.propagate = False
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        params, seed, cols, rows, footer = args.func(args)
    except (UsageError, MemoryError) as exc:
        parser.exit(2, f"qkdlab {args.command}: error: {exc}\n")
    emit(render(args.command, params, seed, cols, rows, args.format, footer), args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
