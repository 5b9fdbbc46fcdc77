"""Batch front end: run sessions, sweep parameters, run attack demos.

Everything is seeded and emits JSON or CSV deterministically, so identical
invocations produce identical bytes. Exit codes: 0 success, 2 usage error,
3 reservoir exhaustion.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass

from .analysis import (
    SecurityBudget,
    asymptotic_rate_6state,
    diamond_bound,
    min_q_bits,
    p_corr,
    required_redundancy,
)
from .attacks import intercept_resend_report, tamper_fuzz
from .ecc import CodeKind
from .primitives import Encoding, ProtocolParams
from .protocol import ReservoirExhausted, run_session
from .qsim import ChannelKind, ChannelModel

__all__ = ["main", "build_parser", "resolve_params", "resolve_budget", "SweepSpec"]

EXIT_USAGE = 2
EXIT_RESERVOIR = 3

DEFAULTS = {
    "n": 1024,
    "ell": None,
    "kappa": None,
    "lambda": 64,
    "beta": 0.125,
    "gamma": 0.0,
    "eta": 0.0,
    "alpha": 64,
    "q_bits": None,
    "encoding": "six-state",
    "code": "oracle",
    "rounds": 100,
    "seed": 0,
    "out": None,
}

_FALLBACK_TAGS = (64, 8)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int
    budget: SecurityBudget

    def __post_init__(self):
        if self.variable not in ("gamma", "n", "q_bits"):
            raise UsageError(f"variable must be gamma, n or q_bits, got {self.variable!r}")
        if self.steps < 2:
            raise UsageError("steps must be at least 2")


def _merged(ns: argparse.Namespace) -> tuple[dict, set]:
    """Layer resolution: built-in defaults, then the config file, then flags.
    Also reports which keys the user set explicitly."""
    values = dict(DEFAULTS)
    explicit = set()
    config_path = getattr(ns, "config", None)
    if config_path:
        try:
            with open(config_path) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"config: cannot read {config_path}: {exc}") from exc
        for key, value in config.items():
            if key not in values:
                raise UsageError(f"config: unknown field {key!r}")
            values[key] = value
            explicit.add(key)
    for key in values:
        flag = getattr(ns, key.replace("-", "_"), None)
        if flag is not None:
            values[key] = flag
            explicit.add(key)
    return values, explicit


def _default_kappa(n: int, alpha: float) -> int:
    return math.ceil(2.0 * (alpha + 15.0 * math.log2(n + 1)))


def resolve_params(values: dict, explicit: set = frozenset()) -> tuple[ProtocolParams, CodeKind]:
    """Fill in ell, kappa, q_bits and (when not explicitly set) the tag
    length from the structural constraints of the chosen code."""
    encoding = Encoding.parse(values["encoding"])
    code_kind = CodeKind.parse(values["code"])
    n = int(values["n"])
    gamma = float(values["gamma"])
    alpha = float(values["alpha"])

    ell, kappa = values["ell"], values["kappa"]
    if ell is not None and kappa is not None:
        k_in = int(ell) + int(kappa)
        if code_kind is CodeKind.IDENTITY and k_in != n:
            raise UsageError(f"ell/kappa: identity code needs ell + kappa = n, got {k_in} vs {n}")
        if code_kind is CodeKind.REPETITION3 and 3 * k_in != n:
            raise UsageError(f"ell/kappa: repetition3 needs 3*(ell + kappa) = n, got {k_in} vs {n}")
    elif code_kind is CodeKind.IDENTITY:
        k_in = n
    elif code_kind is CodeKind.REPETITION3:
        if n % 3:
            raise UsageError(f"n: repetition3 needs n divisible by 3, got {n}")
        k_in = n // 3
    else:
        k_in = n - math.ceil(required_redundancy(n, min(gamma, 0.5 - 1e-9)))

    lam = int(values["lambda"])
    if "lambda" not in explicit and k_in <= 2 * lam:
        for candidate in _FALLBACK_TAGS:
            if k_in > 2 * candidate:
                if candidate != lam:
                    print(
                        f"note: lambda lowered to {candidate} to fit {k_in} payload bits",
                        file=sys.stderr,
                    )
                lam = candidate
                break
        else:
            raise UsageError(f"n: payload of {k_in} bits cannot host any supported tag length")

    if ell is None and kappa is None:
        kappa_val = max(0, min(_default_kappa(n, alpha), k_in - (2 * lam + 1)))
        ell_val = k_in - kappa_val
    elif ell is None:
        kappa_val = int(kappa)
        ell_val = k_in - kappa_val
    elif kappa is None:
        ell_val = int(ell)
        kappa_val = k_in - ell_val
    else:
        ell_val, kappa_val = int(ell), int(kappa)

    q_bits = values["q_bits"]
    q_bits = min_q_bits(n, alpha) if q_bits is None else int(q_bits)

    try:
        params = ProtocolParams(
            n=n,
            ell=ell_val,
            kappa=kappa_val,
            tag_bits=lam,
            beta=float(values["beta"]),
            encoding=encoding,
            q_bits=q_bits,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return params, code_kind


def resolve_budget(values: dict) -> SecurityBudget:
    n = int(values["n"])
    alpha = float(values["alpha"])
    kappa = values["kappa"]
    q_bits = values["q_bits"]
    try:
        return SecurityBudget(
            alpha=alpha,
            tag_bits=int(values["lambda"]),
            n=n,
            kappa=_default_kappa(n, alpha) if kappa is None else int(kappa),
            gamma=float(values["gamma"]),
            beta=float(values["beta"]),
            q_bits=min_q_bits(n, alpha) if q_bits is None else int(q_bits),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _channel(values: dict) -> ChannelModel:
    if float(values["eta"]) > 0.0:
        return ChannelModel(ChannelKind.INTERCEPT_RESEND, eta=float(values["eta"]))
    return ChannelModel(ChannelKind.IID_FLIP, gamma=float(values["gamma"]))


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True)


def cmd_run(ns: argparse.Namespace) -> int:
    values, explicit = _merged(ns)
    params, code_kind = resolve_params(values, explicit)
    channel = _channel(values)
    rounds = int(values["rounds"])
    if rounds < 1:
        raise UsageError("rounds: must be at least 1")

    session = run_session(
        params,
        channel,
        code_kind,
        rounds,
        int(values["seed"]),
        reservoir_capacity=getattr(ns, "reservoir_capacity", None),
    )

    out_path = values["out"] or "rounds.jsonl"
    with open(out_path, "w") as fh:
        for result in session.results:
            fh.write(_dump(result.to_json()) + "\n")

    config_echo = {
        "n": params.n,
        "ell": params.ell,
        "kappa": params.kappa,
        "lambda": params.tag_bits,
        "beta": params.beta,
        "gamma": float(values["gamma"]),
        "eta": float(values["eta"]),
        "q_bits": params.q_bits,
        "encoding": params.encoding.value,
        "code": code_kind.value,
        "rounds": rounds,
        "seed": int(values["seed"]),
        "rounds_file": out_path,
    }
    print(_dump({"config": config_echo, "summary": session.summary.to_json()}))
    return 0


_SWEEP_COLUMNS = [
    "rate",
    "p_corr",
    "log2_bound_total",
    "log2_term_tag",
    "log2_term_reject",
    "log2_term_accept",
]


def _sweep_rows(spec: SweepSpec):
    for i in range(spec.steps):
        frac = i / (spec.steps - 1)
        value = spec.start + frac * (spec.stop - spec.start)
        if spec.variable == "gamma":
            budget_kwargs = {"gamma": value}
        elif spec.variable == "n":
            value = int(round(value))
            budget_kwargs = {"n": value}
        else:
            value = int(round(value))
            budget_kwargs = {"q_bits": value}
        try:
            budget = dataclasses.replace(spec.budget, **budget_kwargs)
            rate = asymptotic_rate_6state(budget.gamma)
            pc = p_corr(budget.n, budget.beta, budget.gamma)
            report = diamond_bound(budget)
        except (ValueError, RuntimeError) as exc:
            print(f"note: skipping {spec.variable}={value}: {exc}", file=sys.stderr)
            continue
        yield value, [
            rate,
            pc,
            report.log2_total,
            report.log2_term_tag,
            report.log2_term_reject,
            report.log2_term_accept,
        ]


def cmd_sweep(ns: argparse.Namespace) -> int:
    values, _ = _merged(ns)
    budget = resolve_budget(values)
    spec = SweepSpec(
        variable=ns.variable, start=ns.start, stop=ns.stop, steps=ns.steps, budget=budget
    )
    lines = [",".join([spec.variable] + _SWEEP_COLUMNS)]
    for value, columns in _sweep_rows(spec):
        cells = [f"{value:.10g}"] + [f"{c:.10g}" for c in columns]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if values["out"]:
        with open(values["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_attack(ns: argparse.Namespace) -> int:
    values, explicit = _merged(ns)
    if ns.attack_kind == "intercept_resend":
        session_rounds = int(ns.session_rounds)
        params = None
        code_kind = CodeKind.ORACLE
        if session_rounds > 0:
            params, code_kind = resolve_params(values, explicit)
        report = intercept_resend_report(
            Encoding.parse(values["encoding"]),
            float(values["eta"]),
            int(ns.qubits),
            int(values["seed"]),
            params=params,
            code_kind=code_kind,
            session_rounds=session_rounds,
        )
    else:
        fuzz_rounds = int(values["rounds"]) if "rounds" in explicit else 1_000_000
        report = tamper_fuzz(
            rounds=fuzz_rounds,
            seed=int(values["seed"]),
            flip_rate=float(ns.flip_rate),
        )
    text = _dump(report) + "\n"
    if values["out"]:
        with open(values["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int)
    parser.add_argument("--ell", type=int)
    parser.add_argument("--kappa", type=int)
    parser.add_argument("--lambda", dest="lambda_", type=int)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--eta", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--q-bits", dest="q_bits", type=int)
    parser.add_argument("--encoding", choices=["bb84", "six-state"])
    parser.add_argument("--code", choices=["identity", "repetition3", "oracle"])
    parser.add_argument("--rounds", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkr",
        description="Quantum key recycling laboratory: sessions, sweeps, attack demos.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a simulated session")
    p_run.add_argument("--config", help="JSON file mirroring the flags")
    p_run.add_argument("--reservoir-capacity", dest="reservoir_capacity", type=int)
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="tabulate rate, p_corr and bound terms")
    p_sweep.add_argument("variable", choices=["gamma", "n", "q_bits"])
    p_sweep.add_argument("--start", type=float, required=True)
    p_sweep.add_argument("--stop", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_attack = sub.add_parser("attack", help="run an adversary demo")
    p_attack.add_argument("attack_kind", choices=["intercept_resend", "tamper_fuzz"])
    p_attack.add_argument("--qubits", type=int, default=100000)
    p_attack.add_argument("--session-rounds", dest="session_rounds", type=int, default=200)
    p_attack.add_argument("--flip-rate", dest="flip_rate", type=float, default=0.3)
    _add_common(p_attack)
    p_attack.set_defaults(func=cmd_attack)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if hasattr(ns, "lambda_"):
        setattr(ns, "lambda", ns.lambda_)
    try:
        return ns.func(ns)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ReservoirExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESERVOIR


if __name__ == "__main__":
    sys.exit(main())
