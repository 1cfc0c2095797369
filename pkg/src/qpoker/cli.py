"""Command-line interface: build, solve, quantize, verify, report.

Exit codes: 0 on success, 1 when a requested certification fails, 2 for
usage or input errors.  Reports go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import ewl_protocol as ewl
from . import poker_models as pm
from . import quantized_analysis as qa
from . import strategic_games as sg
from . import verify as vf
from .game import StrategicGame

SEED_ENV = "QPOKER_SEED"
FULL_GAME_JSON_LIMIT = 4096  # profiles; larger strategic forms are summarised


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    game: str | None = None
    seed: int | None = None
    samples: int = 100_000
    fmt: str = "json"
    entangled: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise UsageError("--samples must be at least 1")
        if self.seed is not None and not 0 <= self.seed < 2 ** 64:
            raise UsageError("--seed must be a 64-bit unsigned integer")


def resolve_seed(flag: int | None) -> int | None:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def load_game(ref: str) -> StrategicGame:
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        if not path.exists():
            raise UsageError(f"no such game file: {ref}")
        try:
            return StrategicGame.from_json(path.read_text())
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"invalid game file {ref}: {exc}") from None
    try:
        return sg.builtin_game(ref)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def _rational_or_float(x) -> dict:
    if isinstance(x, (Fraction, int)):
        return qa.tag_exact(x)
    f = Fraction(float(x)).limit_denominator(10_000)
    if abs(float(f) - float(x)) <= 1e-12:
        return qa.tag_exact(f)
    return qa.tag_float(float(x))


# ---------------------------------------------------------------------------
# build

def cmd_build(args) -> tuple[dict, int]:
    try:
        spec = pm.PokerSpec(pm.Variant.parse(args.variant), Fraction(args.ante), Fraction(args.bet))
    except (ValueError, pm.PokerRuleError) as exc:
        raise UsageError(str(exc)) from None
    full = pm.strategic_form(spec)
    reduced, quot, trace = pm.eliminate(full)
    named = pm.name_survivors(spec, reduced, quot, full)
    profiles = int(np.prod(full.shape))
    out = {
        "command": "build",
        "variant": spec.variant.value, "ante": str(spec.ante), "bet": str(spec.bet),
        "full": (full.to_json() if profiles <= FULL_GAME_JSON_LIMIT else
                 {"name": full.name, "players": full.n_players,
                  "strategy_counts": list(full.shape), "zero_sum": full.is_zero_sum(),
                  "payoff_classes": [len(c) for c in quot.classes]}),
        "reduced": (named or reduced).to_json(),
        "named_survivors": named is not None,
        "trace": [{"round": e.round, "player": e.player + 1, "removed": e.removed,
                   "dominator": e.dominator, "mode": e.mode} for e in trace],
        "_trace_csv": pm.trace_to_csv(trace),
        "_table": named or reduced,
    }
    if args.trace_csv:
        Path(args.trace_csv).write_text(pm.trace_to_csv(trace))
    return out, 0


# ---------------------------------------------------------------------------
# solve

def cmd_solve(args) -> tuple[dict, int]:
    game = load_game(args.game)
    out = {"command": "solve", "game": game.name or args.game}
    pure = sg.pure_nash_equilibria(game)
    out["pure_equilibria"] = [[game.labels[i][s] for i, s in enumerate(p)] for p in pure]
    if game.n_players == 2 and game.shape == (2, 2) and game.is_zero_sum():
        sol = sg.solve_zero_sum_2x2(game)
        check = sg.is_nash(game, sol.profile)
        freq = sg.simplified_poker_frequencies(sol)
        out["equilibrium"] = {
            "profile": [[qa.tag_exact(w) for w in mix] for mix in sol.profile],
            "value": qa.tag_exact(sol.value),
            "first_strategy": qa.tag_exact(freq.first_strategy),
            "bluff_frequency": qa.tag_exact(freq.bluff_frequency),
            "call_frequency": qa.tag_exact(freq.call_frequency),
            "regret": qa.tag_exact(check.regret),
            "security_level": qa.tag_exact(sg.security_level(game, 0, sol.profile[0])),
        }
        certified = check.is_nash
    elif game.n_players == 3 and game.shape == (2, 2, 2):
        sol = sg.solve_nash_shapley(game)
        out["equilibrium"] = {
            "p": qa.tag_float(sol.p), "p_closed_form": str(sol.p_exact),
            "z": qa.tag_float(sol.z), "u2_weight": qa.tag_float(1 - sol.z),
            "payoffs": [_rational_or_float(v) for v in sol.payoffs_exact],
            "indifference_residual": qa.tag_float(max(sol.indifference_residuals)),
            "regret": qa.tag_float(sol.regret),
            "snap_off_probability": qa.tag_float(sg.snap_off_probability(sol.p)),
        }
        certified = max(sol.indifference_residuals) < 1e-9 and sol.regret < 1e-9
    elif game.n_players == 2 and game.shape == (2, 2):
        certified = bool(pure)
        if not pure:
            raise UsageError("non-zero-sum 2x2 game without a pure equilibrium is not supported")
    else:
        raise UsageError(f"unsupported game shape {game.shape}")
    out["certified"] = bool(certified)
    return out, 0 if certified else 1


# ---------------------------------------------------------------------------
# quantize

PRESETS = ("identity", "flip", "haar", "q8", "oct8")


def parse_strategy(text: str, player: int, n: int) -> ewl.MixedQuantumStrategy:
    key = text.strip().lower()
    if key == "identity":
        return ewl.MixedQuantumStrategy.pure(ewl.IDENTITY, name="identity")
    if key == "flip":
        return ewl.MixedQuantumStrategy.pure(ewl.flip_operator(n), name="flip")
    if key == "haar":
        return ewl.HAAR
    if key in ("q8", "oct8"):
        if key == "oct8" and n != 3:
            raise UsageError("oct8 applies to three-player games")
        emb = qa.calibrate_assignment(n).embeddings[player]
        from .algebra import QUAT_UNITS
        units = list(QUAT_UNITS) if key == "q8" else [s * u for u in QUAT_UNITS for s in (1, -1)]
        w = Fraction(1, len(units))
        return ewl.MixedQuantumStrategy.mixture([(emb.su2(u), w) for u in units], name=key)
    if key.startswith("mix"):
        try:
            return ewl.parse_mixture(text, n)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(str(exc)) from None
    if key.startswith("quat:"):
        from .algebra import Quaternion
        try:
            q = Quaternion(*(float(x) for x in key[5:].split(",")))
        except (TypeError, ValueError):
            raise UsageError(f"cannot parse {text!r}; expected quat:a,b,c,d") from None
        if not q.is_unit(1e-9):
            raise UsageError(f"{text!r} is not a unit quaternion")
        emb = qa.calibrate_assignment(n).embeddings[player]
        return ewl.MixedQuantumStrategy.pure(emb.su2(q / q.norm()), name=text)
    raise UsageError(f"unknown strategy {text!r}; presets: {', '.join(PRESETS)}, "
                     "'mix N:a,F:b', 'quat:a,b,c,d'")


def _uniform_certificate(names: list[str], n: int, entangled: bool) -> str | None:
    discrete = [x in ("q8", "oct8") for x in names]
    if not entangled:
        return None
    if n == 2 and any(discrete):
        return "a q8 mixture averages every opponent strategy to the uniform distribution"
    if n == 3 and sum(discrete) >= 2:
        return "two discrete uniform mixtures average the third player to the uniform distribution"
    return None


def cmd_quantize(args, seed: int | None) -> tuple[dict, int]:
    game = load_game(args.game)
    n = game.n_players
    if game.shape != (2,) * n or n not in (2, 3):
        raise UsageError("quantization needs 2 or 3 players with 2 strategies each")
    if args.preset == "uniform-all":
        names = ["haar"] * n
    else:
        given = [args.p1, args.p2, args.p3][:n]
        if args.p3 and n == 2:
            raise UsageError("--p3 given for a two-player game")
        names = [g if g is not None else "identity" for g in given]
    profile = [parse_strategy(t, k, n) for k, t in enumerate(names)]
    sampling = any(s.haar for s in profile)
    if sampling and seed is None:
        raise UsageError(f"a seed is required for Haar strategies (--seed or {SEED_ENV})")
    cfg = RunConfig("quantize", args.game, seed, args.samples, args.format, args.entangled,
                    args.workers)
    res = ewl.eval_mixed_quantum(game, cfg.entangled, profile, cfg.samples, seed, cfg.workers)
    labels = ewl.nf_labels(n)
    if res.exact:
        dist = {l: _rational_or_float(res.distribution[ewl.label_to_profile(l)]) for l in labels}
        pay = [_rational_or_float(v) for v in res.payoff]
    else:
        dist = {l: qa.tag_estimate(res.distribution[ewl.label_to_profile(l)],
                                   res.distribution_stderr[ewl.label_to_profile(l)])
                for l in labels}
        pay = [qa.tag_estimate(v, s) for v, s in zip(res.payoff, res.stderr)]
    out = {"command": "quantize", "game": game.name or args.game, "entangled": cfg.entangled,
           "profile": names, "seed": seed if sampling else None,
           "samples": cfg.samples if sampling else 0,
           "distribution": dist, "payoffs": pay}
    code = 0
    cert = _uniform_certificate(names, n, cfg.entangled)
    if cert:
        target = qa.uniform_equilibrium_payoff(game)
        if res.exact:
            within = all(abs(v - float(t)) <= 1e-12 for v, t in zip(res.payoff, target))
        else:
            # a q8 side makes every sample uniform, so the spread is pure rounding
            within = all(abs(v - float(t)) <= max(4 * s, 1e-12) for v, t, s in
                         zip(res.payoff, target, res.stderr))
        out["exact_payoffs"] = [qa.tag_exact(t) for t in target]
        out["certificate"] = {"argument": cert, "consistent": bool(within)}
        code = 0 if within else 1
    return out, code


# ---------------------------------------------------------------------------
# verify / report

def cmd_verify(args, seed: int | None) -> tuple[dict, int]:
    seed = vf.DEFAULT_SEED if seed is None else seed
    try:
        checks = vf.run_suite(args.suite, seed)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    for c in checks:
        print(c.line(), file=sys.stderr)
    ok = all(c.passed for c in checks)
    out = {"command": "verify", "suite": args.suite, "seed": seed, "passed": ok,
           "criteria": [c.as_json() for c in checks], "flags": qa.discrepancy_flags()}
    return out, 0 if ok else 1


def cmd_report(args) -> tuple[dict, int]:
    return qa.comparison_report(), 0


# ---------------------------------------------------------------------------
# output

def _public(out: dict) -> dict:
    return {k: v for k, v in out.items() if not k.startswith("_")}


def _table_text(game: StrategicGame) -> str:
    lines = [f"{game.name}: players={game.n_players} strategies={[list(l) for l in game.labels]}"]
    for prof in game.profiles():
        names = ",".join(game.labels[i][s] for i, s in enumerate(prof))
        lines.append(f"  ({names}) -> ({', '.join(str(v) for v in game.payoff(prof))})")
    return "\n".join(lines)


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict) and "tag" in value:
        rows.append((prefix, value["value"], value["tag"], value.get("stderr", "")))
    elif isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, value, "", ""))


def render(out: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_public(out), indent=2)
    if fmt == "csv":
        if out.get("command") == "build":
            return out["_trace_csv"].rstrip("\n")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("key", "value", "tag", "stderr"))
        rows: list = []
        _flatten("", _public(out), rows)
        writer.writerows(rows)
        return buf.getvalue().rstrip("\n")
    if out.get("command") == "build":
        return _table_text(out["_table"])
    rows = []
    _flatten("", _public(out), rows)
    width = max(len(r[0]) for r in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" + (f" ({t}" + (f", se={s}" if s != "" else "") + ")"
                                                  if t else "") for k, v, t, s in rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpoker", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"), default="json")
    common.add_argument("--out", help="write the report to this path instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="build and reduce a poker strategic form")
    b.add_argument("--variant", required=True, help="sp or ns")
    b.add_argument("--ante", required=True)
    b.add_argument("--bet", required=True)
    b.add_argument("--trace-csv", help="also write the elimination trace as CSV")

    s = sub.add_parser("solve", parents=[common], help="equilibrium of a game")
    s.add_argument("--game", required=True, help="built-in name (pd, chicken, sp, ns) or JSON path")

    q = sub.add_parser("quantize", parents=[common], help="evaluate an EWL-quantized profile")
    q.add_argument("--game", required=True)
    q.add_argument("--entangled", action=argparse.BooleanOptionalAction, default=True)
    q.add_argument("--p1")
    q.add_argument("--p2")
    q.add_argument("--p3")
    q.add_argument("--preset", choices=("uniform-all",))
    q.add_argument("--seed", type=int)
    q.add_argument("--samples", type=int, default=100_000)
    q.add_argument("--workers", type=int, default=1)

    v = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    v.add_argument("suite", choices=sorted(vf.SUITES))
    v.add_argument("--seed", type=int)

    sub.add_parser("report", parents=[common], help="classical vs quantized comparison")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        seed = resolve_seed(getattr(args, "seed", None))
        if seed is not None and not 0 <= seed < 2 ** 64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if args.command == "build":
            out, code = cmd_build(args)
        elif args.command == "solve":
            out, code = cmd_solve(args)
        elif args.command == "quantize":
            out, code = cmd_quantize(args, seed)
        elif args.command == "verify":
            out, code = cmd_verify(args, seed)
        else:
            out, code = cmd_report(args)
    except UsageError as exc:
        print(f"qpoker: error: {exc}", file=sys.stderr)
        return 2
    text = render(out, args.format)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
