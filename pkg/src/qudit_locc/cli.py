"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 verification
failure, 3 solver exhaustion.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from typing import Any, Sequence

import numpy as np

from . import verify
from .hilbert import OperatorError, to_json
from .operators import (
    SolverError,
    printed_system_holds,
    phase_branch,
    resolve_gate,
    u3_assemble,
    u3_constraints,
    u3_solutions,
    ud_spin,
)
from .protocol import (
    SCHEMES,
    BellLikeBasis,
    ProtocolError,
    ResourceState,
    resource_report,
    run_protocol,
)

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_SOLVER = 0, 1, 2, 3
SEED_ENV = "QUDIT_LOCC_SEED"

_ANGLE_TOKENS = {
    "pi/6": math.pi / 6,
    "pi/4": math.pi / 4,
    "pi/3": math.pi / 3,
    "pi/2": math.pi / 2,
}

TRANSCRIPT_CSV_HEADER = (
    "x_outcome",
    "bell_branch",
    "probability",
    "bell_probability",
    "alice_bit",
    "bob_bit",
    "corrections",
    "global_phase_re",
    "global_phase_im",
    "branch_defect",
    "target_defect",
    "verified",
)
LEDGER_CSV_HEADER = (
    "scheme",
    "parties",
    "dimension",
    "entangled_resources",
    "resource_kind",
    "ebits_across_cut",
    "cbit_pairs",
    "cbits",
    "dit_pairs",
    "dits",
    "dit_bit_equivalent",
    "classical_bit_total",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def angle(token: str) -> float:
    """Radians, either decimal or one of pi/6, pi/4, pi/3, pi/2."""
    t = token.strip().lower()
    if t in _ANGLE_TOKENS:
        return _ANGLE_TOKENS[t]
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid angle {token!r}: use decimal radians or one of {', '.join(_ANGLE_TOKENS)}"
        ) from None


# defaults live here so that config-file values can fill unset flags
DEFAULTS: dict[str, dict[str, Any]] = {
    "simulate": {
        "d": 2, "da": None, "db": None, "ua": "ud_z", "ub": "ud_z", "xi": 0.0,
        "lambdas": [0.5, 0.5, 0.5, 0.5], "alpha": None, "beta": None,
        "mode": "exhaustive", "seed": None, "no_verify": False, "tol": 1e-10,
    },
    "verify": {"suite": None, "d": 2, "axis": "z", "cases": 20, "seed": None, "tol": None},
    "resources": {"n": 2, "d": 2},
    "solve-u3": {"phases": [0.0, 0.0, 0.0], "seed": None, "count": 3, "starts": 64},
}
_COMMON = {"format": "json", "no_timestamp": False, "config": None}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qudit-locc", description="Simulate and verify the two-cbit non-local gate protocol.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("json", "csv", "pretty"), default=None)
        p.add_argument("--no-timestamp", action="store_true", default=None)
        p.add_argument("--config", default=None, help="JSON file mirroring the flags; flags win")

    p = sub.add_parser("simulate", help="run the protocol and print every transcript")
    p.add_argument("--d", type=int, default=None, help="dimension of both targets")
    p.add_argument("--da", type=int, default=None)
    p.add_argument("--db", type=int, default=None)
    p.add_argument("--ua", default=None, help="gate name, or ud_x / ud_y / ud_z")
    p.add_argument("--ub", default=None)
    p.add_argument("--xi", type=angle, default=None)
    p.add_argument("--lambda", dest="lambdas", type=float, nargs=4, default=None)
    p.add_argument("--alpha", type=angle, default=None, help="defaults to xi")
    p.add_argument("--beta", type=angle, default=None, help="defaults to xi")
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-verify", action="store_true", default=None)
    p.add_argument("--tol", type=float, default=None)
    common(p)

    p = sub.add_parser("verify", help="run a self-check suite")
    p.add_argument("suite", choices=verify.SUITES, nargs="?", default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--axis", default=None)
    p.add_argument("--cases", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    common(p)

    p = sub.add_parser("resources", help="compare resource consumption")
    p.add_argument("--n", type=int, default=None, help="number of parties")
    p.add_argument("--d", type=int, default=None)
    common(p)

    p = sub.add_parser("solve-u3", help="find unitary Hermitian qutrit matrices")
    p.add_argument("--phases", type=angle, nargs=3, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--starts", type=int, default=None)
    common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Flags, then config file, then defaults; unknown config keys are rejected."""
    defaults = {**DEFAULTS[args.command], **_COMMON}
    file_values: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_values, dict):
            raise UsageError("config file must hold a JSON object")
        file_values = {k.replace("-", "_"): v for k, v in file_values.items()}
        if "lambda" in file_values:
            file_values["lambdas"] = file_values.pop("lambda")
        unknown = sorted(set(file_values) - set(defaults) - {"command"})
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    config: dict[str, Any] = {"command": args.command}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            config[key] = flag
        elif key in file_values:
            value = file_values[key]
            if key in ("xi", "alpha", "beta") and isinstance(value, str):
                value = angle(value)
            if key == "phases":
                value = [angle(v) if isinstance(v, str) else float(v) for v in value]
            config[key] = value
        else:
            config[key] = default
    if "seed" in config and config["seed"] is None:
        env = os.environ.get(SEED_ENV)
        try:
            config["seed"] = int(env) if env is not None else 0
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return config


def _envelope(config: dict[str, Any], body: dict[str, Any]) -> dict[str, Any]:
    out = {"command": config["command"]}
    if not config["no_timestamp"]:
        out["generated_at"] = datetime.now(timezone.utc).isoformat()
    out.update(body)
    return out


def _csv(header: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(header), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _fmt_complex(c) -> str:
    if c is None:
        return "-"
    return f"{c.real:+.6f}{c.imag:+.6f}i"


def cmd_simulate(config: dict[str, Any]) -> tuple[int, dict, list[dict], str]:
    da = config["da"] or config["d"]
    db = config["db"] or config["d"]
    ua, ub = resolve_gate(config["ua"], da), resolve_gate(config["ub"], db)
    xi = config["xi"]
    alpha = xi if config["alpha"] is None else config["alpha"]
    beta = xi if config["beta"] is None else config["beta"]
    resource = ResourceState(tuple(config["lambdas"]))
    basis = BellLikeBasis(alpha, beta)
    rng = np.random.default_rng(config["seed"]) if config["mode"] == "sampled" else None
    ts = run_protocol(xi, ua, ub, resource, basis, mode=config["mode"], rng=rng, tol=config["tol"])
    deterministic = resource.is_maximal() and alpha == xi and beta == xi
    verified = None
    if not config["no_verify"]:
        verified = all(t.verified is not False for t in ts)
    records = []
    csv_rows = []
    for t in ts:
        rec = t.to_json()
        rec["bell_probability"] = t.bell_probability
        rec["branch_defect"] = t.branch_defect
        rec["target_defect"] = t.target_defect
        rec["verified"] = t.verified
        records.append(rec)
        csv_rows.append({
            "x_outcome": t.x_outcome,
            "bell_branch": t.bell_branch,
            "probability": repr(t.probability),
            "bell_probability": repr(t.bell_probability),
            "alice_bit": t.messages[0].bit,
            "bob_bit": t.messages[1].bit,
            "corrections": ";".join(t.corrections),
            "global_phase_re": "" if t.global_phase is None else repr(t.global_phase.real),
            "global_phase_im": "" if t.global_phase is None else repr(t.global_phase.imag),
            "branch_defect": "" if t.branch_defect is None else repr(t.branch_defect),
            "target_defect": "" if t.target_defect is None else repr(t.target_defect),
            "verified": "" if t.verified is None else t.verified,
        })
    body = {
        "parameters": {
            "dims": [da, db], "ua": config["ua"], "ub": config["ub"], "xi": xi,
            "lambda": list(resource.lambdas), "alpha": alpha, "beta": beta, "mode": config["mode"],
            "seed": config["seed"],
        },
        "deterministic_regime": deterministic,
        "bell_probabilities": list(basis.probabilities(resource)),
        "verified": verified,
        "transcripts": records,
    }
    lines = [
        f"dims A,B = {da},{db}  xi = {xi:.10f}  lambda = {list(resource.lambdas)}  alpha = {alpha:.6f}  beta = {beta:.6f}",
        "Bell-like round probabilities: " + ", ".join(f"P{k + 1}={p:.6f}" for k, p in enumerate(basis.probabilities(resource))),
    ]
    for t in ts:
        bits = " ".join(f"{m.sender}->{'Bob' if m.sender == 'Alice' else 'Alice'}:{m.bit}" for m in t.messages)
        lines.append(
            f"x={t.x_outcome:+d} branch={t.bell_branch} p={t.probability:.6f} [{bits}] "
            f"corrections={','.join(t.corrections) or 'none'} phase={_fmt_complex(t.global_phase)} "
            f"verified={t.verified}"
        )
    lines.append(f"verified: {verified}")
    code = EXIT_VERIFY if verified is False else EXIT_OK
    return code, body, csv_rows, "\n".join(lines)


def cmd_verify(config: dict[str, Any]) -> tuple[int, dict, list[dict], str]:
    suite = config["suite"]
    if suite is None:
        raise UsageError(f"verify needs a suite: {', '.join(verify.SUITES)}")
    tol = config["tol"]
    kwargs: dict[str, Any] = {} if tol is None else {"tol": tol}
    if suite == "nonlocal":
        checks = verify.suite_nonlocal(cases=config["cases"], seed=config["seed"], **kwargs)
    elif suite == "xor":
        checks = verify.suite_xor(**kwargs)
    elif suite == "ghz3":
        checks = verify.suite_ghz3(**kwargs)
    elif suite == "ud":
        checks = verify.suite_ud(config["d"], config["axis"], **kwargs)
    else:
        checks = verify.suite_u3(seed=config["seed"])
    failing = [c for c in checks if not c.passed]
    body: dict[str, Any] = {"suite": suite, "passed": not failing, "checks": [c.to_json() for c in checks]}
    if suite == "ud":
        body["operator"] = to_json(ud_spin(config["d"], config["axis"]))
        body["diagonal"] = [complex(v).real for v in np.diag(ud_spin(config["d"], config["axis"]).matrix)]
    if failing:
        body["first_failure"] = failing[0].name
    lines = [
        f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.value:.3e} {c.relation} {c.threshold:g}" for c in checks
    ]
    lines.append(f"{suite}: {'all checks passed' if not failing else 'FAILED at ' + failing[0].name}")
    return (EXIT_VERIFY if failing else EXIT_OK), body, [c.to_json() for c in checks], "\n".join(lines)


def cmd_resources(config: dict[str, Any]) -> tuple[int, dict, list[dict], str]:
    n, d = config["n"], config["d"]
    if n < 2 or d < 2:
        raise UsageError(f"need N >= 2 and d >= 2, got N={n}, d={d}")
    rows = [resource_report(n, d, s).to_record() for s in SCHEMES]
    lines = [f"{'scheme':<26}{'entangled':>10}  {'kind':<34}{'cbits':>6}{'dits':>6}{'dit bits':>10}"]
    for r in rows:
        lines.append(
            f"{r['scheme']:<26}{r['entangled_resources']:>10}  {r['resource_kind']:<34}"
            f"{r['cbits']:>6}{r['dits']:>6}{r['dit_bit_equivalent']:>10.4f}"
        )
    return EXIT_OK, {"parties": n, "dimension": d, "ledgers": rows}, rows, "\n".join(lines)


def cmd_solve_u3(config: dict[str, Any]) -> tuple[int, dict, list[dict], str]:
    phases = tuple(float(p) for p in config["phases"])
    if phase_branch(phases) is None:
        raise UsageError(f"phases {phases} satisfy neither phi1 = phi2 - phi3 nor phi1 = phi2 - phi3 + pi")
    sols = u3_solutions(phases, seed=config["seed"], count=config["count"], starts=config["starts"])
    records, lines = [], []
    for p in sols:
        u = u3_assemble(p)
        rec = {
            **p.to_json(),
            "unitarity_defect": u.unitarity_defect(),
            "hermiticity_defect": u.hermiticity_defect(),
            "residual": float(np.linalg.norm(u3_constraints(p))),
            "literal_system_holds": printed_system_holds(p),
        }
        records.append(rec)
        lines.append(
            "a=({:+.6f},{:+.6f},{:+.6f}) b=({:+.6f},{:+.6f},{:+.6f}) ".format(*p.a, *p.b)
            + f"branch={p.branch} defect={u.unitarity_defect():.2e} literal={rec['literal_system_holds']}"
        )
    csv_rows = [{**r, "a": " ".join(map(repr, r["a"])), "b": " ".join(map(repr, r["b"])), "phi": " ".join(map(repr, r["phi"]))} for r in records]
    return EXIT_OK, {"phases": list(phases), "solutions": records}, csv_rows, "\n".join(lines)


_COMMANDS = {
    "simulate": (cmd_simulate, TRANSCRIPT_CSV_HEADER),
    "verify": (cmd_verify, ("name", "value", "relation", "threshold", "passed")),
    "resources": (cmd_resources, LEDGER_CSV_HEADER),
    "solve-u3": (cmd_solve_u3, ("a", "b", "phi", "branch", "unitarity_defect", "hermiticity_defect", "residual", "literal_system_holds")),
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(_COMMANDS))
        config = resolve_config(args)
        handler, header = _COMMANDS[args.command]
        code, body, rows, pretty = handler(config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProtocolError, OperatorError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    fmt = config["format"]
    if fmt == "json":
        print(json.dumps(_envelope(config, body), indent=2))
    elif fmt == "csv":
        print(_csv(header, rows), end="")
    else:
        print(pretty)
    return code


if __name__ == "__main__":
    sys.exit(main())
