"""Command-line entry point.

Exit codes: 0 success or certified, 1 certified negative, 2 undecided or
inconclusive, 3 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import duality, excess, frames, gallery
from .duality import DualVerdict
from .errors import (
    ConditionOperatorSingular,
    FrameLabError,
    NormConditionViolated,
    NotInvertible,
    UndecidedInvertibility,
)
from .operator_algebra import (
    DEFAULT_HORIZONS,
    NormOptions,
    Verdict,
    op_from_json,
    op_to_json,
    operator_pnorm,
    witness_to_dict,
)

SCHEMA = 1
EXIT_OK, EXIT_NEGATIVE, EXIT_UNDECIDED, EXIT_USAGE = 0, 1, 2, 3

COMMANDS = ("validate", "bounds", "dual-check", "canonical-dual", "parametrize-dual",
            "approx-cert", "factorize", "neumann", "perturb", "excess", "experiment",
            "gallery")

VERDICT_EXIT = {
    DualVerdict.EXACT: EXIT_OK,
    DualVerdict.APPROX: EXIT_OK,
    DualVerdict.NOT_APPROX: EXIT_NEGATIVE,
    DualVerdict.UNDECIDED: EXIT_UNDECIDED,
    DualVerdict.INCONCLUSIVE: EXIT_UNDECIDED,
}


class UsageError(Exception):
    pass


@dataclass
class CommandConfig:
    command: str
    f: Optional[str] = None
    g: Optional[str] = None
    h: Optional[str] = None
    u: Optional[str] = None
    v: Optional[str] = None
    p: Optional[float] = None
    seed: int = 0
    horizons: tuple = DEFAULT_HORIZONS
    output: Optional[str] = None
    out_dir: Optional[str] = None
    format: str = "json"
    depth: int = 1
    probes: int = 32
    greedy: bool = False
    name: Optional[str] = None
    trials: int = 200
    max_dim: int = 3
    max_m: int = 6
    workers: int = 1
    extra: dict = field(default_factory=dict)

    @property
    def norm_options(self) -> NormOptions:
        return NormOptions(horizons=tuple(self.horizons), seed=self.seed)


# ------------------------------------------------------------------ output


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v, sort_keys=True)
        else:
            out[key] = v
    return out


def _human(d, indent=0):
    lines = []
    pad = "  " * indent
    for k in sorted(d):
        v = d[k]
        if isinstance(v, dict) and {"lower", "upper", "verdict"} <= set(v):
            upper = "inf" if v["upper"] is None else f"{v['upper']:.12g}"
            lines.append(f"{pad}{k}: ‖·‖ ∈ [{v['lower']:.12g}, {upper}] — {v['verdict']}")
        elif isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.extend(_human(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            keys = list(v[0])
            lines.append(f"{pad}{k}:")
            lines.append(pad + "  " + "  ".join(f"{c:>10}" for c in keys))
            for row in v:
                lines.append(pad + "  " + "  ".join(f"{str(row[c]):>10}" for c in keys))
        else:
            lines.append(f"{pad}{k}: {v}")
    return lines


def emit_report(report: dict, fmt: str = "json") -> str:
    """Serialize a report dict: versioned sorted JSON, flat CSV, or text."""
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, **report}, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        rows = report.get("rows")
        if not (isinstance(rows, list) and rows and isinstance(rows[0], dict)):
            rows = [_flatten(report)]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    if fmt == "human":
        return "\n".join(_human(report)) + "\n"
    raise UsageError(f"unknown format {fmt!r}")


# ------------------------------------------------------------------ input


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc


def _load_system(path: Optional[str], p: Optional[float], flag: str) -> frames.FrameSystem:
    if path is None:
        raise UsageError(f"--{flag} is required for this command")
    obj = _load_json(path)
    try:
        return frames.FrameSystem.from_json(obj, p)
    except KeyError as exc:
        raise UsageError(f"{path}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError, FrameLabError) as exc:
        raise UsageError(f"{path}: invalid frame system: {exc}") from exc


def _load_operator(path: str, domain, codomain):
    obj = _load_json(path)
    try:
        return op_from_json(obj, domain, codomain)
    except KeyError as exc:
        raise UsageError(f"{path}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError, FrameLabError) as exc:
        raise UsageError(f"{path}: invalid operator: {exc}") from exc


# ---------------------------------------------------------------- commands


def _bounds_report(F, opts):
    tf = operator_pnorm(frames.analysis_operator(F), F.p, opts)
    tt = operator_pnorm(frames.synthesis_operator(F), F.p, opts)
    return {"theta_f": tf.to_dict(), "theta_tau": tt.to_dict(),
            "bessel": {"c": tf.upper, "d": tt.upper}}


def _asf_section(F, opts):
    try:
        fb = frames.validate_p_asf(F, opts)
    except NotInvertible as exc:
        return {"status": "NotInvertible", "message": str(exc),
                "witness": witness_to_dict(exc.witness)}, EXIT_NEGATIVE
    except UndecidedInvertibility as exc:
        return {"status": "Undecided", "message": str(exc)}, EXIT_UNDECIDED
    return {"status": "p-ASF", "a": fb.a, "b": fb.b}, EXIT_OK


def cmd_validate(cfg):
    F = _load_system(cfg.f, cfg.p, "f")
    opts = cfg.norm_options
    report = {"command": "validate", "p": F.p, **_bounds_report(F, opts)}
    report["p_asf"], code = _asf_section(F, opts)
    return report, code


def cmd_bounds(cfg):
    F = _load_system(cfg.f, cfg.p, "f")
    opts = cfg.norm_options
    report = {"command": "bounds", "p": F.p, **_bounds_report(F, opts)}
    report["frame_operator"] = operator_pnorm(frames.frame_operator(F), F.p, opts).to_dict()
    section, code = _asf_section(F, opts)
    report["frame_bounds"] = section
    return report, code


def cmd_dual_check(cfg):
    F, G = _load_system(cfg.f, cfg.p, "f"), _load_system(cfg.g, cfg.p, "g")
    rep = duality.is_exact_dual(F, G, cfg.probes, cfg.seed, cfg.norm_options)
    code = EXIT_OK if rep.verdict is DualVerdict.EXACT else EXIT_NEGATIVE
    return {"command": "dual-check", **rep.to_dict()}, code


def cmd_canonical_dual(cfg):
    F = _load_system(cfg.f, cfg.p, "f")
    G = duality.canonical_dual(F)
    left, right = duality.canonical_duals(F)
    rep = duality.is_exact_dual(F, G, cfg.probes, cfg.seed, cfg.norm_options)
    _write_systems(cfg, {"canonical_dual": G, "canonical_left": left, "canonical_right": right})
    return {"command": "canonical-dual", "dual": G.to_json(), "left": left.to_json(),
            "right": right.to_json(), "check": rep.to_dict()}, VERDICT_EXIT[rep.verdict]


def cmd_parametrize_dual(cfg):
    F = _load_system(cfg.f, cfg.p, "f")
    cs = F.coefficient_space
    U = _load_operator(cfg.u, F.space, cs) if cfg.u else None
    V = _load_operator(cfg.v, cs, F.space) if cfg.v else None
    try:
        G = duality.parametrize_dual(F, U, V)
    except ConditionOperatorSingular as exc:
        return {"command": "parametrize-dual", "status": "ConditionOperatorSingular",
                "message": str(exc), "witness": witness_to_dict(exc.witness)}, EXIT_NEGATIVE
    rep = duality.is_exact_dual(F, G, cfg.probes, cfg.seed, cfg.norm_options)
    _write_systems(cfg, {"dual": G})
    return {"command": "parametrize-dual", "dual": G.to_json(),
            "check": rep.to_dict()}, VERDICT_EXIT[rep.verdict]


def cmd_approx_cert(cfg):
    F, G = _load_system(cfg.f, cfg.p, "f"), _load_system(cfg.g, cfg.p, "g")
    rep = duality.certify_approx_dual(F, G, cfg.norm_options, seed=cfg.seed)
    return {"command": "approx-cert", **rep.to_dict()}, VERDICT_EXIT[rep.verdict]


def _certified_or_report(cfg, F, G, name):
    rep = duality.certify_approx_dual(F, G, cfg.norm_options, seed=cfg.seed)
    if rep.verdict is DualVerdict.APPROX:
        return None
    return {"command": name, "status": "precondition", **rep.to_dict()}, VERDICT_EXIT[rep.verdict]


def cmd_factorize(cfg):
    F = _load_system(cfg.f, cfg.p, "f")
    if cfg.g is None:
        U, V = frames.factorize_abs(F)
        return {"command": "factorize", "U": op_to_json(U), "V": op_to_json(V)}, EXIT_OK
    G = _load_system(cfg.g, cfg.p, "g")
    early = _certified_or_report(cfg, F, G, "factorize")
    if early:
        return early
    U, V, H = duality.factorize_approx_dual(F, G, cfg.norm_options)
    rep = duality.is_exact_dual(F, H, cfg.probes, cfg.seed, cfg.norm_options)
    _write_systems(cfg, {"H": H})
    return {"command": "factorize", "U": op_to_json(U), "V": op_to_json(V),
            "H": H.to_json(), "check": rep.to_dict()}, VERDICT_EXIT[rep.verdict]


def cmd_neumann(cfg):
    F, G = _load_system(cfg.f, cfg.p, "f"), _load_system(cfg.g, cfg.p, "g")
    early = _certified_or_report(cfg, F, G, "neumann")
    if early:
        return early
    it = duality.neumann_iterate(F, G, cfg.depth, cfg.norm_options)
    _write_systems(cfg, {f"neumann_{cfg.depth}": it.system})
    code = EXIT_OK if it.bounds_hold else EXIT_UNDECIDED
    return {"command": "neumann", **it.to_dict()}, code


def cmd_perturb(cfg):
    H = _load_system(cfg.h, cfg.p, "h")
    G = _load_system(cfg.g, cfg.p, "g")
    F = _load_system(cfg.f, cfg.p, "f")
    bounds, rep = duality.perturbation_approx_dual(H, G, F, cfg.norm_options)
    return {"command": "perturb", "bounds": bounds.to_dict(), **rep.to_dict()}, \
        VERDICT_EXIT[rep.verdict]


def cmd_excess(cfg):
    F = _load_system(cfg.f, cfg.p, "f")
    res = excess.p_excess(F, excess.GREEDY if cfg.greedy else excess.BRUTE)
    return {"command": "excess", "value": res.value, "witness": list(res.witness),
            "method": res.method, "lower_bound_only": res.is_lower_bound}, EXIT_OK


def cmd_experiment(cfg):
    if cfg.name != "excess-invariance":
        raise UsageError(f"unknown experiment {cfg.name!r} (available: excess-invariance)")
    conf = excess.ExperimentConfig(max_dim=cfg.max_dim, max_m=cfg.max_m)
    rep = excess.excess_invariance_trial(conf, cfg.trials, cfg.seed, cfg.workers)
    report = {"command": "experiment", "experiment": cfg.name, **rep.to_dict()}
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "excess_invariance.json").write_text(emit_report(report, "json"))
        (out / "excess_invariance.csv").write_text(emit_report(report, "csv"))
    return report, EXIT_OK if rep.all_validated else EXIT_NEGATIVE


def cmd_gallery(cfg):
    if cfg.name not in gallery.ENTRIES:
        raise UsageError(f"unknown gallery entry {cfg.name!r} "
                         f"(available: {', '.join(sorted(gallery.ENTRIES))})")
    entry = gallery.ENTRIES[cfg.name](cfg.p or 2.0)
    _write_systems(cfg, {f"{entry.name}_F": entry.F, f"{entry.name}_G": entry.G})
    expected = {k: getattr(v, "value", v) for k, v in entry.expected.items()}
    return {"command": "gallery", "name": entry.name, "F": entry.F.to_json(),
            "G": entry.G.to_json(), "expected": expected}, EXIT_OK


def _write_systems(cfg, systems: dict) -> None:
    if not cfg.out_dir:
        return
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, S in systems.items():
        (out / f"{name}.json").write_text(json.dumps(S.to_json(), sort_keys=True, indent=2) + "\n")


HANDLERS = {
    "validate": cmd_validate, "bounds": cmd_bounds, "dual-check": cmd_dual_check,
    "canonical-dual": cmd_canonical_dual, "parametrize-dual": cmd_parametrize_dual,
    "approx-cert": cmd_approx_cert, "factorize": cmd_factorize, "neumann": cmd_neumann,
    "perturb": cmd_perturb, "excess": cmd_excess, "experiment": cmd_experiment,
    "gallery": cmd_gallery,
}


def run(cfg: CommandConfig, stdout=None) -> int:
    """Execute one command, write its report, and return the exit code."""
    stdout = stdout or sys.stdout
    try:
        for path in (cfg.f, cfg.g, cfg.h, cfg.u, cfg.v):
            if path is not None and not os.path.exists(path):
                raise UsageError(f"{path}: no such file")
        report, code = HANDLERS[cfg.command](cfg)
        text = emit_report(report, cfg.format)
        if cfg.output:
            Path(cfg.output).write_text(text)
        else:
            stdout.write(text)
        return code
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NormConditionViolated, ConditionOperatorSingular, NotInvertible) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except FrameLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


# ------------------------------------------------------------------ parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _horizons(text: str) -> tuple:
    try:
        hs = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad horizon list {text!r}")
    if not hs or any(h < 1 for h in hs) or list(hs) != sorted(set(hs)):
        raise argparse.ArgumentTypeError("horizons must be increasing positive integers")
    return hs


def build_parser() -> argparse.ArgumentParser:
    default_seed = int(os.environ.get("FRAMELAB_SEED", "0") or 0)
    common = _Parser(add_help=False)
    common.add_argument("--p", type=float, default=None, help="override the exponent p")
    common.add_argument("--seed", type=int, default=default_seed,
                        help="random seed (default: $FRAMELAB_SEED or 0)")
    common.add_argument("--horizons", type=_horizons, default=DEFAULT_HORIZONS,
                        help="compression horizons for l^p(N), e.g. 4,8,16,32,64")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--out-dir", help="directory for generated frame-system files")
    common.add_argument("--format", choices=("json", "csv", "human"), default="json")
    common.add_argument("--probes", type=int, default=32, help="random probes for duality checks")

    parser = _Parser(prog="framelab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, *flags):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        for flag in flags:
            sp.add_argument(f"--{flag}", help=f"{flag.upper()} file (JSON)")
        return sp

    add("validate", "check the p-ABS and p-ASF properties", "f")
    add("bounds", "certified analysis/synthesis/frame bounds", "f")
    add("dual-check", "check exact duality of F and G", "f", "g")
    add("canonical-dual", "canonical duals of a p-ASF", "f")
    add("parametrize-dual", "dual from operators U (X -> l^p) and V (l^p -> X)", "f", "u", "v")
    add("approx-cert", "certify approximate duality of F and G", "f", "g")
    add("factorize", "factorize a p-ABS, or an approximate dual pair with --g", "f", "g")
    sp = add("neumann", "Neumann refinement of an approximate dual", "f", "g")
    sp.add_argument("--depth", type=int, default=1)
    add("perturb", "approximate duals from a perturbed p-ASF", "h", "g", "f")
    sp = add("excess", "p-excess of a finite system", "f")
    sp.add_argument("--greedy", action="store_true", help="greedy lower bound instead of brute force")
    sp = add("experiment", "run an experiment")
    sp.add_argument("name", help="experiment name (excess-invariance)")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--max-dim", type=int, default=3)
    sp.add_argument("--max-m", type=int, default=6)
    sp.add_argument("--workers", type=int, default=1)
    sp = add("gallery", "export a worked example")
    sp.add_argument("name", help="example24 or example25")
    return parser


def parse_config(argv=None) -> CommandConfig:
    ns = build_parser().parse_args(argv)
    known = {k: v for k, v in vars(ns).items() if k in CommandConfig.__dataclass_fields__}
    return CommandConfig(**known)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
