"""Command-line front end.

Subcommands: design, tune, optimize, continue, rsm-path, surface.  Runs are
driven by an INI-style config whose [spot] keys mirror the engine's config
fields verbatim, with [designControl], [modelControl] and [optimizerControl]
sub-blocks passed through to the corresponding components.  Exit codes:
0 success, 2 unusable config or arguments, 3 infeasible evaluation budget,
4 corrupt bundle.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from .bundle import CorruptBundleError, archive_lines, load_bundle, save_bundle
from .design import DesignControl, ParamSpace, make_lhd, make_uniform
from .engine import InfeasibleBudgetError, SpotConfig, spot, spot_loop
from .objectives import get_objective
from .rsm import descent_path, fit_rsm


class ConfigError(Exception):
    pass


_SPOT_KEYS = {
    "funEvals",
    "types",
    "design",
    "model",
    "optimizer",
    "noise",
    "OCBA",
    "OCBAbudget",
    "replicates",
    "seedFun",
    "seedSPOT",
    "duplicate",
    "plots",
}
_RUN_KEYS = {"fun", "lower", "upper", "types"}


def _fmt(v: float) -> str:
    return repr(float(v))


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"cannot parse {what}: {text!r}") from None


def _coerce(text: str):
    s = text.strip()
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "na", ""):
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    if "," in s:
        return [_coerce(tok) for tok in s.split(",")]
    return s


def _read_ini(path: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep key case, the field names are case-sensitive
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    except configparser.Error as err:
        raise ConfigError(f"malformed config {path}: {err}") from None
    return cp


def _control_dict(cp: configparser.ConfigParser, section: str) -> dict:
    if not cp.has_section(section):
        return {}
    return {key: _coerce(val) for key, val in cp.items(section)}


def _run_section(cp: configparser.ConfigParser) -> dict:
    if not cp.has_section("run"):
        raise ConfigError("config needs a [run] section with fun, lower and upper")
    run = dict(cp.items("run"))
    unknown = set(run) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown [run] keys: {', '.join(sorted(unknown))}")
    for key in ("fun", "lower", "upper"):
        if key not in run:
            raise ConfigError(f"[run] is missing {key!r}")
    out = {
        "fun": run["fun"].strip(),
        "lower": _parse_floats(run["lower"], "[run] lower"),
        "upper": _parse_floats(run["upper"], "[run] upper"),
        "types": [],
    }
    if "types" in run:
        out["types"] = [tok.strip() for tok in run["types"].split(",") if tok.strip()]
    if len(out["lower"]) != len(out["upper"]):
        raise ConfigError("[run] lower and upper lengths differ")
    if out["types"] and len(out["types"]) != len(out["lower"]):
        raise ConfigError("[run] types length does not match the bounds")
    return out


def _spot_config(cp: configparser.ConfigParser, run: dict) -> dict:
    fields: dict = {"types": tuple(run["types"])}
    if cp.has_section("spot"):
        items = dict(cp.items("spot"))
        unknown = set(items) - _SPOT_KEYS
        if unknown:
            raise ConfigError(f"unknown [spot] keys: {', '.join(sorted(unknown))}")
        for key, val in items.items():
            fields[key] = _coerce(val)
    fields["designControl"] = _control_dict(cp, "designControl")
    fields["modelControl"] = _control_dict(cp, "modelControl")
    fields["optimizerControl"] = _control_dict(cp, "optimizerControl")
    if "types" in fields and not isinstance(fields["types"], tuple):
        raise ConfigError("types belong in the [run] section")
    return fields


def _build_spot_config(fields: dict) -> SpotConfig:
    try:
        return SpotConfig(**fields)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad run settings: {err}") from None


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _meta_from_config(fields: dict, run: dict) -> dict:
    cfg_json = dict(fields)
    cfg_json["types"] = list(cfg_json.get("types", ()))
    return {
        "config": cfg_json,
        "fun": run["fun"],
        "lower": run["lower"],
        "upper": run["upper"],
    }


def _write_rows(path: Optional[str], lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def cmd_design(args) -> int:
    cp = _read_ini(args.config)
    run = _run_section(cp)
    fields = _spot_config(cp, run)
    dc = dict(fields.get("designControl", {}))
    if args.seed is not None:
        dc["seed"] = args.seed
    control = DesignControl(
        size=int(dc.get("size", 10)),
        retries=int(dc.get("retries", 100)),
        replicates=int(dc.get("replicates", 1)),
        seed=dc.get("seed"),
        types=tuple(run["types"]),
    )
    space = ParamSpace(run["lower"], run["upper"], tuple(run["types"]))
    method = fields.get("design", "lhd")
    if method == "lhd":
        mat = make_lhd(None, space, control)
    elif method == "uniform":
        mat = make_uniform(None, space, control)
    else:
        raise ConfigError(f"unknown design {method!r}")
    header = ",".join(f"x{i + 1}" for i in range(space.dim))
    lines = [header] + [",".join(_fmt(v) for v in row) for row in mat]
    _write_rows(args.out, lines)
    return 0


def _run_spot(args, force_deterministic: bool) -> int:
    cp = _read_ini(args.config)
    run = _run_section(cp)
    fields = _spot_config(cp, run)
    if force_deterministic:
        fields["noise"] = False
        fields.setdefault("optimizer", "local")
    if args.seed is not None:
        fields["seedSPOT"] = args.seed
    cfg = _build_spot_config(fields)
    fun = get_objective(run["fun"])
    started = _now()
    result = spot(None, fun, run["lower"], run["upper"], cfg)
    meta = _meta_from_config(fields, run)
    meta.update(
        {
            "xbest": [float(v) for v in result.xbest],
            "ybest": result.ybest,
            "msg": result.msg,
            "created": started,
            "finished": _now(),
        }
    )
    if cfg.plots:
        meta["progress"] = list(np.minimum.accumulate(result.y[:, 0]))
    save_bundle(args.out, result.x, result.y, result.seeds, result.replicates, meta)
    print(f"xbest: {result.xbest.tolist()}")
    print(f"ybest: {result.ybest}")
    print(f"count: {result.count}")
    print(f"msg: {result.msg}")
    print(f"bundle: {args.out}")
    return 0


def cmd_tune(args) -> int:
    return _run_spot(args, force_deterministic=False)


def cmd_optimize(args) -> int:
    return _run_spot(args, force_deterministic=True)


def cmd_continue(args) -> int:
    data = load_bundle(args.bundle)
    meta = data["meta"]
    try:
        fields = dict(meta["config"])
        fun_name = meta["fun"]
        lower, upper = meta["lower"], meta["upper"]
    except KeyError as err:
        raise CorruptBundleError(f"metadata is missing {err}") from None
    fields["types"] = tuple(fields.get("types", ()))
    fields["funEvals"] = args.funEvals
    cfg = _build_spot_config(fields)
    fun = get_objective(fun_name)
    result = spot_loop(data["x"], data["y"], fun, lower, upper, cfg)
    n_old = data["x"].shape[0]
    new_meta = dict(meta)
    new_meta["config"] = dict(fields, types=list(fields["types"]))
    new_meta.update(
        {
            "xbest": [float(v) for v in result.xbest],
            "ybest": result.ybest,
            "msg": result.msg,
            "finished": _now(),
        }
    )
    if cfg.plots:
        new_meta["progress"] = list(np.minimum.accumulate(result.y[:, 0]))
    seeds = list(data["seeds"]) + result.seeds[n_old:]
    save_bundle(
        args.out or args.bundle,
        result.x,
        result.y,
        seeds,
        result.replicates,
        new_meta,
        archive_prefix=data["data_lines"],
    )
    print(f"rows: {result.count} (kept {n_old})")
    print(f"ybest: {result.ybest}")
    return 0


def cmd_rsm_path(args) -> int:
    data = load_bundle(args.bundle)
    finite = np.isfinite(data["y"][:, 0])
    fit = fit_rsm(data["x"][finite], data["y"][finite])
    path = descent_path(fit)
    d = path.x.shape[1]
    header = ",".join([f"x{i + 1}" for i in range(d)] + ["y"])
    lines = [header]
    for row, val in zip(path.x, path.y[:, 0]):
        lines.append(",".join([_fmt(v) for v in row] + [_fmt(val)]))
    _write_rows(args.out, lines)
    return 0


def _surface_eval(args):
    if args.bundle:
        data = load_bundle(args.bundle)
        meta = data["meta"]
        try:
            lower, upper = meta["lower"], meta["upper"]
            cfg_fields = meta["config"]
        except KeyError as err:
            raise CorruptBundleError(f"metadata is missing {err}") from None
        from .engine import _MODELS, _resolve  # reuse the model registry

        fitter = _resolve(_MODELS, cfg_fields.get("model", "kriging"), "model")
        control = dict(cfg_fields.get("modelControl", {}))
        control.setdefault("types", tuple(cfg_fields.get("types", ())) or None)
        control.setdefault("seed", cfg_fields.get("seedSPOT", 1))
        finite = np.isfinite(data["y"][:, 0])
        fit = fitter(data["x"][finite], data["y"][finite], control)
        return (lambda pts: np.asarray(fit.predict(pts)).reshape(-1)), lower, upper, None
    cp = _read_ini(args.config)
    run = _run_section(cp)
    fun = get_objective(run["fun"])
    at = None
    if cp.has_section("surface") and cp.has_option("surface", "at"):
        at = _parse_floats(cp.get("surface", "at"), "[surface] at")
    return (lambda pts: np.asarray(fun(pts)).reshape(-1)), run["lower"], run["upper"], at


def cmd_surface(args) -> int:
    if bool(args.bundle) == bool(args.config):
        raise ConfigError("surface needs exactly one of --bundle or --config")
    evaluate, lower, upper, at = _surface_eval(args)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = lower.size
    try:
        di, dj = (int(tok) for tok in args.dims.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse --dims {args.dims!r}") from None
    if not (1 <= di <= d and 1 <= dj <= d) or di == dj:
        raise ConfigError(f"--dims must name two distinct axes in 1..{d}")
    if args.grid < 2:
        raise ConfigError("--grid must be at least 2")
    base = (lower + upper) / 2.0
    if at is not None:
        if len(at) != d:
            raise ConfigError("[surface] at length does not match the bounds")
        base = np.asarray(at, dtype=float)
    gi = np.linspace(lower[di - 1], upper[di - 1], args.grid)
    gj = np.linspace(lower[dj - 1], upper[dj - 1], args.grid)
    pts = np.tile(base, (args.grid * args.grid, 1))
    k = 0
    for vi in gi:
        for vj in gj:
            pts[k, di - 1] = vi
            pts[k, dj - 1] = vj
            k += 1
    vals = evaluate(pts)
    lines = [f"x{di},x{dj},y"]
    for row, val in zip(pts, vals):
        lines.append(
            ",".join([_fmt(row[di - 1]), _fmt(row[dj - 1]), _fmt(val)])
        )
    _write_rows(args.out, lines)
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqtune",
        description="Sequential surrogate-model-based optimization and tuning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="emit a space-filling design as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_design)

    for name, handler, blurb in (
        ("tune", cmd_tune, "tune a noisy objective with the full loop"),
        ("optimize", cmd_optimize, "optimize a deterministic objective"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int)
        p.set_defaults(handler=handler)

    p = sub.add_parser("continue", help="resume a bundle to a larger budget")
    p.add_argument("--bundle", required=True)
    p.add_argument("--funEvals", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_continue)

    p = sub.add_parser("rsm-path", help="steepest-descent path from a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_rsm_path)

    p = sub.add_parser("surface", help="grid-evaluate a model or objective")
    p.add_argument("--bundle")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--dims", default="1,2")
    p.set_defaults(handler=cmd_surface)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except InfeasibleBudgetError as err:
        print(f"budget error: {err}", file=sys.stderr)
        return 3
    except CorruptBundleError as err:
        print(f"bundle error: {err}", file=sys.stderr)
        return 4
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
