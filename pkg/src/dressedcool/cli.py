"""Command-line front end.

Subcommands: steady, trajectory, sweep, validate, presets.  Options come
from an optional flat config file plus flags (flags win); every output
document embeds the fully resolved configuration, so re-running from
that echo reproduces the output byte for byte.  Exit codes: 0 clean
(heating results included), 1 invalid input, 2 physically meaningless
request, 3 oracle (numerical) failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analytic import (
    DressedInit,
    is_heating,
    rate_set,
    steady_atom,
    steady_phonon,
    trajectory,
    validity_report,
)
from .config import (
    PARAM_KEY_NAMES,
    REQUIRED,
    RunConfig,
    SCHEMAS,
    load_config_file,
    resolve_config,
    schema_for,
)
from .errors import (
    ConfigError,
    DressedCoolError,
    HeatingRunError,
    InvalidGridError,
    InvalidParamsError,
    OracleError,
    UnknownPresetError,
)
from .lindblad import converged_steady_state, reduced_phonon_evolve
from .sweep import (
    HEATING_SENTINEL,
    SweepSpec,
    grid_from_range,
    list_presets,
    preset_sweeps,
    run_sweep,
)

EXIT_OK = 0
EXIT_INVALID_INPUT = 1
EXIT_PHYSICS = 2
EXIT_ORACLE = 3

_SUBCOMMAND_HELP = {
    "steady": "closed-form stationary state, rates, and validity checks",
    "trajectory": "closed-form time series of inversion, coherence, phonons",
    "sweep": "1-D parameter scans (figure presets or custom grids)",
    "validate": "compare the closed form against a full kernel solve",
    "presets": "list the built-in sweep presets",
}


# --- serialization helpers ----------------------------------------------------

def _jsonable(value):
    """Recursively make a document strict-JSON safe and deterministic."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if is_heating(value):
        return HEATING_SENTINEL
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, complex):
        return {"re": _jsonable(value.real), "im": _jsonable(value.imag)}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return repr(value)       # "inf" / "-inf" / "nan" as strings
    if isinstance(value, (np.bool_, np.integer)):
        return value.item()
    return value


def _dump_json(doc) -> str:
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if is_heating(value):
        return HEATING_SENTINEL
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _flatten(doc, prefix="") -> list[tuple[str, str]]:
    """Nested dict/list to sorted dotted key,value pairs for scalar CSV."""
    rows: list[tuple[str, str]] = []
    if isinstance(doc, dict):
        for name in sorted(doc):
            rows.extend(_flatten(doc[name], f"{prefix}{name}."))
    elif isinstance(doc, (list, tuple)):
        for i, item in enumerate(doc):
            rows.extend(_flatten(item, f"{prefix}{i}."))
    else:
        rows.append((prefix[:-1], _csv_cell(doc)))
    return rows


def _scalar_csv(doc) -> str:
    lines = ["key,value"]
    lines += [f"{k},{v}" for k, v in _flatten(_jsonable(doc))]
    return "\n".join(lines) + "\n"


def _config_comment(cfg: RunConfig) -> str:
    blob = json.dumps(_jsonable(cfg.as_embed_dict()), sort_keys=True)
    return f"# config = {blob}\n"


def _emit(cfg: RunConfig, text: str) -> None:
    target = cfg["output"]
    if target == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")


# --- steady -------------------------------------------------------------------

def cmd_steady(cfg: RunConfig) -> int:
    p = cfg.params()
    atom = steady_atom(p)
    rates = rate_set(p)
    report = validity_report(p, margin=cfg["margin"])
    ns = steady_phonon(p)
    doc = {
        "config": cfg.as_embed_dict(),
        "result": {
            "n_s": ns,
            "rz_s": atom.rz,
            "sz_s": atom.sz,
            "two_sz_s": 2.0 * atom.sz,
            "r11_s": atom.r11,
            "r22_s": atom.r22,
            "cooling_rate": rates.cooling_rate,
            "rates": {
                "gamma_perp": rates.gamma_perp,
                "gamma_s": rates.gamma_s,
                "gamma_0_eff": rates.gamma_0_eff,
                "a_minus": rates.a_minus,
                "a_plus": rates.a_plus,
                "a_rate_minus": rates.a_rate_minus,
                "a_rate_plus": rates.a_rate_plus,
            },
            "validity": report.as_dict(),
        },
    }
    if cfg["format"] == "json":
        _emit(cfg, _dump_json(doc))
    else:
        _emit(cfg, "# steady report\n" + _config_comment(cfg)
              + _scalar_csv(doc["result"]))
    return EXIT_OK


# --- trajectory ---------------------------------------------------------------

def cmd_trajectory(cfg: RunConfig) -> int:
    p = cfg.params()
    if not math.isfinite(cfg["t_end"]) or cfg["t_end"] <= 0:
        raise InvalidGridError(f"t_end must be > 0, got {cfg['t_end']}")
    if cfg["samples"] < 2:
        raise InvalidGridError(f"samples must be >= 2, got {cfg['samples']}")
    times = np.linspace(0.0, cfg["t_end"], cfg["samples"])
    init = DressedInit(rz=cfg["rz0"],
                       rplus=complex(cfg["re_rplus0"], cfg["im_rplus0"]),
                       n=cfg["n0"])
    traj = trajectory(p, init, times)
    columns = ["t", "rz", "re_rplus", "im_rplus", "n"]
    series = [times, traj.rz, np.real(traj.rplus), np.imag(traj.rplus),
              traj.n]
    if cfg["ode"]:
        columns.append("n_ode")
        series.append(reduced_phonon_evolve(p, cfg["n0"], times))
    rows = list(zip(*series))
    if cfg["format"] == "csv":
        lines = [",".join(_csv_cell(float(v)) for v in row) for row in rows]
        _emit(cfg, _config_comment(cfg) + ",".join(columns) + "\n"
              + "\n".join(lines) + "\n")
    else:
        doc = {
            "config": cfg.as_embed_dict(),
            "columns": columns,
            "rows": [[float(v) for v in row] for row in rows],
            "summary": {
                "n_steady": traj.n_steady,
                "rz_steady": traj.rz_steady,
                "cooling_rate": traj.cooling_rate,
                "phonon_growing": traj.phonon_growing,
            },
        }
        _emit(cfg, _dump_json(doc))
    return EXIT_OK


# --- sweep --------------------------------------------------------------------

def _slug(label: str) -> str:
    out = []
    for ch in label:
        out.append(ch if ch.isalnum() or ch in "-_" else "_")
    return "".join(out)


# neutral values of the custom-sweep keys; a preset run must leave all of
# these alone, but re-feeding an embedded config echo (which spells the
# neutral values out) stays legal
_CUSTOM_NEUTRAL = {"variable": "", "grid_min": 0.0, "grid_max": 0.0,
                   "grid_count": 0, "gamma_zero_rule": ""}


def _sweep_specs(cfg: RunConfig) -> tuple[SweepSpec, ...]:
    if cfg["preset"]:
        clash = sorted(
            [k for k in PARAM_KEY_NAMES if cfg[k] is not None]
            + [k for k, neutral in _CUSTOM_NEUTRAL.items()
               if cfg[k] != neutral])
        if clash:
            raise ConfigError(
                "preset sweeps take their parameters from the preset; "
                f"remove: {', '.join(clash)}")
        return preset_sweeps(cfg["preset"], oracle=cfg["oracle"],
                             oracle_n_max=cfg["oracle_n_max"])
    missing = [k for k in PARAM_KEY_NAMES if cfg[k] is None]
    if missing:
        raise ConfigError(
            f"custom sweeps need the base parameters; missing: "
            f"{', '.join(missing)}")
    if not cfg["variable"]:
        raise ConfigError("custom sweeps need 'variable'")
    for k in ("grid_min", "grid_max", "grid_count"):
        if k not in cfg.provided:
            raise ConfigError(f"custom sweeps need '{k}'")
    spec = SweepSpec(
        base=cfg.params(),
        variable=cfg["variable"],
        grid=grid_from_range(cfg["grid_min"], cfg["grid_max"],
                             cfg["grid_count"]),
        gamma_zero_rule=cfg["gamma_zero_rule"] or None,
        oracle=cfg["oracle"],
        oracle_n_max=cfg["oracle_n_max"],
        label=cfg["variable"],
    )
    return (spec,)


def cmd_sweep(cfg: RunConfig) -> int:
    specs = _sweep_specs(cfg)
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    markers: list[str] = []
    for spec in specs:
        table = run_sweep(spec, workers=cfg["workers"])
        markers.extend(table.error_markers)
        path = out_dir / f"{_slug(spec.label)}.{cfg['format']}"
        if cfg["format"] == "csv":
            text = (_config_comment(cfg)
                    + "# spec = "
                    + json.dumps(_jsonable(spec.to_json_dict()),
                                 sort_keys=True)
                    + "\n" + table.to_csv())
        else:
            doc = {"config": cfg.as_embed_dict(), **table.to_json_dict()}
            text = _dump_json(doc)
        path.write_text(text, encoding="utf-8")
        sys.stdout.write(f"wrote {path}\n")
    if markers:
        sys.stderr.write(f"{len(markers)} row error marker(s); first: "
                         f"{markers[0]}\n")
        if any(m.startswith("oracle ") for m in markers):
            return EXIT_ORACLE
        return EXIT_PHYSICS
    return EXIT_OK


# --- validate -----------------------------------------------------------------

def cmd_validate(cfg: RunConfig) -> int:
    p = cfg.params()
    ns = steady_phonon(p)
    if is_heating(ns):
        raise HeatingRunError(
            "cannot validate at a heating point: no stationary phonon "
            "number exists there")
    atom = steady_atom(p)
    report = validity_report(p, margin=cfg["margin"])
    warnings: list[str] = []
    if not report.overall:
        failing = [c.name for c in report.checks if not c.satisfied]
        warnings.append(
            "parameters sit outside the stated validity regime "
            f"(failing: {', '.join(failing)}); comparing anyway")
        sys.stderr.write(f"warning: {warnings[0]}\n")
    run = converged_steady_state(p, n_max_start=cfg["n_max"],
                                 dim_cap=cfg["dim_cap"])
    oracle = run.result
    rel = abs(oracle.n - ns) / ns
    doc = {
        "config": cfg.as_embed_dict(),
        "analytic": {"n_s": ns, "rz_s": atom.rz},
        "oracle": {
            "n_s": oracle.n,
            "rz_s": oracle.rz,
            "n_max": oracle.n_max,
            "convergence_history": [list(step) for step in run.history],
            "rel_change": run.rel_change,
            "residual": oracle.residual,
            "rcond": oracle.rcond,
            "tail_mass": oracle.tail_mass,
            "trace_dev": oracle.trace_dev,
            "herm_defect": oracle.herm_defect,
            "min_eig": oracle.min_eig,
        },
        "relative_error": rel,
        "threshold": cfg["threshold"],
        "passed": bool(rel <= cfg["threshold"]),
        "validity_overall": report.overall,
        "warnings": warnings,
    }
    if cfg["format"] == "json":
        _emit(cfg, _dump_json(doc))
    else:
        body = {k: v for k, v in doc.items() if k != "config"}
        _emit(cfg, "# validation report\n" + _config_comment(cfg)
              + _scalar_csv(body))
    return EXIT_OK


# --- presets ------------------------------------------------------------------

def cmd_presets(cfg: RunConfig) -> int:
    doc = {"config": cfg.as_embed_dict(), "presets": list_presets()}
    if cfg["format"] == "json":
        _emit(cfg, _dump_json(doc))
    else:
        _emit(cfg, "# sweep presets\n" + _config_comment(cfg)
              + _scalar_csv(doc["presets"]))
    return EXIT_OK


_COMMANDS = {
    "steady": cmd_steady,
    "trajectory": cmd_trajectory,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "presets": cmd_presets,
}


# --- argument parsing and dispatch ---------------------------------------------

def _bool_arg(raw: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dressedcool",
        description="Laser cooling of a driven emitter in a structured "
                    "reservoir: closed-form model with a full-equation "
                    "cross-check.")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, schema in SCHEMAS.items():
        sub = subparsers.add_parser(name, help=_SUBCOMMAND_HELP[name],
                                    description=_SUBCOMMAND_HELP[name])
        sub.add_argument("--config", metavar="FILE", default=None,
                         help="flat key = value config file (UTF-8, "
                              "# comments); flags override it")
        for key in schema:
            flag = "--" + key.name.replace("_", "-")
            kwargs: dict = {"dest": key.name, "default": None}
            if key.default is REQUIRED:
                note = " (required)"
            else:
                note = f" (default: {_csv_cell(key.default)})"
            kwargs["help"] = key.help + note
            if key.type == "float":
                kwargs["type"] = float
                kwargs["metavar"] = "X"
            elif key.type == "int":
                kwargs["type"] = int
                kwargs["metavar"] = "N"
            elif key.type == "bool":
                kwargs["type"] = _bool_arg
                kwargs["metavar"] = "true|false"
            elif key.type == "choice":
                kwargs["choices"] = key.choices
            sub.add_argument(flag, **kwargs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:           # argparse printed usage already
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID_INPUT
    try:
        file_values = (load_config_file(args.config)
                       if args.config else {})
        flag_values = {key.name: getattr(args, key.name, None)
                       for key in schema_for(args.subcommand)}
        cfg = resolve_config(args.subcommand, file_values, flag_values)
        return _COMMANDS[args.subcommand](cfg)
    except (ConfigError, InvalidParamsError, InvalidGridError,
            UnknownPresetError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID_INPUT
    except OracleError as exc:
        sys.stderr.write(f"oracle error: {exc}\n")
        return EXIT_ORACLE
    except DressedCoolError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PHYSICS
    except OSError as exc:
        sys.stderr.write(f"error: cannot write output: {exc}\n")
        return EXIT_INVALID_INPUT


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
