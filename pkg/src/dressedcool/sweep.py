"""1-D parameter scans with fixed tabular output and optional oracle solves.

A sweep varies exactly one quantity (detuning, decay-rate ratio, mode
frequency, coupling, or drive) over a grid and records the closed-form
steady state, cooling rate, heating coefficient, and validity flag at
every point, optionally alongside a full kernel-solve phonon number.
Rows never abort the scan: any per-point failure becomes an error marker
in that row.  Identical specs produce byte-identical serializations, and
a parallel map gives the same table as the serial loop.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import (
    Heating,
    is_heating,
    rate_set,
    steady_atom,
    steady_phonon,
    validity_report,
)
from .errors import (
    DegenerateRatesError,
    InvalidGridError,
    InvalidParamsError,
    OracleError,
    UnknownPresetError,
    ZeroCouplingError,
)
from .lindblad import converged_steady_state
from .params import PhysicalParams

SWEEP_VARIABLES = ("delta", "gamma_ratio", "nu", "eta", "omega")
GAMMA_ZERO_RULES = ("track_gamma_minus", "fixed")

# Canonical column order; "x" leads and "error" trails unconditionally.
VALUE_COLUMNS = ("n_s", "rz_s", "sz_s", "two_sz_s", "c", "a_plus_rate")
HEATING_SENTINEL = "HEATING"


def grid_from_range(lo: float, hi: float, count: int) -> tuple[float, ...]:
    """Inclusive evenly spaced grid, as plain floats."""
    if count < 1:
        raise InvalidGridError(f"grid count must be >= 1, got {count}")
    return tuple(float(v) for v in np.linspace(float(lo), float(hi), count))


def _checked_grid(values) -> tuple[float, ...]:
    grid = tuple(float(v) for v in values)
    if not grid:
        raise InvalidGridError("sweep grid is empty")
    if not all(np.isfinite(grid)):
        raise InvalidGridError("sweep grid contains non-finite values")
    diffs = np.diff(grid)
    if len(grid) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise InvalidGridError("sweep grid must be strictly monotone")
    return grid


@dataclass(frozen=True)
class SweepSpec:
    """One scan: base parameters, the swept variable, and its grid.

    gamma_ratio sweeps set gamma_minus = x * gamma_plus and need an
    explicit rule for gamma_zero: "track_gamma_minus" ties it to
    gamma_minus (the symmetric-reservoir convention), "fixed" keeps the
    base value.  observables selects which value columns appear; order
    stays canonical regardless.  oracle=True adds a kernel-solve phonon
    column (skipped on heating rows, where no stationary state exists).
    """

    base: PhysicalParams
    variable: str
    grid: tuple[float, ...]
    gamma_zero_rule: str | None = None
    observables: tuple[str, ...] = VALUE_COLUMNS
    oracle: bool = False
    oracle_n_max: int = 12
    label: str = ""
    preset: str | None = None

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise InvalidParamsError(
                "variable",
                f"unknown sweep variable {self.variable!r}; "
                f"choose from {', '.join(SWEEP_VARIABLES)}")
        if self.variable == "gamma_ratio":
            if self.gamma_zero_rule not in GAMMA_ZERO_RULES:
                raise InvalidParamsError(
                    "gamma_zero_rule",
                    "gamma_ratio sweeps must state how gamma_zero follows "
                    f"the ratio: one of {', '.join(GAMMA_ZERO_RULES)}")
        elif self.gamma_zero_rule is not None:
            raise InvalidParamsError(
                "gamma_zero_rule",
                f"gamma_zero_rule only applies to gamma_ratio sweeps, "
                f"not {self.variable!r}")
        object.__setattr__(self, "grid", _checked_grid(self.grid))
        bad = [o for o in self.observables if o not in VALUE_COLUMNS]
        if bad:
            raise InvalidParamsError(
                "observables",
                f"unknown observables {bad}; choose from {VALUE_COLUMNS}")
        # canonical order, duplicates dropped
        object.__setattr__(
            self, "observables",
            tuple(o for o in VALUE_COLUMNS if o in self.observables))
        if self.oracle and self.oracle_n_max < 2:
            raise InvalidParamsError(
                "oracle_n_max", f"needs >= 2, got {self.oracle_n_max}")

    @property
    def columns(self) -> tuple[str, ...]:
        cols = ("x",) + self.observables + ("valid",)
        if self.oracle:
            cols = cols + ("oracle_n_s",)
        return cols + ("error",)

    def params_at(self, x: float) -> PhysicalParams:
        """Base parameters with the swept variable set to x."""
        if self.variable == "gamma_ratio":
            gm = x * self.base.gamma_plus
            gz = (gm if self.gamma_zero_rule == "track_gamma_minus"
                  else self.base.gamma_zero)
            return self.base.replace(gamma_minus=gm, gamma_zero=gz)
        return self.base.replace(**{self.variable: x})

    def to_json_dict(self) -> dict:
        return {
            "base": self.base.as_dict(),
            "variable": self.variable,
            "grid": list(self.grid),
            "gamma_zero_rule": self.gamma_zero_rule,
            "observables": list(self.observables),
            "oracle": self.oracle,
            "oracle_n_max": self.oracle_n_max,
            "label": self.label,
            "preset": self.preset,
        }


@dataclass(frozen=True)
class SweepRow:
    x: float
    n_s: float | Heating | None = None
    rz_s: float | None = None
    sz_s: float | None = None
    two_sz_s: float | None = None
    c: float | None = None
    a_plus_rate: float | None = None
    valid: bool | None = None
    oracle_n_s: float | None = None
    error: str | None = None


def _marker(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _eval_point(spec: SweepSpec, x: float) -> SweepRow:
    """Evaluate one grid point; every failure ends up in the error field."""
    try:
        p = spec.params_at(x)
    except InvalidParamsError as exc:
        return SweepRow(x=x, error=_marker(exc))

    fields: dict = {"x": x}
    errors: list[str] = []
    try:
        atom = steady_atom(p)
        rates = rate_set(p)
        fields.update(rz_s=atom.rz, sz_s=atom.sz, two_sz_s=2.0 * atom.sz,
                      c=rates.cooling_rate, a_plus_rate=rates.a_rate_plus,
                      valid=validity_report(p).overall)
    except DegenerateRatesError as exc:
        errors.append(_marker(exc))
    else:
        try:
            fields["n_s"] = steady_phonon(p)
        except ZeroCouplingError as exc:
            errors.append(_marker(exc))

    ns = fields.get("n_s")
    if spec.oracle and ns is not None and not is_heating(ns):
        try:
            run = converged_steady_state(p, n_max_start=spec.oracle_n_max)
            fields["oracle_n_s"] = run.n
        except (OracleError, InvalidParamsError) as exc:
            errors.append("oracle " + _marker(exc))

    if errors:
        fields["error"] = "; ".join(errors)
    return SweepRow(**fields)


def _cell(value) -> str:
    if value is None:
        return ""
    if is_heating(value):
        return HEATING_SENTINEL
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_value(value):
    if is_heating(value):
        return HEATING_SENTINEL
    return value


@dataclass(eq=False)
class SweepTable:
    """Result of one sweep: rows in ascending-x order plus the spec."""

    spec: SweepSpec
    rows: tuple[SweepRow, ...]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.spec.columns

    def column(self, name: str) -> list:
        if name not in self.columns:
            raise KeyError(name)
        return [getattr(row, name) for row in self.rows]

    @property
    def error_markers(self) -> list[str]:
        return [row.error for row in self.rows if row.error is not None]

    @property
    def has_oracle_errors(self) -> bool:
        return any(m.startswith("oracle ") for m in self.error_markers)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(getattr(row, c)) for c in self.columns])
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_json_dict(),
            "columns": list(self.columns),
            "rows": [[_json_value(getattr(row, c)) for c in self.columns]
                     for row in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def run_sweep(spec: SweepSpec, *, workers: int | None = None) -> SweepTable:
    """Evaluate every grid point and assemble rows in ascending-x order.

    workers > 1 maps points over a process pool; the table is assembled
    in grid-index order afterwards, so the result is identical to the
    serial one.  Per-point failures never raise: they land in the rows.
    """
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_eval_point, [spec] * len(spec.grid),
                                 spec.grid, chunksize=16))
    else:
        rows = [_eval_point(spec, x) for x in spec.grid]
    if len(spec.grid) > 1 and spec.grid[0] > spec.grid[-1]:
        rows.reverse()
    return SweepTable(spec=spec, rows=tuple(rows))


# --- figure presets ----------------------------------------------------------
#
# Grids bracket all features of interest; each preset pins the physics,
# while the axis ranges are implementation choices.  Detuning scans run
# [-10, 10] with 401 points, ratio scans
# [0.01, 1.5] with 300 points.  Each preset is a family of curves, one
# per mode frequency in {2, 6, 12} (units of the quoted reference rate).

PRESET_NAMES = ("fig1", "fig1e", "fig2", "fig3")
_PRESET_NUS = (2.0, 6.0, 12.0)
_DELTA_GRID = (-10.0, 10.0, 401)
_RATIO_GRID = (0.01, 1.5, 300)


def _detuning_family(name: str, gamma_side: float, *, oracle: bool,
                     oracle_n_max: int) -> tuple[SweepSpec, ...]:
    grid = grid_from_range(*_DELTA_GRID)
    return tuple(
        SweepSpec(
            base=PhysicalParams(omega=5.0, delta=0.0, nu=nu, eta=0.1,
                                gamma_plus=1.0, gamma_minus=gamma_side,
                                gamma_zero=gamma_side),
            variable="delta", grid=grid, oracle=oracle,
            oracle_n_max=oracle_n_max,
            label=f"{name}:nu={nu:g}", preset=name)
        for nu in _PRESET_NUS)


def _ratio_family(name: str, delta: float, *, oracle: bool,
                  oracle_n_max: int) -> tuple[SweepSpec, ...]:
    grid = grid_from_range(*_RATIO_GRID)
    return tuple(
        SweepSpec(
            base=PhysicalParams(omega=5.0, delta=delta, nu=nu, eta=0.1,
                                gamma_plus=1.0, gamma_minus=1.0,
                                gamma_zero=1.0),
            variable="gamma_ratio", grid=grid,
            gamma_zero_rule="track_gamma_minus", oracle=oracle,
            oracle_n_max=oracle_n_max,
            label=f"{name}:nu={nu:g}", preset=name)
        for nu in _PRESET_NUS)


_PRESET_REFERENCE = {"fig1": "gamma", "fig1e": "gamma_plus",
                     "fig2": "gamma_plus", "fig3": "gamma_plus"}
_PRESET_NOTES = {
    "fig1": "free-space-like reservoir: all three rates equal; detuning scan",
    "fig1e": "structured reservoir, side rates 0.2 gamma_plus; detuning scan",
    "fig2": "resonant drive, gamma_zero tied to gamma_minus; ratio scan",
    "fig3": "red-detuned drive delta = -omega, otherwise as fig2; ratio scan",
}


def preset_sweeps(name: str, *, oracle: bool = False,
                  oracle_n_max: int = 12) -> tuple[SweepSpec, ...]:
    """The named figure family as one spec per curve (one per nu)."""
    if name == "fig1":
        return _detuning_family("fig1", 1.0, oracle=oracle,
                                oracle_n_max=oracle_n_max)
    if name == "fig1e":
        return _detuning_family("fig1e", 0.2, oracle=oracle,
                                oracle_n_max=oracle_n_max)
    if name == "fig2":
        return _ratio_family("fig2", 0.0, oracle=oracle,
                             oracle_n_max=oracle_n_max)
    if name == "fig3":
        return _ratio_family("fig3", -5.0, oracle=oracle,
                             oracle_n_max=oracle_n_max)
    raise UnknownPresetError(
        f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")


def list_presets() -> dict[str, dict]:
    """Every preset's full parameterization, keyed by name."""
    out: dict[str, dict] = {}
    for name in PRESET_NAMES:
        specs = preset_sweeps(name)
        first = specs[0]
        out[name] = {
            "note": _PRESET_NOTES[name],
            "reference_rate": _PRESET_REFERENCE[name],
            "variable": first.variable,
            "gamma_zero_rule": first.gamma_zero_rule,
            "grid_min": first.grid[0],
            "grid_max": first.grid[-1],
            "grid_count": len(first.grid),
            "curves": [{"label": s.label, "base": s.base.as_dict()}
                       for s in specs],
        }
    return out
