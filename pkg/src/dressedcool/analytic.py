"""Closed-form cooling model in the dressed basis.

Everything here follows from a secular master equation for the driven
emitter: the two dressed sidebands decay at gamma_plus*cos^4(theta) and
gamma_minus*sin^4(theta), the carrier dephases at (gamma_zero/4)*sin^2(2theta),
and the phonon couples to the dressed dipole with strength eta*omega. After
adiabatic elimination of the fast atomic dynamics the phonon obeys
d<n>/dt = -C <n> + A_plus, which is what the functions below evaluate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRatesError, InvalidGridError, ZeroCouplingError
from .params import DressedFrame, PhysicalParams, dressed_frame

__all__ = [
    "RECOIL_SECOND_MOMENT",
    "HEATING",
    "Heating",
    "is_heating",
    "SteadyAtom",
    "RateSet",
    "DressedInit",
    "BareInit",
    "Trajectory",
    "ValidityCheck",
    "ValidityReport",
    "steady_atom",
    "rate_set",
    "cooling_rate",
    "steady_phonon",
    "trajectory",
    "validity_report",
]

# Second moment of the dipole emission pattern (3/8) * integral of
# x^2 (1 + x^2) over [-1, 1]; weights the recoil diffusion terms.
RECOIL_SECOND_MOMENT = 2.0 / 5.0

# r11 - r22 below this is treated as exact population balance (heating).
_BALANCE_TOL = 1e-14


@dataclass(frozen=True)
class Heating:
    """Marker value: phonon gain exceeds loss, no steady phonon number.

    This is a result, not an error; sweeps and the CLI serialize it as the
    string sentinel "heating".
    """

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "HEATING"


HEATING = Heating()


def is_heating(value) -> bool:
    return isinstance(value, Heating)


@dataclass(frozen=True)
class SteadyAtom:
    """Stationary populations of the dressed levels.

    r11/r22 are the lower/upper dressed-level populations, rz = r22 - r11
    the dressed inversion and sz the bare-basis inversion expectation
    <S_z> = cos(2 theta) * rz / 2.
    """

    r11: float
    r22: float
    rz: float
    sz: float


@dataclass(frozen=True)
class RateSet:
    """Relaxation and phonon-coupling coefficients.

    gamma_perp damps the dressed coherence, gamma_s sets the population
    relaxation (populations relax at 2*gamma_s), gamma_0_eff is the recoil
    diffusion floor. a_minus / a_plus are the complex phonon loss/gain
    coefficients; a_rate_minus / a_rate_plus their real rates (twice the real
    part) and cooling_rate their difference.
    """

    gamma_perp: float
    gamma_s: float
    gamma_0_eff: float
    a_minus: complex
    a_plus: complex
    a_rate_minus: float
    a_rate_plus: float
    cooling_rate: float


def steady_atom(p: PhysicalParams) -> SteadyAtom:
    """Stationary dressed populations from sideband detailed balance.

    Raises
    ------
    DegenerateRatesError
        If gamma_plus*cos^4(theta) + gamma_minus*sin^4(theta) = 0 (both
        sideband transitions dark): no unique atomic steady state exists.
    """
    f = dressed_frame(p)
    down = p.gamma_plus * f.cos4_theta   # upper -> lower dressed decay weight
    up = p.gamma_minus * f.sin4_theta    # lower -> upper dressed pump weight
    total = down + up
    if total <= 0.0:
        raise DegenerateRatesError(
            "gamma_plus*cos^4(theta) + gamma_minus*sin^4(theta) = 0: "
            "both dressed transitions are dark")
    r11 = down / total
    # (up - down)/total equals r22 - r11 to rounding but keeps the sign of
    # the rate comparison exact, which the cooling-sign law relies on.
    rz = (up - down) / total
    return SteadyAtom(r11=r11, r22=1.0 - r11, rz=rz,
                      sz=0.5 * f.cos_2theta * rz)


def rate_set(p: PhysicalParams) -> RateSet:
    """All relaxation rates and phonon coupling coefficients.

    The cooling_rate field is the difference of the two real coupling rates;
    the standalone cooling_rate() function evaluates the equivalent direct
    expression, giving an independent route for consistency checks.
    """
    f = dressed_frame(p)
    atom = steady_atom(p)
    gamma_perp = (p.gamma_zero * f.sin2_2theta
                  + p.gamma_plus * f.cos4_theta
                  + p.gamma_minus * f.sin4_theta)
    gamma_s = p.gamma_plus * f.cos4_theta + p.gamma_minus * f.sin4_theta
    gamma_0_eff = RECOIL_SECOND_MOMENT * p.eta ** 2 * (
        p.gamma_minus * f.sin4_theta * atom.r11
        + p.gamma_plus * f.cos4_theta * atom.r22
        + 0.25 * p.gamma_zero * f.sin2_2theta)
    k = (p.eta * p.omega) ** 2
    mismatch = 2.0 * f.omega_bar - p.nu   # distance from the red sideband
    a_minus = gamma_0_eff + k * atom.r11 / complex(gamma_perp, mismatch)
    a_plus = gamma_0_eff + k * atom.r22 / complex(gamma_perp, -mismatch)
    a_rate_minus = 2.0 * a_minus.real
    a_rate_plus = 2.0 * a_plus.real
    return RateSet(
        gamma_perp=gamma_perp,
        gamma_s=gamma_s,
        gamma_0_eff=gamma_0_eff,
        a_minus=a_minus,
        a_plus=a_plus,
        a_rate_minus=a_rate_minus,
        a_rate_plus=a_rate_plus,
        cooling_rate=a_rate_minus - a_rate_plus,
    )


def cooling_rate(p: PhysicalParams) -> float:
    """Net phonon damping rate C, evaluated directly.

    C = -2 (eta*omega)^2 * gamma_perp * rz / (gamma_perp^2 + mismatch^2),
    positive exactly when the lower dressed level dominates (rz < 0).
    """
    f = dressed_frame(p)
    atom = steady_atom(p)
    gamma_perp = (p.gamma_zero * f.sin2_2theta
                  + p.gamma_plus * f.cos4_theta
                  + p.gamma_minus * f.sin4_theta)
    k = (p.eta * p.omega) ** 2
    mismatch = 2.0 * f.omega_bar - p.nu
    return -2.0 * k * gamma_perp * atom.rz / (gamma_perp ** 2 + mismatch ** 2)


def steady_phonon(p: PhysicalParams) -> float | Heating:
    """Steady mean phonon number, or the HEATING marker.

    On the cooling side (r11 > r22) this is
        r22/(r11 - r22)
        + gamma_0_eff*(gamma_perp^2 + mismatch^2)
          / ((eta*omega)^2 * gamma_perp * (r11 - r22)),
    the sideband-balance floor plus the recoil-diffusion contribution.
    Population balance is detected at relative tolerance 1e-14.

    Raises
    ------
    ZeroCouplingError
        If eta*omega = 0 while the parameters are on the cooling side: the
        second term is 0/0 and no steady phonon number is defined.
    """
    f = dressed_frame(p)
    atom = steady_atom(p)
    inversion_gap = -atom.rz   # r11 - r22, exact sign
    if inversion_gap <= _BALANCE_TOL:
        return HEATING
    k = (p.eta * p.omega) ** 2
    if k == 0.0:
        raise ZeroCouplingError(
            "eta*omega = 0: phonon decoupled, steady phonon number undefined")
    gamma_perp = (p.gamma_zero * f.sin2_2theta
                  + p.gamma_plus * f.cos4_theta
                  + p.gamma_minus * f.sin4_theta)
    gamma_0_eff = RECOIL_SECOND_MOMENT * p.eta ** 2 * (
        p.gamma_minus * f.sin4_theta * atom.r11
        + p.gamma_plus * f.cos4_theta * atom.r22
        + 0.25 * p.gamma_zero * f.sin2_2theta)
    mismatch = 2.0 * f.omega_bar - p.nu
    lorentzian = gamma_perp ** 2 + mismatch ** 2
    return (atom.r22 / inversion_gap
            + gamma_0_eff * lorentzian / (k * gamma_perp * inversion_gap))


# --- trajectories ------------------------------------------------------------

@dataclass(frozen=True)
class DressedInit:
    """Initial conditions in the dressed basis: inversion, coherence
    amplitude and mean phonon number."""

    rz: float
    rplus: complex = 0.0 + 0.0j
    n: float = 0.0


@dataclass(frozen=True)
class BareInit:
    """Initial conditions in the bare basis.

    sminus defaults to the conjugate of splus (any physical state satisfies
    that); pass it explicitly only to override.
    """

    sz: float
    splus: complex = 0.0 + 0.0j
    sminus: complex | None = None
    n: float = 0.0

    def to_dressed(self, frame: DressedFrame) -> DressedInit:
        sm = self.sminus if self.sminus is not None else self.splus.conjugate()
        rz = frame.cos_2theta * self.sz + frame.sin_2theta * (self.splus + sm)
        rplus = (frame.cos2_theta * self.splus
                 - frame.sin2_theta * sm
                 - frame.sin_2theta * self.sz)
        return DressedInit(rz=float(rz.real) if isinstance(rz, complex) else float(rz),
                           rplus=complex(rplus), n=self.n)


@dataclass(frozen=True)
class Trajectory:
    """Closed-form relaxation curves.

    rplus is the coherence envelope in the frame co-rotating at the dressed
    splitting (the full coherence additionally rotates at 2*omega_bar).
    phonon_growing flags a net-gain phonon branch (cooling_rate <= 0 with a
    positive source); the curves themselves stay finite for any sign.
    n_steady is the HEATING marker on the heating side and None when
    eta*omega = 0 (phonon decoupled, n stays at its initial value).
    """

    times: np.ndarray
    rz: np.ndarray
    rplus: np.ndarray
    n: np.ndarray
    rz_steady: float
    n_steady: float | Heating | None
    cooling_rate: float
    gamma_perp: float
    gamma_s: float
    phonon_growing: bool


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise InvalidGridError("times must be a non-empty 1-d array")
    if not np.all(np.isfinite(t)):
        raise InvalidGridError("times must be finite")
    if t[0] < 0:
        raise InvalidGridError("times must be >= 0")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise InvalidGridError("times must be strictly increasing")
    return t


def trajectory(p: PhysicalParams,
               init: DressedInit | BareInit,
               times) -> Trajectory:
    """Relaxation of inversion, coherence envelope and phonon number.

    rz decays to its steady value at 2*gamma_s, the coherence envelope at
    gamma_perp, and the phonon number follows d<n>/dt = -C <n> + A_plus,
    written in the exp/expm1 form that stays finite for C of any sign.
    """
    t = _check_times(times)
    f = dressed_frame(p)
    if isinstance(init, BareInit):
        init = init.to_dressed(f)
    atom = steady_atom(p)
    rates = rate_set(p)
    c = rates.cooling_rate
    a_plus_rate = rates.a_rate_plus

    rz = (init.rz - atom.rz) * np.exp(-2.0 * rates.gamma_s * t) + atom.rz
    rplus = init.rplus * np.exp(-rates.gamma_perp * t)
    if c == 0.0:
        n = init.n + a_plus_rate * t
    else:
        decay = np.exp(-c * t)
        n = init.n * decay - a_plus_rate * np.expm1(-c * t) / c

    try:
        n_steady: float | Heating | None = steady_phonon(p)
    except ZeroCouplingError:
        n_steady = None
    return Trajectory(
        times=t, rz=rz, rplus=np.asarray(rplus, dtype=complex), n=n,
        rz_steady=atom.rz, n_steady=n_steady, cooling_rate=c,
        gamma_perp=rates.gamma_perp, gamma_s=rates.gamma_s,
        phonon_growing=(c < 0.0 or (c == 0.0 and a_plus_rate > 0.0)),
    )


# --- validity diagnostics ----------------------------------------------------

@dataclass(frozen=True)
class ValidityCheck:
    """One inequality of the model's validity regime.

    kind "much_greater" passes when lhs >= margin * rhs (ratio = lhs/rhs);
    kind "less" is literal lhs < rhs.
    """

    name: str
    kind: str
    lhs: float
    rhs: float
    ratio: float
    satisfied: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "lhs": self.lhs,
                "rhs": self.rhs, "ratio": self.ratio,
                "satisfied": self.satisfied}


@dataclass(frozen=True)
class ValidityReport:
    """All validity inequalities with a conjunction flag.

    transient_time = 1/(2*omega_bar) is the time scale below which the
    closed-form trajectories are not meaningful (informational, not a check).
    """

    checks: tuple[ValidityCheck, ...]
    margin: float
    overall: bool
    transient_time: float

    def __getitem__(self, name: str) -> ValidityCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {"margin": self.margin, "overall": self.overall,
                "transient_time": self.transient_time,
                "checks": [c.as_dict() for c in self.checks]}


def _much_greater(name: str, lhs: float, rhs: float, margin: float) -> ValidityCheck:
    ratio = lhs / rhs if rhs != 0.0 else math.inf
    return ValidityCheck(name=name, kind="much_greater", lhs=lhs, rhs=rhs,
                         ratio=ratio, satisfied=ratio >= margin)


def validity_report(p: PhysicalParams, margin: float = 10.0) -> ValidityReport:
    """Check the regime where the closed forms hold.

    secular:             max(gamma) << 2*omega_bar   (ratio >= margin)
    drive_below_decay:   eta*omega < max(gamma)      (literal)
    inversion_adiabatic: |C| << 2*gamma_s            (ratio >= margin)
    coherence_adiabatic: |C| << gamma_perp           (ratio >= margin)

    The adiabatic checks compare against |C| so heating-side parameters are
    judged by magnitude; C = 0 passes with an infinite ratio.
    """
    if margin <= 0:
        raise ValueError(f"margin must be > 0, got {margin}")
    f = dressed_frame(p)
    rates = rate_set(p)
    c_mag = abs(rates.cooling_rate)
    gmax = p.max_gamma
    eta_omega = p.eta * p.omega
    checks = (
        _much_greater("secular", 2.0 * f.omega_bar, gmax, margin),
        ValidityCheck(name="drive_below_decay", kind="less",
                      lhs=eta_omega, rhs=gmax,
                      ratio=eta_omega / gmax if gmax else math.inf,
                      satisfied=eta_omega < gmax),
        _much_greater("inversion_adiabatic", 2.0 * rates.gamma_s, c_mag, margin),
        _much_greater("coherence_adiabatic", rates.gamma_perp, c_mag, margin),
    )
    return ValidityReport(
        checks=checks, margin=margin,
        overall=all(c.satisfied for c in checks),
        transient_time=0.5 / f.omega_bar,
    )
