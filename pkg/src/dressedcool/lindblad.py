"""Dense numerical oracle for the dressed-frame master equation.

The generator acts on the atom (two dressed levels) tensored with a
truncated phonon Fock space. Its Hamiltonian part is

    H = nu * b'b + omega_bar * R_z + i eta omega (R+ - R-)(b + b')

and the dissipative part has three channels with rates
(gamma_zero/4) sin^2(2 theta) on R_z, gamma_plus cos^4(theta) on R-,
gamma_minus sin^4(theta) on R+, each in the form

    -Gamma ( A'A rho - 2 A rho_bar A' + rho A'A )

where rho_bar = rho + alpha eta^2 (X rho X - {X^2, rho}/2), X = b + b',
is the photon-recoil smearing expanded to second order in eta
(alpha = 2/5). Everything here is solved numerically (dense kernel solve,
adaptive Runge-Kutta integration); none of the closed-form results from
the analytic module enter, so agreement between the two is a real check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.integrate import solve_ivp

from .analytic import RECOIL_SECOND_MOMENT, _check_times, rate_set
from .errors import (
    DimensionOverflowError,
    InvalidGridError,
    InvalidParamsError,
    NoSteadyStateError,
    OracleError,
    TruncationBreachError,
)
from .params import PhysicalParams, dressed_frame

__all__ = [
    "DEFAULT_DIM_CAP",
    "Liouvillian",
    "EvolveResult",
    "SteadyStateResult",
    "ConvergenceRun",
    "build_liouvillian",
    "evolve",
    "steady_state",
    "converged_steady_state",
    "reduced_phonon_evolve",
    "vacuum_phonon",
    "thermal_phonon",
    "product_state",
]

# Largest allowed total Hilbert-space dimension D = 2 (n_max + 1); the
# superoperator is dense D^2 x D^2, so memory grows as D^4.
DEFAULT_DIM_CAP = 128


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape(dim, dim, order="F")


@dataclass(eq=False)
class Liouvillian:
    """Dense generator of the master equation on vectorized density matrices.

    `matrix` acts on column-stacked rho; `apply` evaluates the same
    right-hand side from the operator factors directly (cheaper for
    integration, and an independent cross-check of the vectorization).
    """

    params: PhysicalParams
    n_max: int
    dim: int
    matrix: np.ndarray
    # operator bundle (dense (dim, dim)) used by apply() and observables
    hamiltonian: np.ndarray
    rz_op: np.ndarray
    rplus_op: np.ndarray
    number_op: np.ndarray
    x_op: np.ndarray
    alpha_eta2: float
    channels: tuple[tuple[float, np.ndarray, np.ndarray, np.ndarray], ...] = field(repr=False)
    _x2: np.ndarray = field(repr=False, default=None)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Right-hand side d(rho)/dt for one density matrix."""
        h = self.hamiltonian
        out = -1j * (h @ rho - rho @ h)
        x, x2 = self.x_op, self._x2
        if self.alpha_eta2 != 0.0:
            smeared = rho + self.alpha_eta2 * (
                x @ rho @ x - 0.5 * (x2 @ rho + rho @ x2))
        else:
            smeared = rho
        for rate, a, a_dag, n_op in self.channels:
            out += (2.0 * rate) * (a @ smeared @ a_dag)
            out -= rate * (n_op @ rho + rho @ n_op)
        return out

    def expectations(self, rho: np.ndarray):
        """(rz, rplus, n, tail_mass) for one density matrix."""
        rz = np.trace(self.rz_op @ rho).real
        rplus = np.trace(rho @ self.rplus_op)
        n = np.trace(self.number_op @ rho).real
        return rz, rplus, n, self.tail_mass(rho)

    def tail_mass(self, rho: np.ndarray) -> float:
        """Total population of the top two Fock levels (both dressed levels)."""
        levels = self.n_max + 1
        pops = np.diag(rho).real
        idx = [self.n_max - 1, self.n_max,
               levels + self.n_max - 1, levels + self.n_max]
        return float(pops[idx].sum())


def build_liouvillian(p: PhysicalParams, n_max: int, *,
                      dim_cap: int = DEFAULT_DIM_CAP) -> Liouvillian:
    """Assemble the dense superoperator for `p` on Fock levels 0..n_max.

    Basis ordering: index = level * (n_max + 1) + n with level 0 the lower
    dressed state. Vectorization is column-stacking, so vec(A rho B) =
    kron(B.T, A) vec(rho).

    Raises
    ------
    InvalidParamsError
        If n_max < 2.
    DimensionOverflowError
        If 2 (n_max + 1) exceeds dim_cap (the superoperator would need
        about 16 (dim_cap)^4 bytes).
    """
    if int(n_max) != n_max or n_max < 2:
        raise InvalidParamsError("n_max", f"n_max must be an integer >= 2, got {n_max}")
    n_max = int(n_max)
    dim = 2 * (n_max + 1)
    if dim > dim_cap:
        raise DimensionOverflowError(
            f"total dimension {dim} = 2*(n_max+1) exceeds cap {dim_cap}; "
            f"superoperator would be {dim * dim} x {dim * dim}")

    f = dressed_frame(p)
    levels = n_max + 1
    eye_ph = np.eye(levels)
    ann = np.diag(np.sqrt(np.arange(1, levels)), k=1).astype(complex)

    rz_op = np.kron(np.diag([-1.0, 1.0]), eye_ph).astype(complex)
    rplus_op = np.kron(np.array([[0.0, 0.0], [1.0, 0.0]]), eye_ph).astype(complex)
    rminus_op = rplus_op.conj().T
    b = np.kron(np.eye(2), ann)
    number_op = b.conj().T @ b
    x = b + b.conj().T
    x2 = x @ x

    hamiltonian = (p.nu * number_op + f.omega_bar * rz_op
                   + 1j * p.eta * p.omega * ((rplus_op - rminus_op) @ x))

    channel_defs = (
        (0.25 * p.gamma_zero * f.sin2_2theta, rz_op),
        (p.gamma_plus * f.cos4_theta, rminus_op),
        (p.gamma_minus * f.sin4_theta, rplus_op),
    )
    alpha_eta2 = RECOIL_SECOND_MOMENT * p.eta ** 2

    eye = np.eye(dim)
    lmat = -1j * (np.kron(eye, hamiltonian) - np.kron(hamiltonian.T, eye))
    channels = []
    for rate, a in channel_defs:
        if rate == 0.0:
            continue
        a_dag = a.conj().T
        n_op = a_dag @ a
        channels.append((rate, a, a_dag, n_op))
        ax = a @ x
        ax2 = a @ x2
        sandwich = np.kron(a.conj(), a)
        if alpha_eta2 != 0.0:
            sandwich = sandwich + alpha_eta2 * (
                np.kron(ax.conj(), ax)
                - 0.5 * np.kron(a.conj(), ax2)
                - 0.5 * np.kron(ax2.conj(), a))
        lmat += (2.0 * rate) * sandwich
        lmat -= rate * (np.kron(eye, n_op) + np.kron(n_op.T, eye))

    return Liouvillian(params=p, n_max=n_max, dim=dim, matrix=lmat,
                       hamiltonian=hamiltonian, rz_op=rz_op,
                       rplus_op=rplus_op, number_op=number_op, x_op=x,
                       alpha_eta2=alpha_eta2, channels=tuple(channels),
                       _x2=x2)


# --- initial states -----------------------------------------------------------

def vacuum_phonon(n_max: int) -> np.ndarray:
    rho = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def thermal_phonon(n_max: int, nbar: float, cut: int | None = None) -> np.ndarray:
    """Thermal phonon state with mean occupation nbar before truncation.

    `cut` zeroes all populations above that level (hard cutoff) before
    renormalizing; by default the geometric weights run to n_max.
    """
    if nbar < 0:
        raise InvalidParamsError("nbar", f"nbar must be >= 0, got {nbar}")
    top = n_max if cut is None else min(cut, n_max)
    weights = np.zeros(n_max + 1)
    if nbar == 0.0:
        weights[0] = 1.0
    else:
        q = nbar / (1.0 + nbar)
        weights[: top + 1] = q ** np.arange(top + 1)
    weights /= weights.sum()
    return np.diag(weights).astype(complex)


def product_state(atom: np.ndarray, phonon: np.ndarray) -> np.ndarray:
    """kron of a 2x2 atomic and an (n_max+1)^2 phonon density matrix."""
    atom = np.asarray(atom, dtype=complex)
    if atom.shape != (2, 2):
        raise InvalidParamsError("atom", "atomic state must be 2x2")
    return np.kron(atom, np.asarray(phonon, dtype=complex))


def _validate_state(rho: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise InvalidParamsError(
            "rho0", f"state must be {dim}x{dim}, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > 1e-12:
        raise InvalidParamsError("rho0", "state is not Hermitian (defect > 1e-12)")
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise InvalidParamsError("rho0", "state trace differs from 1 by > 1e-8")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-10:
        raise InvalidParamsError("rho0", "state has eigenvalue below -1e-10")
    return rho


# --- time evolution -----------------------------------------------------------

@dataclass(eq=False)
class EvolveResult:
    """Sampled master-equation evolution with per-sample health numbers.

    tail_mass tracks the top two Fock levels; trace_err, herm_defect and
    min_eig record how well the state kept its density-matrix properties.
    """

    times: np.ndarray
    states: np.ndarray           # (n_samples, dim, dim)
    rz: np.ndarray
    rplus: np.ndarray
    n: np.ndarray
    tail_mass: np.ndarray
    trace_err: np.ndarray
    herm_defect: np.ndarray
    min_eig: np.ndarray
    n_max: int

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def csv_rows(self):
        """Rows (t, n, rz, re_rplus, im_rplus, tail_mass)."""
        for k in range(len(self.times)):
            yield (self.times[k], self.n[k], self.rz[k],
                   self.rplus[k].real, self.rplus[k].imag, self.tail_mass[k])


def evolve(liouv: Liouvillian, rho0: np.ndarray, t_end: float, *,
           t_eval=None, n_samples: int = 201, rtol: float = 1e-9,
           atol: float = 1e-11, tail_limit: float | None = 1e-6) -> EvolveResult:
    """Integrate d(rho)/dt = L rho from a validated initial state.

    Adaptive high-order Runge-Kutta stepping controlled by rtol/atol only.
    t_end = 0 returns the initial state. A sparse view of the generator
    drives the right-hand side; observables are read off at the sample
    times (default: n_samples equally spaced points including both ends).

    One caveat on the min_eig diagnostic: the second-order recoil
    correction makes the generator only approximately completely
    positive.  Rank-deficient initial states can show a transient
    negative eigenvalue of order eta**4 (about -1e-8 for eta = 0.1)
    that no tolerance tightening removes; full-rank initial states stay
    positive to roundoff.

    Raises
    ------
    TruncationBreachError
        If the top-two-Fock-level population exceeds tail_limit at any
        sample (pass tail_limit=None to disable).
    OracleError
        If the integrator reports failure.
    """
    rho0 = _validate_state(rho0, liouv.dim)
    if not math.isfinite(t_end) or t_end < 0:
        raise InvalidGridError(f"t_end must be finite and >= 0, got {t_end}")
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, n_samples) if t_end > 0 else np.array([0.0])
    else:
        t_eval = _check_times(t_eval)
        if t_eval[-1] > t_end:
            raise InvalidGridError("t_eval reaches past t_end")

    dim = liouv.dim
    if t_end == 0.0:
        raw = rho0[np.newaxis, :, :]
    else:
        sparse_l = scipy.sparse.csr_matrix(liouv.matrix)
        sol = solve_ivp(lambda t, y: sparse_l @ y, (0.0, float(t_end)),
                        _vec(rho0), method="DOP853", t_eval=t_eval,
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise OracleError(f"integration failed: {sol.message}")
        raw = np.ascontiguousarray(
            sol.y.T.reshape(-1, dim, dim).transpose(0, 2, 1))
        # (column-stacked vectors: reshape gives rho.T per sample)

    k = raw.shape[0]
    rz = np.empty(k)
    rplus = np.empty(k, dtype=complex)
    n = np.empty(k)
    tail = np.empty(k)
    trace_err = np.empty(k)
    herm = np.empty(k)
    min_eig = np.empty(k)
    for i in range(k):
        rho = raw[i]
        rz[i], rplus[i], n[i], tail[i] = liouv.expectations(rho)
        trace_err[i] = abs(np.trace(rho).real - 1.0)
        herm[i] = np.abs(rho - rho.conj().T).max()
        min_eig[i] = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if tail_limit is not None and tail.max() > tail_limit:
        worst = int(np.argmax(tail))
        raise TruncationBreachError(
            f"top-two Fock population {tail[worst]:.3e} exceeds "
            f"{tail_limit:.1e} at t = {np.asarray(t_eval)[worst]:.6g}; "
            f"raise n_max (currently {liouv.n_max})")
    return EvolveResult(times=np.asarray(t_eval, dtype=float), states=raw,
                        rz=rz, rplus=rplus, n=n, tail_mass=tail,
                        trace_err=trace_err, herm_defect=herm,
                        min_eig=min_eig, n_max=liouv.n_max)


# --- steady state -------------------------------------------------------------

@dataclass(eq=False)
class SteadyStateResult:
    """Kernel solution of the generator with numerical certificates.

    residual is the infinity norm of L vec(rho) for the returned state;
    rcond estimates the conditioning of the trace-constrained solve.
    """

    rho: np.ndarray
    n: float
    rz: float
    rplus: complex
    tail_mass: float
    residual: float
    rcond: float
    trace_dev: float
    herm_defect: float
    min_eig: float
    n_max: int
    dim: int

    def summary_dict(self) -> dict:
        return {
            "n": self.n, "rz": self.rz,
            "re_rplus": self.rplus.real, "im_rplus": self.rplus.imag,
            "tail_mass": self.tail_mass, "residual": self.residual,
            "rcond": self.rcond, "trace_dev": self.trace_dev,
            "herm_defect": self.herm_defect, "min_eig": self.min_eig,
            "n_max": self.n_max, "dim": self.dim,
        }


def _raise_no_steady(lmat: np.ndarray, reason: str) -> None:
    sv = np.linalg.svd(lmat, compute_uv=False)
    raise NoSteadyStateError(reason, smallest_singular_values=(float(sv[-1]),
                                                               float(sv[-2])))


def steady_state(liouv: Liouvillian, *, rcond_floor: float = 1e-12,
                 residual_tol: float = 1e-10) -> SteadyStateResult:
    """Solve L vec(rho) = 0 with Tr rho = 1.

    The first row of the system is replaced by the trace constraint; the
    factorization's reciprocal condition estimate certifies that the
    kernel is one-dimensional (a second kernel direction leaves the
    constrained system singular). The residual is measured against the
    unmodified generator.

    Raises
    ------
    NoSteadyStateError
        If the constrained solve is singular/ill-conditioned (kernel not
        one-dimensional within tolerance) or the residual check fails.
        The two smallest singular values of the generator are attached.
    """
    lmat = liouv.matrix
    dim = liouv.dim
    d2 = dim * dim
    constrained = lmat.copy()
    constrained[0, :] = 0.0
    constrained[0, :: dim + 1] = 1.0   # vec indices of diagonal entries
    rhs = np.zeros(d2, dtype=complex)
    rhs[0] = 1.0

    anorm = np.abs(constrained).sum(axis=0).max()
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            lu, piv = scipy.linalg.lu_factor(constrained, check_finite=False)
        except (scipy.linalg.LinAlgWarning, np.linalg.LinAlgError):
            _raise_no_steady(lmat, "constrained system is exactly singular")
    rcond, info = scipy.linalg.lapack.zgecon(lu, anorm)
    if info != 0 or not np.isfinite(rcond) or rcond < rcond_floor:
        _raise_no_steady(
            lmat, f"constrained solve ill-conditioned (rcond = {rcond:.3e}); "
                  "kernel is not one-dimensional within tolerance")
    v = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)

    residual = float(np.abs(lmat @ v).max())
    if residual > residual_tol:
        _raise_no_steady(
            lmat, f"kernel residual {residual:.3e} exceeds {residual_tol:.1e}")

    rho_raw = _unvec(v, dim)
    herm_defect = float(np.abs(rho_raw - rho_raw.conj().T).max())
    rho = 0.5 * (rho_raw + rho_raw.conj().T)
    trace = np.trace(rho).real
    trace_dev = abs(trace - 1.0)
    rho /= trace
    min_eig = float(np.linalg.eigvalsh(rho).min())
    rz, rplus, n, tail = liouv.expectations(rho)
    return SteadyStateResult(rho=rho, n=float(n), rz=float(rz),
                             rplus=complex(rplus), tail_mass=tail,
                             residual=residual, rcond=float(rcond),
                             trace_dev=trace_dev, herm_defect=herm_defect,
                             min_eig=min_eig, n_max=liouv.n_max, dim=dim)


@dataclass(eq=False)
class ConvergenceRun:
    """Steady-state solve escalated in n_max until ⟨b†b⟩ stabilizes.

    `result` is the finest solve; history holds (n_max, n) pairs for every
    dimension tried; rel_change is the last relative step."""

    result: SteadyStateResult
    history: tuple[tuple[int, float], ...]
    rel_change: float

    @property
    def n(self) -> float:
        return self.result.n


def converged_steady_state(p: PhysicalParams, *, n_max_start: int = 12,
                           step: int = 4, rel_tol: float = 1e-4,
                           dim_cap: int = 64,
                           rcond_floor: float = 1e-12) -> ConvergenceRun:
    """steady_state with n_max escalation until the phonon number settles.

    Solves at n_max_start, then n_max_start + step, ..., accepting once the
    relative change of ⟨b†b⟩ between consecutive sizes drops below rel_tol.
    The default cap is tighter than build_liouvillian's because the loop
    builds every size on the way up; hot parameter points that need more
    room must raise dim_cap explicitly.

    Raises
    ------
    TruncationBreachError
        If the cap is reached without convergence (history attached).
    """
    n_max = n_max_start
    prev = steady_state(build_liouvillian(p, n_max, dim_cap=dim_cap),
                        rcond_floor=rcond_floor)
    history = [(n_max, prev.n)]
    while True:
        n_next = n_max + step
        if 2 * (n_next + 1) > dim_cap:
            raise TruncationBreachError(
                f"phonon number not converged at dimension cap {dim_cap}; "
                f"history: {history}")
        cur = steady_state(build_liouvillian(p, n_next, dim_cap=dim_cap),
                           rcond_floor=rcond_floor)
        history.append((n_next, cur.n))
        rel = abs(cur.n - prev.n) / max(abs(cur.n), 1e-12)
        if rel < rel_tol:
            return ConvergenceRun(result=cur, history=tuple(history),
                                  rel_change=rel)
        prev, n_max = cur, n_next


# --- reduced phonon model -----------------------------------------------------

def reduced_phonon_evolve(p: PhysicalParams, n0: float, times) -> np.ndarray:
    """Integrate d<n>/dt = -C <n> + A_plus numerically on the given grid.

    This is an actual ODE solve, not the exponential closed form, so it
    independently checks the analytic trajectory expression.
    """
    t = _check_times(times)
    rates = rate_set(p)
    c = rates.cooling_rate
    source = rates.a_rate_plus
    n0 = float(n0)
    if t[-1] == 0.0:
        return np.array([n0])
    sol = solve_ivp(lambda tt, y: -c * y + source, (0.0, float(t[-1])),
                    [n0], method="DOP853", t_eval=t, rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise OracleError(f"reduced-model integration failed: {sol.message}")
    return sol.y[0]
