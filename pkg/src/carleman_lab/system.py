"""Quadratic ODE systems xdot = F0 + F1 x + F2 (x (x) x).

The state is complex throughout; F2 maps the tensor square of the state
back to the state space, stored dense with column index j*N + l for the
(j, l) slot pair.  The module also hosts the high-accuracy adaptive
reference integrator that all truncation-error measurements are judged
against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DimensionMismatchError,
    NonFiniteStateError,
    NonPositiveGammaError,
    StepSizeUnderflowError,
)
from .linalg import as_cmatrix, as_cvector

_RNG_PROBES = 8


@dataclass(frozen=True)
class QuadraticSystem:
    """The triple (F0, F1, F2) defining a quadratic ODE of dimension n."""

    f0: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    symmetrized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "f0", as_cvector(self.f0))
        object.__setattr__(self, "f1", as_cmatrix(self.f1))
        object.__setattr__(self, "f2", as_cmatrix(self.f2))
        n = self.f1.shape[0]
        if self.f1.shape != (n, n):
            raise DimensionMismatchError(f"f1 must be square, got {self.f1.shape}")
        if self.f0.shape != (n,):
            raise DimensionMismatchError(f"f0 has dim {self.f0.shape[0]}, expected {n}")
        if self.f2.shape != (n, n * n):
            raise DimensionMismatchError(
                f"f2 has shape {self.f2.shape}, expected {(n, n * n)}"
            )

    @property
    def n(self) -> int:
        return self.f1.shape[0]


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution states at strictly increasing times."""

    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)
    tolerance: float = field(default=np.nan)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=complex)
        if t.ndim != 1 or s.ndim != 2 or s.shape[0] != t.size:
            raise DimensionMismatchError("times/states shapes inconsistent")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)


def rhs(sys: QuadraticSystem, x) -> np.ndarray:
    """Right-hand side F0 + F1 x + F2 (x (x) x)."""
    v = as_cvector(x)
    if v.size != sys.n:
        raise DimensionMismatchError(f"state dim {v.size}, system dim {sys.n}")
    return sys.f0 + sys.f1 @ v + sys.f2 @ np.kron(v, v)


def validate(sys: QuadraticSystem) -> list[str]:
    """Diagnostics list; empty means well-formed.

    Dimension errors are caught at construction, so this mostly reports
    the measured asymmetry of F2 under swapping its two input slots.
    """
    issues: list[str] = []
    n = sys.n
    if not np.all(np.isfinite(sys.f0)) or not np.all(np.isfinite(sys.f1)):
        issues.append("non-finite entries")
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(_RNG_PROBES):
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        gap = np.linalg.norm(sys.f2 @ np.kron(u, v) - sys.f2 @ np.kron(v, u))
        scale = max(np.linalg.norm(u) * np.linalg.norm(v), 1e-300)
        worst = max(worst, gap / scale)
    if worst > 1e-12:
        issues.append(f"f2 asymmetry {worst:.3e} on probe vectors")
    return issues


def symmetrize(sys: QuadraticSystem) -> QuadraticSystem:
    """Average F2 over its two input slots; the induced quadratic map is unchanged."""
    n = sys.n
    t = sys.f2.reshape(n, n, n)
    sym = (t + t.transpose(0, 2, 1)) / 2.0
    return replace(sys, f2=sym.reshape(n, n * n), symmetrized=True)


def rescale(sys: QuadraticSystem, gamma: float) -> QuadraticSystem:
    """Unit change (F0, F1, F2) -> (g F0, F1, F2/g); trajectories scale as g x(t)."""
    if not (gamma > 0 and np.isfinite(gamma)):
        raise NonPositiveGammaError(f"gamma must be positive and finite, got {gamma}")
    return replace(sys, f0=gamma * sys.f0, f2=sys.f2 / gamma)


def integrate_reference(
    sys: QuadraticSystem,
    x0,
    times,
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-12,
) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) solve sampled at the requested times.

    Local error is controlled per step by rel_tol*|x| + abs_tol.  This is
    the brute-force oracle every Carleman truncation error is measured
    against, so the defaults are near the binary64 floor.
    """
    v0 = as_cvector(x0)
    if v0.size != sys.n:
        raise DimensionMismatchError(f"x0 dim {v0.size}, system dim {sys.n}")
    t = np.asarray(times, dtype=float)
    if t.size == 0 or t[0] != 0.0 or (t.size > 1 and np.any(np.diff(t) <= 0)):
        raise ValueError("times must be strictly increasing and start at 0")
    for tol in (rel_tol, abs_tol):
        if not 1e-14 <= tol <= 1e-3:
            raise ValueError(f"tolerance {tol} outside [1e-14, 1e-3]")

    def f(_t, y):
        return sys.f0 + sys.f1 @ y + sys.f2 @ np.kron(y, y)

    if t.size == 1:
        return Trajectory(t, v0[None, :].copy(), rel_tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # rtol clamping near eps is fine
        sol = solve_ivp(
            f,
            (0.0, float(t[-1])),
            v0.astype(complex),
            method="RK45",
            t_eval=t,
            rtol=max(rel_tol, 3e-14),
            atol=abs_tol,
            dense_output=False,
        )
    if not sol.success:
        msg = sol.message or "integration failed"
        if "step size" in msg.lower() or sol.status == -1:
            raise StepSizeUnderflowError(msg)
        raise NonFiniteStateError(msg)
    states = sol.y.T
    if not np.all(np.isfinite(states)):
        raise NonFiniteStateError("integration produced non-finite state")
    return Trajectory(t, states, rel_tol)


def integrate_nonautonomous(f, x0, times, rel_tol=1e-12, abs_tol=1e-12) -> Trajectory:
    """Same Dormand-Prince solve for an explicit time-dependent rhs f(t, x).

    Used to cross-check the autonomous embeddings of driven and
    oscillating systems against a direct non-autonomous solve.
    """
    v0 = as_cvector(x0)
    t = np.asarray(times, dtype=float)
    if t.size == 0 or t[0] != 0.0 or (t.size > 1 and np.any(np.diff(t) <= 0)):
        raise ValueError("times must be strictly increasing and start at 0")
    if t.size == 1:
        return Trajectory(t, v0[None, :].copy(), rel_tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = solve_ivp(
            f,
            (0.0, float(t[-1])),
            v0.astype(complex),
            method="RK45",
            t_eval=t,
            rtol=max(rel_tol, 3e-14),
            atol=abs_tol,
        )
    if not sol.success:
        raise StepSizeUnderflowError(sol.message or "integration failed")
    return Trajectory(t, sol.y.T, rel_tol)
