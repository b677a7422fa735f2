"""Truncated Carleman lift: block assembly, exact linear evolution, error profiles.

The lift tracks tensor powers x^(j) for j = 1..k.  Its generator is block
tridiagonal: level j couples downward through the drive, diagonally
through F1, and upward through F2, each as a sum of Kronecker "shift"
terms placing the operator at every slot.  The lifted linear ODE is
solved exactly (to matrix-exponential accuracy) via an affine
augmentation, so every truncation-error measurement isolates the
truncation itself rather than time-stepping error.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapError, DimensionMismatchError
from .linalg import matrix_exp, tensor_power
from .system import QuadraticSystem, Trajectory, integrate_reference

DEFAULT_DENSE_CAP = 20_000


def dense_cap() -> int:
    """Dense-dimension cap; override with the CARLEMAN_LAB_CAP env var."""
    raw = os.environ.get("CARLEMAN_LAB_CAP")
    if raw:
        return int(raw)
    return DEFAULT_DENSE_CAP


def total_dimension(n: int, k: int) -> int:
    return sum(n**j for j in range(1, k + 1))


def _shift_sum(op: np.ndarray, n: int, j: int) -> np.ndarray:
    """Sum over slots l of I^(l) (x) op (x) I^(j-1-l)."""
    out = None
    for l in range(j):
        left = np.eye(n**l, dtype=complex)
        right = np.eye(n ** (j - 1 - l), dtype=complex)
        term = np.kron(np.kron(left, op), right)
        out = term if out is None else out + term
    return out


@dataclass(frozen=True)
class CarlemanMatrix:
    """Block-tridiagonal generator of the order-k lift of an n-dim system.

    ``upper`` holds A_{j,j+1} for j = 1..k; the last entry A_{k,k+1} is
    not part of the truncated generator but is retained because it
    drives the truncation error.
    """

    k: int
    n: int
    lower: tuple  # A_{j,j-1}, j = 2..k
    diag: tuple  # A_{j,j},   j = 1..k
    upper: tuple  # A_{j,j+1}, j = 1..k (last one kept for the error source)
    drive: np.ndarray

    @property
    def total_dim(self) -> int:
        return total_dimension(self.n, self.k)

    def block_lower(self, j: int) -> np.ndarray:
        return self.lower[j - 2]

    def block_diag(self, j: int) -> np.ndarray:
        return self.diag[j - 1]

    def block_upper(self, j: int) -> np.ndarray:
        return self.upper[j - 1]


def build_blocks(sys: QuadraticSystem, k: int, cap: int | None = None) -> CarlemanMatrix:
    """Assemble all lift blocks by explicit Kronecker shift sums."""
    if k < 1:
        raise ValueError("truncation order must be >= 1")
    n = sys.n
    cap = dense_cap() if cap is None else cap
    dim = total_dimension(n, k)
    if dim > cap:
        raise DimensionCapError(dim, cap)
    f0_col = sys.f0.reshape(n, 1)
    lower = tuple(_shift_sum(f0_col, n, j) for j in range(2, k + 1))
    diag = tuple(_shift_sum(sys.f1, n, j) for j in range(1, k + 1))
    upper = tuple(_shift_sum(sys.f2, n, j) for j in range(1, k + 1))
    drive = np.zeros(dim, dtype=complex)
    drive[:n] = sys.f0
    return CarlemanMatrix(k, n, lower, diag, upper, drive)


def assemble_dense(cm: CarlemanMatrix, cap: int | None = None) -> np.ndarray:
    """Dense generator with the block-tridiagonal layout; other blocks zero."""
    cap = dense_cap() if cap is None else cap
    dim = cm.total_dim
    if dim > cap:
        raise DimensionCapError(dim, cap)
    n = cm.n
    offsets = np.cumsum([0] + [n**j for j in range(1, cm.k + 1)])
    a = np.zeros((dim, dim), dtype=complex)
    for j in range(1, cm.k + 1):
        r0, r1 = offsets[j - 1], offsets[j]
        a[r0:r1, r0:r1] = cm.block_diag(j)
        if j >= 2:
            a[r0:r1, offsets[j - 2] : offsets[j - 1]] = cm.block_lower(j)
        if j < cm.k:
            a[r0:r1, offsets[j] : offsets[j + 1]] = cm.block_upper(j)
    return a


def initial_lift(x0, k: int) -> np.ndarray:
    """Stacked tensor powers [x0, x0^(2), ..., x0^(k)]."""
    if k < 1:
        raise ValueError("truncation order must be >= 1")
    v = np.asarray(x0, dtype=complex).reshape(-1)
    return np.concatenate([tensor_power(v, j) for j in range(1, k + 1)])


def split_blocks(y: np.ndarray, n: int, k: int) -> list[np.ndarray]:
    """Split a lifted vector into its per-level blocks."""
    out = []
    pos = 0
    for j in range(1, k + 1):
        out.append(y[pos : pos + n**j])
        pos += n**j
    if pos != y.size:
        raise DimensionMismatchError(f"lift vector of size {y.size}, expected {pos}")
    return out


def integrate_lift(cm: CarlemanMatrix, y0, times, cap: int | None = None) -> Trajectory:
    """Exact affine-linear evolution ydot = A y + a via one augmented exponential.

    [y; 1] evolves under [[A, a], [0, 0]]; no invertibility of A is
    assumed.  Accuracy inherits the matrix-exponential kernel.
    """
    v0 = np.asarray(y0, dtype=complex).reshape(-1)
    if v0.size != cm.total_dim:
        raise DimensionMismatchError(
            f"lift state dim {v0.size}, expected {cm.total_dim}"
        )
    t = np.asarray(times, dtype=float)
    if t.size == 0 or t[0] != 0.0 or (t.size > 1 and np.any(np.diff(t) <= 0)):
        raise ValueError("times must be strictly increasing and start at 0")
    a = assemble_dense(cm, cap=cap)
    dim = a.shape[0]
    aug = np.zeros((dim + 1, dim + 1), dtype=complex)
    aug[:dim, :dim] = a
    aug[:dim, dim] = cm.drive
    state0 = np.concatenate([v0, [1.0 + 0j]])
    states = np.empty((t.size, dim), dtype=complex)
    states[0] = v0
    # step incrementally so repeated sample times reuse one exponential
    steps = np.diff(t)
    cache: dict[float, np.ndarray] = {}
    current = state0
    for i, dt in enumerate(steps, start=1):
        key = float(dt)
        if key not in cache:
            cache[key] = matrix_exp(aug, key)
        current = cache[key] @ current
        states[i] = current[:dim]
    return Trajectory(t, states)


@dataclass(frozen=True)
class ErrorProfile:
    """Per-block truncation errors ||x(t)^(j) - y^[j](t)|| over time."""

    times: np.ndarray
    block_norms: np.ndarray  # shape (len(times), k)
    k_used: int
    decay_rate_per_k: float | None = None


def error_profile(
    sys: QuadraticSystem,
    x0,
    k: int,
    times,
    tol: float = 1e-12,
    cap: int | None = None,
    reference: Trajectory | None = None,
) -> ErrorProfile:
    """Blockwise lift error against the nonlinear reference solve.

    The error is formed by direct subtraction of exact tensor powers
    from the lifted blocks; the defect ODE formulation is kept as a test
    property, not recomputed here.
    """
    t = np.asarray(times, dtype=float)
    ref = reference if reference is not None else integrate_reference(
        sys, x0, t, rel_tol=tol, abs_tol=tol
    )
    cm = build_blocks(sys, k, cap=cap)
    lift = integrate_lift(cm, initial_lift(x0, k), t, cap=cap)
    norms = np.zeros((t.size, k))
    for i in range(t.size):
        blocks = split_blocks(lift.states[i], sys.n, k)
        x = ref.states[i]
        for j in range(1, k + 1):
            norms[i, j - 1] = np.linalg.norm(tensor_power(x, j) - blocks[j - 1])
    return ErrorProfile(t, norms, k)


def convergence_sweep(
    sys: QuadraticSystem,
    x0,
    k_range,
    t: float,
    tol: float = 1e-12,
    cap: int | None = None,
) -> dict:
    """First-block error at time t for each k, plus a geometric-ratio fit.

    The fit is on log(error) vs k by least squares; it is reported as
    absent when any error sits at the oracle noise floor (10x tol).
    """
    ks = sorted(int(k) for k in k_range)
    if not ks or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("k_range must be nonempty and strictly ascending")
    times = np.array([0.0, float(t)])
    ref = integrate_reference(sys, x0, times, rel_tol=tol, abs_tol=tol)
    errs: dict[int, float] = {}
    for k in ks:
        prof = error_profile(sys, x0, k, times, tol=tol, cap=cap, reference=ref)
        errs[k] = float(prof.block_norms[-1, 0])
    ratio = None
    floor = 10.0 * tol
    vals = np.array([errs[k] for k in ks])
    if np.all(vals > floor):
        slope = np.polyfit(np.array(ks, dtype=float), np.log(vals), 1)[0]
        ratio = float(np.exp(slope))
    return {"errors": errs, "fitted_ratio": ratio}
