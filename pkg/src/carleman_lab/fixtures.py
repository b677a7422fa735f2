"""Built-in model systems used for certification studies and regression tests.

Each builder returns a :class:`Fixture` bundling the system with a
recommended initial state, a study horizon, and model-specific extras
(eigenstructure expectations, energy functionals for the oscillator
network, Fourier-mode data for the time-dependent toy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conservative import FourierModes, embed_time_dependent
from .errors import ParamOutOfRangeError, UnknownFixtureError
from .system import QuadraticSystem


@dataclass(frozen=True)
class Fixture:
    name: str
    params: dict
    system: QuadraticSystem
    x0: np.ndarray
    horizon: float
    expected: str
    extras: dict = field(default_factory=dict)


def scalar(a: float = -1.0, b: float = 0.1, f0: float = 0.0, x0: float = 0.5) -> Fixture:
    """One-dimensional quadratic model xdot = f0 + a x + b x^2."""
    sys = QuadraticSystem(f0=[f0], f1=[[a]], f2=[[b]])
    return Fixture(
        name="scalar",
        params={"a": a, "b": b, "f0": f0, "x0": x0},
        system=sys,
        x0=np.array([x0], dtype=complex),
        horizon=5.0,
        expected="stable" if a < 0 else "unstable",
    )


def damped_oscillator(r: float = 1.0, n: float = 0.5, q0: float = 0.5, v0: float = 0.5) -> Fixture:
    """Nonlinear oscillator qddot = -q - r qdot - n q^2 in first-order form.

    The state is (q, v); the quadratic force sits in the first-slot-squared
    entry of the second row.  Linearly stable for every r > 0 but with
    zero log-norm, which is what makes it the canonical witness that the
    Lyapunov-weighted criteria strictly extend the plain log-norm one.
    """
    if not 0.0 < r <= 10.0:
        raise ParamOutOfRangeError("damping r must lie in (0, 10]")
    if not 0.0 <= n <= 100.0:
        raise ParamOutOfRangeError("nonlinearity n must lie in [0, 100]")
    f1 = [[0.0, 1.0], [-1.0, -r]]
    f2 = np.zeros((2, 4))
    f2[1, 0] = -n
    sys = QuadraticSystem(f0=np.zeros(2), f1=f1, f2=f2)
    return Fixture(
        name="damped_oscillator",
        params={"r": r, "n": n, "q0": q0, "v0": v0},
        system=sys,
        x0=np.array([q0, v0], dtype=complex),
        horizon=10.0,
        expected="stable",
    )


def conservative_toy(a: float = 0.2, b: float = 0.05, x1: float = 0.5, x2: float = 0.0) -> Fixture:
    """Two-dimensional model with x1 conserved and x2 relaxing.

    x1dot = 0, x2dot = -x2 - b x2^2 + a x1^2; with x1(0) > 0 and
    x2(0) >= 0 the second coordinate stays nonnegative.
    """
    if not (a > 0 and b > 0):
        raise ParamOutOfRangeError("need a > 0 and b > 0")
    f1 = [[0.0, 0.0], [0.0, -1.0]]
    f2 = np.zeros((2, 4))
    f2[1, 0] = a
    f2[1, 3] = -b
    sys = QuadraticSystem(f0=np.zeros(2), f1=f1, f2=f2)
    monotone = x2 + b * x2 * x2 - a * x1 * x1 >= 0
    x2_max = x2 if monotone else (math.sqrt(1.0 + 4.0 * a * b * x1 * x1) - 1.0) / (2.0 * b)
    return Fixture(
        name="conservative_toy",
        params={"a": a, "b": b, "x1": x1, "x2": x2},
        system=sys,
        x0=np.array([x1, x2], dtype=complex),
        horizon=10.0,
        expected="conservative",
        extras={"x2_max_closed_form": x2_max},
    )


def reduced_conservative_rp(a: float, b: float, x1: float, x2: float) -> float:
    """R-number of the one-dimensional reduction x2dot = -x2 - b x2^2 + a x1^2.

    Substituting the conserved x1(0) turns the toy into a driven scalar
    system whose only weight is trivial, so the R-number is explicit.
    """
    if x2 <= 0:
        return np.inf
    return float(b * x2 + a * x1 * x1 / x2)


def conservative_ellipse_test(a: float, b: float, x1: float, x2: float) -> bool:
    """Membership in the ellipse equivalent to the reduced R-number being < 1."""
    sx = 1.0 / (2.0 * math.sqrt(a * b))
    sy = 1.0 / (2.0 * b)
    return (x1 / sx) ** 2 + ((x2 - sy) / sy) ** 2 <= 1.0


def oscillating_toy(
    omega: float = 2.0, a: float = 0.02, b: float = 0.02, c: float = 0.02, x1: float = 0.5, x2: float = 0.0
) -> Fixture:
    """Two-dimensional model whose first coordinate is a pure phase.

    x1 evolves as x1(0) e^{i w t}; the marginal mode is an oscillating
    quantity because its left eigenvector annihilates the quadratic term.
    """
    if omega == 0.0:
        raise ParamOutOfRangeError("omega must be nonzero")
    f1 = np.array([[1j * omega, 0.0], [0.0, -1.0]])
    f2 = np.zeros((2, 4), dtype=complex)
    f2[1, 0] = a
    f2[1, 1] = b / 2.0
    f2[1, 2] = b / 2.0
    f2[1, 3] = c
    sys = QuadraticSystem(f0=np.zeros(2), f1=f1, f2=f2)
    return Fixture(
        name="oscillating_toy",
        params={"omega": omega, "a": a, "b": b, "c": c, "x1": x1, "x2": x2},
        system=sys,
        x0=np.array([x1, x2], dtype=complex),
        horizon=10.0,
        expected="conservative",
    )


def time_dep_toy(
    a: float = 0.05, c1: float = 0.1, omega1: float = 2.0, b1: float = 0.0, x0: float = 0.25
) -> Fixture:
    """Scalar model with one Fourier mode in drive and linear term, embedded.

    xdot = b1 e^{i w t} + (c1 e^{i w t} - 1) x + a x^2 becomes autonomous
    on (x, z) with the ancilla z = sqrt(c1) e^{i w t}; the fixture carries
    both the embedded system and the raw mode data for cross-checks.
    """
    if c1 <= 0:
        raise ParamOutOfRangeError("mode weight c1 must be positive")
    modes = FourierModes(
        f0_static=np.zeros(1),
        f1_static=np.array([[-1.0]]),
        f2=np.array([[a]]),
        terms=((omega1, np.array([b1]), np.array([[c1]])),),
    )
    embedding = embed_time_dependent(modes, [math.sqrt(c1)])
    return Fixture(
        name="time_dep_toy",
        params={"a": a, "c1": c1, "omega1": omega1, "b1": b1, "x0": x0},
        system=embedding.extended,
        x0=embedding.lift_state(np.array([x0], dtype=complex)),
        horizon=5.0,
        expected="conservative",
        extras={"modes": modes, "embedding": embedding, "x0_original": np.array([x0], dtype=complex)},
    )


def _chain_springs(n: int, kappa: float) -> dict:
    return {(i, i + 1): kappa for i in range(n - 1)}


def _ring_springs(n: int, kappa: float) -> dict:
    springs = _chain_springs(n, kappa)
    springs[(0, n - 1)] = kappa
    return springs


def oscillator_network(
    n: int = 4,
    topology: str = "chain",
    kappa: float = 1.0,
    mass: float = 1.0,
    w: float = 0.0,
    omega: float | None = None,
) -> Fixture:
    """Network of springs and masses in its phase-space wave form.

    Positions and velocities are packed as z = [sqrt(M) xdot, i B^dag x]
    with B the signed incidence matrix (B B^dag reproduces the spring
    Laplacian), so the linear flow is generated by -iH with H Hermitian
    and all energy functionals are coordinate norms: kinetic = half the
    squared norm of the first block, potential of the second.  A
    nonlinearity of strength ``w`` enters through per-coordinate squares
    of the velocity block, modulated at frequency ``omega`` (defaulting
    to four times the top phonon frequency so the oscillating-term shift
    applies).
    """
    if n < 2:
        raise ParamOutOfRangeError("need at least two oscillators")
    if kappa <= 0 or mass <= 0:
        raise ParamOutOfRangeError("spring constant and mass must be positive")
    if topology == "chain":
        springs = _chain_springs(n, kappa)
    elif topology == "ring":
        springs = _ring_springs(n, kappa)
    else:
        raise ParamOutOfRangeError(f"unknown topology {topology!r}")
    edges = sorted(springs)
    b_g = np.zeros((n, len(edges)))
    for col, (i, j) in enumerate(edges):
        root = math.sqrt(springs[(i, j)])
        if i == j:
            b_g[i, col] = root
        else:
            b_g[i, col] = root
            b_g[j, col] = -root
    l_g = b_g @ b_g.T
    masses = np.full(n, float(mass))
    b_bar = b_g / np.sqrt(masses)[:, None]
    dim = n + len(edges)
    h = np.zeros((dim, dim), dtype=complex)
    h[:n, n:] = b_bar
    h[n:, :n] = b_bar.conj().T
    h = -h
    f1 = -1j * h
    f2 = np.zeros((dim, dim, dim), dtype=complex)
    for i in range(n):
        f2[i, i, i] = w
    sys = QuadraticSystem(f0=np.zeros(dim), f1=f1, f2=f2.reshape(dim, dim * dim))
    sigma_max = float(np.linalg.svd(b_bar, compute_uv=False).max())
    if omega is None:
        omega = 4.0 * sigma_max
    # deterministic initial condition: still positions, graded velocities
    xdot0 = 1.0 / np.sqrt(np.arange(1, n + 1, dtype=float))
    x_pos0 = np.zeros(n)
    z0 = np.concatenate([np.sqrt(masses) * xdot0, 1j * b_g.T @ x_pos0])
    subset = tuple(range(max(1, n // 2)))
    return Fixture(
        name="oscillator_network",
        params={"n": n, "topology": topology, "kappa": kappa, "mass": mass, "w": w, "omega": omega},
        system=sys,
        x0=z0.astype(complex),
        horizon=10.0,
        expected="oscillating_f2" if w else "conservative",
        extras={
            "b_g": b_g,
            "l_g": l_g,
            "masses": masses,
            "edges": edges,
            "omega": float(omega),
            "subset": subset,
            "n_masses": n,
        },
    )


def kinetic_energy(z: np.ndarray, n_masses: int) -> float:
    return 0.5 * float(np.linalg.norm(z[:n_masses]) ** 2)


def potential_energy(z: np.ndarray, n_masses: int) -> float:
    return 0.5 * float(np.linalg.norm(z[n_masses:]) ** 2)


def total_energy(z: np.ndarray, n_masses: int) -> float:
    return kinetic_energy(z, n_masses) + potential_energy(z, n_masses)


def subset_kinetic_energy(z: np.ndarray, subset) -> float:
    return 0.5 * float(np.linalg.norm(z[list(subset)]) ** 2)


BUILDERS = {
    "scalar": scalar,
    "damped_oscillator": damped_oscillator,
    "conservative_toy": conservative_toy,
    "oscillating_toy": oscillating_toy,
    "time_dep_toy": time_dep_toy,
    "oscillator_network": oscillator_network,
}


def fixture(name: str, **params) -> Fixture:
    """Look up and build a named fixture."""
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise UnknownFixtureError(
            f"unknown fixture {name!r}; available: {sorted(BUILDERS)}"
        ) from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ParamOutOfRangeError(str(exc)) from exc
