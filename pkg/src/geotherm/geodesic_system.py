"""Geodesic dynamical system on a solvable group: phase-space symplectic
structure in anholonomic momenta, Poisson brackets, Nomizu connection,
geodesic integration, the SL(3,R)/SO(3) Hamiltonians in involution and
the generalized thermodynamics of their Gibbs states.

Phase-space coordinates are ordered Phi = (p_1..p_d, Y^1..Y^d).  Brackets
carry the factor -2 convention: {p_A, p_B} = -2 f_AB^C p_C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import numkit
from .coset_geometry import left_invariant_forms, metric_at
from .errors import DivergenceDetected, DomainError, OutsideCone, SingularMomentum, StepTooLarge
from .model_catalog import ModelSpec, load_model, structure_constants
from .souriau_gibbs import PartitionEvaluation
from .thermo_geometry import christoffel_symbols, frame_curvature

__all__ = [
    "PhasePoint",
    "GdsTemperatures",
    "Trajectory",
    "gds_hamiltonian",
    "inverse_frame",
    "symplectic_form_gds",
    "poisson_bivector",
    "poisson_bracket",
    "reduced_bracket",
    "sl3_hamiltonians",
    "sl3_hamiltonians_w",
    "sl3_hamiltonian_gradients",
    "reduced_bracket_from_gradients",
    "sl3_involution_residual",
    "W_MATRIX",
    "w_change_of_variables",
    "w_inverse",
    "nomizu_connection",
    "geodesic_rhs",
    "geodesic_integrate",
    "holonomic_geodesic",
    "hamiltonian_vector_field",
    "gds_moment_map",
    "lifted_generator",
    "moment_map_factor",
    "gds_partition_sl3",
    "gds_zeta_numeric",
    "gds_stochastic_hamiltonian",
    "gds_shannon_information",
    "gds_metric",
    "gds_dreibein",
    "gds_frame_curvature",
    "gds_thermo",
]

SQRT3 = math.sqrt(3.0)
ENERGY_DRIFT_LIMIT = 1e-6
SINGULAR_MOMENTUM = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    upsilon: np.ndarray
    momenta: np.ndarray

    @classmethod
    def of(cls, upsilon, momenta) -> "PhasePoint":
        y = np.asarray(upsilon, dtype=float).reshape(-1)
        p = np.asarray(momenta, dtype=float).reshape(-1)
        if y.shape != p.shape:
            raise DomainError("coordinates and momenta must have the same length")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(p))):
            raise DomainError("phase point must be finite")
        return cls(y, p)

    @property
    def phi(self) -> np.ndarray:
        return np.concatenate([self.momenta, self.upsilon])


@dataclass(frozen=True)
class GdsTemperatures:
    lambda1: float
    lambda2: float
    lambda3: float
    volume: float = 1.0

    def __post_init__(self):
        if not self.volume > 0.0:
            raise OutsideCone("box volume must be positive")


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    upsilon: np.ndarray  # (steps+1, d)
    momenta: np.ndarray  # (steps+1, d)

    def energy(self, spec: ModelSpec | str) -> np.ndarray:
        return np.array([gds_hamiltonian(spec, p) for p in self.momenta])

    def sl3_hamiltonians(self) -> np.ndarray:
        return np.array([sl3_hamiltonians(p) for p in self.momenta])


def _momenta(spec: ModelSpec, p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size != spec.dim:
        raise DomainError(f"{spec.name} expects {spec.dim} momenta, got {p.size}")
    return p


def gds_hamiltonian(spec: ModelSpec | str, momenta) -> float:
    """1/2 kappa^AB p_A p_B."""
    spec = load_model(spec)
    p = _momenta(spec, momenta)
    return 0.5 * float(p @ np.linalg.solve(spec.kappa, p))


def inverse_frame(spec: ModelSpec | str, upsilon) -> np.ndarray:
    """E[alpha, A] = e_A^alpha, components of the vector fields dual to the left-invariant forms."""
    return np.linalg.inv(left_invariant_forms(spec, upsilon).e_matrix)


# ---------------------------------------------------------------- symplectic structure


def _split(spec: ModelSpec, phi) -> tuple[np.ndarray, np.ndarray]:
    phi = np.asarray(phi, dtype=float).reshape(-1)
    if phi.size != 2 * spec.dim:
        raise DomainError(f"{spec.name} phase space has {2 * spec.dim} coordinates")
    return phi[: spec.dim], phi[spec.dim :]


def _phase(spec: ModelSpec, point) -> np.ndarray:
    return point.phi if isinstance(point, PhasePoint) else np.asarray(point, dtype=float).reshape(-1)


def symplectic_form_gds(spec: ModelSpec | str, point) -> np.ndarray:
    """omega[Lambda, Sigma] in Phi = (p, Y) ordering; omega = 1/2 d(p_A e^A)."""
    spec = load_model(spec)
    p, y = _split(spec, _phase(spec, point))
    d = spec.dim
    e = left_invariant_forms(spec, y).e_matrix
    f = structure_constants(spec)
    w = np.zeros((2 * d, 2 * d))
    w[:d, d:] = 0.5 * e
    w[d:, :d] = -0.5 * e.T
    w[d:, d:] = -0.5 * np.einsum("a,bca,bx,cy->xy", p, f, e, e)
    return w


def poisson_bivector(spec: ModelSpec | str, point) -> np.ndarray:
    """pi[Lambda, Sigma] in Phi = (p, Y) ordering, the inverse of :func:`symplectic_form_gds`."""
    spec = load_model(spec)
    p, y = _split(spec, _phase(spec, point))
    d = spec.dim
    inv = inverse_frame(spec, y)
    f = structure_constants(spec)
    pi = np.zeros((2 * d, 2 * d))
    pi[:d, :d] = -2.0 * np.einsum("mna,a->mn", f, p)
    pi[:d, d:] = -2.0 * inv.T
    pi[d:, :d] = 2.0 * inv
    return pi


def _phase_function(fn: Callable, d: int) -> Callable[[np.ndarray], float]:
    return lambda phi: float(fn(phi[:d], phi[d:]))


def poisson_bracket(spec: ModelSpec | str, f: Callable, g: Callable, point, *, h: float | None = None) -> float:
    """{f, g} = d_Lambda f pi^{Lambda Sigma} d_Sigma g for functions f(p, Y), g(p, Y)."""
    spec = load_model(spec)
    phi = _phase(spec, point)
    d = spec.dim
    gf = numkit.fd_gradient(_phase_function(f, d), phi, h)
    gg = numkit.fd_gradient(_phase_function(g, d), phi, h)
    return float(gf @ poisson_bivector(spec, phi) @ gg)


def reduced_bracket(spec: ModelSpec | str, f: Callable, g: Callable, momenta, *, h: float | None = None) -> float:
    """{f, g} = -2 p_A f_BC^A d_B f d_C g for functions of the momenta only."""
    spec = load_model(spec)
    p = _momenta(spec, momenta)
    gf = numkit.fd_gradient(lambda q: float(f(q)), p, h)
    gg = numkit.fd_gradient(lambda q: float(g(q)), p, h)
    return float(-2.0 * np.einsum("a,bca,b,c->", p, structure_constants(spec), gf, gg))


def hamiltonian_vector_field(spec: ModelSpec | str, hamiltonian: Callable, point, *, h: float | None = None) -> np.ndarray:
    """dPhi/dt = {Phi, H} = pi . dH."""
    spec = load_model(spec)
    phi = _phase(spec, point)
    grad = numkit.fd_gradient(_phase_function(hamiltonian, spec.dim), phi, h)
    return poisson_bivector(spec, phi) @ grad


# ---------------------------------------------------------------- SL(3,R)/SO(3) Hamiltonians


def sl3_hamiltonians(momenta) -> tuple[float, float, float]:
    """(h1, h2, h3) in involution; h3 is rational in p_5."""
    p1, p2, p3, p4, p5 = (float(v) for v in np.asarray(momenta, dtype=float).reshape(5))
    if abs(p5) < SINGULAR_MOMENTUM:
        raise SingularMomentum("h3 is singular at p_5 = 0")
    h1 = (p1 * p1 - p1 * p2 + p2 * p2 + 3.0 * (p3 * p3 + p4 * p4 + p5 * p5)) / 3.0
    h2 = (
        -2.0 * p1**3
        + 3.0 * p2 * p1 * p1
        + 3.0 * (p2 * p2 - 3.0 * (p3 * p3 - 2.0 * p4 * p4 + p5 * p5)) * p1
        - 2.0 * p2**3
        - 54.0 * p3 * p4 * p5
        - 9.0 * p2 * (p3 * p3 + p4 * p4 - 2.0 * p5 * p5)
    ) / 27.0
    h3 = (p1 - 2.0 * p2 + 3.0 * p3 * p4 / p5) / 3.0
    return h1, h2, h3


def sl3_hamiltonian_gradients(momenta) -> np.ndarray:
    """Rows d h_i / d p_A of the three SL3 Hamiltonians, differentiated by hand."""
    p1, p2, p3, p4, p5 = (float(v) for v in np.asarray(momenta, dtype=float).reshape(5))
    if abs(p5) < SINGULAR_MOMENTUM:
        raise SingularMomentum("h3 is singular at p_5 = 0")
    g1 = [(2.0 * p1 - p2) / 3.0, (2.0 * p2 - p1) / 3.0, 2.0 * p3, 2.0 * p4, 2.0 * p5]
    g2 = [
        -6.0 * p1 * p1 + 6.0 * p1 * p2 + 3.0 * p2 * p2 - 9.0 * (p3 * p3 - 2.0 * p4 * p4 + p5 * p5),
        3.0 * p1 * p1 + 6.0 * p1 * p2 - 6.0 * p2 * p2 - 9.0 * (p3 * p3 + p4 * p4 - 2.0 * p5 * p5),
        -18.0 * p1 * p3 - 54.0 * p4 * p5 - 18.0 * p2 * p3,
        36.0 * p1 * p4 - 54.0 * p3 * p5 - 18.0 * p2 * p4,
        -18.0 * p1 * p5 - 54.0 * p3 * p4 + 36.0 * p2 * p5,
    ]
    g3 = [1.0 / 3.0, -2.0 / 3.0, p4 / p5, p3 / p5, -p3 * p4 / (p5 * p5)]
    return np.array([g1, np.array(g2) / 27.0, g3])


def reduced_bracket_from_gradients(spec: ModelSpec | str, grad_f, grad_g, momenta) -> float:
    """-2 p_A f_BC^A df_B dg_C with the gradients supplied."""
    spec = load_model(spec)
    p = _momenta(spec, momenta)
    return float(-2.0 * np.einsum("a,bca,b,c->", p, structure_constants(spec), grad_f, grad_g))


def sl3_involution_residual(momenta) -> float:
    """max |{h_i, h_j}| over the three pairs, with exact gradients."""
    grads = sl3_hamiltonian_gradients(momenta)
    return max(
        abs(reduced_bracket_from_gradients("SL3", grads[i], grads[j], momenta))
        for i in range(3)
        for j in range(i + 1, 3)
    )


def sl3_hamiltonians_w(w) -> tuple[float, float, float]:
    """The same Hamiltonians written in the w variables."""
    w1, w2, w3, w4, w5 = (float(v) for v in np.asarray(w, dtype=float).reshape(5))
    if abs(w1) < SINGULAR_MOMENTUM:
        raise SingularMomentum("h3 is singular at w_1 = 0")
    h1 = w1 * w1 + w2 * w2 + w3 * w3 + w4 * w4 + w5 * w5
    h2 = (w4 + w5 / SQRT3) * w1 * w1 - 2.0 * w2 * w3 * w1 + (
        (3.0 * SQRT3 * w5 - 9.0 * w4) * w2 * w2 + 2.0 * SQRT3 * w5 * (w5 * w5 - 3.0 * (w3 * w3 + w4 * w4))
    ) / 9.0
    h3 = w2 * w3 / w1 - w4 - w5 / SQRT3
    return h1, h2, h3


# p = W_MATRIX @ w
W_MATRIX = np.array(
    [
        [0.0, 0.0, 0.0, -1.0, SQRT3],
        [0.0, 0.0, 0.0, 1.0, SQRT3],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0],
    ]
)
W_MATRIX.setflags(write=False)


def w_change_of_variables(momenta) -> np.ndarray:
    """w = (p5, p4, p3, (p2 - p1)/2, (p1 + p2)/(2 sqrt 3))."""
    p1, p2, p3, p4, p5 = np.asarray(momenta, dtype=float).reshape(5)
    return np.array([p5, p4, p3, 0.5 * (p2 - p1), (p1 + p2) / (2.0 * SQRT3)])


def w_inverse(w) -> np.ndarray:
    return W_MATRIX @ np.asarray(w, dtype=float).reshape(5)


# ---------------------------------------------------------------- geodesics


def nomizu_connection(spec: ModelSpec | str) -> np.ndarray:
    """G[A, B, C] = Gamma_AB^C with nabla_{T_A} T_B = Gamma_AB^C T_C (Levi-Civita, left-invariant metric)."""
    spec = load_model(spec)
    f = structure_constants(spec)
    kappa = spec.kappa
    kinv = np.linalg.inv(kappa)
    t1 = np.einsum("ce,ad,bed->abc", kinv, kappa, f)
    t2 = np.einsum("ce,bd,aed->abc", kinv, kappa, f)
    return 0.5 * (f - t1 - t2)


def geodesic_rhs(spec: ModelSpec, gamma: np.ndarray, state: np.ndarray) -> np.ndarray:
    """d/dt (Y, Pi) with dPi^C/dt = -Gamma_AB^C Pi^A Pi^B and dY/dt = e^-1 Pi."""
    d = spec.dim
    y, vel = state[:d], state[d:]
    dy = inverse_frame(spec, y) @ vel
    dvel = -np.einsum("abc,a,b->c", gamma, vel, vel)
    return np.concatenate([dy, dvel])


def geodesic_integrate(
    spec: ModelSpec | str,
    start: PhasePoint,
    t_end: float,
    steps: int,
    *,
    drift_limit: float = ENERGY_DRIFT_LIMIT,
) -> Trajectory:
    """Fixed-step RK4; raises StepTooLarge when the relative energy drift exceeds ``drift_limit``."""
    spec = load_model(spec)
    if steps < 1 or not math.isfinite(t_end):
        raise DomainError("need a finite end time and at least one step")
    gamma = nomizu_connection(spec)
    kinv = np.linalg.inv(spec.kappa)
    d = spec.dim
    state = np.concatenate([start.upsilon, kinv @ start.momenta])
    dt = t_end / steps
    e0 = gds_hamiltonian(spec, start.momenta)
    scale = max(abs(e0), 1e-300)
    ys = np.empty((steps + 1, d))
    ps = np.empty((steps + 1, d))
    ys[0], ps[0] = start.upsilon, start.momenta
    rhs = lambda s: geodesic_rhs(spec, gamma, s)  # noqa: E731
    for i in range(1, steps + 1):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * dt * k1)
        k3 = rhs(state + 0.5 * dt * k2)
        k4 = rhs(state + dt * k3)
        state = state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[i] = state[:d]
        ps[i] = spec.kappa @ state[d:]
        if not np.all(np.isfinite(state)):
            raise StepTooLarge(f"trajectory left the finite range at step {i}")
        drift = abs(gds_hamiltonian(spec, ps[i]) - e0) / scale
        if drift > drift_limit:
            raise StepTooLarge(f"energy drift {drift:.3e} exceeds {drift_limit:.1e} at step {i}")
    return Trajectory(np.linspace(0.0, t_end, steps + 1), ys, ps)


def holonomic_geodesic(spec: ModelSpec | str, start: PhasePoint, t_end: float, steps: int) -> np.ndarray:
    """Independent route: RK4 on the coordinate geodesic equation of g = e^T kappa e with
    finite-difference Christoffel symbols.  Returns the coordinate path (steps+1, d)."""
    spec = load_model(spec)
    d = spec.dim
    metric = lambda y: metric_at(spec, y)  # noqa: E731
    y0 = np.asarray(start.upsilon, dtype=float)
    v0 = inverse_frame(spec, y0) @ np.linalg.solve(spec.kappa, start.momenta)

    def rhs(s):
        y, v = s[:d], s[d:]
        gam = christoffel_symbols(metric, y)
        return np.concatenate([v, -np.einsum("mab,a,b->m", gam, v, v)])

    state = np.concatenate([y0, v0])
    dt = t_end / steps
    out = [y0.copy()]
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * dt * k1)
        k3 = rhs(state + 0.5 * dt * k2)
        k4 = rhs(state + dt * k3)
        state = state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out.append(state[:d].copy())
    return np.array(out)


# ---------------------------------------------------------------- moment map on phase space


def gds_moment_map(spec: ModelSpec | str, index: int, point) -> float:
    """mu_N = -1/2 p_N."""
    spec = load_model(spec)
    p, _ = _split(spec, _phase(spec, point))
    return -0.5 * float(p[index])


def lifted_generator(spec: ModelSpec | str, index: int, point) -> np.ndarray:
    """Components on Phi = (p, Y) of k_N = t_N + f_NB^A p_A d/dp_B: the right action of T_N lifted to phase space."""
    spec = load_model(spec)
    p, y = _split(spec, _phase(spec, point))
    f = structure_constants(spec)
    return np.concatenate([np.einsum("ba,a->b", f[index], p), inverse_frame(spec, y)[:, index]])


def moment_map_factor(spec: ModelSpec | str, index: int, test_fns, points) -> tuple[float, float]:
    """Least-squares c in {mu_N, f} = c k_N f over all test functions and points.

    Returns (c, max residual of the fitted relation).
    """
    spec = load_model(spec)
    lhs, rhs = [], []
    for point in points:
        phi = _phase(spec, point)
        k = lifted_generator(spec, index, phi)
        for fn in test_fns:
            lhs.append(poisson_bracket(spec, lambda p, y: -0.5 * p[index], fn, phi))
            rhs.append(float(k @ numkit.fd_gradient(_phase_function(fn, spec.dim), phi)))
    lhs, rhs = np.array(lhs), np.array(rhs)
    denom = float(rhs @ rhs)
    if denom == 0.0:
        return float("nan"), float(np.max(np.abs(lhs)))
    c = float(lhs @ rhs) / denom
    return c, float(np.max(np.abs(lhs - c * rhs)))


# ---------------------------------------------------------------- GDS thermodynamics


def _gds_check(lambda1: float, volume: float) -> None:
    if not (lambda1 > 0.0 and math.isfinite(lambda1)):
        raise OutsideCone(f"lambda_1 = {lambda1} must be positive")
    if not volume > 0.0:
        raise OutsideCone(f"box volume {volume} must be positive")


def gds_partition_sl3(lambda1: float, lambda3: float, volume: float = 1.0) -> PartitionEvaluation:
    """Tabulated Z = 2 pi^(5/2) exp(lambda3^2 / (12 lambda1)) lambda1^(-5/2) V at lambda2 = 0."""
    _gds_check(lambda1, volume)
    z = 2.0 * math.pi**2.5 * math.exp(lambda3 * lambda3 / (12.0 * lambda1)) * lambda1**-2.5 * volume
    return PartitionEvaluation(z, 0.0, "closed-form")


def _w_exponent(lam1: float, lam2: float, lam3: float, w: np.ndarray) -> np.ndarray:
    """-(lam1 h1 + lam2 h2 + lam3 h3) on w points with shape (..., 5); lam3 = 0 drops h3."""
    w1, w2, w3, w4, w5 = np.moveaxis(w, -1, 0)
    h1 = w1 * w1 + w2 * w2 + w3 * w3 + w4 * w4 + w5 * w5
    h2 = (w4 + w5 / SQRT3) * w1 * w1 - 2.0 * w2 * w3 * w1 + (
        (3.0 * SQRT3 * w5 - 9.0 * w4) * w2 * w2 + 2.0 * SQRT3 * w5 * (w5 * w5 - 3.0 * (w3 * w3 + w4 * w4))
    ) / 9.0
    out = -lam1 * h1 - lam2 * h2
    if lam3 != 0.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = out - lam3 * (w2 * w3 / w1 - w4 - w5 / SQRT3)
    return out


RAY_RADII = (8.0, 16.0, 32.0, 64.0)


def _ray_divergence(exponent: Callable[[np.ndarray], np.ndarray], rng: np.random.Generator) -> bool:
    """Scan lines b + t u (random bases, directions in every coordinate 2-plane plus random 5D ones)
    and report growth of the exponent that outruns every Gaussian tail."""
    dirs = []
    for i in range(5):
        for j in range(i + 1, 5):
            for ang in np.linspace(0.0, np.pi, 12, endpoint=False):
                u = np.zeros(5)
                u[i], u[j] = math.cos(ang), math.sin(ang)
                dirs.append(u)
    rand = rng.standard_normal((120, 5))
    dirs.extend(rand / np.linalg.norm(rand, axis=1, keepdims=True))
    dirs = np.array(dirs)
    near_axis = np.zeros((18, 5))
    near_axis[:, 0] = np.concatenate([10.0 ** -np.arange(9), -(10.0 ** -np.arange(9))])
    bases = np.vstack([np.zeros((1, 5)), near_axis, 0.5 * rng.standard_normal((40, 5))])
    pts = bases[:, None, None, :] + np.array(RAY_RADII)[None, None, :, None] * dirs[None, :, None, :]
    vals = exponent(pts)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    rising = np.all(np.diff(vals, axis=-1) > 0.0, axis=-1) & (vals[..., -1] > vals[..., 0] + 50.0)
    return bool(np.any(rising)) or bool(np.any(np.isposinf(vals)))


def gds_zeta_numeric(
    lambda1: float,
    lambda2: float,
    lambda3: float,
    volume: float = 1.0,
    *,
    measure: str = "w",
    seed: int = 0,
    tol: float = 1e-10,
) -> PartitionEvaluation:
    """Independent route: integrate exp(-sum lambda_i h_i) over the w variables numerically.

    ``measure="w"`` uses d^5 w; ``measure="p"`` uses d^5 p = |det W| d^5 w.  Divergent
    integrands (lambda_2 != 0, or lambda_3 != 0 near w_1 = 0) raise DivergenceDetected.
    """
    _gds_check(lambda1, volume)
    if measure not in ("w", "p"):
        raise DomainError(f"unknown measure {measure!r}")
    rng = numkit.make_rng(seed)
    expo = lambda w: _w_exponent(lambda1, lambda2, lambda3, w)  # noqa: E731
    with np.errstate(over="ignore", invalid="ignore"):
        if _ray_divergence(expo, rng):
            raise DivergenceDetected(
                f"exp(-lambda.h) grows without bound at lambda = ({lambda1}, {lambda2}, {lambda3})"
            )
    if lambda2 != 0.0:
        raise DivergenceDetected("the cubic Hamiltonian makes the integral diverge for lambda_2 != 0")
    width = 12.0 / math.sqrt(lambda1)
    # w4 and w5 factor out of the lambda_2 = 0 integrand
    i4 = integrate.quad(lambda x: math.exp(-lambda1 * x * x + lambda3 * x), -width + lambda3 / (2 * lambda1),
                        width + lambda3 / (2 * lambda1), epsabs=0.0, epsrel=tol)
    c5 = lambda3 / (2.0 * SQRT3 * lambda1)
    i5 = integrate.quad(lambda x: math.exp(-lambda1 * x * x + lambda3 * x / SQRT3), c5 - width, c5 + width,
                        epsabs=0.0, epsrel=tol)

    def inner(w3, w2, w1):
        if w1 == 0.0 and lambda3 != 0.0:
            return 0.0
        coupling = lambda3 * w2 * w3 / w1 if lambda3 != 0.0 else 0.0
        return math.exp(-lambda1 * (w1 * w1 + w2 * w2 + w3 * w3) - coupling)

    i123 = integrate.nquad(
        inner,
        [(-width, width)] * 3,
        opts=[{"epsabs": 0.0, "epsrel": tol * 10}, {"epsabs": 0.0, "epsrel": tol * 10},
              {"epsabs": 0.0, "epsrel": tol * 10, "points": [0.0]}],
    )
    value = i4[0] * i5[0] * i123[0] * volume
    err = abs(value) * (i4[1] / i4[0] + i5[1] / i5[0] + i123[1] / max(i123[0], 1e-300))
    if measure == "p":
        jac = abs(np.linalg.det(W_MATRIX))
        value, err = value * jac, err * jac
    return PartitionEvaluation(value, err, "quadrature")


def gds_stochastic_hamiltonian(lambda1: float, lambda3: float, volume: float = 1.0) -> float:
    """-log Z of the tabulated partition function."""
    _gds_check(lambda1, volume)
    return (
        -lambda3 * lambda3 / (12.0 * lambda1)
        - 2.5 * math.log(math.pi / lambda1)
        - math.log(volume)
        - math.log(2.0)
    )


def gds_shannon_information(lambda1: float, lambda3: float, volume: float = 1.0) -> float:
    """(5/2) log lambda1 - log(2V) - 5/2 - (5/2) log pi."""
    _gds_check(lambda1, volume)
    return 2.5 * math.log(lambda1) - math.log(2.0 * volume) - 2.5 - 2.5 * math.log(math.pi)


def gds_metric(lambda1: float, lambda3: float, volume: float = 1.0) -> np.ndarray:
    """Tabulated Hessian of the stochastic Hamiltonian in (lambda1, lambda3, V)."""
    _gds_check(lambda1, volume)
    l1, l3 = lambda1, lambda3
    g = np.zeros((3, 3))
    g[0, 0] = -(15.0 * l1 + l3 * l3) / (6.0 * l1**3)
    g[0, 1] = g[1, 0] = l1 * l3 / (6.0 * l1**3)
    g[1, 1] = -(l1 * l1) / (6.0 * l1**3)
    g[2, 2] = 1.0 / volume**2
    return g


GDS_ETA = np.diag([-1.0, -1.0, 1.0])


def gds_dreibein(lambda1: float, lambda3: float, volume: float = 1.0) -> np.ndarray:
    """Tabulated coframe E[i, mu] on (d lambda1, d lambda3, dV) with metric = -E1^2 - E2^2 + E3^2."""
    _gds_check(lambda1, volume)
    l1, l3 = lambda1, lambda3
    q = 15.0 * l1 + l3 * l3
    e = np.zeros((3, 3))
    e[0, 0] = math.sqrt(q) / (math.sqrt(6.0) * l1**1.5)
    e[0, 1] = -l3 / (math.sqrt(6.0) * math.sqrt(l1) * math.sqrt(q))
    e[1, 1] = math.sqrt(2.5) / math.sqrt(q)
    e[2, 2] = 1.0 / volume
    return e


def gds_frame_curvature(lambda1: float, lambda3: float, volume: float = 1.0) -> np.ndarray:
    """R^{ij}_{kl} of the tabulated GDS metric (a Hessian metric) in the tabulated dreibein."""
    return frame_curvature(
        lambda x: gds_metric(*x), lambda x: gds_dreibein(*x), GDS_ETA, [lambda1, lambda3, volume], hessian=True
    )


def gds_thermo(lambda1: float, lambda3: float, volume: float = 1.0) -> dict:
    """Stochastic Hamiltonian, Shannon information, metric, dreibein and the (1,2) frame curvature."""
    r = gds_frame_curvature(lambda1, lambda3, volume)
    return {
        "stochastic_hamiltonian": gds_stochastic_hamiltonian(lambda1, lambda3, volume),
        "shannon_information": gds_shannon_information(lambda1, lambda3, volume),
        "metric": gds_metric(lambda1, lambda3, volume),
        "dreibein": gds_dreibein(lambda1, lambda3, volume),
        "curvature_12": float(r[0, 1, 0, 1]),
        "frame_curvature": r,
    }
