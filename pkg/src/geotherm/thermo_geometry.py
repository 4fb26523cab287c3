"""Generalized thermodynamics: stochastic Hamiltonian, Shannon information,
Hessian metrics, Levi-Civita curvature of a metric field, the H2 Gibbs-state
geometry and the classical ideal-gas / van der Waals equilibrium surfaces.

Metrics are stored as the raw Hessian of the stochastic Hamiltonian; signs enter
only through the frame metric ``eta`` when a coframe is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numkit
from .errors import OutsideCone, OutsideDomain, SingularMetric

__all__ = [
    "StochasticModel",
    "EquilibriumSurface",
    "stochastic_hamiltonian",
    "shannon_information",
    "hessian_metric",
    "christoffel_symbols",
    "Curvature",
    "curvature_from_metric",
    "frame_curvature",
    "h2_model",
    "h2_stochastic_hamiltonian",
    "h2_shannon_information",
    "h2_metric",
    "h2_dreibein",
    "h2_curvature_components",
    "h2_frame_curvature",
    "lagrangian_constraint",
    "canonical_metric",
    "ideal_gas_surface",
    "ideal_gas_metric",
    "vdw_surface",
    "vdw_metric",
    "vdw_zweibein",
    "vdw_curvature",
    "vdw_intrinsic_curvature",
    "vdw_singular_polynomial",
    "vdw_critical",
    "vdw_thermo",
]


@dataclass(frozen=True)
class StochasticModel:
    """``log_partition(beta)`` returns log Z; ``in_cone(beta)`` guards evaluation."""

    log_partition: Callable[[np.ndarray], float]
    dimension: int
    in_cone: Callable[[np.ndarray], bool] = lambda beta: True


def _checked(model: StochasticModel, beta) -> np.ndarray:
    b = np.asarray(beta, dtype=float)
    if b.shape != (model.dimension,):
        raise OutsideDomain(f"expected {model.dimension} temperatures, got shape {b.shape}")
    if not model.in_cone(b):
        raise OutsideCone(f"temperature {b} is outside the model's cone")
    return b


def stochastic_hamiltonian(model: StochasticModel, beta) -> float:
    """H = -log Z."""
    return -float(model.log_partition(_checked(model, beta)))


def shannon_information(model: StochasticModel, beta, *, gradient=None) -> float:
    """I = H - beta . grad H (Legendre transform); the gradient is finite-differenced unless given."""
    b = _checked(model, beta)
    h = lambda x: -float(model.log_partition(x))  # noqa: E731
    grad = numkit.fd_gradient(h, b) if gradient is None else np.asarray(gradient, dtype=float)
    return h(b) - float(b @ grad)


def hessian_metric(model: StochasticModel, beta, *, h: float | None = None) -> np.ndarray:
    """d^2 H / d beta^i d beta^j by finite differences."""
    b = _checked(model, beta)
    return numkit.fd_hessian(lambda x: -float(model.log_partition(x)), b, h=h)


# ---------------------------------------------------------------- curvature


def _metric_checked(metric: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    g = np.asarray(metric(x), dtype=float)
    if g.shape != (x.size, x.size) or not np.all(np.isfinite(g)):
        raise SingularMetric(f"metric is not a finite {x.size}x{x.size} matrix at {x}")
    if abs(np.linalg.det(g)) < 1e-14 * max(1.0, float(np.max(np.abs(g)))) ** x.size:
        raise SingularMetric(f"metric is degenerate at {x}")
    return g


def christoffel_symbols(metric: Callable[[np.ndarray], np.ndarray], point, *, h: float | None = None) -> np.ndarray:
    """Gamma[m, a, b] = Gamma^m_ab of the Levi-Civita connection."""
    x = np.asarray(point, dtype=float)
    g = _metric_checked(metric, x)
    ginv = np.linalg.inv(g)
    n = x.size
    dg = np.empty((n, n, n))  # dg[c, a, b] = d_c g_ab
    for c in range(n):
        e = np.zeros(n)
        e[c] = 1.0
        dg[c] = numkit.fd_derivative(lambda y: np.asarray(metric(y), dtype=float), x, e, h=h)
    lower = 0.5 * (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg)  # [m, a, b] with m lowered
    return np.einsum("mk,kab->mab", ginv, lower)


@dataclass(frozen=True)
class Curvature:
    riemann: np.ndarray  # R[m, n, a, b] = R^m_{n a b}
    ricci: np.ndarray
    scalar: float
    metric: np.ndarray

    def antisymmetry_residual(self) -> float:
        lowered = np.einsum("km,knab->mnab", self.metric, self.riemann)
        return float(
            max(
                np.max(np.abs(self.riemann + np.transpose(self.riemann, (0, 1, 3, 2)))),
                np.max(np.abs(lowered + np.transpose(lowered, (1, 0, 2, 3)))),
            )
        )

    def bianchi_residual(self) -> float:
        r = self.riemann
        cyc = r + np.transpose(r, (0, 2, 3, 1)) + np.transpose(r, (0, 3, 1, 2))
        return float(np.max(np.abs(cyc)))


def curvature_from_metric(
    metric: Callable[[np.ndarray], np.ndarray], point, *, h: float | None = None
) -> Curvature:
    """R^m_{nab} = d_a Gamma^m_bn - d_b Gamma^m_an + Gamma^m_ak Gamma^k_bn - Gamma^m_bk Gamma^k_an."""
    x = np.asarray(point, dtype=float)
    n = x.size
    step = numkit.fd_step(float(np.max(np.abs(x))) if n else 0.0, 1e-3) if h is None else h
    gamma = christoffel_symbols(metric, x, h=step * 0.1)
    dgamma = np.empty((n, n, n, n))  # dgamma[a, m, b, c] = d_a Gamma^m_bc
    for a in range(n):
        e = np.zeros(n)
        e[a] = 1.0
        dgamma[a] = numkit.fd_derivative(lambda y: christoffel_symbols(metric, y, h=step * 0.1), x, e, h=step)
    riem = (
        np.einsum("ambn->mnab", dgamma)
        - np.einsum("bman->mnab", dgamma)
        + np.einsum("mak,kbn->mnab", gamma, gamma)
        - np.einsum("mbk,kan->mnab", gamma, gamma)
    )
    g = _metric_checked(metric, x)
    ricci = np.einsum("mamb->ab", riem)
    scalar = float(np.einsum("ab,ab->", np.linalg.inv(g), ricci))
    return Curvature(riem, ricci, scalar, g)


def hessian_metric_curvature(
    metric: Callable[[np.ndarray], np.ndarray], point, *, h: float | None = None
) -> Curvature:
    """Curvature of a metric that is the Hessian of a potential.

    With T_abc = d_a g_bc totally symmetric, Gamma^m_ab = 1/2 g^mk T_kab and the
    fourth derivatives cancel, so only first derivatives of the metric are needed.
    """
    x = np.asarray(point, dtype=float)
    n = x.size
    g = _metric_checked(metric, x)
    ginv = np.linalg.inv(g)
    t = np.empty((n, n, n))
    for c in range(n):
        e = np.zeros(n)
        e[c] = 1.0
        t[c] = numkit.fd_derivative(lambda y: np.asarray(metric(y), dtype=float), x, e, h=h)
    t = (t + np.transpose(t, (1, 2, 0)) + np.transpose(t, (2, 0, 1))) / 3.0
    gamma = 0.5 * np.einsum("mk,kab->mab", ginv, t)
    # d_a Gamma^m_bn reduces to the derivative of g^-1 once the symmetric d_a T_kbn drops out
    dgamma = -0.5 * np.einsum("mp,apq,qk,kbn->mnab", ginv, t, ginv, t)
    riem = (
        dgamma
        - np.transpose(dgamma, (0, 1, 3, 2))
        + np.einsum("mak,kbn->mnab", gamma, gamma)
        - np.einsum("mbk,kan->mnab", gamma, gamma)
    )
    ricci = np.einsum("mamb->ab", riem)
    scalar = float(np.einsum("ab,ab->", ginv, ricci))
    return Curvature(riem, ricci, scalar, g)


def frame_curvature(
    metric: Callable[[np.ndarray], np.ndarray],
    coframe: Callable[[np.ndarray], np.ndarray],
    eta,
    point,
    *,
    h: float | None = None,
    hessian: bool = False,
) -> np.ndarray:
    """R^{ij}_{kl}: components of the curvature 2-form R^{ij} = (1/2) R^{ij}_{kl} E^k ^ E^l.

    ``coframe(x)[i, mu]`` is E^i_mu and ``eta`` the frame metric, so g = E^T eta E.
    ``hessian=True`` uses :func:`hessian_metric_curvature`.
    """
    x = np.asarray(point, dtype=float)
    route = hessian_metric_curvature if hessian else curvature_from_metric
    curv = route(metric, x, h=h)
    e = np.asarray(coframe(x), dtype=float)
    einv = np.linalg.inv(e)  # einv[mu, i] = E_i^mu
    eta = np.asarray(eta, dtype=float)
    mixed = np.einsum("im,mnab,nj,ak,bl->ijkl", e, curv.riemann, einv, einv, einv)
    return np.einsum("ikab,kj->ijab", mixed, np.linalg.inv(eta))


# ---------------------------------------------------------------- H2 Gibbs-state geometry


def _h2_norm(beta) -> float:
    d, b, z = (float(v) for v in beta)
    nsq = d * d - b * b - z * z
    if not (d > 0.0 and nsq > 0.0):
        raise OutsideCone(f"H2 temperature ({d}, {b}, {z}) is outside the cone")
    return math.sqrt(nsq)


def _h2_log_partition(beta) -> float:
    n = _h2_norm(beta)
    return math.log(math.pi) - n - math.log(n)


def _h2_in_cone(beta) -> bool:
    d, b, z = beta
    return d > 0.0 and d * d - b * b - z * z > 0.0


def h2_model() -> StochasticModel:
    """Stochastic model of H2 Gibbs states in the temperatures (delta, beta, zeta)."""
    return StochasticModel(_h2_log_partition, 3, _h2_in_cone)


def h2_stochastic_hamiltonian(delta: float, beta: float, zeta: float) -> float:
    """N + (1/2) log N^2 - log pi."""
    n = _h2_norm((delta, beta, zeta))
    return n + 0.5 * math.log(n * n) - math.log(math.pi)


def h2_shannon_information(delta: float, beta: float, zeta: float) -> float:
    """(1/2)(log(N^2 / pi^2) - 2)."""
    n = _h2_norm((delta, beta, zeta))
    return 0.5 * (math.log(n * n / math.pi**2) - 2.0)


def h2_metric(delta: float, beta: float, zeta: float) -> np.ndarray:
    """Tabulated Hessian of the H2 stochastic Hamiltonian, rows/columns (delta, beta, zeta)."""
    n = _h2_norm((delta, beta, zeta))
    d, b, z = delta, beta, zeta
    g = np.zeros((3, 3))
    g[1, 1] = -(b * b + (n + 1) * (d - z) * (d + z))
    g[1, 0] = g[0, 1] = (n + 2) * b * d
    g[1, 2] = g[2, 1] = -(n + 2) * b * z
    g[0, 0] = -(d * d + b * b * (n + 1) + z * z * (n + 1))
    g[0, 2] = g[2, 0] = (n + 2) * d * z
    g[2, 2] = (n + 1) * (b - d) * (b + d) - z * z
    return g / n**4


def h2_dreibein(delta: float, beta: float, zeta: float) -> np.ndarray:
    """Tabulated coframe V[i, mu] on (d delta, d beta, d zeta) with metric = -sum V^i V^i."""
    n = _h2_norm((delta, beta, zeta))
    d, b, z = delta, beta, zeta
    v = np.zeros((3, 3))
    c1 = 1.0 / (n * n * math.sqrt(n + 2) * (d - z))
    v[0, 1] = c1 * (-b * (n + 2) * (d - z))
    v[0, 0] = c1 * (b * b * (n + 1) + (d - z) * (d - z * (n + 1)))
    v[0, 2] = c1 * ((d - z) * (d - z + d * n) - b * b * (n + 1))
    c2 = math.sqrt(n + 1) / (n * (d - z))
    v[1, 1] = c2 * (d - z)
    v[1, 0] = -c2 * b
    v[1, 2] = c2 * b
    if n * n == 4.0:
        raise SingularMetric("the tabulated dreibein is 0/0 at N = 2")
    c3 = math.sqrt((-n * n + n + 2) / ((4 - n * n) * (d - z) ** 2))
    v[2, 0] = c3
    v[2, 2] = -c3
    return v


def h2_curvature_components(delta: float, mu: float) -> tuple[float, float, float, float]:
    """Tabulated (F, G, Q, P) of the H2 thermodynamic curvature in the frame of :func:`h2_dreibein`."""
    if not (delta > 0.0 and 0.0 <= mu < delta):
        raise OutsideCone(f"(delta={delta}, mu={mu}) needs 0 <= mu < delta")
    d, m = delta, mu
    s = math.sqrt(d * d - m * m)
    d2, m2 = d * d, m * m
    nf = -(d**4 - 2 * d2 * m2 - 4 * d2 + m**4 + 4 * m2) * (
        d**8 - 4 * d**6 * m2 + 71 * d**6 + 6 * d**4 * m**4 - 213 * d**4 * m2 + 384 * d**4 - 4 * d2 * m**6
        + 213 * d2 * m**4 - 768 * d2 * m2 - 426 * d2 * m2 * s + 426 * d2 * s - 426 * m2 * s + 104 * s
        - 13 * m**6 * s + 39 * d2 * m**4 * s + 213 * m**4 * s + 284 * d2 + 13 * d**6 * s - 39 * d**4 * m2 * s
        + 213 * d**4 * s + m**8 - 71 * m**6 + 384 * m**4 - 284 * m2 + 16
    )
    df = (
        4 * (s + 1) * (s + 2) ** 3 * (s + d2 - m2) ** 2 * (s - d2 + m2 + 2) * (3 * s + d2 - m2 + 2)
    )
    base = s - d2 + m2 + 2
    ng = (
        (d2 - m2)
        * (((-d2 + m2 + 4) / base) ** 1.5 if base != 0.0 else math.nan)
        * (
            d**6 - 3 * d**4 * m2 + 26 * d**4 + 3 * d2 * m**4 - 52 * d2 * m2 - 16 * d2 * m2 * s + 44 * d2 * s
            - 44 * m2 * s + 20 * s + 8 * m**4 * s + 41 * d2 + 8 * d**4 * s - m**6 + 26 * m**4 - 41 * m2 + 4
        )
    )
    dg = 2 * (s + 1) * (s + 2) ** 2.5 * (s + d2 - m2) ** 2 * (3 * s + d2 - m2 + 2)
    nq = (d2 - m2 - 4) ** 4 * (
        d**6 - 3 * d**4 * m2 + 25 * d**4 + 3 * d2 * m**4 - 50 * d2 * m2 - 16 * d2 * m2 * s + 38 * d2 * s
        - 38 * m2 * s + 8 * s + 8 * m**4 * s + 28 * d2 + 8 * d**4 * s - m**6 + 25 * m**4 - 28 * m2
    )
    dq = 4 * (s + 2) ** 6 * (s - d2 + m2 + 2) ** 4
    np_ = (d2 - m2 - 4) ** 2 * (d2 - m2) * (
        14 * d**10 - 70 * d**8 * m2 + 340 * d**8 + 140 * d**6 * m**4 - 1360 * d**6 * m2 + 1562 * d**6
        - 140 * d**4 * m**6 + 2040 * d**4 * m**4 - 4686 * d**4 * m2 + 1864 * d**4 + 70 * d2 * m**8
        - 1360 * d2 * m**6 + 4686 * d2 * m**4 - 3728 * d2 * m2 - 4030 * d2 * m2 * s + 1210 * d2 * s
        - 1210 * m2 * s + 136 * s - m**10 * s + 5 * d2 * m**8 * s + 89 * m**8 * s - 356 * d2 * m**6 * s
        - 869 * m**6 * s + 2607 * d2 * m**4 * s + 2015 * m**4 * s + 524 * d2 + d**10 * s - 5 * d**8 * m2 * s
        + 89 * d**8 * s - 356 * d**6 * m2 * s + 869 * d**6 * s + 10 * d**6 * m**4 * s - 2607 * d**4 * m2 * s
        + 2015 * d**4 * s - 10 * d**4 * m**6 * s + 534 * d**4 * m**4 * s - 14 * m**10 + 340 * m**8
        - 1562 * m**6 + 1864 * m**4 - 524 * m2 + 16
    )
    dp = (
        4 * (s + 1) ** 2 * (s + 2) ** 3 * (s + d2 - m2) ** 2 * (s - d2 + m2 + 2) ** 2 * (3 * s + d2 - m2 + 2) ** 2
    )
    if df == 0.0 or dg == 0.0 or dq == 0.0 or dp == 0.0 or not math.isfinite(ng):
        raise SingularMetric(f"the tabulated components are 0/0 at N = sqrt(delta^2 - mu^2) = {s}")
    return nf / df, ng / dg, nq / dq, np_ / dp


H2_ETA = -np.eye(3)


def h2_frame_curvature(delta: float, mu: float, theta: float, *, h: float | None = None) -> np.ndarray:
    """R^{ij}_{kl} of the Hessian metric in the tabulated dreibein.

    Uses first finite differences of :func:`h2_metric`, which is the Hessian of -log Z.
    """
    point = np.array([delta, mu * math.cos(theta), mu * math.sin(theta)])
    return frame_curvature(lambda x: h2_metric(*x), lambda x: h2_dreibein(*x), H2_ETA, point, h=h, hessian=True)


# ---------------------------------------------------------------- classical equilibrium surfaces


@dataclass(frozen=True)
class EquilibriumSurface:
    """Thermic P = A(T, V) and caloric U = B(T, V) immersion functions."""

    thermic: Callable[[float, float], float]
    caloric: Callable[[float, float], float]


def lagrangian_constraint(surface: EquilibriumSurface, temperature: float, volume: float) -> float:
    """T d_T A - A - d_V B (vanishes on a Lagrangian equilibrium surface)."""
    t, v = float(temperature), float(volume)
    if not (t > 0.0 and v > 0.0):
        raise OutsideDomain("temperature and volume must be positive")
    da_dt = numkit.fd_derivative(lambda x: surface.thermic(x[0], v), np.array([t]), np.array([1.0]))
    db_dv = numkit.fd_derivative(lambda x: surface.caloric(t, x[0]), np.array([v]), np.array([1.0]))
    return float(t * da_dt - surface.thermic(t, v) - db_dv)


def canonical_metric(surface: EquilibriumSurface, temperature: float, volume: float) -> np.ndarray:
    """Symmetrized d(1/T) (x) dB + d(A/T) (x) dV in coordinates (T, V)."""
    x = np.array([float(temperature), float(volume)])
    d_inv_t = np.array([-1.0 / x[0] ** 2, 0.0])
    d_b = numkit.fd_gradient(lambda y: surface.caloric(y[0], y[1]), x)
    d_a_over_t = numkit.fd_gradient(lambda y: surface.thermic(y[0], y[1]) / y[0], x)
    d_v = np.array([0.0, 1.0])
    m = np.outer(d_inv_t, d_b) + np.outer(d_a_over_t, d_v)
    return 0.5 * (m + m.T)


def ideal_gas_surface(k_b: float = 1.0, particles: float = 1.0) -> EquilibriumSurface:
    return EquilibriumSurface(
        lambda t, v: k_b * particles * t / v,
        lambda t, v: 1.5 * k_b * t,
    )


def ideal_gas_metric(temperature: float, volume: float, k_b: float = 1.0, particles: float = 1.0) -> np.ndarray:
    """-k_B (3/2 (dT/T)^2 + N (dV/V)^2)."""
    t, v = float(temperature), float(volume)
    if not (t > 0.0 and v > 0.0):
        raise OutsideDomain("temperature and volume must be positive")
    return -k_b * np.diag([1.5 / t**2, particles / v**2])


def _vdw_domain(t: float, v: float, b: float, n: float) -> None:
    if not (t > 0.0 and v > b * n):
        raise OutsideDomain(f"van der Waals needs T > 0 and V > b n (got T={t}, V={v})")


def vdw_surface(a: float, b: float, n: float = 1.0, r: float = 1.0) -> EquilibriumSurface:
    return EquilibriumSurface(
        lambda t, v: (a * b * n**3 - a * n * n * v + n * r * t * v * v) / (v * v * (v - b * n)),
        lambda t, v: n * 1.5 * r * t - a * n * n / v,
    )


def vdw_metric(temperature: float, volume: float, a: float, b: float, n: float = 1.0, r: float = 1.0) -> np.ndarray:
    """Tabulated induced metric on the van der Waals surface, coordinates (T, V)."""
    t, v = float(temperature), float(volume)
    _vdw_domain(t, v, b, n)
    gvv = -2.0 * t * (r * t * v**3 - 2.0 * a * n * (v - b * n) ** 2) / (v**3 * (v - b * n) ** 2)
    return n / (2.0 * t * t) * np.diag([-3.0 * r, gvv])


def vdw_zweibein(temperature: float, volume: float, a: float, b: float, n: float = 1.0, r: float = 1.0) -> np.ndarray:
    """Coframe with metric = -(e1^2 + e2^2); rows e^i on (dT, dV)."""
    t, v = float(temperature), float(volume)
    _vdw_domain(t, v, b, n)
    q = n * (r * t * v**3 - 2.0 * a * n * (v - b * n) ** 2) / (t * v**3 * (v - b * n) ** 2)
    if q <= 0.0:
        raise OutsideDomain("the van der Waals metric is not negative definite here")
    return np.diag([math.sqrt(1.5) * math.sqrt(n * r) / t, math.sqrt(q)])


def vdw_curvature(temperature: float, volume: float, a: float, b: float, n: float = 1.0, r: float = 1.0) -> float:
    """Tabulated coefficient R_VDW of e^1 ^ e^2 in the curvature 2-form."""
    t, v = float(temperature), float(volume)
    _vdw_domain(t, v, b, n)
    w = (v - b * n) ** 2
    return 2.0 * a * w * (a * n * w - r * t * v**3) / (3.0 * r * (r * t * v**3 - 2.0 * a * n * w) ** 2)


def vdw_singular_polynomial(t_red, v_red):
    """-4 T v^3 + 9 v^2 - 6 v + 1 in reduced variables; its zero set is the curvature singularity."""
    return -4.0 * t_red * v_red**3 + 9.0 * v_red**2 - 6.0 * v_red + 1.0


def vdw_intrinsic_curvature(t_red: float, v_red: float) -> float:
    """Dimensionless curvature with R_VDW = this / (6 n R); raises at the singular locus."""
    den = vdw_singular_polynomial(t_red, v_red) ** 2
    if den == 0.0:
        raise SingularMetric(f"van der Waals curvature diverges at (T, v) = ({t_red}, {v_red})")
    return -((1.0 - 3.0 * v_red) ** 2) * (8.0 * t_red * v_red**3 - 9.0 * v_red**2 + 6.0 * v_red - 1.0) / den


def vdw_critical(a: float, b: float, n: float = 1.0, r: float = 1.0) -> tuple[float, float, float]:
    """(V_c, T_c, P_c) = (3 b n, 8 a / (27 b R), a / (27 b^2))."""
    if not (a > 0.0 and b > 0.0 and n > 0.0 and r > 0.0):
        raise OutsideDomain("van der Waals parameters must be positive")
    return 3.0 * b * n, 8.0 * a / (27.0 * b * r), a / (27.0 * b * b)


def vdw_thermo(temperature: float, volume: float, a: float, b: float, n: float = 1.0, r: float = 1.0) -> dict:
    """Metric, curvature coefficient and its dimensionless form at (T, V)."""
    metric = vdw_metric(temperature, volume, a, b, n, r)
    curvature = vdw_curvature(temperature, volume, a, b, n, r)
    out = {"metric": metric, "curvature": curvature}
    if a > 0.0 and b > 0.0:
        vc, tc, _ = vdw_critical(a, b, n, r)
        out["reduced"] = (temperature / tc, volume / vc)
        out["intrinsic_curvature"] = vdw_intrinsic_curvature(temperature / tc, volume / vc)
    return out
