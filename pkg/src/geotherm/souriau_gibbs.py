"""Gibbs states on Kahler symmetric spaces: temperature cones, partition functions,
densities, the Poincare disk picture, sampling and the canonical (Cartan) form.

Weights are ``exp(+tau . P(Y))`` with ``P`` the moment maps of :mod:`moment_maps`;
for H2 the temperature coefficients on the algebra basis (Xc, T1, T2) are
``(alpha, beta, gamma) = (delta + zeta, beta, -2 zeta)``.  The integration measure
is Lebesgue on the solvable coordinates unless ``measure="pfaffian"`` is asked for;
the Pfaffian of the Kahler form is constant, so the two differ by a fixed factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from . import numkit
from .coset_geometry import volume_density
from .errors import (
    BudgetExhausted,
    DegenerateTemperatures,
    DivergenceDetected,
    DomainError,
    EnvelopeTooTight,
    NoConvergence,
    OutsideCone,
    OutsideDisk,
)
from .isometry_engine import act, adjoint_matrix, h2_temperature_coefficients, h2_temperature_triple
from .model_catalog import ModelSpec, load_model
from .moment_maps import moment_batch, moment_vector

__all__ = [
    "TemperatureVector",
    "PartitionEvaluation",
    "SIEGEL_MU_INDEX",
    "SIEGEL_LAMBDA_INDEX",
    "in_cone",
    "transform_temperature",
    "partition_h2",
    "partition_h2_quadrature",
    "log_partition_h2",
    "gibbs_weight_exponent",
    "gibbs_density",
    "gibbs_density_h2",
    "disk_transform",
    "disk_inverse",
    "disk_jacobian",
    "perigord_density",
    "gibbs_density_disk",
    "disk_normalization",
    "siegel_exponent",
    "siegel_exponent_rational",
    "siegel_stage_b",
    "siegel_stage_c",
    "siegel_reduced_integrand",
    "siegel_log_reduced_integrand",
    "siegel_stage_b_oracle",
    "siegel_stage_c_oracle",
    "siegel_reduced_oracle",
    "partition_siegel",
    "partition_numeric",
    "canonical_gibbs",
    "sample_gibbs_h2",
]

SIEGEL_MU_INDEX = 8  # H3
SIEGEL_LAMBDA_INDEX = 9  # H0, the compact center
DEGENERATE_RATIO = 1e-6
BOX_RADII = (4.0, 6.0, 8.0)
BOX_GROWTH_LIMIT = 1.5
BOX_SLOWDOWN = 0.9
R2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PartitionEvaluation:
    value: float
    error_estimate: float
    method: str  # closed-form | staged | quadrature | monte-carlo


@dataclass(frozen=True)
class TemperatureVector:
    """Coefficients over the full algebra basis of ``model`` (order of ``spec.algebra``)."""

    model: str
    coefficients: tuple[float, ...]

    @classmethod
    def of(cls, spec: ModelSpec | str, coefficients) -> "TemperatureVector":
        spec = load_model(spec)
        c = np.asarray(coefficients, dtype=float).ravel()
        if c.shape != (len(spec.algebra),):
            raise DomainError(f"{spec.name} needs {len(spec.algebra)} temperature coefficients, got {c.size}")
        return cls(spec.name, tuple(float(v) for v in c))

    @classmethod
    def h2(cls, delta: float, beta: float, zeta: float) -> "TemperatureVector":
        return cls.of("H2", h2_temperature_coefficients(delta, beta, zeta))

    @classmethod
    def h2_abc(cls, alpha: float, beta: float, gamma: float) -> "TemperatureVector":
        return cls.of("H2", (alpha, beta, gamma))

    @classmethod
    def h2_polar(cls, delta: float, mu: float, theta: float) -> "TemperatureVector":
        return cls.h2(delta, mu * math.cos(theta), mu * math.sin(theta))

    @classmethod
    def siegel(cls, lam: float, mu: float) -> "TemperatureVector":
        c = np.zeros(10)
        c[SIEGEL_LAMBDA_INDEX] = lam
        c[SIEGEL_MU_INDEX] = mu
        return cls.of("SH2_vector", c)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.coefficients)

    @property
    def triple(self) -> tuple[float, float, float]:
        """(delta, beta, zeta) of an H2 temperature."""
        if self.model != "H2":
            raise DomainError("(delta, beta, zeta) only exists for H2 temperatures")
        return h2_temperature_triple(self.coefficients)

    @property
    def siegel_pair(self) -> tuple[float, float]:
        """(lambda, mu) of a canonical Siegel temperature."""
        c = self.vector
        rest = np.delete(c, [SIEGEL_MU_INDEX, SIEGEL_LAMBDA_INDEX])
        if not self.model.startswith("SH2") or np.any(rest != 0.0):
            raise DomainError("not a canonical Siegel temperature (only H3 and H0 may be nonzero)")
        return float(c[SIEGEL_LAMBDA_INDEX]), float(c[SIEGEL_MU_INDEX])


def _as_temperature(spec, tau) -> TemperatureVector:
    if isinstance(tau, TemperatureVector):
        return tau
    return TemperatureVector.of(spec, tau)


def in_cone(tau: TemperatureVector) -> bool:
    """Convergence domain: H2 needs delta > 0 and delta^2 > beta^2 + zeta^2; canonical SH2 needs lambda > |mu|."""
    if tau.model == "H2":
        d, b, z = tau.triple
        return d > 0.0 and d * d - b * b - z * z > 0.0
    if tau.model.startswith("SH2"):
        lam, mu = tau.siegel_pair
        return lam + mu > 0.0 and lam - mu > 0.0
    raise DomainError(f"no cone criterion for {tau.model}")


def transform_temperature(spec: ModelSpec | str, g, tau) -> np.ndarray:
    """Adj(g)^T tau, so that tau . P(g . Y) = (Adj(g)^T tau) . P(Y)."""
    spec = load_model(spec)
    return adjoint_matrix(spec, g).T @ np.asarray(tau, dtype=float)


# ---------------------------------------------------------------- H2


def _h2_norm(delta: float, beta: float, zeta: float) -> float:
    nsq = delta * delta - beta * beta - zeta * zeta
    if not (delta > 0.0 and nsq > 0.0):
        raise OutsideCone(f"H2 temperature ({delta}, {beta}, {zeta}) is outside the cone")
    return math.sqrt(nsq)


def log_partition_h2(delta: float, beta: float, zeta: float) -> float:
    n = _h2_norm(delta, beta, zeta)
    return math.log(math.pi) - n - math.log(n)


def partition_h2(delta: float, beta: float, zeta: float) -> PartitionEvaluation:
    """Z = pi exp(-N) / N with N^2 = delta^2 - beta^2 - zeta^2."""
    n = _h2_norm(delta, beta, zeta)
    return PartitionEvaluation(math.pi * math.exp(-n) / n, 0.0, "closed-form")


def _h2_exponent(alpha: float, beta: float, gamma: float, x, y):
    # alpha P0 + beta P1 + gamma P2 with the tabulated H2 moment maps
    return -0.5 * alpha * np.exp(2.0 * x) * (y * y + 1.0) - 0.5 * (alpha + gamma) * np.exp(-2.0 * x) - beta * y


def partition_h2_quadrature(delta: float, beta: float, zeta: float, *, tol: float = 1e-11) -> PartitionEvaluation:
    """Brute-force Z by nested adaptive quadrature over the solvable chart.

    The inner y-integral is recentred on its maximum and rescaled by its width;
    the outer x-integral is split at the peak of the marginal.
    """
    alpha, b, gamma = h2_temperature_coefficients(delta, beta, zeta)
    if not alpha > 0.0:
        raise OutsideCone("alpha = delta + zeta must be positive for the y-integral to converge")
    evals = [0]

    def inner(x: float) -> float:
        if abs(x) > 150.0:
            return 0.0
        w = math.exp(-x) / math.sqrt(alpha)
        y0 = -b * math.exp(-2.0 * x) / alpha
        # subtract the exponent at the centre to keep the integrand O(1)
        ep, em = math.exp(2.0 * x), math.exp(-2.0 * x)

        def expo(y: float) -> float:
            return -0.5 * alpha * ep * (y * y + 1.0) - 0.5 * (alpha + gamma) * em - b * y

        shift = expo(y0)
        if not shift > -700.0:
            return 0.0
        if shift > 700.0:
            return math.inf
        res = numkit.integrate_adaptive(lambda t: math.exp(expo(y0 + w * t) - shift), -np.inf, np.inf, tol=tol)
        evals[0] += res.evaluations
        return w * res.value * math.exp(shift)

    grid = np.linspace(-6.0, 6.0, 61)
    marginal = np.array([inner(x) for x in grid])
    if not np.all(np.isfinite(marginal)):
        raise DivergenceDetected("H2 weight overflows; temperature outside the cone")
    peak = float(grid[int(np.argmax(marginal))])
    left = numkit.integrate_adaptive(inner, -np.inf, peak, tol=tol)
    right = numkit.integrate_adaptive(inner, peak, np.inf, tol=tol)
    value = left.value + right.value
    if not (math.isfinite(value) and value > 0.0):
        raise DivergenceDetected("H2 partition quadrature is not finite")
    return PartitionEvaluation(value, left.error_estimate + right.error_estimate, "quadrature")


def gibbs_weight_exponent(spec: ModelSpec | str, tau, upsilon) -> float:
    """tau . P(Y)."""
    spec = load_model(spec)
    t = _as_temperature(spec, tau)
    return float(t.vector @ moment_vector(spec, upsilon))


def gibbs_density_h2(tau, upsilon) -> float:
    """exp(tau . P(Y)) / Z(tau) on the H2 solvable chart (Lebesgue measure)."""
    t = _as_temperature("H2", tau)
    d, b, z = t.triple
    logz = log_partition_h2(d, b, z)
    y = np.asarray(upsilon, dtype=float)
    return float(np.exp(_h2_exponent(*t.vector, y[0], y[1]) - logz))


def gibbs_density(spec: ModelSpec | str, tau, upsilon, *, z: float | None = None) -> float:
    """exp(tau . P(Y)) / Z; Z defaults to the closed form (H2), the staged form
    (canonical Siegel) or ``partition_numeric`` otherwise."""
    spec = load_model(spec)
    t = _as_temperature(spec, tau)
    if z is None:
        if spec.name == "H2":
            z = partition_h2(*t.triple).value
        elif spec.name.startswith("SH2") and _is_canonical_siegel(t):
            z = partition_siegel(*t.siegel_pair).value
        else:
            z = partition_numeric(spec, t).value
    return float(math.exp(gibbs_weight_exponent(spec, t, upsilon)) / z)


def _is_canonical_siegel(t: TemperatureVector) -> bool:
    try:
        t.siegel_pair
    except DomainError:
        return False
    return True


# ---------------------------------------------------------------- Poincare disk


def _disk_arrays(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x * x + y * y >= 1.0):
        raise OutsideDisk("point not inside the unit disk")
    return x, y


def disk_transform(x, y):
    """Disk point -> solvable coordinates (Y1, Y2); works elementwise on arrays."""
    x, y = _disk_arrays(x, y)
    r2 = x * x + y * y
    u2 = 4.0 * y / (r2 - 1.0)
    u1 = np.log(-(r2 - 1.0) / (x * x - 2.0 * x + y * y + 1.0))
    return np.array([u1, u2])


def disk_inverse(upsilon) -> np.ndarray:
    """Solvable coordinates -> disk point."""
    u1, u2 = np.asarray(upsilon, dtype=float)
    q = np.exp(u1) * (1.0 - 0.5j * u2)
    z = (q - 1.0) / (q + 1.0)
    return np.array([z.real, z.imag])


def disk_jacobian(x, y):
    """|det d(Y1, Y2)/d(x, y)| of :func:`disk_transform`."""
    x, y = _disk_arrays(x, y)
    r2 = x * x + y * y
    s = 1.0 - r2
    dd = (x - 1.0) ** 2 + y * y
    d1x = -2.0 * x / s - 2.0 * (x - 1.0) / dd
    d1y = -2.0 * y / s - 2.0 * y / dd
    d2x = -8.0 * x * y / s**2
    d2y = -4.0 / s - 8.0 * y * y / s**2
    return np.abs(d1x * d2y - d1y * d2x)


def perigord_density(delta: float, mu: float, theta: float, x, y):
    """Gibbs density of the solvable chart written in disk coordinates (no Jacobian)."""
    if not (delta > 0.0 and 0.0 <= mu < delta):
        raise OutsideCone(f"polar temperature (delta={delta}, mu={mu}) needs 0 <= mu < delta")
    x, y = _disk_arrays(x, y)
    n = math.sqrt(delta * delta - mu * mu)
    r1 = x * x + y * y - 1.0
    q = x * x - 2.0 * x + y * y + 1.0
    bracket = (
        delta
        - mu * math.sin(theta)
        + (16.0 * y * y / r1**2 + 1.0) * r1**4 * (delta + mu * math.sin(theta)) / q**4
        + 8.0 * mu * y * math.cos(theta) * r1 / q**2
    )
    return n / math.pi * np.exp(n - q**2 * bracket / (2.0 * r1**2))


def gibbs_density_disk(delta: float, mu: float, theta: float, x, y):
    """Probability density on the unit disk: the chart density times the change-of-variables Jacobian."""
    return perigord_density(delta, mu, theta, x, y) * disk_jacobian(x, y)


def disk_normalization(delta: float, mu: float, theta: float, *, tol: float = 1e-9) -> numkit.QuadratureResult:
    """Integral of :func:`gibbs_density_disk` over the unit disk in polar coordinates."""

    def integrand(r: float, phi: float) -> float:
        if r >= 1.0:
            return 0.0
        with np.errstate(over="ignore", under="ignore"):
            v = gibbs_density_disk(delta, mu, theta, r * math.cos(phi), r * math.sin(phi))
        return float(v) * r if np.isfinite(v) else 0.0

    return numkit.integrate_adaptive_2d(lambda phi, r: integrand(r, phi), (0.0, 2.0 * math.pi), (0.0, 1.0), tol=tol)


# ---------------------------------------------------------------- Siegel plane (canonical temperatures)


def _siegel_check(lam: float, mu: float) -> None:
    if not (lam + mu > 0.0 and lam - mu > -DEGENERATE_RATIO * abs(lam)):
        raise OutsideCone(f"Siegel temperature (lambda={lam}, mu={mu}) needs lambda > |mu|")
    if lam - mu < DEGENERATE_RATIO * lam:
        raise DegenerateTemperatures(f"lambda - mu = {lam - mu} is degenerate; the w4 Gaussian has no width")


def siegel_exponent(w, lam: float, mu: float) -> float:
    """mu P9(W) + lambda P10(W) in the tabulated rational-exponential form."""
    w1, w2, w3, w4, w5, w6 = np.asarray(w, dtype=float)
    q5 = w5**2 + 4.0
    q6 = w6**2 + 4.0
    common = -4.0 * math.exp(2 * w2) * q6 - 2.0 * math.exp(2 * w1) * (q6 * w3**2 + 2 * R2 * w5 * w6 * w3 + 2 * q5)
    quad = math.exp(2 * (w1 + w2)) * (8 * w4**2 - 4 * R2 * w5 * w6 * w4 + q5 * q6)
    return math.exp(-w1 - w2) * (lam * (common - quad - 16.0) + mu * (common + quad + 16.0)) / 64.0


def siegel_exponent_rational(rho1: float, rho2: float, w3, w4, w5, w6, lam: float, mu: float):
    """N_A / D_A with rho_i = exp(w_i)."""
    q6 = w6**2 + 4.0
    q5 = w5**2 + 4.0
    na = rho1**2 * (
        -(rho2**2 * (8 * w4**2 - 4 * R2 * w5 * w6 * w4 + q5 * q6) * (lam - mu))
        - 2 * (q6 * w3**2 + 2 * R2 * w5 * w6 * w3 + 2 * q5) * (lam + mu)
    ) - 4 * (4 * (lam - mu) + rho2**2 * q6 * (lam + mu))
    return na / (64.0 * rho1 * rho2)


def siegel_stage_b(rho1: float, rho2: float, w5: float, w6: float, lam: float, mu: float) -> float:
    """Integral of exp(A) over w3 and w4."""
    _siegel_check(lam, mu)
    q6 = w6**2 + 4.0
    a, b = lam - mu, lam + mu
    nb = (
        16 * a
        - rho2**2 * rho1**2 * w5**2 * w6**2 * a
        + 4 * rho2**2 * q6 * b
        + rho1**2 * (rho2**2 * (w5**2 + 4) * q6**2 * a + 16 * (w5**2 + w6**2 + 4) * b) / q6
    )
    return 16 * math.pi * math.exp(-nb / (64 * rho1 * rho2)) / (rho1 * math.sqrt(a) * math.sqrt(q6 * b))


def siegel_stage_c(rho1: float, rho2: float, w6: float, lam: float, mu: float) -> float:
    """Integral of :func:`siegel_stage_b` over w5."""
    _siegel_check(lam, mu)
    q6 = w6**2 + 4.0
    a, b = lam - mu, lam + mu
    expo = -(4 * (rho1**2 * b + a) + rho2**2 * q6 * (rho1**2 * a + b)) / (16 * rho1 * rho2)
    den = rho1 * math.sqrt(q6 * a * b) * math.sqrt(rho2 * rho1 * a + 4 * rho1 * b / (rho2 * q6))
    return 64 * math.pi**1.5 * math.exp(expo) / den


def siegel_log_reduced_integrand(rho1, rho2, lam: float, mu: float):
    """log of :func:`siegel_reduced_integrand`, evaluated without overflow; accepts arrays."""
    _siegel_check(lam, mu)
    rho1 = np.asarray(rho1, dtype=float)
    rho2 = np.asarray(rho2, dtype=float)
    if np.any(~(rho1 > 0.0)) or np.any(~(rho2 > 0.0)):
        raise DomainError("rho1 and rho2 must be positive")
    a, b = lam - mu, lam + mu
    c = rho2**2 * a + b
    expo = -(lam**2 + a * (rho1**2 * c + rho2**2 * b) - 6 * lam * mu + mu**2) / (8 * rho1 * rho2 * a)
    arg = (a * rho1**2 + b) * c / (8 * a * rho1 * rho2)
    return (
        math.log(64 * math.pi**1.5)
        + 0.5 * math.log(a)
        + expo
        + numkit.log_bessel_k0(arg)
        - 0.5 * np.log(rho2 * b)
        - 1.5 * np.log(rho1 * a / c)
        - 1.5 * np.log(c)
    )


def siegel_reduced_integrand(rho1, rho2, lam: float, mu: float):
    """Integral of the Gibbs weight over the four nilpotent coordinates at fixed (rho1, rho2)."""
    return np.exp(siegel_log_reduced_integrand(rho1, rho2, lam, mu))


def siegel_stage_b_oracle(rho1, rho2, w5, w6, lam, mu, *, tol: float = 1e-12) -> float:
    """Direct 2D quadrature of exp(A) over (w3, w4)."""
    _siegel_check(lam, mu)
    res = numkit.integrate_adaptive_2d(
        lambda w3, w4: math.exp(siegel_exponent_rational(rho1, rho2, w3, w4, w5, w6, lam, mu)),
        (-np.inf, np.inf),
        (-np.inf, np.inf),
        tol=tol,
    )
    return res.value


def siegel_stage_c_oracle(rho1, rho2, w6, lam, mu, *, tol: float = 1e-12) -> float:
    """Quadrature of :func:`siegel_stage_b` over w5."""
    return numkit.integrate_adaptive(lambda w5: siegel_stage_b(rho1, rho2, w5, w6, lam, mu), -np.inf, np.inf, tol=tol).value


def siegel_reduced_oracle(rho1, rho2, lam, mu, *, tol: float = 1e-12) -> float:
    """Quadrature of :func:`siegel_stage_c` over w6."""
    return numkit.integrate_adaptive(lambda w6: siegel_stage_c(rho1, rho2, w6, lam, mu), -np.inf, np.inf, tol=tol).value


def _siegel_w_integral(lam: float, mu: float, tol: float) -> numkit.QuadratureResult:
    # scale out the peak so the quadrature sees an O(1) integrand
    grid = np.linspace(-8.0, 8.0, 161)
    g1, g2 = np.meshgrid(grid, grid, indexing="ij")
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        logs = np.nan_to_num(siegel_log_reduced_integrand(np.exp(g1), np.exp(g2), lam, mu), nan=-np.inf)
    i, j = np.unravel_index(int(np.argmax(logs)), logs.shape)
    c1, c2, lmax = float(grid[i]), float(grid[j]), float(logs[i, j])

    def f(x: float, y: float) -> float:
        if abs(c1 + x) > 60.0 or abs(c2 + y) > 60.0:
            return 0.0  # the integrand decays like exp(-exp|w|) there
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            v = float(np.exp(siegel_log_reduced_integrand(math.exp(c1 + x), math.exp(c2 + y), lam, mu) - lmax))
        return v if math.isfinite(v) else 0.0

    res = numkit.integrate_adaptive_2d(f, (-np.inf, np.inf), (-np.inf, np.inf), tol=tol)
    scale = math.exp(lmax)
    return numkit.QuadratureResult(res.value * scale, res.error_estimate * scale, res.evaluations)


def partition_siegel(lam: float, mu: float, *, tol: float = 1e-9) -> PartitionEvaluation:
    """Z(lambda, mu) = integral over (w1, w2) of the reduced integrand at rho_i = exp(w_i).

    Evaluated at two quadrature tolerances; the error estimate is their difference
    plus the finer level's own estimate.
    """
    _siegel_check(lam, mu)
    coarse = _siegel_w_integral(lam, mu, tol * 1e3)
    fine = _siegel_w_integral(lam, mu, tol)
    if not (math.isfinite(fine.value) and fine.value > 0.0):
        raise NoConvergence("Siegel partition quadrature is not finite and positive")
    return PartitionEvaluation(fine.value, abs(fine.value - coarse.value) + fine.error_estimate, "staged")


# ---------------------------------------------------------------- brute force


def _measure_factor(spec: ModelSpec, measure: str) -> float:
    if measure == "lebesgue":
        return 1.0
    if measure == "pfaffian":
        return abs(volume_density(spec, np.zeros(spec.dim)))
    raise DomainError(f"unknown measure {measure!r}; use 'lebesgue' or 'pfaffian'")


def _box_integral_2d(f, radius: float) -> float:
    res = numkit.integrate_adaptive_2d(f, (-radius, radius), (-radius, radius), tol=1e-8)
    return res.value


def partition_numeric(
    spec: ModelSpec | str,
    tau,
    *,
    budget: int = 200_000,
    rel_tol: float | None = None,
    rng: np.random.Generator | None = None,
    measure: str = "lebesgue",
) -> PartitionEvaluation:
    """Integral of exp(tau . P) over the solvable chart without using any closed form.

    d = 2: expanding boxes [-R, R]^2 with R in BOX_RADII flag divergence when the
    integral keeps growing by more than BOX_GROWTH_LIMIT up to the largest box, then
    adaptive quadrature over R^2 (a non-finite or unconverged result also flags it).
    d >= 6: importance sampling with a multivariate Student t centred at the mode of
    the weight; ``budget`` is the number of samples and the error is statistical.
    """
    spec = load_model(spec)
    t = _as_temperature(spec, tau)
    factor = _measure_factor(spec, measure)
    if spec.dim == 2:
        return _partition_numeric_2d(spec, t, factor)
    return _partition_monte_carlo(spec, t, budget, rel_tol, rng if rng is not None else numkit.make_rng(0), factor)


def _partition_numeric_2d(spec: ModelSpec, t: TemperatureVector, factor: float) -> PartitionEvaluation:
    tv = t.vector

    def weight(x: float, y: float) -> float:
        with np.errstate(over="ignore"):
            e = float(tv @ moment_batch(spec, [[x, y]])[0])
        return math.exp(e) if e < 700.0 else math.inf

    boxes = []
    for r in BOX_RADII:
        try:
            v = _box_integral_2d(weight, r)
        except NoConvergence:
            v = math.inf
        if not math.isfinite(v):
            raise DivergenceDetected(f"box integral over [-{r}, {r}]^2 is not finite; temperature outside the cone")
        boxes.append(v)
    # a wide but convergent weight grows fast at first and then slows down, so only
    # sustained growth at the largest box counts; slow divergence is left to the full quadrature
    growth = [big / small for small, big in zip(boxes, boxes[1:])]
    if growth[-1] > BOX_GROWTH_LIMIT and growth[-1] > BOX_SLOWDOWN * growth[-2]:
        raise DivergenceDetected(
            f"box integral grew by {growth[-1]:.3g} at R = {BOX_RADII[-1]}; temperature outside the cone"
        )
    if spec.name == "H2":
        try:
            res = partition_h2_quadrature(*t.triple)
        except (NoConvergence, OutsideCone) as exc:
            raise DivergenceDetected(f"full-plane quadrature failed: {exc}") from exc
        return PartitionEvaluation(res.value * factor, res.error_estimate * factor, "quadrature")
    try:
        res = numkit.integrate_adaptive_2d(weight, (-np.inf, np.inf), (-np.inf, np.inf), tol=1e-10)
    except NoConvergence as exc:
        raise DivergenceDetected(f"full-plane quadrature failed: {exc}") from exc
    return PartitionEvaluation(res.value * factor, res.error_estimate * factor, "quadrature")


def _partition_monte_carlo(
    spec: ModelSpec,
    t: TemperatureVector,
    budget: int,
    rel_tol: float | None,
    rng: np.random.Generator,
    factor: float,
    df: float = 4.0,
) -> PartitionEvaluation:
    tv = t.vector
    d = spec.dim

    def neg_exponent(y):
        return -float(tv @ moment_batch(spec, y[None, :])[0])

    opt = optimize.minimize(neg_exponent, np.zeros(d), method="BFGS", options={"gtol": 1e-9})
    if not np.isfinite(opt.fun) or opt.fun < -1e6 or np.max(np.abs(opt.x)) > 1e3:
        raise DivergenceDetected("weight exponent is unbounded; temperature outside the cone")
    mode = opt.x
    hess = numkit.fd_hessian(neg_exponent, mode, h=1e-3)
    evals = np.linalg.eigvalsh(hess)
    if evals[0] <= 1e-10:
        raise DivergenceDetected("weight is not peaked at its stationary point; temperature outside the cone")
    cov = np.linalg.inv(hess)
    proposal = stats.multivariate_t(loc=mode, shape=cov, df=df, seed=rng)

    chunk = 20_000
    log_w: list[np.ndarray] = []
    done = 0
    while done < budget:
        n = min(chunk, budget - done)
        pts = np.atleast_2d(proposal.rvs(size=n))
        with np.errstate(over="ignore"):
            expo = moment_batch(spec, pts) @ tv
        log_w.append(expo - proposal.logpdf(pts))
        done += n
    lw = np.concatenate(log_w)
    if not np.all(np.isfinite(lw)):
        raise DivergenceDetected("non-finite importance weights")
    shift = float(lw.max())
    w = np.exp(lw - shift)
    mean = float(w.mean())
    err = float(w.std(ddof=1) / math.sqrt(w.size))
    value = mean * math.exp(shift) * factor
    error = err * math.exp(shift) * factor
    if rel_tol is not None and error > rel_tol * value:
        raise BudgetExhausted(f"relative error {error / value:.3g} above {rel_tol} after {budget} samples")
    return PartitionEvaluation(value, error, "monte-carlo")


# ---------------------------------------------------------------- canonical form and sampling


def canonical_gibbs(spec: ModelSpec | str, beta0, g, upsilon, *, z: float | None = None) -> float:
    """exp(beta0 . P(g . Y)) / Z(beta0) with beta0 on the compact Cartan generators.

    H2: beta0 = (N,) on Xc.  SH2: beta0 = (lambda, mu) on (H0, H3).
    """
    spec = load_model(spec)
    b0 = np.atleast_1d(np.asarray(beta0, dtype=float))
    if spec.name == "H2":
        if b0.shape != (1,) or not b0[0] > 0.0:
            raise OutsideCone("H2 canonical temperature is a single positive N")
        tau = TemperatureVector.h2(float(b0[0]), 0.0, 0.0)
        zval = partition_h2(*tau.triple).value if z is None else z
    elif spec.name.startswith("SH2"):
        if b0.shape != (2,):
            raise DomainError("SH2 canonical temperature is (lambda, mu)")
        tau = TemperatureVector.siegel(float(b0[0]), float(b0[1]))
        zval = partition_siegel(float(b0[0]), float(b0[1])).value if z is None else z
    else:
        raise DomainError(f"no canonical Gibbs form for {spec.name}")
    y = act(spec, g, upsilon)
    return float(math.exp(tau.vector @ moment_vector(spec, y)) / zval)


def _disk_envelope(delta: float, mu: float, theta: float) -> tuple[float, float]:
    """(peak density, radius of a sub-disk carrying all but a negligible tail)."""
    radii = np.linspace(0.0, 0.999999, 2000)
    phis = np.linspace(0.0, 2.0 * math.pi, 721)
    rr, pp = np.meshgrid(radii, phis, indexing="ij")
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        vals = gibbs_density_disk(delta, mu, theta, rr * np.cos(pp), rr * np.sin(pp))
    vals = np.nan_to_num(vals, nan=0.0, posinf=0.0)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)

    def neg(p):
        x, y = p
        if x * x + y * y >= 1.0:
            return 0.0
        return -float(gibbs_density_disk(delta, mu, theta, x, y))

    start = np.array([rr[i, j] * math.cos(pp[i, j]), rr[i, j] * math.sin(pp[i, j])])
    opt = optimize.minimize(neg, start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
    peak = max(-float(opt.fun), float(vals.max()))
    ring_max = vals.max(axis=1)
    # outermost ring still above a 1e-13 fraction of the peak, plus a margin
    above = np.nonzero(ring_max > 1e-13 * peak)[0]
    radius = min(0.999999, float(radii[above[-1]]) + 0.01)
    return peak, radius


def sample_gibbs_h2(tau, count: int, rng: np.random.Generator, *, batch: int = 50_000) -> np.ndarray:
    """Rejection sampling of the H2 Gibbs state on the disk; returns an array of shape (count, 2).

    The envelope is uniform on a sub-disk, 1.2 times the located peak density;
    a proposal above the envelope raises :class:`EnvelopeTooTight`.
    """
    t = _as_temperature("H2", tau)
    d, b, z = t.triple
    _h2_norm(d, b, z)
    mu = math.hypot(b, z)
    theta = math.atan2(z, b)
    peak, radius = _disk_envelope(d, mu, theta)
    envelope = 1.2 * peak
    out = np.empty((count, 2))
    filled = 0
    while filled < count:
        r = radius * np.sqrt(rng.random(batch))
        phi = 2.0 * math.pi * rng.random(batch)
        u = rng.random(batch)
        x, y = r * np.cos(phi), r * np.sin(phi)
        with np.errstate(over="ignore", under="ignore"):
            f = gibbs_density_disk(d, mu, theta, x, y)
        if np.any(f > envelope):
            raise EnvelopeTooTight(f"density {float(f.max()):.6g} exceeds the envelope {envelope:.6g}")
        keep = u * envelope < f
        take = min(int(keep.sum()), count - filled)
        out[filled : filled + take, 0] = x[keep][:take]
        out[filled : filled + take, 1] = y[keep][:take]
        filled += take
    return out
