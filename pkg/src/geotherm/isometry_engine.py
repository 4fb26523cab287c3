"""Isometry action on solvable coordinates, Killing vectors and adjoint matrices.

A group element g acts on Y through the symmetric matrix
``M = g L(Y) L(Y)^T g^T``: its triangular factor is the new representative.
The fundamental vector fields of this left action satisfy
``[k_A, k_B] = -f_AB^C k_C`` for ``[J_A, J_B] = f_AB^C J_C``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from . import numkit
from .coset_geometry import coset_rep, kahler_form_at, sigma_log, triangular_permutation
from .errors import DomainError, NotKahler, OutsideCone
from .model_catalog import ModelSpec, algebra_structure_constants, expand_in_basis, load_model

__all__ = [
    "check_group_element",
    "act",
    "group_exp",
    "killing_field",
    "killing_field_closed",
    "killing_fields",
    "vector_field_bracket",
    "killing_algebra_residual",
    "kahler_lie_derivative_residual",
    "adjoint_matrix",
    "reduce_temperature_h2",
    "h2_temperature_element",
]

R2 = math.sqrt(2.0)
KILLING_STEP = 1e-5


def check_group_element(spec: ModelSpec | str, g, *, tol: float = 1e-10) -> np.ndarray:
    """Validate g against the model's invariant form (or unit determinant for SL3)."""
    spec = load_model(spec)
    g = numkit.as_matrix(g, name="group element")
    if g.shape != (spec.size, spec.size):
        raise DomainError(f"{spec.name} group elements are {spec.size}x{spec.size}")
    scale = max(1.0, float(np.max(np.abs(g)))) ** 2
    if spec.invariant_form is not None:
        b = spec.invariant_form
        resid = float(np.max(np.abs(g.T @ b @ g - b)))
        if resid > tol * scale:
            raise DomainError(f"matrix does not preserve the invariant form (residual {resid:.2e})")
    else:
        det = float(np.linalg.det(g))
        if abs(det - 1.0) > tol * scale:
            raise DomainError(f"determinant {det:.12g} differs from 1")
    return g


def act(spec: ModelSpec | str, g, upsilon, *, check: bool = True) -> np.ndarray:
    """Coordinates of g . Y from the triangular factor of g L L^T g^T."""
    spec = load_model(spec)
    g = check_group_element(spec, g) if check else np.asarray(g, dtype=float)
    lrep = coset_rep(spec, upsilon)
    m = g @ lrep @ lrep.T @ g.T
    perm = triangular_permutation(spec)
    u_perm = numkit.reverse_cholesky(0.5 * (m + m.T)[np.ix_(perm, perm)])
    u = np.empty_like(u_perm)
    u[np.ix_(perm, perm)] = u_perm
    return sigma_log(spec, u)


def group_exp(x) -> np.ndarray:
    return linalg.expm(np.asarray(x, dtype=float))


def _generator(spec: ModelSpec, generator) -> np.ndarray:
    if isinstance(generator, (int, np.integer)):
        return spec.algebra[int(generator)]
    return np.asarray(generator, dtype=float)


def killing_field(spec: ModelSpec | str, generator, upsilon, *, step: float = KILLING_STEP) -> np.ndarray:
    """d/dtheta act(exp(theta J), Y) at theta = 0.

    ``generator`` is an index into ``spec.algebra`` or a matrix.  The central
    difference at ``step`` and ``step/2`` is combined by Richardson extrapolation.
    """
    spec = load_model(spec)
    j = _generator(spec, generator)
    y = np.asarray(upsilon, dtype=float)

    def central(h):
        plus = act(spec, group_exp(h * j), y, check=False)
        minus = act(spec, group_exp(-h * j), y, check=False)
        return (plus - minus) / (2.0 * h)

    coarse = central(step)
    fine = central(0.5 * step)
    return (4.0 * fine - coarse) / 3.0


def killing_fields(spec: ModelSpec | str, upsilon) -> np.ndarray:
    """All generic Killing vectors at Y, one row per algebra generator."""
    spec = load_model(spec)
    return np.array([killing_field(spec, a, upsilon) for a in range(len(spec.algebra))])


# ------------------------------------------------------------ closed forms


def _h2_fields(y):
    u1, u2 = y
    return np.array(
        [
            [math.exp(2 * u1) * u2, math.exp(-2 * u1) - math.exp(2 * u1) * (u2**2 + 1)],
            [1.0, 0.0],
            [0.0, math.exp(-2 * u1)],
        ]
    )


def _sh2_fields(w):
    w1, w2, w3, w4, w5, w6 = w
    ex = math.exp
    a, b = ex(w1), ex(w2)
    amb, apb = ex(w1 - w2), ex(w1 + w2)
    q6 = w6**2 + 4
    poly4 = 8 * w4**2 - 4 * R2 * w5 * w6 * w4 + q6**2
    mixed = w5**2 + R2 * w3 * w6 * w5 - w6**2
    k = np.zeros((10, 6))
    k[0] = [1, 0, 0, 0, 0, 0]
    k[1] = [0, 1, 0, 0, 0, 0]
    k[2] = [
        -0.5 * amb * w3,
        0.5 * amb * w3,
        0.5 * amb * (w3**2 + 2) + 1 / amb,
        0.25 * amb * (w5 - w6) * (w5 + w6),
        -amb * w6 / R2,
        amb * w5 / R2,
    ]
    k[3] = [
        -0.5 * apb * w4,
        0.25 * apb * (R2 * w5 * w6 - 2 * w4),
        0.25 * apb * mixed,
        apb * poly4 / 16 + 1 / apb,
        apb * w6 * q6 / (4 * R2),
        -apb * w5 * q6 / (4 * R2),
    ]
    g5 = 0.25 * a * (w5**2 + 2 * w6**2 + 2 * w3 * w4 + 4)
    k[4] = [
        -0.5 * a * w5,
        -a * w3 * w6 / (2 * R2),
        -a * (w3**2 + 2) * w6 / (2 * R2),
        a * w6 * (w6**2 + 2 * w3 * w4 + 4) / (4 * R2),
        g5 + 1 / a,
        a * (w3 * q6 - 4 * w4) / (4 * R2),
    ]
    k[5] = [
        0.0,
        -0.5 * b * w6,
        -0.5 * b * (R2 * w5 + w3 * w6),
        w5 / (b * R2) + 0.5 * b * w4 * w6,
        (b * b * w4 - w3) / (b * R2),
        0.25 * b * q6 + 1 / b,
    ]
    k[6] = [
        0.0,
        0.5 * b * w6,
        0.5 * b * (R2 * w5 + w3 * w6),
        w5 / (b * R2) - 0.5 * b * w4 * w6,
        -(w3 + b * b * w4) / (b * R2),
        1 / b - 0.25 * b * q6,
    ]
    k[7] = [
        0.5 * a * w5,
        a * w3 * w6 / (2 * R2),
        a * (w3**2 + 2) * w6 / (2 * R2),
        -a * w6 * (w6**2 + 2 * w3 * w4 + 4) / (4 * R2),
        1 / a - g5,
        a * (4 * w4 - w3 * q6) / (4 * R2),
    ]
    e2a, e2b = a * a, b * b
    k[8] = [
        amb * (w3 + e2b * w4) / (2 * R2),
        0.25 * amb * (e2b * (R2 * w4 - w5 * w6) - R2 * w3),
        (e2b * (4 - e2a * mixed) - 2 * e2a * (w3**2 + 2)) / (apb * 4 * R2),
        (e2a * (-4 * w5**2 + 4 * w6**2 - e2b * poly4) + 16) / (apb * 16 * R2),
        amb * w6 * (4 - e2b * q6) / 8,
        amb * w5 * (e2b * q6 - 4) / 8,
    ]
    k[9] = [
        (amb * w3 - apb * w4) / (2 * R2),
        -0.25 * amb * (R2 * w3 + e2b * (R2 * w4 - w5 * w6)),
        (e2b * (e2a * mixed + 4) - 2 * e2a * (w3**2 + 2)) / (apb * 4 * R2),
        (e2a * (-4 * w5**2 + 4 * w6**2 + e2b * poly4) - 16) / (apb * 16 * R2),
        amb * w6 * (e2b * q6 + 4) / 8,
        -amb * w5 * (e2b * q6 + 4) / 8,
    ]
    return k


_CLOSED = {"H2": _h2_fields, "SH2_vector": _sh2_fields, "SH2_spinor": _sh2_fields}


def killing_field_closed(spec: ModelSpec | str, upsilon) -> np.ndarray:
    """Tabulated Killing vectors (rows follow ``spec.algebra``); available for H2 and SH2."""
    spec = load_model(spec)
    if spec.name not in _CLOSED:
        raise DomainError(f"no closed-form Killing vectors tabulated for {spec.name}")
    return _CLOSED[spec.name](np.asarray(upsilon, dtype=float))


# ----------------------------------------------------------------- algebra


def vector_field_bracket(x_field, y_field, point) -> np.ndarray:
    """[X, Y]^a = X^b d_b Y^a - Y^b d_b X^a with derivatives by finite differences."""
    p = np.asarray(point, dtype=float)
    x = np.asarray(x_field(p))
    y = np.asarray(y_field(p))
    jx = numkit.fd_jacobian(x_field, p)
    jy = numkit.fd_jacobian(y_field, p)
    return jy @ x - jx @ y


def killing_algebra_residual(
    spec: ModelSpec | str,
    points,
    *,
    fields=None,
    sign: float = -1.0,
) -> float:
    """max |[k_A, k_B] - sign f_AB^C k_C| over generator pairs and points.

    ``fields(Y)`` returns all Killing vectors as rows; the generic
    construction is used by default.  For the left action the bracket of
    fundamental fields reverses the algebra, hence ``sign = -1``.
    """
    spec = load_model(spec)
    f = algebra_structure_constants(spec)
    fields = fields or (lambda y: killing_fields(spec, y))
    n = len(spec.algebra)
    worst = 0.0
    for p in np.atleast_2d(np.asarray(points, dtype=float)):
        base = fields(p)
        jac = numkit.fd_jacobian(fields, p)  # jac[A, a, b] = d_b k_A^a
        for a in range(n):
            for b in range(a + 1, n):
                br = jac[b] @ base[a] - jac[a] @ base[b]
                expected = sign * f[a, b] @ base
                worst = max(worst, float(np.max(np.abs(br - expected))))
    return worst


def kahler_lie_derivative_residual(spec: ModelSpec | str, generator, upsilon) -> float:
    """max |L_k K| for the Killing vector k of ``generator``, via Cartan's formula on evaluation matrices."""
    spec = load_model(spec)
    if not spec.is_kahler:
        raise NotKahler(f"{spec.name} is not Kahler")
    y = np.asarray(upsilon, dtype=float)

    def field(z):
        return killing_field(spec, generator, z)

    k = field(y)
    kform = kahler_form_at(spec, y)
    dk = numkit.fd_gradient(lambda z: kahler_form_at(spec, z), y)  # dk[c, a, b] = d_c K_ab
    jk = numkit.fd_jacobian(field, y)  # jk[a, c] = d_c k^a
    lie = np.einsum("c,cab->ab", k, dk) + jk.T @ kform + kform @ jk
    return float(np.max(np.abs(lie)))


def adjoint_matrix(spec: ModelSpec | str, g) -> np.ndarray:
    """A[L, S] with g^-1 J_L g = sum_S A[L, S] J_S over ``spec.algebra``."""
    spec = load_model(spec)
    g = np.asarray(g, dtype=float)
    ginv = linalg.inv(g)
    return np.array([expand_in_basis(spec.algebra, ginv @ j @ g, tol=1e-8) for j in spec.algebra])


# --------------------------------------------------------- H2 temperatures


def h2_temperature_element(delta: float, beta: float, zeta: float) -> np.ndarray:
    """sl(2) element paired with the moment maps: [[beta, delta - zeta], [-delta - zeta, -beta]]."""
    return np.array([[beta, delta - zeta], [-delta - zeta, -beta]], dtype=float)


def h2_temperature_coefficients(delta: float, beta: float, zeta: float) -> np.ndarray:
    """The same element on the basis (Xc, T1, T2)."""
    return np.array([delta + zeta, beta, -2.0 * zeta])


def h2_temperature_triple(coeffs) -> tuple[float, float, float]:
    """Inverse of :func:`h2_temperature_coefficients`."""
    a, b, c = (float(x) for x in coeffs)
    zeta = -0.5 * c
    return a - zeta, b, zeta


def reduce_temperature_h2(delta: float, beta: float, zeta: float) -> tuple[float, np.ndarray]:
    """N and g in SL(2,R) with g^-1 B g = N Xc, so that Adj(g)^T maps the temperature to (N, 0, 0)."""
    nsq = delta * delta - beta * beta - zeta * zeta
    if not (delta > 0.0 and nsq > 0.0):
        raise OutsideCone(f"temperature ({delta}, {beta}, {zeta}) is outside the cone")
    n = math.sqrt(nsq)
    g = np.array([[1.0, -beta / n], [0.0, (delta + zeta) / n]])
    g /= math.sqrt(np.linalg.det(g))
    return n, g
