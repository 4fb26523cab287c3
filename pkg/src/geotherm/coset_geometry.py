"""Coset representatives, invariant coframes and Kahler data in solvable coordinates.

Two-forms are handled through their evaluation matrices ``W[a, b] = w(d_a, d_b)``.
A form written as ``sum_{i,j} C_ij V^i ^ V^j`` therefore evaluates to
``2 V^T C V``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from . import numkit
from .errors import DomainError, NotInImage, NotKahler
from .model_catalog import ModelSpec, expand_in_basis, load_model, structure_constants

__all__ = [
    "CoFrame",
    "coset_rep",
    "sigma_log",
    "triangular_permutation",
    "left_invariant_forms",
    "theta_components_fd",
    "maurer_cartan_residual",
    "metric_at",
    "kahler_coefficients",
    "kahler_form_at",
    "complex_structure_at",
    "volume_density",
]

R2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CoFrame:
    """Left-invariant forms ``e[A, a]``, vielbein ``v = nu @ e`` and the constant ``nu``."""

    e_matrix: np.ndarray
    v_matrix: np.ndarray
    nu: np.ndarray


def _point(spec: ModelSpec, upsilon) -> np.ndarray:
    y = np.asarray(upsilon, dtype=float).reshape(-1)
    if y.size != spec.dim:
        raise DomainError(f"{spec.name} expects {spec.dim} coordinates, got {y.size}")
    if not np.all(np.isfinite(y)):
        raise DomainError("coordinates must be finite")
    return y


# --------------------------------------------------------- representatives


def _rep_h2(y):
    u1, u2 = y
    a = math.exp(u1)
    return np.array([[a, a * u2], [0.0, 1.0 / a]])


def _rep_sl3(y):
    y1, y2, y3, y4, y5 = y
    a, b = math.exp(y1), math.exp(y2)
    return np.array(
        [
            [a, a * y3, a * (y3 * y4 + y5)],
            [0.0, b, b * y4],
            [0.0, 0.0, math.exp(-y1 - y2)],
        ]
    )


def _rep_sh2_vector(w):
    w1, w2, w3, w4, w5, w6 = w
    a, b = math.exp(w1), math.exp(w2)
    return np.array(
        [
            [
                a,
                a * w3 / R2,
                0.5 * a * (w3 * w6 + R2 * w5),
                a * (-R2 * w3 * w6**2 + 4 * R2 * w4 - 4 * w5 * w6) / 8,
                -0.25 * a * (2 * w3 * w4 + w5**2),
            ],
            [0.0, b, b * w6 / R2, -0.25 * b * w6**2, -b * w4 / R2],
            [0.0, 0.0, 1.0, -w6 / R2, -w5 / R2],
            [0.0, 0.0, 0.0, 1.0 / b, -w3 / (R2 * b)],
            [0.0, 0.0, 0.0, 0.0, 1.0 / a],
        ]
    )


def _spinor_group_element(w):
    """Spinor-representation solvable element whose right-invariant forms are the SH2 coframe."""
    w1, w2, w3, w4, w5, w6 = w
    p, m = math.exp(0.5 * (w1 + w2)), math.exp(0.5 * (w1 - w2))
    return np.array(
        [
            [1.0 / p, w6 / (2 * m), 0.25 * p * (w5 * w6 - 2 * R2 * w4), 0.25 * m * (2 * w5 + R2 * w3 * w6)],
            [0.0, 1.0 / m, 0.5 * p * w5, m * w3 / R2],
            [0.0, 0.0, p, 0.0],
            [0.0, 0.0, -0.5 * p * w6, m],
        ]
    )


def _rep_sh2_spinor(w):
    return linalg.inv(_spinor_group_element(w))


def _rep_m22(y):
    y1, y2, y3, y4, u1, u2, v1, v2 = y
    a, b = math.exp(y1), math.exp(y2)
    uv = u1 * v1 + u2 * v2
    vv = v1 * v1 + v2 * v2
    uu = u1 * u1 + u2 * u2
    return np.array(
        [
            [
                a,
                a * y3 / R2,
                0.5 * a * (R2 * u1 + y3 * v1),
                0.5 * a * (R2 * u2 + y3 * v2),
                -a * (4 * uv + R2 * (y3 * vv - 4 * y4)) / 8,
                -0.25 * a * (uu + 2 * y3 * y4),
            ],
            [0.0, b, b * v1 / R2, b * v2 / R2, -0.25 * b * vv, -b * y4 / R2],
            [0.0, 0.0, 1.0, 0.0, -v1 / R2, -u1 / R2],
            [0.0, 0.0, 0.0, 1.0, -v2 / R2, -u2 / R2],
            [0.0, 0.0, 0.0, 0.0, 1.0 / b, -y3 / (R2 * b)],
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / a],
        ]
    )


_REPS = {
    "H2": _rep_h2,
    "SL3": _rep_sl3,
    "SH2_vector": _rep_sh2_vector,
    "SH2_spinor": _rep_sh2_spinor,
    "M22": _rep_m22,
}


def coset_rep(spec: ModelSpec | str, upsilon) -> np.ndarray:
    """Solvable coset representative L(Y) in the model's defining representation."""
    spec = load_model(spec)
    return _REPS[spec.name](_point(spec, upsilon))


def triangular_permutation(spec: ModelSpec | str) -> np.ndarray:
    """Index order in which the coset representatives are upper triangular."""
    spec = load_model(spec)
    if spec.name == "SH2_spinor":
        return np.array([0, 1, 3, 2])
    return np.arange(spec.size)


# ------------------------------------------------------------ inverse maps


def _log_h2(m):
    return np.array([math.log(m[0, 0]), m[0, 1] / m[0, 0]])


def _log_sl3(m):
    y3 = m[0, 1] / m[0, 0]
    y4 = m[1, 2] / m[1, 1]
    return np.array([math.log(m[0, 0]), math.log(m[1, 1]), y3, y4, m[0, 2] / m[0, 0] - y3 * y4])


def _log_sh2_vector(m):
    w3 = R2 * m[0, 1] / m[0, 0]
    w6 = R2 * m[1, 2] / m[1, 1]
    w5 = (2 * m[0, 2] / m[0, 0] - w3 * w6) / R2
    w4 = -R2 * m[1, 4] / m[1, 1]
    return np.array([math.log(m[0, 0]), math.log(m[1, 1]), w3, w4, w5, w6])


def _log_sh2_spinor(m):
    s = linalg.inv(m)
    w2 = math.log(s[1, 1] / s[0, 0])
    w1 = 2 * math.log(s[2, 2]) - w2
    w6 = -2 * s[3, 2] / s[2, 2]
    w5 = 2 * s[1, 2] / s[2, 2]
    w3 = R2 * s[1, 3] / s[3, 3]
    w4 = (w5 * w6 - 4 * s[0, 2] / s[2, 2]) / (2 * R2)
    return np.array([w1, w2, w3, w4, w5, w6])


def _log_m22(m):
    y3 = R2 * m[0, 1] / m[0, 0]
    v = R2 * m[1, 2:4] / m[1, 1]
    u = (2 * m[0, 2:4] / m[0, 0] - y3 * v) / R2
    y4 = -R2 * m[1, 5] / m[1, 1]
    return np.array([math.log(m[0, 0]), math.log(m[1, 1]), y3, y4, u[0], u[1], v[0], v[1]])


_LOGS = {
    "H2": _log_h2,
    "SL3": _log_sl3,
    "SH2_vector": _log_sh2_vector,
    "SH2_spinor": _log_sh2_spinor,
    "M22": _log_m22,
}


def sigma_log(spec: ModelSpec | str, l_tri, *, tol: float = 1e-8) -> np.ndarray:
    """Solvable coordinates of an upper-triangular group element.

    Closed form per model; the result is checked by rebuilding the
    representative and :class:`NotInImage` is raised if it does not match.
    """
    spec = load_model(spec)
    m = numkit.as_matrix(l_tri, name="representative")
    if m.shape != (spec.size, spec.size):
        raise NotInImage(f"expected a {spec.size}x{spec.size} matrix, got {m.shape}")
    perm = triangular_permutation(spec)
    tri = m[np.ix_(perm, perm)]
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(np.tril(tri, -1))) > tol * scale or np.any(np.diag(tri) <= 0.0):
        raise NotInImage("matrix is not triangular with a positive diagonal")
    try:
        y = _LOGS[spec.name](m)
    except (ValueError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        raise NotInImage(str(exc)) from exc
    back = coset_rep(spec, y)
    resid = float(np.max(np.abs(back - m)))
    if not resid <= tol * scale:
        raise NotInImage(f"matrix is not a solvable group element (residual {resid:.2e})")
    return y


# ------------------------------------------------------------------ forms


def _forms_h2(y):
    _, u2 = y
    return np.array([[1.0, 0.0], [2.0 * u2, 1.0]])


def _forms_sl3(y):
    _, _, y3, y4, y5 = y
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0],
            [y3, -y3, 1.0, 0.0, 0.0],
            [y4, 2.0 * y4, 0.0, 1.0, 0.0],
            [y3 * y4 + 2.0 * y5, -y3 * y4 + y5, y4, 0.0, 1.0],
        ]
    )


def _forms_sh2(w):
    _, _, w3, w4, w5, w6 = w
    e = np.zeros((6, 6))
    e[0, 0] = 1.0
    e[1, 1] = 1.0
    e[2] = [0.5 * w3, -0.5 * w3, 0.5, 0.0, 0.0, 0.0]
    # e4 = (-w6^2 (dw3 + w3 dw1 - w3 dw2) - 2 sqrt2 w6 (dw5 + w5 dw1) + 4 (dw4 + (dw1 + dw2) w4)) / 8
    e[3] = np.array(
        [
            -(w6**2) * w3 - 2 * R2 * w6 * w5 + 4 * w4,
            w6**2 * w3 + 4 * w4,
            -(w6**2),
            4.0,
            -2 * R2 * w6,
            0.0,
        ]
    ) / 8.0
    # e5 = (2 dw5 + 2 w5 dw1 + sqrt2 w6 (dw3 + w3 dw1 - w3 dw2)) / 4
    e[4] = np.array([2 * w5 + R2 * w6 * w3, -R2 * w6 * w3, R2 * w6, 0.0, 2.0, 0.0]) / 4.0
    e[5] = [0.0, 0.5 * w6, 0.0, 0.0, 0.0, 0.5]
    return e


def _forms_m22(y):
    _, _, y3, y4, u1, u2, v1, v2 = y
    u = np.array([u1, u2])
    v = np.array([v1, v2])
    vv = float(v @ v)
    uv = float(u @ v)
    e = np.zeros((8, 8))
    e[0, 0] = 1.0
    e[1, 1] = 1.0
    e[2, :3] = [y3, -y3, 1.0]
    # e4 = (-V^2 dy3 + y3 V^2 dy2 - 2 sqrt2 V.dU + (-y3 V^2 - 2 sqrt2 U.V + 4 y4) dy1 + 4 dy4 + 4 y4 dy2) / 4
    row = np.zeros(8)
    row[0] = -y3 * vv - 2 * R2 * uv + 4 * y4
    row[1] = y3 * vv + 4 * y4
    row[2] = -vv
    row[3] = 4.0
    row[4:6] = -2 * R2 * v
    e[3] = row / 4.0
    for i in range(2):
        # e5_i = dU_i + V_i (dy3 - y3 dy2) / sqrt2 + (U_i + y3 V_i / sqrt2) dy1
        r = np.zeros(8)
        r[4 + i] = 1.0
        r[2] = v[i] / R2
        r[1] = -y3 * v[i] / R2
        r[0] = u[i] + y3 * v[i] / R2
        e[4 + i] = r
        # e6_i = dV_i + V_i dy2
        r = np.zeros(8)
        r[6 + i] = 1.0
        r[1] = v[i]
        e[6 + i] = r
    return e


_FORMS = {
    "H2": _forms_h2,
    "SL3": _forms_sl3,
    "SH2_vector": _forms_sh2,
    "SH2_spinor": _forms_sh2,
    "M22": _forms_m22,
}


@lru_cache(maxsize=None)
def _nu(name: str) -> np.ndarray:
    nu = load_model(name).nu
    nu.setflags(write=False)
    return nu


def left_invariant_forms(spec: ModelSpec | str, upsilon) -> CoFrame:
    """Closed-form coframe at Y: ``e[A, a]`` is the component of e^A along dY^a."""
    spec = load_model(spec)
    y = _point(spec, upsilon)
    e = _FORMS[spec.name](y)
    nu = _nu(spec.name)
    return CoFrame(e_matrix=e, v_matrix=nu @ e, nu=nu)


def theta_components_fd(spec: ModelSpec | str, upsilon, h: float | None = None) -> np.ndarray:
    """Finite-difference oracle for the coframe: expand L^-1 dL/dY^a on the solvable generators."""
    spec = load_model(spec)
    y = _point(spec, upsilon)
    lin = linalg.inv(coset_rep(spec, y))
    out = np.empty((spec.dim, spec.dim))
    eye = np.eye(spec.dim)
    for a in range(spec.dim):
        step = numkit.fd_step(y[a]) if h is None else h
        dl = numkit.fd_derivative(lambda z: coset_rep(spec, z), y, eye[a], step)
        out[:, a] = expand_in_basis(spec.solvable, lin @ dl, tol=1e-6)
    return out


def maurer_cartan_residual(spec: ModelSpec | str, upsilon, f: np.ndarray | None = None) -> float:
    """max |de^A + 1/2 f_BC^A e^B ^ e^C| at Y, with de^A by finite differences.

    ``f`` overrides the structure constants (useful as a negative control).
    """
    spec = load_model(spec)
    y = _point(spec, upsilon)
    f = structure_constants(spec) if f is None else np.asarray(f, dtype=float)
    form = _FORMS[spec.name]
    e = form(y)
    worst = 0.0
    for a in range(spec.dim):
        d = numkit.fd_exterior_derivative(lambda z, a=a: form(z)[a], y)
        quad = np.einsum("bc,bx,cy->xy", f[:, :, a], e, e)
        worst = max(worst, float(np.max(np.abs(d + quad))))
    return worst


def metric_at(spec: ModelSpec | str, upsilon) -> np.ndarray:
    """g = e^T kappa e."""
    spec = load_model(spec)
    e = left_invariant_forms(spec, upsilon).e_matrix
    g = e.T @ spec.kappa @ e
    return 0.5 * (g + g.T)


# ------------------------------------------------------------------ Kahler


@lru_cache(maxsize=None)
def _kahler_data(name: str) -> tuple[np.ndarray, float]:
    spec = load_model(name)
    if not spec.is_kahler:
        raise NotKahler(f"{name} has no compact center; it is not a Kahler manifold")
    x = spec.xc
    a = np.array([[spec.form(x @ ki - ki @ x, kj) for kj in spec.coset] for ki in spec.coset])
    radius = float(np.max(np.abs(np.linalg.eigvals(a))))
    c = a / radius
    c.setflags(write=False)
    return c, radius


def kahler_coefficients(spec: ModelSpec | str) -> np.ndarray:
    """Constant antisymmetric C with Kahler form sum_ij C_ij V^i ^ V^j.

    C_ij = <[X_c, K_i], K_j> rescaled so that C @ C = -1.
    """
    spec = load_model(spec)
    return _kahler_data(spec.name)[0]


def kahler_normalization(spec: ModelSpec | str) -> float:
    """Spectral radius of ad(X_c) on the coset generators, divided out in :func:`kahler_coefficients`."""
    spec = load_model(spec)
    return _kahler_data(spec.name)[1]


def kahler_form_at(spec: ModelSpec | str, upsilon) -> np.ndarray:
    """Evaluation matrix of the Kahler 2-form in solvable coordinates."""
    spec = load_model(spec)
    c = kahler_coefficients(spec)
    v = left_invariant_forms(spec, upsilon).v_matrix
    k = 2.0 * v.T @ c @ v
    return 0.5 * (k - k.T)


def complex_structure_at(spec: ModelSpec | str, upsilon) -> np.ndarray:
    """J = (K / 2) g^-1, which squares to -1 and preserves the metric."""
    spec = load_model(spec)
    k = kahler_form_at(spec, upsilon)
    g = metric_at(spec, upsilon)
    return 0.5 * linalg.solve(g.T, k.T).T


def volume_density(spec: ModelSpec | str, upsilon) -> float:
    """Pfaffian of the Kahler form; the top power of the form is this times the coordinate volume."""
    spec = load_model(spec)
    return numkit.pfaffian(kahler_form_at(spec, upsilon))
