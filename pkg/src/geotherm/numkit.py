"""Small numerical kernel used by the geometric and thermodynamic layers.

Matrices are plain ``numpy`` arrays.  Everything here is a pure function;
random numbers come from an explicit :class:`numpy.random.Generator`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NoConvergence, NotPositiveDefinite, NotSymmetric

__all__ = [
    "QuadratureResult",
    "as_matrix",
    "reverse_cholesky",
    "bessel_k0",
    "log_bessel_k0",
    "integrate_adaptive",
    "integrate_adaptive_2d",
    "fd_step",
    "fd_derivative",
    "fd_gradient",
    "fd_jacobian",
    "fd_hessian",
    "fd_exterior_derivative",
    "fd_exterior_derivative_2form",
    "pfaffian",
    "make_rng",
]

# 4th-order central stencil for a first derivative
_STENCIL_OFFSETS = (-2.0, -1.0, 1.0, 2.0)
_STENCIL_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def as_matrix(a, *, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2D float array or raise :class:`DomainError`."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise DomainError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} has non-finite entries")
    return m


def reverse_cholesky(m, *, sym_tol: float = 1e-10) -> np.ndarray:
    """Factor a symmetric positive-definite ``m`` as ``U @ U.T`` with ``U`` upper triangular.

    The elimination runs from the bottom-right corner upwards, so the factor
    has the same triangular shape as a solvable coset representative.
    """
    m = as_matrix(m)
    n, k = m.shape
    if n != k:
        raise NotSymmetric(f"matrix is not square: {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.T)) > sym_tol * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    u = np.zeros_like(m)
    for j in range(n - 1, -1, -1):
        pivot = m[j, j] - np.dot(u[j, j + 1 :], u[j, j + 1 :])
        if not pivot > 0.0:
            raise NotPositiveDefinite(f"non-positive pivot {pivot:g} at index {j}")
        u[j, j] = math.sqrt(pivot)
        for i in range(j - 1, -1, -1):
            u[i, j] = (m[i, j] - np.dot(u[i, j + 1 :], u[j, j + 1 :])) / u[j, j]
    return u


def bessel_k0(x):
    """Modified Bessel function of the second kind, order zero.

    Accepts scalars or arrays; every entry must be strictly positive.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError("bessel_k0 requires x > 0")
    out = special.k0(arr)
    return float(out) if out.ndim == 0 else out


def log_bessel_k0(x):
    """log K0(x) without overflow or underflow, via the exponentially scaled kernel."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError("log_bessel_k0 requires x > 0")
    out = np.log(special.k0e(arr)) - arr
    return float(out) if out.ndim == 0 else out


def integrate_adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    tol: float = 1e-10,
    limit: int = 400,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod quadrature; ``a``/``b`` may be infinite."""
    counter = [0]

    def wrapped(x):
        counter[0] += 1
        return f(x)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(wrapped, a, b, epsabs=tol, epsrel=tol, limit=limit)
        except integrate.IntegrationWarning as exc:
            raise NoConvergence(f"quadrature did not converge: {exc}") from exc
    if not math.isfinite(value):
        raise NoConvergence("quadrature produced a non-finite value")
    return QuadratureResult(float(value), float(abs(err)), counter[0])


def integrate_adaptive_2d(
    f: Callable[[float, float], float],
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    *,
    tol: float = 1e-10,
    limit: int = 200,
) -> QuadratureResult:
    """Iterated adaptive quadrature of ``f(x, y)``; the inner integral runs over ``y``."""
    counter = [0]
    inner_errors: list[float] = []

    def inner(x):
        res = integrate_adaptive(lambda y: f(x, y), *y_range, tol=tol * 0.1, limit=limit)
        counter[0] += res.evaluations
        inner_errors.append(res.error_estimate)
        return res.value

    outer = integrate_adaptive(inner, *x_range, tol=tol, limit=limit)
    # crude bound: outer error plus the largest inner error times the outer span proxy
    err = outer.error_estimate + (max(inner_errors) if inner_errors else 0.0)
    return QuadratureResult(outer.value, err, counter[0])


def fd_step(x: float, base: float = 1e-4) -> float:
    return base * max(1.0, abs(float(x)))


def fd_derivative(
    f: Callable[[np.ndarray], float | np.ndarray],
    point,
    direction,
    h: float | None = None,
):
    """Directional derivative by the 4th-order central stencil.

    ``f`` may return an array; the derivative then has the same shape.
    """
    x = np.asarray(point, dtype=float)
    v = np.asarray(direction, dtype=float)
    if h is None:
        h = fd_step(np.max(np.abs(x)) if x.size else 0.0)
    acc = None
    for off, w in zip(_STENCIL_OFFSETS, _STENCIL_WEIGHTS):
        val = np.asarray(f(x + off * h * v), dtype=float) * w
        acc = val if acc is None else acc + val
    out = acc / h
    return float(out) if out.ndim == 0 else out


def fd_gradient(f, point, h: float | None = None) -> np.ndarray:
    x = np.asarray(point, dtype=float)
    eye = np.eye(x.size)
    grads = []
    for i in range(x.size):
        step = fd_step(x[i]) if h is None else h
        grads.append(fd_derivative(f, x, eye[i], step))
    return np.array(grads)


def fd_jacobian(F, point, h: float | None = None) -> np.ndarray:
    """J[i, j] = dF_i / dx_j."""
    return np.moveaxis(fd_gradient(F, point, h), 0, -1)


def fd_hessian(f, point, h: float | None = None) -> np.ndarray:
    """Hessian as the stencil derivative of the stencil gradient, symmetrized."""
    x = np.asarray(point, dtype=float)
    n = x.size
    steps = [fd_step(x[i], 1e-3) if h is None else h for i in range(n)]
    eye = np.eye(n)
    hess = np.empty((n, n))
    for j in range(n):

        def grad_j(y, j=j):
            return fd_derivative(f, y, eye[j], steps[j])

        for i in range(n):
            hess[i, j] = fd_derivative(grad_j, x, eye[i], steps[i])
    return 0.5 * (hess + hess.T)


def fd_exterior_derivative(one_form: Callable[[np.ndarray], np.ndarray], point, h=None) -> np.ndarray:
    """Components D[a, b] = d_a w_b - d_b w_a of d(w) for ``w = w_b dx^b``.

    With the convention ``dw = sum_{a<b} D[a, b] dx^a ^ dx^b`` the matrix is
    the value of ``dw`` on the coordinate pair (e_a, e_b).
    """
    jac = fd_gradient(one_form, point, h)  # jac[a, b] = d_a w_b
    return jac - jac.T


def fd_exterior_derivative_2form(two_form: Callable[[np.ndarray], np.ndarray], point, h=None) -> np.ndarray:
    """Cyclic sum C[a, b, c] = d_a W_bc + d_b W_ca + d_c W_ab for a 2-form given by its evaluation matrix."""
    jac = fd_gradient(two_form, point, h)  # jac[a, b, c] = d_a W_bc
    return jac + np.transpose(jac, (1, 2, 0)) + np.transpose(jac, (2, 0, 1))


def pfaffian(a) -> float:
    """Pfaffian of an antisymmetric matrix by expansion along the first row."""
    m = as_matrix(a)
    n = m.shape[0]
    if n % 2:
        return 0.0
    if n == 0:
        return 1.0
    total = 0.0
    rest = list(range(1, n))
    for pos, j in enumerate(rest):
        if m[0, j] == 0.0:
            continue
        keep = [k for k in rest if k != j]
        sign = -1.0 if pos % 2 else 1.0
        total += sign * m[0, j] * pfaffian(m[np.ix_(keep, keep)])
    return total


def make_rng(seed: int | None) -> np.random.Generator:
    """PCG64 generator; the same seed always yields the same stream."""
    return np.random.Generator(np.random.PCG64(seed))


def max_abs(values: Sequence[float] | np.ndarray) -> float:
    arr = np.asarray(values, dtype=float)
    return float(np.max(np.abs(arr))) if arr.size else 0.0
