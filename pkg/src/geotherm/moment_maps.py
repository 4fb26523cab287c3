"""Moment maps of the Killing vectors on Kahler models.

For the generator J the moment map is ``P_J(Y) = <Xc, L^-1 J L> / |<Xc, Xc>|``,
which equals ``Tr(Xc L^-1 J L) / 2`` in the defining representation of H2,
SH2 and M22.  With ``(i_k K)_b = k^a K_ab`` these satisfy
``i_k K = MOMENT_SCALE * dP`` and the bracket
``{F, G} = POISSON_FACTOR * dF . K^-1 . dG`` realizes ``{P_A, P_B} = f_AB^C P_C``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from . import numkit
from .coset_geometry import coset_rep, kahler_form_at
from .errors import DomainError, NotKahler
from .isometry_engine import killing_field
from .model_catalog import ModelSpec, algebra_structure_constants, load_model

__all__ = [
    "MOMENT_SCALE",
    "POISSON_FACTOR",
    "moment_map",
    "moment_vector",
    "moment_vector_closed",
    "moment_batch",
    "hamiltonian_residual",
    "kahler_poisson_bracket",
    "moment_poisson_residual",
]

MOMENT_SCALE = 2.0
POISSON_FACTOR = -2.0
R2 = math.sqrt(2.0)


def _kahler_spec(spec) -> ModelSpec:
    spec = load_model(spec)
    if not spec.is_kahler:
        raise NotKahler(f"{spec.name} is not Kahler; moment maps are undefined")
    return spec


def moment_vector(spec: ModelSpec | str, upsilon, *, xc=None) -> np.ndarray:
    """All moment maps at Y, ordered as ``spec.algebra``.

    ``xc`` replaces the compact center in the formula (negative controls only).
    """
    spec = _kahler_spec(spec)
    x = spec.xc if xc is None else np.asarray(xc, dtype=float)
    lrep = coset_rep(spec, upsilon)
    conj = linalg.solve(lrep, np.einsum("kij,jl->kil", spec.algebra, lrep).transpose(1, 0, 2).reshape(spec.size, -1))
    conj = conj.reshape(spec.size, len(spec.algebra), spec.size).transpose(1, 0, 2)
    norm = abs(spec.form(spec.xc, spec.xc))
    return spec.trace_scale * np.einsum("ij,kji->k", x, conj) / norm


def moment_map(spec: ModelSpec | str, index: int, upsilon, *, xc=None) -> float:
    return float(moment_vector(spec, upsilon, xc=xc)[index])


def _h2_closed(y):
    u1, u2 = y
    return np.array(
        [
            0.5 * np.exp(-2 * u1) * (-np.exp(4 * u1) * (u2**2 + 1) - 1),
            -u2,
            -0.5 * np.exp(-2 * u1),
        ]
    )


def _sh2_closed(w):
    w1, w2, w3, w4, w5, w6 = w
    ex = np.exp
    q6 = w6**2 + 4
    q5 = w5**2 + 4
    p = [None] * 10
    p[0] = (4 * R2 * w4 - 4 * w5 * w6 - R2 * w3 * q6) / 16
    p[1] = (4 * w4 + w3 * q6) / (8 * R2)
    p[2] = (ex(w1 - w2) * (R2 * q6 * w3**2 + 4 * w5 * w6 * w3 + 2 * R2 * q5) - 2 * R2 * ex(w2 - w1) * q6) / 32
    p[3] = ex(-w1 - w2) * (16 * R2 - ex(2 * (w1 + w2)) * (8 * R2 * w4**2 - 8 * w5 * w6 * w4 + R2 * q5 * q6)) / 64
    inner = -4 * R2 * w4 * w5 + R2 * w3 * q6 * w5 - 4 * w3 * w4 * w6 + 2 * (w5**2 - 4) * w6
    p[4] = ex(w1) * inner / 32 - 0.25 * ex(-w1) * w6
    p[5] = ex(-w2) * (2 * R2 * (w3 - ex(2 * w2) * w4) * w6 + w5 * (ex(2 * w2) * q6 + 4)) / 16
    p[6] = ex(-w2) * (2 * R2 * (w3 + ex(2 * w2) * w4) * w6 + w5 * (4 - ex(2 * w2) * q6)) / 16
    p[7] = -0.25 * ex(-w1) * w6 - ex(w1) * inner / 32
    a = -4 * ex(2 * w2) * q6 - 2 * ex(2 * w1) * (q6 * w3**2 + 2 * R2 * w5 * w6 * w3 + 2 * q5)
    b = ex(2 * (w1 + w2)) * (8 * w4**2 - 4 * R2 * w5 * w6 * w4 + q5 * q6)
    p[8] = ex(-w1 - w2) * (a + b + 16) / 64
    p[9] = ex(-w1 - w2) * (a - b - 16) / 64
    return np.array(p)


_CLOSED = {"H2": _h2_closed, "SH2_vector": _sh2_closed}


def moment_vector_closed(spec: ModelSpec | str, upsilon) -> np.ndarray:
    """Tabulated moment maps (H2 and SH2 in the vector representation).

    ``upsilon`` may carry trailing batch axes: shape (d, ...) gives (n_algebra, ...).
    """
    spec = _kahler_spec(spec)
    if spec.name not in _CLOSED:
        raise DomainError(f"no closed-form moment maps tabulated for {spec.name}")
    return _CLOSED[spec.name](np.asarray(upsilon, dtype=float))


def moment_batch(spec: ModelSpec | str, points) -> np.ndarray:
    """Moment maps for an (n, d) array of points, shape (n, n_algebra)."""
    spec = _kahler_spec(spec)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    name = "SH2_vector" if spec.name == "SH2_spinor" else spec.name
    if name in _CLOSED:
        return _CLOSED[name](pts.T).T
    return np.array([moment_vector(spec, p) for p in pts])


def hamiltonian_residual(
    spec: ModelSpec | str,
    index: int,
    upsilon,
    *,
    scale: float = MOMENT_SCALE,
    xc=None,
    field=None,
) -> float:
    """max_b |k^a K_ab - scale * d_b P| for the generator ``index``.

    ``field`` supplies the Killing vector at Y (generic construction by default).
    """
    spec = _kahler_spec(spec)
    y = np.asarray(upsilon, dtype=float)
    k = killing_field(spec, index, y) if field is None else np.asarray(field, dtype=float)
    kform = kahler_form_at(spec, y)
    grad = numkit.fd_gradient(lambda z: moment_map(spec, index, z, xc=xc), y)
    return float(np.max(np.abs(k @ kform - scale * grad)))


def kahler_poisson_bracket(spec: ModelSpec | str, f, g, upsilon) -> float:
    """{f, g} = POISSON_FACTOR * df . K^-1 . dg with gradients by finite differences."""
    spec = _kahler_spec(spec)
    y = np.asarray(upsilon, dtype=float)
    kinv = linalg.inv(kahler_form_at(spec, y))
    return POISSON_FACTOR * float(numkit.fd_gradient(f, y) @ kinv @ numkit.fd_gradient(g, y))


def moment_poisson_residual(spec: ModelSpec | str, upsilon) -> float:
    """max |{P_A, P_B} - f_AB^C P_C| over all generator pairs at Y."""
    spec = _kahler_spec(spec)
    y = np.asarray(upsilon, dtype=float)
    kinv = linalg.inv(kahler_form_at(spec, y))
    grads = numkit.fd_jacobian(lambda z: moment_vector(spec, z), y)  # grads[A, a]
    brackets = POISSON_FACTOR * grads @ kinv @ grads.T
    expected = np.einsum("abc,c->ab", algebra_structure_constants(spec), moment_vector(spec, y))
    return float(np.max(np.abs(brackets - expected)))
