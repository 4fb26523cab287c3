"""Algebraic data of the five symmetric-space models known to the package.

Each model is a :class:`ModelSpec` holding the solvable generators ``T_A``
(the Lie algebra of the triangular group acting simply transitively on
U/H), the coset generators ``K_i``, the compact generators ``H_a`` and the
invariant quadratic form ``kappa`` on the solvable algebra.

Trace normalization differs between representations, so every spec carries
``trace_scale``: the invariant form used for projections is
``<A, B> = trace_scale * Tr(A @ B)`` and the ``K_i`` are orthonormal for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg

from .errors import NotSymplectic, UnknownModel

__all__ = [
    "ModelSpec",
    "MODEL_NAMES",
    "load_model",
    "structure_constants",
    "algebra_structure_constants",
    "expand_in_basis",
    "spinor_vector_covering",
    "unit",
]

MODEL_NAMES = ("H2", "SL3", "SH2_vector", "SH2_spinor", "M22")

_ALIASES = {
    "h2": "H2",
    "sl3": "SL3",
    "sl3-gds": "SL3",
    "sh2": "SH2_vector",
    "sh2_vector": "SH2_vector",
    "sh2-vector": "SH2_vector",
    "sh2_spinor": "SH2_spinor",
    "sh2-spinor": "SH2_spinor",
    "m22": "M22",
}

S2 = 1.0 / math.sqrt(2.0)


def unit(n: int, i: int, j: int) -> np.ndarray:
    """Matrix unit E_ij with 1-based indices."""
    m = np.zeros((n, n))
    m[i - 1, j - 1] = 1.0
    return m


def _combo(n: int, terms) -> np.ndarray:
    out = np.zeros((n, n))
    for coeff, i, j in terms:
        out[i - 1, j - 1] += coeff
    return out


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelSpec:
    """Immutable description of one symmetric space U/H.

    ``algebra`` is the full basis of the Lie algebra of U used to label
    Killing vectors, moment maps and temperatures; ``algebra_labels`` names
    its members.  ``xc`` is the generator of the center of the compact
    subalgebra and is ``None`` for non-Kahler models.
    """

    name: str
    dim: int
    size: int
    solvable: np.ndarray
    coset: np.ndarray
    compact: np.ndarray
    algebra: np.ndarray
    algebra_labels: tuple[str, ...]
    kappa: np.ndarray
    trace_scale: float
    coords: tuple[str, ...]
    xc: np.ndarray | None = None
    invariant_form: np.ndarray | None = None
    invariant_kind: str | None = None
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def is_kahler(self) -> bool:
        return self.xc is not None

    def form(self, a, b) -> float:
        return self.trace_scale * float(np.trace(np.asarray(a) @ np.asarray(b)))

    @property
    def nu(self) -> np.ndarray:
        """Constant matrix nu[i, A] = <K_i, T_A> mapping left-invariant forms to the vielbein."""
        return np.array([[self.form(k, t) for t in self.solvable] for k in self.coset])


# ----------------------------------------------------------------------- H2


def _h2() -> ModelSpec:
    xc = np.array([[0.0, 1.0], [-1.0, 0.0]])
    t1 = np.diag([1.0, -1.0])
    t2 = unit(2, 1, 2)
    k1 = np.diag([1.0, -1.0]) * S2
    k2 = (unit(2, 1, 2) + unit(2, 2, 1)) * S2
    return ModelSpec(
        name="H2",
        dim=2,
        size=2,
        solvable=_frozen([t1, t2]),
        coset=_frozen([k1, k2]),
        compact=_frozen([xc]),
        algebra=_frozen([xc, t1, t2]),
        algebra_labels=("Xc", "T1", "T2"),
        kappa=_frozen([[2.0, 0.0], [0.0, 0.5]]),
        trace_scale=1.0,
        coords=("u1", "u2"),
        xc=_frozen(xc),
        invariant_form=_frozen([[0.0, 1.0], [-1.0, 0.0]]),
        invariant_kind="symplectic",
    )


# ---------------------------------------------------------------------- SL3


def _sl3() -> ModelSpec:
    n = 3
    ts = [
        np.diag([1.0, 0.0, -1.0]),
        np.diag([0.0, 1.0, -1.0]),
        unit(n, 1, 2),
        unit(n, 2, 3),
        unit(n, 1, 3),
    ]
    ks = [
        np.diag([1.0, 0.0, -1.0]) * S2,
        np.diag([-1.0, 2.0, -1.0]) / math.sqrt(6.0),
        (unit(n, 1, 2) + unit(n, 2, 1)) * S2,
        (unit(n, 2, 3) + unit(n, 3, 2)) * S2,
        (unit(n, 1, 3) + unit(n, 3, 1)) * S2,
    ]
    hs = [unit(n, 1, 2) - unit(n, 2, 1), unit(n, 2, 3) - unit(n, 3, 2), unit(n, 1, 3) - unit(n, 3, 1)]
    kappa = np.zeros((5, 5))
    kappa[:2, :2] = [[2.0, 1.0], [1.0, 2.0]]
    kappa[2:, 2:] = 0.5 * np.eye(3)
    return ModelSpec(
        name="SL3",
        dim=5,
        size=3,
        solvable=_frozen(ts),
        coset=_frozen(ks),
        compact=_frozen(hs),
        algebra=_frozen(ks + hs),
        algebra_labels=("K1", "K2", "K3", "K4", "K5", "H1", "H2", "H3"),
        kappa=_frozen(kappa),
        trace_scale=1.0,
        coords=("y1", "y2", "y3", "y4", "y5"),
    )


# ---------------------------------------------------------------------- SH2


def _sh2_vector_table() -> list[np.ndarray]:
    n = 5
    h = 0.5
    return [
        np.diag([1.0, 0.0, 0.0, 0.0, -1.0]),
        np.diag([0.0, 1.0, 0.0, -1.0, 0.0]),
        _combo(n, [(S2, 1, 2), (S2, 2, 1), (-S2, 4, 5), (-S2, 5, 4)]),
        _combo(n, [(S2, 1, 4), (S2, 4, 1), (-S2, 2, 5), (-S2, 5, 2)]),
        _combo(n, [(S2, 1, 3), (S2, 3, 1), (-S2, 3, 5), (-S2, 5, 3)]),
        _combo(n, [(S2, 2, 3), (S2, 3, 2), (-S2, 3, 4), (-S2, 4, 3)]),
        _combo(n, [(S2, 2, 3), (-S2, 3, 2), (-S2, 3, 4), (S2, 4, 3)]),
        _combo(n, [(S2, 1, 3), (-S2, 3, 1), (-S2, 3, 5), (S2, 5, 3)]),
        _combo(n, [(h, 1, 2), (h, 1, 4), (-h, 2, 1), (-h, 2, 5), (-h, 4, 1), (-h, 4, 5), (h, 5, 2), (h, 5, 4)]),
        _combo(n, [(h, 1, 2), (-h, 1, 4), (-h, 2, 1), (h, 2, 5), (h, 4, 1), (-h, 4, 5), (-h, 5, 2), (h, 5, 4)]),
    ]


def _sh2_spinor_table() -> list[np.ndarray]:
    n = 4
    h = 0.5
    return [
        np.diag([-h, -h, h, h]),
        np.diag([-h, h, h, -h]),
        _combo(n, [(S2, 2, 4), (S2, 4, 2)]),
        _combo(n, [(-S2, 1, 3), (-S2, 3, 1)]),
        _combo(n, [(h, 1, 4), (h, 2, 3), (h, 3, 2), (h, 4, 1)]),
        _combo(n, [(h, 1, 2), (h, 2, 1), (-h, 3, 4), (-h, 4, 3)]),
        _combo(n, [(h, 1, 2), (-h, 2, 1), (h, 3, 4), (-h, 4, 3)]),
        _combo(n, [(h, 1, 4), (h, 2, 3), (-h, 3, 2), (-h, 4, 1)]),
        _combo(n, [(-h, 1, 3), (h, 2, 4), (h, 3, 1), (-h, 4, 2)]),
        _combo(n, [(h, 1, 3), (h, 2, 4), (-h, 3, 1), (-h, 4, 2)]),
    ]


def _sh2_solvable(table: list[np.ndarray]) -> list[np.ndarray]:
    # triangular generators as combinations of coset and compact members
    k1, k2, k3, k4, k5, k6, h1, h2, h3, h0 = table
    r = math.sqrt(2.0)
    return [
        k1,
        k2,
        k3 + (h0 + h3) / r,
        k4 + (h3 - h0) / r,
        k5 + h2,
        k6 + h1,
    ]


def _sh2(kind: str) -> ModelSpec:
    if kind == "vector":
        table, size, scale = _sh2_vector_table(), 5, 0.5
    else:
        # the printed spinor table obeys the opposite sign convention for
        # commutators; negating it gives the same structure constants
        table, size, scale = [-m for m in _sh2_spinor_table()], 4, 1.0
    labels = ("K1", "K2", "K3", "K4", "K5", "K6", "H1", "H2", "H3", "H0")
    eta, kind_name = _invariant_form(table, size)
    return ModelSpec(
        name=f"SH2_{kind}",
        dim=6,
        size=size,
        solvable=_frozen(_sh2_solvable(table)),
        coset=_frozen(table[:6]),
        compact=_frozen(table[6:]),
        algebra=_frozen(table),
        algebra_labels=labels,
        kappa=_frozen(np.eye(6)),
        trace_scale=scale,
        coords=("w1", "w2", "w3", "w4", "w5", "w6"),
        xc=_frozen(table[9]),
        invariant_form=_frozen(eta),
        invariant_kind=kind_name,
    )


# ---------------------------------------------------------------------- M22


def _m22() -> ModelSpec:
    n = 6
    ts = [
        unit(n, 1, 1) - unit(n, 6, 6),
        unit(n, 2, 2) - unit(n, 5, 5),
        (unit(n, 1, 2) - unit(n, 5, 6)) * S2,
        (unit(n, 1, 5) - unit(n, 2, 6)) * S2,
        (unit(n, 1, 3) - unit(n, 3, 6)) * S2,
        (unit(n, 1, 4) - unit(n, 4, 6)) * S2,
        (unit(n, 2, 3) - unit(n, 3, 5)) * S2,
        (unit(n, 2, 4) - unit(n, 4, 5)) * S2,
    ]
    ks = [ts[0], ts[1]] + [t + t.T for t in ts[2:]]
    h = 0.5
    xc = _combo(n, [(h, 1, 2), (-h, 1, 5), (-h, 2, 1), (h, 2, 6), (h, 5, 1), (-h, 5, 6), (-h, 6, 2), (h, 6, 5)])
    eta, kind_name = _invariant_form(ts, n)
    hs = _compact_completion(ts, eta, xc)
    return ModelSpec(
        name="M22",
        dim=8,
        size=n,
        solvable=_frozen(ts),
        coset=_frozen(ks),
        compact=_frozen(hs + [xc]),
        algebra=_frozen(ks + hs + [xc]),
        algebra_labels=tuple([f"K{i}" for i in range(1, 9)] + [f"H{i}" for i in range(1, 7)] + ["Xc"]),
        kappa=_frozen(np.diag([1.0, 1.0] + [0.25] * 6)),
        trace_scale=0.5,
        coords=("y1", "y2", "y3", "y4", "u1", "u2", "v1", "v2"),
        xc=_frozen(xc),
        invariant_form=_frozen(eta),
        invariant_kind=kind_name,
    )


def _nullspace(a: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return vt[rank:]


def _invariant_form(gens, n: int) -> tuple[np.ndarray, str]:
    """Nondegenerate bilinear form preserved by the generators: X^T B + B X = 0.

    Returns the form and ``"orthogonal"`` or ``"symplectic"`` depending on
    its symmetry.  Solved as a linear nullspace problem over all n*n entries.
    """
    rows = []
    eye = np.eye(n)
    for x in gens:
        # vec(X^T B + B X) with row-major vec
        rows.append(np.kron(x.T, eye) + np.kron(eye, x.T))
    basis = _nullspace(np.vstack(rows))
    if basis.shape[0] != 1:
        raise ValueError(f"invariant form is not unique (dimension {basis.shape[0]})")
    b = basis[0].reshape(n, n)
    b = b / np.max(np.abs(b))
    if np.allclose(b, b.T, atol=1e-12):
        kind = "orthogonal"
    elif np.allclose(b, -b.T, atol=1e-12):
        kind = "symplectic"
    else:
        raise ValueError("invariant form is neither symmetric nor antisymmetric")
    return np.round(b, 14), kind


def _compact_completion(ts, eta: np.ndarray, xc: np.ndarray) -> list[np.ndarray]:
    """Antisymmetric generators preserving ``eta`` and commuting with ``xc``, excluding ``xc``.

    The result is orthonormal for ``<A, B> = -Tr(A B) / 2`` and orthogonal to ``xc``.
    """
    n = eta.shape[0]
    eye = np.eye(n)
    # with X antisymmetric, X^T eta + eta X = 0 reduces to [eta, X] = 0 (row-major vec)
    preserve = np.kron(eta, eye) - np.kron(eye, eta.T)
    symmetric = np.kron(eye, eye) + np.eye(n * n)[[j * n + i for i in range(n) for j in range(n)]]
    commute = np.kron(eye, xc.T) - np.kron(xc, eye)  # vec(X xc - xc X)
    null = _nullspace(np.vstack([preserve, symmetric, commute]))
    # project elementary rotations onto the solution space for a sparse, reproducible basis
    basis = []
    for i in range(n):
        for j in range(i + 1, n):
            v = (unit(n, i + 1, j + 1) - unit(n, j + 1, i + 1)).ravel()
            basis.append((null.T @ (null @ v)).reshape(n, n))

    def norm(a, b):
        return -0.5 * float(np.trace(a @ b))

    out: list[np.ndarray] = []
    for m in basis:
        m = m - norm(m, xc) / norm(xc, xc) * xc
        for q in out:
            m = m - norm(m, q) * q
        size = norm(m, m)
        if size > 1e-10:
            out.append(m / math.sqrt(size))
    return out


# ------------------------------------------------------------------ loaders

_BUILDERS = {
    "H2": _h2,
    "SL3": _sl3,
    "SH2_vector": lambda: _sh2("vector"),
    "SH2_spinor": lambda: _sh2("spinor"),
    "M22": _m22,
}


@lru_cache(maxsize=None)
def _load(name: str) -> ModelSpec:
    return _BUILDERS[name]()


def canonical_name(name: str) -> str:
    if name in _BUILDERS:
        return name
    key = name.strip().lower()
    if key in _ALIASES:
        return _ALIASES[key]
    raise UnknownModel(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}")


def load_model(name: str | ModelSpec) -> ModelSpec:
    """Return the cached :class:`ModelSpec` for ``name`` (case-insensitive aliases accepted)."""
    if isinstance(name, ModelSpec):
        return name
    return _load(canonical_name(name))


def expand_in_basis(basis: np.ndarray, m: np.ndarray, *, tol: float = 1e-9) -> np.ndarray:
    """Coefficients c with m = sum_k c_k basis[k]; raises ValueError if m is outside the span."""
    a = np.asarray(basis).reshape(len(basis), -1).T
    c, *_ = np.linalg.lstsq(a, np.asarray(m).ravel(), rcond=None)
    resid = np.max(np.abs(a @ c - np.asarray(m).ravel())) if c.size else 0.0
    if resid > tol * max(1.0, float(np.max(np.abs(m)))):
        raise ValueError(f"matrix is not in the span of the basis (residual {resid:.2e})")
    return c


def _structure_tensor(basis: np.ndarray) -> np.ndarray:
    d = len(basis)
    f = np.zeros((d, d, d))
    for b in range(d):
        for c in range(b + 1, d):
            comm = basis[b] @ basis[c] - basis[c] @ basis[b]
            coeffs = expand_in_basis(basis, comm)
            f[b, c] = coeffs
            f[c, b] = -coeffs
    f[np.abs(f) < 1e-14] = 0.0
    f.setflags(write=False)
    return f


@lru_cache(maxsize=None)
def _solvable_f(name: str) -> np.ndarray:
    return _structure_tensor(_load(name).solvable)


@lru_cache(maxsize=None)
def _algebra_f(name: str) -> np.ndarray:
    return _structure_tensor(_load(name).algebra)


def structure_constants(spec: ModelSpec | str) -> np.ndarray:
    """f[B, C, A] with [T_B, T_C] = f[B, C, A] T_A on the solvable algebra."""
    spec = load_model(spec)
    return _solvable_f(spec.name)


def algebra_structure_constants(spec: ModelSpec | str) -> np.ndarray:
    """Same as :func:`structure_constants` for the full algebra basis ``spec.algebra``."""
    spec = load_model(spec)
    return _algebra_f(spec.name)


def jacobi_residual(f: np.ndarray) -> float:
    """max |f_ab^e f_ec^g + cyclic|."""
    t = np.einsum("abe,ecg->abcg", f, f)
    cyc = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return float(np.max(np.abs(cyc))) if cyc.size else 0.0


# ------------------------------------------------------- spinor/vector map


@lru_cache(maxsize=None)
def _intertwiner() -> np.ndarray:
    """Five 4x4 matrices G_j with [S_A, G_j] = sum_i (V_A)_ij G_i for matching generators.

    S_A and V_A are the spinor and vector algebra bases of the two SH2 models.

    These play the role of gamma matrices adapted to the triangular bases; they
    are fixed up to an overall factor, chosen so that O[identity] = identity.
    """
    vs = _sh2_vector_table()
    ss = list(load_model("SH2_spinor").algebra)
    n4, n5 = 4, 5
    # unknown tensor G[j] (4x4) for j in 0..4, flattened as (j, r, c)
    size = n5 * n4 * n4
    rows = []
    for s, v in zip(ss, vs):
        for j in range(n5):
            for r in range(n4):
                for c in range(n4):
                    row = np.zeros(size)
                    # (S G_j - G_j S)[r, c]
                    for k in range(n4):
                        row[j * 16 + k * 4 + c] += s[r, k]
                        row[j * 16 + r * 4 + k] -= s[k, c]
                    for i in range(n5):
                        row[i * 16 + r * 4 + c] -= v[i, j]
                    rows.append(row)
    null = _nullspace(np.array(rows))
    if null.shape[0] != 1:
        raise ValueError(f"intertwiner not unique (dimension {null.shape[0]})")
    g = null[0].reshape(n5, n4, n4)
    return g


@lru_cache(maxsize=None)
def _intertwiner_dual() -> np.ndarray:
    g = _intertwiner()
    a = g.reshape(5, -1)
    # dual basis D_i with <D_i, G_j> = delta_ij under the Frobenius product
    return np.linalg.pinv(a).T.reshape(5, 4, 4)


def spinor_vector_covering(s, *, tol: float = 1e-10) -> np.ndarray:
    """Image of a 4x4 symplectic matrix in the 5x5 vector representation.

    O[i, j] is the component along G_i of S G_j S^-1, so the map is a group
    homomorphism with kernel {+1, -1}.
    """
    spec = load_model("SH2_spinor")
    s = np.asarray(s, dtype=float)
    if s.shape != (4, 4):
        raise NotSymplectic(f"expected a 4x4 matrix, got shape {s.shape}")
    c = spec.invariant_form
    resid = np.max(np.abs(s @ c @ s.T - c))
    if resid > tol * max(1.0, float(np.max(np.abs(s))) ** 2):
        raise NotSymplectic(f"matrix does not preserve the symplectic form (residual {resid:.2e})")
    g = _intertwiner()
    dual = _intertwiner_dual()
    sinv = linalg.inv(s)
    out = np.empty((5, 5))
    for j in range(5):
        img = s @ g[j] @ sinv
        out[:, j] = np.einsum("irc,rc->i", dual, img)
    return out
