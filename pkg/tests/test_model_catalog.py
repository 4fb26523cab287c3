from __future__ import annotations

import numpy as np
import pytest
from scipy import linalg

from geotherm.coset_geometry import coset_rep, triangular_permutation
from geotherm.errors import NotSymplectic, UnknownModel
from geotherm.isometry_engine import group_exp
from geotherm.model_catalog import (
    MODEL_NAMES,
    algebra_structure_constants,
    expand_in_basis,
    jacobi_residual,
    load_model,
    spinor_vector_covering,
    structure_constants,
)


def _gram(spec, mats):
    return np.array([[spec.form(a, b) for b in mats] for a in mats])


class TestCatalogData:
    @pytest.mark.parametrize(
        "name, kappa",
        [
            ("H2", np.diag([2.0, 0.5])),
            ("SH2_vector", np.eye(6)),
            ("SH2_spinor", np.eye(6)),
            ("M22", np.diag([1.0, 1.0] + [0.25] * 6)),
        ],
    )
    def test_solvable_gram_matrix(self, name, kappa):
        spec = load_model(name)
        np.testing.assert_allclose(spec.kappa, kappa, atol=1e-13)

    def test_sl3_gram_matrix(self):
        kappa = load_model("SL3").kappa
        np.testing.assert_allclose(kappa[:2, :2], [[2.0, 1.0], [1.0, 2.0]], atol=1e-13)
        np.testing.assert_allclose(kappa[2:, 2:], 0.5 * np.eye(3), atol=1e-13)
        np.testing.assert_allclose(kappa[:2, 2:], 0.0, atol=1e-13)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_vielbein_reproduces_gram(self, name):
        spec = load_model(name)
        nu = spec.nu
        np.testing.assert_allclose(nu.T @ nu, spec.kappa, atol=1e-12)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_coset_generators_orthonormal(self, name):
        spec = load_model(name)
        np.testing.assert_allclose(_gram(spec, spec.coset), np.eye(spec.dim), atol=1e-12)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_solvable_generators_upper_triangular(self, name):
        spec = load_model(name)
        perm = triangular_permutation(spec)
        for t in spec.solvable:
            assert np.allclose(np.tril(t[np.ix_(perm, perm)], -1), 0.0)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_dimensions_consistent(self, name):
        spec = load_model(name)
        assert len(spec.solvable) == spec.dim == len(spec.coset) == len(spec.coords)
        assert len(spec.algebra) == len(spec.algebra_labels)
        assert spec.solvable.shape[1:] == (spec.size, spec.size)

    @pytest.mark.parametrize("name", [n for n in MODEL_NAMES if n != "SL3"])
    def test_center_generator_commutes_with_compact_part(self, name):
        spec = load_model(name)
        assert spec.is_kahler
        for h in spec.compact:
            assert np.max(np.abs(spec.xc @ h - h @ spec.xc)) < 1e-12

    def test_sl3_is_not_kahler(self):
        assert not load_model("SL3").is_kahler

    def test_aliases_and_unknown_names(self):
        assert load_model("h2") is load_model("H2")
        with pytest.raises(UnknownModel):
            load_model("E8")


class TestStructureConstants:
    def test_h2_bracket(self):
        f = structure_constants("H2")
        assert f[0, 1, 1] == pytest.approx(2.0)
        assert f[1, 0, 1] == pytest.approx(-2.0)
        assert np.count_nonzero(f) == 2

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_jacobi_identity(self, name):
        assert jacobi_residual(structure_constants(name)) < 1e-12
        assert jacobi_residual(algebra_structure_constants(name)) < 1e-12

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_antisymmetry(self, name):
        f = algebra_structure_constants(name)
        np.testing.assert_allclose(f, -np.transpose(f, (1, 0, 2)), atol=0)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_brackets_reconstruct(self, name, rng):
        spec = load_model(name)
        f = structure_constants(name)
        b, c = rng.choice(spec.dim, size=2, replace=False)
        comm = spec.solvable[b] @ spec.solvable[c] - spec.solvable[c] @ spec.solvable[b]
        np.testing.assert_allclose(np.einsum("a,aij->ij", f[b, c], spec.solvable), comm, atol=1e-12)

    def test_jacobi_negative_control(self):
        f = np.array(structure_constants("SL3"))
        f[0, 2, 2] += 0.1
        f[2, 0, 2] -= 0.1
        assert jacobi_residual(f) > 1e-3

    def test_expand_rejects_matrix_outside_span(self):
        with pytest.raises(ValueError):
            expand_in_basis(load_model("H2").solvable, np.array([[0.0, 0.0], [1.0, 0.0]]))


class TestSpinorVectorCovering:
    @pytest.fixture
    def spinor(self):
        return load_model("SH2_spinor")

    def _random_element(self, spinor, rng, scale=0.4):
        x = np.einsum("a,aij->ij", rng.normal(size=len(spinor.algebra)) * scale, spinor.algebra)
        return group_exp(x)

    def test_identity(self):
        np.testing.assert_allclose(spinor_vector_covering(np.eye(4)), np.eye(5), atol=1e-12)

    def test_kernel_contains_minus_one(self, spinor, rng):
        s = self._random_element(spinor, rng)
        np.testing.assert_allclose(spinor_vector_covering(-s), spinor_vector_covering(s), atol=1e-12)

    def test_homomorphism(self, spinor, rng):
        a = self._random_element(spinor, rng)
        b = self._random_element(spinor, rng)
        lhs = spinor_vector_covering(a @ b)
        rhs = spinor_vector_covering(a) @ spinor_vector_covering(b)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_image_preserves_vector_form(self, spinor, rng):
        o = spinor_vector_covering(self._random_element(spinor, rng))
        eta = load_model("SH2_vector").invariant_form
        np.testing.assert_allclose(o @ eta @ o.T, eta, atol=1e-10)

    def test_maps_coset_representatives(self, rng):
        w = rng.normal(size=6) * 0.5
        o = spinor_vector_covering(coset_rep("SH2_spinor", w))
        np.testing.assert_allclose(o, coset_rep("SH2_vector", w), atol=1e-10)

    def test_rejects_non_symplectic(self):
        with pytest.raises(NotSymplectic):
            spinor_vector_covering(linalg.expm(np.diag([0.1, 0.0, 0.0, 0.0])))
