from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geotherm.errors import DomainError, NotKahler
from geotherm.isometry_engine import act, adjoint_matrix, group_exp, killing_field_closed
from geotherm.model_catalog import load_model
from geotherm.moment_maps import (
    MOMENT_SCALE,
    hamiltonian_residual,
    kahler_poisson_bracket,
    moment_batch,
    moment_map,
    moment_poisson_residual,
    moment_vector,
    moment_vector_closed,
)

KAHLER = ["H2", "SH2_vector", "SH2_spinor", "M22"]


def test_h2_values_at_origin():
    np.testing.assert_allclose(moment_vector("H2", [0.0, 0.0]), [-1.0, 0.0, -0.5], atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-4, max_value=4), st.floats(min_value=-4, max_value=4))
def test_h2_translation_moment_is_minus_second_coordinate(u1, u2):
    assert moment_map("H2", 1, [u1, u2]) == pytest.approx(-u2, abs=1e-12)


def test_sh2_values_at_origin():
    p = moment_vector("SH2_vector", np.zeros(6))
    assert p[9] == pytest.approx(-1.0)
    assert p[8] == pytest.approx(0.0)


class TestClosedForms:
    @pytest.mark.parametrize("name", ["H2", "SH2_vector"])
    def test_closed_matches_generic(self, name, rng):
        for _ in range(5):
            y = rng.normal(size=load_model(name).dim)
            np.testing.assert_allclose(moment_vector_closed(name, y), moment_vector(name, y), atol=1e-11)

    def test_spinor_and_vector_agree(self, rng):
        y = rng.normal(size=6)
        np.testing.assert_allclose(moment_vector("SH2_spinor", y), moment_vector("SH2_vector", y), atol=1e-11)

    def test_no_tabulated_maps_for_m22(self):
        with pytest.raises(DomainError):
            moment_vector_closed("M22", np.zeros(8))

    @pytest.mark.parametrize("name", ["H2", "M22"])
    def test_batch_matches_pointwise(self, name, rng):
        pts = rng.normal(size=(7, load_model(name).dim))
        batch = moment_batch(name, pts)
        for j in range(7):
            np.testing.assert_allclose(batch[j], moment_vector(name, pts[j]), atol=1e-12)

    def test_sl3_is_rejected(self):
        with pytest.raises(NotKahler):
            moment_vector("SL3", np.zeros(5))


class TestIdentities:
    @pytest.mark.parametrize("name", KAHLER)
    def test_hamiltonian_for_every_generator(self, name, rng):
        spec = load_model(name)
        y = rng.normal(size=spec.dim) * 0.6
        for index in range(len(spec.algebra)):
            assert hamiltonian_residual(spec, index, y) < 1e-5

    @pytest.mark.parametrize("name", ["H2", "SH2_vector"])
    def test_hamiltonian_with_tabulated_fields(self, name, rng):
        spec = load_model(name)
        y = rng.normal(size=spec.dim) * 0.6
        fields = killing_field_closed(spec, y)
        for index in range(len(spec.algebra)):
            assert hamiltonian_residual(spec, index, y, field=fields[index]) < 1e-5

    @pytest.mark.parametrize("name", KAHLER)
    def test_flipped_center_generator_breaks_identity(self, name, rng):
        spec = load_model(name)
        y = rng.normal(size=spec.dim) * 0.6
        worst = max(hamiltonian_residual(spec, i, y, xc=-spec.xc) for i in range(len(spec.algebra)))
        assert worst > 1e-2

    def test_wrong_scale_breaks_identity(self, rng):
        y = rng.normal(size=2)
        assert hamiltonian_residual("H2", 0, y, scale=MOMENT_SCALE / 2) > 1e-2

    @pytest.mark.parametrize("name", KAHLER)
    def test_poisson_algebra(self, name, rng):
        y = rng.normal(size=load_model(name).dim) * 0.6
        assert moment_poisson_residual(name, y) < 1e-5

    def test_bracket_is_antisymmetric(self, rng):
        y = rng.normal(size=2)
        f = lambda z: z[0] ** 2 + np.sin(z[1])
        g = lambda z: z[0] * z[1]
        assert kahler_poisson_bracket("H2", f, g, y) == pytest.approx(-kahler_poisson_bracket("H2", g, f, y), abs=1e-9)

    @pytest.mark.parametrize("name", KAHLER)
    def test_equivariance(self, name, rng):
        spec = load_model(name)
        g = group_exp(np.einsum("a,aij->ij", rng.normal(size=len(spec.algebra)) * 0.4, spec.algebra))
        y = rng.normal(size=spec.dim) * 0.5
        lhs = moment_vector(spec, act(spec, g, y))
        np.testing.assert_allclose(lhs, adjoint_matrix(spec, g) @ moment_vector(spec, y), atol=1e-9)
