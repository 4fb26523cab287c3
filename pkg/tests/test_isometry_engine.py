from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geotherm.coset_geometry import coset_rep
from geotherm.errors import DomainError, OutsideCone
from geotherm.isometry_engine import (
    act,
    adjoint_matrix,
    check_group_element,
    group_exp,
    h2_temperature_coefficients,
    h2_temperature_element,
    h2_temperature_triple,
    kahler_lie_derivative_residual,
    killing_algebra_residual,
    killing_field,
    killing_field_closed,
    killing_fields,
    reduce_temperature_h2,
)
from geotherm.model_catalog import MODEL_NAMES, load_model


def random_element(name, rng, scale=0.5):
    spec = load_model(name)
    coeffs = rng.normal(size=len(spec.algebra)) * scale
    return group_exp(np.einsum("a,aij->ij", coeffs, spec.algebra))


def cone_form(triple):
    d, b, z = triple
    return d * d - b * b - z * z


class TestAction:
    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_identity_acts_trivially(self, name, rng):
        y = rng.normal(size=load_model(name).dim)
        np.testing.assert_allclose(act(name, np.eye(load_model(name).size), y), y, atol=1e-12)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_compact_subgroup_fixes_origin(self, name, rng):
        spec = load_model(name)
        coeffs = rng.normal(size=len(spec.compact))
        h = group_exp(np.einsum("a,aij->ij", coeffs, spec.compact))
        np.testing.assert_allclose(act(name, h, np.zeros(spec.dim)), 0.0, atol=1e-11)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_group_law(self, name, rng):
        a, b = random_element(name, rng), random_element(name, rng)
        y = rng.normal(size=load_model(name).dim) * 0.6
        np.testing.assert_allclose(act(name, a @ b, y), act(name, a, act(name, b, y)), atol=1e-9)

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_solvable_representative_moves_origin(self, name, rng):
        y = rng.normal(size=load_model(name).dim) * 0.6
        np.testing.assert_allclose(act(name, coset_rep(name, y), np.zeros_like(y)), y, atol=1e-10)

    def test_rejects_non_group_element(self):
        with pytest.raises(DomainError):
            check_group_element("H2", np.diag([2.0, 1.0]))
        with pytest.raises(DomainError):
            act("SH2_vector", np.eye(5) * 1.1, np.zeros(6))


class TestKillingVectors:
    def test_h2_first_solvable_generator_is_translation(self, rng):
        spec = load_model("H2")
        y = rng.normal(size=2)
        k = killing_field(spec, spec.algebra[1], y)
        np.testing.assert_allclose(k, [1.0, 0.0], atol=1e-8)

    @pytest.mark.parametrize("name", [n for n in MODEL_NAMES if load_model(n).is_kahler])
    def test_center_generator_vanishes_at_origin(self, name):
        spec = load_model(name)
        np.testing.assert_allclose(killing_field(spec, spec.xc, np.zeros(spec.dim)), 0.0, atol=1e-9)

    @pytest.mark.parametrize("name", ["H2", "SH2_vector", "SH2_spinor"])
    def test_closed_form_matches_generic(self, name, rng):
        for _ in range(4):
            y = rng.normal(size=load_model(name).dim) * 0.7
            np.testing.assert_allclose(killing_field_closed(name, y), killing_fields(name, y), atol=1e-6)

    def test_no_tabulated_fields_for_sl3(self):
        with pytest.raises(DomainError):
            killing_field_closed("SL3", np.zeros(5))

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_algebra_closes(self, name, rng):
        y = rng.normal(size=load_model(name).dim) * 0.5
        assert killing_algebra_residual(name, [y]) < 1e-5

    def test_wrong_bracket_sign_is_detected(self, rng):
        y = rng.normal(size=2) * 0.5
        assert killing_algebra_residual("H2", [y], sign=1.0) > 0.1

    @pytest.mark.parametrize("name", ["H2", "SH2_vector"])
    def test_kahler_form_is_invariant(self, name, rng):
        spec = load_model(name)
        y = rng.normal(size=spec.dim) * 0.5
        for gen in spec.algebra:
            assert kahler_lie_derivative_residual(spec, gen, y) < 1e-5


class TestAdjoint:
    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_identity(self, name):
        spec = load_model(name)
        np.testing.assert_allclose(adjoint_matrix(name, np.eye(spec.size)), np.eye(len(spec.algebra)), atol=1e-12)

    @pytest.mark.parametrize("name", ["H2", "SL3", "SH2_spinor"])
    def test_composition_order(self, name, rng):
        a, b = random_element(name, rng), random_element(name, rng)
        np.testing.assert_allclose(
            adjoint_matrix(name, a @ b), adjoint_matrix(name, a) @ adjoint_matrix(name, b), atol=1e-9
        )

    def test_preserves_cone_form(self, rng):
        triple = (2.0, 0.6, -0.9)
        coeffs = h2_temperature_coefficients(*triple)
        for _ in range(10):
            moved = adjoint_matrix("H2", random_element("H2", rng)).T @ coeffs
            assert cone_form(h2_temperature_triple(moved)) == pytest.approx(cone_form(triple), rel=1e-11)


class TestH2Temperatures:
    def test_coefficients_round_trip(self):
        t = (1.3, -0.2, 0.4)
        np.testing.assert_allclose(h2_temperature_triple(h2_temperature_coefficients(*t)), t, atol=1e-15)

    def test_element_matches_coefficients(self):
        spec = load_model("H2")
        t = (1.3, -0.2, 0.4)
        np.testing.assert_allclose(
            np.einsum("a,aij->ij", h2_temperature_coefficients(*t), spec.algebra), h2_temperature_element(*t), atol=1e-14
        )

    @pytest.mark.parametrize("triple, n", [((1.0, 0.0, 0.0), 1.0), ((2.0, 0.0, 1.0), math.sqrt(3.0))])
    def test_reduction_values(self, triple, n):
        got, g = reduce_temperature_h2(*triple)
        assert got == pytest.approx(n, rel=1e-14)
        assert np.linalg.det(g) == pytest.approx(1.0, rel=1e-14)

    def test_reduction_rejects_outside_cone(self):
        with pytest.raises(OutsideCone):
            reduce_temperature_h2(1.0, 2.0, 0.0)
        with pytest.raises(OutsideCone):
            reduce_temperature_h2(-2.0, 0.0, 0.0)

    @settings(max_examples=50, deadline=None)
    @given(
        st.floats(min_value=-3, max_value=3),
        st.floats(min_value=-3, max_value=3),
        st.floats(min_value=0.1, max_value=4),
    )
    def test_reduction_reaches_rest_frame(self, beta, zeta, n):
        delta = math.sqrt(n * n + beta * beta + zeta * zeta)
        got, g = reduce_temperature_h2(delta, beta, zeta)
        moved = adjoint_matrix("H2", g).T @ h2_temperature_coefficients(delta, beta, zeta)
        np.testing.assert_allclose(h2_temperature_triple(moved), [got, 0.0, 0.0], atol=1e-9 * delta)
        assert got == pytest.approx(n, rel=1e-9)
