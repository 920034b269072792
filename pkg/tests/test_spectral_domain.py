"""Tests for the Laplacian eigenbasis, transforms and initial data."""

import math

import numpy as np
import pytest

from coupledrd.initial_data import build_initial_state, evaluate_component, evaluate_term
from coupledrd.spectral import (
    FieldState,
    MissingRepresentationError,
    UnsupportedDimError,
    build_basis,
    laplacian_apply,
    transform,
)
from coupledrd.types import ComponentConfig, InitialDataConfig, InitialTerm


def _gram(basis):
    modes = [basis.mode_values(index) for index in np.ndindex(*basis.shape)]
    return np.array([[basis.inner(a, b) for b in modes] for a in modes])


class TestBuildBasis:
    """Test eigenvalues and quadrature of the box bases."""

    def test_dirichlet_1d(self):
        basis = build_basis(1, math.pi, "dirichlet", 3)
        np.testing.assert_allclose(basis.sorted_mu(), [1.0, 4.0, 9.0])

    def test_neumann_1d(self):
        basis = build_basis(1, math.pi, "neumann", 3)
        np.testing.assert_allclose(basis.sorted_mu(), [0.0, 1.0, 4.0])

    def test_dirichlet_2d(self):
        basis = build_basis(2, (math.pi, math.pi), "dirichlet", (2, 2))
        np.testing.assert_allclose(basis.sorted_mu(), [2.0, 5.0, 5.0, 8.0])
        assert basis.mu.shape == (2, 2)

    def test_scaled_interval(self):
        basis = build_basis(1, 2.0, "dirichlet", 2)
        np.testing.assert_allclose(basis.sorted_mu(), [(math.pi / 2) ** 2, math.pi**2])

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedDimError):
            build_basis(3, 1.0, "dirichlet", 4)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            build_basis(1, -1.0, "dirichlet", 4)
        with pytest.raises(ValueError):
            build_basis(1, 1.0, "dirichlet", 0)
        with pytest.raises(ValueError):
            build_basis(1, 1.0, "robin", 4)
        with pytest.raises(ValueError):
            build_basis(2, (1.0,), "dirichlet", (4, 4))

    def test_dirichlet_mu_positive(self):
        basis = build_basis(2, (1.0, 2.0), "dirichlet", (5, 3))
        assert np.all(basis.mu > 0)

    def test_quadrature_sums_to_volume(self):
        for bc in ("dirichlet", "neumann"):
            basis = build_basis(2, (1.5, 2.0), bc, (6, 4))
            volume = basis.quad_weights.sum()
            if bc == "neumann":
                assert volume == pytest.approx(3.0)
            assert basis.volume == pytest.approx(3.0)

    @pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
    def test_orthonormal_1d(self, bc):
        basis = build_basis(1, 2.5, bc, 12)
        np.testing.assert_allclose(_gram(basis), np.eye(12), atol=1e-12)

    @pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
    def test_orthonormal_2d(self, bc):
        basis = build_basis(2, (1.0, 3.0), bc, (4, 5))
        np.testing.assert_allclose(_gram(basis), np.eye(20), atol=1e-12)


class TestTransform:
    """Test forward and inverse transforms."""

    def test_sine_is_single_mode(self):
        basis = build_basis(1, math.pi, "dirichlet", 16)
        (x,) = basis.nodes
        state = transform(FieldState(basis, values=np.sin(x)), "forward")
        modal = state.modal[0]
        assert modal[0] == pytest.approx(math.sqrt(math.pi / 2))
        np.testing.assert_allclose(modal[1:], 0.0, atol=1e-13)

    def test_zero_field(self):
        basis = build_basis(1, 1.0, "neumann", 8)
        state = transform(FieldState(basis, values=np.zeros(8)), "forward")
        np.testing.assert_array_equal(state.modal, 0.0)

    def test_two_mode_ratio(self):
        basis = build_basis(1, math.pi, "dirichlet", 32)
        (x,) = basis.nodes
        values = np.sin(x) + 3.0 * np.sin(2 * x)
        modal = transform(FieldState(basis, values=values), "forward").modal[0]
        assert modal[1] / modal[0] == pytest.approx(3.0)
        direct = [basis.inner(values, basis.mode_values([k])) for k in range(32)]
        np.testing.assert_allclose(modal, direct, atol=1e-12)

    @pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
    def test_round_trip(self, bc):
        rng = np.random.default_rng(1)
        basis = build_basis(2, (1.0, 2.0), bc, (8, 6))
        values = rng.normal(size=(3, 8, 6))
        state = transform(FieldState(basis, values=values), "forward")
        back = transform(FieldState(basis, modal=state.modal), "inverse")
        np.testing.assert_allclose(back.values, values, rtol=1e-10, atol=1e-12)

    def test_missing_source(self):
        basis = build_basis(1, 1.0, "dirichlet", 4)
        with pytest.raises(MissingRepresentationError):
            transform(FieldState(basis, modal=np.ones(4)), "forward")
        with pytest.raises(MissingRepresentationError):
            transform(FieldState(basis, values=np.ones(4)), "inverse")

    def test_empty_state(self):
        basis = build_basis(1, 1.0, "dirichlet", 4)
        with pytest.raises(MissingRepresentationError):
            FieldState(basis)

    def test_shape_mismatch(self):
        basis = build_basis(1, 1.0, "dirichlet", 4)
        with pytest.raises(ValueError):
            FieldState(basis, values=np.ones((2, 5)))

    def test_parseval(self):
        rng = np.random.default_rng(2)
        for bc in ("dirichlet", "neumann"):
            basis = build_basis(2, (2.0, 1.0), bc, (10, 7))
            for _ in range(20):
                values = rng.normal(size=(2, 10, 7))
                modal = basis.forward(values)
                assert basis.norm(values) == pytest.approx(np.linalg.norm(modal), rel=1e-10)

    def test_neumann_mean(self):
        rng = np.random.default_rng(4)
        basis = build_basis(1, 3.0, "neumann", 16)
        values = rng.normal(size=16)
        modal = basis.forward(values)
        mean = float(np.sum(basis.quad_weights * values)) / basis.volume
        assert modal[0] / math.sqrt(basis.volume) == pytest.approx(mean)


class TestLaplacian:
    """Test Δ applied in modal space."""

    def test_sine(self):
        basis = build_basis(1, math.pi, "dirichlet", 16)
        (x,) = basis.nodes
        out = laplacian_apply(transform(FieldState(basis, values=np.sin(x)), "forward"))
        np.testing.assert_allclose(out.values[0], -np.sin(x), atol=1e-12)

    def test_second_mode(self):
        basis = build_basis(1, math.pi, "dirichlet", 16)
        (x,) = basis.nodes
        out = laplacian_apply(transform(FieldState(basis, values=np.sin(2 * x)), "forward"))
        np.testing.assert_allclose(out.values[0], -4.0 * np.sin(2 * x), atol=1e-12)

    def test_constant_neumann(self):
        basis = build_basis(1, 2.0, "neumann", 8)
        out = laplacian_apply(transform(FieldState(basis, values=np.full(8, 3.0)), "forward"))
        np.testing.assert_allclose(out.values, 0.0, atol=1e-12)

    def test_needs_modal(self):
        basis = build_basis(1, 1.0, "dirichlet", 4)
        with pytest.raises(MissingRepresentationError):
            laplacian_apply(FieldState(basis, values=np.ones(4)))

    @pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
    def test_symmetric_negative_semidefinite(self, bc):
        rng = np.random.default_rng(9)
        basis = build_basis(2, (1.0, 1.5), bc, (8, 8))
        for _ in range(20):
            u = transform(FieldState(basis, values=rng.normal(size=(8, 8))), "forward")
            v = transform(FieldState(basis, values=rng.normal(size=(8, 8))), "forward")
            lu = laplacian_apply(u).values
            lv = laplacian_apply(v).values
            scale = np.abs(basis.mu).max() * u.norm() * v.norm()
            assert basis.inner(lu, v.values) == pytest.approx(
                basis.inner(u.values, lv), abs=1e-12 * scale
            )
            assert basis.inner(lu, u.values) <= 1e-12 * scale


class TestInitialData:
    """Test the initial-data catalogue."""

    def test_sine_term(self):
        basis = build_basis(1, math.pi, "dirichlet", 16)
        (x,) = basis.nodes
        values = evaluate_term(basis, InitialTerm(kind="sine", mode=[2], amplitude=0.5))
        np.testing.assert_allclose(values, 0.5 * np.sin(2 * x))

    def test_cosine_term_2d(self):
        basis = build_basis(2, (1.0, 2.0), "neumann", (4, 6))
        x, y = basis.mesh()
        values = evaluate_term(basis, InitialTerm(kind="cosine", mode=[1, 1]))
        np.testing.assert_allclose(values, np.cos(np.pi * x) * np.cos(np.pi * y / 2.0))

    def test_constant_term(self):
        basis = build_basis(1, 1.0, "neumann", 5)
        np.testing.assert_array_equal(
            evaluate_term(basis, InitialTerm(kind="constant", value=2.5)), 2.5
        )

    def test_gaussian_peak(self):
        basis = build_basis(1, 1.0, "neumann", 11)
        term = InitialTerm(kind="gaussian", center=[basis.nodes[0][5]], width=0.1)
        values = evaluate_term(basis, term)
        assert values.argmax() == 5
        assert values.max() == pytest.approx(1.0)

    def test_component_sum(self):
        basis = build_basis(1, math.pi, "dirichlet", 8)
        (x,) = basis.nodes
        component = ComponentConfig(terms=[
            InitialTerm(kind="sine", mode=[1]),
            InitialTerm(kind="sine", mode=[3], amplitude=2.0),
        ])
        np.testing.assert_allclose(
            evaluate_component(basis, component), np.sin(x) + 2.0 * np.sin(3 * x)
        )

    def test_inline_values(self):
        basis = build_basis(2, (1.0, 1.0), "dirichlet", (2, 3))
        component = ComponentConfig(values=[1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        np.testing.assert_array_equal(
            evaluate_component(basis, component), [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]
        )

    def test_initial_state_has_both_representations(self):
        basis = build_basis(1, math.pi, "dirichlet", 8)
        initial = InitialDataConfig(components=[
            ComponentConfig(terms=[InitialTerm(kind="sine", mode=[1])]),
            ComponentConfig(terms=[]),
        ])
        state = build_initial_state(basis, initial)
        assert state.d == 2
        assert state.values.shape == (2, 8)
        np.testing.assert_allclose(basis.inverse(state.modal), state.values, atol=1e-14)
