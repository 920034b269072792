"""Tests for the balance-law preset."""

import math

import numpy as np
import pytest

from coupledrd.kouachi import (
    ConditionFailedError,
    balance_functional,
    balance_integral,
    build_kouachi,
    kouachi_eigenvalues,
    kouachi_matrix,
    kouachi_reaction_params,
    verdicts_to_dict,
)
from coupledrd.reaction import kouachi_reaction
from coupledrd.solver import FrameOutput, SplitScheme, Stepper, frame_diagnostics
from coupledrd.spectral import FieldState, build_basis
from coupledrd.types import DomainConfig, GridConfig, KouachiParams


DOMAIN = DomainConfig(space_dim=1, lengths=[math.pi])
GRID = GridConfig(modes_per_axis=[32])


def _params(alpha=2.0, beta=1.0, gamma=1.0, sigma=1.0, rho=2.0, **extra):
    return KouachiParams(alpha=alpha, beta=beta, gamma=gamma, sigma=sigma, rho=rho, **extra)


class TestBuildKouachi:
    """Test preset assembly and verdicts."""

    def test_standard_constants(self):
        setup = build_kouachi(_params(), DOMAIN, GRID)
        verdicts = setup.verdicts
        assert verdicts.eigenvalues_closed_form == (3.0, 1.0)
        assert verdicts.eigenvalue_error <= 1e-10
        assert verdicts.conditions.eq6
        assert verdicts.conditions.eq7
        assert verdicts.eq8
        assert verdicts.f_origin == 0.0
        assert verdicts.h0_pass
        assert verdicts.strict
        np.testing.assert_array_equal(setup.matrix.entries, [[2.0, 1.0], [1.0, 2.0]])
        assert setup.basis.bc == "neumann"
        assert setup.reaction.kind == "kouachi"

    def test_strict_failure(self):
        with pytest.raises(ConditionFailedError):
            build_kouachi(_params(alpha=1.0, beta=2.0, gamma=2.0), DOMAIN, GRID)

    def test_lenient_failure_is_noted(self):
        setup = build_kouachi(_params(alpha=1.0, beta=2.0, gamma=2.0), DOMAIN, GRID, strict=False)
        verdicts = setup.verdicts
        assert not verdicts.conditions.eq6
        assert not verdicts.conditions.eq7
        assert not verdicts.h0_pass
        assert not verdicts.proposition41
        assert not verdicts.strict
        assert any("lenient" in note for note in verdicts.notes)
        assert any("H0 fails" in note for note in verdicts.notes)

    def test_configured_tolerance(self):
        params = _params(alpha=1.0, beta=1.000002, gamma=1.000002)
        assert not build_kouachi(params, DOMAIN, GRID, strict=False).verdicts.h0_pass
        setup = build_kouachi(params, DOMAIN, GRID, strict=False, tol_eig=1e-3)
        assert setup.verdicts.h0_pass

    def test_strict_flag_from_params(self):
        setup = build_kouachi(_params(alpha=1.0, beta=2.0, gamma=2.0, strict=False), DOMAIN, GRID)
        assert not setup.verdicts.strict

    def test_origin_condition(self):
        custom = kouachi_reaction(1.0, 2.0, lambda u, v: u * v + 1.0, lambda u, v: (v, u))
        with pytest.raises(ConditionFailedError):
            build_kouachi(_params(), DOMAIN, GRID, reaction=custom)
        setup = build_kouachi(_params(), DOMAIN, GRID, reaction=custom, strict=False)
        assert not setup.verdicts.eq8
        assert setup.verdicts.f_origin == 1.0
        assert setup.verdicts.conditions.eq6
        assert not setup.verdicts.proposition41

    def test_sign_check_on_sample_box(self):
        mixed = build_kouachi(_params(probe_box=[-1.0, 1.0]), DOMAIN, GRID)
        assert mixed.verdicts.eq9_min < 0.0
        assert any("negative" in note for note in mixed.verdicts.notes)

    def test_uv_power_rate(self):
        setup = build_kouachi(_params(f_name="uv_power", f_params={"m": 2}), DOMAIN, GRID)
        assert setup.reaction.rate(np.array([[2.0], [3.0]]))[0] == pytest.approx(18.0)
        assert setup.verdicts.eq8

    def test_reaction_params(self):
        params = kouachi_reaction_params(_params(f_name="uv_power", f_params={"m": 3}))
        assert params == {"sigma": 1.0, "rho": 2.0, "f": "uv_power", "m": 3}

    def test_random_triples(self):
        rng = np.random.default_rng(0)
        for alpha, beta, gamma in rng.uniform(0.1, 10.0, size=(100, 3)):
            params = _params(alpha=alpha, beta=beta, gamma=gamma, probe_samples=10)
            verdicts = build_kouachi(params, DOMAIN, GRID, strict=False).verdicts
            assert verdicts.eigenvalue_error <= 1e-10
            assert not verdicts.conditions.eq6 or verdicts.conditions.eq7

    def test_verdicts_dict(self):
        data = verdicts_to_dict(build_kouachi(_params(), DOMAIN, GRID).verdicts)
        assert data["eigenvalues"] == [3.0, 1.0]
        assert data["eq6"] is True
        assert data["eq7"] is True
        assert data["eq8"] is True
        assert data["proposition41"] is True
        assert isinstance(data["notes"], list)


class TestEigenvalues:
    """Test the closed form α ± √(βγ)."""

    def test_closed_form(self):
        assert kouachi_eigenvalues(5.0, 1.0, 4.0) == (7.0, 3.0)

    def test_extreme_magnitudes(self):
        large = kouachi_eigenvalues(1.5e200, 1e199, 1e201)
        assert large == pytest.approx((2.5e200, 0.5e200), rel=1e-12)
        tiny = kouachi_eigenvalues(1e-201, 1e-200, 1e-200)
        assert tiny == pytest.approx((1.1e-200, -9e-201), rel=1e-12, abs=0.0)

    def test_matrix_shape(self):
        np.testing.assert_array_equal(kouachi_matrix(2.0, 3.0, 4.0).entries, [[2, 3], [4, 2]])


class TestBalanceFunctional:
    """Test Q = ∫(ρu + σv)."""

    def test_zero(self):
        basis = build_basis(1, math.pi, "neumann", 16)
        assert balance_integral(basis, np.zeros((2, 16)), 1.0, 1.0) == 0.0

    def test_constants(self):
        basis = build_basis(1, math.pi, "neumann", 16)
        values = np.stack([np.ones(16), 2.0 * np.ones(16)])
        assert balance_integral(basis, values, 1.0, 1.0) == pytest.approx(3.0 * math.pi)

    def test_frame(self):
        basis = build_basis(1, math.pi, "neumann", 16)
        values = np.stack([np.ones(16), 2.0 * np.ones(16)])
        frame = FrameOutput(index=0, step=0, time=0.0, values=values, basis=basis,
                            diagnostics=frame_diagnostics(basis, values))
        params = _params(sigma=1.0, rho=1.0)
        assert balance_functional(frame, params) == pytest.approx(3.0 * math.pi)

    def test_frame_needs_two_components(self):
        basis = build_basis(1, math.pi, "neumann", 16)
        values = np.ones((1, 16))
        frame = FrameOutput(index=0, step=0, time=0.0, values=values, basis=basis,
                            diagnostics=frame_diagnostics(basis, values))
        with pytest.raises(ValueError):
            balance_functional(frame, _params())

    def test_conserved_along_trajectory(self):
        params = _params()
        setup = build_kouachi(params, DOMAIN, GRID)
        basis = setup.basis
        (x,) = basis.nodes
        values = np.stack([1.0 + 0.5 * np.cos(x), 0.5 + 0.25 * np.cos(2 * x)])
        state = FieldState(basis, values=values)
        scheme = SplitScheme.for_final_time("strang", 0.01, 5.0)
        assert scheme.steps == 500
        stepper = Stepper(setup.matrix, setup.reaction, scheme, basis)

        q0 = balance_integral(basis, state.grid(), params.rho, params.sigma)
        tolerance = 1e-10 * (1.0 + abs(q0))
        previous = q0
        for n in range(1, scheme.steps + 1):
            state = stepper.step(state, n)
            current = balance_integral(basis, state.grid(), params.rho, params.sigma)
            assert abs(current - previous) <= tolerance
            previous = current
        assert abs(previous - q0) <= 1e-9 * (1.0 + abs(q0))

    def test_lie_conserves_too(self):
        params = _params()
        setup = build_kouachi(params, DOMAIN, GRID)
        basis = setup.basis
        (x,) = basis.nodes
        state = FieldState(basis, values=np.stack([1.0 + np.cos(x), np.ones_like(x)]))
        scheme = SplitScheme.for_final_time("lie", 0.02, 1.0)
        stepper = Stepper(setup.matrix, setup.reaction, scheme, basis)
        q0 = balance_integral(basis, state.grid(), params.rho, params.sigma)
        for n in range(50):
            state = stepper.step(state, n)
        q1 = balance_integral(basis, state.grid(), params.rho, params.sigma)
        assert abs(q1 - q0) <= 1e-10 * (1.0 + abs(q0))
