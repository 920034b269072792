"""Operator-splitting time stepper and the regularized stationary solver.

The evolution u_t = MΔu + F(u) alternates exact modal diffusion with an
implicit reaction substep built on the resolvent of R = −F:

- Lie: diffuse(dt), then implicit Euler w = (I + dt·R)⁻¹ u.
- Strang: diffuse(dt/2), implicit midpoint w = 2·(I + dt/2·R)⁻¹ u − u,
  diffuse(dt/2).

Both reaction substeps are nonexpansive for monotone R.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse.linalg
from numpy.typing import NDArray

from coupledrd.analysis.conditions import check_h0
from coupledrd.initial_data import build_initial_state
from coupledrd.kouachi import balance_integral
from coupledrd.matrix import DiffusionMatrix
from coupledrd.reaction import (
    NewtonDivergenceError,
    NonFiniteValueError,
    ReactionSpec,
    YosidaParams,
    build_reaction,
    resolvent,
    yosida,
    yosida_jacobian,
)
from coupledrd.semigroup import ModalPropagator, require_h0
from coupledrd.spectral import FieldState, SpectralBasis, build_basis
from coupledrd.types import SimulationConfig

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
SchemeOrder = Literal["lie", "strang"]
FrameSink = Callable[["FrameOutput"], None]

# |dt·steps − t_final| allowed before dt is adjusted
FINAL_TIME_TOL = 1e-12
# Default lambdas of the λ → 0 study
DEFAULT_LAMBDAS = (1e-1, 1e-2, 1e-3, 1e-4)


class StationaryPreconditionError(ValueError):
    """Raised when the stationary problem is posed outside its theory."""
    pass


class StationaryDivergenceError(RuntimeError):
    """Raised when the Newton-Krylov iteration fails to converge."""
    pass


class BoundViolatedError(RuntimeError):
    """Raised when ‖u‖ > ‖v‖/ε, which signals a sign or monotonicity error."""
    pass


@dataclass(frozen=True)
class SplitScheme:
    """Splitting order with a fixed step count."""

    order: SchemeOrder
    dt: float
    steps: int
    yosida: YosidaParams

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.order not in ("lie", "strang"):
            raise ValueError(f"Unknown splitting order: {self.order}")

    @property
    def t_final(self) -> float:
        return self.dt * self.steps

    @classmethod
    def for_final_time(
        cls,
        order: SchemeOrder,
        dt: float,
        t_final: float,
        newton_tol: float = 1e-12,
        newton_max_iter: int = 50,
    ) -> "SplitScheme":
        """Scheme reaching t_final exactly, shrinking dt if it does not divide t_final."""
        if not dt > 0 or not t_final > 0:
            raise ValueError(f"dt and t_final must be positive, got dt={dt}, t_final={t_final}")
        steps = max(1, round(t_final / dt))
        if abs(steps * dt - t_final) > FINAL_TIME_TOL:
            steps = math.ceil(t_final / dt - FINAL_TIME_TOL)
            logger.info("dt=%g does not divide t_final=%g; using %d steps", dt, t_final, steps)
        dt = t_final / steps
        return cls(
            order=order,
            dt=dt,
            steps=steps,
            yosida=YosidaParams(lam=dt, newton_tol=newton_tol, newton_max_iter=newton_max_iter),
        )


class Stepper:
    """Repeated splitting steps with precomputed propagators."""

    def __init__(
        self,
        matrix: DiffusionMatrix,
        reaction: ReactionSpec,
        scheme: SplitScheme,
        basis: SpectralBasis,
        *,
        allow_h0_violation: bool = False,
        tol_eig: float | None = None,
    ) -> None:
        if reaction.d != matrix.d:
            raise ValueError(f"Reaction has d={reaction.d}, matrix has d={matrix.d}")
        if allow_h0_violation:
            logger.warning("Stepping with H0 check overridden")
        else:
            require_h0(matrix, tol_eig)

        self.matrix = matrix
        self.scheme = scheme
        self.basis = basis
        # evolution always integrates u_t = F(u), so the resolvent is that of −F
        self._reaction = reaction.with_orientation("accretive")
        t_diffuse = scheme.dt if scheme.order == "lie" else 0.5 * scheme.dt
        self._propagator = ModalPropagator.build(matrix, basis, t_diffuse)
        self._lam = scheme.dt if scheme.order == "lie" else 0.5 * scheme.dt
        self._params = YosidaParams(
            lam=self._lam,
            newton_tol=scheme.yosida.newton_tol,
            newton_max_iter=scheme.yosida.newton_max_iter,
        )

    def _diffuse(self, state: FieldState) -> FieldState:
        modal = self._propagator.apply(state.coefficients())
        return FieldState(self.basis, values=self.basis.inverse(modal), modal=modal)

    def _react(self, state: FieldState, step_index: int | None) -> FieldState:
        if self._reaction.is_zero:
            return state
        values = state.grid()
        if not np.all(np.isfinite(self._reaction.F(values))):
            raise NonFiniteValueError(
                f"Reaction '{self._reaction.name}' overflowed at step {step_index}", step_index
            )
        try:
            w = resolvent(self._reaction, self._params, values)
        except NewtonDivergenceError as e:
            raise NewtonDivergenceError(f"step {step_index}: {e}", step_index) from e
        if self.scheme.order == "strang":
            w = 2.0 * w - values
        if not np.all(np.isfinite(w)):
            raise NonFiniteValueError(f"Non-finite state at step {step_index}", step_index)
        return FieldState(self.basis, values=w)

    def step(self, state: FieldState, step_index: int | None = None) -> FieldState:
        """Advance one step of length dt."""
        if state.d != self.matrix.d:
            raise ValueError(f"Field has {state.d} components, matrix has d={self.matrix.d}")
        if self.scheme.order == "lie":
            return self._react(self._diffuse(state), step_index)
        half = self._diffuse(state)
        return self._diffuse(self._react(half, step_index))


def step(
    state: FieldState,
    matrix: DiffusionMatrix,
    spec: ReactionSpec,
    scheme: SplitScheme,
    *,
    allow_h0_violation: bool = False,
    tol_eig: float | None = None,
) -> FieldState:
    """One splitting step; see Stepper for repeated stepping.

    Raises:
        H0ViolationError: If M fails H0 and no override is given.
        NewtonDivergenceError: If the reaction substep does not converge.
        NonFiniteValueError: If F overflows.
    """
    stepper = Stepper(matrix, spec, scheme, state.basis,
                      allow_h0_violation=allow_h0_violation, tol_eig=tol_eig)
    return stepper.step(state)


@dataclass(frozen=True)
class FrameDiagnostics:
    l2_norms: tuple[float, ...]
    minima: tuple[float, ...]
    maxima: tuple[float, ...]
    balance: float | None = None


@dataclass(frozen=True, eq=False)
class FrameOutput:
    """Snapshot of a run at one output time."""

    index: int
    step: int
    time: float
    values: Array
    basis: SpectralBasis
    diagnostics: FrameDiagnostics = field(repr=False)


def frame_diagnostics(
    basis: SpectralBasis,
    values: Array,
    balance_weights: tuple[float, float] | None = None,
) -> FrameDiagnostics:
    """Per-component L² norms and extrema, plus Q when weights (ρ, σ) are given."""
    balance = None
    if balance_weights is not None:
        balance = balance_integral(basis, values, *balance_weights)
    return FrameDiagnostics(
        l2_norms=tuple(basis.norm(component) for component in values),
        minima=tuple(float(component.min()) for component in values),
        maxima=tuple(float(component.max()) for component in values),
        balance=balance,
    )


def basis_from_config(config: SimulationConfig) -> SpectralBasis:
    domain = config.domain
    return build_basis(domain.space_dim, domain.lengths, domain.bc, config.grid.modes_per_axis)


def matrix_from_config(config: SimulationConfig) -> DiffusionMatrix:
    return DiffusionMatrix.from_row_major(config.matrix.d, config.matrix.entries)


def reaction_from_config(config: SimulationConfig) -> ReactionSpec:
    reaction = config.reaction
    return build_reaction(reaction.name, reaction.params, d=config.matrix.d,
                          orientation=reaction.orientation)


def solve_evolution(
    config: SimulationConfig,
    sink: FrameSink | None = None,
    *,
    allow_h0_violation: bool = False,
) -> list[FrameOutput]:
    """Run the time stepper and collect frames every `frame_stride` steps.

    The initial state is frame 0 and the final step is always emitted.

    Args:
        config: Validated configuration with a time section.
        sink: Called with each frame in order as soon as it is produced.
        allow_h0_violation: Skip the H0 refusal.

    Returns:
        List of FrameOutput in increasing time.

    Raises:
        H0ViolationError, NewtonDivergenceError, NonFiniteValueError: From stepping.
    """
    if config.time is None:
        raise ValueError("Evolution needs a 'time' section")
    time = config.time
    basis = basis_from_config(config)
    matrix = matrix_from_config(config)
    reaction = reaction_from_config(config)
    scheme = SplitScheme.for_final_time(
        time.scheme, time.dt, time.t_final,
        newton_tol=config.yosida.newton_tol, newton_max_iter=config.yosida.newton_max_iter,
    )
    stepper = Stepper(matrix, reaction, scheme, basis, allow_h0_violation=allow_h0_violation,
                      tol_eig=config.analysis.tol_eig)
    weights = None
    if config.kouachi is not None:
        weights = (config.kouachi.rho, config.kouachi.sigma)

    frames: list[FrameOutput] = []

    def emit(step_index: int, state: FieldState) -> None:
        values = state.grid()
        frame = FrameOutput(
            index=len(frames),
            step=step_index,
            time=step_index * scheme.dt,
            values=values,
            basis=basis,
            diagnostics=frame_diagnostics(basis, values, weights),
        )
        logger.debug("Frame %d at t=%.6g: %s", frame.index, frame.time, frame.diagnostics)
        frames.append(frame)
        if sink is not None:
            sink(frame)

    logger.info("Evolution: %s scheme, %d steps of dt=%g", scheme.order, scheme.steps, scheme.dt)
    state = build_initial_state(basis, config.initial_data)
    emit(0, state)
    for n in range(1, scheme.steps + 1):
        state = stepper.step(state, n)
        if n % time.frame_stride == 0 or n == scheme.steps:
            emit(n, state)
    return frames


@dataclass(frozen=True, eq=False)
class StationaryProblem:
    """εu − MΔu + R_λ(u) = v with homogeneous Dirichlet data."""

    epsilon: float
    v: FieldState
    lam: float
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    tol_eig: float | None = None

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @property
    def yosida(self) -> YosidaParams:
        # residual of R_λ scales like newton_tol/λ, so the inner solve runs tighter
        return YosidaParams(lam=self.lam, newton_tol=min(self.newton_tol, 1e-14),
                            newton_max_iter=self.newton_max_iter)


@dataclass(frozen=True, eq=False)
class StationaryResult:
    u: FieldState
    residual: float
    iterations: int
    norm_u: float
    bound: float

    @property
    def bound_ok(self) -> bool:
        return self.norm_u <= self.bound + 1e-8


def _blockwise(stack: Array, c: Array) -> Array:
    """Apply a (..., d, d) matrix stack to fields of shape (d, ...)."""
    out = np.einsum("...ij,...j->...i", stack, np.moveaxis(c, 0, -1))
    return np.moveaxis(out, -1, 0)


def _check_stationary(
    problem: StationaryProblem, matrix: DiffusionMatrix, spec: ReactionSpec
) -> None:
    basis = problem.v.basis
    if basis.bc != "dirichlet":
        raise StationaryPreconditionError(
            f"Stationary problem needs a Dirichlet basis, got {basis.bc}"
        )
    if matrix.d != problem.v.d or spec.d != matrix.d:
        raise ValueError(
            f"Dimension mismatch: M has d={matrix.d}, v has {problem.v.d}, reaction d={spec.d}"
        )
    report = check_h0(matrix, problem.tol_eig, allow_zero=True)
    if not (report.h0_pass and report.symbol_accretive):
        raise StationaryPreconditionError(
            "Stationary problem needs H0 with a positive semidefinite (M+Mᵀ)/2"
        )


def solve_stationary_report(
    problem: StationaryProblem,
    matrix: DiffusionMatrix,
    spec: ReactionSpec,
    *,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> StationaryResult:
    """Newton-Krylov solve in modal space, preconditioned by (εI + μₖM)⁻¹.

    Args:
        problem: ε, λ and the right-hand side v.
        matrix: Diffusion matrix (H0 with accretive symbol).
        spec: Reaction; R_λ follows its orientation.
        tol: Residual target relative to ‖v‖.
        max_iter: Newton iteration limit.

    Returns:
        StationaryResult with the solution, final residual and bound check.

    Raises:
        StationaryPreconditionError: If the basis is not Dirichlet or M is not accretive.
        StationaryDivergenceError: If Newton or GMRES fails.
        BoundViolatedError: If ‖u‖ > ‖v‖/ε + 1e-8.
    """
    _check_stationary(problem, matrix, spec)
    basis = problem.v.basis
    params = problem.yosida
    d = matrix.d
    eps = problem.epsilon

    rhs = problem.v.coefficients()
    v_norm = float(np.linalg.norm(rhs))
    bound = v_norm / eps

    linear = eps * np.eye(d) + basis.mu[..., None, None] * matrix.entries
    linear_inv = np.linalg.inv(linear)

    def residual(c: Array) -> Array:
        reaction = basis.forward(yosida(spec, params, basis.inverse(c)))
        return _blockwise(linear, c) + reaction - rhs

    origin_value = float(np.linalg.norm(spec.operator(np.zeros((d, 1)))))
    if spec.is_zero or (v_norm == 0.0 and origin_value == 0.0):
        c = _blockwise(linear_inv, rhs)
        g = _blockwise(linear, c) - rhs
        return _finish(basis, c, float(np.linalg.norm(g)), 0, bound)

    target = tol * v_norm if v_norm > 0 else tol
    shape = rhs.shape
    size = rhs.size
    precondition = scipy.sparse.linalg.LinearOperator(
        (size, size),
        matvec=lambda x: _blockwise(linear_inv, x.reshape(shape)).ravel(),
        dtype=float,
    )

    c = _blockwise(linear_inv, rhs)
    g = residual(c)
    res = float(np.linalg.norm(g))
    iterations = 0
    while res > target:
        if iterations >= max_iter:
            raise StationaryDivergenceError(
                f"Newton-Krylov did not converge in {max_iter} iterations (residual {res:.3e})"
            )
        iterations += 1
        try:
            jac_field = yosida_jacobian(spec, params, basis.inverse(c))
        except NewtonDivergenceError as e:
            raise StationaryDivergenceError(f"Resolvent failed inside Newton-Krylov: {e}") from e

        def apply_jacobian(x: Array, jac_field: Array = jac_field) -> Array:
            delta = x.reshape(shape)
            nonlinear = basis.forward(_blockwise(jac_field, basis.inverse(delta)))
            return (_blockwise(linear, delta) + nonlinear).ravel()

        operator = scipy.sparse.linalg.LinearOperator((size, size), matvec=apply_jacobian,
                                                      dtype=float)
        delta, info = scipy.sparse.linalg.gmres(
            operator, -g.ravel(), rtol=1e-10, atol=0.1 * target, M=precondition,
            restart=min(size, 100), maxiter=50,
        )
        if info < 0:
            raise StationaryDivergenceError(f"GMRES breakdown (info={info})")
        delta = delta.reshape(shape)

        scale = 1.0
        for _ in range(20):
            trial = c + scale * delta
            try:
                trial_g = residual(trial)
            except NewtonDivergenceError:
                trial_g = np.full_like(g, np.inf)
            trial_res = float(np.linalg.norm(trial_g))
            if trial_res < res or trial_res <= target:
                break
            scale *= 0.5
        else:
            raise StationaryDivergenceError(f"Line search stalled at residual {res:.3e}")
        c, g, res = trial, trial_g, trial_res
        logger.debug("Newton-Krylov iteration %d: residual %.3e", iterations, res)

    return _finish(basis, c, res, iterations, bound)


def _finish(basis: SpectralBasis, c: Array, residual: float, iterations: int,
            bound: float) -> StationaryResult:
    u = FieldState(basis, values=basis.inverse(c), modal=c)
    result = StationaryResult(u=u, residual=residual, iterations=iterations,
                              norm_u=u.norm(), bound=bound)
    if not result.bound_ok:
        raise BoundViolatedError(
            f"‖u‖ = {result.norm_u:.6g} exceeds ‖v‖/ε = {bound:.6g}; "
            "check the reaction orientation and monotonicity"
        )
    return result


def solve_stationary(
    problem: StationaryProblem,
    matrix: DiffusionMatrix,
    spec: ReactionSpec,
) -> FieldState:
    """Solve εu − MΔu + R_λ(u) = v; see solve_stationary_report."""
    return solve_stationary_report(problem, matrix, spec).u


def coupling_integral(
    u: FieldState,
    matrix: DiffusionMatrix,
    spec: ReactionSpec,
    params: YosidaParams,
) -> float:
    """Discrete ⟨−MΔu, R_λ(u)⟩ with the grid quadrature."""
    basis = u.basis
    modal = u.coefficients()
    tu = basis.mu * np.einsum("ij,j...->i...", matrix.entries, modal)
    reaction = yosida(spec, params, u.grid())
    return basis.inner(basis.inverse(tu), reaction)


@dataclass(frozen=True, eq=False)
class LambdaStudy:
    lambdas: tuple[float, ...]
    solutions: tuple[FieldState, ...]
    distances: tuple[float, ...]

    @property
    def decreasing(self) -> bool:
        """Whether consecutive distances strictly decrease."""
        return all(b < a for a, b in zip(self.distances, self.distances[1:]))


def lambda_sequence(
    problem: StationaryProblem,
    matrix: DiffusionMatrix,
    spec: ReactionSpec,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
) -> LambdaStudy:
    """Solve over decreasing λ and record consecutive solution distances."""
    if any(b >= a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError(f"lambdas must be strictly decreasing, got {list(lambdas)}")
    solutions = []
    for lam in lambdas:
        current = StationaryProblem(
            epsilon=problem.epsilon, v=problem.v, lam=lam,
            newton_tol=problem.newton_tol, newton_max_iter=problem.newton_max_iter,
        )
        solutions.append(solve_stationary(current, matrix, spec))
    distances = tuple(
        float(np.linalg.norm(b.coefficients() - a.coefficients()))
        for a, b in zip(solutions, solutions[1:])
    )
    return LambdaStudy(lambdas=tuple(lambdas), solutions=tuple(solutions), distances=distances)
