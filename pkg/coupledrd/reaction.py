"""Reaction terms, their resolvents and Yosida approximations.

A reaction F: ℝᵈ → ℝᵈ acts pointwise on grid values of shape (d, ...).
The operator probed for accretivity is R = −F in the default "accretive"
orientation, so that dissipative reactions such as F(u) = −u³ give a
monotone R. The "literal" orientation uses R = F.
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from coupledrd.spectral import FieldState

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
PointMap = Callable[[Array], Array]
ScalarField = Callable[[Array, Array], Array]
ScalarGradient = Callable[[Array, Array], tuple[Array, Array]]
ReactionKind = Literal["general", "kouachi"]
Orientation = Literal["accretive", "literal"]

# Pairs with ⟨R(x)−R(y), x−y⟩ above this count as monotone
MONOTONE_SLACK = -1e-12


class UnknownReactionError(ValueError):
    """Raised for reaction names outside the catalogue."""
    pass


class JacobianMismatchError(ValueError):
    """Raised when a Jacobian disagrees with finite differences of F."""
    pass


class NonFiniteValueError(RuntimeError):
    """Raised when F overflows, which signals blow-up."""

    def __init__(self, message: str, step_index: int | None = None) -> None:
        self.step_index = step_index
        super().__init__(message)


class NewtonDivergenceError(RuntimeError):
    """Raised when the resolvent Newton iteration fails to converge."""

    def __init__(self, message: str, step_index: int | None = None) -> None:
        self.step_index = step_index
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class ReactionSpec:
    """Pointwise nonlinearity F with its Jacobian.

    `jacobian` returns an array of shape (d, d, ...) with entry [i, j] equal
    to ∂Fᵢ/∂uⱼ. For the Kouachi kind F(u, v) = (−σf(u,v), ρf(u,v)).
    """

    name: str
    d: int
    F: PointMap
    jacobian: PointMap
    kind: ReactionKind = "general"
    sigma: float | None = None
    rho: float | None = None
    f: ScalarField | None = None
    f_grad: ScalarGradient | None = None
    orientation: Orientation = "accretive"
    is_zero: bool = False
    params: Mapping[str, Any] = dataclasses.field(default_factory=dict)

    def operator(self, w: ArrayLike) -> Array:
        """R(w): −F(w) in the accretive orientation, F(w) otherwise."""
        out = self.F(np.asarray(w, dtype=float))
        return -out if self.orientation == "accretive" else out

    def operator_jacobian(self, w: ArrayLike) -> Array:
        out = self.jacobian(np.asarray(w, dtype=float))
        return -out if self.orientation == "accretive" else out

    def rate(self, values: ArrayLike) -> Array:
        """Scalar field f(u, v) of a Kouachi reaction."""
        if self.kind != "kouachi" or self.f is None:
            raise ValueError(f"Reaction '{self.name}' has no scalar rate f")
        arr = np.asarray(values, dtype=float)
        return self.f(arr[0], arr[1])

    def with_orientation(self, orientation: Orientation) -> "ReactionSpec":
        return dataclasses.replace(self, orientation=orientation)


@dataclass(frozen=True)
class YosidaParams:
    """Parameters of (I + λR)⁻¹ and R_λ = (I − (I + λR)⁻¹)/λ."""

    lam: float
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.newton_tol > 0:
            raise ValueError(f"newton_tol must be positive, got {self.newton_tol}")
        if self.newton_max_iter < 1:
            raise ValueError(f"newton_max_iter must be >= 1, got {self.newton_max_iter}")


@dataclass(frozen=True)
class ProbeResult:
    """Sampled accretivity evidence."""

    monotone_fraction: float
    f_origin: float
    eq9_min: float | None = None


def _diagonal(diag: Array) -> Array:
    """(d, ...) diagonal entries → (d, d, ...) Jacobian."""
    d = diag.shape[0]
    out = np.zeros((d, d, *diag.shape[1:]))
    for i in range(d):
        out[i, i] = diag[i]
    return out


def _zero(d: int, params: Mapping[str, Any]) -> dict[str, Any]:
    return {
        "F": lambda u: np.zeros_like(u),
        "jacobian": lambda u: np.zeros((d, d, *u.shape[1:])),
        "is_zero": True,
    }


def _linear_decay(d: int, params: Mapping[str, Any]) -> dict[str, Any]:
    rate = float(params.get("rate", 1.0))
    if rate < 0:
        raise ValueError(f"linear_decay rate must be nonnegative, got {rate}")
    return {
        "F": lambda u: -rate * u,
        "jacobian": lambda u: _diagonal(np.full_like(u, -rate)),
    }


def _cubic_decay(d: int, params: Mapping[str, Any]) -> dict[str, Any]:
    coefficient = float(params.get("coefficient", 1.0))
    if coefficient < 0:
        raise ValueError(f"cubic_decay coefficient must be nonnegative, got {coefficient}")
    return {
        "F": lambda u: -coefficient * u**3,
        "jacobian": lambda u: _diagonal(-3.0 * coefficient * u**2),
    }


def rate_function(f_name: str, f_params: Mapping[str, Any]) -> tuple[ScalarField, ScalarGradient]:
    """Built-in Kouachi rates: f = u·v ("uv") and f = u·vᵐ ("uv_power").

    Both satisfy f(0, 0) = 0.
    """
    if f_name == "uv":
        return (lambda u, v: u * v), (lambda u, v: (v, u))
    if f_name == "uv_power":
        m = f_params.get("m", 1)
        if int(m) != m or m < 1:
            raise ValueError(f"uv_power exponent m must be a positive integer, got {m}")
        m = int(m)
        return (
            (lambda u, v: u * v**m),
            (lambda u, v: (v**m, m * u * v ** (m - 1))),
        )
    raise UnknownReactionError(f"Unknown Kouachi rate: {f_name}. Available: uv, uv_power")


def _kouachi_parts(
    sigma: float,
    rho: float,
    f: ScalarField,
    f_grad: ScalarGradient,
) -> dict[str, Any]:
    def F(w: Array) -> Array:
        rate = f(w[0], w[1])
        return np.stack([-sigma * rate, rho * rate])

    def jacobian(w: Array) -> Array:
        fu, fv = f_grad(w[0], w[1])
        fu = np.broadcast_to(fu, w.shape[1:])
        fv = np.broadcast_to(fv, w.shape[1:])
        return np.stack([
            np.stack([-sigma * fu, -sigma * fv]),
            np.stack([rho * fu, rho * fv]),
        ])

    return {"F": F, "jacobian": jacobian, "kind": "kouachi", "sigma": sigma, "rho": rho,
            "f": f, "f_grad": f_grad}


def _kouachi(d: int, params: Mapping[str, Any]) -> dict[str, Any]:
    if d != 2:
        raise ValueError(f"kouachi reaction needs d=2, got d={d}")
    sigma = float(params.get("sigma", 1.0))
    rho = float(params.get("rho", 1.0))
    if sigma <= 0 or rho <= 0:
        raise ValueError(f"sigma and rho must be positive, got sigma={sigma}, rho={rho}")
    f_name = str(params.get("f", "uv"))
    f, f_grad = rate_function(f_name, params)
    return _kouachi_parts(sigma, rho, f, f_grad)


_BUILDERS: dict[str, Callable[[int, Mapping[str, Any]], dict[str, Any]]] = {
    "zero": _zero,
    "linear_decay": _linear_decay,
    "cubic_decay": _cubic_decay,
    "kouachi": _kouachi,
}

# Supported reaction names
REACTIONS = tuple(_BUILDERS)


def validate_jacobian(spec: ReactionSpec, points: ArrayLike, rtol: float = 1e-6) -> None:
    """Compare the Jacobian with central differences of F at sample points.

    Args:
        spec: Reaction to check.
        points: Array of shape (d, n).
        rtol: Tolerance relative to max(1, |J|).

    Raises:
        JacobianMismatchError: If any entry disagrees.
    """
    x = np.asarray(points, dtype=float)
    analytic = spec.jacobian(x)
    for j in range(spec.d):
        h = 1e-6 * np.maximum(1.0, np.abs(x[j]))
        shift = np.zeros_like(x)
        shift[j] = h
        column = (spec.F(x + shift) - spec.F(x - shift)) / (2.0 * h)
        scale = np.maximum(1.0, np.abs(analytic[:, j]))
        if np.any(np.abs(column - analytic[:, j]) > rtol * scale):
            raise JacobianMismatchError(
                f"Jacobian column {j} of reaction '{spec.name}' disagrees with finite differences"
            )


def _registered(spec: ReactionSpec, validate: bool) -> ReactionSpec:
    if validate and not spec.is_zero:
        rng = np.random.default_rng(0)
        validate_jacobian(spec, rng.uniform(-1.0, 1.0, size=(spec.d, 8)))
    return spec


def build_reaction(
    name: str,
    params: Mapping[str, Any] | None = None,
    d: int = 1,
    orientation: Orientation = "accretive",
    validate: bool = True,
) -> ReactionSpec:
    """Build a catalogue reaction.

    Args:
        name: One of REACTIONS.
        params: Reaction parameters (rate, coefficient, sigma, rho, f, m).
        d: Number of components.
        orientation: Sign convention of R.
        validate: Check the Jacobian against finite differences.

    Returns:
        ReactionSpec instance.

    Raises:
        UnknownReactionError: If the name is not in the catalogue.
        ValueError: If the parameters or d do not fit the reaction.
    """
    if name not in _BUILDERS:
        raise UnknownReactionError(
            f"Unknown reaction: {name}. Available: {', '.join(REACTIONS)}"
        )
    params = dict(params or {})
    parts = _BUILDERS[name](d, params)
    spec = ReactionSpec(name=name, d=d, orientation=orientation, params=params, **parts)
    return _registered(spec, validate)


def kouachi_reaction(
    sigma: float,
    rho: float,
    f: ScalarField,
    f_grad: ScalarGradient,
    name: str = "kouachi",
    orientation: Orientation = "accretive",
) -> ReactionSpec:
    """Kouachi reaction (−σf, ρf) for a user-supplied rate f and gradient."""
    if sigma <= 0 or rho <= 0:
        raise ValueError(f"sigma and rho must be positive, got sigma={sigma}, rho={rho}")
    spec = ReactionSpec(name=name, d=2, orientation=orientation,
                        params={"sigma": sigma, "rho": rho},
                        **_kouachi_parts(sigma, rho, f, f_grad))
    return _registered(spec, True)


def eval_reaction(spec: ReactionSpec, state: FieldState) -> FieldState:
    """Apply F at every grid node.

    Raises:
        NonFiniteValueError: If F overflows.
    """
    values = state.grid()
    out = spec.F(values)
    if not np.all(np.isfinite(out)):
        raise NonFiniteValueError(f"Reaction '{spec.name}' produced non-finite values")
    return FieldState(state.basis, values=out)


def _to_last(arr: Array) -> Array:
    return np.moveaxis(arr, 0, -1)


def solve_implicit(
    operator: PointMap,
    operator_jacobian: PointMap,
    lam: float,
    v: ArrayLike,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> Array:
    """Solve w + λ·op(w) = v pointwise by damped Newton from w = v.

    Args:
        operator: Pointwise map on arrays of shape (d, ...).
        operator_jacobian: Its Jacobian, shape (d, d, ...).
        lam: λ > 0.
        v: Right-hand side of shape (d, ...).
        tol: Residual tolerance relative to max(1, max|v|).
        max_iter: Newton iteration limit.

    Raises:
        NewtonDivergenceError: If the iteration stalls or produces non-finite values.
    """
    v = np.asarray(v, dtype=float)
    w = v.copy()
    threshold = tol * max(1.0, float(np.max(np.abs(v), initial=0.0)))

    def residual(x: Array) -> Array:
        return x + lam * operator(x) - v

    g = residual(w)
    for iteration in range(max_iter + 1):
        node_res = np.linalg.norm(g, axis=0)
        if not np.all(np.isfinite(node_res)):
            raise NewtonDivergenceError("Resolvent iteration produced non-finite values")
        if np.max(node_res, initial=0.0) <= threshold:
            logger.debug("Resolvent converged after %d Newton iterations", iteration)
            return w
        if iteration == max_iter:
            break

        jac = np.moveaxis(operator_jacobian(w), (0, 1), (-2, -1))
        system = np.eye(v.shape[0]) + lam * jac
        try:
            delta = np.linalg.solve(system, _to_last(-g)[..., None])[..., 0]
        except np.linalg.LinAlgError as e:
            raise NewtonDivergenceError(f"Singular Newton system: {e}") from e
        delta = np.moveaxis(delta, -1, 0)

        step = np.ones_like(node_res)
        for _ in range(30):
            trial = w + step * delta
            trial_g = residual(trial)
            trial_res = np.linalg.norm(trial_g, axis=0)
            bad = ~(trial_res <= (1.0 - 1e-4 * step) * node_res) & (node_res > threshold)
            if not np.any(bad):
                break
            step = np.where(bad, 0.5 * step, step)
        w, g = trial, trial_g

    raise NewtonDivergenceError(
        f"Resolvent did not converge in {max_iter} iterations "
        f"(residual {float(np.max(np.linalg.norm(g, axis=0))):.3e}, λ={lam})"
    )


def resolvent(spec: ReactionSpec, params: YosidaParams, v: ArrayLike) -> Array:
    """(I + λR)⁻¹ v, solving w + λR(w) = v.

    Raises:
        NewtonDivergenceError: If R is not monotone near v or λ is too large.
    """
    v = np.asarray(v, dtype=float)
    if spec.is_zero:
        return v.copy()
    return solve_implicit(
        spec.operator, spec.operator_jacobian, params.lam, v,
        params.newton_tol, params.newton_max_iter,
    )


def yosida(spec: ReactionSpec, params: YosidaParams, v: ArrayLike) -> Array:
    """R_λ(v) = (v − (I + λR)⁻¹ v)/λ."""
    v = np.asarray(v, dtype=float)
    return (v - resolvent(spec, params, v)) / params.lam


def yosida_jacobian(spec: ReactionSpec, params: YosidaParams, v: ArrayLike) -> Array:
    """Pointwise derivative of R_λ, shape (..., d, d).

    With w = (I + λR)⁻¹ v the derivative is (I − (I + λR'(w))⁻¹)/λ.
    """
    v = np.asarray(v, dtype=float)
    d = v.shape[0]
    eye = np.eye(d)
    if spec.is_zero:
        return np.zeros((*v.shape[1:], d, d))
    w = resolvent(spec, params, v)
    jac = np.moveaxis(spec.operator_jacobian(w), (0, 1), (-2, -1))
    return (eye - np.linalg.inv(eye + params.lam * jac)) / params.lam


def sample_pairs(
    box: Sequence[float],
    n: int,
    d: int,
    rng: np.random.Generator,
) -> list[tuple[Array, Array]]:
    """n random pairs of d-vectors uniform on [lo, hi]^d."""
    lo, hi = float(box[0]), float(box[1])
    if not hi > lo:
        raise ValueError(f"Probe box must satisfy lo < hi, got {box}")
    xs = rng.uniform(lo, hi, size=(n, d))
    ys = rng.uniform(lo, hi, size=(n, d))
    return list(zip(xs, ys))


def accretivity_probe(
    spec: ReactionSpec,
    samples: Sequence[tuple[ArrayLike, ArrayLike]],
) -> ProbeResult:
    """Sample monotonicity of R, the value at the origin and the sign condition.

    Args:
        spec: Reaction to probe.
        samples: Nonempty list of (x, y) pairs of d-vectors.

    Returns:
        ProbeResult. `eq9_min` (min of −σu·f + ρv·f over all sampled
        points) is present only for Kouachi reactions.
    """
    if not samples:
        raise ValueError("accretivity_probe needs at least one sample pair")
    xs = np.array([np.asarray(x, dtype=float) for x, _ in samples]).T
    ys = np.array([np.asarray(y, dtype=float) for _, y in samples]).T

    pairing = np.sum((spec.operator(xs) - spec.operator(ys)) * (xs - ys), axis=0)
    monotone_fraction = float(np.mean(pairing >= MONOTONE_SLACK))

    origin = np.zeros((spec.d, 1))
    if spec.kind == "kouachi":
        f_origin = float(abs(spec.rate(origin)[0]))
        points = np.concatenate([xs, ys], axis=1)
        rate = spec.rate(points)
        assert spec.sigma is not None and spec.rho is not None
        eq9 = -spec.sigma * points[0] * rate + spec.rho * points[1] * rate
        return ProbeResult(monotone_fraction, f_origin, float(np.min(eq9)))

    f_origin = float(np.linalg.norm(spec.F(origin)))
    return ProbeResult(monotone_fraction, f_origin)
