"""Pydantic models for simulation configuration files."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class DomainConfig(_Section):
    """The box Ω and its boundary condition."""

    space_dim: Literal[1, 2] = 1
    lengths: list[PositiveFloat] = Field(..., min_length=1, max_length=2)
    bc: Literal["dirichlet", "neumann"] = "dirichlet"


class GridConfig(_Section):
    modes_per_axis: list[PositiveInt] = Field(..., min_length=1, max_length=2)


class MatrixConfig(_Section):
    """Diffusion matrix as dimension plus d² row-major entries."""

    d: PositiveInt
    entries: list[float]


class ReactionConfig(_Section):
    """Reaction selected by catalogue name."""

    name: str = "zero"
    params: dict[str, float | int | str] = Field(default_factory=dict)
    orientation: Literal["accretive", "literal"] = Field(
        default="accretive",
        description="'accretive' probes R = −F, 'literal' probes R = F",
    )


class TimeConfig(_Section):
    dt: PositiveFloat
    t_final: PositiveFloat
    frame_stride: PositiveInt = 10
    scheme: Literal["lie", "strang"] = "strang"


class StationaryConfig(_Section):
    """Regularized stationary problem εu − MΔu + R_λ(u) = v."""

    epsilon: PositiveFloat
    lam: PositiveFloat = Field(..., alias="lambda")


class InitialTerm(_Section):
    """One catalogue term of an initial-data expression."""

    kind: Literal["sine", "cosine", "gaussian", "constant"]
    amplitude: float = 1.0
    mode: list[int] | None = Field(default=None, description="Mode index per axis")
    center: list[float] | None = None
    width: PositiveFloat | None = None
    value: float | None = None


class ComponentConfig(_Section):
    """Initial data for one component: a sum of terms or inline grid values."""

    terms: list[InitialTerm] = Field(default_factory=list)
    values: list[float] | None = Field(default=None, description="Row-major grid values")


class InitialDataConfig(_Section):
    components: list[ComponentConfig] = Field(..., min_length=1)


class OutputConfig(_Section):
    directory: str = "out"
    formats: list[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])


class AnalysisConfig(_Section):
    tol_eig: PositiveFloat | None = None
    tol_cluster: PositiveFloat | None = None


class YosidaConfig(_Section):
    newton_tol: PositiveFloat = 1e-12
    newton_max_iter: PositiveInt = 50


class KouachiParams(_Section):
    """Constants of the balance-law model with matrix [[α, β], [γ, α]]."""

    alpha: PositiveFloat
    beta: PositiveFloat
    gamma: PositiveFloat
    sigma: PositiveFloat
    rho: PositiveFloat
    f_name: Literal["uv", "uv_power"] = "uv"
    f_params: dict[str, float | int] = Field(default_factory=dict)
    strict: bool = True
    probe_box: list[float] = Field(default_factory=lambda: [0.0, 1.0], min_length=2, max_length=2)
    probe_samples: PositiveInt = 200


class SimulationConfig(_Section):
    """A fully validated run configuration."""

    domain: DomainConfig
    grid: GridConfig
    matrix: MatrixConfig
    reaction: ReactionConfig = Field(default_factory=ReactionConfig)
    time: TimeConfig | None = None
    stationary: StationaryConfig | None = None
    initial_data: InitialDataConfig
    output: OutputConfig = Field(default_factory=OutputConfig)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    yosida: YosidaConfig = Field(default_factory=YosidaConfig)
    kouachi: KouachiParams | None = None
    seed: int = 0
