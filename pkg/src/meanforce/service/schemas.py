"""Pydantic request/response models: the validated external surface shared by
the HTTP endpoints and the CLI."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSpec(StrictModel):
    """Reservoir susceptibility model selector plus its parameters."""

    kind: Literal["drude_lorentz", "ohmic", "tabulated"]
    eta: Optional[float] = None
    omega0: Optional[float] = None
    gamma: Optional[float] = None
    omega_c: Optional[float] = None
    table: Optional[list[tuple[float, float]]] = None

    @model_validator(mode="after")
    def _check_params(self):
        if self.kind == "drude_lorentz":
            for name in ("eta", "omega0", "gamma"):
                if getattr(self, name) is None:
                    raise ValueError(f"model.{name} is required for kind=drude_lorentz")
        elif self.kind == "ohmic":
            for name in ("eta", "omega_c"):
                if getattr(self, name) is None:
                    raise ValueError(f"model.{name} is required for kind=ohmic")
        else:
            if not self.table:
                raise ValueError("model.table is required for kind=tabulated")
        return self


class ModeSpec(StrictModel):
    k: float = Field(ge=0)
    m: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def _not_both_zero(self):
        if self.k == 0 and self.m == 0:
            raise ValueError("mode.k and mode.m cannot both be zero")
        return self


class ConstantsSpec(StrictModel):
    hbar: float = Field(default=1.0, gt=0)
    kb: float = Field(default=1.0, gt=0)


class NumericsSpec(StrictModel):
    rel_tol: float = Field(default=1e-8, gt=0)
    abs_tol: float = Field(default=1e-12, gt=0)
    max_subdivisions: int = Field(default=200, ge=1)


class OmegaGridSpec(StrictModel):
    omega_min: float = Field(default=0.0, ge=0)
    omega_max: float = Field(default=10.0, gt=0)
    n_points: int = Field(default=200, ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if self.omega_max <= self.omega_min:
            raise ValueError("omega_max must exceed omega_min")
        return self


class KKCheckRequest(StrictModel):
    model: ModelSpec
    grid: OmegaGridSpec = OmegaGridSpec()
    threshold: float = Field(default=1e-3, gt=0)
    numerics: NumericsSpec = NumericsSpec()


class KKCheckResponse(StrictModel):
    omega: list[float]
    re_closed: list[float]
    re_kk: list[float]
    abs_dev: list[float]
    max_rel_dev: float
    threshold: float
    passed: bool
    convention: str


class GreensRequest(StrictModel):
    model: ModelSpec
    mode: ModeSpec
    grid: OmegaGridSpec = OmegaGridSpec(omega_min=0.0, omega_max=10.0, n_points=400)
    numerics: NumericsSpec = NumericsSpec()


class GreensResponse(StrictModel):
    omega: list[float]
    re_g: list[float]
    im_g: list[float]
    sum_rule: Optional[float]
    warnings: list[str]


class ThermoRequest(StrictModel):
    model: ModelSpec
    mode: ModeSpec
    constants: ConstantsSpec = ConstantsSpec()
    temperatures: list[float] = Field(min_length=1)
    threads: Optional[int] = Field(default=None, ge=1)
    numerics: NumericsSpec = NumericsSpec()

    @model_validator(mode="after")
    def _positive_increasing(self):
        ts = self.temperatures
        if any(t <= 0 for t in ts):
            raise ValueError("temperatures must be positive")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("temperatures must be strictly increasing")
        return self


class ThermoRow(StrictModel):
    T: float
    u_star: float
    f_star_closed: float
    f_star_integrated: float
    s_star_closed: float
    s_star_fd: float
    s_star_paper_ln2: float
    e_system: float
    e_interaction: float
    e_reservoir_excess: float
    consistency_dev: float


class ThermoResponse(StrictModel):
    omega_k: float
    rows: list[ThermoRow]
    failures: list[tuple[float, str]]


class SeparationGridSpec(StrictModel):
    dt_values: list[float] = Field(min_length=1)
    dr_values: list[float] = Field(default=[0.0], min_length=1)


class CoherentSpec(StrictModel):
    kind: Literal["constant", "gaussian_packet"]
    amplitude_re: float = 0.0
    amplitude_im: float = 0.0
    center: Optional[float] = None
    width: Optional[float] = None
    phase: float = 0.0

    @model_validator(mode="after")
    def _packet_params(self):
        if self.kind == "gaussian_packet":
            if self.center is None or self.width is None:
                raise ValueError("coherent.center and coherent.width required for gaussian_packet")
            if self.width <= 0:
                raise ValueError("coherent.width must be positive")
        return self


class CorrelateRequest(StrictModel):
    model: ModelSpec
    mode: ModeSpec
    constants: ConstantsSpec = ConstantsSpec()
    temperature: float = Field(gt=0)
    grid: SeparationGridSpec
    coherent: Optional[CoherentSpec] = None
    pi_mean_sign: Literal["paper", "positive"] = "paper"
    numerics: NumericsSpec = NumericsSpec()


class CorrelatorRows(StrictModel):
    dt: list[float]
    dr: list[float]
    value: list[float]
    est_error: list[float]


class CorrelateResponse(StrictModel):
    corr_phi: CorrelatorRows
    corr_pi: CorrelatorRows
    coherent_phi: Optional[CorrelatorRows] = None
    coherent_pi: Optional[CorrelatorRows] = None


class LangevinRequest(StrictModel):
    model: ModelSpec
    mode: ModeSpec
    temperature: float = Field(gt=0)
    kb: float = Field(default=1.0, gt=0)
    dt: float = Field(default=0.05, gt=0)
    t_max: float = Field(default=500.0, gt=0)
    burn_in: float = Field(default=50.0, gt=0)
    n_traj: int = Field(default=100, ge=1)
    seed: int = 12345
    acf_max_lag: Optional[float] = Field(default=None, gt=0)
    dump_trajectories: int = Field(default=0, ge=0, le=16)
    threads: Optional[int] = Field(default=None, ge=1)
    numerics: NumericsSpec = NumericsSpec()


class AcfRow(StrictModel):
    lag: float
    value: float
    stderr: Optional[float]
    predicted: float


class FdtComparison(StrictModel):
    var_phi_predicted: float
    var_pi_predicted: float
    var_phi_z: Optional[float]
    var_pi_z: Optional[float]
    acf_max_abs_z: Optional[float]
    passed: Optional[bool]


class TrajectoryDump(StrictModel):
    traj_index: int
    t: list[float]
    phi: list[float]
    phidot: list[float]


class LangevinResponse(StrictModel):
    n_traj: int
    failures: int
    mean_phi: float
    var_phi: float
    var_pi: float
    stderr_mean_phi: Optional[float]
    stderr_var_phi: Optional[float]
    stderr_var_pi: Optional[float]
    acf: list[AcfRow]
    var_phi_first_half: float
    var_phi_second_half: float
    fdt: FdtComparison
    warnings: list[str]
    trajectories: list[TrajectoryDump] = []


class HealthResponse(StrictModel):
    status: str
    version: str
