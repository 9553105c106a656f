"""Mean-force thermodynamics of a single dressed mode.

The reduced thermal state of a mode coupled non-negligibly to its reservoir
is governed by an effective (mean-force) Hamiltonian; its internal energy,
free energy and entropy are

    U* = U_total - U_free_reservoir = E_system + E_interaction + E_reservoir_excess,
    F* = -(1/beta) ln(Z / Z_reservoir),
    S* = -dF*/dT,

with every component a single frequency integral over the dressed spectral
function Im G_k(omega).  Two independent routes to F* are provided: the
closed form

    F* = (1/pi) int_0^inf kB T ln[2 sinh(beta hbar w / 2)]
                 * Im{ d ln G_k(w) / dw } dw,

whose dissipationless limit is exactly the free-oscillator free energy, and
thermodynamic integration of U* anchored at the classical high-temperature
plateau.  Internal energy and the closed-form free energy are tied together
by the Gibbs-Helmholtz relation U* = -T^2 d(F*/T)/dT, which is used as a
cross-check, not assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import ReferenceLimitError
from .numerics import DEFAULT_SPEC, QuadratureSpec
from .response import ResponseEvaluator

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ThermalState:
    """Temperature plus the physical constants (natural units by default)."""

    T: float
    hbar: float = 1.0
    kB: float = 1.0

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("temperature must be positive")
        if self.hbar <= 0 or self.kB <= 0:
            raise ValueError("hbar and kB must be positive")

    @property
    def beta(self) -> float:
        return 1.0 / (self.kB * self.T)

    def with_temperature(self, T: float) -> "ThermalState":
        return ThermalState(T=T, hbar=self.hbar, kB=self.kB)


@dataclass(frozen=True)
class ConsistencyRecord:
    """Cross-checks between the independently computed thermodynamic routes."""

    S_from_dF: float
    U_from_gibbs_helmholtz: float
    max_rel_dev: float


@dataclass(frozen=True)
class ThermoReport:
    """All per-mode thermodynamic quantities at one temperature."""

    omega_k: float
    T: float
    U_star: float
    F_star_closed: float
    F_star_integrated: float
    S_star_closed: float
    S_star_fd: float
    S_star_paper_ln2: float
    E_system: float
    E_reservoir_excess: float
    E_interaction: float
    consistency: ConsistencyRecord


def bose_occupation(state: ThermalState, omega: float) -> float:
    """Mean thermal quantum number N(omega) = 1/(e^{beta hbar omega} - 1).

    Satisfies 2N + 1 = coth(beta hbar omega / 2).  Guarded against overflow:
    for beta hbar omega > 700 the occupation underflows to 0.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    x = state.beta * state.hbar * omega
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def coth_half(state: ThermalState, omega: float) -> float:
    """coth(beta hbar omega / 2), evaluated stably for extreme arguments."""
    x = 0.5 * state.beta * state.hbar * omega
    if x > 350.0:
        return 1.0
    return 1.0 / math.tanh(x)


def _log_2sinh(x: float) -> float:
    """ln(2 sinh x) for x > 0 without overflow: x + log1p(-e^{-2x})."""
    if x > 350.0:
        return x
    return x + math.log1p(-math.exp(-2.0 * x))


def _entropy_bracket(x: float) -> float:
    """x coth x - ln(2 sinh x), the per-frequency oscillator entropy (over kB)."""
    if x > 350.0:
        return 0.0
    t = math.exp(-2.0 * x)
    # x(coth x - 1) = 2x t/(1 - t); ln(2 sinh x) - x = log1p(-t)
    return 2.0 * x * t / (1.0 - t) - math.log1p(-t)


def _spectral_energy_integral(ev: ResponseEvaluator, state: ThermalState, weight, spec):
    """int_0^inf weight(omega) domega with the evaluator's resonance panels."""
    value, err = numerics.integrate(
        weight, (0.0, np.inf), spec, points=ev.quad_points()
    )
    return value, err


def energy_system(
    ev: ResponseEvaluator, state: ThermalState, spec: QuadratureSpec | None = None
) -> float:
    """Per-mode system energy  <pi^2>/2 + omega_k^2 <phi^2>/2:

        E_S = (hbar / 2 pi) int_0^inf (w^2 + w_k^2) coth(beta hbar w/2) Im G_k(w) dw.
    """
    spec = spec or ev.spec
    wk2 = ev.mode.omega_k**2

    def integrand(w):
        return (w * w + wk2) * coth_half(state, w) * ev.greens(w).imag

    value, _ = _spectral_energy_integral(ev, state, integrand, spec)
    return state.hbar / (2.0 * math.pi) * value


def energy_reservoir_excess(
    ev: ResponseEvaluator, state: ThermalState, spec: QuadratureSpec | None = None
) -> float:
    """Reservoir energy in excess of the uncoupled reservoir:

        E_R = (hbar / 2 pi) Im int_0^inf w_k^2 coth(beta hbar w/2)
                                  d[w chi(w)]/dw  G_k(w) dw.
    """
    spec = spec or ev.spec
    wk2 = ev.mode.omega_k**2

    def integrand(w):
        dwchi = ev.chi(w) + w * complex(ev.model.d_chi(w))
        return (coth_half(state, w) * wk2 * dwchi * ev.greens(w)).imag

    value, _ = _spectral_energy_integral(ev, state, integrand, spec)
    return state.hbar / (2.0 * math.pi) * value


def energy_interaction(
    ev: ResponseEvaluator, state: ThermalState, spec: QuadratureSpec | None = None
) -> float:
    """Interaction energy <H_I> = - int dw f(w) <phi Y_w> per mode:

        E_I = -(hbar / pi) Im int_0^inf w_k^2 coth(beta hbar w/2) chi(w) G_k(w) dw.

    The prefactor is fixed by the exact classical limit
    E_I -> -kB T chi(0)/(1 - chi(0)) and by Gibbs-Helmholtz closure against
    the closed-form free energy.
    """
    spec = spec or ev.spec
    wk2 = ev.mode.omega_k**2

    def integrand(w):
        return (coth_half(state, w) * wk2 * ev.chi(w) * ev.greens(w)).imag

    value, _ = _spectral_energy_integral(ev, state, integrand, spec)
    return -state.hbar / math.pi * value


def internal_energy_mean_force(
    ev: ResponseEvaluator, state: ThermalState, spec: QuadratureSpec | None = None
) -> float:
    """U* = E_system + E_interaction + E_reservoir_excess."""
    return (
        energy_system(ev, state, spec)
        + energy_interaction(ev, state, spec)
        + energy_reservoir_excess(ev, state, spec)
    )


def _im_dlog_greens(ev: ResponseEvaluator, w: float) -> float:
    """Im d ln G_k / dw = Im[(2w + w_k^2 chi'(w)) G_k(w)]."""
    wk2 = ev.mode.omega_k**2
    return ((2.0 * w + wk2 * complex(ev.model.d_chi(w))) * ev.greens(w)).imag


def free_energy_closed_form(
    ev: ResponseEvaluator, state: ThermalState, spec: QuadratureSpec | None = None
) -> float:
    """Closed-form mean-force free energy

        F* = (1/pi) int_0^inf kB T ln[2 sinh(beta hbar w/2)] Im{d ln G_k/dw} dw.

    Since arg G_k winds from 0 to pi, int Im{d ln G_k/dw} dw = pi exactly, so
    the ln 2 inside the logarithm contributes precisely kB T ln 2; the
    remainder is the ln sinh integral.  Dissipationless limit:
    kB T ln[2 sinh(beta hbar omega_k / 2)].
    """
    spec = spec or ev.spec
    kT = state.kB * state.T
    half_bh = 0.5 * state.beta * state.hbar

    def integrand(w):
        return _log_2sinh(half_bh * w) * _im_dlog_greens(ev, w)

    value, _ = _spectral_energy_integral(ev, state, integrand, spec)
    return kT / math.pi * value


def _classical_reference_beta(ev: ResponseEvaluator, state: ThermalState) -> float:
    """Inverse temperature of the classical anchor, kB T_ref = 50 hbar Omega_max."""
    omega_scale = max(ev.mode.omega_k, ev.model.spectral_extent())
    return 0.02 / (state.hbar * omega_scale)


def free_energy_thermo_integration(
    ev: ResponseEvaluator,
    state: ThermalState,
    spec: QuadratureSpec | None = None,
    plateau_tol: float = 0.02,
) -> float:
    """F* by integrating U* down from the classical high-temperature anchor.

    With b = beta and R(b) = U*(b) - 1/b,

        b F*(b) = ln(b hbar omega_tilde) + int_0^b R(b') db',

    where omega_tilde = omega_k sqrt(1 - chi(0)) is the statically dressed
    frequency (the classical mean-force partition function is that of a free
    oscillator at omega_tilde, so the anchor is exact as b -> 0).  The
    integral below the reference point uses the leading linear behaviour of R.
    Raises ``ReferenceLimitError`` if quantum corrections at the candidate
    anchor exceed ``plateau_tol`` even after pushing it higher.
    """
    spec = spec or ev.spec
    omega_tilde = ev.omega_tilde

    def R(b):
        st = ThermalState(T=1.0 / (state.kB * b), hbar=state.hbar, kB=state.kB)
        return internal_energy_mean_force(ev, st, spec) - 1.0 / b

    b_ref = _classical_reference_beta(ev, state)
    r_ref = R(b_ref)
    for _ in range(6):
        if abs(r_ref) * b_ref <= plateau_tol:
            break
        b_ref *= 0.5
        r_ref = R(b_ref)
    else:
        raise ReferenceLimitError(
            f"classical plateau not reached: |U* - kB T|/kB T = {abs(r_ref) * b_ref:.3g} "
            f"at kB T_ref = {1.0 / b_ref:.3g}"
        )

    b = state.beta
    if b <= b_ref:
        # already on the classical side; integrate the short remaining stretch
        head = 0.5 * b * R(b)
        return (math.log(b * state.hbar * omega_tilde) + head) / b

    tail, _ = numerics.integrate(R, (b_ref, b), spec)
    head = 0.5 * b_ref * r_ref  # int_0^{b_ref} R, R ~ linear near 0
    return (math.log(b * state.hbar * omega_tilde) + head + tail) / b


def free_energy_mean_force(
    ev: ResponseEvaluator,
    state: ThermalState,
    method: str = "thermo_integration",
    spec: QuadratureSpec | None = None,
) -> float:
    """Mean-force free energy by either route; the two must agree."""
    if method == "closed_form":
        return free_energy_closed_form(ev, state, spec)
    if method == "thermo_integration":
        return free_energy_thermo_integration(ev, state, spec)
    raise ValueError(f"unknown method {method!r}")


def entropy_closed_form(
    ev: ResponseEvaluator, state: ThermalState, spec: QuadratureSpec | None = None
) -> float:
    """S* = -dF*/dT of the closed form, differentiated analytically:

        S* = (kB/pi) int_0^inf [x coth x - ln(2 sinh x)] Im{d ln G_k/dw} dw,
        x = beta hbar w / 2.
    """
    spec = spec or ev.spec
    half_bh = 0.5 * state.beta * state.hbar

    def integrand(w):
        return _entropy_bracket(half_bh * w) * _im_dlog_greens(ev, w)

    value, _ = _spectral_energy_integral(ev, state, integrand, spec)
    return state.kB / math.pi * value


def entropy_mean_force(
    ev: ResponseEvaluator,
    state: ThermalState,
    method: str = "closed_form",
    spec: QuadratureSpec | None = None,
) -> float:
    """Mean-force entropy: analytic closed form or -dF*/dT by finite differences."""
    if method == "closed_form":
        return entropy_closed_form(ev, state, spec)
    if method == "finite_difference":
        def F(T):
            return free_energy_closed_form(ev, state.with_temperature(T), spec)

        value, _ = numerics.differentiate(F, state.T, domain_min=0.0)
        return -value
    raise ValueError(f"unknown method {method!r}")


def entropy_paper_ln2_variant(state: ThermalState, s_closed: float) -> float:
    """Alternative entropy bookkeeping in which the additive ln 2 term is
    written as kB T ln 2 (an energy-dimensioned constant) instead of the
    -kB ln 2 produced by differentiating kB T ln 2 in F*.  Emitted for
    comparison only; excluded from all consistency checks.
    """
    return s_closed + state.kB * LN2 + state.kB * state.T * LN2


def gibbs_helmholtz_internal_energy(
    ev: ResponseEvaluator, state: ThermalState, spec: QuadratureSpec | None = None
) -> float:
    """U* recomputed as -T^2 d(F*_closed / T)/dT by numerical differentiation."""
    def g(T):
        st = state.with_temperature(T)
        return free_energy_closed_form(ev, st, spec) / T

    value, _ = numerics.differentiate(g, state.T, domain_min=0.0)
    return -state.T**2 * value


def thermo_report(
    ev: ResponseEvaluator, state: ThermalState, spec: QuadratureSpec | None = None
) -> ThermoReport:
    """Everything at one temperature, with the consistency block filled."""
    e_s = energy_system(ev, state, spec)
    e_i = energy_interaction(ev, state, spec)
    e_r = energy_reservoir_excess(ev, state, spec)
    u = e_s + e_i + e_r
    f_closed = free_energy_closed_form(ev, state, spec)
    f_int = free_energy_thermo_integration(ev, state, spec)
    s_closed = entropy_closed_form(ev, state, spec)
    s_fd = entropy_mean_force(ev, state, "finite_difference", spec)
    u_gh = gibbs_helmholtz_internal_energy(ev, state, spec)

    scale = max(abs(u), state.kB * state.T)
    dev_gh = abs(u_gh - u) / scale
    dev_fus = abs(f_closed - (u - state.T * s_closed)) / scale
    cons = ConsistencyRecord(
        S_from_dF=s_fd,
        U_from_gibbs_helmholtz=u_gh,
        max_rel_dev=max(dev_gh, dev_fus),
    )
    return ThermoReport(
        omega_k=ev.mode.omega_k,
        T=state.T,
        U_star=u,
        F_star_closed=f_closed,
        F_star_integrated=f_int,
        S_star_closed=s_closed,
        S_star_fd=s_fd,
        S_star_paper_ln2=entropy_paper_ln2_variant(state, s_closed),
        E_system=e_s,
        E_reservoir_excess=e_r,
        E_interaction=e_i,
        consistency=cons,
    )


def thermo_sweep(
    ev: ResponseEvaluator,
    T_grid,
    state: ThermalState | None = None,
    spec: QuadratureSpec | None = None,
    threads: int | None = None,
):
    """One ThermoReport per temperature.

    Per-point failures are collected and the sweep continues; returns
    ``(reports, failures)`` with failures as (T, message) pairs.  Reports keep
    grid order regardless of the worker count.
    """
    T_grid = [float(t) for t in T_grid]
    if any(t <= 0 for t in T_grid):
        raise ValueError("temperatures must be positive")
    if any(b <= a for a, b in zip(T_grid, T_grid[1:])):
        raise ValueError("temperature grid must be increasing")
    base = state or ThermalState(T=T_grid[0])

    def one(T):
        try:
            return thermo_report(ev, base.with_temperature(T), spec), None
        except Exception as exc:  # collected, sweep continues
            return None, (T, f"{type(exc).__name__}: {exc}")

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, T_grid))
    else:
        outcomes = [one(T) for T in T_grid]
    reports = [rep for rep, _ in outcomes if rep is not None]
    failures = [fail for _, fail in outcomes if fail is not None]
    return reports, failures


def integrate_over_k(
    model,
    m: float,
    k_grid,
    state: ThermalState,
    quantity: str = "U_star",
    spec: QuadratureSpec | None = None,
) -> float:
    """Trapezoid sum of a per-mode density over a user-supplied k grid.

    Explicitly cutoff-dependent: the continuum k integral diverges, so the
    result is only meaningful together with the grid's UV cutoff.
    """
    from .bath import ModeContext  # local import to avoid cycle at module load

    k_grid = np.asarray(k_grid, dtype=float)
    values = []
    for k in k_grid:
        ev = ResponseEvaluator(model, ModeContext(k=float(k), m=m))
        rep = thermo_report(ev, state, spec)
        values.append(getattr(rep, quantity))
    return float(np.trapezoid(values, k_grid))
