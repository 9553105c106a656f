"""Thermal and coherent-state correlation functions of the dressed mode.

Symmetric thermal two-point functions on space-time separations (dt, dr):

    <phi phi'>_sym = (hbar/pi) int_0^inf coth(beta hbar w/2)
                                cos(w dt - k dr) Im G_k(w) dw,
    <pi  pi' >_sym = same integrand weighted by w^2.

The per-mode normalization is anchored by the dissipationless limits
<phi^2> -> hbar/(2 omega_k) at T -> 0 and <phi^2> -> kB T / omega_k^2 at
high temperature.  Coherent-state expectation values are linear in the
eigenvalue function C(omega); coherent auto-correlations add a
mean-field-squared term to the T -> 0 (vacuum) fluctuation part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import interp1d

from . import numerics
from .numerics import DEFAULT_SPEC, QuadratureSpec
from .response import ResponseEvaluator
from .thermo import ThermalState, coth_half


@dataclass(frozen=True)
class SeparationGrid:
    """Cartesian product of time separations and space separations."""

    dt_values: Sequence[float]
    dr_values: Sequence[float] = (0.0,)

    def __post_init__(self):
        if len(self.dt_values) == 0 or len(self.dr_values) == 0:
            raise ValueError("separation lists must be nonempty")

    def points(self):
        return [(float(dt), float(dr)) for dt in self.dt_values for dr in self.dr_values]


class CoherentAmplitude:
    """Coherent eigenvalue function C(omega) for the mode's normal-mode continuum."""

    def __init__(self, func: Callable[[float], complex], representation: str):
        self._func = func
        self.representation = representation

    def __call__(self, omega: float) -> complex:
        return complex(self._func(omega))

    @classmethod
    def constant(cls, value: complex) -> "CoherentAmplitude":
        value = complex(value)
        return cls(lambda w: value, "constant")

    @classmethod
    def gaussian_packet(
        cls, amplitude: float, center: float, width: float, phase: float = 0.0
    ) -> "CoherentAmplitude":
        if width <= 0:
            raise ValueError("width must be positive")
        pref = complex(amplitude) * complex(math.cos(phase), math.sin(phase))

        def func(w):
            return pref * math.exp(-0.5 * ((w - center) / width) ** 2)

        return cls(func, "gaussian_packet")

    @classmethod
    def tabulated(cls, omega_grid, re_grid, im_grid) -> "CoherentAmplitude":
        fre = interp1d(omega_grid, re_grid, bounds_error=False, fill_value=0.0)
        fim = interp1d(omega_grid, im_grid, bounds_error=False, fill_value=0.0)

        def func(w):
            return complex(float(fre(w)), float(fim(w)))

        return cls(func, "tabulated")


@dataclass(frozen=True)
class CorrelatorTable:
    """Correlator values with quadrature error estimates on a separation grid."""

    kind: str
    rows: list = field(default_factory=list)  # (dt, dr, value, est_error)

    def value_at(self, dt: float, dr: float) -> float:
        for row in self.rows:
            if row[0] == dt and row[1] == dr:
                return row[2]
        raise KeyError((dt, dr))


def _omega_floor(ev: ResponseEvaluator) -> float:
    # Filon panels evaluate the envelope at w = 0 where coth and 1/w kernels
    # have finite limits; a relative floor realizes them.
    return 1e-9 * ev.mode.omega_k


def _spectral_cos_integral(
    ev: ResponseEvaluator,
    envelope: Callable[[float], float],
    dt: float,
    dr: float,
    spec: QuadratureSpec,
):
    """int_0^inf envelope(w) cos(w dt - k dr) dw, split into Filon sin/cos parts."""
    k = ev.mode.k
    phase = k * dr
    if dt == 0.0:
        value, err = numerics.integrate(
            envelope, (0.0, np.inf), spec, points=ev.quad_points()
        )
        return math.cos(phase) * value, err
    c, ec = numerics.oscillatory_integrate(envelope, dt, (0.0, np.inf), spec, kind="cos")
    s, es = numerics.oscillatory_integrate(envelope, dt, (0.0, np.inf), spec, kind="sin")
    return math.cos(phase) * c + math.sin(phase) * s, ec + es


def thermal_corr_phi(
    ev: ResponseEvaluator,
    state: ThermalState,
    grid: SeparationGrid,
    spec: QuadratureSpec | None = None,
) -> CorrelatorTable:
    """Symmetric field correlator (hbar/pi) int coth cos(w dt - k dr) Im G_k dw."""
    spec = spec or ev.spec
    pref = state.hbar / math.pi
    floor = _omega_floor(ev)

    def envelope(w):
        w = max(w, floor)
        return coth_half(state, w) * ev.greens(w).imag

    rows = []
    for dt, dr in grid.points():
        v, e = _spectral_cos_integral(ev, envelope, dt, dr, spec)
        rows.append((dt, dr, pref * v, pref * e))
    return CorrelatorTable("thermal_phi", rows)


def thermal_corr_pi(
    ev: ResponseEvaluator,
    state: ThermalState,
    grid: SeparationGrid,
    spec: QuadratureSpec | None = None,
) -> CorrelatorTable:
    """Symmetric momentum correlator: the field integrand weighted by w^2."""
    spec = spec or ev.spec
    pref = state.hbar / math.pi
    floor = _omega_floor(ev)

    def envelope(w):
        w = max(w, floor)
        return w * w * coth_half(state, w) * ev.greens(w).imag

    rows = []
    for dt, dr in grid.points():
        v, e = _spectral_cos_integral(ev, envelope, dt, dr, spec)
        rows.append((dt, dr, pref * v, pref * e))
    return CorrelatorTable("thermal_pi", rows)


def coherent_expectation_phi(
    ev: ResponseEvaluator, amp: CoherentAmplitude, omega: float, hbar: float = 1.0
) -> float:
    """<phi(omega)> in the coherent state:  2 pi sqrt(hbar/2w) (f G C + c.c.)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    z = ev.coupling(omega) * ev.greens(omega) * amp(omega)
    return 4.0 * math.pi * math.sqrt(hbar / (2.0 * omega)) * z.real


def coherent_expectation_pi(
    ev: ResponseEvaluator, amp: CoherentAmplitude, omega: float, hbar: float = 1.0
) -> float:
    """<pi(omega)> in the coherent state:  -i 2 pi sqrt(hbar w/2) (f G C - c.c.)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    z = ev.coupling(omega) * ev.greens(omega) * amp(omega)
    return 4.0 * math.pi * math.sqrt(hbar * omega / 2.0) * z.imag


def _vacuum_corr(ev, weight_power, dt, dr, spec, hbar):
    def envelope(w):
        return w**weight_power * ev.greens(w).imag

    v, e = _spectral_cos_integral(ev, envelope, dt, dr, spec)
    return hbar / math.pi * v, hbar / math.pi * e


def coherent_corr_phi(
    ev: ResponseEvaluator,
    amp: CoherentAmplitude,
    grid: SeparationGrid,
    hbar: float = 1.0,
    spec: QuadratureSpec | None = None,
) -> CorrelatorTable:
    """Coherent field auto-correlation: mean-field-squared term plus the vacuum part.

    The vacuum part is the T -> 0 thermal correlator; at C = 0 the two
    coincide exactly (same integral).  The mean term carries the squared
    single-frequency expectation value under the same cosine kernel:

        M_phi(dt, dr) = int_0^inf cos(w dt - k dr) (2 hbar/w) f(w)^2 Re^2[G C] dw.
    """
    spec = spec or ev.spec
    floor = _omega_floor(ev)

    def mean_envelope(w):
        w = max(w, floor)
        gc = ev.greens(w) * amp(w)
        return 2.0 * hbar / w * ev.coupling.f_squared(w) * gc.real**2

    rows = []
    for dt, dr in grid.points():
        vac, evac = _vacuum_corr(ev, 0, dt, dr, spec, hbar)
        mean, emean = _spectral_cos_integral(ev, mean_envelope, dt, dr, spec)
        rows.append((dt, dr, vac + mean, evac + emean))
    return CorrelatorTable("coherent_phi", rows)


def coherent_corr_pi(
    ev: ResponseEvaluator,
    amp: CoherentAmplitude,
    grid: SeparationGrid,
    hbar: float = 1.0,
    spec: QuadratureSpec | None = None,
    mean_sign: str = "paper",
) -> CorrelatorTable:
    """Coherent momentum auto-correlation: w^2-weighted vacuum part plus the
    mean term, which enters with a minus sign in the source convention
    (``mean_sign='paper'``); ``'positive'`` flips it.
    """
    spec = spec or ev.spec
    if mean_sign not in ("paper", "positive"):
        raise ValueError("mean_sign must be 'paper' or 'positive'")
    sign = -1.0 if mean_sign == "paper" else 1.0
    floor = _omega_floor(ev)

    def mean_envelope(w):
        w = max(w, floor)
        gc = ev.greens(w) * amp(w)
        return 2.0 * hbar * w * ev.coupling.f_squared(w) * gc.imag**2

    rows = []
    for dt, dr in grid.points():
        vac, evac = _vacuum_corr(ev, 2, dt, dr, spec, hbar)
        mean, emean = _spectral_cos_integral(ev, mean_envelope, dt, dr, spec)
        rows.append((dt, dr, vac + sign * mean, evac + emean))
    return CorrelatorTable("coherent_pi", rows)
