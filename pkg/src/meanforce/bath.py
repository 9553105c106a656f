"""Reservoir susceptibility models and the coupling function they induce.

A model specifies the dimensionless, mode-independent response chi(omega)
of the harmonic-oscillator continuum: its imaginary part encodes
dissipation, its real part dispersion, and the two are Kramers-Kronig
partners.  The frequency-resolved coupling strength follows from

    f(omega)^2 = 2 omega omega_k^2 Im chi(omega) / pi,

and the time-domain memory kernel from

    chi(t) = (1/omega_k^2) int_0^inf (sin(omega t)/omega) f(omega)^2 domega
           = (2/pi)       int_0^inf Im chi(omega) sin(omega t) domega.

Models are immutable after construction; every evaluation is pure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import numerics
from .errors import NegativeImChiError, NoClosedFormError
from .numerics import DEFAULT_SPEC, PVKernelSpec, QuadratureSpec


@dataclass(frozen=True)
class ModeContext:
    """A single scalar-field mode: wavenumber ``k``, mass ``m`` (natural units)."""

    k: float
    m: float = 0.0

    def __post_init__(self):
        if self.k < 0 or self.m < 0:
            raise ValueError("k and m must be nonnegative")
        if self.k == 0 and self.m == 0:
            raise ValueError("k and m cannot both be zero")

    @property
    def omega_k(self) -> float:
        """Mode frequency, omega_k = sqrt(m^2 + k^2)."""
        return math.hypot(self.m, self.k)


class OutOfTableWarning(UserWarning):
    """A tabulated model was evaluated beyond its last sample (treated as 0)."""


class SusceptibilityModel:
    """Base class: passive linear response of the reservoir."""

    kind: str = "base"

    def im_chi(self, omega):
        """Im chi(omega) for omega >= 0; odd continuation is implied."""
        raise NotImplementedError

    @property
    def has_closed_form(self) -> bool:
        return False

    def re_chi_closed(self, omega):
        raise NoClosedFormError(f"{self.kind} model has no closed-form real part")

    def chi(self, omega):
        """Complex chi(omega) = Re + i Im on the real axis (closed-form models)."""
        raise NoClosedFormError(f"{self.kind} model has no closed-form chi")

    def d_chi(self, omega):
        """d chi / d omega (closed-form models; others differentiate numerically)."""
        raise NoClosedFormError(f"{self.kind} model has no closed-form derivative")

    def chi_static(self, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
        """chi(0) (real); controls the static mode softening omega_k^2 (1 - chi(0))."""
        if self.has_closed_form:
            return float(self.re_chi_closed(0.0))
        return re_chi_kk(self, 0.0, spec)

    def quad_points(self):
        """Frequencies where the spectrum has structure (quadrature break points)."""
        return []

    def spectral_extent(self) -> float:
        """Frequency beyond which Im chi is in its asymptotic tail."""
        raise NotImplementedError

    def min_linewidth(self) -> float:
        """Narrowest spectral feature (resolution guard for synthesis grids)."""
        raise NotImplementedError

    @property
    def is_dissipationless(self) -> bool:
        return False

    def kernel_params(self):
        """(alpha, a, b2) if chi(t) = alpha e^{-a t} sin(sqrt(b2) t)/sqrt(b2), else None.

        Covers both shipped closed forms (b2 -> 0 means chi(t) = alpha t e^{-a t});
        the generalized-Langevin integrator uses this for its exact
        auxiliary-variable path.
        """
        return None

    def chi_time_closed(self, t: float) -> float:
        """Closed-form memory kernel where available."""
        params = self.kernel_params()
        if params is None:
            raise NoClosedFormError(f"{self.kind} model has no closed-form kernel")
        alpha, a, b2 = params
        if t < 0:
            return 0.0
        if b2 > 0:
            b = math.sqrt(b2)
            return alpha * math.exp(-a * t) * math.sin(b * t) / b
        if b2 < 0:
            b = math.sqrt(-b2)
            return alpha * math.exp(-a * t) * math.sinh(b * t) / b
        return alpha * t * math.exp(-a * t)


@dataclass(frozen=True)
class DrudeLorentz(SusceptibilityModel):
    """Damped-resonance response, chi(omega) = eta w0^2 / (w0^2 - omega^2 - i gamma omega).

    Im chi(omega) = eta w0^2 gamma omega / [(w0^2 - omega^2)^2 + gamma^2 omega^2].
    """

    eta: float
    omega0: float
    gamma: float
    kind: str = field(default="drude_lorentz", init=False)

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.omega0 <= 0 or self.gamma <= 0:
            raise ValueError("omega0 and gamma must be positive")

    def im_chi(self, omega):
        w = np.asarray(omega, dtype=float)
        d = (self.omega0**2 - w**2) ** 2 + (self.gamma * w) ** 2
        out = self.eta * self.omega0**2 * self.gamma * w / d
        return out if out.ndim else float(out)

    @property
    def has_closed_form(self) -> bool:
        return True

    def re_chi_closed(self, omega):
        w = np.asarray(omega, dtype=float)
        num = self.omega0**2 - w**2
        d = num**2 + (self.gamma * w) ** 2
        out = self.eta * self.omega0**2 * num / d
        return out if out.ndim else float(out)

    def chi(self, omega):
        w = np.asarray(omega, dtype=complex)
        out = self.eta * self.omega0**2 / (self.omega0**2 - w**2 - 1j * self.gamma * w)
        return out if out.ndim else complex(out)

    def d_chi(self, omega):
        w = np.asarray(omega, dtype=complex)
        den = self.omega0**2 - w**2 - 1j * self.gamma * w
        out = self.eta * self.omega0**2 * (2.0 * w + 1j * self.gamma) / den**2
        return out if out.ndim else complex(out)

    def quad_points(self):
        w0, g = self.omega0, self.gamma
        return [max(w0 - 3 * g, w0 * 0.1), w0 - g, w0, w0 + g, w0 + 3 * g]

    def spectral_extent(self) -> float:
        return self.omega0 + 10.0 * self.gamma

    def min_linewidth(self) -> float:
        return self.gamma

    @property
    def is_dissipationless(self) -> bool:
        return self.eta == 0.0

    def kernel_params(self):
        return (
            self.eta * self.omega0**2,
            0.5 * self.gamma,
            self.omega0**2 - 0.25 * self.gamma**2,
        )


@dataclass(frozen=True)
class Ohmic(SusceptibilityModel):
    """Low-frequency-linear response with an algebraic cutoff.

    Im chi(omega) = eta x / (1 + x^2)^2 with x = omega/omega_c; the analytic
    partner is chi(omega) = (eta/2) / (1 - i omega/omega_c)^2, giving
    Re chi(omega) = (eta/2)(1 - x^2)/(1 + x^2)^2 and the memory kernel
    chi(t) = (eta omega_c^2 / 2) t e^{-omega_c t}.
    """

    eta: float
    omega_c: float
    kind: str = field(default="ohmic", init=False)

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.omega_c <= 0:
            raise ValueError("omega_c must be positive")

    def im_chi(self, omega):
        x = np.asarray(omega, dtype=float) / self.omega_c
        out = self.eta * x / (1.0 + x * x) ** 2
        return out if out.ndim else float(out)

    @property
    def has_closed_form(self) -> bool:
        return True

    def re_chi_closed(self, omega):
        x = np.asarray(omega, dtype=float) / self.omega_c
        out = 0.5 * self.eta * (1.0 - x * x) / (1.0 + x * x) ** 2
        return out if out.ndim else float(out)

    def chi(self, omega):
        x = np.asarray(omega, dtype=complex) / self.omega_c
        out = 0.5 * self.eta / (1.0 - 1j * x) ** 2
        return out if out.ndim else complex(out)

    def d_chi(self, omega):
        x = np.asarray(omega, dtype=complex) / self.omega_c
        out = 1j * self.eta / self.omega_c / (1.0 - 1j * x) ** 3
        return out if out.ndim else complex(out)

    def quad_points(self):
        return [0.5 * self.omega_c, self.omega_c, 2.0 * self.omega_c]

    def spectral_extent(self) -> float:
        return 10.0 * self.omega_c

    def min_linewidth(self) -> float:
        return self.omega_c

    @property
    def is_dissipationless(self) -> bool:
        return self.eta == 0.0

    def kernel_params(self):
        return (0.5 * self.eta * self.omega_c**2, self.omega_c, 0.0)


class Tabulated(SusceptibilityModel):
    """Im chi given on a strictly increasing grid starting at omega = 0.

    Interpolated with a monotone (shape-preserving) piecewise cubic, which
    cannot overshoot below the data, so passivity of the samples is inherited.
    Beyond the last sample the response is taken to be zero and an
    ``OutOfTableWarning`` is emitted.
    """

    kind = "tabulated"

    def __init__(self, omega_grid, im_chi_grid):
        omega_grid = np.asarray(omega_grid, dtype=float)
        im_chi_grid = np.asarray(im_chi_grid, dtype=float)
        if omega_grid.ndim != 1 or omega_grid.shape != im_chi_grid.shape:
            raise ValueError("grids must be 1-d and of equal length")
        if len(omega_grid) < 2:
            raise ValueError("need at least two samples")
        if omega_grid[0] != 0.0:
            raise ValueError("grid must start at omega = 0")
        if np.any(np.diff(omega_grid) <= 0):
            raise ValueError("omega grid must be strictly increasing")
        if im_chi_grid[0] != 0.0:
            raise ValueError("Im chi(0) must vanish")
        if np.any(im_chi_grid < 0):
            raise NegativeImChiError("tabulated Im chi has negative samples")
        self._omega = omega_grid
        self._interp = PchipInterpolator(omega_grid, im_chi_grid, extrapolate=False)

    @property
    def omega_max(self) -> float:
        return float(self._omega[-1])

    def im_chi(self, omega):
        w = np.asarray(omega, dtype=float)
        scalar = w.ndim == 0
        w = np.atleast_1d(w)
        out = self._interp(w)
        beyond = w > self.omega_max
        if np.any(beyond):
            warnings.warn(
                f"Im chi requested beyond the table (omega_max={self.omega_max}); "
                "extrapolating as 0",
                OutOfTableWarning,
                stacklevel=2,
            )
        out = np.where(np.isnan(out), 0.0, out)
        return float(out[0]) if scalar else out

    def quad_points(self):
        im = self._interp(self._omega[1:-1])
        order = np.argsort(im)[::-1]
        peaks = self._omega[1:-1][order[:3]]
        return sorted(set(float(p) for p in peaks))

    def spectral_extent(self) -> float:
        return self.omega_max

    def min_linewidth(self) -> float:
        return float(np.min(np.diff(self._omega))) * 4.0

    @property
    def is_dissipationless(self) -> bool:
        return bool(np.all(self._interp(self._omega) == 0.0))


def load_tabulated(path) -> Tabulated:
    """Read a two-column text table: header ``# omega im_chi``, rows of two floats."""
    omegas, ims = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"expected two columns, got {line!r}")
            omegas.append(float(parts[0]))
            ims.append(float(parts[1]))
    return Tabulated(omegas, ims)


def save_tabulated(path, omega_grid, im_chi_grid) -> None:
    """Write the two-column format read by ``load_tabulated``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# omega im_chi\n")
        for w, v in zip(omega_grid, im_chi_grid):
            fh.write(f"{w:.17g} {v:.17g}\n")


def im_chi(model: SusceptibilityModel, omega: float) -> float:
    """Im chi(omega) for omega >= 0."""
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    return float(model.im_chi(omega))


def re_chi_closed(model: SusceptibilityModel, omega: float) -> float:
    """Closed-form Re chi(omega); raises ``NoClosedFormError`` for tabulated models."""
    return float(model.re_chi_closed(omega))


def re_chi_kk(model: SusceptibilityModel, omega: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Re chi(omega) from the dispersion relation

        Re chi(w) = (2/pi) P int_0^inf xi Im chi(xi) / (xi^2 - w^2) dxi.
    """
    if omega < 0:
        raise ValueError("omega must be nonnegative")

    def numerator(xi):
        return xi * float(model.im_chi(xi))

    if omega == 0.0:
        # kernel 1/xi^2; the combination Im chi(xi)/xi is regular at 0
        value, _ = numerics.integrate(
            lambda xi: float(model.im_chi(xi)) / xi,
            (0.0, np.inf),
            spec,
            points=model.quad_points(),
        )
        return (2.0 / math.pi) * value

    window = 0.5 * omega
    pv = numerics.pv_integrate(
        numerator, PVKernelSpec(omega, window), (0.0, np.inf), spec
    )
    return (2.0 / math.pi) * pv


@dataclass(frozen=True)
class CouplingFunction:
    """Frequency-resolved system-reservoir coupling for one mode.

    ``f(omega) = sqrt(2 omega omega_k^2 Im chi(omega) / pi)``; vanishes
    wherever the reservoir does not absorb.
    """

    model: SusceptibilityModel
    mode: ModeContext

    def f_squared(self, omega: float) -> float:
        im = float(self.model.im_chi(omega))
        if im < 0:
            raise NegativeImChiError(f"Im chi({omega}) = {im} < 0")
        return 2.0 * omega * self.mode.omega_k**2 * im / math.pi

    def __call__(self, omega: float) -> float:
        return math.sqrt(self.f_squared(omega))


def coupling_f(coupling: CouplingFunction, omega: float) -> float:
    """Coupling amplitude f(omega) >= 0."""
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    return coupling(omega)


def chi_time(
    coupling: CouplingFunction,
    t: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    route: str = "f_squared",
) -> float:
    """Memory kernel chi(t) for t >= 0.

    ``route='f_squared'`` evaluates (1/omega_k^2) int (sin wt / w) f(w)^2 dw;
    ``route='im_chi'`` evaluates (2/pi) int Im chi(w) sin(wt) dw.  The two are
    the same integral after substituting the coupling definition and must agree.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 0.0
    if route == "f_squared":
        wk2 = coupling.mode.omega_k**2

        def envelope(w):
            return coupling.f_squared(w) / w / wk2

    elif route == "im_chi":
        def envelope(w):
            return (2.0 / math.pi) * float(coupling.model.im_chi(w))

    else:
        raise ValueError(f"unknown route {route!r}")
    value, _ = numerics.oscillatory_integrate(envelope, t, (0.0, np.inf), spec, kind="sin")
    return value


@dataclass(frozen=True)
class KKReport:
    """Point-by-point comparison of the closed-form and dispersion-integral real parts."""

    omega: np.ndarray
    re_closed: np.ndarray
    re_kk: np.ndarray
    abs_dev: np.ndarray
    max_rel_dev: float
    convention: str

    def rows(self):
        return list(zip(self.omega, self.re_closed, self.re_kk, self.abs_dev))


# Dissipation convention used throughout: Im chi = pi f^2 / (2 omega omega_k^2),
# i.e. the coupling enters squared.  Documented in every KK report header.
KK_CONVENTION = (
    "Im chi(omega) = pi * f(omega)^2 / (2 * omega * omega_k^2); "
    "max_rel_dev = max|re_kk - re_closed| / max|re_closed|"
)


def kk_report(
    model: SusceptibilityModel, grid, spec: QuadratureSpec = DEFAULT_SPEC
) -> KKReport:
    """Compare ``re_chi_closed`` with ``re_chi_kk`` on ``grid``.

    The summary deviation is sup-normalized (max absolute deviation over the
    grid divided by the largest |Re chi|), since the pointwise ratio is
    ill-defined where Re chi crosses zero.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if not model.has_closed_form:
        raise NoClosedFormError("kk_report needs a model with a closed-form real part")
    re_closed = np.array([float(model.re_chi_closed(w)) for w in grid])
    re_kk = np.array([re_chi_kk(model, w, spec) for w in grid])
    abs_dev = np.abs(re_kk - re_closed)
    scale = float(np.max(np.abs(re_closed)))
    max_rel = float(np.max(abs_dev) / scale) if scale > 0 else float(np.max(abs_dev))
    return KKReport(grid, re_closed, re_kk, abs_dev, max_rel, KK_CONVENTION)
