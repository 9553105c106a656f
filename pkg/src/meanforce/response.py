"""Dressed mode response: dispersion function, Green's function, and the
coefficients of the exact normal-mode (continuum-diagonalizing) transformation.

For a mode of frequency omega_k coupled to a passive reservoir chi(omega),

    Lambda_k(omega) = omega_k^2 [1 - chi(omega)] - omega^2,
    G_k(omega)      = -1 / (omega^2 - omega_k^2 [1 - chi(omega)]) = 1 / Lambda_k,

so Im G_k(omega) = (pi f^2 / 2 omega) |G_k|^2 >= 0 for omega > 0 and the
canonical commutator fixes the sum rule (2/pi) int_0^inf omega Im G_k = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import numerics
from .bath import CouplingFunction, ModeContext, SusceptibilityModel, re_chi_kk
from .errors import PoleHitError
from .numerics import DEFAULT_SPEC, PVKernelSpec, QuadratureSpec


@dataclass(frozen=True)
class FanoCoefficients:
    """Coefficients expressing the diagonal annihilation operator in the
    original canonical variables at one frequency.

    ``f4`` is kept split: a delta-function coefficient (equal to ``h4``) plus a
    smooth kernel of the second frequency; the delta part must never be
    sampled onto a grid.
    """

    omega: float
    h2: float
    h4: float
    f2: complex
    f4_delta: float
    f4_smooth: Callable[[float], complex]


class ResponseEvaluator:
    """Evaluates Lambda_k, G_k and the diagonalization coefficients for a
    (susceptibility model, mode) pair.

    ``epsilon`` regularizes only the strictly dissipationless limit, where the
    free pole at omega_k is a genuine delta function: evaluating there raises
    ``PoleHitError`` instead of returning a meaningless large number.
    """

    def __init__(
        self,
        model: SusceptibilityModel,
        mode: ModeContext,
        epsilon: float = 1e-9,
        spec: QuadratureSpec = DEFAULT_SPEC,
    ):
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.model = model
        self.mode = mode
        self.epsilon = epsilon
        self.spec = spec
        self.coupling = CouplingFunction(model, mode)
        self._chi_static = model.chi_static(spec)
        if self._chi_static >= 1.0:
            raise ValueError(
                f"static instability: chi(0) = {self._chi_static} >= 1 "
                "(mode frequency would be imaginary)"
            )

    # -- response functions -------------------------------------------------

    @property
    def chi_static(self) -> float:
        return self._chi_static

    @property
    def omega_tilde(self) -> float:
        """Statically dressed mode frequency, omega_k sqrt(1 - chi(0))."""
        return self.mode.omega_k * math.sqrt(1.0 - self._chi_static)

    def chi(self, omega: float) -> complex:
        """chi(omega) on the real axis with its physical (retarded) imaginary part."""
        if self.model.has_closed_form:
            return complex(self.model.chi(omega))
        re = re_chi_kk(self.model, omega, self.spec)
        return complex(re, float(self.model.im_chi(omega)))

    def lambda_k(self, omega: float, method: str = "direct") -> complex:
        """Dispersion function Lambda_k(omega); its inverse is the Green's function.

        ``method='direct'`` assembles omega_k^2 [1 - chi] - omega^2 from the
        model (machine-precision algebra); ``method='spectral'`` evaluates the
        defining principal-value integral over the coupling,

            Lambda = (omega_k^2 - omega^2) - P int f(xi)^2/(xi^2 - omega^2) dxi
                     - i pi f(omega)^2 / (2 omega),

        and must agree with 'direct' to quadrature accuracy.
        """
        if omega <= 0:
            raise ValueError("omega must be positive")
        wk2 = self.mode.omega_k**2
        if method == "direct":
            return wk2 * (1.0 - self.chi(omega)) - omega * omega
        if method == "spectral":
            window = 0.5 * omega
            pv = numerics.pv_integrate(
                self.coupling.f_squared,
                PVKernelSpec(omega, window),
                (0.0, np.inf),
                self.spec,
            )
            im = -math.pi * self.coupling.f_squared(omega) / (2.0 * omega)
            return complex(wk2 - omega * omega - pv, im)
        raise ValueError(f"unknown method {method!r}")

    def greens(self, omega: float) -> complex:
        """Retarded Green's function G_k(omega) = -1/(omega^2 - omega_k^2 [1 - chi]).

        Im G_k >= 0 for omega > 0 on passive models.  Raises ``PoleHitError``
        at an undamped pole (Im chi = 0 there): callers must treat that limit
        as the delta-function contribution analytically.
        """
        wk2 = self.mode.omega_k**2
        lam = wk2 * (1.0 - self.chi(omega)) - omega * omega
        if lam.imag == 0.0 and abs(lam) < self.epsilon * wk2:
            raise PoleHitError(
                f"undamped pole at omega={omega} (|denominator| < epsilon * omega_k^2)",
                omega=omega,
            )
        return 1.0 / lam

    def im_greens(self, omega: float) -> float:
        return self.greens(omega).imag

    # -- quadrature helpers --------------------------------------------------

    def resonance_frequencies(self, omega_max: float | None = None):
        """Zeros of Re Lambda_k on (0, omega_max): locations of the dressed peaks."""
        wk = self.mode.omega_k
        hi = omega_max or 4.0 * max(wk, self.model.spectral_extent())

        def re_lambda(w):
            return (self.lambda_k(w)).real

        grid = np.linspace(1e-3 * wk, hi, 400)
        vals = np.array([re_lambda(w) for w in grid])
        roots = []
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                roots.append(float(grid[i]))
            elif vals[i] * vals[i + 1] < 0:
                roots.append(float(brentq(re_lambda, grid[i], grid[i + 1])))
        return roots

    def quad_points(self):
        """Break points for adaptive quadrature over spectral integrands."""
        pts = list(self.model.quad_points())
        pts.append(self.mode.omega_k)
        pts.extend(self.resonance_frequencies())
        return sorted(set(pts))

    def spectral_integrate(self, weight: Callable[[float], float]):
        """int_0^inf weight(omega) * Im G_k(omega) domega with resonance-aware panels."""
        def integrand(w):
            return weight(w) * self.greens(w).imag

        return numerics.integrate(
            integrand, (0.0, np.inf), self.spec, points=self.quad_points()
        )

    # -- derived quantities ---------------------------------------------------

    def commutator_sum_rule(self) -> float:
        """(2/pi) int_0^inf omega Im G_k(omega) domega; canonical value 1."""
        value, _ = self.spectral_integrate(lambda w: w)
        return (2.0 / math.pi) * value

    def fano_coefficients(self, omega: float, hbar: float = 1.0) -> FanoCoefficients:
        """Transformation coefficients at frequency omega.

        h4 = sqrt(hbar / 2 omega), h2 = 0 (consistency of the diagonalization),
        f2 = f(omega) h4 G_k(omega); the smooth part of f4 is
        (f(w')/2w') [1/(w' - omega - i0+) + 1/(w' + omega)] f2, defined for
        w' != omega (the coincident point carries the delta term).
        """
        if omega <= 0:
            raise ValueError("omega must be positive")
        h4 = math.sqrt(hbar / (2.0 * omega))
        f2 = self.coupling(omega) * h4 * self.greens(omega)

        def f4_smooth(omega_prime: float) -> complex:
            if omega_prime == omega:
                raise ValueError(
                    "f4 at coincident frequencies is the delta part; "
                    "use f4_delta instead"
                )
            fp = self.coupling(omega_prime)
            return (
                fp
                / (2.0 * omega_prime)
                * (1.0 / (omega_prime - omega) + 1.0 / (omega_prime + omega))
                * f2
            )

        return FanoCoefficients(
            omega=omega, h2=0.0, h4=h4, f2=f2, f4_delta=h4, f4_smooth=f4_smooth
        )

    def mode_amplitude_phi(self, omega: float, hbar: float = 1.0) -> complex:
        """c-number field amplitude multiplying the diagonal annihilation operator:
        2 pi sqrt(hbar/2 omega) f(omega) G_k(omega).
        """
        if omega <= 0:
            raise ValueError("omega must be positive")
        return (
            2.0
            * math.pi
            * math.sqrt(hbar / (2.0 * omega))
            * self.coupling(omega)
            * self.greens(omega)
        )

    def mode_amplitude_pi(self, omega: float, hbar: float = 1.0) -> complex:
        """Conjugate-momentum amplitude, -i omega times the field amplitude."""
        return -1j * omega * self.mode_amplitude_phi(omega, hbar)


# module-level aliases matching the operation names

def lambda_k(ev: ResponseEvaluator, omega: float, method: str = "direct") -> complex:
    return ev.lambda_k(omega, method)


def greens(ev: ResponseEvaluator, omega: float) -> complex:
    return ev.greens(omega)


def commutator_sum_rule(ev: ResponseEvaluator) -> float:
    return ev.commutator_sum_rule()


def fano_coefficients(ev: ResponseEvaluator, omega: float, hbar: float = 1.0):
    return ev.fano_coefficients(omega, hbar)


def mode_amplitude_phi(ev: ResponseEvaluator, omega: float, hbar: float = 1.0):
    return ev.mode_amplitude_phi(omega, hbar)
