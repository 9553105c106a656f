"""Quadrature and differentiation primitives shared by the physics modules.

Four operations cover everything the physics layers need:

* ``integrate``              adaptive quadrature, finite or semi-infinite,
* ``pv_integrate``           Cauchy principal values of f(xi)/(xi^2 - w^2),
* ``oscillatory_integrate``  Filon-type integrals of envelope(w) * sin/cos(w t),
* ``differentiate``          central differences with Richardson extrapolation.

Semi-infinite domains are mapped onto (0, 1] with either an algebraic
(default, for power-law tails) or an exponential change of variable before
handing off to QUADPACK.  All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _scipy_integrate

from .errors import (
    DomainEdgeError,
    NonConvergenceError,
    NonFiniteIntegrandError,
    PoleOnBoundaryError,
)

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance and budget settings for the adaptive integrators.

    Defaults are three orders of magnitude tighter than the loosest
    tolerance asserted downstream, so quadrature error never dominates.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    infinite_tail_map: str = "algebraic"  # or "exponential"

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.infinite_tail_map not in ("algebraic", "exponential"):
            raise ValueError(f"unknown tail map {self.infinite_tail_map!r}")


@dataclass(frozen=True)
class PVKernelSpec:
    """Location and symmetric excision half-width for a 1/(xi^2 - w^2) pole."""

    pole_location: float
    window_half_width: float

    def __post_init__(self):
        if self.window_half_width <= 0:
            raise ValueError("window_half_width must be positive")
        if self.pole_location < 0:
            raise ValueError("pole_location must be >= 0")


DEFAULT_SPEC = QuadratureSpec()


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    def wrapped(x):
        y = f(x)
        if not math.isfinite(y):
            raise NonFiniteIntegrandError(f"integrand returned {y!r} at x={x!r}")
        return float(y)

    return wrapped


def _quad(f, a, b, spec, points=None):
    """scipy.quad with the package's error policy applied."""
    out = _scipy_integrate.quad(
        f,
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        points=points,
        full_output=1,
    )
    value, estimate = out[0], out[1]
    if len(out) > 3:  # warning/error message present
        budget = max(spec.abs_tol, spec.rel_tol * abs(value))
        if not math.isfinite(value) or estimate > budget:
            raise NonConvergenceError(
                f"quadrature did not converge on [{a}, {b}]: {out[3]}",
                value=value,
                estimate=estimate,
            )
    return value, estimate


def integrate(f, domain, spec: QuadratureSpec = DEFAULT_SPEC, points=None):
    """Integrate ``f`` over ``domain`` = (a, b), b possibly ``inf``.

    Parameters
    ----------
    f : callable
        Real integrand of one real variable, finite on the open domain.
    domain : tuple
        (a, b); ``b = numpy.inf`` selects the semi-infinite path.
    spec : QuadratureSpec
        Tolerances, subdivision budget and tail map.
    points : sequence, optional
        Interior break points where the integrand has structure
        (finite part only).

    Returns
    -------
    (value, estimate) : tuple of float
        Integral and achieved error estimate, with
        estimate <= max(abs_tol, rel_tol * |value|).
    """
    a, b = float(domain[0]), float(domain[1])
    fc = _checked(f)
    if not math.isinf(b):
        pts = None
        if points is not None:
            pts = sorted(p for p in points if a < p < b) or None
        return _quad(fc, a, b, spec, points=pts)

    # Semi-infinite: integrate [a, cut] directly, then map the tail to (0, 1).
    cut = a
    if points is not None:
        finite_pts = [p for p in points if p > a and math.isfinite(p)]
        cut = max([a] + finite_pts)
    total = 0.0
    err = 0.0
    if cut > a:
        v, e = _quad(fc, a, cut, spec, points=sorted(set(points or [])) or None)
        total += v
        err += e
    if spec.infinite_tail_map == "algebraic":
        # x = cut + u/(1-u), dx = du/(1-u)^2
        def tail(u):
            s = 1.0 - u
            return fc(cut + u / s) / (s * s)
    else:
        # x = cut - log(1-u), dx = du/(1-u)
        def tail(u):
            s = 1.0 - u
            return fc(cut - math.log(s)) / s

    v, e = _quad(tail, 0.0, 1.0, spec)
    total += v
    err += e
    return total, err


def pv_integrate(f, pole: PVKernelSpec, domain, spec: QuadratureSpec = DEFAULT_SPEC):
    """Cauchy principal value of ``int f(xi) / (xi^2 - w^2) dxi`` over ``domain``.

    The pole at ``xi = w`` is excised symmetrically; on the excised strip the
    substitution g(xi) = f(xi)/(xi + w) reduces the kernel to 1/(xi - w) and

        P int_{w-d}^{w+d} g(xi)/(xi - w) dxi = int_0^d [g(w+s) - g(w-s)]/s ds,

    whose integrand is smooth (the s -> 0 limit is 2 g'(w), taken from a short
    local expansion).  ``f`` must be smooth across the window.
    """
    w = pole.pole_location
    d = pole.window_half_width
    a, b = float(domain[0]), float(domain[1])
    fc = _checked(f)

    def kernel(xi):
        return fc(xi) / (xi * xi - w * w)

    inside = a < w < b if math.isinf(b) else a < w < b
    if not inside:
        # no singularity in the domain ([0, inf) never contains -w for w >= 0)
        return integrate(kernel, domain, spec)[0]
    if (w - a) < d or (not math.isinf(b) and (b - w) < d):
        raise PoleOnBoundaryError(
            f"pole at {w} within one window ({d}) of a domain endpoint ({a}, {b})"
        )

    def g(xi):
        return fc(xi) / (xi + w)

    s_floor = d * 1e-7

    def strip_integrand(s):
        s = max(s, s_floor)
        return (g(w + s) - g(w - s)) / s

    total = 0.0
    if w - d > a:
        total += integrate(kernel, (a, w - d), spec)[0]
    total += integrate(strip_integrand, (0.0, d), spec)[0]
    total += integrate(kernel, (w + d, b), spec)[0]
    return total


def oscillatory_integrate(
    envelope,
    phase_frequency: float,
    domain,
    spec: QuadratureSpec = DEFAULT_SPEC,
    kind: str = "sin",
):
    """Integrate ``envelope(w) * sin(w t)`` or ``* cos(w t)`` over ``domain``.

    Uses QUADPACK's Clenshaw-Curtis/Filon oscillatory weights (exact
    polynomial-times-trig panel integration).  ``t = phase_frequency``.
    Semi-infinite domains are accumulated over blocks of whole oscillation
    periods until two consecutive blocks fall below tolerance; the remaining
    envelope tail is bounded and folded into the error estimate.
    """
    if kind not in ("sin", "cos"):
        raise ValueError(f"kind must be 'sin' or 'cos', got {kind!r}")
    a, b = float(domain[0]), float(domain[1])
    t = float(phase_frequency)
    fc = _checked(envelope)

    if t == 0.0:
        if kind == "sin":
            return 0.0, 0.0
        return integrate(fc, domain, spec)

    def weighted(lo, hi):
        out = _scipy_integrate.quad(
            fc,
            lo,
            hi,
            weight=kind,
            wvar=t,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            full_output=1,
        )
        value, estimate = out[0], out[1]
        if len(out) > 3:
            budget = max(spec.abs_tol, spec.rel_tol * abs(value))
            if not math.isfinite(value) or estimate > budget:
                raise NonConvergenceError(
                    f"oscillatory quadrature failed on [{lo}, {hi}]: {out[3]}",
                    value=value,
                    estimate=estimate,
                )
        return value, estimate

    if not math.isinf(b):
        return weighted(a, b)

    period = 2.0 * math.pi / abs(t)
    block = 8.0 * period
    total = 0.0
    err = 0.0
    lo = a
    quiet = 0
    max_blocks = 400
    for _ in range(max_blocks):
        hi = lo + block
        v, e = weighted(lo, hi)
        total += v
        err += e
        lo = hi
        if abs(v) <= 0.5 * max(spec.abs_tol, spec.rel_tol * abs(total)):
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
    else:
        raise NonConvergenceError(
            f"oscillatory tail did not settle within {max_blocks} blocks",
            value=total,
            estimate=err,
        )
    # bound the discarded tail by the absolute envelope mass beyond the cut
    tail_spec = QuadratureSpec(
        rel_tol=1e-5,
        abs_tol=spec.abs_tol,
        max_subdivisions=spec.max_subdivisions,
        infinite_tail_map=spec.infinite_tail_map,
    )
    try:
        tail_bound, _ = integrate(lambda x: abs(fc(x)), (lo, np.inf), tail_spec)
    except NonConvergenceError:
        tail_bound = spec.abs_tol
    return total, err + abs(tail_bound)


def differentiate(f, x, order: int = 1, x_floor: float = 1e-6, domain_min=None):
    """First derivative of ``f`` at ``x`` by Richardson-extrapolated central differences.

    The step is relative, ``h = eps^(1/3) * max(|x|, x_floor)``.  Raises
    ``DomainEdgeError`` when the widest stencil point ``x - h`` would leave
    the domain.

    Returns
    -------
    (derivative, estimate) : tuple of float
    """
    if order != 1:
        raise ValueError("only first derivatives are supported")
    x = float(x)
    h = _EPS ** (1.0 / 3.0) * max(abs(x), x_floor)
    if domain_min is not None and x - h <= domain_min:
        raise DomainEdgeError(
            f"stencil point {x - h} below domain minimum {domain_min}"
        )

    def central(step):
        return (f(x + step) - f(x - step)) / (2.0 * step)

    d1 = central(h)
    d2 = central(0.5 * h)
    value = (4.0 * d2 - d1) / 3.0
    estimate = abs(d2 - d1) / 3.0 + _EPS * abs(value)
    if not math.isfinite(value):
        raise NonFiniteIntegrandError(f"non-finite derivative at x={x}")
    return value, estimate
