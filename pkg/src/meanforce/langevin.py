"""Classical generalized-Langevin simulation of the field mode.

Integrates

    phidotdot + omega_k^2 phi - omega_k^2 int_0^t chi(t-s) phi(s) ds = zeta(t)

with stationary Gaussian noise whose one-sided spectrum is the classical
equilibrium value S_zeta(w) = 2 kB T omega_k^2 Im chi(w) / w, i.e. covariance

    <zeta(t) zeta(t')> = kB T omega_k^2 (2/pi) int_0^inf (Im chi(w)/w)
                                                 cos w(t-t') dw.

Noise is synthesized spectrally on an FFT grid; each trajectory draws from
its own counter-based random stream keyed by (seed, trajectory index), so
ensembles are reproducible bit-for-bit regardless of batching or thread
scheduling.  For the shipped closed-form kernels the memory term is
integrated exactly through two auxiliary variables (the kernel solves a
damped second-order ODE); a direct trapezoidal-convolution path is retained
as the generic fallback and as a mutual oracle.

The stationary statistics close the classical fluctuation-dissipation loop:
var(phi) -> kB T G_k(0) and var(phidot) -> kB T (through the commutator
sum rule), both predicted independently by quadrature in ``fdt_predictions``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox
from scipy.linalg import expm

from . import numerics
from .errors import InstabilityError, SpectrumUnresolvableError
from .response import ResponseEvaluator

_BATCH = 128  # fixed batch width: reduction order is per-trajectory anyway
_ENERGY_GUARD_INTERVAL = 200


@dataclass(frozen=True)
class LangevinConfig:
    """Ensemble configuration; ``t_max`` is the full horizon including burn-in."""

    ev: ResponseEvaluator
    T: float
    dt: float
    t_max: float
    n_traj: int
    seed: int
    burn_in: float
    kB: float = 1.0
    acf_max_lag: float | None = None
    acf_points: int = 100

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not (self.t_max > self.burn_in > 0):
            raise ValueError("need t_max > burn_in > 0")
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if self.T <= 0 or self.kB <= 0:
            raise ValueError("temperature and kB must be positive")
        if self.dt * self.ev.mode.omega_k > 0.1 + 1e-12:
            raise ValueError(
                f"dt * omega_k = {self.dt * self.ev.mode.omega_k:.3g} exceeds the "
                "resolution guard 0.1"
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    @property
    def burn_steps(self) -> int:
        return int(round(self.burn_in / self.dt))

    def acf_lag_grid(self):
        """(stride, lag count): lags are stride * dt * [0..L]."""
        max_lag = self.acf_max_lag
        if max_lag is None:
            max_lag = min(
                5.0 / self.ev.model.min_linewidth(),
                0.25 * (self.t_max - self.burn_in),
            )
        stride = max(1, int(round(max_lag / self.acf_points / self.dt)))
        n_lags = int(max_lag / (stride * self.dt)) + 1
        return stride, n_lags


@dataclass(frozen=True)
class NoiseRealization:
    """One synthesized noise series on the step grid, plus its spectrum audit."""

    samples: np.ndarray  # zeta at t_n = n dt, n = 0..n_steps
    dt: float
    traj_index: int
    spectrum_check: dict


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    phi: np.ndarray
    phidot: np.ndarray


@dataclass(frozen=True)
class EnsembleStats:
    """Post-burn-in time-and-ensemble averages with inter-trajectory standard errors."""

    n_traj: int
    mean_phi: float
    var_phi: float
    var_pi: float
    stderr_mean_phi: float | None
    stderr_var_phi: float | None
    stderr_var_pi: float | None
    acf_lags: np.ndarray
    acf_phi: np.ndarray
    acf_stderr: np.ndarray | None
    var_phi_first_half: float
    var_phi_second_half: float
    stderr_var_phi_halves: float | None
    failures: int
    failure_messages: tuple = ()


class _NoisePlan:
    """Shared spectral-synthesis grid for one configuration."""

    def __init__(self, cfg: LangevinConfig):
        model = cfg.ev.model
        linewidth = model.min_linewidth()
        if cfg.t_max < 10.0 / linewidth:
            raise SpectrumUnresolvableError(
                f"t_max = {cfg.t_max} cannot resolve a spectral feature of width "
                f"{linewidth}: need t_max >= {10.0 / linewidth}"
            )
        n = cfg.n_steps + 1
        self.nfft = 1 << int(math.ceil(math.log2(2 * n)))
        self.domega = 2.0 * math.pi / (self.nfft * cfg.dt)
        j = np.arange(1, self.nfft // 2)
        wj = j * self.domega
        wk2 = cfg.ev.mode.omega_k**2
        im = np.asarray(model.im_chi(wj), dtype=float)
        spectrum = 2.0 * cfg.kB * cfg.T * wk2 * im / wj  # one-sided
        self.sigma = np.sqrt(spectrum * self.domega / math.pi)
        self.grid_variance = float(np.sum(self.sigma**2))
        self.target_variance = cfg.kB * cfg.T * wk2 * cfg.ev.chi_static

    def synthesize(self, cfg: LangevinConfig, traj_index: int) -> np.ndarray:
        rng = Generator(Philox(key=[int(cfg.seed) & 0xFFFFFFFFFFFFFFFF, int(traj_index)]))
        ab = rng.standard_normal((2, self.nfft // 2 - 1))
        z = np.zeros(self.nfft // 2 + 1, dtype=complex)
        # irfft(z)[n] = (1/N)[z_0 + 2 sum Re(z_j e^{2 pi i j n/N}) + (-1)^n z_{N/2}]
        z[1 : self.nfft // 2] = (self.nfft / 2.0) * self.sigma * (ab[0] - 1j * ab[1])
        return np.fft.irfft(z, self.nfft)[: cfg.n_steps + 1]


def sample_noise(cfg: LangevinConfig, traj_index: int) -> NoiseRealization:
    """Stationary Gaussian noise on the step grid, deterministic in (seed, traj_index)."""
    plan = _NoisePlan(cfg)
    samples = plan.synthesize(cfg, traj_index)
    check = {
        "target_variance": plan.target_variance,
        "grid_variance": plan.grid_variance,
        "sample_variance": float(np.var(samples)),
    }
    return NoiseRealization(samples=samples, dt=cfg.dt, traj_index=traj_index, spectrum_check=check)


class _AuxPropagator:
    """Exact one-step propagator of the linear extended system.

    For kernels chi(t) = alpha e^{-a t} sin(b t)/b (b^2 may be <= 0) the
    memory force M(t) = omega_k^2 int chi(t-s) phi(s) ds obeys

        Mdotdot + 2 a Mdot + (a^2 + b^2) M = alpha omega_k^2 phi,

    so the state x = (phi, v, M, Mdot) is linear and the homogeneous flow is
    the matrix exponential; only the noise convolution is quadratured
    (trapezoidally), making the scheme globally second order with exact
    internal dynamics.
    """

    def __init__(self, cfg: LangevinConfig):
        params = cfg.ev.model.kernel_params()
        if params is None:
            raise ValueError("model has no closed-form kernel; use the convolution path")
        alpha, a, b2 = params
        wk2 = cfg.ev.mode.omega_k**2
        A = np.array(
            [
                [0.0, 1.0, 0.0, 0.0],
                [-wk2, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [alpha * wk2, 0.0, -(a * a + b2), -2.0 * a],
            ]
        )
        self.E = expm(A * cfg.dt)
        self.b = np.array([0.0, 1.0, 0.0, 0.0])
        self.Eb = self.E @ self.b
        self.dt = cfg.dt

    def step_batch(self, x, zeta_n, zeta_np1):
        # x: (4, B); trapezoidal variation-of-constants for the forcing
        return (
            self.E @ x
            + (0.5 * self.dt) * (np.outer(self.Eb, zeta_n) + np.outer(self.b, zeta_np1))
        )


def _integrate_batch_aux(cfg: LangevinConfig, zeta: np.ndarray, guard_energy: float):
    """Propagate a batch; returns (phis, pis, failed_mask)."""
    prop = _AuxPropagator(cfg)
    n_steps = cfg.n_steps
    nb = zeta.shape[0]
    x = np.zeros((4, nb))
    phis = np.empty((n_steps + 1, nb))
    pis = np.empty((n_steps + 1, nb))
    phis[0] = 0.0
    pis[0] = 0.0
    failed = np.zeros(nb, dtype=bool)
    zt = np.ascontiguousarray(zeta.T)
    wk2 = cfg.ev.mode.omega_k**2
    for n in range(n_steps):
        x = prop.step_batch(x, zt[n], zt[n + 1])
        phis[n + 1] = x[0]
        pis[n + 1] = x[1]
        if (n + 1) % _ENERGY_GUARD_INTERVAL == 0:
            energy = 0.5 * x[1] ** 2 + 0.5 * wk2 * x[0] ** 2
            blown = energy > guard_energy
            if np.any(blown & ~failed):
                failed |= blown
                x[:, failed] = 0.0
    return phis, pis, failed


def integrate_gle(
    cfg: LangevinConfig,
    noise: NoiseRealization,
    method: str = "auto",
    initial: tuple = (0.0, 0.0),
) -> Trajectory:
    """Integrate one trajectory driven by ``noise`` from cold-start initial data.

    ``method``: 'aux' (exact auxiliary-variable memory; closed-form kernels),
    'convolution' (second-order scheme with trapezoidal memory integral), or
    'auto' (aux when available).  Raises ``InstabilityError`` when the mode
    energy exceeds 1e6 kB T.
    """
    if len(noise.samples) < cfg.n_steps + 1:
        raise ValueError("noise series does not cover [0, t_max]")
    if abs(noise.dt - cfg.dt) > 1e-15:
        raise ValueError("noise sampled on a different step grid")
    if method == "auto":
        method = "aux" if cfg.ev.model.kernel_params() is not None else "convolution"

    guard = 1e6 * max(cfg.kB * cfg.T, 1e-12)
    t = np.arange(cfg.n_steps + 1) * cfg.dt
    zeta = np.asarray(noise.samples[: cfg.n_steps + 1], dtype=float)

    if method == "aux":
        prop = _AuxPropagator(cfg)
        x = np.array([initial[0], initial[1], 0.0, 0.0])
        phi = np.empty(cfg.n_steps + 1)
        v = np.empty(cfg.n_steps + 1)
        phi[0], v[0] = x[0], x[1]
        wk2 = cfg.ev.mode.omega_k**2
        for n in range(cfg.n_steps):
            x = prop.E @ x + (0.5 * cfg.dt) * (prop.Eb * zeta[n] + prop.b * zeta[n + 1])
            phi[n + 1] = x[0]
            v[n + 1] = x[1]
            if (n + 1) % _ENERGY_GUARD_INTERVAL == 0:
                if 0.5 * x[1] ** 2 + 0.5 * wk2 * x[0] ** 2 > guard:
                    raise InstabilityError(
                        f"energy exceeded 1e6 kB T at t={t[n + 1]:.4g}", dt=cfg.dt
                    )
        return Trajectory(t=t, phi=phi, phidot=v)

    if method == "convolution":
        return _integrate_convolution(cfg, zeta, t, initial, guard)

    raise ValueError(f"unknown method {method!r}")


def _memory_kernel_on_grid(cfg: LangevinConfig, n_steps: int) -> np.ndarray:
    model = cfg.ev.model
    lags = np.arange(n_steps + 1) * cfg.dt
    if model.kernel_params() is not None:
        return np.array([model.chi_time_closed(tl) for tl in lags])
    from .bath import chi_time  # local import to avoid cycle

    return np.array([chi_time(cfg.ev.coupling, tl, cfg.ev.spec) for tl in lags])


def _integrate_convolution(cfg, zeta, t, initial, guard):
    """Velocity-Verlet with the memory force from a trapezoidal history sum."""
    n_steps = cfg.n_steps
    dt = cfg.dt
    wk2 = cfg.ev.mode.omega_k**2
    chi_lag = _memory_kernel_on_grid(cfg, n_steps)  # chi_lag[0] = chi(0) = 0
    phi = np.empty(n_steps + 1)
    v = np.empty(n_steps + 1)
    phi[0], v[0] = initial

    def memory(n):
        if n == 0:
            return 0.0
        # trapezoid over s in [0, t_n]; the s = t_n endpoint weight hits chi(0) = 0
        acc = np.dot(chi_lag[1 : n + 1][::-1], phi[:n])
        acc -= 0.5 * chi_lag[n] * phi[0]
        return wk2 * dt * acc

    a_n = -wk2 * phi[0] + memory(0) + zeta[0]
    for n in range(n_steps):
        phi[n + 1] = phi[n] + dt * v[n] + 0.5 * dt * dt * a_n
        a_np1 = -wk2 * phi[n + 1] + memory(n + 1) + zeta[n + 1]
        v[n + 1] = v[n] + 0.5 * dt * (a_n + a_np1)
        a_n = a_np1
        if (n + 1) % _ENERGY_GUARD_INTERVAL == 0:
            if 0.5 * v[n + 1] ** 2 + 0.5 * wk2 * phi[n + 1] ** 2 > guard:
                raise InstabilityError(
                    f"energy exceeded 1e6 kB T at t={t[n + 1]:.4g}", dt=cfg.dt
                )
    return Trajectory(t=t, phi=phi, phidot=v)


def _batch_stats(cfg: LangevinConfig, phis, pis, stride, n_lags):
    """Per-trajectory post-burn-in estimates for one batch."""
    p = phis[cfg.burn_steps :]
    vv = pis[cfg.burn_steps :]
    pm = p.mean(axis=0)
    var_p = (p * p).mean(axis=0) - pm * pm
    vm = vv.mean(axis=0)
    var_v = (vv * vv).mean(axis=0) - vm * vm

    half = p.shape[0] // 2
    fh = p[:half]
    sh = p[half:]
    fh_m = fh.mean(axis=0)
    sh_m = sh.mean(axis=0)
    var_fh = (fh * fh).mean(axis=0) - fh_m * fh_m
    var_sh = (sh * sh).mean(axis=0) - sh_m * sh_m

    ps = p[::stride]
    ns = ps.shape[0]
    acf = np.empty((n_lags, p.shape[1]))
    for ell in range(n_lags):
        acf[ell] = (ps[: ns - ell] * ps[ell:]).mean(axis=0) - pm * pm
    return pm, var_p, var_v, var_fh, var_sh, acf


def run_ensemble(cfg: LangevinConfig, threads: int | None = None) -> EnsembleStats:
    """Ensemble statistics over ``n_traj`` independent trajectories.

    Per-trajectory estimates land in arrays indexed by trajectory, and all
    reductions run over those arrays in index order, so results are identical
    for any batch split or thread count.  Failed trajectories (instability)
    are excluded and counted.
    """
    plan = _NoisePlan(cfg)
    stride, n_lags = cfg.acf_lag_grid()
    n = cfg.n_traj
    mean_p = np.full(n, np.nan)
    var_p = np.full(n, np.nan)
    var_v = np.full(n, np.nan)
    var_fh = np.full(n, np.nan)
    var_sh = np.full(n, np.nan)
    acf = np.full((n, n_lags), np.nan)
    failed = np.zeros(n, dtype=bool)
    guard = 1e6 * max(cfg.kB * cfg.T, 1e-12)
    use_aux = cfg.ev.model.kernel_params() is not None

    def do_batch(lo, hi):
        nb = hi - lo
        zeta = np.empty((nb, cfg.n_steps + 1))
        for i in range(nb):
            zeta[i] = plan.synthesize(cfg, lo + i)
        if use_aux:
            phis, pis, batch_failed = _integrate_batch_aux(cfg, zeta, guard)
        else:
            phis = np.empty((cfg.n_steps + 1, nb))
            pis = np.empty((cfg.n_steps + 1, nb))
            batch_failed = np.zeros(nb, dtype=bool)
            for i in range(nb):
                try:
                    traj = _integrate_convolution(
                        cfg, zeta[i], np.arange(cfg.n_steps + 1) * cfg.dt, (0.0, 0.0), guard
                    )
                    phis[:, i] = traj.phi
                    pis[:, i] = traj.phidot
                except InstabilityError:
                    batch_failed[i] = True
                    phis[:, i] = 0.0
                    pis[:, i] = 0.0
        pm, vp, vv_, vfh, vsh, ac = _batch_stats(cfg, phis, pis, stride, n_lags)
        mean_p[lo:hi] = pm
        var_p[lo:hi] = vp
        var_v[lo:hi] = vv_
        var_fh[lo:hi] = vfh
        var_sh[lo:hi] = vsh
        acf[lo:hi] = ac.T
        failed[lo:hi] = batch_failed

    ranges = [(lo, min(lo + _BATCH, n)) for lo in range(0, n, _BATCH)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda r: do_batch(*r), ranges))
    else:
        for r in ranges:
            do_batch(*r)

    ok = ~failed
    n_ok = int(np.sum(ok))
    if n_ok == 0:
        raise InstabilityError("all trajectories failed", dt=cfg.dt)
    n_fail = n - n_ok

    def reduce(values):
        vals = values[ok]
        mean = float(np.mean(vals))
        if n_ok >= 2:
            return mean, float(np.std(vals, ddof=1) / math.sqrt(n_ok))
        return mean, None

    m_phi, se_m = reduce(mean_p)
    v_phi, se_vp = reduce(var_p)
    v_pi, se_vv = reduce(var_v)
    fh, _ = reduce(var_fh)
    sh, se_halves = reduce(var_sh)
    acf_ok = acf[ok]
    acf_mean = acf_ok.mean(axis=0)
    acf_se = (
        np.std(acf_ok, axis=0, ddof=1) / math.sqrt(n_ok) if n_ok >= 2 else None
    )
    if n_ok < 2:
        warnings.warn("n_traj < 2: standard errors unavailable", UserWarning, stacklevel=2)
    lags = np.arange(n_lags) * stride * cfg.dt
    return EnsembleStats(
        n_traj=n,
        mean_phi=m_phi,
        var_phi=v_phi,
        var_pi=v_pi,
        stderr_mean_phi=se_m,
        stderr_var_phi=se_vp,
        stderr_var_pi=se_vv,
        acf_lags=lags,
        acf_phi=acf_mean,
        acf_stderr=acf_se,
        var_phi_first_half=fh,
        var_phi_second_half=sh,
        stderr_var_phi_halves=se_halves,
        failures=n_fail,
    )


def fdt_predictions(ev: ResponseEvaluator, T: float, lags=None, kB: float = 1.0) -> dict:
    """Quadrature predictions for the classical stationary statistics:

        var_phi = (2 kB T/pi) int Im G_k(w)/w dw  (= kB T G_k(0)),
        var_pi  = (2 kB T/pi) int w Im G_k(w) dw  (= kB T by the sum rule),
        acf(l)  = (2 kB T/pi) int (Im G_k(w)/w) cos(w l) dw.
    """
    pref = 2.0 * kB * T / math.pi
    floor = 1e-9 * ev.mode.omega_k  # Im G(w)/w is finite at w = 0

    def inv_w(w):
        w = max(w, floor)
        return ev.greens(w).imag / w

    v_phi, _ = numerics.integrate(
        inv_w, (0.0, np.inf), ev.spec, points=ev.quad_points()
    )
    v_pi, _ = ev.spectral_integrate(lambda w: w)
    out = {"var_phi": pref * v_phi, "var_pi": pref * v_pi}
    if lags is not None:
        def envelope(w):
            w = max(w, floor)
            return ev.greens(w).imag / w

        acf = []
        for lag in lags:
            if lag == 0.0:
                acf.append(pref * v_phi)
                continue
            v, _ = numerics.oscillatory_integrate(
                envelope, float(lag), (0.0, np.inf), ev.spec, kind="cos"
            )
            acf.append(pref * v)
        out["acf_phi"] = np.array(acf)
    return out
