"""Pure compute handlers: validated request model in, response model out.

The HTTP endpoints and the CLI both call these; no file or network I/O here.
"""

from __future__ import annotations

import warnings

import numpy as np

from .. import bath, correlators, langevin, response, thermo
from ..errors import PoleHitError
from ..numerics import QuadratureSpec
from . import schemas as s


def build_model(spec: s.ModelSpec) -> bath.SusceptibilityModel:
    if spec.kind == "drude_lorentz":
        return bath.DrudeLorentz(eta=spec.eta, omega0=spec.omega0, gamma=spec.gamma)
    if spec.kind == "ohmic":
        return bath.Ohmic(eta=spec.eta, omega_c=spec.omega_c)
    table = np.asarray(spec.table, dtype=float)
    return bath.Tabulated(table[:, 0], table[:, 1])


def build_mode(spec: s.ModeSpec) -> bath.ModeContext:
    return bath.ModeContext(k=spec.k, m=spec.m)


def build_quad_spec(spec: s.NumericsSpec) -> QuadratureSpec:
    return QuadratureSpec(
        rel_tol=spec.rel_tol,
        abs_tol=spec.abs_tol,
        max_subdivisions=spec.max_subdivisions,
    )


def _evaluator(model_spec, mode_spec, numerics_spec) -> response.ResponseEvaluator:
    return response.ResponseEvaluator(
        build_model(model_spec), build_mode(mode_spec), spec=build_quad_spec(numerics_spec)
    )


def kk_check(req: s.KKCheckRequest) -> s.KKCheckResponse:
    model = build_model(req.model)
    spec = build_quad_spec(req.numerics)
    grid = np.linspace(req.grid.omega_min, req.grid.omega_max, req.grid.n_points)
    if grid[0] == 0.0:
        report_grid = grid
    else:
        report_grid = grid
    report = bath.kk_report(model, report_grid, spec)
    return s.KKCheckResponse(
        omega=[float(w) for w in report.omega],
        re_closed=[float(v) for v in report.re_closed],
        re_kk=[float(v) for v in report.re_kk],
        abs_dev=[float(v) for v in report.abs_dev],
        max_rel_dev=report.max_rel_dev,
        threshold=req.threshold,
        passed=report.max_rel_dev <= req.threshold,
        convention=report.convention,
    )


def greens(req: s.GreensRequest) -> s.GreensResponse:
    ev = _evaluator(req.model, req.mode, req.numerics)
    grid = np.linspace(req.grid.omega_min, req.grid.omega_max, req.grid.n_points)
    notes: list[str] = []
    re_g, im_g = [], []
    for w in grid:
        try:
            g = ev.greens(float(w))
            re_g.append(g.real)
            im_g.append(g.imag)
        except PoleHitError as exc:
            notes.append(f"PoleHit: {exc}")
            re_g.append(float("nan"))
            im_g.append(float("nan"))
    if ev.model.is_dissipationless:
        sum_rule = None
        notes.append(
            "sum rule skipped: dissipationless model concentrates the spectral "
            "weight in a delta function at omega_k"
        )
    else:
        sum_rule = ev.commutator_sum_rule()
    return s.GreensResponse(
        omega=[float(w) for w in grid],
        re_g=re_g,
        im_g=im_g,
        sum_rule=sum_rule,
        warnings=notes,
    )


def thermo_sweep(req: s.ThermoRequest) -> s.ThermoResponse:
    ev = _evaluator(req.model, req.mode, req.numerics)
    state = thermo.ThermalState(
        T=req.temperatures[0], hbar=req.constants.hbar, kB=req.constants.kb
    )
    reports, failures = thermo.thermo_sweep(
        ev, req.temperatures, state=state, threads=req.threads
    )
    rows = [
        s.ThermoRow(
            T=r.T,
            u_star=r.U_star,
            f_star_closed=r.F_star_closed,
            f_star_integrated=r.F_star_integrated,
            s_star_closed=r.S_star_closed,
            s_star_fd=r.S_star_fd,
            s_star_paper_ln2=r.S_star_paper_ln2,
            e_system=r.E_system,
            e_interaction=r.E_interaction,
            e_reservoir_excess=r.E_reservoir_excess,
            consistency_dev=r.consistency.max_rel_dev,
        )
        for r in reports
    ]
    return s.ThermoResponse(omega_k=ev.mode.omega_k, rows=rows, failures=failures)


def _rows_from_table(table: correlators.CorrelatorTable) -> s.CorrelatorRows:
    return s.CorrelatorRows(
        dt=[r[0] for r in table.rows],
        dr=[r[1] for r in table.rows],
        value=[r[2] for r in table.rows],
        est_error=[r[3] for r in table.rows],
    )


def _coherent_amplitude(spec: s.CoherentSpec) -> correlators.CoherentAmplitude:
    c = complex(spec.amplitude_re, spec.amplitude_im)
    if spec.kind == "constant":
        return correlators.CoherentAmplitude.constant(c)
    return correlators.CoherentAmplitude.gaussian_packet(
        amplitude=abs(c), center=spec.center, width=spec.width, phase=spec.phase
    )


def correlate(req: s.CorrelateRequest) -> s.CorrelateResponse:
    ev = _evaluator(req.model, req.mode, req.numerics)
    state = thermo.ThermalState(
        T=req.temperature, hbar=req.constants.hbar, kB=req.constants.kb
    )
    grid = correlators.SeparationGrid(
        dt_values=req.grid.dt_values, dr_values=req.grid.dr_values
    )
    out = s.CorrelateResponse(
        corr_phi=_rows_from_table(correlators.thermal_corr_phi(ev, state, grid)),
        corr_pi=_rows_from_table(correlators.thermal_corr_pi(ev, state, grid)),
    )
    if req.coherent is not None:
        amp = _coherent_amplitude(req.coherent)
        out.coherent_phi = _rows_from_table(
            correlators.coherent_corr_phi(ev, amp, grid, hbar=req.constants.hbar)
        )
        out.coherent_pi = _rows_from_table(
            correlators.coherent_corr_pi(
                ev, amp, grid, hbar=req.constants.hbar, mean_sign=req.pi_mean_sign
            )
        )
    return out


def langevin_ensemble(req: s.LangevinRequest) -> s.LangevinResponse:
    ev = _evaluator(req.model, req.mode, req.numerics)
    cfg = langevin.LangevinConfig(
        ev=ev,
        T=req.temperature,
        dt=req.dt,
        t_max=req.t_max,
        n_traj=req.n_traj,
        seed=req.seed,
        burn_in=req.burn_in,
        kB=req.kb,
        acf_max_lag=req.acf_max_lag,
    )
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        stats = langevin.run_ensemble(cfg, threads=req.threads)
    notes.extend(str(w.message) for w in caught)

    preds = langevin.fdt_predictions(ev, req.temperature, lags=stats.acf_lags, kB=req.kb)
    acf_rows = []
    max_abs_z = None
    for i, lag in enumerate(stats.acf_lags):
        se = float(stats.acf_stderr[i]) if stats.acf_stderr is not None else None
        acf_rows.append(
            s.AcfRow(
                lag=float(lag),
                value=float(stats.acf_phi[i]),
                stderr=se,
                predicted=float(preds["acf_phi"][i]),
            )
        )
        if se:
            z = abs(stats.acf_phi[i] - preds["acf_phi"][i]) / se
            max_abs_z = z if max_abs_z is None else max(max_abs_z, z)

    def zscore(value, predicted, stderr):
        if stderr is None or stderr == 0.0:
            return None
        return (value - predicted) / stderr

    z_phi = zscore(stats.var_phi, preds["var_phi"], stats.stderr_var_phi)
    z_pi = zscore(stats.var_pi, preds["var_pi"], stats.stderr_var_pi)
    passed = None
    if z_phi is not None and z_pi is not None and max_abs_z is not None:
        passed = abs(z_phi) <= 3.0 and abs(z_pi) <= 3.0 and max_abs_z <= 3.0
    fdt = s.FdtComparison(
        var_phi_predicted=preds["var_phi"],
        var_pi_predicted=preds["var_pi"],
        var_phi_z=z_phi,
        var_pi_z=z_pi,
        acf_max_abs_z=max_abs_z,
        passed=passed,
    )
    if stats.stderr_var_phi is None:
        notes.append("n_traj < 2: stderr fields are null")

    dumps = []
    for idx in range(min(req.dump_trajectories, req.n_traj)):
        noise = langevin.sample_noise(cfg, idx)
        traj = langevin.integrate_gle(cfg, noise)
        dumps.append(
            s.TrajectoryDump(
                traj_index=idx,
                t=[float(v) for v in traj.t],
                phi=[float(v) for v in traj.phi],
                phidot=[float(v) for v in traj.phidot],
            )
        )

    return s.LangevinResponse(
        n_traj=stats.n_traj,
        failures=stats.failures,
        mean_phi=stats.mean_phi,
        var_phi=stats.var_phi,
        var_pi=stats.var_pi,
        stderr_mean_phi=stats.stderr_mean_phi,
        stderr_var_phi=stats.stderr_var_phi,
        stderr_var_pi=stats.stderr_var_pi,
        acf=acf_rows,
        var_phi_first_half=stats.var_phi_first_half,
        var_phi_second_half=stats.var_phi_second_half,
        fdt=fdt,
        warnings=notes,
        trajectories=dumps,
    )
