"""Command-line front end.

Thin client over the service layer: each subcommand parses one INI-style
config file into the corresponding request model, runs it (in-process by
default, or against a running server with ``--server``), writes the
response out as CSV/JSON artifacts, and prints a machine-readable run
report to stdout.

Exit codes: 0 success, 1 threshold failure, 2 config error, 3 numerical
failure.  Emitted files are byte-identical across repeated runs with the
same config and seed; anything run-dependent (wall time) stays in the
stdout report.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from pathlib import Path

import httpx
import pydantic

from . import __version__, fileio
from .errors import ConfigError, MeanforceError, NumericalError
from .service import handlers
from .service import schemas as s

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_LIST_KEYS = {"temperatures", "dt_values", "dr_values"}

_COMMON_SECTIONS = {"model", "mode", "constants", "numerics", "output"}
_ALLOWED_SECTIONS = {
    "kk-check": _COMMON_SECTIONS | {"kk_check"},
    "greens": _COMMON_SECTIONS | {"greens"},
    "thermo": _COMMON_SECTIONS | {"thermo"},
    "correlate": _COMMON_SECTIONS | {"correlate", "coherent"},
    "langevin": _COMMON_SECTIONS | {"langevin"},
}

_ENDPOINTS = {
    "kk-check": ("/v1/kk-check", s.KKCheckRequest, s.KKCheckResponse),
    "greens": ("/v1/greens", s.GreensRequest, s.GreensResponse),
    "thermo": ("/v1/thermo", s.ThermoRequest, s.ThermoResponse),
    "correlate": ("/v1/correlate", s.CorrelateRequest, s.CorrelateResponse),
    "langevin": ("/v1/langevin", s.LangevinRequest, s.LangevinResponse),
}

_HANDLERS = {
    "kk-check": handlers.kk_check,
    "greens": handlers.greens,
    "thermo": handlers.thermo_sweep,
    "correlate": handlers.correlate,
    "langevin": handlers.langevin_ensemble,
}


def _parse_config(path: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    config: dict = {}
    for section in parser.sections():
        config[section] = {}
        for key, raw in parser.items(section):
            raw = raw.strip()
            if key in _LIST_KEYS:
                config[section][key] = [v.strip() for v in raw.split(",") if v.strip()]
            else:
                config[section][key] = raw
    return config


def _load_model_section(section: dict) -> dict:
    section = dict(section)
    path = section.pop("path", None)
    if section.get("kind") == "tabulated" and path is not None:
        from .bath import load_tabulated

        model = load_tabulated(path)
        section["table"] = [
            [float(w), float(v)] for w, v in zip(model._omega, model._interp(model._omega))
        ]
    return section


def _build_request(command: str, config: dict, args) -> pydantic.BaseModel:
    allowed = _ALLOWED_SECTIONS[command]
    unknown = set(config) - allowed
    if unknown:
        raise ConfigError(
            f"unknown config section(s) {sorted(unknown)}; allowed: {sorted(allowed)}"
        )
    if "model" not in config:
        raise ConfigError("missing required [model] section")
    payload: dict = {"model": _load_model_section(config["model"])}
    if "numerics" in config:
        payload["numerics"] = config["numerics"]

    if command == "kk-check":
        kk = dict(config.get("kk_check", {}))
        threshold = kk.pop("threshold", None)
        if kk:
            payload["grid"] = kk
        if threshold is not None:
            payload["threshold"] = threshold
        return s.KKCheckRequest(**payload)

    if "mode" not in config:
        raise ConfigError("missing required [mode] section")
    payload["mode"] = config["mode"]

    if command == "greens":
        if "greens" in config:
            payload["grid"] = config["greens"]
        return s.GreensRequest(**payload)

    if command == "thermo":
        if "constants" in config:
            payload["constants"] = config["constants"]
        th = dict(config.get("thermo", {}))
        if "temperatures" not in th:
            raise ConfigError("missing thermo.temperatures")
        payload["temperatures"] = th.pop("temperatures")
        if th:
            raise ConfigError(f"unknown keys in [thermo]: {sorted(th)}")
        if args.threads:
            payload["threads"] = args.threads
        return s.ThermoRequest(**payload)

    if command == "correlate":
        if "constants" in config:
            payload["constants"] = config["constants"]
        corr = dict(config.get("correlate", {}))
        if "temperature" not in corr:
            raise ConfigError("missing correlate.temperature")
        payload["temperature"] = corr.pop("temperature")
        sign = corr.pop("pi_mean_sign", None)
        if args.pi_mean_sign is not None:
            sign = args.pi_mean_sign
        if sign is not None:
            payload["pi_mean_sign"] = sign
        if not corr:
            raise ConfigError("missing correlate.dt_values (separation grid)")
        payload["grid"] = corr
        if "coherent" in config:
            payload["coherent"] = config["coherent"]
        return s.CorrelateRequest(**payload)

    if command == "langevin":
        lv = dict(config.get("langevin", {}))
        if "kb" not in lv and "constants" in config and "kb" in config["constants"]:
            lv["kb"] = config["constants"]["kb"]
        if args.threads:
            lv["threads"] = args.threads
        return s.LangevinRequest(model=payload["model"], mode=payload["mode"],
                                 numerics=payload.get("numerics", s.NumericsSpec()), **lv)

    raise ConfigError(f"unknown command {command!r}")


def _run_remote(server: str, path: str, request, response_model, transport=None):
    with httpx.Client(base_url=server, transport=transport, timeout=None) as client:
        resp = client.post(path, json=request.model_dump(mode="json"))
    if resp.status_code == 422:
        raise ConfigError(f"server rejected request: {resp.text}")
    if resp.status_code != 200:
        raise NumericalError(f"server error {resp.status_code}: {resp.text}")
    return response_model.model_validate(resp.json())


def _meta(command: str, digest: str) -> dict:
    return {"tool_version": __version__, "command": command, "config_digest": digest}


def _write_artifacts(command: str, resp, outdir: Path, digest: str):
    outdir.mkdir(parents=True, exist_ok=True)
    meta = _meta(command, digest)
    outputs = []
    warnings_list = []

    def csv(name, columns, rows, extra_meta=None):
        path = outdir / name
        fileio.write_csv(path, {**meta, **(extra_meta or {})}, columns, rows)
        outputs.append(path)

    def jsonfile(name, obj):
        path = outdir / name
        fileio.write_json(path, obj)
        outputs.append(path)

    exit_code = EXIT_OK
    if command == "kk-check":
        csv(
            "kk.csv",
            ["omega", "re_closed", "re_kk", "abs_dev"],
            zip(resp.omega, resp.re_closed, resp.re_kk, resp.abs_dev),
            {"convention": resp.convention},
        )
        jsonfile(
            "kk_summary.json",
            {
                "max_rel_dev": resp.max_rel_dev,
                "threshold": resp.threshold,
                "passed": resp.passed,
                "convention": resp.convention,
            },
        )
        if not resp.passed:
            exit_code = EXIT_THRESHOLD
    elif command == "greens":
        csv("greens.csv", ["omega", "re_g", "im_g"], zip(resp.omega, resp.re_g, resp.im_g))
        jsonfile("greens_summary.json", {"sum_rule": resp.sum_rule, "warnings": resp.warnings})
        warnings_list.extend(resp.warnings)
    elif command == "thermo":
        csv(
            "thermo.csv",
            [
                "T",
                "u_star",
                "f_star_closed",
                "f_star_integrated",
                "s_star_closed",
                "s_star_fd",
                "s_star_paper_ln2",
                "e_system",
                "e_interaction",
                "e_reservoir_excess",
                "consistency_dev",
            ],
            (
                (
                    r.T,
                    r.u_star,
                    r.f_star_closed,
                    r.f_star_integrated,
                    r.s_star_closed,
                    r.s_star_fd,
                    r.s_star_paper_ln2,
                    r.e_system,
                    r.e_interaction,
                    r.e_reservoir_excess,
                    r.consistency_dev,
                )
                for r in resp.rows
            ),
            {"omega_k": fileio.fmt_float(resp.omega_k)},
        )
        if resp.failures:
            jsonfile("thermo_failures.json", {"failures": resp.failures})
            warnings_list.extend(f"T={t}: {msg}" for t, msg in resp.failures)
    elif command == "correlate":
        for name, rows in (
            ("corr_phi.csv", resp.corr_phi),
            ("corr_pi.csv", resp.corr_pi),
            ("coherent_phi.csv", resp.coherent_phi),
            ("coherent_pi.csv", resp.coherent_pi),
        ):
            if rows is None:
                continue
            csv(
                name,
                ["dt", "dr", "value", "est_error"],
                zip(rows.dt, rows.dr, rows.value, rows.est_error),
            )
    elif command == "langevin":
        payload = {
            "n_traj": resp.n_traj,
            "failures": resp.failures,
            "mean_phi": resp.mean_phi,
            "var_phi": resp.var_phi,
            "var_pi": resp.var_pi,
            "stderr_mean_phi": resp.stderr_mean_phi,
            "stderr_var_phi": resp.stderr_var_phi,
            "stderr_var_pi": resp.stderr_var_pi,
            "var_phi_first_half": resp.var_phi_first_half,
            "var_phi_second_half": resp.var_phi_second_half,
            "fdt": resp.fdt.model_dump(),
            "acf": [row.model_dump() for row in resp.acf],
            "warnings": resp.warnings,
        }
        jsonfile("ensemble.json", payload)
        warnings_list.extend(resp.warnings)
        for dump in resp.trajectories:
            csv(
                f"traj_{dump.traj_index:04d}.csv",
                ["t", "phi", "phidot"],
                zip(dump.t, dump.phi, dump.phidot),
            )
    return outputs, warnings_list, exit_code


def _run_report(command, digest, wall_time, warnings_list, outputs):
    return {
        "command": command,
        "config_digest": digest,
        "tool_version": __version__,
        "wall_time_s": round(wall_time, 3),
        "warnings": warnings_list,
        "outputs": [
            {"path": str(p), "sha256": fileio.sha256_file(p)} for p in outputs
        ],
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meanforce",
        description="Dissipative-mode thermodynamics, response, correlators and "
        "Langevin cross-checks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the INI run configuration")
        p.add_argument("--out", default=None, help="output directory (default: config output.directory or 'out')")
        p.add_argument("--threads", type=int, default=None, help="worker threads for sweeps/ensembles")
        p.add_argument(
            "--pi-mean-sign",
            choices=["paper", "positive"],
            default=None,
            help="sign convention of the coherent momentum mean term",
        )
        p.add_argument("--server", default=None, help="run against a meanforce server instead of in-process")
        return p

    add_run_command("kk-check", "Kramers-Kronig consistency table for a model")
    add_run_command("greens", "dressed Green's function on a frequency grid plus the sum rule")
    add_run_command("thermo", "mean-force U*, F*, S* and component energies over temperatures")
    add_run_command("correlate", "thermal and coherent correlation tables")
    add_run_command("langevin", "classical generalized-Langevin ensemble with FDT comparison")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def main(argv=None, transport=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_OK

    started = time.monotonic()
    try:
        config = _parse_config(args.config)
        request = _build_request(args.command, config, args)
    except (ConfigError, pydantic.ValidationError, configparser.Error, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    digest = fileio.config_digest(request.model_dump(mode="json"))
    outdir = Path(args.out or config.get("output", {}).get("directory", "out"))

    try:
        if args.server:
            path, _, response_model = _ENDPOINTS[args.command]
            resp = _run_remote(args.server, path, request, response_model, transport)
        else:
            resp = _HANDLERS[args.command](request)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MeanforceError, httpx.HTTPError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    outputs, warnings_list, exit_code = _write_artifacts(
        args.command, resp, outdir, digest
    )
    report = _run_report(
        args.command, digest, time.monotonic() - started, warnings_list, outputs
    )
    print(json.dumps(report, indent=2))
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
