"""HTTP app factory: one POST endpoint per computation, pydantic-validated."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import MeanforceError, NumericalError
from . import handlers
from . import schemas as s


def create_app() -> FastAPI:
    app = FastAPI(
        title="meanforce",
        version=__version__,
        description=(
            "Equilibrium thermodynamics, response and correlation functions of a "
            "dissipative scalar field mode, with a classical generalized-Langevin "
            "cross-check."
        ),
    )

    @app.exception_handler(MeanforceError)
    async def _domain_error(request: Request, exc: MeanforceError):
        status = 500 if isinstance(exc, NumericalError) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "detail": str(exc)},
        )

    @app.get("/v1/health", response_model=s.HealthResponse)
    def health():
        return s.HealthResponse(status="ok", version=__version__)

    @app.post("/v1/kk-check", response_model=s.KKCheckResponse)
    def kk_check(req: s.KKCheckRequest):
        return handlers.kk_check(req)

    @app.post("/v1/greens", response_model=s.GreensResponse)
    def greens(req: s.GreensRequest):
        return handlers.greens(req)

    @app.post("/v1/thermo", response_model=s.ThermoResponse)
    def thermo(req: s.ThermoRequest):
        return handlers.thermo_sweep(req)

    @app.post("/v1/correlate", response_model=s.CorrelateResponse)
    def correlate(req: s.CorrelateRequest):
        return handlers.correlate(req)

    @app.post("/v1/langevin", response_model=s.LangevinResponse)
    def langevin(req: s.LangevinRequest):
        return handlers.langevin_ensemble(req)

    return app
