"""meanforce: equilibrium thermodynamics, response and correlation functions
of a dissipative scalar field mode coupled to a harmonic-oscillator
continuum, cross-validated by a classical generalized-Langevin simulator."""

__version__ = "0.1.0"

from .bath import (
    CouplingFunction,
    DrudeLorentz,
    ModeContext,
    Ohmic,
    SusceptibilityModel,
    Tabulated,
    load_tabulated,
)
from .correlators import CoherentAmplitude, SeparationGrid
from .langevin import LangevinConfig, run_ensemble
from .numerics import PVKernelSpec, QuadratureSpec
from .response import FanoCoefficients, ResponseEvaluator
from .thermo import ThermalState, ThermoReport, thermo_report, thermo_sweep

__all__ = [
    "__version__",
    "CouplingFunction",
    "DrudeLorentz",
    "ModeContext",
    "Ohmic",
    "SusceptibilityModel",
    "Tabulated",
    "load_tabulated",
    "CoherentAmplitude",
    "SeparationGrid",
    "LangevinConfig",
    "run_ensemble",
    "PVKernelSpec",
    "QuadratureSpec",
    "FanoCoefficients",
    "ResponseEvaluator",
    "ThermalState",
    "ThermoReport",
    "thermo_report",
    "thermo_sweep",
]
