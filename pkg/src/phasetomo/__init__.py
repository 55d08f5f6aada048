"""Programmable phase-space tomography circuits and coherent-state preparation.

Submodules
----------
phasespace   dense operators, classical maps and direct distribution oracles
simulator    multi-register statevector simulator and probe readout
circuits     Wigner / Kirkwood / Husimi scattering circuits
coherent     phase-estimation filtering of the kicked Harper map
diagnostics  spectral and fidelity sweeps
"""

from ._backend import BACKEND
from .circuits import (
    husimi_circuit,
    kirkwood_circuit,
    solve_cat_params,
    wigner_line_average,
    wigner_point_circuit,
    wigner_region_average,
)
from .coherent import pe_config, phase_estimation_filter, prepare_coherent, square_state
from .diagnostics import diagnostics_suite
from .phasespace import CatParams, HilbertDim, LineSpec

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CatParams",
    "HilbertDim",
    "LineSpec",
    "diagnostics_suite",
    "husimi_circuit",
    "kirkwood_circuit",
    "pe_config",
    "phase_estimation_filter",
    "prepare_coherent",
    "solve_cat_params",
    "square_state",
    "wigner_line_average",
    "wigner_point_circuit",
    "wigner_region_average",
]
