"""Dirac-Kepler levels with a linearly deformed Heisenberg algebra and a position-dependent mass."""

from .closed_form import (
    SpectrumRecord,
    energy_closed_form,
    energy_exact,
    energy_nonrelativistic,
    energy_nu_zero,
    energy_qt,
    qt_reconciliation,
    relativistic_correction,
)
from .errors import DefDiracError
from .params import Branch, DeformationParams, PhysicalConstants, state_for
from .radial_numeric import SolverOptions, export_wavefunction, self_consistent_energy

__all__ = [
    "Branch",
    "DefDiracError",
    "DeformationParams",
    "PhysicalConstants",
    "SolverOptions",
    "SpectrumRecord",
    "energy_closed_form",
    "energy_exact",
    "energy_nonrelativistic",
    "energy_nu_zero",
    "energy_qt",
    "export_wavefunction",
    "qt_reconciliation",
    "relativistic_correction",
    "self_consistent_energy",
    "state_for",
]
