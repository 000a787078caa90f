"""Periodic pseudo-spectral Beris-Edwards Q-tensor / Navier-Stokes simulator."""

import json as _json

from ._besim import (
    BesimError,
    Grid,
    Params,
    State,
    StepConfig,
    cancellation_probe,
    cfl_dt,
    check_config,
    difference_functional,
    energy_breakdown,
    free_energy,
    integrate,
    project_constraints,
    read_checkpoint,
    run,
    serrin_norm,
    serrin_exponents,
    sobolev_energies,
    step,
    twin_run,
    variational_consistency,
    write_checkpoint,
)
from ._besim import summarize as _summarize


def summarize(out_dir):
    """Summary of an output directory as a dict (also written to summary.json)."""
    return _json.loads(_summarize(out_dir))


__all__ = [
    "BesimError",
    "Grid",
    "Params",
    "State",
    "StepConfig",
    "cancellation_probe",
    "cfl_dt",
    "check_config",
    "difference_functional",
    "energy_breakdown",
    "free_energy",
    "integrate",
    "project_constraints",
    "read_checkpoint",
    "run",
    "serrin_norm",
    "serrin_exponents",
    "sobolev_energies",
    "step",
    "summarize",
    "twin_run",
    "variational_consistency",
    "write_checkpoint",
]
