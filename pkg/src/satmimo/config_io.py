"""TOML experiment files.

Schema::

    [system]        # any SystemConfig field; power as power_dBW or P (watts)
    S = 4
    K = 10
    power_dBW = 15

    [sweep]
    name = "power_dBW"   # power_dBW | antennas_per_sat | user_count | kappa_dB | phase_var | scsi_delay_slots
    values = [5, 10, 15, 20, 25]

    [experiment]
    algorithms = ["robust_maxse", "wmmse_scsi_tpc"]
    trials = 20
    seed = 0
    outputs = ["mean_sum_se"]
    eval_realizations = 10
    threads = 1

    [solver]
    max_iters = 30
    eps_obj = 1e-3
"""

from __future__ import annotations

import dataclasses
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .config import ConfigurationError, SolverOptions, SystemConfig, db_to_linear
from .harness import ExperimentSpec

DEFAULT_EXPERIMENT = {
    "sweep": {"name": "power_dBW", "values": [5.0, 10.0, 15.0, 20.0, 25.0]},
    "experiment": {"algorithms": ["robust_maxse", "robust_mmse", "wmmse_scsi_tpc"], "trials": 5},
}


def _fields(cls) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def system_from_table(table: dict) -> SystemConfig:
    table = dict(table)
    if "power_dBW" in table:
        if "P" in table:
            raise ConfigurationError("give either power_dBW or P, not both")
        table["P"] = db_to_linear(float(table.pop("power_dBW")))
    unknown = set(table) - _fields(SystemConfig)
    if unknown:
        raise ConfigurationError(f"unknown [system] keys {sorted(unknown)}")
    return SystemConfig(**table)


def spec_from_dict(doc: dict) -> ExperimentSpec:
    unknown = set(doc) - {"system", "sweep", "experiment", "solver"}
    if unknown:
        raise ConfigurationError(f"unknown tables {sorted(unknown)}")
    base = system_from_table(doc.get("system", {}))
    sweep = {**DEFAULT_EXPERIMENT["sweep"], **doc.get("sweep", {})}
    exp = {**DEFAULT_EXPERIMENT["experiment"], **doc.get("experiment", {})}
    solver_tab = doc.get("solver", {})
    bad = set(solver_tab) - _fields(SolverOptions)
    if bad:
        raise ConfigurationError(f"unknown [solver] keys {sorted(bad)}")
    allowed = {"algorithms", "trials", "seed", "outputs", "eval_realizations", "threads", "slot_seconds"}
    bad = set(exp) - allowed
    if bad:
        raise ConfigurationError(f"unknown [experiment] keys {sorted(bad)}")
    return ExperimentSpec(
        base=base,
        sweep_name=sweep["name"],
        sweep_values=tuple(sweep["values"]),
        solver=SolverOptions(**solver_tab),
        **exp,
    )


def load_spec(path: str | Path | None) -> ExperimentSpec:
    if path is None:
        return spec_from_dict({})
    with open(path, "rb") as fh:
        return spec_from_dict(tomllib.load(fh))
