"""Monte-Carlo experiment driver, aggregation and CSV emission.

Each (sweep value, trial) pair is one work unit. Trial ``t`` draws all of its
randomness from ``SeedSequence([seed, t])``, so every sweep value sees the
same underlying random numbers and the output depends only on the ExperimentSpec.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import draw_realization, drift_links, sample_geometry, satellite_directions
from .config import DEFAULT_SOLVER, ConfigurationError, NumericalError, SolverOptions, SystemConfig
from .metrics import LN2, select_stream_count, user_rates
from .precoding import PAPC, TPC, PrecoderSet, scale_into_budget
from .robust import FULL_EVD, LANCZOS, MAX_SE, MMSE, build_psi, robust_precoder, user_null_space
from .stat_csi import build_stat_channel
from .wmmse import wmmse_papc, wmmse_tpc

SWEEPS = ("power_dBW", "antennas_per_sat", "user_count", "kappa_dB", "phase_var", "scsi_delay_slots")

ALGORITHMS = (
    "wmmse_icsi_tpc",
    "wmmse_icsi_papc",
    "wmmse_scsi_tpc",
    "wmmse_scsi_papc",
    "robust_maxse",
    "robust_mmse",
    "robust_maxse_lanczos",
    "robust_single_stream_maxse",
    "robust_single_stream_mmse",
)

# names used in figure legends
LABELS = {
    "wmmse_icsi_tpc": "WMMSE iCSI TPC",
    "wmmse_icsi_papc": "WMMSE iCSI PAPC",
    "wmmse_scsi_tpc": "WMMSE sCSI TPC",
    "wmmse_scsi_papc": "WMMSE sCSI PAPC",
    "robust_maxse": "sCSI Max SE TPC",
    "robust_mmse": "sCSI MMSE TPC",
    "robust_maxse_lanczos": "sCSI Max SE TPC (Lanczos)",
    "robust_single_stream_maxse": "sCSI Max SE TPC single-stream",
    "robust_single_stream_mmse": "sCSI MMSE TPC single-stream",
}

OUTPUTS = ("mean_sum_se", "per_user_cdf", "convergence_trace", "runtime")

CSV_COLUMNS = ("sweep_name", "sweep_value", "algorithm", "trial", "seed",
               "sum_se_bpshz", "min_user_se", "iterations", "wall_time_ms")

SLOT_SECONDS = 0.1
CDF_POINTS = 200


@dataclass(frozen=True)
class ExperimentSpec:
    base: SystemConfig
    sweep_name: str
    sweep_values: tuple
    algorithms: tuple
    trials: int = 1
    outputs: tuple = ("mean_sum_se",)
    seed: int = 0
    eval_realizations: int = 10
    solver: SolverOptions = DEFAULT_SOLVER
    threads: int = 1
    slot_seconds: float = SLOT_SECONDS

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.sweep_name not in SWEEPS:
            raise ValueError(f"unknown sweep {self.sweep_name!r}; choose from {SWEEPS}")
        if not self.sweep_values:
            raise ValueError("sweep needs at least one value")
        if not self.algorithms:
            raise ValueError("algorithm list is empty")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")
        unknown = set(self.outputs) - set(OUTPUTS)
        if unknown:
            raise ValueError(f"unknown outputs {sorted(unknown)}")
        if self.trials < 1 or self.eval_realizations < 1 or self.threads < 1:
            raise ValueError("trials, eval_realizations and threads must be positive")

    @property
    def timing(self) -> bool:
        return "runtime" in self.outputs


@dataclass(frozen=True)
class ResultRow:
    sweep_name: str
    sweep_value: float
    algorithm: str
    trial: int
    seed: int
    sum_se_bpshz: float
    per_user_rates: tuple
    iterations_used: int
    wall_time_ms: float | None = None

    @property
    def min_user_se(self) -> float:
        return min(self.per_user_rates)


@dataclass(frozen=True)
class ErrorRecord:
    sweep_name: str
    sweep_value: float
    trial: int
    message: str


@dataclass
class ExperimentResult:
    rows: list[ResultRow]
    errors: list[ErrorRecord] = field(default_factory=list)
    files: dict = field(default_factory=dict)


def apply_sweep(base: SystemConfig, sweep_name: str, value) -> SystemConfig:
    """Config for one sweep point; raises ConfigurationError for impossible points."""
    if sweep_name == "power_dBW":
        return base.with_power_dBW(float(value))
    if sweep_name == "antennas_per_sat":
        M = int(value)
        if M % base.M_y:
            raise ConfigurationError(f"M={M} is not a multiple of M_y={base.M_y}")
        return base.replace(M_x=M // base.M_y)
    if sweep_name == "user_count":
        return base.replace(K=int(value))
    if sweep_name == "kappa_dB":
        return base.replace(kappa_dB=float(value))
    if sweep_name == "phase_var":
        return base.replace(phase_var=float(value))
    if sweep_name == "scsi_delay_slots":
        return base
    raise ValueError(f"unknown sweep {sweep_name!r}")


@dataclass
class TrialInstance:
    """Everything one trial's algorithms share."""

    config: SystemConfig
    links: list
    stats: list
    g: np.ndarray
    H: list
    d: list[int]
    eval_H: list[list[np.ndarray]]
    lanczos_seed: np.random.SeedSequence


def stream_counts(config: SystemConfig, g: np.ndarray, stats) -> list[int]:
    """Per-user stream count from the eigenvalues of ``Psi_k`` with ``P/K`` each."""
    d_max = config.max_streams
    out = []
    for k in range(config.K):
        Psi = build_psi(user_null_space(g, k).stacked(), stats[k], config.sigma2)
        eigs = np.linalg.eigvalsh(Psi)[::-1][:d_max]
        eigs = eigs[eigs > 1e-12 * max(eigs[0], 0.0)] if eigs[0] > 0 else eigs[:1]
        out.append(select_stream_count(eigs, config.P / config.K) if eigs[0] > 0 else 1)
    return out


def build_instance(config: SystemConfig, seed: int, trial: int, eval_realizations: int = 10,
                   delay_s: float = 0.0) -> TrialInstance:
    geo_ss, design_ss, eval_ss, aux_ss, lanczos_ss = np.random.SeedSequence([seed, trial]).spawn(5)
    links = sample_geometry(config, np.random.default_rng(geo_ss))
    stats = [build_stat_channel(row) for row in links]
    g = satellite_directions(links)
    H = draw_realization(links, np.random.default_rng(design_ss)).H
    aux = np.random.default_rng(aux_ss)
    eval_links = drift_links(config, links, aux, delay_s) if delay_s > 0 else links
    eval_rng = np.random.default_rng(eval_ss)
    eval_H = [draw_realization(eval_links, eval_rng).H for _ in range(eval_realizations)]
    return TrialInstance(config, links, stats, g, H, stream_counts(config, g, stats), eval_H, lanczos_ss)


def _robust(inst: TrialInstance, criterion=MAX_SE, eigensolver=FULL_EVD, single=False):
    cfg = inst.config
    d = [1] * cfg.K if single else inst.d
    # a fresh stream per call keeps results independent of algorithm order
    rng = np.random.default_rng(inst.lanczos_seed) if eigensolver == LANCZOS else None
    return robust_precoder(inst.g, inst.stats, cfg.P, cfg.sigma2, d, criterion, eigensolver, rng)


def design(inst: TrialInstance, algorithm: str, solver: SolverOptions = DEFAULT_SOLVER):
    """Run one algorithm; returns ``(PrecoderSet, WmmseState | None)``."""
    cfg = inst.config
    if algorithm.startswith("robust"):
        criterion = MMSE if algorithm.endswith("mmse") else MAX_SE
        eig = LANCZOS if algorithm.endswith("lanczos") else FULL_EVD
        return _robust(inst, criterion, eig, single="single_stream" in algorithm), None
    init = _robust(inst)
    constraint = PAPC if algorithm.endswith("papc") else TPC
    solver_fn = wmmse_papc if constraint == PAPC else wmmse_tpc
    channels = inst.stats if "_scsi_" in algorithm else inst.H
    state = solver_fn(channels, cfg.P, cfg.sigma2, n_sat=cfg.S,
                      W_init=scale_into_budget(init, cfg.P, constraint), opts=solver)
    return state.W, state


def evaluate(inst: TrialInstance, algorithm: str, W: PrecoderSet) -> np.ndarray:
    """Per-user rates in bits: the design realization for iCSI, the ergodic average otherwise."""
    sigma2 = inst.config.sigma2
    if "_icsi_" in algorithm:
        return user_rates(inst.H, W, sigma2)
    return np.mean([user_rates(H, W, sigma2) for H in inst.eval_H], axis=0)


def _run_unit(spec: ExperimentSpec, value, trial: int):
    try:
        cfg = apply_sweep(spec.base, spec.sweep_name, value)
        delay = float(value) * spec.slot_seconds if spec.sweep_name == "scsi_delay_slots" else 0.0
        inst = build_instance(cfg, spec.seed, trial, spec.eval_realizations, delay)
        rows = []
        for alg in spec.algorithms:
            t0 = time.perf_counter()
            W, state = design(inst, alg, spec.solver)
            elapsed = (time.perf_counter() - t0) * 1e3
            if not W.is_feasible(cfg.P):
                raise NumericalError(f"{alg} returned an infeasible precoder")
            rates = evaluate(inst, alg, W)
            rows.append(ResultRow(
                sweep_name=spec.sweep_name,
                sweep_value=float(value),
                algorithm=alg,
                trial=trial,
                seed=spec.seed,
                sum_se_bpshz=float(np.sum(rates)),
                per_user_rates=tuple(float(r) for r in rates),
                iterations_used=state.iterations if state is not None else 0,
                wall_time_ms=elapsed if spec.timing else None,
            ))
        return rows, None
    except (ConfigurationError, NumericalError) as exc:
        return [], ErrorRecord(spec.sweep_name, float(value), trial, str(exc))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_csv(path: Path, header, records) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for rec in records:
            fh.write(",".join(_fmt(v) for v in rec) + "\n")
    return path


def rows_to_records(rows):
    for r in rows:
        yield (r.sweep_name, float(r.sweep_value), r.algorithm, r.trial, r.seed,
               float(r.sum_se_bpshz), float(r.min_user_se), r.iterations_used,
               None if r.wall_time_ms is None else float(r.wall_time_ms))


def mean_sum_se(rows) -> dict:
    """``{(sweep_value, algorithm): mean sum SE}``."""
    acc: dict = {}
    for r in rows:
        acc.setdefault((r.sweep_value, r.algorithm), []).append(r.sum_se_bpshz)
    return {key: float(np.mean(v)) for key, v in acc.items()}


def performance_gap(better: float, reference: float) -> float:
    """Percentage gain of ``better`` over ``reference``."""
    return (better - reference) / reference * 100.0


@dataclass(frozen=True)
class CdfTable:
    probabilities: np.ndarray
    values: np.ndarray
    p5: float


def nearest_rank(sorted_values: np.ndarray, q: float) -> float:
    n = sorted_values.size
    idx = min(max(math.ceil(q * n) - 1, 0), n - 1)
    return float(sorted_values[idx])


def aggregate_cdf(rows, points: int = CDF_POINTS) -> dict:
    """Pooled per-user SE distribution per algorithm, with its 5% value."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to aggregate")
    pooled: dict = {}
    for r in rows:
        pooled.setdefault(r.algorithm, []).extend(r.per_user_rates)
    probs = np.arange(1, points + 1) / points
    out = {}
    for alg, vals in pooled.items():
        v = np.sort(np.asarray(vals, dtype=float))
        out[alg] = CdfTable(probs, np.array([nearest_rank(v, q) for q in probs]), nearest_rank(v, 0.05))
    return out


def run_experiment(spec: ExperimentSpec, out_dir: str | Path | None = None) -> ExperimentResult:
    units = [(i, v, t) for i, v in enumerate(spec.sweep_values) for t in range(spec.trials)]
    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            results = list(pool.map(lambda u: _run_unit(spec, u[1], u[2]), units))
    else:
        results = [_run_unit(spec, v, t) for _, v, t in units]
    order = {a: j for j, a in enumerate(spec.algorithms)}
    keyed = []
    errors = []
    for (i, _, _), (rows, err) in zip(units, results):
        keyed.extend((i, order[r.algorithm], r.trial, r) for r in rows)
        if err is not None:
            errors.append(err)
    keyed.sort(key=lambda x: x[:3])
    result = ExperimentResult(rows=[x[3] for x in keyed], errors=errors)
    if out_dir is not None:
        result.files = write_outputs(spec, result, Path(out_dir))
    return result


def write_outputs(spec: ExperimentSpec, result: ExperimentResult, out_dir: Path) -> dict:
    files = {"results": write_csv(out_dir / "results.csv", CSV_COLUMNS, rows_to_records(result.rows))}
    if "mean_sum_se" in spec.outputs and result.rows:
        means = mean_sum_se(result.rows)
        recs = [(spec.sweep_name, float(v), a, means[(float(v), a)])
                for v in spec.sweep_values for a in spec.algorithms if (float(v), a) in means]
        files["mean_sum_se"] = write_csv(out_dir / "mean_sum_se.csv",
                                         ("sweep_name", "sweep_value", "algorithm", "mean_sum_se_bpshz"), recs)
    if "per_user_cdf" in spec.outputs and result.rows:
        recs, p5 = [], []
        for v in spec.sweep_values:
            sub = [r for r in result.rows if r.sweep_value == float(v)]
            if not sub:
                continue
            for alg, tab in aggregate_cdf(sub).items():
                p5.append((float(v), alg, tab.p5))
                recs.extend((float(v), alg, float(q), float(x)) for q, x in zip(tab.probabilities, tab.values))
        files["per_user_cdf"] = write_csv(out_dir / "per_user_cdf.csv",
                                          ("sweep_value", "algorithm", "probability", "user_se_bpshz"), recs)
        files["p5"] = write_csv(out_dir / "p5_user_se.csv", ("sweep_value", "algorithm", "p5_user_se_bpshz"), p5)
    if "convergence_trace" in spec.outputs:
        recs = []
        for v in spec.sweep_values:
            try:
                cfg = apply_sweep(spec.base, spec.sweep_name, v)
            except ConfigurationError:
                continue
            inst = build_instance(cfg, spec.seed, 0, 1)
            for alg in spec.algorithms:
                if alg.startswith("wmmse"):
                    for it, obj in enumerate(convergence_trace(alg, inst, spec.solver)):
                        recs.append((float(v), alg, it, obj))
        files["convergence"] = write_csv(out_dir / "convergence.csv",
                                         ("sweep_value", "algorithm", "iteration", "objective_bpshz"), recs)
    if result.errors:
        files["errors"] = write_csv(out_dir / "errors.csv", ("sweep_name", "sweep_value", "trial", "message"),
                                    [(e.sweep_name, e.sweep_value, e.trial, e.message) for e in result.errors])
    return files


def convergence_trace(algorithm: str, inst: TrialInstance, solver: SolverOptions = DEFAULT_SOLVER) -> list[float]:
    """Objective in bits after each iteration; at most ``solver.max_iters`` entries."""
    if not algorithm.startswith("wmmse"):
        raise ValueError("convergence traces exist only for the iterative solvers")
    _, state = design(inst, algorithm, solver)
    return [x / LN2 for x in state.objective_trace]


def power_sweep_values(start_dBW: float, stop_dBW: float, step_dB: float) -> list[float]:
    n = int(round((stop_dBW - start_dBW) / step_dB)) + 1
    return [start_dBW + i * step_dB for i in range(n)]
