"""Seeded Monte Carlo sweep driver, canned experiments, and CSV/JSON output.

Every trial owns an rng derived from (master seed, trial index) only, so
results are bit-identical for any worker count and sweep points share
channel realizations (common random numbers: snr/rsinr monotonicity holds
per trial, and mode comparisons see the same fading).

The per-trial fast path draws just the inter-relay coefficients it reads
(the columns toward the first selected set) instead of the full N x N
matrix; reciprocity holds because both directions read the same entry, and
tests pin the path to the full-matrix operations exactly.
"""

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    MODE_ALTERNATE,
    MODE_FULL_DUPLEX,
    MODE_NON_ALTERNATE,
    NetworkConfig,
    check_mode_feasible,
)
from .errors import ConfigurationError, SingularMatrixError
from .linalg import complex_gaussian
from .analysis import cdf_metric, shape_params
from .selection import (
    _stage1_table_arrays,
    make_beam_configs,
    sample_stage1_metrics,
    sample_til_metrics,
    select_set,
)
from .transmission import zf_from_effective

MODE_CODES = {"ar": MODE_ALTERNATE, "nar": MODE_NON_ALTERNATE, "fd": MODE_FULL_DUPLEX}
CODE_OF_MODE = {v: k for k, v in MODE_CODES.items()}

SWEEP_KINDS = ("til-decay", "rate-vs-snr", "rate-vs-n", "rate-vs-rsinr")
KINDS = SWEEP_KINDS + ("lookup-table", "dist-check")

CSV_HEADER = "sweep_param,value,mode,S,mean_sum_rate,stderr,mean_til_last,discarded,trials,seed"


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent per-trial stream, stable across processes and platforms."""
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, trial)))


@dataclass(frozen=True)
class ExperimentSpec:
    """One canned experiment: base config, sweep axis, modes, and bookkeeping."""

    kind: str
    base: NetworkConfig
    sweep: tuple
    modes: tuple
    trials: int
    seed: int
    out: Path | None = None
    workers: int = 1
    rsinr_db: float = 10.0

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if len(self.sweep) == 0:
            raise ConfigurationError("sweep values must be non-empty")
        if len(self.modes) == 0:
            raise ConfigurationError("modes must be non-empty")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be >= 0, got {self.seed}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.kind == "til-decay" and tuple(self.modes) != (MODE_ALTERNATE,):
            raise ConfigurationError("til-decay only runs in alternate mode")
        for value in self.sweep:
            for mode in self.modes:
                cfg = self.point_config(value)
                check_mode_feasible(cfg, mode)

    @property
    def sweep_param(self) -> str:
        return {
            "til-decay": "n",
            "rate-vs-snr": "snr_db",
            "rate-vs-n": "n",
            "rate-vs-rsinr": "rsinr_db",
        }[self.kind]

    def point_config(self, value) -> NetworkConfig:
        """The network config at one sweep point (may raise ConfigurationError)."""
        if self.sweep_param == "n":
            return replace(self.base, N=int(value))
        if self.sweep_param == "snr_db":
            return replace(self.base, snr=db_to_linear(float(value)))
        return self.base

    def point_rsinr(self, value) -> float:
        if self.kind == "rate-vs-rsinr":
            return db_to_linear(float(value))
        return db_to_linear(self.rsinr_db)


# ---------------------------------------------------------------------------
# Per-trial fast path
# ---------------------------------------------------------------------------

def _hop1_sinrs_from_parts(hop1, v_stack, pi, ir, snr, extra_den=0.0):
    """Hop-1 SINRs for the slots of one relay set.

    ir[k, s] is the inter-relay squared-gain sum at the slot's relay;
    extra_den adds a constant (the residual self-interference ratio).
    """
    kk, ss = pi.shape
    out = np.empty((kk, ss))
    for k in range(kk):
        for s in range(ss):
            gains = np.abs(np.einsum("jmt,jm->jt", v_stack, hop1[pi[k, s]])) ** 2
            desired = snr * gains[k, s]
            out[k, s] = desired / (
                1.0 + snr * (gains.sum() - gains[k, s] + ir[k, s]) + extra_den
            )
    return out


def _hop2_sinrs_from_parts(hop2, u_stack, pi, snr):
    """Hop-2 effective SINRs after ZF for the slots of one relay set."""
    kk, ss = pi.shape
    flat = pi.ravel()
    out = np.empty((kk, ss))
    for k in range(kk):
        eff = u_stack[k].conj().T @ hop2[k, flat].T  # (S, S*K)
        own = eff[:, k * ss : (k + 1) * ss]
        f = zf_from_effective(own)
        others = np.delete(eff, np.s_[k * ss : (k + 1) * ss], axis=1)
        for s in range(ss):
            fs = f[:, s]
            leak = float(np.sum(np.abs(fs.conj() @ others) ** 2))
            out[k, s] = snr / (float(np.sum(np.abs(fs) ** 2)) + snr * leak)
    return out


@dataclass(frozen=True)
class TrialResult:
    sum_rate: float
    til_last: float
    til_mean: float


def run_trial(cfg: NetworkConfig, mode: str, rsinr: float, rng: np.random.Generator) -> TrialResult:
    """One independent block: draw, select, and rate under the given mode.

    Raises SingularMatrixError on a numerically singular ZF matrix; the
    caller discards and counts the trial.
    """
    kk, ss, n = cfg.K, cfg.S, cfg.N
    beams = make_beam_configs(cfg, rng)
    v_stack = np.stack([b.V[:, :ss] for b in beams])
    u_stack = np.stack([b.U for b in beams])
    hop1 = complex_gaussian(rng, (n, kk, cfg.M))
    hop2 = complex_gaussian(rng, (kk, n, cfg.M))
    table1 = _stage1_table_arrays(hop1, hop2, v_stack, u_stack)
    pi1 = select_set(table1, frozenset(), kk, ss)

    if mode == MODE_ALTERNATE:
        members = pi1.ravel()
        cols = complex_gaussian(rng, (n, ss * kk))
        cols[members, np.arange(members.size)] = 0.0  # no self-coefficient
        sums = np.sum(np.abs(cols) ** 2, axis=1)
        table2 = table1 + sums[:, None, None]
        pi2 = select_set(table2, frozenset(int(x) for x in members), kk, ss)
        sel2 = np.array([table2[pi2[k, s], k, s] for k in range(kk) for s in range(ss)])
        ir1 = np.sum(np.abs(cols[pi2.ravel(), :]) ** 2, axis=0).reshape(kk, ss)
        ir2 = sums[pi2]
        rates = np.zeros((kk, ss))
        for pi, ir in ((pi1, ir1), (pi2, ir2)):
            s1 = _hop1_sinrs_from_parts(hop1, v_stack, pi, ir, cfg.snr)
            s2 = _hop2_sinrs_from_parts(hop2, u_stack, pi, cfg.snr)
            rates += 0.5 * np.log2(1.0 + np.minimum(s1, s2))
        rates *= (cfg.L - 1) / cfg.L
        return TrialResult(float(rates.sum()), float(sel2.max()), float(sel2.mean()))

    if mode == MODE_NON_ALTERNATE:
        s1 = _hop1_sinrs_from_parts(hop1, v_stack, pi1, np.zeros((kk, ss)), cfg.snr)
        s2 = _hop2_sinrs_from_parts(hop2, u_stack, pi1, cfg.snr)
        rates = 0.5 * np.log2(1.0 + np.minimum(s1, s2))
        return TrialResult(float(rates.sum()), float("nan"), float("nan"))

    # full-duplex benchmark: one set, simultaneous receive/forward; the
    # relay-side residual after cancellation is the constant rsinr
    s1 = _hop1_sinrs_from_parts(
        hop1, v_stack, pi1, np.zeros((kk, ss)), cfg.snr, extra_den=rsinr
    )
    s2 = _hop2_sinrs_from_parts(hop2, u_stack, pi1, cfg.snr)
    rates = np.log2(1.0 + np.minimum(s1, s2))
    return TrialResult(float(rates.sum()), float("nan"), float("nan"))


def _run_chunk(args):
    cfg, mode, rsinr, seed, lo, hi = args
    rates = np.empty(hi - lo)
    til_last = np.empty(hi - lo)
    til_mean = np.empty(hi - lo)
    ok = np.ones(hi - lo, dtype=bool)
    for i, trial in enumerate(range(lo, hi)):
        try:
            res = run_trial(cfg, mode, rsinr, trial_rng(seed, trial))
            rates[i], til_last[i], til_mean[i] = res.sum_rate, res.til_last, res.til_mean
        except SingularMatrixError:
            rates[i] = til_last[i] = til_mean[i] = np.nan
            ok[i] = False
    return rates, til_last, til_mean, ok


# ---------------------------------------------------------------------------
# Sweeps and aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointStats:
    """Aggregated statistics of one (sweep value, mode) cell."""

    sweep_param: str
    value: float
    mode: str
    S: int
    mean_sum_rate: float
    stderr: float
    mean_til_last: float
    mean_til_selected: float
    discarded: int
    trials: int


@dataclass(frozen=True)
class SweepResult:
    """All cells of one experiment plus reproducibility metadata."""

    spec: ExperimentSpec
    points: list
    version: str = __version__
    wall_time_s: float = 0.0


def _aggregate(spec, value, mode, rates, til_last, til_mean, ok) -> PointStats:
    done = rates[ok]
    n_done = int(ok.sum())
    mean = float(done.mean()) if n_done else float("nan")
    stderr = float(done.std(ddof=1) / np.sqrt(n_done)) if n_done > 1 else 0.0
    tl = til_last[ok]
    tl = tl[np.isfinite(tl)]
    tm = til_mean[ok]
    tm = tm[np.isfinite(tm)]
    return PointStats(
        sweep_param=spec.sweep_param,
        value=value,
        mode=CODE_OF_MODE[mode],
        S=spec.base.S,
        mean_sum_rate=mean,
        stderr=stderr,
        mean_til_last=float(tl.mean()) if tl.size else float("nan"),
        mean_til_selected=float(tm.mean()) if tm.size else float("nan"),
        discarded=spec.trials - n_done,
        trials=spec.trials,
    )


def _sweep_cell(spec: ExperimentSpec, value, mode: str, pool) -> PointStats:
    cfg = spec.point_config(value)
    rsinr = spec.point_rsinr(value)
    n_chunks = min(spec.trials, spec.workers * 4) if spec.workers > 1 else 1
    bounds = np.linspace(0, spec.trials, n_chunks + 1, dtype=int)
    tasks = [
        (cfg, mode, rsinr, spec.seed, int(lo), int(hi))
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    if pool is None:
        parts = [_run_chunk(t) for t in tasks]
    else:
        parts = list(pool.map(_run_chunk, tasks))
    rates = np.concatenate([p[0] for p in parts])
    til_last = np.concatenate([p[1] for p in parts])
    til_mean = np.concatenate([p[2] for p in parts])
    ok = np.concatenate([p[3] for p in parts])
    return _aggregate(spec, value, mode, rates, til_last, til_mean, ok)


def run_experiment(spec: ExperimentSpec) -> SweepResult:
    """Run all sweep cells of spec and write its CSV/JSON outputs if requested."""
    t0 = time.perf_counter()
    pool = None
    try:
        if spec.workers > 1:
            pool = ProcessPoolExecutor(max_workers=spec.workers)
        points = [
            _sweep_cell(spec, value, mode, pool)
            for value in spec.sweep
            for mode in spec.modes
        ]
    finally:
        if pool is not None:
            pool.shutdown()
    result = SweepResult(
        spec=spec, points=points, wall_time_s=time.perf_counter() - t0
    )
    if spec.out is not None:
        write_outputs(result, spec.out)
    return result


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def render_csv(result: SweepResult) -> str:
    """The sweep CSV as a string (stable byte-for-byte under a fixed spec+seed)."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for p in result.points:
        writer.writerow(
            [
                p.sweep_param,
                _fmt(p.value),
                p.mode,
                p.S,
                _fmt(p.mean_sum_rate),
                _fmt(p.stderr),
                _fmt(p.mean_til_last),
                p.discarded,
                p.trials,
                result.spec.seed,
            ]
        )
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


def summary_dict(result: SweepResult) -> dict:
    spec = result.spec
    return {
        "kind": spec.kind,
        "config": {
            "k": spec.base.K,
            "n": spec.base.N,
            "m": spec.base.M,
            "s": spec.base.S,
            "snr": spec.base.snr,
            "l_slots": spec.base.L,
        },
        "sweep_param": spec.sweep_param,
        "sweep": list(spec.sweep),
        "modes": [CODE_OF_MODE[m] for m in spec.modes],
        "trials": spec.trials,
        "seed": spec.seed,
        "workers": spec.workers,
        "rsinr_db": spec.rsinr_db,
        "version": result.version,
        "wall_time_s": result.wall_time_s,
        "points": [
            {
                "sweep_param": p.sweep_param,
                "value": p.value,
                "mode": p.mode,
                "s": p.S,
                "mean_sum_rate": _jsonable(p.mean_sum_rate),
                "stderr": p.stderr,
                "mean_til_last": _jsonable(p.mean_til_last),
                "mean_til_selected": _jsonable(p.mean_til_selected),
                "discarded": p.discarded,
                "trials": p.trials,
            }
            for p in result.points
        ],
    }


def write_outputs(result: SweepResult, out: Path) -> tuple[Path, Path]:
    """Write the CSV and its JSON summary next to it."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render_csv(result))
    json_path = out.with_suffix(".json") if out.suffix != ".json" else out.with_suffix(".summary.json")
    json_path.write_text(json.dumps(summary_dict(result), indent=2) + "\n")
    return out, json_path


# ---------------------------------------------------------------------------
# Distribution check
# ---------------------------------------------------------------------------

def ks_distance(samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance between samples and a scalar CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = np.array([cdf(v) for v in x])
    steps = np.arange(n, dtype=float)
    return float(max(np.max(f - steps / n), np.max((steps + 1.0) / n - f)))


def run_dist_check(K: int, S: int, M: int, samples: int, seed: int) -> dict:
    """KS distances of the two metric distributions against their Gamma shapes."""
    shapes = shape_params(K, S)
    rng = trial_rng(seed, 0)
    m1 = sample_stage1_metrics(K, S, M, samples, rng)
    rng = trial_rng(seed, 1)
    m2 = sample_til_metrics(K, S, M, samples, rng)
    return {
        "k": K,
        "s": S,
        "m": M,
        "samples": samples,
        "seed": seed,
        "shape_stage1": shapes.a1,
        "shape_til": shapes.a2,
        "ks_stage1": ks_distance(m1, lambda v: cdf_metric(v, shapes.a1)),
        "ks_til": ks_distance(m2, lambda v: cdf_metric(v, shapes.a2)),
    }


# ---------------------------------------------------------------------------
# Lookup table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LookupCell:
    n: int
    snr_db: float
    best_mode: str
    best_s: int
    t_max: float


@dataclass(frozen=True)
class LookupTable:
    """Best (mode, S) strategy per (N, snr) cell with regime boundaries."""

    strategies: list
    cells: list
    boundaries: dict = field(default_factory=dict)
    sweeps: dict = field(default_factory=dict)


def build_lookup_table(
    base: NetworkConfig,
    n_values,
    snr_db_values,
    s_candidates,
    modes,
    trials: int,
    seed: int,
    workers: int = 1,
) -> LookupTable:
    """Mean sum-rate argmax over (mode, S) strategies on an (N, snr) grid."""
    for s in s_candidates:
        if s > base.M:
            raise ConfigurationError(f"stream count S={s} exceeds M={base.M}")
    strategies = [(mode, int(s)) for mode in modes for s in s_candidates]
    if not strategies:
        raise ConfigurationError("no strategies to compare")
    sweeps = {}
    for mode, s in strategies:
        for n in n_values:
            cfg = replace(base, S=int(s), N=int(n))
            check_mode_feasible(cfg, mode)
    for mode, s in strategies:
        for n in n_values:
            spec = ExperimentSpec(
                kind="rate-vs-snr",
                base=replace(base, S=int(s), N=int(n)),
                sweep=tuple(snr_db_values),
                modes=(mode,),
                trials=trials,
                seed=seed,
                workers=workers,
            )
            sweeps[(mode, s, int(n))] = run_experiment(spec)
    cells = []
    boundaries = {}
    for n in n_values:
        previous = None
        bounds = []
        for idx, snr_db in enumerate(snr_db_values):
            best = None
            for mode, s in strategies:
                mean = sweeps[(mode, s, int(n))].points[idx].mean_sum_rate
                if best is None or mean > best[2]:
                    best = (mode, s, mean)
            cells.append(
                LookupCell(
                    n=int(n),
                    snr_db=float(snr_db),
                    best_mode=CODE_OF_MODE[best[0]],
                    best_s=best[1],
                    t_max=best[2],
                )
            )
            current = (best[0], best[1])
            if previous is not None and current != previous:
                bounds.append(
                    {
                        "above_snr_db": float(snr_db),
                        "mode": CODE_OF_MODE[current[0]],
                        "s": current[1],
                    }
                )
            previous = current
        boundaries[int(n)] = bounds
    return LookupTable(
        strategies=[(CODE_OF_MODE[m], s) for m, s in strategies],
        cells=cells,
        boundaries=boundaries,
        sweeps=sweeps,
    )


def render_lookup_csv(table: LookupTable, n: int) -> str:
    """One N row of the lookup grid as a sweep CSV (all strategies stacked)."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    keys = sorted(k for k in table.sweeps if k[2] == int(n))
    if not keys:
        raise ConfigurationError(f"lookup table has no sweeps for N={n}")
    for key in keys:
        result = table.sweeps[key]
        for p in result.points:
            writer.writerow(
                [
                    p.sweep_param,
                    _fmt(p.value),
                    p.mode,
                    p.S,
                    _fmt(p.mean_sum_rate),
                    _fmt(p.stderr),
                    _fmt(p.mean_til_last),
                    p.discarded,
                    p.trials,
                    result.spec.seed,
                ]
            )
    return buf.getvalue()


def lookup_summary_dict(table: LookupTable) -> dict:
    return {
        "strategies": [{"mode": m, "s": s} for m, s in table.strategies],
        "cells": [
            {
                "n": c.n,
                "snr_db": c.snr_db,
                "best_mode": c.best_mode,
                "best_s": c.best_s,
                "t_max": c.t_max,
            }
            for c in table.cells
        ],
        "boundaries": {str(n): b for n, b in table.boundaries.items()},
        "version": __version__,
    }


def write_lookup_outputs(table: LookupTable, out: Path) -> list[Path]:
    """Per-N strategy CSVs plus one JSON summary with the argmax grid."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = []
    n_values = sorted({c.n for c in table.cells})
    for n in n_values:
        path = out.with_name(f"{out.stem}_n{n}{out.suffix or '.csv'}")
        path.write_text(render_lookup_csv(table, n))
        written.append(path)
    json_path = out.with_suffix(".json")
    json_path.write_text(json.dumps(lookup_summary_dict(table), indent=2) + "\n")
    written.append(json_path)
    return written
