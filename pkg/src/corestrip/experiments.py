"""Declarative seeded sweeps over (r, k, n, xi, side) and scaling-law fits.

One sweep row per replicate per grid point; the density is placed at
c_rk - n^-delta (sub), c_rk + n^-delta (super), or c_rk itself (window).
Replicates run concurrently when asked to; every row's seed is a pure
function of (seed0, replicate, grid point), so row content is independent
of scheduling and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .apmodel import sample_ap
from .depth import build_strip_digraph, max_reach
from .errors import DomainError, SchemaError
from .peeling import parallel_strip, slow_strip, write_trace_csv
from .thresholds import core_threshold

__all__ = [
    "ExperimentSpec",
    "SWEEP_COLUMNS",
    "run_sweep",
    "write_sweep_csv",
    "read_sweep_csv",
    "fit_scaling",
    "FitReport",
    "derived_seed",
]

SWEEP_COLUMNS = ["r", "k", "n", "c", "xi", "side", "seed", "s_rounds", "slow_steps",
                 "core_vertices", "core_tuples", "max_reach", "i_max", "runtime_ms",
                 "error"]

_SIDES = ("sub", "super", "window")
_MEASURES = ("s", "max_reach", "core_size", "trace")


@dataclass
class ExperimentSpec:
    r: int
    k: int
    n_list: list
    delta_list: list
    side: str
    replicates: int = 1
    seed0: int = 0
    measure: tuple = ("s",)
    B: int = 10
    sigma: float = 0.1
    K: float = 2.0

    def __post_init__(self):
        if self.side not in _SIDES:
            raise SchemaError(f"side must be one of {_SIDES}, got {self.side!r}")
        bad = [m for m in self.measure if m not in _MEASURES]
        if bad:
            raise SchemaError(f"unknown measure flags {bad}; allowed: {_MEASURES}")
        if self.replicates < 1:
            raise SchemaError("replicates must be >= 1")
        if not self.n_list or not self.delta_list:
            raise SchemaError("n_list and delta_list must be nonempty")
        self.measure = tuple(self.measure)

    @classmethod
    def from_json(cls, path_or_dict) -> "ExperimentSpec":
        if isinstance(path_or_dict, dict):
            data = dict(path_or_dict)
        else:
            with open(path_or_dict) as fh:
                data = json.load(fh)
        known = {"r", "k", "n_list", "delta_list", "side", "replicates", "seed0",
                 "measure", "B", "sigma", "K"}
        unknown = set(data) - known
        if unknown:
            raise SchemaError(f"unknown experiment spec keys: {sorted(unknown)}")
        missing = {"r", "k", "n_list", "delta_list", "side"} - set(data)
        if missing:
            raise SchemaError(f"experiment spec missing keys: {sorted(missing)}")
        return cls(**data)


def derived_seed(seed0: int, replicate: int, r: int, k: int, n: int,
                 delta: float, side: str) -> int:
    """Stable per-row seed: seed0 + replicate + a CRC of the grid point."""
    key = f"{r},{k},{n},{delta!r},{side}".encode()
    return (int(seed0) + int(replicate) + zlib.crc32(key)) % (1 << 63)


def _run_row(task: dict) -> dict:
    row = {col: "" for col in SWEEP_COLUMNS}
    row.update({"r": task["r"], "k": task["k"], "n": task["n"], "c": repr(task["c"]),
                "xi": repr(task["xi"]), "side": task["side"], "seed": task["seed"]})
    t0 = time.perf_counter()
    try:
        n, r, k = task["n"], task["r"], task["k"]
        m = int(math.floor(task["c"] * n + 0.5))
        cfg = sample_ap(n, m, r, task["seed"])
        measure = task["measure"]
        if "s" in measure or "core_size" in measure:
            res = parallel_strip(cfg, k)
            if "s" in measure:
                row["s_rounds"] = res.s
                row["i_max"] = res.i_max
            if "core_size" in measure:
                row["core_vertices"] = res.core.vertex_count
                row["core_tuples"] = res.core.live_tuple_count
        if "max_reach" in measure or "trace" in measure:
            slow = slow_strip(cfg, k)
            row["slow_steps"] = slow[1].total_steps
            if "max_reach" in measure:
                _, best = max_reach(cfg, k, slow=slow)
                row["max_reach"] = best
            if "trace" in measure:
                write_trace_csv(slow[1], task["trace_path"])
    except Exception as exc:  # per-row failures become data, the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    if task["timings"]:
        row["runtime_ms"] = int(1000 * (time.perf_counter() - t0))
    return row


def _build_tasks(spec: ExperimentSpec, out_path, timings: bool) -> list:
    c_rk, _ = core_threshold(spec.r, spec.k)
    tasks = []
    for n in spec.n_list:
        for delta in spec.delta_list:
            xi = float(n) ** (-float(delta))
            if spec.side == "sub":
                c = c_rk - xi
            elif spec.side == "super":
                c = c_rk + xi
            else:
                c, xi = c_rk, 0.0
            if c < 0:
                raise DomainError(f"grid point n={n} delta={delta} gives negative density")
            for rep in range(spec.replicates):
                seed = derived_seed(spec.seed0, rep, spec.r, spec.k, n, delta, spec.side)
                task = {"r": spec.r, "k": spec.k, "n": int(n), "c": c, "xi": xi,
                        "side": spec.side, "seed": seed, "measure": spec.measure,
                        "timings": timings, "index": len(tasks)}
                if "trace" in spec.measure:
                    if out_path is None:
                        raise SchemaError("the trace measure needs an --out path "
                                          "to place trace files next to")
                    stem = Path(out_path)
                    task["trace_path"] = str(stem.with_name(
                        f"{stem.stem}.trace.{len(tasks):04d}.csv"))
                tasks.append(task)
    return tasks


def run_sweep(spec: ExperimentSpec, out_path=None, jobs: int = 1,
              timings: bool = False) -> list:
    """Execute the sweep; returns the rows and writes them as CSV if asked.

    runtime_ms is only filled when timings=True, keeping default output
    byte-identical across reruns.
    """
    tasks = _build_tasks(spec, out_path, timings)
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_row, tasks, chunksize=1))
    else:
        rows = [_run_row(t) for t in tasks]
    # canonical order: task construction order (grid point, then replicate)
    if out_path is not None:
        write_sweep_csv(rows, out_path)
    return rows


def write_sweep_csv(rows: list, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_sweep_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_COLUMNS:
            raise SchemaError(f"{path}: expected sweep columns {SWEEP_COLUMNS}, "
                              f"got {reader.fieldnames}")
        return list(reader)


@dataclass(frozen=True)
class FitReport:
    model: str
    exponent: float       # nan for the fixed-shape model
    prefactor: float
    r_squared: float
    n_points: int         # distinct abscissae used
    y_field: str


_MODELS = ("power_in_xi", "log_over_sqrt_xi", "power_in_n")


def fit_scaling(rows_or_path, model: str, y_field: str = "s_rounds") -> FitReport:
    """Least squares in the coordinates the model implies.

    Rows are grouped by abscissa (xi, or n for power_in_n) and the y means
    regressed: power models fit the log-log slope, log_over_sqrt_xi fits the
    single prefactor of y = A * log(1/xi) / sqrt(xi).
    """
    if model not in _MODELS:
        raise SchemaError(f"unknown model {model!r}; choose from {_MODELS}")
    rows = read_sweep_csv(rows_or_path) if isinstance(rows_or_path, (str, Path)) \
        else list(rows_or_path)
    x_field = "n" if model == "power_in_n" else "xi"
    groups: dict = {}
    for row in rows:
        if row.get("error"):
            continue
        try:
            x = float(row[x_field])
            y = float(row[y_field])
        except (KeyError, TypeError, ValueError):
            continue
        if x > 0 and y > 0:
            groups.setdefault(x, []).append(y)
    if len(groups) < 3:
        raise DomainError(f"fit needs >= 3 distinct positive abscissae, got {len(groups)}")
    xs = np.asarray(sorted(groups))
    ys = np.asarray([np.mean(groups[x]) for x in xs])
    if model in ("power_in_xi", "power_in_n"):
        slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
        fitted = np.exp(intercept) * xs ** slope
        exponent, prefactor = float(slope), float(np.exp(intercept))
    else:
        g = np.log(1.0 / xs) / np.sqrt(xs)
        prefactor = float(np.dot(ys, g) / np.dot(g, g))
        fitted = prefactor * g
        exponent = float("nan")
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitReport(model=model, exponent=exponent, prefactor=prefactor,
                     r_squared=r2, n_points=len(groups), y_field=y_field)
