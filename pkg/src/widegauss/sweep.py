"""Sweep harness: width/depth/family grids, distance rows, rate fits.

A sweep is a Cartesian product of cells (depth x width x family x seed).
Each cell simulates the finite network, samples the matching Gaussian
limit, estimates their Wasserstein-1 distance by exact matching, computes
the matching noise floor and the explicit bound, and emits one CSV row.
Rows are deterministic per (cell, seed); the wallclock column is the only
field allowed to differ between reruns.
"""

from __future__ import annotations

import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .activations import ActivationSpec
from .bounds import LedgerError, bound_chain, ledger_from_config
from .kernel import kernel_recursion, sample_gaussian_fdd
from .network import InputSet, NetworkConfig, sample_fdd
from .ot import MATCHING_CAP, matching_bias_baseline, w1_matching
from .weights import InfiniteMomentError, WeightSpec

__all__ = [
    "CSV_HEADER",
    "SCHEMA_LINE",
    "CellConfig",
    "SweepConfig",
    "SweepRow",
    "RateFit",
    "run_cell",
    "run_sweep",
    "read_rows",
    "fit_rate",
]

SCHEMA_LINE = "# schema_version=1"
CSV_HEADER = (
    "experiment_id,family,activation,L,widths,s,N,seed,"
    "w1_hat,w1_floor,bound_value,bound_certified,wallclock_ms"
)

# Rate fits refuse distances this small: they are matching-noise artifacts.
FIT_CLIP = 1e-12


@dataclass(frozen=True)
class SweepRow:
    experiment_id: str
    family: str
    activation: str
    depth: int
    widths: tuple[int, ...]
    s: int
    n_replicates: int
    seed: int
    w1_hat: float
    w1_floor: float
    bound_value: float
    bound_certified: bool
    wallclock_ms: float

    def to_csv_line(self) -> str:
        return ",".join(
            [
                self.experiment_id,
                self.family,
                self.activation,
                str(self.depth),
                ";".join(str(w) for w in self.widths),
                str(self.s),
                str(self.n_replicates),
                str(self.seed),
                repr(float(self.w1_hat)),
                repr(float(self.w1_floor)),
                repr(float(self.bound_value)),
                "true" if self.bound_certified else "false",
                repr(float(self.wallclock_ms)),
            ]
        )

    @classmethod
    def from_csv_line(cls, line: str) -> "SweepRow":
        parts = line.rstrip("\n").split(",")
        if len(parts) != 13:
            raise ValueError(f"expected 13 CSV fields, got {len(parts)}: {line!r}")
        return cls(
            experiment_id=parts[0],
            family=parts[1],
            activation=parts[2],
            depth=int(parts[3]),
            widths=tuple(int(w) for w in parts[4].split(";")),
            s=int(parts[5]),
            n_replicates=int(parts[6]),
            seed=int(parts[7]),
            w1_hat=float(parts[8]),
            w1_floor=float(parts[9]),
            bound_value=float(parts[10]),
            bound_certified=parts[11] == "true",
            wallclock_ms=float(parts[12]),
        )

    @property
    def scale_width(self) -> int:
        """Common width scale of the cell (first width after the input)."""
        return self.widths[1]


@dataclass(frozen=True)
class CellConfig:
    """One fully resolved sweep cell."""

    network: NetworkConfig
    chi: InputSet
    family: str
    n_replicates: int
    seed: int
    p: int = 3
    bound_mode: str = "certificate"
    matching_cap: int = MATCHING_CAP
    backend: str | None = None
    n_nodes: int = 64
    n_floor_pairs: int = 1

    def __post_init__(self) -> None:
        if self.n_replicates < 1:
            raise ValueError("n_replicates must be positive")
        if self.n_replicates > self.matching_cap:
            raise ValueError(
                f"n_replicates {self.n_replicates} exceeds the matching cap {self.matching_cap}"
            )
        if self.n_floor_pairs < 1:
            raise ValueError("n_floor_pairs must be positive")

    @property
    def experiment_id(self) -> str:
        widths = "x".join(str(w) for w in self.network.widths)
        return f"{self.family}-L{self.network.depth}-n{widths}-seed{self.seed}"


def run_cell(cell: CellConfig) -> SweepRow:
    """Simulate, sample the limit, measure the distance, bound it.

    Deterministic per cell.  The bound columns are NaN/false when the bound
    machinery does not apply (depth 1, or a ledger hypothesis fails); any
    other error propagates with the cell id attached.
    """
    started = time.perf_counter()
    net = cell.network
    try:
        fdd = sample_fdd(net, cell.chi, cell.n_replicates, cell.seed)
        kernels = kernel_recursion(net, cell.chi, n_nodes=cell.n_nodes)
        limit = sample_gaussian_fdd(
            kernels[-1], net.out_width, cell.n_replicates, cell.seed, stream=0
        )
        w1_hat = w1_matching(fdd, limit, cap=cell.matching_cap, backend=cell.backend)
        w1_floor = matching_bias_baseline(
            kernels[-1],
            net.out_width,
            cell.n_replicates,
            seeds=tuple(cell.seed + k for k in range(cell.n_floor_pairs)),
            cap=cell.matching_cap,
            backend=cell.backend,
        )
        if net.depth >= 2:
            try:
                ledger = ledger_from_config(net, cell.chi, cell.p)
                report = bound_chain(
                    net, cell.chi, ledger, mode=cell.bound_mode, n_nodes=cell.n_nodes
                )
                bound_value = report.w1_bound
                certified = report.certified
            except (LedgerError, InfiniteMomentError) as exc:
                print(
                    f"[{cell.experiment_id}] bound skipped: {exc}", file=sys.stderr
                )
                bound_value, certified = math.nan, False
        else:
            bound_value, certified = math.nan, False
    except Exception as exc:
        raise RuntimeError(f"cell {cell.experiment_id} failed: {exc}") from exc
    elapsed_ms = (time.perf_counter() - started) * 1e3
    return SweepRow(
        experiment_id=cell.experiment_id,
        family=cell.family,
        activation=net.activation.kind,
        depth=net.depth,
        widths=net.widths,
        s=cell.chi.s,
        n_replicates=cell.n_replicates,
        seed=cell.seed,
        w1_hat=w1_hat,
        w1_floor=w1_floor,
        bound_value=bound_value,
        bound_certified=certified,
        wallclock_ms=elapsed_ms,
    )


def _error_row(cell: CellConfig, exc: Exception) -> SweepRow:
    print(f"[{cell.experiment_id}] error: {exc}", file=sys.stderr)
    return SweepRow(
        experiment_id=cell.experiment_id,
        family=cell.family,
        activation=cell.network.activation.kind,
        depth=cell.network.depth,
        widths=cell.network.widths,
        s=cell.chi.s,
        n_replicates=cell.n_replicates,
        seed=cell.seed,
        w1_hat=math.nan,
        w1_floor=math.nan,
        bound_value=math.nan,
        bound_certified=False,
        wallclock_ms=math.nan,
    )


@dataclass(frozen=True)
class SweepConfig:
    """Grid specification; see ``from_dict`` for the JSON key set."""

    chi: InputSet
    depths: tuple[int, ...]
    widths: tuple
    families: tuple[str, ...]
    activation: ActivationSpec
    n_replicates: int
    seeds: tuple[int, ...]
    out_width: int = 1
    c_w: float = 1.0
    nu: float | None = None
    p: int = 3
    bound_mode: str = "certificate"
    matching_cap: int = MATCHING_CAP
    backend: str | None = None
    n_nodes: int = 64
    n_floor_pairs: int = 1

    _KEYS = {
        "schema_version",
        "inputs",
        "depths",
        "widths",
        "families",
        "activation",
        "n_replicates",
        "seeds",
        "out_width",
        "c_w",
        "nu",
        "p",
        "bound_mode",
        "matching_cap",
        "backend",
        "n_nodes",
        "n_floor_pairs",
    }

    def __post_init__(self) -> None:
        object.__setattr__(self, "depths", tuple(int(d) for d in self.depths))
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        widths = tuple(
            tuple(int(v) for v in w) if isinstance(w, (list, tuple)) else int(w)
            for w in self.widths
        )
        object.__setattr__(self, "widths", widths)
        if not (self.depths and self.widths and self.families and self.seeds):
            raise ValueError("depths, widths, families and seeds must be nonempty")
        if any(d < 1 for d in self.depths):
            raise ValueError("depths must be positive")
        if self.n_replicates > self.matching_cap:
            raise ValueError(
                f"n_replicates {self.n_replicates} exceeds the matching cap {self.matching_cap}"
            )
        for w in widths:
            if isinstance(w, tuple):
                bad = [d for d in self.depths if d >= 2 and len(w) != d - 1]
                if bad or any(d == 1 for d in self.depths):
                    raise ValueError(
                        f"per-layer width vector {w} does not fit depths {self.depths}"
                    )

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str = ".") -> "SweepConfig":
        unknown = set(raw) - cls._KEYS
        if unknown:
            raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
        if raw.get("schema_version", 1) != 1:
            raise ValueError("unsupported sweep config schema_version")
        missing = {"inputs", "depths", "widths", "families", "activation",
                   "n_replicates", "seeds"} - set(raw)
        if missing:
            raise ValueError(f"missing sweep config keys: {sorted(missing)}")
        inputs = raw["inputs"]
        if isinstance(inputs, str):
            chi = InputSet.from_csv(os.path.join(base_dir, inputs))
        else:
            chi = InputSet(np.asarray(inputs, dtype=np.float64))
        act = raw["activation"]
        activation = (
            ActivationSpec(kind=act) if isinstance(act, str) else ActivationSpec.from_dict(act)
        )
        return cls(
            chi=chi,
            depths=raw["depths"],
            widths=raw["widths"],
            families=raw["families"],
            activation=activation,
            n_replicates=int(raw["n_replicates"]),
            seeds=raw["seeds"],
            out_width=int(raw.get("out_width", 1)),
            c_w=float(raw.get("c_w", 1.0)),
            nu=raw.get("nu"),
            p=int(raw.get("p", 3)),
            bound_mode=raw.get("bound_mode", "certificate"),
            matching_cap=int(raw.get("matching_cap", MATCHING_CAP)),
            backend=raw.get("backend"),
            n_nodes=int(raw.get("n_nodes", 64)),
            n_floor_pairs=int(raw.get("n_floor_pairs", 1)),
        )

    @classmethod
    def from_json(cls, path: str) -> "SweepConfig":
        with open(path) as fh:
            raw = json.load(fh)
        return cls.from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))

    def _widths_vector(self, depth: int, width) -> tuple[int, ...]:
        n0 = self.chi.n0
        if depth == 1:
            return (n0, int(width))
        hidden = tuple(width) if isinstance(width, tuple) else (int(width),) * (depth - 1)
        return (n0,) + hidden + (self.out_width,)

    def cells(self) -> list[CellConfig]:
        """Grid cells in deterministic config order."""
        out = []
        for depth in self.depths:
            for width in self.widths:
                vector = self._widths_vector(depth, width)
                for family in self.families:
                    spec = WeightSpec(
                        family=family,
                        c_w=self.c_w,
                        nu=self.nu if family == "student_t" else None,
                    )
                    net = NetworkConfig(
                        widths=vector,
                        weight_specs=(spec,) * depth,
                        activation=self.activation,
                    )
                    for seed in self.seeds:
                        out.append(
                            CellConfig(
                                network=net,
                                chi=self.chi,
                                family=family,
                                n_replicates=self.n_replicates,
                                seed=seed,
                                p=self.p,
                                bound_mode=self.bound_mode,
                                matching_cap=self.matching_cap,
                                backend=self.backend,
                                n_nodes=self.n_nodes,
                                n_floor_pairs=self.n_floor_pairs,
                            )
                        )
        return out


def read_rows(path: str) -> list[SweepRow]:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines or lines[0] != SCHEMA_LINE:
        raise ValueError(f"{path} does not start with '{SCHEMA_LINE}'")
    if len(lines) < 2 or lines[1] != CSV_HEADER:
        raise ValueError(f"{path} header does not match the frozen schema")
    return [SweepRow.from_csv_line(ln) for ln in lines[2:]]


def run_sweep(config: SweepConfig, out_path: str, n_jobs: int = 1) -> list[SweepRow]:
    """Run the grid and stream rows to ``out_path``; returns all rows.

    Resumable: cells whose experiment_id already appears in the output file
    are skipped and their stored rows returned in place.  Per-cell failures
    become NaN rows (reported on stderr) and the sweep continues.  Cells may
    run concurrently; emission order always follows config order.
    """
    done: dict[str, SweepRow] = {}
    if os.path.exists(out_path) and os.path.getsize(out_path) > 0:
        done = {row.experiment_id: row for row in read_rows(out_path)}
    cells = config.cells()
    fresh = [c for c in cells if c.experiment_id not in done]

    def _safe(cell: CellConfig) -> SweepRow:
        try:
            return run_cell(cell)
        except Exception as exc:
            return _error_row(cell, exc)

    results: dict[str, SweepRow] = {}
    if n_jobs > 1 and len(fresh) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            for cell, row in zip(fresh, pool.map(_safe, fresh)):
                results[cell.experiment_id] = row
    else:
        for cell in fresh:
            results[cell.experiment_id] = _safe(cell)

    new_file = not done
    mode = "w" if new_file else "a"
    rows: list[SweepRow] = []
    with open(out_path, mode) as fh:
        if new_file:
            fh.write(SCHEMA_LINE + "\n")
            fh.write(CSV_HEADER + "\n")
        for cell in cells:
            if cell.experiment_id in done:
                rows.append(done[cell.experiment_id])
                continue
            row = results[cell.experiment_id]
            fh.write(row.to_csv_line() + "\n")
            rows.append(row)
    return rows


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    floor_corrected: bool

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "floor_corrected": self.floor_corrected,
        }


def fit_rate(rows, floor_corrected: bool = True, clip: float = FIT_CLIP) -> RateFit:
    """Least-squares slope of log(w1) against log(width).

    ``rows`` must come from a single (depth, family) slice; per-width values
    are seed averages of (optionally floor-subtracted) distances, clipped
    below at ``clip``.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to fit")
    keys = {(row.depth, row.family) for row in rows}
    if len(keys) > 1:
        raise ValueError(f"rows mix several (depth, family) slices: {sorted(keys)}")
    by_width: dict[int, list[float]] = {}
    for row in rows:
        value = row.w1_hat - row.w1_floor if floor_corrected else row.w1_hat
        if math.isnan(value):
            raise ValueError(f"row {row.experiment_id} has no usable distance")
        by_width.setdefault(row.scale_width, []).append(max(value, clip))
    if len(by_width) < 3:
        raise ValueError(f"need at least 3 distinct widths, got {len(by_width)}")
    widths = np.array(sorted(by_width), dtype=np.float64)
    means = np.array([np.mean(by_width[int(w)]) for w in widths])
    if np.all(means <= clip):
        raise ValueError("all distances at or below the clip floor; nothing to fit")
    log_w = np.log(widths)
    log_v = np.log(means)
    design = np.column_stack([log_w, np.ones_like(log_w)])
    coef, *_ = np.linalg.lstsq(design, log_v, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((log_v - fitted) ** 2))
    ss_tot = float(np.sum((log_v - np.mean(log_v)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        r_squared=r_squared,
        n_points=len(widths),
        floor_corrected=floor_corrected,
    )
