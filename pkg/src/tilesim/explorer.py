"""Exhaustive design-space exploration over buffer sizes and bandwidths.

Eight parameters vary: the four SRAM sizes (WBuf, IBuf, OBuf, VMem) and the
four off-chip bandwidths.  A point is feasible when the size sum and the
bandwidth sum each land within the +/-deviation window around their budgets
and every layer of the workload has a feasible tiling.  Tilings are
regenerated per candidate point since buffer sizes change what fits.
"""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple, Union

from . import simulate
from .specs import HardwareConfig, LayerSpec, SpecError
from .tiler import TilingInfeasibleError

SIZE_PARAMS = ("wbuf", "ibuf", "obuf", "vmem")
BW_PARAMS = ("bw_w", "bw_i", "bw_o", "bw_v")
DSE_PARAMS = SIZE_PARAMS + BW_PARAMS

# Spanning the optima reported for 16x16 through 128x128 arrays.
DEFAULT_SIZE_GRID_KB = (32, 64, 128, 256, 512, 1024, 2048)
DEFAULT_BW_GRID = (32, 64, 128, 256, 512, 1024, 2048)


@dataclass(frozen=True)
class DseConfig:
    """Budgets, deviation window, and candidate grids for one exploration."""

    sram_budget_bytes: int
    bw_budget_bits_per_cycle: int
    deviation_fraction: float = 0.15
    size_grids: Mapping[str, Tuple[int, ...]] = field(default_factory=dict)  # bytes
    bw_grids: Mapping[str, Tuple[int, ...]] = field(default_factory=dict)
    metric: str = "total_cycles"
    variant: str = "full"
    workers: int = 1

    def __post_init__(self):
        if self.sram_budget_bytes <= 0 or self.bw_budget_bits_per_cycle <= 0:
            raise SpecError("dse config: budgets must be positive")
        if not (0 <= self.deviation_fraction < 1):
            raise SpecError("dse config: deviation_fraction must be in [0, 1)")
        if self.metric != "total_cycles":
            raise SpecError(f"dse config: unsupported metric {self.metric!r}")
        sizes = {p: tuple(self.size_grids.get(p) or
                          tuple(kb * 1024 for kb in DEFAULT_SIZE_GRID_KB))
                 for p in SIZE_PARAMS}
        bws = {p: tuple(self.bw_grids.get(p) or DEFAULT_BW_GRID) for p in BW_PARAMS}
        for name, grid in list(sizes.items()) + list(bws.items()):
            if not grid:
                raise SpecError(f"dse config: empty grid for {name}")
        object.__setattr__(self, "size_grids", sizes)
        object.__setattr__(self, "bw_grids", bws)

    @property
    def grid_point_count(self) -> int:
        n = 1
        for p in SIZE_PARAMS:
            n *= len(self.size_grids[p])
        for p in BW_PARAMS:
            n *= len(self.bw_grids[p])
        return n


@dataclass(frozen=True, slots=True)
class DsePoint:
    """One evaluated 8-tuple: sizes in bytes, bandwidths in bits/cycle."""

    wbuf: int
    ibuf: int
    obuf: int
    vmem: int
    bw_w: int
    bw_i: int
    bw_o: int
    bw_v: int
    metric: Optional[int] = None
    feasible: bool = False

    @property
    def params(self) -> tuple:
        return (self.wbuf, self.ibuf, self.obuf, self.vmem,
                self.bw_w, self.bw_i, self.bw_o, self.bw_v)

    @property
    def total_sram_bytes(self) -> int:
        return self.wbuf + self.ibuf + self.obuf + self.vmem

    @property
    def total_bw(self) -> int:
        return self.bw_w + self.bw_i + self.bw_o + self.bw_v


def apply_point(base_hw: HardwareConfig, point: DsePoint) -> HardwareConfig:
    return replace(base_hw, wbuf_bytes=point.wbuf, ibuf_bytes=point.ibuf,
                   obuf_bytes=point.obuf, vmem_bytes=point.vmem,
                   bw_w=point.bw_w, bw_i=point.bw_i, bw_o=point.bw_o,
                   bw_v=point.bw_v)


def _within_budgets(point: DsePoint, cfg: DseConfig) -> bool:
    lo_s = (1 - cfg.deviation_fraction) * cfg.sram_budget_bytes
    hi_s = (1 + cfg.deviation_fraction) * cfg.sram_budget_bytes
    lo_b = (1 - cfg.deviation_fraction) * cfg.bw_budget_bits_per_cycle
    hi_b = (1 + cfg.deviation_fraction) * cfg.bw_budget_bits_per_cycle
    return lo_s <= point.total_sram_bytes <= hi_s and lo_b <= point.total_bw <= hi_b


def _evaluate_candidate(args) -> DsePoint:
    point, network, base_hw, cfg = args
    hw = apply_point(base_hw, point)
    try:
        stats = simulate.evaluate_network(network, hw, variant=cfg.variant)
    except TilingInfeasibleError:
        return point
    return replace(point, metric=stats.l_total, feasible=True)


def grid_points(cfg: DseConfig):
    grids = [cfg.size_grids[p] for p in SIZE_PARAMS] + [cfg.bw_grids[p] for p in BW_PARAMS]
    for combo in itertools.product(*grids):
        yield DsePoint(*combo)


@dataclass(frozen=True)
class DseResult:
    optimal: DsePoint
    worst: DsePoint
    all_points: Tuple[DsePoint, ...]

    @property
    def improvement_ratio(self) -> float:
        return self.worst.metric / self.optimal.metric

    @property
    def feasible_points(self) -> list:
        return [p for p in self.all_points if p.feasible]


def run_dse(network: List[LayerSpec], base_hw: HardwareConfig, cfg: DseConfig) -> DseResult:
    """Evaluate every grid combination; return optimal, worst, and all points.

    Parallel and sequential runs produce identical results: points are
    generated in a fixed order and reduced with a fixed tie-break
    (lexicographically smallest 8-tuple wins among equal metrics).
    """
    # Buffer sizes change what fits: tilings are regenerated per candidate,
    # so any pinned tilings from the network file are dropped here.
    network = [replace(l, tiling=None) for l in network]
    points = list(grid_points(cfg))
    # Budget feasibility is a cheap sum check; only in-window points pay for
    # tiling generation and network evaluation.
    work = [i for i, p in enumerate(points) if _within_budgets(p, cfg)]
    candidates = [(points[i], network, base_hw, cfg) for i in work]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            evaluated = list(pool.map(_evaluate_candidate, candidates, chunksize=16))
    else:
        evaluated = [_evaluate_candidate(c) for c in candidates]
    for i, ev in zip(work, evaluated):
        points[i] = ev
    feasible = [p for p in points if p.feasible]
    if not feasible:
        raise SpecError(
            "design space has no feasible point: every candidate violates the "
            f"budget windows (SRAM {cfg.sram_budget_bytes} B, "
            f"BW {cfg.bw_budget_bits_per_cycle} bits/cycle, "
            f"deviation {cfg.deviation_fraction}) or has no feasible tiling")
    optimal = min(feasible, key=lambda p: (p.metric, p.params))
    worst = max(feasible, key=lambda p: (p.metric, tuple(-x for x in p.params)))
    return DseResult(optimal=optimal, worst=worst, all_points=tuple(points))


def extract_landscape(all_points: Sequence[DsePoint], optimal: DsePoint,
                      within: float) -> List[DsePoint]:
    """Feasible points whose metric is within ``within`` of the optimum.

    Sorted by total SRAM, then total bandwidth, then the 8-tuple; supports
    picking economic designs (minimized SRAM / minimized bandwidth).
    """
    bound = (1 + within) * optimal.metric
    picked = [p for p in all_points if p.feasible and p.metric <= bound]
    picked.sort(key=lambda p: (p.total_sram_bytes, p.total_bw, p.params))
    return picked


def minimized_sram_pick(landscape: Sequence[DsePoint]) -> DsePoint:
    return min(landscape, key=lambda p: (p.total_sram_bytes, p.total_bw, p.params))


def minimized_bw_pick(landscape: Sequence[DsePoint]) -> DsePoint:
    return min(landscape, key=lambda p: (p.total_bw, p.total_sram_bytes, p.params))


def sensitivity_sweep(network: List[LayerSpec], optimal_hw: HardwareConfig,
                      parameter: str, cfg: DseConfig) -> List[tuple]:
    """One-at-a-time sweep of a parameter's grid around the optimal point.

    Returns (value, metric, normalized) tuples; infeasible grid values are
    dropped.  Budget windows do not apply here - the sweep intentionally
    leaves the budget to show the parameter's isolated effect.
    """
    if parameter in SIZE_PARAMS:
        grid = cfg.size_grids[parameter]
        hw_field = f"{parameter}_bytes"
    elif parameter in BW_PARAMS:
        grid = cfg.bw_grids[parameter]
        hw_field = parameter
    else:
        raise SpecError(f"sensitivity sweep: unknown parameter {parameter!r}")
    network = [replace(l, tiling=None) for l in network]
    base_stats = simulate.evaluate_network(network, optimal_hw, variant=cfg.variant)
    base_metric = base_stats.l_total
    rows = []
    for value in sorted(grid):
        hw = replace(optimal_hw, **{hw_field: value})
        try:
            stats = simulate.evaluate_network(network, hw, variant=cfg.variant)
        except TilingInfeasibleError:
            continue
        rows.append((value, stats.l_total, stats.l_total / base_metric))
    return rows


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

DSE_CSV_COLUMNS = DSE_PARAMS + ("metric", "feasible")


def write_dse_csv(points: Sequence[DsePoint], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DSE_CSV_COLUMNS)
        for p in points:
            writer.writerow(list(p.params) + [p.metric if p.metric is not None else "",
                                              int(p.feasible)])


def write_sensitivity_csv(rows: Sequence[tuple], parameter: str,
                          path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([parameter, "metric", "normalized"])
        for value, metric, normalized in rows:
            writer.writerow([value, metric, f"{normalized:.6f}"])
