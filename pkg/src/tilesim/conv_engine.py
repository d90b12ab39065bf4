"""Closed-form cost models for Conv/FC layers on the systolic array.

The PE array runs a weight-stationary schedule: the oc loop is outermost
(bias reuse), the accumulation loops kh/kw/ic come next, and oh/ow/n are the
innermost loops (weight reuse).  Each outer tile is a GEMM stream that
consumes one inner tile per cycle (t_ic = J rows, t_oc = K cols).

Outer multipliers m_phi = ceil(dim / T_phi) count outer-loop iterations;
inner multipliers r_phi = ceil(T_phi / t_phi) count cycles within a tile.
Boundary tiles are not specialized: ragged edges are costed at full tile
size through the ceiling operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .specs import (
    CONV_TILE_DIMS,
    ConvShape,
    HardwareConfig,
    LayerStats,
    Tiling,
    ceil_div,
)

VARIANTS = ("full", "nostall", "simplified")

VALID_CASES = (1, 2, 4, 5)
# Load/store pattern per valid tile-computing case.  Every tile loads an
# ifmap tile and stores a psum tile; the three optional transfers below
# distinguish the cases (the other four combinations of these transfers
# cannot occur under the weight-stationary loop order):
#   case 1: steady state          - no weight load, no psum load
#   case 2: psum accumulate       - psum load (store must precede it on OBuf)
#   case 4: new weights mid-oc    - weight load + psum load
#   case 5: new oc slice          - weight + bias load, first accumulation step
CASE_WEIGHT_LOAD = {1: False, 2: False, 4: True, 5: True}
CASE_BIAS_LOAD = {1: False, 2: False, 4: False, 5: True}
CASE_PSUM_LOAD = {1: False, 2: True, 4: True, 5: False}


@dataclass(frozen=True)
class ConvMultipliers:
    """Outer/inner loop multipliers and their standard products."""

    m: Mapping[str, int]
    r: Mapping[str, int]

    @classmethod
    def from_tiling(cls, shape: ConvShape, tiling: Tiling) -> "ConvMultipliers":
        m = {d: ceil_div(shape.full_dim(d), tiling.outer[d]) for d in CONV_TILE_DIMS}
        r = {d: ceil_div(tiling.outer[d], tiling.inner[d]) for d in CONV_TILE_DIMS}
        return cls(m=dict(m), r=dict(r))

    @property
    def m_w_tile(self) -> int:
        # Weight tiles reload only when kh/kw/ic/oc advance.
        return self.m["kh"] * self.m["kw"] * self.m["ic"] * self.m["oc"]

    @property
    def m_outer(self) -> int:
        p = 1
        for d in CONV_TILE_DIMS:
            p *= self.m[d]
        return p

    @property
    def m_i_tile(self) -> int:
        return self.m_outer

    @property
    def m_spatial(self) -> int:
        # Tiles per accumulation chain: iterations of the non-accumulating loops.
        return self.m["oh"] * self.m["ow"] * self.m["n"] * self.m["oc"]

    @property
    def m_accum(self) -> int:
        # Accumulation iterations per psum tile (kh, kw, ic loops).
        return self.m["kh"] * self.m["kw"] * self.m["ic"]

    @property
    def m_p_tile(self) -> int:
        # Each accumulation step loads and stores the psum tile except the
        # first, which only stores.
        return self.m_spatial * (2 * self.m_accum - 1)

    @property
    def m_inner(self) -> int:
        p = 1
        for d in CONV_TILE_DIMS:
            p *= self.r[d]
        return p


def outer_tile_volumes(shape: ConvShape, tiling: Tiling) -> dict:
    """Element volumes of the weight/ifmap/psum outer tiles."""
    o = tiling.outer
    return {
        "weight": o["kh"] * o["kw"] * o["ic"] * o["oc"],
        "ifmap": o["ih"] * o["iw"] * o["n"] * o["ic"],
        "psum": o["oh"] * o["ow"] * o["n"] * o["oc"],
    }


def inner_tile_volumes(tiling: Tiling) -> dict:
    i = tiling.inner
    return {
        "weight": i["kh"] * i["kw"] * i["ic"] * i["oc"],
        "ifmap": i["ih"] * i["iw"] * i["n"] * i["ic"],
        "psum": i["oh"] * i["ow"] * i["n"] * i["oc"],
    }


def conv_dram_accesses(shape: ConvShape, tiling: Tiling, hw: HardwareConfig) -> dict:
    """DRAM access bits per datatype for the whole layer.

    Weights achieve maximal reuse: each element is loaded exactly once, so
    the total is the weight tensor size regardless of tiling (boundary tiles
    move only the data that exists).  Psum tiles likewise clamp at tensor
    edges and make 2*iter-1 trips per accumulation chain.  Ifmap halo tiles
    and bias tiles are costed at face value, matching the printed transfer
    formulas; only the transfer-time model pays for ragged-edge padding.
    """
    mult = ConvMultipliers.from_tiling(shape, tiling)
    vol = outer_tile_volumes(shape, tiling)
    return {
        "weight": shape.weight_volume * hw.bits_weight,
        "ifmap": vol["ifmap"] * mult.m_outer * hw.bits_ifmap,
        "psum_ofmap": shape.ofmap_volume * (2 * mult.m_accum - 1) * hw.bits_psum,
        "bias": tiling.outer["oc"] * mult.m["oc"] * hw.bits_bias if shape.has_bias else 0,
    }


def conv_sram_accesses(shape: ConvShape, tiling: Tiling, hw: HardwareConfig) -> dict:
    """On-chip SRAM access bits per buffer for the whole layer.

    The PE array reads one inner tile of weight and ifmap per cycle and makes
    a read+write psum access per cycle, except that each ofmap element's
    first psum is write-only.  Bias is read once per ofmap element.
    """
    mult = ConvMultipliers.from_tiling(shape, tiling)
    ivol = inner_tile_volumes(tiling)
    inner_iters = mult.m_inner * mult.m_outer
    ofmap_elems = shape.ofmap_volume
    return {
        "WBuf": ivol["weight"] * inner_iters * hw.bits_weight,
        "IBuf": ivol["ifmap"] * inner_iters * hw.bits_ifmap,
        "OBuf": (ivol["psum"] * 2 * inner_iters - ofmap_elems) * hw.bits_psum,
        "BBuf": ofmap_elems * hw.bits_bias if shape.has_bias else 0,
    }


def pso_sa(hw: HardwareConfig) -> int:
    # Cycles to fill the vertical + horizontal systolic pipeline per tile.
    return (hw.pe_rows - 1) + (hw.pe_cols - 1)


def conv_tile_compute_cycles(shape: ConvShape, tiling: Tiling, hw: HardwareConfig) -> int:
    o = tiling.outer
    spatial = o["oh"] * o["ow"] * o["n"] * o["kh"] * o["kw"]
    return spatial * ceil_div(o["ic"], hw.pe_rows) * ceil_div(o["oc"], hw.pe_cols)


def conv_compute_cycles(shape: ConvShape, tiling: Tiling, hw: HardwareConfig) -> int:
    mult = ConvMultipliers.from_tiling(shape, tiling)
    return (conv_tile_compute_cycles(shape, tiling, hw) + pso_sa(hw)) * mult.m_outer


def conv_transfer_cycles(shape: ConvShape, tiling: Tiling, hw: HardwareConfig) -> dict:
    """Per-tile transfer cycles on each off-chip interface.

    WBuf and BBuf share one interface, so a weight+bias load serializes the
    two transfers.  A psum accumulation needs a store followed by a load on
    the OBuf interface; for the weight-load case the two trips are modeled
    as one streamed burst of twice the tile volume.
    """
    vol = outer_tile_volumes(shape, tiling)
    t_weight = ceil_div(vol["weight"] * hw.bits_weight, hw.bw_w)
    t_bias = ceil_div(tiling.outer["oc"] * hw.bits_bias, hw.bw_w) if shape.has_bias else 0
    t_ifmap = ceil_div(vol["ifmap"] * hw.bits_ifmap, hw.bw_i)
    t_psum = ceil_div(vol["psum"] * hw.bits_psum, hw.bw_o)
    t_psum_burst2 = ceil_div(2 * vol["psum"] * hw.bits_psum, hw.bw_o)
    return {"weight": t_weight, "bias": t_bias, "ifmap": t_ifmap,
            "psum": t_psum, "psum2": t_psum_burst2}


def case_busy_cycles(case: int, c_tile: int, t: Mapping[str, int]) -> int:
    """Busy time of one tile: max over compute and the parallel interfaces."""
    wbuf = 0
    if CASE_WEIGHT_LOAD[case]:
        wbuf = t["weight"] + (t["bias"] if CASE_BIAS_LOAD[case] else 0)
    if CASE_PSUM_LOAD[case]:
        obuf = t["psum2"] if CASE_WEIGHT_LOAD[case] else t["psum"] + t["psum"]
    else:
        obuf = t["psum"]
    return max(c_tile, wbuf, t["ifmap"], obuf)


@dataclass(frozen=True)
class StallCaseBreakdown:
    """Occurrence counts and stall cycles for each valid load/store case."""

    occurrences: Mapping[int, int]
    stall_per_tile: Mapping[int, int]

    @property
    def subtotals(self) -> dict:
        return {c: self.occurrences[c] * self.stall_per_tile[c] for c in VALID_CASES}

    @property
    def total(self) -> int:
        return sum(self.subtotals.values())


def conv_occurrence_counts(mult: ConvMultipliers) -> dict:
    """How many outer tiles fall into each load/store case.

    Weight loads happen at the start of every (oc, kh, kw, ic) combination;
    of those, the ones that also open a new oc slice load bias too (case 5)
    and the rest load psum alongside (case 4).  Tiles whose accumulation
    loops are past their first iteration reload psum (case 2 when weights
    are reused); everything else is the steady state (case 1).
    """
    o5 = mult.m["oc"]
    o4 = mult.m_w_tile - o5
    psum_load_tiles = mult.m_outer - mult.m_spatial
    o2 = psum_load_tiles - o4
    o1 = mult.m_outer - o2 - o4 - o5
    return {1: o1, 2: o2, 4: o4, 5: o5}


def conv_stall_cycles(shape: ConvShape, tiling: Tiling, hw: HardwareConfig) -> StallCaseBreakdown:
    mult = ConvMultipliers.from_tiling(shape, tiling)
    c_tile = conv_tile_compute_cycles(shape, tiling, hw)
    t = conv_transfer_cycles(shape, tiling, hw)
    occurrences = conv_occurrence_counts(mult)
    stall = {c: case_busy_cycles(c, c_tile, t) - c_tile for c in VALID_CASES}
    return StallCaseBreakdown(occurrences=occurrences, stall_per_tile=stall)


def conv_edge_cycles(shape: ConvShape, tiling: Tiling, hw: HardwareConfig) -> int:
    """Prologue + epilogue cycles when tile edges are modeled.

    The steady-state model overlaps every transfer with some tile's compute.
    With edges enabled, the first tile's loads (weight+bias and ifmap on
    parallel interfaces) precede any compute and the last psum store trails
    it.
    """
    t = conv_transfer_cycles(shape, tiling, hw)
    prologue = max(t["weight"] + t["bias"], t["ifmap"])
    return prologue + t["psum"]


def conv_op_counts(shape: ConvShape) -> dict:
    ops = {"mac": shape.mac_count}
    if shape.has_bias:
        ops["add"] = shape.ofmap_volume
    return ops


def conv_eval(shape: ConvShape, tiling: Tiling, hw: HardwareConfig,
              variant: str = "full", include_edges: bool = False,
              name: str = "", kind: str = "Conv") -> LayerStats:
    """Evaluate a conv layer under one of the three model variants.

    full:       compute cycles + per-case stall cycles.
    nostall:    compute cycles only (assumes perfect overlap).
    simplified: max of the four isolated totals (compute, weight+bias,
                ifmap, psum transfer time), each over the whole layer.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown model variant {variant!r}")
    dram = conv_dram_accesses(shape, tiling, hw)
    sram = conv_sram_accesses(shape, tiling, hw)
    compute = conv_compute_cycles(shape, tiling, hw)
    if variant == "full":
        stall = conv_stall_cycles(shape, tiling, hw).total
        if include_edges:
            stall += conv_edge_cycles(shape, tiling, hw)
    elif variant == "nostall":
        stall = 0
    else:
        total = max(
            compute,
            ceil_div(dram["weight"] + dram["bias"], hw.bw_w),
            ceil_div(dram["ifmap"], hw.bw_i),
            ceil_div(dram["psum_ofmap"], hw.bw_o),
        )
        stall = total - compute
    return LayerStats(
        layer=name,
        kind=kind,
        executed_on="SA",
        compute_cycles=compute,
        stall_cycles=stall,
        dram_bits=dram,
        sram_bits=sram,
        op_counts=conv_op_counts(shape),
    )
