"""Tile-level discrete-event reference simulators.

These replay the actual schedules tile by tile instead of evaluating closed
forms, and exist to validate the analytical engines: any divergence on any
instance is a bug in one side.

The conv oracle walks the weight-stationary loop nest (oc outermost, then
the kh/kw/ic accumulation loops, then oh/ow/n), derives each tile's
load/store pattern from the loop indices alone, and advances time by the
per-tile maximum of compute and the per-interface transfer spans (WBuf+BBuf
shared, IBuf, OBuf with store-then-load serialization).  Time is modeled at
tile granularity; within a tile the only compute quantity is the shared
per-tile cycle count.

The SIMD oracle replays each layer's pass schedule with strictly serialized
transfer and compute phases.  The counting oracle additionally walks the
schedule counting every load, store, and per-element arithmetic op, giving
an independent check of access bits and op counts at tiny sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Mapping, Tuple

from .conv_engine import conv_tile_compute_cycles, pso_sa
from .simd_engine import build_profile, move_bits, pso_simd, template_dims, tile_volume
from .specs import (
    ConvShape,
    HardwareConfig,
    SimdShape,
    Tiling,
    ceil_div,
)


@dataclass(frozen=True)
class TileEvent:
    """One outer tile: its case label, compute span, and transfer spans.

    Conv tiles carry case labels from {1, 2, 4, 5}; SIMD tiles have no case
    taxonomy and use 0.
    """

    index: int
    case: int
    start: int
    end: int
    compute: Tuple[int, int]
    spans: Tuple[Tuple[str, int, int], ...]  # (interface, start, duration)


@dataclass(frozen=True)
class TileEventTrace:
    events: Tuple[TileEvent, ...]
    total_cycles: int
    bits: Mapping[str, int]  # transferred bits per datatype

    @property
    def case_counts(self) -> dict:
        counts: dict = {}
        for ev in self.events:
            counts[ev.case] = counts.get(ev.case, 0) + 1
        return counts

    def dump(self) -> str:
        lines = [f"tile {ev.index} case {ev.case} [{ev.start}, {ev.end})"
                 for ev in self.events]
        lines.append(f"total {self.total_cycles}")
        return "\n".join(lines)


def simulate_conv(shape: ConvShape, tiling: Tiling, hw: HardwareConfig,
                  include_edges: bool = False) -> TileEventTrace:
    """Replay a conv layer's outer tiles in weight-stationary order."""
    o = tiling.outer
    m_oc = ceil_div(shape.oc, o["oc"])
    m_kh = ceil_div(shape.kh, o["kh"])
    m_kw = ceil_div(shape.kw, o["kw"])
    m_ic = ceil_div(shape.ic, o["ic"])
    m_oh = ceil_div(shape.oh, o["oh"])
    m_ow = ceil_div(shape.ow, o["ow"])
    m_n = ceil_div(shape.n, o["n"])

    v_weight = o["kh"] * o["kw"] * o["ic"] * o["oc"]
    v_ifmap = o["ih"] * o["iw"] * o["n"] * o["ic"]
    v_psum = o["oh"] * o["ow"] * o["n"] * o["oc"]
    # Transfer spans are paid at full tile size; transferred *bits* clamp to
    # the data that exists (boundary weight/psum tiles are smaller).
    w_bits = v_weight * hw.bits_weight
    i_bits = v_ifmap * hw.bits_ifmap
    p_bits = v_psum * hw.bits_psum
    b_bits = o["oc"] * hw.bits_bias if shape.has_bias else 0

    def true_extent(dim: int, tile: int, idx: int) -> int:
        return min(tile, dim - idx * tile)

    c_tile = conv_tile_compute_cycles(shape, tiling, hw)
    setup = pso_sa(hw)

    clock = 0
    events: List[TileEvent] = []
    bits = {"weight": 0, "ifmap": 0, "psum_ofmap": 0, "bias": 0}
    index = 0
    last_store = 0
    for ioc in range(m_oc):
        oc_true = true_extent(shape.oc, o["oc"], ioc)
        for ikh in range(m_kh):
            for ikw in range(m_kw):
                for iic in range(m_ic):
                    first_accum = (ikh == 0 and ikw == 0 and iic == 0)
                    w_true_bits = (true_extent(shape.kh, o["kh"], ikh)
                                   * true_extent(shape.kw, o["kw"], ikw)
                                   * true_extent(shape.ic, o["ic"], iic)
                                   * oc_true * hw.bits_weight)
                    for ioh in range(m_oh):
                        for iow in range(m_ow):
                            for i_n in range(m_n):
                                first_spatial = (ioh == 0 and iow == 0 and i_n == 0)
                                p_true_bits = (true_extent(shape.oh, o["oh"], ioh)
                                               * true_extent(shape.ow, o["ow"], iow)
                                               * true_extent(shape.n, o["n"], i_n)
                                               * oc_true * hw.bits_psum)
                                weight_load = first_spatial
                                bias_load = first_spatial and first_accum
                                psum_load = not first_accum
                                if bias_load:
                                    case = 5
                                elif weight_load:
                                    case = 4
                                elif psum_load:
                                    case = 2
                                else:
                                    case = 1

                                spans = []
                                t0 = clock + setup
                                # ifmap load: every tile, own interface
                                t_i = ceil_div(i_bits, hw.bw_i)
                                spans.append(("IBuf", t0, t_i))
                                bits["ifmap"] += i_bits
                                # weight (+bias) load on the shared interface
                                t_wb = 0
                                if weight_load:
                                    t_wb = ceil_div(w_bits, hw.bw_w)
                                    bits["weight"] += w_true_bits
                                    if bias_load and b_bits:
                                        t_wb += ceil_div(b_bits, hw.bw_w)
                                        bits["bias"] += b_bits
                                    spans.append(("WBuf", t0, t_wb))
                                # psum store (always) then load (when accumulating)
                                if psum_load:
                                    if weight_load:
                                        # store+load streamed as one burst
                                        t_o = ceil_div(2 * p_bits, hw.bw_o)
                                        spans.append(("OBuf", t0, t_o))
                                    else:
                                        t_st = ceil_div(p_bits, hw.bw_o)
                                        t_ld = ceil_div(p_bits, hw.bw_o)
                                        spans.append(("OBuf", t0, t_st))
                                        spans.append(("OBuf", t0 + t_st, t_ld))
                                        t_o = t_st + t_ld
                                    bits["psum_ofmap"] += 2 * p_true_bits
                                else:
                                    t_o = ceil_div(p_bits, hw.bw_o)
                                    spans.append(("OBuf", t0, t_o))
                                    bits["psum_ofmap"] += p_true_bits
                                last_store = ceil_div(p_bits, hw.bw_o)

                                busy = max(c_tile, t_i, t_wb, t_o)
                                end = t0 + busy
                                events.append(TileEvent(
                                    index=index, case=case, start=clock, end=end,
                                    compute=(t0, c_tile), spans=tuple(spans)))
                                clock = end
                                index += 1
    if include_edges and events:
        # First tile's loads precede any compute; last psum store trails it.
        first = events[0]
        prologue = max(
            sum(d for ifc, _, d in first.spans if ifc == "WBuf"),
            next(d for ifc, _, d in first.spans if ifc == "IBuf"),
        )
        clock += prologue + last_store
    return TileEventTrace(events=tuple(events), total_cycles=clock, bits=bits)


# ---------------------------------------------------------------------------
# SIMD event oracle
# ---------------------------------------------------------------------------


def simulate_simd(kind: str, shape: SimdShape, tiling: Tiling,
                  hw: HardwareConfig) -> TileEventTrace:
    """Replay a SIMD layer's pass schedule with serialized load/compute/store."""
    profile = build_profile(kind, shape)
    dims = template_dims(kind, shape)
    o = tiling.outer
    m = {d: ceil_div(dims[d], o[d]) for d in ("h", "w", "n", "c")}
    setup = pso_simd(hw)
    lanes = ceil_div(o["c"], hw.simd_lanes)

    clock = 0
    events: List[TileEvent] = []
    bits = {"simd_in": 0, "simd_out": 0}
    index = 0
    for _ic in range(m["c"]):
        for ps in profile.passes:
            bits_1d = {"load": 0, "store": 0}
            for t in ps.tensors_1d:
                b = o["c"] * move_bits(t, hw, profile.uniform_bits)
                bits_1d[t.direction] += b
            if bits_1d["load"] or bits_1d["store"]:
                dur = ceil_div(bits_1d["load"] + bits_1d["store"], hw.bw_v)
                events.append(TileEvent(index=index, case=0, start=clock,
                                        end=clock + dur, compute=(clock, 0),
                                        spans=(("VMem", clock, dur),)))
                bits["simd_in"] += bits_1d["load"]
                bits["simd_out"] += bits_1d["store"]
                clock += dur
                index += 1
            c_1d = lanes * sum(cnt * hw.latency(op) for op, cnt in ps.ops_1d.items())
            clock += c_1d
            c_4d = (o["h"] * o["w"] * o["n"]) * lanes * sum(
                cnt * hw.latency(op) for op, cnt in ps.ops_4d.items())
            tile_bits = {"load": 0, "store": 0}
            for t in ps.tensors_4d:
                b = tile_volume(t, o, shape) * move_bits(t, hw, profile.uniform_bits)
                tile_bits[t.direction] += b
            for _ in range(m["h"] * m["w"] * m["n"]):
                dur = ceil_div(tile_bits["load"] + tile_bits["store"], hw.bw_v)
                start = clock
                clock += dur  # single-buffered: transfer stalls the ALUs
                clock += setup + c_4d
                events.append(TileEvent(index=index, case=0, start=start, end=clock,
                                        compute=(start + dur, setup + c_4d),
                                        spans=(("VMem", start, dur),)))
                bits["simd_in"] += tile_bits["load"]
                bits["simd_out"] += tile_bits["store"]
                index += 1
    return TileEventTrace(events=tuple(events), total_cycles=clock, bits=bits)


# ---------------------------------------------------------------------------
# Counting oracle (scalar schedule interpreter)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AccessCounts:
    dram_in_bits: int
    dram_out_bits: int
    vmem_bits: int
    op_counts: Mapping[str, int]  # true-element ops
    padded_op_counts: Mapping[str, int]

    @property
    def dram_bits(self) -> int:
        return self.dram_in_bits + self.dram_out_bits


def count_simd_accesses(kind: str, shape: SimdShape, tiling: Tiling,
                        hw: HardwareConfig) -> AccessCounts:
    """Literally execute a SIMD layer's schedule, tallying loads/stores/ops.

    DMA events are tallied per tile visit at the schedule's tile volumes;
    arithmetic is tallied per element, both over the true tensor extent and
    over the padded tile lanes (the latter drives VMem traffic).  Intended
    for tiny shapes; everything is plain nested loops.
    """
    profile = build_profile(kind, shape)
    dims = template_dims(kind, shape)
    o = tiling.outer
    m = {d: ceil_div(dims[d], o[d]) for d in ("h", "w", "n", "c")}

    dram_in = 0
    dram_out = 0
    true_ops: dict = {}
    padded_ops: dict = {}

    def tally(table, op, cnt):
        table[op] = table.get(op, 0) + cnt

    for ic_tile in range(m["c"]):
        c_true = min(o["c"], dims["c"] - ic_tile * o["c"])  # true channels in tile
        for ps in profile.passes:
            for t in ps.tensors_1d:
                b = o["c"] * move_bits(t, hw, profile.uniform_bits)
                if t.direction == "load":
                    dram_in += b
                else:
                    dram_out += b
            for op, cnt in ps.ops_1d.items():
                tally(true_ops, op, cnt * c_true)
                tally(padded_ops, op, cnt * o["c"])
            for ih_tile in range(m["h"]):
                for iw_tile in range(m["w"]):
                    for in_tile in range(m["n"]):
                        for t in ps.tensors_4d:
                            b = tile_volume(t, o, shape) * move_bits(
                                t, hw, profile.uniform_bits)
                            if t.direction == "load":
                                dram_in += b
                            else:
                                dram_out += b
                        h_true = min(o["h"], dims["h"] - ih_tile * o["h"])
                        w_true = min(o["w"], dims["w"] - iw_tile * o["w"])
                        n_true = min(o["n"], dims["n"] - in_tile * o["n"])
                        for op, cnt in ps.ops_4d.items():
                            # per-element walk over the true extent
                            total = 0
                            for _h in range(h_true):
                                for _w in range(w_true):
                                    for _n in range(n_true):
                                        for _c in range(c_true):
                                            total += cnt
                            tally(true_ops, op, total)
                            tally(padded_ops, op,
                                  cnt * o["h"] * o["w"] * o["n"] * o["c"])

    b_in = hw.bits_simd_in
    b_out = b_in if profile.uniform_bits else hw.bits_simd_out
    vmem = sum(padded_ops.values()) * (2 * b_in + b_out)
    return AccessCounts(dram_in_bits=dram_in, dram_out_bits=dram_out, vmem_bits=vmem,
                        op_counts=true_ops, padded_op_counts=padded_ops)
