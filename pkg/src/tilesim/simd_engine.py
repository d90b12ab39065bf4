"""Cost models for the non-conv layers executed on the 1xK SIMD array.

Every SIMD layer is described by a profile: one or more passes over the
layer's 4D iteration space, each pass naming its per-element arithmetic ops,
its per-channel (1D) ops, and the tensors it moves.  The vector memory is
single-buffered, so per outer tile the DRAM transfers and the compute
serialize; per-channel tensors move once per c tile, 4D tensors once per
spatial tile.  The channel dimension maps across the K ALUs (t_c = K) and
each outer tile pays the (6-1)+(K-1) pipeline fill of the MIPS-style ALU
pipeline.

Conventions shared with the counting oracle:
  * ragged boundary tiles are costed at full tile size (ceiling multipliers);
  * a transfer group (all tensors a pass moves at one loop level) costs one
    ceil(bits / BW_v);
  * every arithmetic op makes three VMem accesses (two reads, one write);
    VMem traffic therefore scales with the padded op count, while reported
    op counts use the true tensor dims - except batch-norm backward, which
    reports the padded count (the quantity its VMem model is defined over).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Tuple

from .specs import (
    HardwareConfig,
    LayerStats,
    SimdShape,
    Tiling,
    ceil_div,
)

PSO_PIPE_STAGES = 6  # MIPS-style pipeline depth of each ALU


def pso_simd(hw: HardwareConfig) -> int:
    return (PSO_PIPE_STAGES - 1) + (hw.simd_lanes - 1)


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorMove:
    """One tensor a pass loads or stores.

    vol: "4d" (template tile), "1d" (T_c), "window" (pool input halo),
         "pooled" (pooled-tensor tile feeding a pool-backward tile).
    bits: "in" or "out" (resolved against the hardware config).

    DRAM side-tensors (the pool argmax mask) are ordinary stores here; they
    add DRAM and transfer-time cost but no VMem accesses, since VMem traffic
    is derived from op counts, not tensor moves.
    """

    name: str
    vol: str
    bits: str
    direction: str  # "load" | "store"


@dataclass(frozen=True)
class SimdPass:
    """One sweep over the iteration space with a fixed op/tensor schedule."""

    name: str
    ops_4d: Mapping[str, int] = field(default_factory=dict)
    ops_1d: Mapping[str, int] = field(default_factory=dict)
    tensors_4d: Tuple[TensorMove, ...] = ()
    tensors_1d: Tuple[TensorMove, ...] = ()


@dataclass(frozen=True)
class SimdOpProfile:
    """Schedule description of one SIMD layer kind.

    ``uniform_bits`` forces every tensor to the input bit-width (batch-norm
    backward uses a single width for all of its tensors).
    """

    kind: str
    passes: Tuple[SimdPass, ...]
    uniform_bits: bool = False


def template_dims(kind: str, shape: SimdShape) -> dict:
    """Iteration-space dims the tiling template runs over.

    Forward pools iterate the pooled output; pool backward iterates the
    un-pooled input; parameter updates are flattened onto the channel dim.
    """
    if kind in ("MaxPool", "AvgPool", "GlobalAvgPool"):
        return {"h": shape.pooled_h, "w": shape.pooled_w, "n": shape.n, "c": shape.c}
    return {"h": shape.h, "w": shape.w, "n": shape.n, "c": shape.c}


def build_profile(kind: str, shape: SimdShape) -> SimdOpProfile:
    ld, st = "load", "store"

    def p(name, ops_4d=None, ops_1d=None, t4=(), t1=()):
        return SimdPass(name=name, ops_4d=ops_4d or {}, ops_1d=ops_1d or {},
                        tensors_4d=tuple(t4), tensors_1d=tuple(t1))

    if kind == "ReLU":
        passes = (p("relu", {"max": 1},
                    t4=[TensorMove("x", "4d", "in", ld), TensorMove("y", "4d", "out", st)]),)
    elif kind == "ReluBackward":
        # dX = dY where X > 0: one compare plus one multiply per element.
        passes = (p("relu_bwd", {"max": 1, "mul": 1},
                    t4=[TensorMove("x", "4d", "in", ld), TensorMove("dy", "4d", "in", ld),
                        TensorMove("dx", "4d", "out", st)]),)
    elif kind == "TensorAdd":
        passes = (p("add", {"add": 1},
                    t4=[TensorMove("a", "4d", "in", ld), TensorMove("b", "4d", "in", ld),
                        TensorMove("y", "4d", "out", st)]),)
    elif kind == "TensorAddBackward":
        # Pure fan-out: the incoming gradient is stored to both branches with
        # no arithmetic, so the ALUs contribute nothing but pipeline fill.
        passes = (p("add_bwd", {},
                    t4=[TensorMove("dy", "4d", "in", ld),
                        TensorMove("dx1", "4d", "out", st), TensorMove("dx2", "4d", "out", st)]),)
    elif kind == "MaxPool":
        passes = (p("maxpool", {"max": shape.rh * shape.rw - 1},
                    t4=[TensorMove("x", "window", "in", ld), TensorMove("y", "4d", "out", st),
                        TensorMove("mask", "4d", "out", st)]),)
    elif kind in ("AvgPool", "GlobalAvgPool"):
        passes = (p("avgpool", {"add": shape.rh * shape.rw - 1, "mul": 1},
                    t4=[TensorMove("x", "window", "in", ld), TensorMove("y", "4d", "out", st)]),)
    elif kind == "PoolBackward":
        if shape.pool_mode == "max":
            # Scatter through the stored argmax mask: compare + multiply per
            # input element.
            passes = (p("maxpool_bwd", {"max": 1, "mul": 1},
                        t4=[TensorMove("dy", "pooled", "in", ld),
                            TensorMove("mask", "pooled", "in", ld),
                            TensorMove("dx", "4d", "out", st)]),)
        else:
            passes = (p("avgpool_bwd", {"mul": 1},
                        t4=[TensorMove("dy", "pooled", "in", ld),
                            TensorMove("dx", "4d", "out", st)]),)
    elif kind == "BatchNorm":
        # Training-mode forward: a mean pass then a variance+normalize pass;
        # the batch statistics go to DRAM for the backward pass.
        passes = (
            p("mean", {"add": 1}, {"div": 1},
              t4=[TensorMove("x", "4d", "in", ld)]),
            p("normalize", {"sub": 2, "mul": 2, "add": 1}, {"div": 1},
              t4=[TensorMove("x", "4d", "in", ld), TensorMove("y", "4d", "out", st)],
              t1=[TensorMove("gamma", "1d", "in", ld), TensorMove("beta", "1d", "in", ld),
                  TensorMove("mu", "1d", "out", st), TensorMove("psi", "1d", "out", st)]),
        )
    elif kind == "ParamUpdate":
        # SGD step p -= lr * g: multiply + subtract per parameter element.
        passes = (p("update", {"mul": 1, "sub": 1},
                    t4=[TensorMove("p", "4d", "in", ld), TensorMove("g", "4d", "in", ld),
                        TensorMove("p", "4d", "out", st)]),)
    elif kind == "BnBackward":
        passes = bn_backward_passes()
    else:
        raise ValueError(f"no SIMD profile for kind {kind!r}")
    return SimdOpProfile(kind=kind, passes=passes, uniform_bits=(kind == "BnBackward"))


def bn_backward_passes() -> Tuple[SimdPass, ...]:
    """The two-part batch-norm backward schedule.

    Part 1 builds the normalized input and accumulates the scale/shift
    gradients (per element: sub+mul for x_hat, mul+2add for the partials);
    the finished 1D gradients stay in VMem for part 2 and are stored once.
    Part 2 forms the per-channel constant (mul+div) and combines it with the
    bracketed term (3 mul + 2 sub per element).
    """
    ld, st = "load", "store"
    part1 = SimdPass(
        name="param_grads",
        ops_4d={"sub": 1, "mul": 2, "add": 2},
        ops_1d={},
        tensors_4d=(TensorMove("x", "4d", "in", ld),
                    TensorMove("dy", "4d", "in", ld),
                    TensorMove("xhat", "4d", "out", st)),
        tensors_1d=(TensorMove("mu", "1d", "in", ld),
                    TensorMove("psi", "1d", "in", ld),
                    TensorMove("dgamma", "1d", "out", st),
                    TensorMove("dbeta", "1d", "out", st)),
    )
    part2 = SimdPass(
        name="input_grad",
        ops_4d={"mul": 3, "sub": 2},
        ops_1d={"mul": 1, "div": 1},
        tensors_4d=(TensorMove("xhat", "4d", "in", ld),
                    TensorMove("dy", "4d", "in", ld),
                    TensorMove("dx", "4d", "out", st)),
        tensors_1d=(TensorMove("gamma", "1d", "in", ld),),
    )
    return (part1, part2)


def layer_residents(kind: str, shape: SimdShape, hw: HardwareConfig) -> list:
    """Resident VMem tiles of a layer, for capacity checks.

    Batch-norm backward keeps the 1D parameter-gradient tiles live across
    both parts, so its resident set is the union of the parts: three 4D
    tiles plus five 1D tiles.
    """
    profile = build_profile(kind, shape)
    if kind == "BnBackward":
        b = hw.bits_simd_in
        return [("4d", b)] * 3 + [("1d", b)] * 5
    residents = []
    for ps in profile.passes:
        for t in ps.tensors_4d + ps.tensors_1d:
            bits = hw.bits_simd_in if t.bits == "in" else hw.bits_simd_out
            residents.append((t.vol, bits, t.name))
    # A tensor touched by several passes (batch-norm's x) is resident once.
    seen = {}
    for vol, bits, name in residents:
        seen[name] = (vol, bits)
    return [(vol, bits) for vol, bits in seen.values()]


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def move_bits(move: TensorMove, hw: HardwareConfig, uniform: bool) -> int:
    if uniform:
        return hw.bits_simd_in
    return hw.bits_simd_in if move.bits == "in" else hw.bits_simd_out


def tile_volume(move: TensorMove, outer: Mapping[str, int], shape: SimdShape) -> int:
    th, tw, tn, tc = outer["h"], outer["w"], outer["n"], outer["c"]
    if move.vol == "4d":
        return th * tw * tn * tc
    if move.vol == "1d":
        return tc
    if move.vol == "window":
        return (shape.sp_h * (th - 1) + shape.rh) * (shape.sp_w * (tw - 1) + shape.rw) * tn * tc
    if move.vol == "pooled":
        return ceil_div(th, shape.sp_h) * ceil_div(tw, shape.sp_w) * tn * tc
    raise ValueError(f"unknown tensor volume kind {move.vol!r}")


@dataclass(frozen=True)
class SimdPassStats:
    """Totals of one pass over the whole layer (padded op counts)."""

    dram_in_bits: int
    dram_out_bits: int
    vmem_bits: int
    compute_cycles: int
    stall_cycles: int
    op_counts: Mapping[str, int]

    @property
    def dram_bits(self) -> int:
        return self.dram_in_bits + self.dram_out_bits

    @property
    def op_total(self) -> int:
        return sum(self.op_counts.values())


def _eval_pass(ps: SimdPass, shape: SimdShape, dims: Mapping[str, int],
               tiling: Tiling, hw: HardwareConfig, uniform: bool) -> SimdPassStats:
    o = tiling.outer
    m = {d: ceil_div(dims[d], o[d]) for d in ("h", "w", "n", "c")}
    m_sp = m["h"] * m["w"] * m["n"]
    m_c = m["c"]
    v4d = o["h"] * o["w"] * o["n"] * o["c"]
    lanes = ceil_div(o["c"], hw.simd_lanes)

    bits_4d_in = sum(tile_volume(t, o, shape) * move_bits(t, hw, uniform)
                     for t in ps.tensors_4d if t.direction == "load")
    bits_4d_out = sum(tile_volume(t, o, shape) * move_bits(t, hw, uniform)
                      for t in ps.tensors_4d if t.direction == "store")
    bits_1d_in = sum(o["c"] * move_bits(t, hw, uniform)
                     for t in ps.tensors_1d if t.direction == "load")
    bits_1d_out = sum(o["c"] * move_bits(t, hw, uniform)
                      for t in ps.tensors_1d if t.direction == "store")

    dram_in = (bits_1d_in + bits_4d_in * m_sp) * m_c
    dram_out = (bits_1d_out + bits_4d_out * m_sp) * m_c

    # Single-buffered: each tile's load+store group stalls the ALUs once.
    stall = (ceil_div(bits_1d_in + bits_1d_out, hw.bw_v)
             + ceil_div(bits_4d_in + bits_4d_out, hw.bw_v) * m_sp) * m_c

    c_4d = (o["h"] * o["w"] * o["n"]) * lanes * sum(
        cnt * hw.latency(op) for op, cnt in ps.ops_4d.items())
    c_1d = lanes * sum(cnt * hw.latency(op) for op, cnt in ps.ops_1d.items())
    compute = ((c_4d + pso_simd(hw)) * m_sp + c_1d) * m_c

    ops = {}
    for op, cnt in ps.ops_4d.items():
        ops[op] = ops.get(op, 0) + cnt * v4d * m_sp * m_c
    for op, cnt in ps.ops_1d.items():
        ops[op] = ops.get(op, 0) + cnt * o["c"] * m_c

    b_in, b_out = hw.bits_simd_in, hw.bits_simd_out
    if uniform:
        b_out = b_in
    vmem = sum(ops.values()) * (2 * b_in + b_out)

    return SimdPassStats(dram_in_bits=dram_in, dram_out_bits=dram_out, vmem_bits=vmem,
                         compute_cycles=compute, stall_cycles=stall, op_counts=ops)


def _true_op_counts(profile: SimdOpProfile, dims: Mapping[str, int]) -> dict:
    total_4d = dims["h"] * dims["w"] * dims["n"] * dims["c"]
    ops: dict = {}
    for ps in profile.passes:
        for op, cnt in ps.ops_4d.items():
            ops[op] = ops.get(op, 0) + cnt * total_4d
        for op, cnt in ps.ops_1d.items():
            ops[op] = ops.get(op, 0) + cnt * dims["c"]
    return ops


def simd_generic_eval(profile: SimdOpProfile, shape: SimdShape, tiling: Tiling,
                      hw: HardwareConfig, name: str = "") -> LayerStats:
    """Evaluate any SIMD layer profile into a LayerStats."""
    dims = template_dims(profile.kind, shape)
    parts = [_eval_pass(ps, shape, dims, tiling, hw, profile.uniform_bits)
             for ps in profile.passes]
    if profile.kind == "BnBackward":
        # Batch-norm backward reports padded-lane op counts; see module docstring.
        ops: dict = {}
        for part in parts:
            for op, cnt in part.op_counts.items():
                ops[op] = ops.get(op, 0) + cnt
    else:
        ops = _true_op_counts(profile, dims)
    return LayerStats(
        layer=name,
        kind=profile.kind,
        executed_on="SIMD",
        compute_cycles=sum(p.compute_cycles for p in parts),
        stall_cycles=sum(p.stall_cycles for p in parts),
        dram_bits={"simd_in": sum(p.dram_in_bits for p in parts),
                   "simd_out": sum(p.dram_out_bits for p in parts)},
        sram_bits={"VMem": sum(p.vmem_bits for p in parts)},
        op_counts=ops,
    )


def tensor_add_eval(shape: SimdShape, tiling: Tiling, hw: HardwareConfig,
                    name: str = "") -> LayerStats:
    """Element-wise addition of two tensors (residual links)."""
    return simd_generic_eval(build_profile("TensorAdd", shape), shape, tiling, hw, name=name)


@dataclass(frozen=True)
class BnBackwardStats:
    """Part-wise and total statistics of a batch-norm backward layer."""

    part1: SimdPassStats
    part2: SimdPassStats

    @property
    def parts(self) -> tuple:
        return (self.part1, self.part2)

    @property
    def total_compute_cycles(self) -> int:
        return self.part1.compute_cycles + self.part2.compute_cycles

    @property
    def total_stall_cycles(self) -> int:
        return self.part1.stall_cycles + self.part2.stall_cycles

    @property
    def total_dram_bits(self) -> int:
        return self.part1.dram_bits + self.part2.dram_bits

    @property
    def total_vmem_bits(self) -> int:
        return self.part1.vmem_bits + self.part2.vmem_bits

    @property
    def total_op_counts(self) -> dict:
        ops: dict = {}
        for part in self.parts:
            for op, cnt in part.op_counts.items():
                ops[op] = ops.get(op, 0) + cnt
        return ops


def bn_backward_eval(shape: SimdShape, tiling: Tiling, hw: HardwareConfig) -> BnBackwardStats:
    """Evaluate batch-norm backward, exposing the part-1/part-2 breakdown."""
    dims = template_dims("BnBackward", shape)
    part1, part2 = (
        _eval_pass(ps, shape, dims, tiling, hw, uniform=True)
        for ps in bn_backward_passes()
    )
    return BnBackwardStats(part1=part1, part2=part2)
