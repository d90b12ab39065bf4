"""Random instance generators shared by the test suite and oracle-check.

Instances are feasible by construction: the hardware buffers are sized to
exactly double the sampled tile requirement (the SA side is double-buffered)
and VMem to the resident set.  Outer-tile counts are capped so the event
oracle replays in microseconds per instance.
"""

from __future__ import annotations

import random
from typing import Tuple

from . import simd_engine, tiler
from .specs import ConvShape, HardwareConfig, SimdShape, Tiling, ceil_div, conv_tiling, simd_tiling

MAX_OUTER_TILES = 4000


def _random_tile(rng: random.Random, dim: int) -> int:
    if rng.random() < 0.5:
        return dim  # keep whole dims common so big tilings stay cheap
    return rng.randint(1, dim)


def _base_hw(rng: random.Random, **overrides) -> dict:
    j = rng.choice((2, 4, 8))
    k = rng.choice((2, 4, 8))
    hw = dict(
        pe_rows=j, pe_cols=k,
        wbuf_bytes=1, bbuf_bytes=1, ibuf_bytes=1, obuf_bytes=1,
        vmem_bytes=1, imem_bytes=1024,
        bw_w=rng.choice((8, 16, 32, 64, 128, 256, 512)),
        bw_i=rng.choice((8, 16, 32, 64, 128, 256, 512)),
        bw_o=rng.choice((8, 16, 32, 64, 128, 256, 512)),
        bw_v=rng.choice((8, 16, 32, 64, 128, 256, 512)),
        bits_weight=rng.choice((8, 16)),
        bits_bias=rng.choice((16, 32)),
        bits_ifmap=rng.choice((8, 16)),
        bits_psum=rng.choice((16, 32)),
        bits_simd_in=rng.choice((16, 32)),
        bits_simd_out=rng.choice((16, 32)),
        op_latency={"add": rng.randint(1, 2), "sub": rng.randint(1, 2),
                    "mul": rng.randint(1, 3), "div": rng.randint(2, 6),
                    "max": 1},
    )
    hw.update(overrides)
    return hw


def random_conv_shape(rng: random.Random, max_dim: int = 16) -> ConvShape:
    kh = rng.randint(1, min(4, max_dim))
    kw = rng.randint(1, min(4, max_dim))
    s = rng.randint(1, 2)
    oh = rng.randint(1, max_dim)
    ow = rng.randint(1, max_dim)
    pad_h = rng.randint(0, kh - 1)
    pad_w = rng.randint(0, kw - 1)
    # Choose the ifmap extent consistent with the sampled output extent.
    ih = s * (oh - 1) + kh - 2 * pad_h + rng.randint(0, s - 1)
    iw = s * (ow - 1) + kw - 2 * pad_w + rng.randint(0, s - 1)
    if ih < 1 or iw < 1:
        return random_conv_shape(rng, max_dim)
    return ConvShape(
        n=rng.randint(1, 4), ih=ih, iw=iw, ic=rng.randint(1, max_dim),
        oh=oh, ow=ow, oc=rng.randint(1, max_dim), kh=kh, kw=kw, stride=s,
        pad_h=pad_h, pad_w=pad_w, has_bias=rng.random() < 0.5,
    )


def random_conv_instance(rng: random.Random, max_dim: int = 16,
                         max_outer_tiles: int = MAX_OUTER_TILES
                         ) -> Tuple[ConvShape, Tiling, HardwareConfig]:
    """A random small conv layer, a feasible random tiling, and matching hw."""
    while True:
        shape = random_conv_shape(rng, max_dim)
        outer = {dim: _random_tile(rng, shape.full_dim(dim))
                 for dim in ("oh", "ow", "n", "kh", "kw", "ic", "oc")}
        m_outer = 1
        for dim, t in outer.items():
            m_outer *= ceil_div(shape.full_dim(dim), t)
        if m_outer <= max_outer_tiles:
            break
    hw_fields = _base_hw(rng)
    hw = HardwareConfig(**hw_fields)
    bits = tiler.conv_tile_bits(shape, {**outer,
                                        "ih": shape.stride * (outer["oh"] - 1) + outer["kh"],
                                        "iw": shape.stride * (outer["ow"] - 1) + outer["kw"]},
                                hw)
    hw = HardwareConfig(**{**hw_fields,
                           "wbuf_bytes": max(1, ceil_div(bits["WBuf"] * 2, 8)),
                           "ibuf_bytes": max(1, ceil_div(bits["IBuf"] * 2, 8)),
                           "obuf_bytes": max(1, ceil_div(bits["OBuf"] * 2, 8)),
                           "bbuf_bytes": max(1, ceil_div(max(bits["BBuf"], 1) * 2, 8))})
    return shape, conv_tiling(shape, hw, outer), hw


SIMD_CHECK_KINDS = ("ReLU", "TensorAdd", "TensorAddBackward", "ReluBackward",
                    "MaxPool", "AvgPool", "GlobalAvgPool", "PoolBackward",
                    "BatchNorm", "BnBackward", "ParamUpdate")


def random_simd_shape(rng: random.Random, kind: str, max_dim: int = 16) -> SimdShape:
    h = rng.randint(1, max_dim)
    w = rng.randint(1, max_dim)
    n = rng.randint(1, 4)
    c = rng.randint(1, max_dim)
    if kind == "ParamUpdate":
        return SimdShape(h=1, w=1, n=1, c=rng.randint(1, max_dim * max_dim))
    if kind in ("MaxPool", "AvgPool", "PoolBackward"):
        mode = {"MaxPool": "max", "AvgPool": "avg"}.get(kind) or rng.choice(("max", "avg"))
        rh = rng.randint(1, min(3, h))
        rw = rng.randint(1, min(3, w))
        sp = rng.randint(1, max(1, rh))
        pad = rng.randint(0, min(rh - 1, 1))
        if (h + 2 * pad - rh) < 0 or (w + 2 * pad - rw) < 0:
            return random_simd_shape(rng, kind, max_dim)
        return SimdShape(h=h, w=w, n=n, c=c, rh=rh, rw=rw, sp_h=sp, sp_w=sp,
                         pool_pad=pad, pool_mode=mode)
    if kind == "GlobalAvgPool":
        return SimdShape(h=h, w=w, n=n, c=c, rh=h, rw=w, sp_h=h, sp_w=w,
                         pool_mode="global_avg")
    if kind in ("TensorAdd", "TensorAddBackward"):
        return SimdShape(h=h, w=w, n=n, c=c, n_inputs=2)
    return SimdShape(h=h, w=w, n=n, c=c)


def random_simd_instance(rng: random.Random, kind: str = "", max_dim: int = 16
                         ) -> Tuple[str, SimdShape, Tiling, HardwareConfig]:
    kind = kind or rng.choice(SIMD_CHECK_KINDS)
    shape = random_simd_shape(rng, kind, max_dim)
    hw_fields = _base_hw(rng)
    hw = HardwareConfig(**hw_fields)
    dims = simd_engine.template_dims(kind, shape)
    outer = {d: _random_tile(rng, dims[d]) for d in ("h", "w", "n", "c")}
    residents = simd_engine.layer_residents(kind, shape, hw)
    need = tiler.simd_tile_bits(shape, outer, residents)
    hw = HardwareConfig(**{**hw_fields, "vmem_bytes": max(1, ceil_div(need, 8))})
    return kind, shape, simd_tiling(dims, hw, outer), hw
