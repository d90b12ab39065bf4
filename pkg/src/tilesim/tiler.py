"""Tiling generation and validation.

The systolic-side buffers (WBuf/IBuf/OBuf/BBuf) are double-buffered so that
next-tile loads overlap compute; only half of each buffer is usable per tile.
The SIMD vector memory is single-buffered and must hold the outer tiles of
every resident tensor of a layer at full capacity.

The generator greedily maximizes outer tile sizes in a fixed priority order,
preferring divisors of the full dimension (ragged boundary tiles are costed
at full tile size, so divisors waste nothing).  Larger oc/ic/kh/kw tiles
shrink the psum store/load multiplier, which dominates DRAM traffic, hence
the priority order (oc, ic, kh, kw, oh, ow, n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from .specs import (
    CONV_TILE_DIMS,
    SIMD_TILE_DIMS,
    ConvShape,
    HardwareConfig,
    LayerSpec,
    SimdShape,
    Tiling,
    TilingInfeasibleError,
    conv_tiling,
    simd_tiling,
)

CONV_PRIORITY = ("oc", "ic", "kh", "kw", "oh", "ow", "n")
# For SIMD layers any full split costs the same; maximize the lane dim first,
# then keep h (the innermost compute loop) as the dimension that absorbs the
# split.
SIMD_PRIORITY = ("c", "w", "n", "h")


@dataclass(frozen=True)
class TilingConstraintReport:
    """Per-buffer bit requirements of a candidate tiling and fit flags."""

    required_bits: Mapping[str, int]
    usable_bits: Mapping[str, int]

    @property
    def fits(self) -> dict:
        return {buf: self.required_bits[buf] <= self.usable_bits[buf]
                for buf in self.required_bits}

    @property
    def all_fit(self) -> bool:
        return all(self.fits.values())


def conv_tile_bits(shape: ConvShape, outer: Mapping[str, int], hw: HardwareConfig) -> dict:
    """Bits each SA buffer must hold for one outer tile of a conv layer."""
    t_ih = shape.stride * (outer["oh"] - 1) + outer["kh"]
    t_iw = shape.stride * (outer["ow"] - 1) + outer["kw"]
    bits = {
        "WBuf": outer["kh"] * outer["kw"] * outer["ic"] * outer["oc"] * hw.bits_weight,
        "IBuf": t_ih * t_iw * outer["n"] * outer["ic"] * hw.bits_ifmap,
        "OBuf": outer["oh"] * outer["ow"] * outer["n"] * outer["oc"] * hw.bits_psum,
        "BBuf": outer["oc"] * hw.bits_bias if shape.has_bias else 0,
    }
    return bits


def conv_usable_bits(hw: HardwareConfig) -> dict:
    # Halved: double-buffered so compute overlaps next-tile loads.
    return {
        "WBuf": hw.wbuf_bytes * 8 // 2,
        "IBuf": hw.ibuf_bytes * 8 // 2,
        "OBuf": hw.obuf_bytes * 8 // 2,
        "BBuf": hw.bbuf_bytes * 8 // 2,
    }


def _pick_tile(dim_size: int, fits: Callable[[int], bool]) -> Optional[int]:
    """Largest tile for one dimension: divisors first, else largest integer.

    ``fits`` must be monotone (bigger tiles never need fewer bits).  Returns
    None when even a single element does not fit.
    """
    if not fits(1):
        return None
    best_div = 1
    for d in range(dim_size, 0, -1):
        if dim_size % d == 0 and fits(d):
            best_div = d
            break
    if best_div > 1:
        return best_div
    # No divisor beyond 1 fits; fall back to the largest feasible integer.
    lo, hi = 1, dim_size
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def generate_conv_tiling(shape: ConvShape, hw: HardwareConfig) -> Tiling:
    """Generate the largest-tile conv tiling that fits the SA buffers."""
    usable = conv_usable_bits(hw)

    def check(outer) -> Optional[str]:
        bits = conv_tile_bits(shape, outer, hw)
        for buf in ("WBuf", "IBuf", "OBuf", "BBuf"):
            if bits[buf] > usable[buf]:
                return buf
        return None

    outer = {dim: 1 for dim in CONV_TILE_DIMS}
    offender = check(outer)
    if offender is not None:
        raise TilingInfeasibleError(
            offender,
            f"no feasible conv tiling: a single-element tile overflows {offender} "
            f"({conv_tile_bits(shape, outer, hw)[offender]} bits > "
            f"{usable[offender]} usable bits)",
        )
    for dim in CONV_PRIORITY:
        full = shape.full_dim(dim)

        def fits(t, dim=dim):
            trial = dict(outer)
            trial[dim] = t
            return check(trial) is None

        outer[dim] = _pick_tile(full, fits)
    return conv_tiling(shape, hw, outer)


# ---------------------------------------------------------------------------
# SIMD tiling
# ---------------------------------------------------------------------------

# A resident tensor tile is described by (volume kind, bits per element).
# "4d"     -> T_h * T_w * T_n * T_c elements
# "1d"     -> T_c elements (per-channel tensors)
# "window" -> pool input halo (sp*(T-1)+r per spatial dim)
# "pooled" -> pooled-tensor tile feeding a pool-backward template tile
ResidentTile = tuple  # (kind: str, bits: int)


def _resident_volume(kind: str, outer: Mapping[str, int], shape: SimdShape) -> int:
    th, tw, tn, tc = outer["h"], outer["w"], outer["n"], outer["c"]
    if kind == "4d":
        return th * tw * tn * tc
    if kind == "1d":
        return tc
    if kind == "window":
        return (shape.sp_h * (th - 1) + shape.rh) * (shape.sp_w * (tw - 1) + shape.rw) * tn * tc
    if kind == "pooled":
        return -(-th // shape.sp_h) * (-(-tw // shape.sp_w)) * tn * tc
    raise ValueError(f"unknown resident tile kind {kind!r}")


def simd_tile_bits(shape: SimdShape, outer: Mapping[str, int],
                   residents: Sequence[ResidentTile]) -> int:
    return sum(_resident_volume(kind, outer, shape) * bits for kind, bits in residents)


def generate_simd_tiling(shape: SimdShape, operand_count: int, hw: HardwareConfig,
                         dims: Optional[Mapping[str, int]] = None,
                         residents: Optional[Sequence[ResidentTile]] = None) -> Tiling:
    """Generate the largest SIMD tiling whose resident tiles fit VMem.

    ``operand_count`` is the number of simultaneously resident input+output
    tensors; by default they are modeled as same-sized 4D tiles (one at the
    output bit-width, the rest at the input bit-width).  Layers with
    per-channel or window-shaped residents pass an explicit ``residents``
    list; ``dims`` overrides the template iteration dims when they differ
    from the shape dims (pool layers).
    """
    if dims is None:
        dims = {"h": shape.h, "w": shape.w, "n": shape.n, "c": shape.c}
    if residents is None:
        residents = [("4d", hw.bits_simd_in)] * (operand_count - 1) + [("4d", hw.bits_simd_out)]
    vmem_bits = hw.vmem_bytes * 8  # single-buffered: full capacity usable

    def fits(outer) -> bool:
        return simd_tile_bits(shape, outer, residents) <= vmem_bits

    outer = {dim: 1 for dim in SIMD_TILE_DIMS}
    if not fits(outer):
        raise TilingInfeasibleError(
            "VMem",
            f"no feasible SIMD tiling: a single-element tile needs "
            f"{simd_tile_bits(shape, outer, residents)} bits > {vmem_bits} VMem bits",
        )
    for dim in SIMD_PRIORITY:
        def fits_dim(t, dim=dim):
            trial = dict(outer)
            trial[dim] = t
            return fits(trial)

        outer[dim] = _pick_tile(dims[dim], fits_dim)
    return simd_tiling(dims, hw, outer)


def validate_tiling(layer: LayerSpec, tiling: Tiling, hw: HardwareConfig) -> TilingConstraintReport:
    """Report per-buffer bit requirements and fit flags for a supplied tiling."""
    if layer.is_conv:
        bits = conv_tile_bits(layer.shape, tiling.outer, hw)
        return TilingConstraintReport(required_bits=bits, usable_bits=conv_usable_bits(hw))
    from .simd_engine import layer_residents  # deferred: engine owns profiles

    residents = layer_residents(layer.kind, layer.shape, hw)
    required = simd_tile_bits(layer.shape, tiling.outer, residents)
    return TilingConstraintReport(required_bits={"VMem": required},
                                  usable_bits={"VMem": hw.vmem_bytes * 8})
