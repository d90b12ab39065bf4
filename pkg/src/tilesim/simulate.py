"""Network-level evaluation: tiling resolution, engine dispatch, aggregation."""

from __future__ import annotations

from dataclasses import replace
from typing import List

from . import conv_engine, simd_engine, tiler
from .specs import (
    HardwareConfig,
    LayerSpec,
    LayerStats,
    NetworkStats,
    SpecError,
    Tiling,
    ceil_div,
)


def resolve_tiling(layer: LayerSpec, hw: HardwareConfig) -> Tiling:
    """Use the layer's pinned tiling when present, else generate one."""
    if layer.tiling is not None:
        report = tiler.validate_tiling(layer, layer.tiling, hw)
        if not report.all_fit:
            bad = [b for b, ok in report.fits.items() if not ok]
            raise tiler.TilingInfeasibleError(
                bad[0], f"layer {layer.name!r}: supplied tiling overflows {', '.join(bad)}")
        return layer.tiling
    if layer.is_conv:
        return tiler.generate_conv_tiling(layer.shape, hw)
    residents = simd_engine.layer_residents(layer.kind, layer.shape, hw)
    dims = simd_engine.template_dims(layer.kind, layer.shape)
    return tiler.generate_simd_tiling(layer.shape, len(residents), hw,
                                      dims=dims, residents=residents)


def evaluate_layer(layer: LayerSpec, hw: HardwareConfig, variant: str = "full",
                   include_edges: bool = False) -> LayerStats:
    hw = layer.hw_with_overrides(hw)
    try:
        tiling = resolve_tiling(layer, hw)
    except tiler.TilingInfeasibleError as exc:
        raise tiler.TilingInfeasibleError(exc.buffer,
                                          f"layer {layer.name!r}: {exc}") from None
    if layer.is_conv:
        return conv_engine.conv_eval(layer.shape, tiling, hw, variant=variant,
                                     include_edges=include_edges,
                                     name=layer.name, kind=layer.kind)
    profile = simd_engine.build_profile(layer.kind, layer.shape)
    stats = simd_engine.simd_generic_eval(profile, layer.shape, tiling, hw,
                                          name=layer.name)
    if variant == "nostall":
        stats = replace(stats, stall_cycles=0)
    elif variant == "simplified":
        # SIMD analogue of the max-of-isolated-totals estimate.
        total = max(stats.compute_cycles, ceil_div(stats.dram_bits_total, hw.bw_v))
        stats = replace(stats, stall_cycles=total - stats.compute_cycles)
    return stats


def evaluate_network(layers: List[LayerSpec], hw: HardwareConfig, variant: str = "full",
                     include_edges: bool = False) -> NetworkStats:
    """Evaluate layers sequentially (no cross-layer overlap) and aggregate."""
    stats = tuple(evaluate_layer(l, hw, variant=variant, include_edges=include_edges)
                  for l in layers)
    return NetworkStats(layers=stats)


def inference_layers(layers: List[LayerSpec]) -> List[LayerSpec]:
    """Drop training-only layers for inference runs.

    Batch normalization runs only during training; at inference its affine
    transform is folded into the preceding convolution, so BN layers carry
    no inference cost.
    """
    return [l for l in layers if l.kind != "BatchNorm"]


def scale_batch(layers: List[LayerSpec], batch: int) -> List[LayerSpec]:
    """Return the network with every layer's batch dimension set to ``batch``."""
    if batch < 1:
        raise SpecError(f"batch size must be >= 1, got {batch}")
    out = []
    for layer in layers:
        shape = layer.shape
        if layer.kind == "ParamUpdate":
            out.append(layer)
            continue
        # A pinned tiling was authored for the file's batch size; regenerate.
        out.append(replace(layer, shape=replace(shape, n=batch), tiling=None))
    return out
