"""Analytical performance simulator for systolic-array + SIMD DNN accelerators."""

__version__ = "0.1.0"

from .specs import (  # noqa: F401
    ConvShape,
    HardwareConfig,
    LayerSpec,
    LayerStats,
    NetworkStats,
    SimdShape,
    SpecError,
    Tiling,
    TilingInfeasibleError,
    load_hardware_spec,
    load_network_spec,
)
