"""Domain types plus hardware/network spec file loading.

Everything downstream (tiler, engines, oracle, explorer) speaks in terms of
the types defined here.  All types are immutable after construction; the
loaders validate every invariant up front so the model code can assume
well-formed inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Union

# Arithmetic op kinds known to the SIMD latency table.  "max" covers both
# max and compare operations (they use the same ALU path).
OP_KINDS = ("add", "sub", "mul", "div", "max")

CONV_KINDS = ("Conv", "FC", "ConvGradIfmap", "ConvGradWeight")
POOL_KINDS = ("MaxPool", "AvgPool", "GlobalAvgPool")
SIMD_KINDS = (
    "ReLU",
    "TensorAdd",
    "MaxPool",
    "AvgPool",
    "GlobalAvgPool",
    "BatchNorm",
    "ReluBackward",
    "TensorAddBackward",
    "PoolBackward",
    "BnBackward",
    "ParamUpdate",
)
LAYER_KINDS = CONV_KINDS + SIMD_KINDS

# Keys used in per-layer access maps.
DRAM_KEYS = ("weight", "ifmap", "psum_ofmap", "bias", "simd_in", "simd_out")
SRAM_KEYS = ("WBuf", "IBuf", "OBuf", "BBuf", "VMem")

CONV_TILE_DIMS = ("oh", "ow", "n", "kh", "kw", "ic", "oc")
SIMD_TILE_DIMS = ("h", "w", "n", "c")


class SpecError(ValueError):
    """Raised for malformed or inconsistent spec files and layer definitions."""


class TilingInfeasibleError(RuntimeError):
    """Raised when no tiling fits the on-chip buffers.

    ``buffer`` names the SRAM that overflows even at a single-element tile.
    """

    def __init__(self, buffer: str, message: str):
        super().__init__(message)
        self.buffer = buffer


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _require_positive(name: str, value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise SpecError(f"{where}: {name} must be positive (an integer > 0), got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Hardware configuration
# ---------------------------------------------------------------------------

_HW_SIZE_FIELDS = ("wbuf_bytes", "bbuf_bytes", "ibuf_bytes", "obuf_bytes", "vmem_bytes", "imem_bytes")
_HW_BW_FIELDS = ("bw_w", "bw_i", "bw_o", "bw_v")
_HW_BIT_FIELDS = ("bits_weight", "bits_bias", "bits_ifmap", "bits_psum", "bits_simd_in", "bits_simd_out")


@dataclass(frozen=True)
class HardwareConfig:
    """Parameter set of the systolic + SIMD platform.

    Sizes are in bytes, bandwidths in bits/cycle per off-chip interface,
    bit-widths in bits per element.  ``op_latency`` maps arithmetic kind to
    cycles per ALU.  The SIMD array has ``pe_cols`` ALUs (one per PE column).
    ``imem_bytes`` is parsed and stored but never affects performance: no
    instruction-traffic model exists, so IMem is capacity-only metadata.
    """

    pe_rows: int  # J
    pe_cols: int  # K
    wbuf_bytes: int
    bbuf_bytes: int
    ibuf_bytes: int
    obuf_bytes: int
    vmem_bytes: int
    imem_bytes: int
    bw_w: int
    bw_i: int
    bw_o: int
    bw_v: int
    bits_weight: int
    bits_bias: int
    bits_ifmap: int
    bits_psum: int
    bits_simd_in: int
    bits_simd_out: int
    op_latency: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        where = "hardware config"
        for name in ("pe_rows", "pe_cols") + _HW_SIZE_FIELDS + _HW_BW_FIELDS + _HW_BIT_FIELDS:
            _require_positive(name, getattr(self, name), where)
        lat = dict(self.op_latency)
        for kind in OP_KINDS:
            if kind not in lat:
                raise SpecError(f"{where}: op_latency missing kind {kind!r}")
            _require_positive(f"op_latency[{kind}]", lat[kind], where)
        object.__setattr__(self, "op_latency", lat)

    @property
    def simd_lanes(self) -> int:
        return self.pe_cols

    def latency(self, kind: str) -> int:
        return self.op_latency[kind]

    def to_dict(self) -> dict:
        d = {name: getattr(self, name) for name in
             ("pe_rows", "pe_cols") + _HW_SIZE_FIELDS + _HW_BW_FIELDS + _HW_BIT_FIELDS}
        d["op_latency"] = dict(self.op_latency)
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], where: str = "hardware config") -> "HardwareConfig":
        if not isinstance(data, Mapping):
            raise SpecError(f"{where}: expected a JSON object at top level")
        known = set(("pe_rows", "pe_cols") + _HW_SIZE_FIELDS + _HW_BW_FIELDS + _HW_BIT_FIELDS + ("op_latency",))
        missing = [k for k in known if k not in data]
        if missing:
            raise SpecError(f"{where}: missing field(s) {', '.join(sorted(missing))}")
        unknown = [k for k in data if k not in known]
        if unknown:
            raise SpecError(f"{where}: unknown field(s) {', '.join(sorted(unknown))}")
        kwargs = dict(data)
        try:
            return cls(**kwargs)
        except SpecError as exc:
            raise SpecError(f"{where}: {exc}") from None


def load_hardware_spec(path: Union[str, Path]) -> HardwareConfig:
    """Read and validate a hardware specification JSON file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise SpecError(f"hardware spec {path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"hardware spec {path}: malformed JSON ({exc})") from None
    return HardwareConfig.from_dict(data, where=f"hardware spec {path}")


def save_hardware_spec(hw: HardwareConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(hw.to_dict(), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Layer shapes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvShape:
    """Tensor dimensions of a convolution (or FC-as-1x1-conv) layer.

    Padding is stored explicitly so that the ofmap dims can be validated
    against the ifmap/kernel/stride identity and so backward shapes can be
    constructed without guessing.
    """

    n: int
    ih: int
    iw: int
    ic: int
    oh: int
    ow: int
    oc: int
    kh: int
    kw: int
    stride: int = 1
    pad_h: int = 0
    pad_w: int = 0
    has_bias: bool = False

    def __post_init__(self):
        where = "conv shape"
        for name in ("n", "ih", "iw", "ic", "oh", "ow", "oc", "kh", "kw", "stride"):
            _require_positive(name, getattr(self, name), where)
        for name in ("pad_h", "pad_w"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise SpecError(f"{where}: {name} must be a non-negative integer, got {v!r}")
        exp_oh = (self.ih + 2 * self.pad_h - self.kh) // self.stride + 1
        exp_ow = (self.iw + 2 * self.pad_w - self.kw) // self.stride + 1
        if self.oh != exp_oh or self.ow != exp_ow:
            raise SpecError(
                f"{where}: ofmap dims {self.oh}x{self.ow} inconsistent with "
                f"ifmap {self.ih}x{self.iw}, kernel {self.kh}x{self.kw}, "
                f"stride {self.stride}, pad ({self.pad_h},{self.pad_w}); "
                f"expected {exp_oh}x{exp_ow}"
            )

    @classmethod
    def from_input(cls, n, ih, iw, ic, oc, kh, kw, stride=1, pad_h=0, pad_w=0, has_bias=False) -> "ConvShape":
        oh = (ih + 2 * pad_h - kh) // stride + 1
        ow = (iw + 2 * pad_w - kw) // stride + 1
        return cls(n=n, ih=ih, iw=iw, ic=ic, oh=oh, ow=ow, oc=oc, kh=kh, kw=kw,
                   stride=stride, pad_h=pad_h, pad_w=pad_w, has_bias=has_bias)

    @property
    def mac_count(self) -> int:
        return self.n * self.oh * self.ow * self.oc * self.kh * self.kw * self.ic

    @property
    def weight_volume(self) -> int:
        return self.kh * self.kw * self.ic * self.oc

    @property
    def ofmap_volume(self) -> int:
        return self.oh * self.ow * self.n * self.oc

    def full_dim(self, dim: str) -> int:
        return {"oh": self.oh, "ow": self.ow, "n": self.n, "kh": self.kh,
                "kw": self.kw, "ic": self.ic, "oc": self.oc}[dim]


@dataclass(frozen=True)
class SimdShape:
    """Tensor dimensions of a SIMD (non-conv) layer.

    ``h``/``w``/``n``/``c`` are the dims of the layer's primary 4D tensor
    (the input tensor for pools, the common tensor otherwise).  Pool layers
    additionally carry the window (``rh`` x ``rw``), the window stride and
    padding, and a ``pool_mode`` so the backward pass knows which forward
    flavor produced it.  ``n_inputs`` is the simultaneous input operand count
    (2 for tensor addition).
    """

    h: int
    w: int
    n: int
    c: int
    rh: int = 0
    rw: int = 0
    sp_h: int = 0
    sp_w: int = 0
    pool_pad: int = 0
    pool_mode: str = ""  # "max" | "avg" | "global_avg" for pool kinds
    n_inputs: int = 1

    def __post_init__(self):
        where = "simd shape"
        for name in ("h", "w", "n", "c"):
            _require_positive(name, getattr(self, name), where)
        if self.pool_mode:
            if self.pool_mode not in ("max", "avg", "global_avg"):
                raise SpecError(f"{where}: unknown pool_mode {self.pool_mode!r}")
            for name in ("rh", "rw", "sp_h", "sp_w"):
                _require_positive(name, getattr(self, name), where)
            if self.pooled_h < 1 or self.pooled_w < 1:
                raise SpecError(f"{where}: pool window/stride produce empty output")

    @property
    def volume(self) -> int:
        return self.h * self.w * self.n * self.c

    @property
    def n_eff(self) -> int:
        # Effective batch size of a batch-norm reduction: h, w, n all act as batch.
        return self.h * self.w * self.n

    @property
    def pooled_h(self) -> int:
        return (self.h + 2 * self.pool_pad - self.rh) // self.sp_h + 1

    @property
    def pooled_w(self) -> int:
        return (self.w + 2 * self.pool_pad - self.rw) // self.sp_w + 1


Shape = Union[ConvShape, SimdShape]


# ---------------------------------------------------------------------------
# Tiling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tiling:
    """Outer tile sizes T_phi and inner tile sizes t_phi per dimension.

    Conv tilings carry the seven loop dims plus derived ifmap halo extents
    (``ih``/``iw``); SIMD tilings carry h/w/n/c.  Inner tiles follow the
    fixed array mapping: t_ic = rows, t_oc = cols (clamped to the outer tile)
    for the systolic array and t_c = lanes for the SIMD array, all other
    inner tiles are 1.
    """

    outer: Mapping[str, int]
    inner: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "outer", dict(self.outer))
        object.__setattr__(self, "inner", dict(self.inner))
        for name, val in list(self.outer.items()) + list(self.inner.items()):
            _require_positive(name, val, "tiling")

    def t(self, dim: str) -> int:
        return self.outer[dim]


def conv_tiling(shape: ConvShape, hw: HardwareConfig, outer: Mapping[str, int]) -> Tiling:
    """Build a conv Tiling from outer tile sizes, deriving halo and inner tiles."""
    out = {}
    for dim in CONV_TILE_DIMS:
        if dim not in outer:
            raise SpecError(f"conv tiling: missing outer tile for dim {dim!r}")
        t = outer[dim]
        full = shape.full_dim(dim)
        if not (1 <= t <= full):
            raise SpecError(f"conv tiling: T_{dim}={t} outside [1, {full}]")
        out[dim] = t
    # Sliding-window halo: the ifmap extent needed to produce a T_oh x T_ow tile.
    out["ih"] = shape.stride * (out["oh"] - 1) + out["kh"]
    out["iw"] = shape.stride * (out["ow"] - 1) + out["kw"]
    inner = {dim: 1 for dim in CONV_TILE_DIMS + ("ih", "iw")}
    inner["ic"] = min(hw.pe_rows, out["ic"])
    inner["oc"] = min(hw.pe_cols, out["oc"])
    return Tiling(outer=out, inner=inner)


def simd_tiling(dims: Mapping[str, int], hw: HardwareConfig, outer: Mapping[str, int]) -> Tiling:
    """Build a SIMD Tiling over template dims {h, w, n, c}."""
    out = {}
    for dim in SIMD_TILE_DIMS:
        if dim not in outer:
            raise SpecError(f"simd tiling: missing outer tile for dim {dim!r}")
        t = outer[dim]
        if not (1 <= t <= dims[dim]):
            raise SpecError(f"simd tiling: T_{dim}={t} outside [1, {dims[dim]}]")
        out[dim] = t
    inner = {"h": 1, "w": 1, "n": 1, "c": min(hw.simd_lanes, out["c"])}
    return Tiling(outer=out, inner=inner)


# ---------------------------------------------------------------------------
# Layer spec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LayerSpec:
    """One network layer: kind, shape, optional fixed tiling and bit overrides.

    ``bits`` optionally overrides the hardware bit-widths for this layer
    (keys: weight/ifmap/psum/bias for conv kinds, in/out for SIMD kinds).
    ``source`` records the forward layer a backward/update layer derives from.
    """

    name: str
    kind: str
    shape: Shape
    tiling: Optional[Tiling] = None
    bits: Optional[Mapping[str, int]] = None
    source: Optional[str] = None

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise SpecError(f"layer {self.name!r}: unknown kind {self.kind!r}")
        if self.kind in CONV_KINDS and not isinstance(self.shape, ConvShape):
            raise SpecError(f"layer {self.name!r}: kind {self.kind} requires a conv shape")
        if self.kind not in CONV_KINDS and not isinstance(self.shape, SimdShape):
            raise SpecError(f"layer {self.name!r}: kind {self.kind} requires a simd shape")
        if self.bits is not None:
            object.__setattr__(self, "bits", dict(self.bits))

    @property
    def is_conv(self) -> bool:
        return self.kind in CONV_KINDS

    def hw_with_overrides(self, hw: HardwareConfig) -> HardwareConfig:
        """Apply this layer's bit-width overrides to a hardware config."""
        if not self.bits:
            return hw
        mapping = {"weight": "bits_weight", "ifmap": "bits_ifmap", "psum": "bits_psum",
                   "bias": "bits_bias", "in": "bits_simd_in", "out": "bits_simd_out"}
        kwargs = {}
        for key, val in self.bits.items():
            if key not in mapping:
                raise SpecError(f"layer {self.name!r}: unknown bits key {key!r}")
            kwargs[mapping[key]] = val
        return replace(hw, **kwargs)


# ---------------------------------------------------------------------------
# Per-layer and network statistics
# ---------------------------------------------------------------------------


def _zero_map(keys) -> dict:
    return {k: 0 for k in keys}


@dataclass(frozen=True)
class LayerStats:
    """Cycle, access, and op counts for one evaluated layer.

    Access counts are in bits.  ``total_cycles == compute_cycles +
    stall_cycles`` always holds; compute cycles include the per-tile pipeline
    setup overhead.
    """

    layer: str
    kind: str
    executed_on: str  # "SA" | "SIMD"
    compute_cycles: int
    stall_cycles: int
    dram_bits: Mapping[str, int]
    sram_bits: Mapping[str, int]
    op_counts: Mapping[str, int]

    def __post_init__(self):
        if self.compute_cycles < 0 or self.stall_cycles < 0:
            raise ValueError(f"layer {self.layer!r}: negative cycle count")
        dram = _zero_map(DRAM_KEYS)
        dram.update(self.dram_bits)
        sram = _zero_map(SRAM_KEYS)
        sram.update(self.sram_bits)
        object.__setattr__(self, "dram_bits", dram)
        object.__setattr__(self, "sram_bits", sram)
        object.__setattr__(self, "op_counts", dict(self.op_counts))

    @property
    def total_cycles(self) -> int:
        return self.compute_cycles + self.stall_cycles

    @property
    def dram_bits_total(self) -> int:
        return sum(self.dram_bits.values())


@dataclass(frozen=True)
class NetworkStats:
    """Per-layer stats plus whole-network aggregates (layers run sequentially)."""

    layers: tuple

    @property
    def c_sa(self) -> int:
        return sum(s.compute_cycles for s in self.layers if s.executed_on == "SA")

    @property
    def c_simd(self) -> int:
        return sum(s.compute_cycles for s in self.layers if s.executed_on == "SIMD")

    @property
    def l_total(self) -> int:
        return sum(s.total_cycles for s in self.layers)

    @property
    def dram_bits(self) -> dict:
        total = _zero_map(DRAM_KEYS)
        for s in self.layers:
            for k, v in s.dram_bits.items():
                total[k] += v
        return total

    @property
    def dram_bits_total(self) -> int:
        return sum(self.dram_bits.values())

    @property
    def sram_bits(self) -> dict:
        total = _zero_map(SRAM_KEYS)
        for s in self.layers:
            for k, v in s.sram_bits.items():
                total[k] += v
        return total

    @property
    def op_counts(self) -> dict:
        total: dict = {}
        for s in self.layers:
            for k, v in s.op_counts.items():
                total[k] = total.get(k, 0) + v
        return total


# ---------------------------------------------------------------------------
# Network spec file loading
# ---------------------------------------------------------------------------


def _get_dim(dims: Mapping, key: str, layer: str, default=None) -> int:
    if key in dims:
        v = dims[key]
        _require_positive(key, v, f"layer {layer!r}")
        return v
    if default is not None:
        return default
    raise SpecError(f"layer {layer!r}: missing dim {key!r}")


def _conv_shape_from_dims(dims: Mapping, kind: str, layer: str) -> ConvShape:
    if kind == "FC":
        # An FC layer is a 1x1 convolution over a 1x1 feature map.
        ic = _get_dim(dims, "ic", layer)
        oc = _get_dim(dims, "oc", layer)
        n = _get_dim(dims, "n", layer, 1)
        return ConvShape(n=n, ih=1, iw=1, ic=ic, oh=1, ow=1, oc=oc, kh=1, kw=1,
                         stride=1, has_bias=bool(dims.get("bias", False)))
    n = _get_dim(dims, "n", layer, 1)
    ih = _get_dim(dims, "ih", layer)
    iw = _get_dim(dims, "iw", layer)
    ic = _get_dim(dims, "ic", layer)
    oc = _get_dim(dims, "oc", layer)
    kh = _get_dim(dims, "kh", layer)
    kw = _get_dim(dims, "kw", layer)
    s = _get_dim(dims, "s", layer, 1)
    pad = dims.get("pad", 0)
    pad_h = dims.get("pad_h", pad)
    pad_w = dims.get("pad_w", pad)
    has_bias = bool(dims.get("bias", False))
    try:
        shape = ConvShape.from_input(n=n, ih=ih, iw=iw, ic=ic, oc=oc, kh=kh, kw=kw,
                                     stride=s, pad_h=pad_h, pad_w=pad_w, has_bias=has_bias)
    except SpecError as exc:
        raise SpecError(f"layer {layer!r}: {exc}") from None
    # Declared ofmap dims, when present, must agree with the derived ones.
    for key, derived in (("oh", shape.oh), ("ow", shape.ow)):
        if key in dims and dims[key] != derived:
            raise SpecError(
                f"layer {layer!r}: declared {key}={dims[key]} inconsistent with "
                f"ifmap/kernel/stride (expected {derived})"
            )
    return shape


def _simd_shape_from_dims(dims: Mapping, kind: str, layer: str) -> SimdShape:
    if kind == "ParamUpdate":
        c = _get_dim(dims, "c", layer)
        return SimdShape(h=1, w=1, n=1, c=c)
    h = _get_dim(dims, "h", layer)
    w = _get_dim(dims, "w", layer)
    n = _get_dim(dims, "n", layer, 1)
    c = _get_dim(dims, "c", layer)
    kwargs: dict = {"h": h, "w": w, "n": n, "c": c}
    pool_modes = {"MaxPool": "max", "AvgPool": "avg", "GlobalAvgPool": "global_avg"}
    if kind in pool_modes or kind == "PoolBackward":
        mode = pool_modes.get(kind) or dims.get("mode")
        if mode not in ("max", "avg", "global_avg"):
            raise SpecError(f"layer {layer!r}: PoolBackward requires mode max/avg/global_avg")
        if mode == "global_avg":
            rh, rw = h, w
            sp_h, sp_w = h, w
            pad = 0
        else:
            r = dims.get("r")
            rh = _get_dim(dims, "rh", layer, r)
            rw = _get_dim(dims, "rw", layer, r)
            sp = _get_dim(dims, "sp", layer, rh)
            sp_h = dims.get("sp_h", sp)
            sp_w = dims.get("sp_w", sp)
            pad = dims.get("pad", 0)
        kwargs.update(rh=rh, rw=rw, sp_h=sp_h, sp_w=sp_w, pool_pad=pad, pool_mode=mode)
    if kind in ("TensorAdd", "TensorAddBackward"):
        kwargs["n_inputs"] = dims.get("inputs", 2)
    try:
        return SimdShape(**kwargs)
    except SpecError as exc:
        raise SpecError(f"layer {layer!r}: {exc}") from None


def _parse_layer_entry(entry: Mapping[str, Any], index: int = 0):
    """Parse one network-spec entry -> (LayerSpec, raw outer tiling or None)."""
    if not isinstance(entry, Mapping):
        raise SpecError(f"network spec: layer #{index} is not an object")
    name = entry.get("name", f"layer{index}")
    kind = entry.get("kind")
    if kind not in LAYER_KINDS:
        raise SpecError(f"layer {name!r}: unknown kind {kind!r}")
    dims = entry.get("dims", {})
    if kind in CONV_KINDS:
        shape: Shape = _conv_shape_from_dims(dims, kind, name)
    else:
        shape = _simd_shape_from_dims(dims, kind, name)
    tiling = None
    if "tiling" in entry and entry["tiling"]:
        outer = entry["tiling"].get("outer")
        if not outer:
            raise SpecError(f"layer {name!r}: tiling must provide outer tile sizes")
        # Inner tiles depend on the array size; defer building them until a
        # hardware config is known.  Store the raw outer map.
        tiling = dict(outer)
    bits = entry.get("bits") or None
    return LayerSpec(name=name, kind=kind, shape=shape, tiling=None, bits=bits,
                     source=entry.get("source")), tiling


def load_network_spec(path: Union[str, Path], hw: Optional[HardwareConfig] = None) -> list:
    """Read a network spec file into an ordered list of LayerSpec.

    File-supplied tilings need the array size to derive inner tiles, so a
    hardware config must accompany any file that pins tilings.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise SpecError(f"network spec {path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"network spec {path}: malformed JSON ({exc})") from None
    if not isinstance(data, list):
        raise SpecError(f"network spec {path}: expected a top-level array of layers")
    layers = []
    for i, entry in enumerate(data):
        layer, raw_outer = _parse_layer_entry(entry, i)
        if raw_outer is not None:
            if hw is None:
                raise SpecError(f"layer {layer.name!r}: file pins a tiling; "
                                f"a hardware config is required to resolve it")
            if layer.is_conv:
                tiling = conv_tiling(layer.shape, hw, raw_outer)
            else:
                from .simd_engine import template_dims  # local import, avoids a cycle
                tiling = simd_tiling(template_dims(layer.kind, layer.shape), hw, raw_outer)
            layer = replace(layer, tiling=tiling)
        layers.append(layer)
    return layers


def layer_to_dict(layer: LayerSpec) -> dict:
    """Serialize a LayerSpec back into the network-spec entry format."""
    entry: dict = {"name": layer.name, "kind": layer.kind}
    s = layer.shape
    if isinstance(s, ConvShape):
        dims = {"n": s.n, "ih": s.ih, "iw": s.iw, "ic": s.ic, "oc": s.oc,
                "kh": s.kh, "kw": s.kw, "s": s.stride}
        if s.pad_h or s.pad_w:
            dims["pad_h"] = s.pad_h
            dims["pad_w"] = s.pad_w
        if s.has_bias:
            dims["bias"] = True
        if layer.kind == "FC":
            dims = {"n": s.n, "ic": s.ic, "oc": s.oc}
            if s.has_bias:
                dims["bias"] = True
    else:
        dims = {"h": s.h, "w": s.w, "n": s.n, "c": s.c}
        if s.pool_mode:
            dims.update(rh=s.rh, rw=s.rw, sp_h=s.sp_h, sp_w=s.sp_w)
            if s.pool_pad:
                dims["pad"] = s.pool_pad
            if layer.kind == "PoolBackward":
                dims["mode"] = s.pool_mode
        if layer.kind == "ParamUpdate":
            dims = {"c": s.c}
    entry["dims"] = dims
    if layer.bits:
        entry["bits"] = dict(layer.bits)
    if layer.source:
        entry["source"] = layer.source
    if layer.tiling is not None:
        keys = CONV_TILE_DIMS if layer.is_conv else SIMD_TILE_DIMS
        entry["tiling"] = {"outer": {k: layer.tiling.outer[k] for k in keys}}
    return entry


def save_network_spec(layers, path: Union[str, Path]) -> None:
    entries = [layer_to_dict(l) for l in layers]
    Path(path).write_text(json.dumps(entries, indent=2) + "\n")
