"""Expand an inference network into the full training workload.

The backward pass of a conv layer maps onto two forward-style convolutions
over transformed tensors: the input gradient convolves the dilated, padded
output gradient with the flipped filter (channel dims swapped), and the
weight gradient convolves the stored input with the dilated output gradient
acting as the filter (channel and batch dims swapped).  Only tensor sizes
matter here, so the transforms reduce to dimension arithmetic; dilation and
padding zeros are folded into the backward ifmap extent and costed at face
value.  The work of materializing the transformed tensors (dilating,
flipping, transposing) is costed as zero cycles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .specs import ConvShape, LayerSpec, SimdShape, SpecError


def backward_conv_shapes(fwd: ConvShape) -> Tuple[ConvShape, ConvShape]:
    """Shapes of the two backward convolutions derived from a forward conv.

    Both are stride-1, bias-free convs whose ofmap dims equal the forward
    ifmap dims (input gradient) and the forward kernel dims (weight
    gradient).  The backward ifmap extents fold in the dilation/padding of
    the transform and any forward padding, keeping the shapes consistent
    with the ofmap = (ifmap - kernel)/stride + 1 identity.
    """
    s = fwd.stride
    # Input gradient: dilated+padded dY (OC channels) conv flipped W -> dX.
    dx = ConvShape(
        n=fwd.n,
        ih=fwd.ih + fwd.kh - 1,
        iw=fwd.iw + fwd.kw - 1,
        ic=fwd.oc,
        oh=fwd.ih,
        ow=fwd.iw,
        oc=fwd.ic,
        kh=fwd.kh,
        kw=fwd.kw,
        stride=1,
        has_bias=False,
    )
    # Weight gradient: X (batch acts as channels) conv dilated dY -> dW.
    dw = ConvShape(
        n=fwd.ic,
        ih=s * (fwd.oh - 1) + fwd.kh,
        iw=s * (fwd.ow - 1) + fwd.kw,
        ic=fwd.n,
        oh=fwd.kh,
        ow=fwd.kw,
        oc=fwd.oc,
        kh=s * (fwd.oh - 1) + 1,
        kw=s * (fwd.ow - 1) + 1,
        stride=1,
        has_bias=False,
    )
    return dx, dw


@dataclass(frozen=True)
class TrainingGraph:
    """Forward, backward, and parameter-update layer lists of one iteration."""

    forward: Tuple[LayerSpec, ...]
    backward: Tuple[LayerSpec, ...]
    updates: Tuple[LayerSpec, ...]

    @property
    def all_layers(self) -> list:
        return list(self.forward) + list(self.backward) + list(self.updates)


def _param_update(name: str, source: str, volume: int) -> LayerSpec:
    return LayerSpec(name=name, kind="ParamUpdate",
                     shape=SimdShape(h=1, w=1, n=1, c=volume), source=source)


def _backward_layers(layer: LayerSpec, is_first: bool) -> List[LayerSpec]:
    kind = layer.kind
    shape = layer.shape
    out: List[LayerSpec] = []
    if kind in ("Conv", "FC"):
        dx_shape, dw_shape = backward_conv_shapes(shape)
        if not is_first:
            out.append(LayerSpec(name=f"{layer.name}.grad_ifmap", kind="ConvGradIfmap",
                                 shape=dx_shape, source=layer.name))
        out.append(LayerSpec(name=f"{layer.name}.grad_weight", kind="ConvGradWeight",
                             shape=dw_shape, source=layer.name))
    elif kind == "ReLU":
        out.append(LayerSpec(name=f"{layer.name}.bwd", kind="ReluBackward",
                             shape=shape, source=layer.name))
    elif kind == "TensorAdd":
        out.append(LayerSpec(name=f"{layer.name}.bwd", kind="TensorAddBackward",
                             shape=shape, source=layer.name))
    elif kind in ("MaxPool", "AvgPool", "GlobalAvgPool"):
        out.append(LayerSpec(name=f"{layer.name}.bwd", kind="PoolBackward",
                             shape=shape, source=layer.name))
    elif kind == "BatchNorm":
        out.append(LayerSpec(name=f"{layer.name}.bwd", kind="BnBackward",
                             shape=shape, source=layer.name))
    else:
        raise SpecError(f"layer {layer.name!r}: kind {kind} has no backward expansion")
    return out


def _update_layers(layer: LayerSpec) -> List[LayerSpec]:
    out: List[LayerSpec] = []
    if layer.kind in ("Conv", "FC"):
        shape = layer.shape
        out.append(_param_update(f"{layer.name}.weight.update", layer.name,
                                 shape.weight_volume))
        if shape.has_bias:
            out.append(_param_update(f"{layer.name}.bias.update", layer.name, shape.oc))
    elif layer.kind == "BatchNorm":
        out.append(_param_update(f"{layer.name}.gamma.update", layer.name, layer.shape.c))
        out.append(_param_update(f"{layer.name}.beta.update", layer.name, layer.shape.c))
    return out


def expand_training(network: List[LayerSpec]) -> TrainingGraph:
    """Build the training workload from a forward layer list.

    The forward list is taken as-is (batch-norm layers included in training
    mode); the backward list reverses the network, emitting each layer's
    gradient layers; updates cover every weight, bias, gamma, and beta
    tensor.  The first layer's input-gradient conv is dropped since nothing
    upstream consumes it.
    """
    forward_kinds = ("Conv", "FC", "ReLU", "TensorAdd", "MaxPool", "AvgPool",
                     "GlobalAvgPool", "BatchNorm")
    for layer in network:
        if layer.kind not in forward_kinds:
            raise SpecError(f"layer {layer.name!r}: kind {layer.kind} is not a "
                            f"forward layer; cannot expand to training")
    backward: List[LayerSpec] = []
    for i, layer in enumerate(reversed(network)):
        is_first = (i == len(network) - 1)
        backward.extend(_backward_layers(layer, is_first))
    updates: List[LayerSpec] = []
    for layer in network:
        updates.extend(_update_layers(layer))
    # Expansion must not inherit forward tilings: backward shapes differ.
    forward = tuple(network)
    return TrainingGraph(forward=forward, backward=tuple(backward), updates=tuple(updates))
