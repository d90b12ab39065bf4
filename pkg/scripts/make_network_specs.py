#!/usr/bin/env python3
"""Regenerate the example hardware and network spec files under specs/.

The ResNet topologies follow the torchvision graphs (stride on the 3x3 conv
of a bottleneck).  Batch size ships as 1; training runs pass --batch to the
CLI instead of editing the files.
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
SPECS = ROOT / "specs"

# Per-bit widths: 16-bit weight/ifmap + 32-bit psum for the training
# platforms, 8-bit weight/ifmap for the inference platforms, 32-bit SIMD
# data everywhere.  BBuf/IMem sizes and the op latency table are local
# choices.
OP_LATENCY = {"add": 1, "sub": 1, "mul": 1, "div": 4, "max": 1}
KB = 1024


def hw_config(j, k, wbuf_kb, ibuf_kb, obuf_kb, vmem_kb, bw, b_w, b_i):
    return {
        "pe_rows": j,
        "pe_cols": k,
        "wbuf_bytes": wbuf_kb * KB,
        "bbuf_bytes": 32 * KB,
        "ibuf_bytes": ibuf_kb * KB,
        "obuf_bytes": obuf_kb * KB,
        "vmem_bytes": vmem_kb * KB,
        "imem_bytes": 32 * KB,
        "bw_w": bw,
        "bw_i": bw,
        "bw_o": bw,
        "bw_v": bw,
        "bits_weight": b_w,
        "bits_bias": 32,
        "bits_ifmap": b_i,
        "bits_psum": 32,
        "bits_simd_in": 32,
        "bits_simd_out": 32,
        "op_latency": OP_LATENCY,
    }


HW_FILES = {
    # training platforms
    "ht1": hw_config(16, 16, 256, 128, 256, 256, 128, 16, 16),
    "ht2": hw_config(32, 32, 512, 256, 512, 512, 256, 16, 16),
    "ht3": hw_config(64, 64, 1024, 512, 1024, 1024, 512, 16, 16),
    # inference platforms
    "hi1": hw_config(16, 16, 32, 32, 128, 128, 128, 8, 8),
    "hi2": hw_config(32, 32, 256, 128, 512, 512, 256, 8, 8),
    "hi3": hw_config(64, 64, 512, 256, 1024, 1024, 512, 8, 8),
    # tiny platform for the smoke tests and worked examples
    "tiny4": hw_config(4, 4, 8, 8, 8, 64, 128, 16, 16),
}
HW_FILES["tiny4"]["bbuf_bytes"] = 1 * KB
HW_FILES["tiny4"]["imem_bytes"] = 16 * KB
HW_FILES["tiny4"]["wbuf_bytes"] = 8 * KB
HW_FILES["tiny4"]["ibuf_bytes"] = 8 * KB
HW_FILES["tiny4"]["obuf_bytes"] = 8 * KB
HW_FILES["tiny4"]["vmem_bytes"] = 64 * KB


def conv(name, ih, ic, oc, k, s=1, pad=0, bias=False):
    return {"name": name, "kind": "Conv",
            "dims": {"n": 1, "ih": ih, "iw": ih, "ic": ic, "oc": oc,
                     "kh": k, "kw": k, "s": s, "pad": pad,
                     **({"bias": True} if bias else {})}}


def simd(name, kind, h, c, **extra):
    return {"name": name, "kind": kind, "dims": {"h": h, "w": h, "n": 1, "c": c, **extra}}


def out_dim(ih, k, s, pad):
    return (ih + 2 * pad - k) // s + 1


def bn_relu(name, h, c, relu=True):
    layers = [simd(f"{name}.bn", "BatchNorm", h, c)]
    if relu:
        layers.append(simd(f"{name}.relu", "ReLU", h, c))
    return layers


def resnet50():
    layers = [conv("conv1", 224, 3, 64, 7, s=2, pad=3)]
    h = out_dim(224, 7, 2, 3)  # 112
    layers += bn_relu("conv1", h, 64)
    layers.append(simd("pool1", "MaxPool", h, 64, rh=3, rw=3, sp=2, pad=1))
    h = out_dim(h, 3, 2, 1)  # 56
    in_ch = 64
    stage_cfg = [(3, 64, 256, 1), (4, 128, 512, 2), (6, 256, 1024, 2), (3, 512, 2048, 2)]
    for si, (blocks, mid, out_ch, stride) in enumerate(stage_cfg, start=1):
        for bi in range(blocks):
            s = stride if bi == 0 else 1
            p = f"layer{si}.{bi}"
            h_out = out_dim(h, 3, s, 1)
            layers.append(conv(f"{p}.conv1", h, in_ch, mid, 1))
            layers += bn_relu(f"{p}.conv1", h, mid)
            layers.append(conv(f"{p}.conv2", h, mid, mid, 3, s=s, pad=1))
            layers += bn_relu(f"{p}.conv2", h_out, mid)
            layers.append(conv(f"{p}.conv3", h_out, mid, out_ch, 1))
            layers += bn_relu(f"{p}.conv3", h_out, out_ch, relu=False)
            if bi == 0:
                layers.append(conv(f"{p}.downsample", h, in_ch, out_ch, 1, s=s))
                layers += bn_relu(f"{p}.downsample", h_out, out_ch, relu=False)
            layers.append(simd(f"{p}.add", "TensorAdd", h_out, out_ch))
            layers.append(simd(f"{p}.relu", "ReLU", h_out, out_ch))
            h = h_out
            in_ch = out_ch
    layers.append(simd("gap", "GlobalAvgPool", h, in_ch))
    layers.append({"name": "fc", "kind": "FC",
                   "dims": {"n": 1, "ic": in_ch, "oc": 1000, "bias": True}})
    return layers


def resnet18():
    layers = [conv("conv1", 224, 3, 64, 7, s=2, pad=3)]
    h = out_dim(224, 7, 2, 3)
    layers += bn_relu("conv1", h, 64)
    layers.append(simd("pool1", "MaxPool", h, 64, rh=3, rw=3, sp=2, pad=1))
    h = out_dim(h, 3, 2, 1)
    in_ch = 64
    stage_cfg = [(2, 64, 1), (2, 128, 2), (2, 256, 2), (2, 512, 2)]
    for si, (blocks, out_ch, stride) in enumerate(stage_cfg, start=1):
        for bi in range(blocks):
            s = stride if bi == 0 else 1
            p = f"layer{si}.{bi}"
            h_out = out_dim(h, 3, s, 1)
            layers.append(conv(f"{p}.conv1", h, in_ch, out_ch, 3, s=s, pad=1))
            layers += bn_relu(f"{p}.conv1", h_out, out_ch)
            layers.append(conv(f"{p}.conv2", h_out, out_ch, out_ch, 3, pad=1))
            layers += bn_relu(f"{p}.conv2", h_out, out_ch, relu=False)
            if bi == 0 and (s != 1 or in_ch != out_ch):
                layers.append(conv(f"{p}.downsample", h, in_ch, out_ch, 1, s=s))
                layers += bn_relu(f"{p}.downsample", h_out, out_ch, relu=False)
            layers.append(simd(f"{p}.add", "TensorAdd", h_out, out_ch))
            layers.append(simd(f"{p}.relu", "ReLU", h_out, out_ch))
            h = h_out
            in_ch = out_ch
    layers.append(simd("gap", "GlobalAvgPool", h, in_ch))
    layers.append({"name": "fc", "kind": "FC",
                   "dims": {"n": 1, "ic": in_ch, "oc": 1000, "bias": True}})
    return layers


def smoke_conv():
    layer = conv("conv0", 8, 4, 8, 3, bias=True)
    layer["tiling"] = {"outer": {"oh": 6, "ow": 6, "n": 1, "kh": 3, "kw": 3,
                                 "ic": 4, "oc": 4}}
    return [layer]


def toy4():
    return [
        conv("conv0", 8, 4, 8, 3, bias=True),
        simd("relu0", "ReLU", 6, 8),
        simd("add0", "TensorAdd", 6, 8),
        simd("pool0", "MaxPool", 6, 8, rh=2, rw=2, sp=2),
    ]


def smoke_train():
    return [
        conv("conv0", 8, 4, 8, 3, bias=True),
        simd("bn0", "BatchNorm", 6, 8),
        simd("relu0", "ReLU", 6, 8),
    ]


NET_FILES = {
    "smoke_conv": smoke_conv,
    "toy4": toy4,
    "smoke_train": smoke_train,
    "resnet18": resnet18,
    "resnet50": resnet50,
}

# Placeholder backend characterization: NOT silicon data, only exercises the
# energy model's structure (realistic orders of magnitude, invented values).
BACKEND_EXAMPLE = {
    "_comment": "PLACEHOLDER VALUES - not from any silicon characterization",
    "p_sa_dyn": 2.0,
    "p_sa_leak": 0.2,
    "p_simd_dyn": 0.5,
    "p_simd_leak": 0.05,
    "e_buff": {"WBuf": 3.0e-14, "IBuf": 2.0e-14, "OBuf": 3.0e-14,
               "BBuf": 1.0e-14, "VMem": 3.0e-14},
    "e_dram": 4.0e-12,
    "t_clk": 1.0e-9,
}


def main():
    (SPECS / "hw").mkdir(parents=True, exist_ok=True)
    (SPECS / "nets").mkdir(parents=True, exist_ok=True)
    (SPECS / "backend").mkdir(parents=True, exist_ok=True)
    for name, cfg in HW_FILES.items():
        (SPECS / "hw" / f"{name}.json").write_text(json.dumps(cfg, indent=2) + "\n")
    for name, fn in NET_FILES.items():
        (SPECS / "nets" / f"{name}.json").write_text(json.dumps(fn(), indent=2) + "\n")
    (SPECS / "backend" / "example.json").write_text(
        json.dumps(BACKEND_EXAMPLE, indent=2) + "\n")
    print(f"wrote specs under {SPECS}")


if __name__ == "__main__":
    main()
