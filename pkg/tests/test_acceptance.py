"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Everything asserted here is exact unless a tolerance is stated
inline.
"""

import itertools
import math
import random
import time
from dataclasses import replace

from tilesim import explorer, oracle, simulate
from tilesim.conv_engine import (
    ConvMultipliers,
    conv_dram_accesses,
    conv_eval,
    conv_sram_accesses,
    conv_stall_cycles,
)
from tilesim.energy import BackendCharacterization, compute_energy
from tilesim.explorer import DseConfig, DsePoint, apply_point, run_dse
from tilesim.simd_engine import bn_backward_eval, template_dims
from tilesim.specs import (
    ConvShape,
    LayerStats,
    NetworkStats,
    SimdShape,
    conv_tiling,
    load_hardware_spec,
    load_network_spec,
    simd_tiling,
)
from tilesim.testing import random_conv_instance, random_conv_shape, random_simd_instance
from tilesim.tiler import TilingInfeasibleError, generate_conv_tiling, validate_tiling
from tilesim.train_expand import backward_conv_shapes, expand_training


def report(criterion: int, message: str):
    print(f"ACCEPTANCE {criterion} PASS: {message}")


def test_criterion_1_oracle_equivalence():
    t0 = time.monotonic()
    n = 200
    for seed in range(n):
        shape, tiling, hw = random_conv_instance(random.Random(seed), max_dim=16)
        stats = conv_eval(shape, tiling, hw, variant="full")
        trace = oracle.simulate_conv(shape, tiling, hw)
        assert trace.total_cycles == stats.total_cycles, seed
        for key in ("weight", "ifmap", "psum_ofmap", "bias"):
            assert trace.bits[key] == stats.dram_bits[key], (seed, key)
    elapsed = time.monotonic() - t0
    assert elapsed < 60
    report(1, f"{n}/{n} exact analytical==oracle matches in {elapsed:.1f}s")


def test_criterion_2_closed_form_spot_values(tiny_hw):
    shape = ConvShape.from_input(n=1, ih=8, iw=8, ic=4, oc=8, kh=3, kw=3, stride=1,
                                 has_bias=True)
    tiling = conv_tiling(shape, tiny_hw,
                         {"oh": 6, "ow": 6, "n": 1, "kh": 3, "kw": 3, "ic": 4, "oc": 4})
    dram = conv_dram_accesses(shape, tiling, tiny_hw)
    assert dram == {"weight": 4608, "ifmap": 8192, "psum_ofmap": 9216, "bias": 256}
    sram = conv_sram_accesses(shape, tiling, tiny_hw)
    assert sram == {"WBuf": 165888, "IBuf": 41472, "OBuf": 156672, "BBuf": 9216}
    full = conv_eval(shape, tiling, tiny_hw)
    assert full.compute_cycles == 660 and full.stall_cycles == 0
    starved = conv_eval(shape, tiling, replace(tiny_hw, bw_i=8))
    assert starved.compute_cycles == 660 and starved.stall_cycles == 376
    report(2, "worked conv example exact: DRAM/SRAM bits, 660 compute, 0/376 stall")


def test_criterion_3_weight_once_law():
    n = 1000
    for seed in range(n):
        shape, tiling, hw = random_conv_instance(random.Random(seed), max_dim=16)
        dram = conv_dram_accesses(shape, tiling, hw)
        assert dram["weight"] == shape.kh * shape.kw * shape.ic * shape.oc * hw.bits_weight
    report(3, f"weight DRAM bits == weight tensor bits on {n}/{n} instances")


def test_criterion_4_stall_case_algebra():
    n = 1000
    for seed in range(n):
        shape, tiling, hw = random_conv_instance(random.Random(seed), max_dim=16)
        mult = ConvMultipliers.from_tiling(shape, tiling)
        occ = conv_stall_cycles(shape, tiling, hw).occurrences
        assert all(v >= 0 for v in occ.values())
        assert sum(occ.values()) == mult.m_outer
    # the oracle's loop-derived case labels never produce an invalid case
    for seed in range(200):
        shape, tiling, hw = random_conv_instance(random.Random(seed), max_dim=12)
        trace = oracle.simulate_conv(shape, tiling, hw)
        assert set(trace.case_counts) <= {1, 2, 4, 5}
    report(4, f"occurrence counts >= 0 and sum to outer tiles on {n} instances; "
              f"cases 3/6/7/8 absent from all traces")


def test_criterion_5_variant_ordering(tiny_hw):
    for seed in range(300):
        shape, tiling, hw = random_conv_instance(random.Random(seed), max_dim=12)
        totals = {v: conv_eval(shape, tiling, hw, variant=v).total_cycles
                  for v in ("nostall", "simplified", "full")}
        assert totals["nostall"] <= totals["simplified"] <= totals["full"], seed
    shape = ConvShape.from_input(n=1, ih=8, iw=8, ic=4, oc=8, kh=3, kw=3, stride=1,
                                 has_bias=True)
    tiling = conv_tiling(shape, tiny_hw,
                         {"oh": 6, "ow": 6, "n": 1, "kh": 3, "kw": 3, "ic": 4, "oc": 4})
    starved = replace(tiny_hw, bw_i=8)
    ratio = (conv_eval(shape, tiling, starved).total_cycles
             / conv_eval(shape, tiling, starved, variant="nostall").total_cycles)
    assert ratio >= 1.5
    report(5, f"nostall <= simplified <= full on 300 layers; "
              f"full/nostall = {ratio:.2f} on the bandwidth-starved layer")


def test_criterion_6_training_transforms(specs_dir):
    n = 1000
    for seed in range(n):
        fwd = random_conv_shape(random.Random(seed), max_dim=20)
        dx, dw = backward_conv_shapes(fwd)
        assert (dx.oh, dx.ow) == (fwd.ih, fwd.iw)
        assert (dw.oh, dw.ow) == (fwd.kh, fwd.kw)
    hw = load_hardware_spec(specs_dir / "hw" / "ht3.json")
    net = load_network_spec(specs_dir / "nets" / "resnet50.json", hw)
    net = simulate.scale_batch(net, 32)
    _, dw = backward_conv_shapes(net[0].shape)
    assert (dw.kh, dw.kw) == (223, 223)
    tiling = generate_conv_tiling(dw, hw)
    assert tiling.outer["kh"] < 223
    from tilesim.specs import LayerSpec

    layer = LayerSpec(name="conv1.grad_weight", kind="ConvGradWeight", shape=dw)
    assert validate_tiling(layer, tiling, hw).all_fit
    report(6, f"gradient shape identities on {n}/{n} shapes; 223x223 weight-gradient "
              f"kernel tiles to T_kh={tiling.outer['kh']} on the 64x64 platform")


def test_criterion_7_bn_backward(tiny_hw):
    shape = SimdShape(h=2, w=2, n=2, c=8)
    dims = template_dims("BnBackward", shape)
    tiling = simd_tiling(dims, tiny_hw, dims)
    stats = bn_backward_eval(shape, tiling, tiny_hw)
    assert stats.part2.dram_bits == 6400
    assert stats.part2.op_total == 336
    assert stats.part2.vmem_bits == 32256
    assert stats.part2.compute_cycles == 98
    assert stats.part2.stall_cycles == 50
    n = 50
    for seed in range(n):
        rng = random.Random(seed)
        _, rshape, rtiling, rhw = random_simd_instance(rng, kind="BnBackward", max_dim=8)
        rstats = bn_backward_eval(rshape, rtiling, rhw)
        counts = oracle.count_simd_accesses("BnBackward", rshape, rtiling, rhw)
        assert counts.dram_bits == rstats.total_dram_bits, seed
        assert counts.vmem_bits == rstats.total_vmem_bits, seed
        assert dict(counts.padded_op_counts) == rstats.total_op_counts, seed
    report(7, f"part-2 spot values exact; part-1+part-2 match the counting "
              f"oracle on {n}/{n} shapes")


def test_criterion_8_energy_identities():
    rng = random.Random(7)
    for _ in range(200):
        layers = tuple(
            LayerStats(layer=f"l{i}", kind="Conv",
                       executed_on=rng.choice(("SA", "SIMD")),
                       compute_cycles=rng.randint(1, 10**7),
                       stall_cycles=rng.randint(0, 10**7),
                       dram_bits={"weight": rng.randint(0, 10**10)},
                       sram_bits={"WBuf": rng.randint(0, 10**10),
                                  "VMem": rng.randint(0, 10**10)},
                       op_counts={})
            for i in range(rng.randint(1, 6)))
        stats = NetworkStats(layers=layers)
        bc = BackendCharacterization(
            p_sa_dyn=rng.random() * 5, p_sa_leak=rng.random(),
            p_simd_dyn=rng.random(), p_simd_leak=rng.random(),
            e_buff={"WBuf": rng.random() * 1e-13, "VMem": rng.random() * 1e-13},
            e_dram=rng.random() * 1e-12, t_clk=rng.choice((0.5e-9, 1e-9, 2e-9)))
        rep = compute_energy(stats, bc)
        assert math.isclose(rep.e_total,
                            rep.e_sa + rep.e_simd + rep.e_sram_total + rep.e_dram,
                            rel_tol=1e-12)
        assert math.isclose(rep.p_avg * stats.l_total * bc.t_clk, rep.e_total,
                            rel_tol=1e-12)
    report(8, "energy additivity and p_avg*runtime == e_total at 1e-12 rel tol "
              "on 200 randomized characterizations")


def test_criterion_9_dse_sanity(specs_dir):
    kb = 1024
    hw = load_hardware_spec(specs_dir / "hw" / "tiny4.json")
    net = load_network_spec(specs_dir / "nets" / "toy4.json", hw)
    cfg = DseConfig(sram_budget_bytes=24 * kb, bw_budget_bits_per_cycle=320,
                    deviation_fraction=0.5,
                    size_grids={p: (4 * kb, 8 * kb) for p in explorer.SIZE_PARAMS},
                    bw_grids={p: (32, 128) for p in explorer.BW_PARAMS})
    result = run_dse(net, hw, cfg)
    assert len(result.all_points) == 256
    best = None
    for combo in itertools.product(*( [cfg.size_grids[p] for p in explorer.SIZE_PARAMS]
                                     + [cfg.bw_grids[p] for p in explorer.BW_PARAMS])):
        point = DsePoint(*combo)
        if not (0.5 * cfg.sram_budget_bytes <= point.total_sram_bytes
                <= 1.5 * cfg.sram_budget_bytes):
            continue
        if not (0.5 * 320 <= point.total_bw <= 1.5 * 320):
            continue
        try:
            metric = simulate.evaluate_network(net, apply_point(hw, point)).l_total
        except TilingInfeasibleError:
            continue
        key = (metric, point.params)
        best = min(best, key) if best else key
    assert (result.optimal.metric, result.optimal.params) == best
    par = run_dse(net, hw, replace(cfg, workers=2))
    assert par.all_points == result.all_points
    assert par.optimal == result.optimal and par.worst == result.worst
    report(9, f"optimal {result.optimal.metric} equals brute-forced minimum over "
              f"256 points; parallel == sequential bit-for-bit")


def test_criterion_10_nonconv_share_trends(specs_dir):
    def nonconv_share(layers, hw):
        stats = simulate.evaluate_network(layers, hw)
        sa = sum(s.total_cycles for s in stats.layers if s.executed_on == "SA")
        simd = sum(s.total_cycles for s in stats.layers if s.executed_on == "SIMD")
        return simd / (sa + simd)

    train_shares = []
    for name in ("ht1", "ht2", "ht3"):
        hw = load_hardware_spec(specs_dir / "hw" / f"{name}.json")
        net = load_network_spec(specs_dir / "nets" / "resnet50.json", hw)
        net = simulate.scale_batch(net, 32)
        layers = expand_training(net).all_layers
        train_shares.append(nonconv_share(layers, hw))
    infer_shares = []
    for name in ("hi1", "hi2", "hi3"):
        hw = load_hardware_spec(specs_dir / "hw" / f"{name}.json")
        net = load_network_spec(specs_dir / "nets" / "resnet50.json", hw)
        infer_shares.append(nonconv_share(simulate.inference_layers(net), hw))
    assert train_shares[0] < train_shares[1] < train_shares[2]
    assert train_shares[2] > 0.30
    assert infer_shares[0] < infer_shares[1] < infer_shares[2]
    report(10, "non-conv share of ResNet-50 runtime grows with array size: "
               f"training {', '.join(f'{s:.1%}' for s in train_shares)}; "
               f"inference {', '.join(f'{s:.1%}' for s in infer_shares)}")
