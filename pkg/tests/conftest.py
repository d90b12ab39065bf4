from pathlib import Path

import pytest

from tilesim.specs import HardwareConfig

REPO = Path(__file__).resolve().parent.parent
SPECS = REPO / "specs"


@pytest.fixture(scope="session")
def specs_dir() -> Path:
    return SPECS


@pytest.fixture()
def tiny_hw() -> HardwareConfig:
    # 4x4 array, 128 bits/cycle everywhere, 16-bit weight/ifmap, 32-bit psum.
    return HardwareConfig(
        pe_rows=4, pe_cols=4,
        wbuf_bytes=8192, bbuf_bytes=1024, ibuf_bytes=8192, obuf_bytes=8192,
        vmem_bytes=65536, imem_bytes=16384,
        bw_w=128, bw_i=128, bw_o=128, bw_v=128,
        bits_weight=16, bits_bias=32, bits_ifmap=16, bits_psum=32,
        bits_simd_in=32, bits_simd_out=32,
        op_latency={"add": 1, "sub": 1, "mul": 1, "div": 4, "max": 1},
    )
