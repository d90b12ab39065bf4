"""Energy, power, and wall-clock runtime from backend characterization data.

The backend file carries post-layout power/energy numbers (core dynamic and
leakage power, per-bit SRAM and DRAM access energy, clock period).  Leakage
of both cores accrues over the full network latency: an idle core still
leaks.  IMem access energy is excluded because no instruction-traffic model
exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

from .specs import SRAM_KEYS, NetworkStats, SpecError


@dataclass(frozen=True)
class BackendCharacterization:
    """Power/energy data for one hardware configuration (SI units)."""

    p_sa_dyn: float  # W
    p_sa_leak: float
    p_simd_dyn: float
    p_simd_leak: float
    e_buff: Mapping[str, float]  # J/bit per buffer
    e_dram: float  # J/bit
    t_clk: float  # s

    def __post_init__(self):
        for name in ("p_sa_dyn", "p_sa_leak", "p_simd_dyn", "p_simd_leak", "e_dram"):
            if getattr(self, name) < 0:
                raise SpecError(f"backend characterization: {name} must be non-negative")
        if self.t_clk <= 0:
            raise SpecError("backend characterization: t_clk must be positive")
        buff = {k: 0.0 for k in SRAM_KEYS}
        for k, v in dict(self.e_buff).items():
            if k not in SRAM_KEYS:
                raise SpecError(f"backend characterization: unknown buffer {k!r} in e_buff")
            if v < 0:
                raise SpecError(f"backend characterization: e_buff[{k}] must be non-negative")
            buff[k] = float(v)
        object.__setattr__(self, "e_buff", buff)


def load_backend_characterization(path: Union[str, Path]) -> BackendCharacterization:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise SpecError(f"backend characterization {path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"backend characterization {path}: malformed JSON ({exc})") from None
    required = ("p_sa_dyn", "p_sa_leak", "p_simd_dyn", "p_simd_leak", "e_buff", "e_dram", "t_clk")
    missing = [k for k in required if k not in data]
    if missing:
        raise SpecError(f"backend characterization {path}: missing field(s) "
                        f"{', '.join(sorted(missing))}")
    return BackendCharacterization(**{k: data[k] for k in required})


@dataclass(frozen=True)
class EnergyReport:
    """Energy breakdown, average power, and runtime of a network execution."""

    e_sa: float
    e_simd: float
    e_sram: Mapping[str, float]
    e_dram: float
    runtime: float  # s

    @property
    def e_sram_total(self) -> float:
        return sum(self.e_sram.values())

    @property
    def e_total(self) -> float:
        return self.e_sa + self.e_simd + self.e_sram_total + self.e_dram

    @property
    def p_avg(self) -> float:
        return self.e_total / self.runtime if self.runtime > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "e_sa_j": self.e_sa,
            "e_simd_j": self.e_simd,
            "e_sram_j": dict(self.e_sram),
            "e_sram_total_j": self.e_sram_total,
            "e_dram_j": self.e_dram,
            "e_total_j": self.e_total,
            "p_avg_w": self.p_avg,
            "runtime_s": self.runtime,
        }


def compute_energy(stats: NetworkStats, bc: BackendCharacterization) -> EnergyReport:
    """Combine network statistics with backend characterization data.

    Core energy = active-cycle dynamic power + whole-run leakage; SRAM and
    DRAM energy are linear in the access bit counts.
    """
    l_total = stats.l_total
    e_sa = (stats.c_sa * bc.p_sa_dyn + l_total * bc.p_sa_leak) * bc.t_clk
    e_simd = (stats.c_simd * bc.p_simd_dyn + l_total * bc.p_simd_leak) * bc.t_clk
    sram_bits = stats.sram_bits
    e_sram = {buf: sram_bits[buf] * bc.e_buff[buf] for buf in SRAM_KEYS}
    e_dram = stats.dram_bits_total * bc.e_dram
    return EnergyReport(e_sa=e_sa, e_simd=e_simd, e_sram=e_sram, e_dram=e_dram,
                        runtime=l_total * bc.t_clk)
