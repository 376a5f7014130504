"""Base-station power consumption model and network power totals.

Each BS draws a constant power plus a load-proportional term while on,
and a fixed sleep power while off.  The network total combines the
always-on HAPS overlay with the per-SBS on/off terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "PowerParams",
    "Policy",
    "SBS_POWER",
    "HAPS_POWER",
    "bs_power",
    "network_power",
    "erroneous_network_power",
    "slot_energy",
]


@dataclass(frozen=True)
class PowerParams:
    """Power-model parameters of one BS."""

    p_const: float      # W, constant draw while on
    slope: float        # load-dependent slope (dimensionless)
    p_max_tx: float     # W, maximum transmit power
    p_sleep: float      # W, draw while sleeping

    def __post_init__(self):
        for name in ("p_const", "slope", "p_max_tx", "p_sleep"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.p_sleep >= self.p_const:
            raise ValueError(
                f"p_sleep ({self.p_sleep} W) must be below p_const "
                f"({self.p_const} W) for sleeping to save energy"
            )


# Default parameter sets (small cell / HAPS overlay)
SBS_POWER = PowerParams(p_const=56.0, slope=2.6, p_max_tx=6.3, p_sleep=39.0)
HAPS_POWER = PowerParams(p_const=130.0, slope=4.7, p_max_tx=20.0, p_sleep=0.0)


@dataclass(frozen=True)
class Policy:
    """On/off decision vector for the SBSs; the HAPS is always active."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"policy bits must be 0/1, got {self.bits}")

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    @property
    def n_on(self) -> int:
        return sum(self.bits)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.bits, dtype=np.uint8)

    @property
    def index(self) -> int:
        """Rank of this policy in the lexicographic all-zeros..all-ones order."""
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    @classmethod
    def from_index(cls, n: int, index: int) -> "Policy":
        if not 0 <= index < (1 << n):
            raise ValueError(f"index {index} out of range for {n} SBSs")
        return cls(tuple((index >> (n - 1 - k)) & 1 for k in range(n)))

    @classmethod
    def all_on(cls, n: int) -> "Policy":
        return cls((1,) * n)

    @classmethod
    def all_off(cls, n: int) -> "Policy":
        return cls((0,) * n)


def bs_power(params: PowerParams, rho: float, is_on: bool) -> float:
    """Instantaneous power draw of one BS at load fraction ``rho``.

    ``rho`` is used as given even when above 1; load feasibility is
    screened by the caller, not here.
    """
    if rho < 0:
        raise ValueError(f"load fraction must be >= 0, got {rho}")
    if not is_on:
        return params.p_sleep
    return params.p_const + params.slope * rho * params.p_max_tx


def network_power(
    policy: Policy,
    sbs_rhos: Sequence[float],
    haps_rho: float,
    sbs_params: Sequence[PowerParams],
    haps_params: PowerParams = HAPS_POWER,
) -> float:
    """Total network power: HAPS plus every SBS in its on or off state."""
    if len(sbs_rhos) != len(policy) or len(sbs_params) != len(policy):
        raise ValueError(
            f"length mismatch: policy {len(policy)}, loads {len(sbs_rhos)}, "
            f"params {len(sbs_params)}"
        )
    total = bs_power(haps_params, haps_rho, True)
    for on, rho, par in zip(policy.bits, sbs_rhos, sbs_params):
        total += bs_power(par, rho, bool(on))
    return total


def erroneous_network_power(
    policy: Policy,
    estimated_rhos: Sequence[float],
    haps_rho: float,
    sbs_params: Sequence[PowerParams],
    haps_params: PowerParams = HAPS_POWER,
) -> float:
    """Network power as seen through error-inflated SBS load estimates.

    Same expression as :func:`network_power`; only the load numbers fed
    into the on-state terms differ.  Sleeping terms carry no load, so
    the estimate never touches them.
    """
    return network_power(policy, estimated_rhos, haps_rho, sbs_params, haps_params)


def slot_energy(power_w: float, duration_s: float) -> float:
    """Energy in joules consumed over one slot."""
    if power_w < 0 or duration_s < 0:
        raise ValueError("power and duration must be >= 0")
    return power_w * duration_s
