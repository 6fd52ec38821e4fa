"""Base-station power consumption model.

An active station burns a fixed part plus a load-proportional part:

    P_active(n) = n_sectors * (p0 + delta_p * p_max * min(n, cap) / cap)

where n is the number of served users and cap the nominal user capacity.
Sleeping and booting stations burn the sleep floor p_sleep per sector.
Macro stations never sleep; picos move between Sleep, Boot and Active
under the control policy (see control.py).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class EnbMode(Enum):
    ACTIVE = "active"
    SLEEP = "sleep"
    BOOT = "boot"


@dataclass(frozen=True)
class PowerParams:
    sectors: int
    p_max_w: float       # max transmit power per sector
    p0_w: float          # fixed per-sector draw while active
    delta_p: float       # slope of the load-dependent part
    p_sleep_w: float     # per-sector draw in Sleep and Boot
    user_capacity: int   # load saturates here


MACRO_POWER = PowerParams(
    sectors=3, p_max_w=40.0, p0_w=260.0, delta_p=4.75, p_sleep_w=150.0,
    user_capacity=1000,
)

PICO_POWER = PowerParams(
    sectors=1, p_max_w=0.25, p0_w=13.6, delta_p=4.0, p_sleep_w=8.6,
    user_capacity=50,
)


def consumed_power_w(params: PowerParams, mode: EnbMode, n_served: int = 0) -> float:
    """Station draw in watts for one slot at the given mode and load."""
    if n_served < 0:
        raise ValueError(f"n_served must be non-negative, got {n_served}")
    if mode is EnbMode.ACTIVE:
        load = min(n_served, params.user_capacity) / params.user_capacity
        return params.sectors * (params.p0_w + params.delta_p * params.p_max_w * load)
    return params.sectors * params.p_sleep_w


def slot_energy_j(power_w: float, slot_duration_s: float = 1.0) -> float:
    return power_w * slot_duration_s
