"""Pico sleep/wake control.

Each pico counts the active users inside its disc every slot and runs a
small state machine:

* Sleep  -> Boot    when count >= t_activate (boot takes boot_slots slots)
* Boot   -> Active  when the boot countdown reaches zero (unconditional)
* Active -> Sleep   when count <= t_deactivate   (two-threshold rule)
                    or count <  t_activate       (one-threshold rule)

A two-threshold policy with t_deactivate = t_activate - 1 is equivalent to
the one-threshold rule for integer counts; distinct thresholds add
hysteresis, which removes on/off flapping when the count sits near the
activation point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .power import EnbMode
from .topology import Cell, contains_point


class InvalidPolicy(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdPolicy:
    """t_deactivate = None selects the one-threshold rule."""

    t_activate: float
    t_deactivate: Optional[float] = None

    def __post_init__(self) -> None:
        if not (self.t_activate >= 0.0) and not math.isinf(self.t_activate):
            raise InvalidPolicy(f"t_activate must be >= 0, got {self.t_activate}")
        if self.t_deactivate is not None and self.t_deactivate >= self.t_activate:
            raise InvalidPolicy(
                "t_deactivate must be strictly below t_activate "
                f"(got {self.t_deactivate} >= {self.t_activate})"
            )

    def should_wake(self, count: int) -> bool:
        return count >= self.t_activate

    def should_sleep(self, count: int) -> bool:
        if self.t_deactivate is None:
            return count < self.t_activate
        return count <= self.t_deactivate


def one_threshold(t: float) -> ThresholdPolicy:
    return ThresholdPolicy(t_activate=t, t_deactivate=None)


def two_threshold(t_activate: float, t_deactivate: float) -> ThresholdPolicy:
    return ThresholdPolicy(t_activate=t_activate, t_deactivate=t_deactivate)


@dataclass(frozen=True)
class PicoControlState:
    mode: EnbMode = EnbMode.SLEEP
    boot_remaining: int = 0


def step_state(
    state: PicoControlState,
    count: int,
    policy: ThresholdPolicy,
    boot_slots: int = 1,
) -> PicoControlState:
    """Advance one pico's mode by one slot given this slot's user count.

    Boot always runs to completion: the countdown ignores the count, so a
    station can never pay the boot cost and then go back to sleep unserved
    within the same transient.  boot_slots = 0 degenerates to an immediate
    Sleep -> Active transition.
    """
    if boot_slots < 0:
        raise ValueError(f"boot_slots must be >= 0, got {boot_slots}")
    if state.mode is EnbMode.SLEEP:
        if policy.should_wake(count):
            if boot_slots == 0:
                return PicoControlState(EnbMode.ACTIVE, 0)
            return PicoControlState(EnbMode.BOOT, boot_slots)
        return state
    if state.mode is EnbMode.BOOT:
        remaining = state.boot_remaining - 1
        if remaining <= 0:
            return PicoControlState(EnbMode.ACTIVE, 0)
        return PicoControlState(EnbMode.BOOT, remaining)
    # ACTIVE
    if policy.should_sleep(count):
        return PicoControlState(EnbMode.SLEEP, 0)
    return state


def count_active_in_range(pico: Cell, positions: Iterable[tuple[float, float]],
                          active_flags: Iterable[bool]) -> int:
    """Active users strictly inside the pico disc (reference implementation;
    the engine computes all counts at once in kernels.count_in_discs)."""
    n = 0
    for (x, y), active in zip(positions, active_flags):
        if active and contains_point(pico, x, y):
            n += 1
    return n
