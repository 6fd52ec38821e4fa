"""Timing harness for the jitted kernels vs. their numpy fallbacks.

    python -m hetnetsim.benchmark [n_users] [repeats]

Times each kernel on a representative slot workload (default 1000 users,
28 picos) and a full 200-slot world, printing per-kernel medians and the
speedup of the active binding over pure numpy.  Run with
HETNETSIM_NO_NUMBA=1 to confirm the fallback path matches.
"""

from __future__ import annotations

import sys
import time

import numpy as np

from . import kernels
from .config import parse_scenario
from .engine import World, build_geometry


def _median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return sorted(times)[len(times) // 2]


def _workload(n: int, m: int = 28, seed: int = 7):
    rng = np.random.default_rng(seed)
    px = rng.uniform(0, 1000, n)
    py = rng.uniform(0, 1000, n)
    cx = rng.uniform(100, 900, m)
    cy = rng.uniform(100, 900, m)
    dist = rng.uniform(1, 500, n)
    shadow = rng.normal(0, 8, n)
    pico = rng.random(n) < 0.3
    dest_x = rng.uniform(0, 1000, n)
    dest_y = rng.uniform(0, 1000, n)
    speed = rng.uniform(10, 20, n)
    vx = rng.uniform(-10, 10, n)
    vy = rng.uniform(-10, 10, n)
    return dict(
        px=px, py=py, cx=cx, cy=cy, dist=dist, shadow=shadow, pico=pico,
        dest_x=dest_x, dest_y=dest_y, speed=speed, vx=vx, vy=vy,
    )


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    n = int(argv[0]) if len(argv) > 0 else 1000
    repeats = int(argv[1]) if len(argv) > 1 else 200
    w = _workload(n)

    cases = {
        "containing_disc": (
            lambda k: k(w["px"], w["py"], w["cx"], w["cy"], 50.0),
            kernels.containing_disc, kernels.containing_disc_np,
        ),
        "link_capacity": (
            lambda k: k(w["dist"], w["shadow"], w["pico"], 2e4, 60.0, 35.0,
                        -130.96, 1.0),
            kernels.link_capacity, kernels.link_capacity_np,
        ),
        "advance_positions": (
            lambda k: k(w["px"].copy(), w["py"].copy(), w["dest_x"],
                        w["dest_y"], w["vx"], w["vy"], w["speed"]),
            kernels.advance_positions, kernels.advance_positions_np,
        ),
        "freespace_tx_power": (
            lambda k: k(w["dist"], 1.8, 1.8, 300.0, 1.0, 0.8e-6, 1.0),
            kernels.freespace_tx_power, kernels.freespace_tx_power_np,
        ),
    }

    backend = "numba" if kernels.USING_NUMBA else "numpy (fallback)"
    print(f"active backend: {backend}; n={n}, repeats={repeats}")
    print(f"{'kernel':<20} {'active (us)':>12} {'numpy (us)':>12} {'speedup':>8}")
    for name, (call, active, ref) in cases.items():
        call(active)  # warm-up (jit compile on first call)
        t_active = _median_time(lambda: call(active), repeats)
        t_ref = _median_time(lambda: call(ref), repeats)
        ratio = t_ref / t_active if t_active > 0 else float("inf")
        print(f"{name:<20} {t_active * 1e6:>12.1f} {t_ref * 1e6:>12.1f} {ratio:>7.2f}x")

    scenario = parse_scenario(
        {"topology": "udc", "slots": 200, "users": {"hotspot": 500},
         "policy": {"t_activate": 5.0, "t_deactivate": None}}
    )
    topo = build_geometry(scenario)

    def full_run():
        world = World(scenario, topo)
        for slot in range(scenario.slots):
            world.run_slot(slot)

    full_run()  # warm-up
    t = _median_time(full_run, max(3, repeats // 50))
    print(f"{'world (200 slots)':<20} {t * 1e3:>11.1f}ms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
