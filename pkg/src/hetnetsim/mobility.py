"""Waypoint mobility with hotspot work schedules, plus per-slot activity draws.

Users bounce between uniformly drawn waypoints inside the macro disc at
10–20 m/slot.  Hotspot users additionally carry an assigned pico and a work
start slot: at work start they retarget to a uniform point inside their
pico and, once arrived, keep re-targeting within the pico at a slow 0–2
m/slot until the work interval (375 slots by default) ends, when they head
back to a random point in the macro disc.

The whole population advances through vectorized phases.  Draw schedule
(the determinism contract — identical layouts consume identical draws):

  init:    hotspot pico ids, hotspot work starts, position offsets (one
           rejection-sampled unit-disc batch for all users), then for
           moving populations destination offsets and speeds.
  step t:  work-start retargets (dest offsets, speeds), work-end retargets
           (dest offsets, speeds), movement, arrival retargets in-work
           (dest offsets, speeds), arrival retargets out-of-work (dest
           offsets, speeds).  Masked groups draw in user-index order.

Rejection sampling happens in *offset* space (unit disc, scaled per user),
so the number of draws consumed never depends on cell positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .topology import Topology


class MobilityError(Exception):
    pass


class NoPicosForHotspot(MobilityError):
    """Hotspot users need at least one pico to be assigned to."""


@dataclass(frozen=True)
class WorkSchedule:
    start_slots: tuple[int, ...] = (0, 42, 83)
    duration: int = 375

    def __post_init__(self) -> None:
        if not self.start_slots:
            raise MobilityError("at least one work start slot is required")
        if any(s < 0 for s in self.start_slots):
            raise MobilityError("work start slots must be non-negative")
        if list(self.start_slots) != sorted(set(self.start_slots)):
            raise MobilityError("work start slots must be strictly increasing")
        if self.duration < 1:
            raise MobilityError("work duration must be at least 1 slot")


@dataclass(frozen=True)
class MobilityParams:
    speed_min: float = 10.0       # m/slot while travelling
    speed_max: float = 20.0
    work_speed_min: float = 0.0   # m/slot while at work inside the pico
    work_speed_max: float = 2.0


@dataclass
class UserPopulation:
    """Struct-of-arrays state for n users; index = user id.

    my_pico / work_start are -1 for uniform users.  Hotspot users occupy
    the tail of the index range (ids n_uniform .. n-1).
    """

    px: np.ndarray
    py: np.ndarray
    dest_x: np.ndarray
    dest_y: np.ndarray
    speed: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    is_hotspot: np.ndarray
    my_pico: np.ndarray
    work_start: np.ndarray

    @property
    def n(self) -> int:
        return self.px.shape[0]


def _unit_disc(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n points uniform in the closed unit disc, by rejection from the square.

    Draws are consumed two at a time per pending point; consumption depends
    only on (n, rng state), never on where the points will be placed.
    """
    ox = np.empty(n)
    oy = np.empty(n)
    pending = np.arange(n)
    while pending.size:
        cx = rng.uniform(-1.0, 1.0, pending.size)
        cy = rng.uniform(-1.0, 1.0, pending.size)
        ok = cx * cx + cy * cy <= 1.0
        idx = pending[ok]
        ox[idx] = cx[ok]
        oy[idx] = cy[ok]
        pending = pending[~ok]
    return ox, oy


def _set_velocity(pop: UserPopulation, mask: np.ndarray) -> None:
    # project speed onto the pos->dest direction; zero-length gap => rest
    gx = pop.dest_x[mask] - pop.px[mask]
    gy = pop.dest_y[mask] - pop.py[mask]
    dist = np.hypot(gx, gy)
    safe = np.where(dist > 0.0, dist, 1.0)
    scale = np.where(dist > 0.0, pop.speed[mask] / safe, 0.0)
    pop.vx[mask] = gx * scale
    pop.vy[mask] = gy * scale


def _retarget(
    pop: UserPopulation,
    mask: np.ndarray,
    center_x: np.ndarray,
    center_y: np.ndarray,
    radius: np.ndarray,
    speed_lo: float,
    speed_hi: float,
    rng: np.random.Generator,
) -> None:
    """New uniform destination in the per-user disc plus a fresh speed."""
    k = int(mask.sum())
    if k == 0:
        return
    ox, oy = _unit_disc(rng, k)
    pop.dest_x[mask] = center_x + ox * radius
    pop.dest_y[mask] = center_y + oy * radius
    pop.speed[mask] = rng.uniform(speed_lo, speed_hi, k)
    _set_velocity(pop, mask)


def init_population(
    n_users: int,
    n_hotspot: int,
    topo: Topology,
    schedule: WorkSchedule,
    params: MobilityParams,
    rng: np.random.Generator,
    static_hotspot_in_cell: bool = False,
) -> UserPopulation:
    """Fresh population: uniform users first, then n_hotspot hotspot users.

    Everyone starts at a uniform point in the macro disc with a waypoint
    there too, except that single-snapshot runs place hotspot users
    directly inside their assigned pico (static_hotspot_in_cell).
    """
    if not 0 <= n_hotspot <= n_users:
        raise MobilityError("n_hotspot must lie in [0, n_users]")
    n_picos = len(topo.picos)
    if n_hotspot > 0 and n_picos == 0:
        raise NoPicosForHotspot(
            f"{n_hotspot} hotspot users requested on a layout with no picos"
        )
    n = n_users
    hot = np.zeros(n, dtype=bool)
    hot[n - n_hotspot :] = n_hotspot > 0
    my_pico = np.full(n, -1, dtype=np.int64)
    work_start = np.full(n, -1, dtype=np.int64)
    if n_hotspot > 0:
        my_pico[hot] = rng.integers(0, n_picos, n_hotspot)
        starts = np.asarray(schedule.start_slots, dtype=np.int64)
        work_start[hot] = starts[rng.integers(0, starts.size, n_hotspot)]

    mx, my = topo.macro.x, topo.macro.y
    R = topo.macro.radius
    center_x = np.full(n, mx)
    center_y = np.full(n, my)
    radius = np.full(n, R)
    if static_hotspot_in_cell and n_hotspot > 0:
        centers = topo.pico_centers()
        center_x[hot] = centers[my_pico[hot], 0]
        center_y[hot] = centers[my_pico[hot], 1]
        radius[hot] = topo.pico_radius()
    ox, oy = _unit_disc(rng, n)
    px = center_x + ox * radius
    py = center_y + oy * radius

    pop = UserPopulation(
        px=px,
        py=py,
        dest_x=px.copy(),
        dest_y=py.copy(),
        speed=np.zeros(n),
        vx=np.zeros(n),
        vy=np.zeros(n),
        is_hotspot=hot,
        my_pico=my_pico,
        work_start=work_start,
    )
    if not static_hotspot_in_cell:
        all_mask = np.ones(n, dtype=bool)
        _retarget(
            pop, all_mask, np.full(n, mx), np.full(n, my), np.full(n, R),
            params.speed_min, params.speed_max, rng,
        )
    return pop


def _pico_disc(pop: UserPopulation, mask: np.ndarray, topo: Topology):
    centers = topo.pico_centers()
    ids = pop.my_pico[mask]
    r = np.full(int(mask.sum()), topo.pico_radius())
    return centers[ids, 0], centers[ids, 1], r


def _macro_disc(pop: UserPopulation, mask: np.ndarray, topo: Topology):
    k = int(mask.sum())
    return (
        np.full(k, topo.macro.x),
        np.full(k, topo.macro.y),
        np.full(k, topo.macro.radius),
    )


def step_population(
    pop: UserPopulation,
    slot: int,
    topo: Topology,
    schedule: WorkSchedule,
    params: MobilityParams,
    rng: np.random.Generator,
) -> None:
    """Advance every user by one slot (events, move, arrival retargets)."""
    hot = pop.is_hotspot
    # work-start event: head for the assigned pico at travel speed
    ws = hot & (pop.work_start == slot)
    if ws.any():
        cx, cy, r = _pico_disc(pop, ws, topo)
        _retarget(pop, ws, cx, cy, r, params.speed_min, params.speed_max, rng)
    # work-end event: head back into the macro disc
    we = hot & (pop.work_start + schedule.duration == slot)
    if we.any():
        cx, cy, r = _macro_disc(pop, we, topo)
        _retarget(pop, we, cx, cy, r, params.speed_min, params.speed_max, rng)

    arrived = kernels.advance_positions(
        pop.px, pop.py, pop.dest_x, pop.dest_y, pop.vx, pop.vy, pop.speed
    )
    arrived = np.asarray(arrived)

    in_work = hot & (pop.work_start <= slot) & (slot < pop.work_start + schedule.duration)
    wander = arrived & in_work
    if wander.any():
        cx, cy, r = _pico_disc(pop, wander, topo)
        _retarget(
            pop, wander, cx, cy, r, params.work_speed_min, params.work_speed_max, rng
        )
    roam = arrived & ~in_work
    if roam.any():
        cx, cy, r = _macro_disc(pop, roam, topo)
        _retarget(pop, roam, cx, cy, r, params.speed_min, params.speed_max, rng)


def draw_activity_flags(
    pop: UserPopulation,
    containing: np.ndarray,
    rng: np.random.Generator,
    p_uniform: float = 0.4,
    p_hotspot: float = 0.8,
) -> np.ndarray:
    """Per-slot Bernoulli activity for the whole population.

    The boosted probability applies only to a hotspot user currently inside
    the disc of its *own* pico (containing = per-user containing-pico id,
    -1 when uncovered); everyone else draws at the base probability.
    Consumes exactly n uniforms per call.
    """
    u = rng.random(pop.n)
    boosted = pop.is_hotspot & (containing >= 0) & (containing == pop.my_pico)
    p = np.where(boosted, p_hotspot, p_uniform)
    return u < p


# --- single-user views, used by tests and traces ---------------------------


@dataclass
class UserState:
    """Scalar snapshot of one user; convertible to/from a 1-user population."""

    x: float
    y: float
    dest_x: float
    dest_y: float
    speed: float
    vx: float
    vy: float
    is_hotspot: bool
    my_pico: int = -1
    work_start: int = -1


def _pop_of_one(u: UserState) -> UserPopulation:
    return UserPopulation(
        px=np.array([u.x]),
        py=np.array([u.y]),
        dest_x=np.array([u.dest_x]),
        dest_y=np.array([u.dest_y]),
        speed=np.array([u.speed]),
        vx=np.array([u.vx]),
        vy=np.array([u.vy]),
        is_hotspot=np.array([u.is_hotspot]),
        my_pico=np.array([u.my_pico], dtype=np.int64),
        work_start=np.array([u.work_start], dtype=np.int64),
    )


def _user_of_pop(pop: UserPopulation, i: int = 0) -> UserState:
    return UserState(
        x=float(pop.px[i]),
        y=float(pop.py[i]),
        dest_x=float(pop.dest_x[i]),
        dest_y=float(pop.dest_y[i]),
        speed=float(pop.speed[i]),
        vx=float(pop.vx[i]),
        vy=float(pop.vy[i]),
        is_hotspot=bool(pop.is_hotspot[i]),
        my_pico=int(pop.my_pico[i]),
        work_start=int(pop.work_start[i]),
    )


def init_user(
    hotspot: bool,
    topo: Topology,
    schedule: WorkSchedule,
    params: MobilityParams,
    rng: np.random.Generator,
) -> UserState:
    pop = init_population(1, int(hotspot), topo, schedule, params, rng)
    return _user_of_pop(pop)


def step_user(
    u: UserState,
    slot: int,
    topo: Topology,
    schedule: WorkSchedule,
    params: MobilityParams,
    rng: np.random.Generator,
) -> UserState:
    pop = _pop_of_one(u)
    step_population(pop, slot, topo, schedule, params, rng)
    return _user_of_pop(pop)


def draw_activity(
    u: UserState,
    inside_own_pico: bool,
    rng: np.random.Generator,
    p_uniform: float = 0.4,
    p_hotspot: float = 0.8,
) -> bool:
    p = p_hotspot if (u.is_hotspot and inside_own_pico) else p_uniform
    return bool(rng.random() < p)
