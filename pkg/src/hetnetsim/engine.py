"""Slotted simulation engine.

Each slot runs, in order: mobility step, activity draws, per-pico active
counts, pico state-machine transitions, association, link evaluation, power
accounting, metric aggregation.  An active user is served by the pico
whose disc contains it when that pico is Active, otherwise by the macro;
Boot and Sleep picos serve nobody, idle users are served by nobody.

Two run shapes share this machinery:

* slots = 1, realizations = R: R independent snapshot worlds.  Users are
  dropped statically (hotspot users inside their assigned pico), picos are
  Active wherever the activation threshold is met — the stationary view of
  the control loop, with no boot transient.
* slots = S > 1: one world evolved through S slots with the full Sleep /
  Boot / Active machinery.

Randomness: a scenario owns one seed.  Layout generation uses the stream
(seed, 0); world r uses (seed, 1, r).  Within a world every slot draws, in
a fixed order, the mobility draws, one activity uniform per user, and one
shadowing normal per user — so runs that share a seed share users,
trajectories, and fading regardless of topology kind, policy, or sleep
parameters.  That makes paired comparisons (e.g. pico-serving topology vs.
its macro-only twin) common-random-number experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels
from .channel import noise_power_dbm, user_bandwidth
from .config import Scenario
from .control import PicoControlState, step_state
from .mobility import draw_activity_flags, init_population, step_population
from .power import EnbMode, consumed_power_w
from .topology import Topology, build_coe, build_monet, build_udc

TAG_TOPOLOGY = 0
TAG_WORLD = 1

HIST_BIN_WIDTH = 1e4
HIST_MAX = 1e6
HIST_BINS = int(HIST_MAX / HIST_BIN_WIDTH)

_MODE_CODE = {EnbMode.SLEEP: 0, EnbMode.BOOT: 1, EnbMode.ACTIVE: 2}


class EngineError(Exception):
    pass


class ZeroPower(EngineError):
    pass


def compute_ee(total_capacity_bps: float, total_power_w: float) -> float:
    """Delivered bits per joule; slot duration cancels out."""
    if total_power_w <= 0.0:
        raise ZeroPower(f"total power must be positive, got {total_power_w}")
    return total_capacity_bps / total_power_w


@dataclass(frozen=True)
class SlotMetrics:
    slot: int
    n_active_picos: int
    macro_active_users: int
    pico_active_users: int
    capacity_bps: float
    power_w: float
    ee_bits_per_joule: float
    # pico-only slice of the same slot, for the small-cell-view outputs
    pico_capacity_bps: float = 0.0
    pico_power_w: float = 0.0


def build_geometry(scenario: Scenario) -> Topology:
    """Layout for a scenario; depends only on (seed, layout), never on the
    serving mode, so donor-user topologies share their twin's geometry."""
    L = scenario.layout
    kind = scenario.geometry_kind()
    if kind == "monet":
        return build_monet(L.macro_radius_m)
    if kind == "coe":
        return build_coe(L.macro_radius_m, L.pico_radius_m, L.n_picos)
    rng = np.random.default_rng(
        np.random.SeedSequence([scenario.seed, TAG_TOPOLOGY])
    )
    return build_udc(
        rng, L.macro_radius_m, L.pico_radius_m, L.n_picos, L.max_place_attempts
    )


class World:
    """One population + pico control state evolving under a scenario."""

    def __init__(self, scenario: Scenario, topo: Topology, realization: int = 0):
        self.s = scenario
        self.topo = topo
        self.rng = np.random.default_rng(
            np.random.SeedSequence([scenario.seed, TAG_WORLD, realization])
        )
        self.static = scenario.slots == 1
        self.serving = scenario.serves_from_picos()
        self.pop = init_population(
            scenario.users.total,
            scenario.users.hotspot,
            topo,
            scenario.work,
            scenario.mobility_params(),
            self.rng,
            static_hotspot_in_cell=self.static,
        )
        m = len(topo.picos)
        self.n_picos = m
        self.states = [PicoControlState() for _ in range(m)]
        self.mode_codes = np.zeros(m, dtype=np.int64)
        self.centers = topo.pico_centers()
        self.pico_r = topo.pico_radius()

        C = scenario.channel
        self.w_user = user_bandwidth(C.bandwidth_hz, scenario.users.total)
        self.noise_dbm = noise_power_dbm(self.w_user, C.temperature_k)
        self.eirp_macro = C.macro_tx_dbm + C.macro_antenna_gain_dbi + C.ue_antenna_gain_dbi
        self.eirp_pico = C.pico_tx_dbm + C.pico_antenna_gain_dbi + C.ue_antenna_gain_dbi

        n = scenario.users.total
        self.cap_sum = np.zeros(n)
        self.active_slots = np.zeros(n, dtype=np.int64)
        self.pico_slots = np.zeros(n, dtype=np.int64)
        self.pico_cap_sum = np.zeros(n)
        self.slots_seen = 0
        # exposed after each slot, for traces and acceptance checks
        self.last_active: Optional[np.ndarray] = None
        self.last_serving: Optional[np.ndarray] = None  # -2 idle, -1 macro, j pico
        self.last_capacity: Optional[np.ndarray] = None

    # -- slot phases --------------------------------------------------------

    def _containing(self) -> np.ndarray:
        if self.n_picos == 0:
            return np.full(self.pop.n, -1, dtype=np.int64)
        return np.asarray(
            kernels.containing_disc(
                self.pop.px, self.pop.py,
                self.centers[:, 0], self.centers[:, 1], self.pico_r,
            )
        )

    def _counts(self, containing: np.ndarray, active: np.ndarray) -> np.ndarray:
        covered = active & (containing >= 0)
        return np.bincount(containing[covered], minlength=self.n_picos).astype(
            np.int64
        )

    def _evaluate(self, slot: int, active: np.ndarray, containing: np.ndarray,
                  counts: np.ndarray) -> SlotMetrics:
        """Association, link budgets, power, metrics for one slot."""
        s = self.s
        pop = self.pop
        n = pop.n
        if self.n_picos > 0:
            safe = np.where(containing >= 0, containing, 0)
            if self.serving:
                pico_served = active & (containing >= 0) & (self.mode_codes[safe] == 2)
            else:
                pico_served = np.zeros(n, dtype=bool)
            d_pico = np.hypot(
                pop.px - self.centers[safe, 0], pop.py - self.centers[safe, 1]
            )
        else:
            pico_served = np.zeros(n, dtype=bool)
            d_pico = None
        macro_served = active & ~pico_served
        d_macro = np.hypot(pop.px - self.topo.macro.x, pop.py - self.topo.macro.y)
        dist = np.where(pico_served, d_pico, d_macro) if d_pico is not None else d_macro

        z = self.rng.standard_normal(n)
        sigma = np.where(
            pico_served, s.channel.pico_shadow_sigma_db, s.channel.macro_shadow_sigma_db
        )
        cap = np.asarray(
            kernels.link_capacity(
                dist, z * sigma, pico_served, self.w_user,
                self.eirp_macro, self.eirp_pico, self.noise_dbm,
                s.channel.min_distance_m,
            )
        )
        cap = np.where(active, cap, 0.0)

        n_macro = int(macro_served.sum())
        n_pico = int(pico_served.sum())
        if s.legacy.enabled:
            macro_power = float(
                np.asarray(
                    kernels.freespace_tx_power(
                        d_macro[macro_served],
                        s.legacy.macro.alpha, s.legacy.macro.beta, s.legacy.macro.g,
                        s.legacy.macro.k, s.legacy.macro.p0_w, s.legacy.macro.p_max_w,
                    )
                ).sum()
            )
            if n_pico:
                pico_power = float(
                    np.asarray(
                        kernels.freespace_tx_power(
                            d_pico[pico_served],
                            s.legacy.pico.alpha, s.legacy.pico.beta, s.legacy.pico.g,
                            s.legacy.pico.k, s.legacy.pico.p0_w, s.legacy.pico.p_max_w,
                        )
                    ).sum()
                )
            else:
                pico_power = 0.0
            n_active_picos = self.n_picos if self.serving else 0
        else:
            macro_power = consumed_power_w(s.power_macro, EnbMode.ACTIVE, n_macro)
            pico_power = 0.0
            if self.serving:
                for j, st in enumerate(self.states):
                    served = int(counts[j]) if st.mode is EnbMode.ACTIVE else 0
                    pico_power += consumed_power_w(s.power_pico, st.mode, served)
            n_active_picos = int((self.mode_codes == 2).sum()) if self.serving else 0

        total_cap = float(cap.sum())
        total_power = macro_power + pico_power
        ee = total_cap / total_power if total_power > 0 else 0.0

        self.cap_sum += cap
        self.active_slots += active
        self.pico_slots += pico_served
        self.pico_cap_sum += np.where(pico_served, cap, 0.0)
        self.slots_seen += 1
        self.last_active = active
        serving = np.full(n, -2, dtype=np.int64)
        serving[macro_served] = -1
        if self.n_picos > 0:
            serving[pico_served] = containing[pico_served]
        self.last_serving = serving
        self.last_capacity = cap

        return SlotMetrics(
            slot=slot,
            n_active_picos=n_active_picos,
            macro_active_users=n_macro,
            pico_active_users=n_pico,
            capacity_bps=total_cap,
            power_w=total_power,
            ee_bits_per_joule=ee,
            pico_capacity_bps=float(cap[pico_served].sum()),
            pico_power_w=pico_power,
        )

    def run_snapshot(self) -> SlotMetrics:
        """Single-slot stationary view: threshold applied directly, no boot."""
        s = self.s
        containing = self._containing()
        active = draw_activity_flags(
            self.pop, containing, self.rng,
            s.users.activity_uniform, s.users.activity_hotspot,
        )
        counts = self._counts(containing, active)
        if self.serving:
            if s.legacy.enabled:
                self.mode_codes[:] = 2
                self.states = [
                    PicoControlState(EnbMode.ACTIVE, 0) for _ in range(self.n_picos)
                ]
            else:
                awake = counts >= s.policy.t_activate
                self.mode_codes = np.where(awake, 2, 0).astype(np.int64)
                self.states = [
                    PicoControlState(EnbMode.ACTIVE if a else EnbMode.SLEEP, 0)
                    for a in awake
                ]
        return self._evaluate(0, active, containing, counts)

    def run_slot(self, slot: int) -> SlotMetrics:
        s = self.s
        step_population(
            self.pop, slot, self.topo, s.work, s.mobility_params(), self.rng
        )
        containing = self._containing()
        active = draw_activity_flags(
            self.pop, containing, self.rng,
            s.users.activity_uniform, s.users.activity_hotspot,
        )
        counts = self._counts(containing, active)
        if self.serving:
            if s.legacy.enabled:
                self.mode_codes[:] = 2
                self.states = [
                    PicoControlState(EnbMode.ACTIVE, 0) for _ in range(self.n_picos)
                ]
            else:
                self.states = [
                    step_state(st, int(counts[j]), s.policy, s.boot_slots)
                    for j, st in enumerate(self.states)
                ]
                self.mode_codes = np.array(
                    [_MODE_CODE[st.mode] for st in self.states], dtype=np.int64
                )
        return self._evaluate(slot, active, containing, counts)


@dataclass
class RunResult:
    scenario: Scenario
    topology: Topology
    slot_metrics: list[SlotMetrics]
    ee_mean: float
    ee_std: float
    capacity_mean: float
    power_mean: float
    active_picos_mean: float
    is_hotspot: np.ndarray
    mean_rate_bps: np.ndarray         # per user, over its active slots
    frac_slots_on_pico: np.ndarray
    pico_mean_rate_bps: np.ndarray    # per user, over its pico-served slots
    active_slot_count: np.ndarray
    pico_slot_count: np.ndarray
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    user_trace: Optional[list[tuple]] = None
    pico_trace: Optional[list[tuple]] = None


def rate_histogram(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-bin histogram: 100 bins of 1e4 b/s over [0, 1e6]; values at or
    beyond the top edge land in the last bin."""
    edges = HIST_BIN_WIDTH * np.arange(HIST_BINS + 1)
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        return np.zeros(HIST_BINS, dtype=np.int64), edges
    idx = np.clip((samples // HIST_BIN_WIDTH).astype(np.int64), 0, HIST_BINS - 1)
    return np.bincount(idx, minlength=HIST_BINS).astype(np.int64), edges


def _serving_label(code: int) -> str:
    if code == -2:
        return "none"
    if code == -1:
        return "macro"
    return f"pico:{code}"


def run_scenario(
    scenario: Scenario,
    trace_users: bool = False,
    trace_picos: bool = False,
) -> RunResult:
    topo = build_geometry(scenario)
    n = scenario.users.total
    metrics: list[SlotMetrics] = []
    user_trace: Optional[list[tuple]] = [] if trace_users else None
    pico_trace: Optional[list[tuple]] = [] if trace_picos else None

    cap_sum = np.zeros(n)
    active_slots = np.zeros(n, dtype=np.int64)
    pico_slots = np.zeros(n, dtype=np.int64)
    pico_cap_sum = np.zeros(n)
    total_slots = 0
    is_hotspot = None
    hist_samples: list[np.ndarray] = []

    def trace_world(world: World, slot: int) -> None:
        if user_trace is not None:
            for i in range(n):
                user_trace.append(
                    (
                        slot, i,
                        float(world.pop.px[i]), float(world.pop.py[i]),
                        int(world.last_active[i]),
                        _serving_label(int(world.last_serving[i])),
                    )
                )
        if pico_trace is not None:
            for j, st in enumerate(world.states):
                pico_trace.append((slot, j, st.mode.value))

    if scenario.slots == 1:
        for r in range(scenario.realizations):
            world = World(scenario, topo, realization=r)
            sm = world.run_snapshot()
            metrics.append(replace(sm, slot=r))
            cap_sum += world.cap_sum
            active_slots += world.active_slots
            pico_slots += world.pico_slots
            pico_cap_sum += world.pico_cap_sum
            total_slots += 1
            hist_samples.append(world.last_capacity[world.last_active])
            if is_hotspot is None:
                is_hotspot = world.pop.is_hotspot.copy()
            trace_world(world, r)
        hist_counts, hist_edges = rate_histogram(np.concatenate(hist_samples))
    else:
        world = World(scenario, topo, realization=0)
        for slot in range(scenario.slots):
            metrics.append(world.run_slot(slot))
            trace_world(world, slot)
        cap_sum = world.cap_sum
        active_slots = world.active_slots
        pico_slots = world.pico_slots
        pico_cap_sum = world.pico_cap_sum
        total_slots = scenario.slots
        is_hotspot = world.pop.is_hotspot.copy()
        ever_active = active_slots > 0
        means = np.divide(
            cap_sum, active_slots, out=np.zeros(n), where=ever_active
        )
        hist_counts, hist_edges = rate_histogram(means[ever_active])

    mean_rate = np.divide(
        cap_sum, active_slots, out=np.zeros(n), where=active_slots > 0
    )
    pico_mean_rate = np.divide(
        pico_cap_sum, pico_slots, out=np.zeros(n), where=pico_slots > 0
    )
    frac_on_pico = pico_slots / max(total_slots, 1)

    ees = np.array([m.ee_bits_per_joule for m in metrics])
    caps = np.array([m.capacity_bps for m in metrics])
    pows = np.array([m.power_w for m in metrics])
    acts = np.array([m.n_active_picos for m in metrics])
    return RunResult(
        scenario=scenario,
        topology=topo,
        slot_metrics=metrics,
        ee_mean=float(ees.mean()),
        ee_std=float(ees.std(ddof=1)) if len(ees) > 1 else 0.0,
        capacity_mean=float(caps.mean()),
        power_mean=float(pows.mean()),
        active_picos_mean=float(acts.mean()),
        is_hotspot=is_hotspot,
        mean_rate_bps=mean_rate,
        frac_slots_on_pico=frac_on_pico,
        pico_mean_rate_bps=pico_mean_rate,
        active_slot_count=active_slots,
        pico_slot_count=pico_slots,
        hist_counts=hist_counts,
        hist_edges=hist_edges,
        user_trace=user_trace,
        pico_trace=pico_trace,
    )


# --- CSV emission ----------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_slot_csv(result: RunResult, path: str | Path) -> None:
    """Per-slot metrics; for snapshot ensembles the slot column carries the
    realization index."""
    _write_rows(
        Path(path),
        ["slot", "n_active_picos", "macro_active_users", "pico_active_users",
         "capacity_bps", "power_w", "ee_bits_per_joule"],
        (
            (m.slot, m.n_active_picos, m.macro_active_users, m.pico_active_users,
             m.capacity_bps, m.power_w, m.ee_bits_per_joule)
            for m in result.slot_metrics
        ),
    )


def write_pico_view_csv(result: RunResult, path: str | Path) -> None:
    """Same schema as the per-slot CSV but restricted to the pico layer:
    capacity/power/EE of the small cells alone."""
    def rows():
        for m in result.slot_metrics:
            ee = (
                m.pico_capacity_bps / m.pico_power_w if m.pico_power_w > 0 else 0.0
            )
            yield (
                m.slot, m.n_active_picos, m.macro_active_users,
                m.pico_active_users, m.pico_capacity_bps, m.pico_power_w, ee
            )

    _write_rows(
        Path(path),
        ["slot", "n_active_picos", "macro_active_users", "pico_active_users",
         "capacity_bps", "power_w", "ee_bits_per_joule"],
        rows(),
    )


def write_users_csv(result: RunResult, path: str | Path) -> None:
    n = result.mean_rate_bps.shape[0]
    _write_rows(
        Path(path),
        ["user_id", "kind", "mean_rate_bps", "frac_slots_on_pico"],
        (
            (
                i,
                "hotspot" if result.is_hotspot[i] else "uniform",
                float(result.mean_rate_bps[i]),
                float(result.frac_slots_on_pico[i]),
            )
            for i in range(n)
        ),
    )


def write_histogram_csv(result: RunResult, path: str | Path) -> None:
    _write_rows(
        Path(path),
        ["bin_left_bps", "bin_right_bps", "count"],
        (
            (
                float(result.hist_edges[i]),
                float(result.hist_edges[i + 1]),
                int(result.hist_counts[i]),
            )
            for i in range(len(result.hist_counts))
        ),
    )


def write_sweep_csv(rows: list[dict], path: str | Path) -> None:
    _write_rows(
        Path(path),
        ["threshold", "topology", "ee_mean", "ee_std", "capacity_mean", "power_mean"],
        (
            (
                row["threshold"], row["topology"], float(row["ee_mean"]),
                float(row["ee_std"]), float(row["capacity_mean"]),
                float(row["power_mean"]),
            )
            for row in rows
        ),
    )


def write_user_trace_csv(result: RunResult, path: str | Path) -> None:
    if result.user_trace is None:
        raise EngineError("run was executed without trace_users")
    _write_rows(
        Path(path),
        ["slot", "user_id", "x", "y", "active", "serving_cell"],
        result.user_trace,
    )


def write_pico_trace_csv(result: RunResult, path: str | Path) -> None:
    if result.pico_trace is None:
        raise EngineError("run was executed without trace_picos")
    _write_rows(
        Path(path),
        ["slot", "pico_id", "mode"],
        result.pico_trace,
    )


def sweep_rows(result: RunResult, threshold) -> dict:
    """One sweep-CSV row from an aggregated run."""
    return {
        "threshold": threshold,
        "topology": result.scenario.topology,
        "ee_mean": result.ee_mean,
        "ee_std": result.ee_std,
        "capacity_mean": result.capacity_mean,
        "power_mean": result.power_mean,
    }
