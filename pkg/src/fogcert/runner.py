"""Build and run simulations from a RunConfig, one per seed, then aggregate."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .assigned import AssignedSimulation
from .collaborative import CollaborativeSimulation
from .config import RunConfig
from .fixed import FixedSimulation
from .grid import CellGrid
from .metrics import RunReport, aggregate
from .mobility import TraceSet, WaypointParams, load_trace, synthesize
from .simulation import SimParams

log = logging.getLogger(__name__)


@dataclass
class SeedResult:
    seed: int
    report: RunReport
    oracle_checked: int
    oracle_failures: list
    audit: list = field(default_factory=list)  # NotificationAudit rows as dicts


@dataclass
class RunResult:
    config: RunConfig
    seeds: list
    aggregate: RunReport

    @property
    def reports(self):
        return [s.report for s in self.seeds]

    @property
    def oracle_checked(self):
        return sum(s.oracle_checked for s in self.seeds)

    @property
    def oracle_failures(self):
        return [f for s in self.seeds for f in s.oracle_failures]

    @property
    def audit(self):
        return [row for s in self.seeds for row in s.audit]


def family(arch):
    return arch.split("-")[0]


CELL_SIZE_KEY = {"fixed": "fixed.cell_size_m", "assigned": "assigned.cell_size_m", "collaborative": "collab.cell_size_m"}


def build_grid(cfg: RunConfig) -> CellGrid:
    size = cfg[CELL_SIZE_KEY[family(cfg.architecture)]]
    return CellGrid(cfg["grid.width_m"], cfg["grid.height_m"], size)


def build_trace(cfg: RunConfig, grid: CellGrid, seed) -> TraceSet:
    """Load the configured trace file (``{seed}`` in the path is substituted) or synthesize one."""
    path = cfg["trace"]
    if path:
        return load_trace(path.replace("{seed}", str(seed))).clamped(grid)
    params = WaypointParams(
        (cfg["mobility.speed_min"], cfg["mobility.speed_max"]),
        (cfg["mobility.pause_min_s"], cfg["mobility.pause_max_s"]),
        seed,
    )
    return synthesize(grid, cfg["producers"], cfg["duration_ms"], params)


def make_simulation(cfg: RunConfig, seed, trace: TraceSet | None = None, grid: CellGrid | None = None, **extra):
    cfg = cfg.resolved()
    grid = grid or build_grid(cfg)
    trace = trace if trace is not None else build_trace(cfg, grid, seed)
    arch = family(cfg.architecture)
    common = dict(
        duration_ms=cfg["duration_ms"], pf=cfg["pf"], seed=seed, radio_range_m=cfg["radio.range_m"],
        loss_prob=cfg["radio.loss_prob"], uplink_latency_ms=cfg["uplink.latency_ms"],
        publish_tail_ms=cfg["publish.tail_ms"],
    )
    if arch == "fixed":
        params = SimParams(notification_interval_ms=cfg["notification_interval_ms"], **common, **extra)
        return FixedSimulation(
            grid, trace, params, beacon_interval_ms=cfg["fixed.beacon_interval_ms"],
            max_connection_ms=cfg["fixed.max_connection_ms"], sample_interval_ms=cfg["engine.sample_interval_ms"],
        )
    if arch == "assigned":
        params = SimParams(
            notification_interval_ms=cfg["assigned.notification_interval_ms"], warmup_ms=cfg["assigned.warmup_ms"],
            sample_every=cfg["assigned.sample_every"], **common, **extra,
        )
        return AssignedSimulation(
            grid, trace, params, strategy=cfg["assigned.strategy"],
            beacon_interval_ms=cfg["assigned.beacon_interval_ms"], neighbor_ttl_ms=cfg["assigned.neighbor_ttl_ms"],
            registry_ttl_ms=cfg["assigned.registry_ttl_ms"], exchange_interval_ms=cfg["assigned.exchange_interval_ms"],
            exchange_offset_ms=cfg["assigned.exchange_offset_ms"],
            reconnect_threshold=cfg["assigned.reconnect_threshold"], hoard_neighbors=cfg["assigned.hoard_neighbors"],
            warmup_certify=cfg["assigned.warmup_certify"],
        )
    params = SimParams(notification_interval_ms=cfg["notification_interval_ms"], **common, **extra)
    return CollaborativeSimulation(
        grid, trace, params, poll_wait_ms=cfg["collab.poll_wait_ms"], broker_count=cfg["collab.broker_count"],
    )


def run_seed(cfg: RunConfig, seed, with_audit=False) -> SeedResult:
    sim = make_simulation(cfg, seed)
    report = sim.run()
    audit = [a.as_row() for a in sim.audit] if with_audit else []
    log.info("%s seed %s: %d published, %d oracle checks", report.label, seed, report.published, sim.oracle_checked)
    return SeedResult(seed, report, sim.oracle_checked, list(sim.oracle_failures), audit)


def _run_seed_args(args):
    return run_seed(*args)


def run(cfg: RunConfig, with_audit=False) -> RunResult:
    """One simulation per seed (optionally on parallel workers), aggregated in seed order."""
    cfg = cfg.resolved()
    jobs = [(cfg, s, with_audit) for s in cfg.seeds]
    workers = min(cfg["workers"], len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_seed_args, jobs))
    else:
        results = [run_seed(*j) for j in jobs]
    return RunResult(cfg, results, aggregate([r.report for r in results]))
