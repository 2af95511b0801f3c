"""Assemble a runnable simulation from a validated config."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .app import RandomRequestApp, RequestRanges
from .config import ConfigError, classical_delays, memory_params
from .hardware import Detector, QuantumChannel
from .kernel import make_timeline
from .metrics import UtilizationTracker, emit_metrics, summarise
from .network import NetworkManager, ReservationLedger, build_forwarding_tables, route
from .node import BSMNode, Port, RouterNode
from .units import seconds

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProtocolParams:
    p_swap: float
    gate_fidelity: float
    swap_degradation: float


class Simulation:
    def __init__(self, config, timeline):
        self.config = config
        self.timeline = timeline
        self.routers = {}
        self.bsms = {}
        self.apps = []
        self.trackers = []
        self.tables = {}
        self.stop = seconds(config["simulation"]["stop_time_s"])
        self.last_summary = None

    def run(self, stop_s=None):
        if stop_s is not None:
            self.stop = seconds(stop_s)
        summary = self.timeline.run(self.stop)
        for tracker in self.trackers:
            tracker.close(self.stop)
        self.last_summary = summary
        return summary

    def summary(self):
        return summarise(self.apps, self.trackers, self.stop)

    def write_outputs(self, out_dir):
        return emit_metrics(out_dir, self.apps, self.trackers, self.stop)

    def path(self, src, dst):
        return route(self.tables, src, dst)


def build_simulation(cfg, seed=None, stop_s=None, kernel=None) -> Simulation:
    """Wire nodes, channels, detectors, memories, managers and apps."""
    simcfg = cfg["simulation"]
    tl = make_timeline(simcfg["seed"] if seed is None else seed, kernel or simcfg["kernel"])
    sim = Simulation(cfg, tl)
    if stop_s is not None:
        sim.stop = seconds(stop_s)
    sample_ps = seconds(simcfg["utilization_sample_s"])

    protocol = cfg["protocol"]
    degradation = protocol["swap_degradation"]
    params = ProtocolParams(protocol["p_swap"], protocol["gate_fidelity"],
                            protocol["gate_fidelity"] if degradation is None else degradation)

    for node in cfg["nodes"]:
        if node["type"] != "router":
            continue
        mem = node["memory"]
        tracker = UtilizationTracker(node["name"], mem["array_size"], tl, sample_ps)
        router = RouterNode(node["name"], tl, mem["array_size"], memory_params(mem),
                            on_change=tracker.on_change)
        sim.routers[router.name] = router
        sim.trackers.append(tracker)
        tl.entities[router.name] = router

    delays = classical_delays(cfg)
    for (a, b), delay in delays.items():
        sim.routers[a].connect(sim.routers[b], delay)

    bsm_cfg = {tuple(sorted(n["endpoints"])): n for n in cfg["nodes"] if n["type"] == "bsm"}
    links = {}
    for ch in cfg["quantum_channels"]:
        a, b = ch["endpoints"]
        links[(a, b)] = ch["length_km"]
        ncfg = bsm_cfg[tuple(sorted((a, b)))]
        det = ncfg["detector"]
        detectors = [Detector(f"{ncfg['name']}.D{i}", tl, det["efficiency"], det["count_rate_hz"],
                              det["dark_count_rate_hz"], det["resolution_ps"]) for i in range(2)]
        frame = ch["tdm_frame_ps"]
        bsm = BSMNode(ncfg["name"], tl, (a, b), detectors, frame + det["resolution_ps"], frame)
        sim.bsms[bsm.name] = bsm
        tl.entities[bsm.name] = bsm
        for here, there in ((a, b), (b, a)):
            router = sim.routers[here]
            if (here, there) not in delays:
                raise ConfigError(f"no classical delay between linked routers {here} and {there}")
            half = delays[(here, there)] // 2
            qc = QuantumChannel(f"{here}->{bsm.name}", tl, router, bsm.station,
                                ch["length_km"] / 2.0, ch["attenuation_db_per_km"],
                                ch["light_speed_m_per_s"], frame)
            qc.register_source(here)
            router.connect(bsm, half)
            bsm.connect(router, half)
            router.ports[there] = Port(there, bsm.station, qc, half)
        for d in detectors:
            d.start_dark_counts()

    names = list(sim.routers)
    sim.tables = build_forwarding_tables(names, links)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if sim.tables[a].get(b) is None:
                log.warning("routers %s and %s are disconnected; requests between them will be "
                            "rejected", a, b)

    for name, router in sim.routers.items():
        router.network = NetworkManager(router, tl, ReservationLedger(router.memory_count),
                                        sim.tables, params)

    apps = cfg["applications"]
    if apps["enabled"]:
        ranges = RequestRanges(tuple(apps["fidelity_range"]), tuple(apps["duration_s"]),
                               tuple(apps["start_delay_s"]), apps["min_memory"],
                               apps["retry_delay_s"])
        hosts = names if apps["nodes"] is None else apps["nodes"]
        for name in hosts:
            router = sim.routers[name]
            app = RandomRequestApp(router, tl, [n for n in names if n != name],
                                   router.memory_count, ranges)
            router.app = app
            router.network.app = app
            sim.apps.append(app)
            app.start(0)
    return sim


__all__ = ["Simulation", "build_simulation", "ProtocolParams"]
