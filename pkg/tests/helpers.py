"""Builders for small scripted networks used by the protocol and network tests."""

from qnetsim.config import linear_config, validate
from qnetsim.resource import ENTANGLED, OCCUPIED, RAW
from qnetsim.sim import build_simulation


def linear_sim(n=3, seed=0, kernel=None, detector=None, attenuation=None, apps=False, **memory):
    cfg = linear_config(n, 10.0, stop_time_s=20.0, seed=seed, applications=apps, **memory)
    if detector or attenuation is not None:
        raw = dict(cfg)
        if detector:
            raw["defaults"]["detector"].update(detector)
            for node in raw["nodes"]:
                if node["type"] == "bsm":
                    node["detector"].update(detector)
        if attenuation is not None:
            for ch in raw["quantum_channels"]:
                ch["attenuation_db_per_km"] = attenuation
        cfg = validate(raw)
    return build_simulation(cfg, kernel=kernel)


def perfect_sim(n=2, seed=0, kernel=None):
    """Lossless fibre, unit detector and emission efficiency, no dark counts."""
    return linear_sim(n, seed, kernel, detector={"efficiency": 1.0, "dark_count_rate_hz": 0.0},
                      attenuation=0.0, efficiency=1.0)


def force_pair(sim, rid, a, b, fidelity, expiration):
    """Mark memories a=(node, idx) and b=(node, idx) as an entangled pair of reservation ``rid``."""
    for (node, idx), partner in ((a, b), (b, a)):
        rm = sim.routers[node].rm
        rm.active_reservations.add(rid)
        info = rm.infos[idx]
        info.reservation = rid
        mm = rm.memory_manager
        if info.state is ENTANGLED:
            info.memory.clear()
            mm.update(info, RAW)
        if info.state is RAW:
            mm.update(info, OCCUPIED)
        info.memory.entangle(partner, fidelity, expiration)
        mm.update(info, ENTANGLED)
        info.owner = None


def trace_messages(sim):
    """Log (time, receiver, kind, sender) for every classical message a router receives."""
    log = []
    for router in sim.routers.values():
        orig = router.receive

        def receive(msg, orig=orig, name=router.name):
            log.append((sim.timeline.now, name, msg.kind, msg.src))
            orig(msg)

        router.receive = receive
    return log
