"""JSON topology/parameter files: schema, defaults and ready-made topologies.

The schema is this package's own. A config has these top-level sections:
``simulation``, ``defaults``, ``nodes``, ``quantum_channels``, ``classical``,
``protocol`` and ``applications``. Only ``nodes`` and ``quantum_channels`` are
required; everything else falls back to the standard hardware values.
"""

from __future__ import annotations

import copy
import heapq
import json
import math
from importlib import resources

import jsonschema

from .hardware import memory_efficiency

DEFAULT_MEMORY = {
    "efficiency": None,  # None: 0.75, or derived from collection_efficiency when given
    "collection_efficiency": None,
    "frequency_hz": 20e3,
    "coherence_time_s": 1.3,
    "cooperativity": 500.0,
    "gamma_hz": 14.0,
    "gamma_star_hz": 32.0,
    "delta_omega_hz": 0.0,
    "array_size": 50,
}
DEFAULT_EFFICIENCY = 0.75
DEFAULT_DETECTOR = {
    "efficiency": 0.8,
    "count_rate_hz": 50e6,
    "dark_count_rate_hz": 0.0,
    "resolution_ps": 100,
}
DEFAULT_CHANNEL = {
    "attenuation_db_per_km": 0.2,
    "light_speed_m_per_s": 2e8,
    "tdm_frame_ps": 20_000,
}
DEFAULT_PROTOCOL = {
    "p_swap": 0.64,
    "gate_fidelity": 0.99,
    "swap_degradation": None,  # None: equal to gate_fidelity
}
DEFAULT_SIMULATION = {
    "stop_time_s": 100.0,
    "seed": 0,
    "utilization_sample_s": 0.1,
    "kernel": None,
}
DEFAULT_APPLICATIONS = {
    "enabled": True,
    "nodes": None,
    "fidelity_range": [0.8, 1.0],
    "duration_s": [10.0, 20.0],
    "start_delay_s": [1.0, 2.0],
    "min_memory": 10,
    "retry_delay_s": 1.0,
}

_prob = {"type": "number", "minimum": 0, "maximum": 1}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_pair = {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}
_range = {"type": "array", "items": _nonneg, "minItems": 2, "maxItems": 2}

MEMORY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "efficiency": {"anyOf": [_prob, {"type": "null"}]},
        "collection_efficiency": {"anyOf": [_prob, {"type": "null"}]},
        "frequency_hz": _pos,
        "coherence_time_s": _pos,
        "cooperativity": _pos,
        "gamma_hz": _pos,
        "gamma_star_hz": _nonneg,
        "delta_omega_hz": {"type": "number"},
        "array_size": {"type": "integer", "minimum": 1},
    },
}
DETECTOR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "efficiency": _prob,
        "count_rate_hz": _pos,
        "dark_count_rate_hz": _nonneg,
        "resolution_ps": {"type": "integer", "minimum": 1},
    },
}
CHANNEL_PARAMS = {
    "attenuation_db_per_km": _nonneg,
    "light_speed_m_per_s": _pos,
    "tdm_frame_ps": {"type": "integer", "minimum": 1},
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["nodes", "quantum_channels"],
    "properties": {
        "description": {"type": "string"},
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "stop_time_s": _pos,
                "seed": {"type": "integer"},
                "utilization_sample_s": _pos,
                "kernel": {"enum": [None, "python", "cython"]},
            },
        },
        "defaults": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "memory": MEMORY_SCHEMA,
                "detector": DETECTOR_SCHEMA,
                "channel": {"type": "object", "additionalProperties": False,
                            "properties": CHANNEL_PARAMS},
            },
        },
        "nodes": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "type"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "type": {"enum": ["router", "bsm"]},
                    "site": {"type": "string"},
                    "memory": MEMORY_SCHEMA,
                    "detector": DETECTOR_SCHEMA,
                    "endpoints": _pair,
                },
            },
        },
        "quantum_channels": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["endpoints", "length_km"],
                "properties": {"endpoints": _pair, "length_km": _nonneg, **CHANNEL_PARAMS},
            },
        },
        "classical": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["model", "sites", "rtt_ms"],
                    "properties": {
                        "model": {"const": "rtt_matrix"},
                        "sites": {"type": "array", "items": {"type": "string"}},
                        "rtt_ms": {"type": "array", "items": {"type": "array", "items": {
                            "anyOf": [_nonneg, {"type": "null"}]}}},
                        "intra_site_ms": _nonneg,
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["model"],
                    "properties": {
                        "model": {"const": "propagation"},
                        "transmission_us": _nonneg,
                        "processing_us": _nonneg,
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["model", "channels"],
                    "properties": {
                        "model": {"const": "explicit"},
                        "channels": {"type": "array", "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["endpoints", "one_way_delay_ps"],
                            "properties": {"endpoints": _pair,
                                           "one_way_delay_ps": {"type": "integer",
                                                                "minimum": 0}},
                        }},
                        "default_one_way_delay_ps": {"type": "integer", "minimum": 0},
                    },
                },
            ],
        },
        "protocol": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p_swap": _prob,
                "gate_fidelity": _prob,
                "swap_degradation": {"anyOf": [_prob, {"type": "null"}]},
            },
        },
        "applications": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "enabled": {"type": "boolean"},
                "nodes": {"anyOf": [{"type": "array", "items": {"type": "string"}},
                                    {"type": "null"}]},
                "fidelity_range": {"type": "array", "items": _prob, "minItems": 2,
                                   "maxItems": 2},
                "duration_s": _range,
                "start_delay_s": _range,
                "min_memory": {"type": "integer", "minimum": 1},
                "retry_delay_s": _nonneg,
            },
        },
    },
}


class ConfigError(ValueError):
    pass


def _path(error_path):
    out = ""
    for part in error_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def _describe_node(config, error_path):
    parts = list(error_path)
    if len(parts) >= 2 and parts[0] in ("nodes", "quantum_channels") and isinstance(parts[1], int):
        try:
            item = config[parts[0]][parts[1]]
        except (IndexError, KeyError, TypeError):
            return ""
        if isinstance(item, dict):
            label = item.get("name") or "-".join(map(str, item.get("endpoints", [])))
            return f" ({label})" if label else ""
    return ""


def validate(config: dict) -> dict:
    """Check ``config`` against the schema and topology rules; return it normalised."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        where = _path(err.absolute_path) + _describe_node(config, err.absolute_path)
        raise ConfigError(f"{where}: {err.message}")
    cfg = normalise(config)
    _check_topology(cfg)
    return cfg


def normalise(config: dict) -> dict:
    """Fill omitted fields with the standard defaults (idempotent)."""
    cfg = copy.deepcopy(config)
    defaults = cfg.setdefault("defaults", {})
    defaults["memory"] = {**DEFAULT_MEMORY, **defaults.get("memory", {})}
    defaults["detector"] = {**DEFAULT_DETECTOR, **defaults.get("detector", {})}
    defaults["channel"] = {**DEFAULT_CHANNEL, **defaults.get("channel", {})}
    cfg["simulation"] = {**DEFAULT_SIMULATION, **cfg.get("simulation", {})}
    cfg["protocol"] = {**DEFAULT_PROTOCOL, **cfg.get("protocol", {})}
    cfg["applications"] = {**DEFAULT_APPLICATIONS, **cfg.get("applications", {})}
    cfg.setdefault("classical", {"model": "propagation"})
    if cfg["classical"]["model"] == "rtt_matrix":
        cfg["classical"].setdefault("intra_site_ms", 0.25)
    elif cfg["classical"]["model"] == "propagation":
        cfg["classical"].setdefault("transmission_us", 8.0)
        cfg["classical"].setdefault("processing_us", 4.0)
    for node in cfg["nodes"]:
        if node["type"] == "router":
            node["memory"] = {**defaults["memory"], **node.get("memory", {})}
        else:
            node["detector"] = {**defaults["detector"], **node.get("detector", {})}
    for ch in cfg["quantum_channels"]:
        for key, value in defaults["channel"].items():
            ch.setdefault(key, value)
    return cfg


def _check_topology(cfg):
    names = [n["name"] for n in cfg["nodes"]]
    seen = set()
    for name in names:
        if name in seen:
            raise ConfigError(f"nodes: duplicate node name {name!r}")
        seen.add(name)
    routers = {n["name"]: n for n in cfg["nodes"] if n["type"] == "router"}
    bsms = [n for n in cfg["nodes"] if n["type"] == "bsm"]
    for i, node in enumerate(cfg["nodes"]):
        where = f"nodes[{i}] ({node['name']})"
        if node["type"] == "bsm":
            if "endpoints" not in node:
                raise ConfigError(f"{where}: BSM node needs 'endpoints'")
            if "memory" in node:
                raise ConfigError(f"{where}: BSM nodes carry no memories")
        else:
            if "endpoints" in node or "detector" in node:
                raise ConfigError(f"{where}: 'endpoints'/'detector' are only valid on BSM nodes")
            mem = node["memory"]
            if mem["efficiency"] is not None and mem["collection_efficiency"] is not None:
                raise ConfigError(f"{where}.memory: give efficiency or collection_efficiency, "
                                  "not both")
    links = {}
    for i, ch in enumerate(cfg["quantum_channels"]):
        a, b = ch["endpoints"]
        where = f"quantum_channels[{i}] ({a}-{b})"
        for end in (a, b):
            if end not in routers:
                raise ConfigError(f"{where}: endpoint {end!r} is not a router")
        if a == b:
            raise ConfigError(f"{where}: a channel needs two distinct routers")
        key = frozenset((a, b))
        if key in links:
            raise ConfigError(f"{where}: duplicate quantum channel")
        links[key] = ch
    mids = {}
    for node in bsms:
        key = frozenset(node["endpoints"])
        if key not in links:
            raise ConfigError(f"BSM node {node['name']}: no quantum channel between "
                              f"{' and '.join(node['endpoints'])}")
        if key in mids:
            raise ConfigError(f"BSM node {node['name']}: link already has BSM {mids[key]}")
        mids[key] = node["name"]
    for key, ch in links.items():
        if key not in mids:
            a, b = ch["endpoints"]
            raise ConfigError(f"quantum channel {a}-{b}: no BSM node at its midpoint")
    classical = cfg["classical"]
    if classical["model"] == "rtt_matrix":
        sites = classical["sites"]
        n = len(sites)
        if len(classical["rtt_ms"]) != n or any(len(row) != n for row in classical["rtt_ms"]):
            raise ConfigError(f"classical.rtt_ms: must be a {n}x{n} matrix")
        for name, node in routers.items():
            if node.get("site") not in sites:
                raise ConfigError(f"router {name}: site {node.get('site')!r} not in classical.sites")
    apps = cfg["applications"]
    if apps["nodes"] is not None:
        for name in apps["nodes"]:
            if name not in routers:
                raise ConfigError(f"applications.nodes: {name!r} is not a router")
    for key in ("fidelity_range", "duration_s", "start_delay_s"):
        lo, hi = apps[key]
        if lo > hi:
            raise ConfigError(f"applications.{key}: lower bound exceeds upper bound")


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return validate(raw)


def dump_config(cfg, path=None):
    text = json.dumps(cfg, indent=2, sort_keys=True)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


# ---------------------------------------------------------------------------
# derived values


def memory_params(mem: dict):
    """MemoryParams for a normalised per-router memory block."""
    from .hardware import MemoryParams

    if mem["efficiency"] is not None:
        eff = mem["efficiency"]
    elif mem["collection_efficiency"] is not None:
        eff = memory_efficiency(mem["collection_efficiency"], mem["cooperativity"])
    else:
        eff = DEFAULT_EFFICIENCY
    return MemoryParams(efficiency=eff, frequency_hz=mem["frequency_hz"],
                        coherence_time_s=mem["coherence_time_s"],
                        cooperativity=mem["cooperativity"], gamma_hz=mem["gamma_hz"],
                        gamma_star_hz=mem["gamma_star_hz"],
                        delta_omega_hz=mem["delta_omega_hz"])


def rtt_one_way_ms(rtt_ms, i, j):
    """One-way delay between two sites: mean of the two RTTs, halved."""
    return (rtt_ms[i][j] + rtt_ms[j][i]) / 4.0


def fibre_distances(routers, channels):
    """All-pairs shortest fibre distance in km."""
    adj = {r: {} for r in routers}
    for ch in channels:
        a, b = ch["endpoints"]
        adj[a][b] = adj[b][a] = min(ch["length_km"], adj[a].get(b, math.inf))
    out = {}
    for src in routers:
        dist = {src: 0.0}
        heap = [(0.0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, w in adj[u].items():
                if d + w < dist.get(v, math.inf):
                    dist[v] = d + w
                    heapq.heappush(heap, (d + w, v))
        out[src] = dist
    return out


def classical_delays(cfg) -> dict:
    """One-way delay in ps for every ordered router pair that can talk."""
    from .units import MS, SECOND, US

    routers = [n for n in cfg["nodes"] if n["type"] == "router"]
    names = [r["name"] for r in routers]
    classical = cfg["classical"]
    model = classical["model"]
    out = {}
    if model == "rtt_matrix":
        sites = classical["sites"]
        site_of = {r["name"]: sites.index(r["site"]) for r in routers}
        for a in names:
            for b in names:
                if a == b:
                    continue
                i, j = site_of[a], site_of[b]
                if i == j:
                    ms = classical["intra_site_ms"]
                else:
                    rtt = classical["rtt_ms"]
                    if rtt[i][j] is None or rtt[j][i] is None:
                        raise ConfigError(f"classical.rtt_ms: missing RTT between {sites[i]} and "
                                          f"{sites[j]}")
                    ms = rtt_one_way_ms(rtt, i, j)
                out[(a, b)] = int(round(ms * MS))
    elif model == "propagation":
        dist = fibre_distances(names, cfg["quantum_channels"])
        c = cfg["defaults"]["channel"]["light_speed_m_per_s"]
        fixed = (classical["transmission_us"] + classical["processing_us"]) * US
        for a in names:
            for b in names:
                if a != b and b in dist[a]:
                    out[(a, b)] = int(round(dist[a][b] * 1000.0 / c * SECOND + fixed))
    else:
        given = {}
        for ch in classical["channels"]:
            a, b = ch["endpoints"]
            given[(a, b)] = given[(b, a)] = ch["one_way_delay_ps"]
        default = classical.get("default_one_way_delay_ps")
        for a in names:
            for b in names:
                if a == b:
                    continue
                if (a, b) in given:
                    out[(a, b)] = given[(a, b)]
                elif default is not None:
                    out[(a, b)] = default
    return out


# ---------------------------------------------------------------------------
# ready-made topologies


def chicago_data() -> dict:
    return json.loads(resources.files("qnetsim").joinpath("data/chicago.json").read_text())


def route_incidence(routers, links):
    """Per-router load weight over all unordered router pairs on shortest paths.

    An endpoint of a route counts once; a router in the middle of a route
    counts twice, since it holds memories towards both of its path neighbours.
    """
    from .network import build_forwarding_tables, route

    tables = build_forwarding_tables(routers, links)
    weight = dict.fromkeys(routers, 0)
    for i, a in enumerate(routers):
        for b in routers[i + 1:]:
            path = route(tables, a, b)
            if path is None:
                continue
            for k, node in enumerate(path):
                weight[node] += 1 if k in (0, len(path) - 1) else 2
    return weight


def weighted_allocation(total: int, weights: dict) -> dict:
    """Split ``total`` memories in proportion to ``weights`` (largest remainder)."""
    wsum = sum(weights.values())
    if wsum <= 0:
        raise ValueError("weights must have a positive sum")
    raw = {k: total * w / wsum for k, w in weights.items()}
    out = {k: int(math.floor(v)) for k, v in raw.items()}
    left = total - sum(out.values())
    for k in sorted(raw, key=lambda k: (-(raw[k] - out[k]), k))[:left]:
        out[k] += 1
    return out


def chicago_config(memory_policy="even", *, efficiency=0.75, cooperativity=500.0,
                   frequency_hz=20e3, classical="rtt", stop_time_s=100.0, seed=0,
                   array_size=50, utilization_sample_s=0.1) -> dict:
    """Config dict for the nine-router metropolitan topology.

    ``memory_policy`` is "even" (``array_size`` everywhere) or "weighted"
    (published per-router sizes, 450 in total). ``classical`` is "rtt" for
    the measured site RTT matrix or "propagation" for dedicated low-latency
    control channels.
    """
    data = chicago_data()
    if memory_policy not in ("even", "weighted"):
        raise ValueError(f"unknown memory policy {memory_policy!r}")
    nodes = []
    for r in data["routers"]:
        size = data["weighted_memory"][r["name"]] if memory_policy == "weighted" else array_size
        nodes.append({"name": r["name"], "type": "router", "site": r["site"],
                      "memory": {"array_size": size}})
    channels = []
    for a, b, length in data["links"]:
        nodes.append({"name": f"BSM:{a}:{b}", "type": "bsm", "endpoints": [a, b]})
        channels.append({"endpoints": [a, b], "length_km": length})
    if classical == "rtt":
        cl = {"model": "rtt_matrix", "sites": data["sites"], "rtt_ms": data["rtt_ms"],
              "intra_site_ms": data["intra_site_ms"]}
    elif classical == "propagation":
        cl = {"model": "propagation", "transmission_us": 8.0, "processing_us": 4.0}
    else:
        raise ValueError(f"unknown classical model {classical!r}")
    return validate({
        "description": f"metropolitan topology, {memory_policy} memory, {classical} delays",
        "simulation": {"stop_time_s": stop_time_s, "seed": seed,
                       "utilization_sample_s": utilization_sample_s},
        "defaults": {"memory": {"efficiency": efficiency, "cooperativity": cooperativity,
                                "frequency_hz": frequency_hz}},
        "nodes": nodes,
        "quantum_channels": channels,
        "classical": cl,
    })


def linear_config(n=3, length_km=10.0, delay_ps=None, stop_time_s=20.0, seed=0,
                  applications=False, **memory) -> dict:
    """A chain of ``n`` routers ``r1..rn`` with equal links."""
    names = [f"r{i + 1}" for i in range(n)]
    nodes = [{"name": x, "type": "router"} for x in names]
    channels = []
    for a, b in zip(names, names[1:]):
        nodes.append({"name": f"BSM:{a}:{b}", "type": "bsm", "endpoints": [a, b]})
        channels.append({"endpoints": [a, b], "length_km": length_km})
    if delay_ps is None:
        classical = {"model": "propagation"}
    else:
        classical = {"model": "explicit", "channels": [], "default_one_way_delay_ps": delay_ps}
    cfg = {
        "simulation": {"stop_time_s": stop_time_s, "seed": seed},
        "nodes": nodes,
        "quantum_channels": channels,
        "classical": classical,
        "applications": {"enabled": applications},
    }
    if memory:
        cfg["defaults"] = {"memory": memory}
    return validate(cfg)
