"""Run metrics: per-flow throughput, memory utilisation, request outcomes."""

from __future__ import annotations

import csv
import os

from .resource import ENTANGLED, OCCUPIED, RAW
from .units import to_seconds

THROUGHPUT_COLUMNS = ["flow_id", "initiator", "responder", "pairs_delivered", "active_seconds",
                      "pairs_per_second"]
UTILIZATION_COLUMNS = ["node", "time_s", "frac_raw", "frac_entangled", "frac_occupied"]
REQUEST_COLUMNS = ["app_node", "request_id", "outcome", "start", "end", "memory_size",
                   "target_fidelity"]


class UtilizationTracker:
    """Time-weighted RAW/ENTANGLED/OCCUPIED occupancy of one node's memory array.

    State is integrated exactly between transitions, then reported per bin
    of ``bin_ps``. Time with more than ``threshold`` of the array in use
    (ENTANGLED or OCCUPIED) is also accumulated exactly.
    """

    def __init__(self, name, size, timeline, bin_ps, threshold=0.9):
        self.name = name
        self.size = size
        self.timeline = timeline
        self.bin = int(bin_ps)
        self.threshold = threshold
        self.last_time = 0
        self.state = (size, 0, 0)
        self.bins = {}  # bin index -> [raw, entangled, occupied] in memory*ps
        self.busy_time = 0
        self.transitions = 0
        self.closed_at = None

    def on_change(self, counts):
        self._advance(self.timeline.now)
        self.state = (counts[RAW], counts[ENTANGLED], counts[OCCUPIED])
        self.transitions += 1

    def _advance(self, t):
        last = self.last_time
        if t <= last:
            return
        raw, ent, occ = self.state
        if ent + occ > self.threshold * self.size:
            self.busy_time += t - last
        width = self.bin
        bins = self.bins
        while last < t:
            k = last // width
            edge = min(t, (k + 1) * width)
            dt = edge - last
            acc = bins.get(k)
            if acc is None:
                acc = bins[k] = [0, 0, 0]
            acc[0] += raw * dt
            acc[1] += ent * dt
            acc[2] += occ * dt
            last = edge
        self.last_time = t

    def close(self, stop):
        self._advance(stop)
        self.closed_at = stop

    def rows(self):
        stop = self.closed_at if self.closed_at is not None else self.last_time
        width = self.bin
        nbins = -(-stop // width)
        out = []
        for k in range(nbins):
            span = min(width, stop - k * width)
            raw, ent, occ = self.bins.get(k, (self.size * span, 0, 0))
            denom = self.size * span
            out.append((self.name, to_seconds(k * width), raw / denom, ent / denom, occ / denom))
        return out

    def mean_utilization(self):
        stop = self.closed_at or self.last_time
        if stop == 0:
            return 0.0
        used = sum(a[1] + a[2] for a in self.bins.values())
        return used / (self.size * stop)

    def busy_fraction(self):
        stop = self.closed_at or self.last_time
        return self.busy_time / stop if stop else 0.0


def flow_rows(apps, stop):
    """One row per approved reservation."""
    rows = []
    for app in apps:
        for rec in app.log:
            if rec.outcome != "approved":
                continue
            active = max(0, min(rec.end, stop) - rec.start)
            pairs = app.pairs.get(rec.request_id, 0)
            secs = to_seconds(active)
            rows.append((rec.request_id, rec.app_node, rec.responder, pairs, secs,
                         pairs / secs if secs > 0 else 0.0))
    return rows


def summarise(apps, trackers, stop):
    flows = flow_rows(apps, stop)
    active = [r for r in flows if r[4] > 0]
    requests = [rec for app in apps for rec in app.log]
    completed = [r for r in requests if r.outcome == "approved" and r.end <= stop]
    total_pairs = sum(r[3] for r in flows)
    return {
        "flows": len(flows),
        "average_flow_throughput": (sum(r[5] for r in active) / len(active)) if active else 0.0,
        "aggregate_throughput": total_pairs / to_seconds(stop) if stop else 0.0,
        "pairs_delivered": total_pairs,
        "requests_sent": len(requests),
        "requests_approved": sum(1 for r in requests if r.outcome == "approved"),
        "requests_rejected": sum(1 for r in requests if r.outcome == "rejected"),
        "requests_completed": len(completed),
        "busy_fraction": {t.name: t.busy_fraction() for t in trackers},
        "mean_utilization": {t.name: t.mean_utilization() for t in trackers},
    }


def _fmt(x):
    if isinstance(x, float):
        return repr(round(x, 12))
    return str(x)


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def emit_metrics(out_dir, apps, trackers, stop):
    """Write throughput.csv, utilization.csv and requests.csv; return their paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, f"{name}.csv")
             for name in ("throughput", "utilization", "requests")}
    write_csv(paths["throughput"], THROUGHPUT_COLUMNS, flow_rows(apps, stop))
    write_csv(paths["utilization"], UTILIZATION_COLUMNS,
              [row for t in trackers for row in t.rows()])
    req_rows = [(r.app_node, r.request_id, r.outcome, to_seconds(r.start), to_seconds(r.end),
                 r.memory_size, r.target_fidelity) for app in apps for r in app.log]
    write_csv(paths["requests"], REQUEST_COLUMNS, req_rows)
    return paths

