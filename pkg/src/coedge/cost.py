"""Latency and energy of one cooperative inference under a row partition.

Every layer is a superstep: each device first receives what it needs
(its input partition for the first layer, neighbour halo rows afterwards,
feature fragments at the first fully-connected layer) and then computes.
The superstep lasts as long as its slowest device, and the inference
latency is the sum of superstep durations.  Energy counts only dynamic
computation and transmission energy; transfers are charged to the
receiving device.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import BadPartition, HaloSpanViolation
from .model import final_shape, halo_rows, output_shape, propagate_shape

__all__ = [
    "Geometry",
    "geometry",
    "RowAssignment",
    "Transfer",
    "CostBreakdown",
    "propagate_rows",
    "workload_size",
    "compute_time",
    "compute_energy",
    "transmission_energy",
    "total_costs",
    "next_active",
]


@dataclass(frozen=True)
class Geometry:
    """Per-layer sizes of a model at a given element width."""

    shapes: tuple
    heights: np.ndarray
    row_bytes: np.ndarray
    conv: np.ndarray
    halo: np.ndarray
    strides: np.ndarray
    first_fc: object
    out_shape: tuple
    elem_bytes: int

    @property
    def n_layers(self):
        return len(self.shapes)

    @property
    def row_kb(self):
        return self.row_bytes / 1024.0

    @property
    def layer_kb(self):
        return self.heights * self.row_bytes / 1024.0

    @property
    def out_row_bytes(self):
        return float(self.out_shape[1] * self.out_shape[2] * self.elem_bytes)


@lru_cache(maxsize=256)
def geometry(model, elem_bytes=4):
    shapes = tuple(propagate_shape(model))
    conv = np.array([layer.is_conv for layer in model.layers])
    fcs = np.flatnonzero(~conv)
    g = Geometry(
        shapes=shapes,
        heights=np.array([s[0] for s in shapes], dtype=np.int64),
        row_bytes=np.array([float(s[1] * s[2] * elem_bytes) for s in shapes]),
        conv=conv,
        halo=np.array([halo_rows(layer) if layer.is_conv else 0 for layer in model.layers], dtype=np.int64),
        strides=np.array([layer.s for layer in model.layers], dtype=np.int64),
        first_fc=int(fcs[0]) if fcs.size else None,
        out_shape=final_shape(model),
        elem_bytes=elem_bytes,
    )
    for arr in (g.heights, g.row_bytes, g.conv, g.halo, g.strides):
        arr.setflags(write=False)
    return g


@dataclass(frozen=True)
class RowAssignment:
    """Input rows per layer and device, shape ``(L, N)``.

    ``fragments`` holds the rows of the convolution-stage output on each
    device before they are gathered at ``aggregator``.
    """

    rows: np.ndarray
    fragments: np.ndarray
    aggregator: int


@lru_cache(maxsize=1024)
def _anchors(h_in, h_out, stride):
    # output row j goes to the device whose input segment holds row min(j*s, h_in-1)
    a = np.minimum(np.arange(h_out) * stride, h_in - 1)
    a.setflags(write=False)
    return a


def _split_rows(counts, h_in, h_out, stride):
    ends = np.cumsum(counts)
    owner = np.searchsorted(ends, _anchors(h_in, h_out, stride), side="right")
    return np.bincount(owner, minlength=len(counts))


def propagate_rows(model, shapes, a, aggregator=None):
    """Rows held by each device at every layer, starting from layer-1 rows ``a``."""
    a = np.asarray(a)
    if a.ndim != 1 or np.any(a < 0) or not np.all(np.equal(np.mod(a, 1), 0)):
        raise BadPartition(f"row counts must be non-negative integers, got {a.tolist()}")
    a = a.astype(np.int64)
    if int(a.sum()) != shapes[0][0]:
        raise BadPartition(f"rows sum to {int(a.sum())}, input height is {shapes[0][0]}")
    if aggregator is None:
        aggregator = int(np.flatnonzero(a)[0])
    return _propagate(model, tuple(shapes), tuple(a.tolist()), int(aggregator))


@lru_cache(maxsize=4096)
def _propagate(model, shapes, a, aggregator):
    # planners evaluate the same split many times over; results are read-only
    a = np.array(a, dtype=np.int64)
    n, n_layers = len(a), len(model.layers)
    rows = np.zeros((n_layers, n), dtype=np.int64)
    rows[0] = a
    cur = a
    heights = [s[0] for s in shapes[1:]] + [output_shape(model.layers[-1], shapes[-1])[0]]
    for l, layer in enumerate(model.layers):
        if not layer.is_conv:
            break
        h_in = shapes[l][0]
        h_out = heights[l]
        cur = _split_rows(cur, h_in, h_out, layer.s)
        if l + 1 < n_layers:
            rows[l + 1] = cur
    fragments = cur
    for l, layer in enumerate(model.layers):
        if not layer.is_conv:
            rows[l] = 0
            rows[l, aggregator] = shapes[l][0]
    rows.setflags(write=False)
    fragments.setflags(write=False)
    return RowAssignment(rows, fragments, aggregator)


def workload_size(shape, rows, elem_bytes=4):
    """KB of input a device holds for a layer with input ``shape``."""
    _, w, c = shape
    return rows * w * c * elem_bytes / 1024


def compute_time(r, device):
    return device.rho * r / device.f


def compute_energy(t_c, device):
    return device.p_c * t_c


def transmission_energy(t_x, device):
    return device.p_x * t_x


class Transfer(NamedTuple):
    layer: int
    device: int
    kind: str
    peer: int
    nbytes: float
    seconds: float


def next_active(counts):
    """Index of the next device holding rows, or -1, for every device."""
    nxt = np.full(len(counts), -1, dtype=np.int64)
    following = -1
    for i in range(len(counts) - 1, -1, -1):
        nxt[i] = following
        if counts[i] > 0:
            following = i
    return nxt


@dataclass(frozen=True)
class CostBreakdown:
    t_c: np.ndarray
    t_x: np.ndarray
    e_c: np.ndarray
    e_x: np.ndarray
    transfers: tuple
    assignment: RowAssignment
    t_total: float
    e_c_total: float
    e_x_total: float

    @property
    def energy(self):
        return self.e_c_total + self.e_x_total

    @property
    def latency(self):
        return self.t_total

    @property
    def layer_times(self):
        return np.max(self.t_c + self.t_x, axis=1)


def _check_span(l, counts, nxt, halo):
    # a neighbour thinner than the halo is fine only if nobody follows it
    for i in np.flatnonzero(counts):
        j = nxt[i]
        if j >= 0 and counts[j] < halo and nxt[j] >= 0:
            raise HaloSpanViolation(
                f"layer {l}: device {i} needs {halo} halo rows but neighbour {j} holds {counts[j]}")


def _transfers(scenario, geo, asg):
    cluster = scenario.cluster
    bw = cluster.bandwidth
    rows = asg.rows
    agg = asg.aggregator
    n_layers, n = rows.shape
    master = cluster.master
    out = []
    for l in range(n_layers):
        if geo.conv[l]:
            nxt = next_active(rows[l])
            _check_span(l, rows[l], nxt, int(geo.halo[l]))
            for i in range(n):
                if rows[l, i] == 0:
                    continue
                if l == 0:
                    extra = min(int(geo.halo[0]), int(geo.heights[0] - rows[0, i])) if nxt[i] >= 0 else 0
                    nbytes = (rows[0, i] + extra) * geo.row_bytes[0]
                    out.append(Transfer(0, i, "distribute", master, nbytes, nbytes / bw(master, i)))
                elif geo.halo[l] > 0 and nxt[i] >= 0:
                    nbytes = geo.halo[l] * geo.row_bytes[l]
                    out.append(Transfer(l, i, "halo_pull", int(nxt[i]), nbytes, nbytes / bw(i, nxt[i])))
        if l == geo.first_fc:
            for i in range(n):
                if i != agg and asg.fragments[i] > 0:
                    nbytes = asg.fragments[i] * geo.row_bytes[l]
                    out.append(Transfer(l, agg, "aggregate", i, nbytes, nbytes / bw(i, agg)))
    last = n_layers - 1
    if geo.first_fc is None:
        for i in range(n):
            if i != agg and asg.fragments[i] > 0:
                nbytes = asg.fragments[i] * geo.out_row_bytes
                out.append(Transfer(last, agg, "aggregate", i, nbytes, nbytes / bw(i, agg)))
    rd = scenario.result_device
    out.append(Transfer(last, agg, "result", rd, scenario.result_bytes, scenario.result_bytes / bw(agg, rd)))
    return tuple(out)


def total_costs(scenario, a, aggregator=None):
    """Per-layer, per-device costs and their totals for layer-1 rows ``a``."""
    model, cluster = scenario.model, scenario.cluster
    geo = geometry(model, scenario.elem_bytes)
    if len(a) != cluster.n:
        raise BadPartition(f"{len(a)} row counts for {cluster.n} devices")
    asg = propagate_rows(model, geo.shapes, a, aggregator)
    rho, f = cluster.vector("rho"), cluster.vector("f")
    p_c, p_x = cluster.vector("p_c"), cluster.vector("p_x")

    r = asg.rows * geo.row_kb[:, None]
    t_c = rho[None, :] * r / f[None, :]
    transfers = _transfers(scenario, geo, asg)
    t_x = np.zeros_like(t_c)
    for tr in transfers:
        t_x[tr.layer, tr.device] += tr.seconds
    e_c = p_c[None, :] * t_c
    e_x = p_x[None, :] * t_x

    t_total = 0.0
    for l in range(t_c.shape[0]):
        t_total += float(np.max(t_c[l] + t_x[l]))
    return CostBreakdown(
        t_c=t_c, t_x=t_x, e_c=e_c, e_x=e_x,
        transfers=transfers, assignment=asg,
        t_total=t_total,
        e_c_total=float(e_c.sum()),
        e_x_total=float(e_x.sum()),
    )
