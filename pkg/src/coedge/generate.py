"""Seeded random instances for fuzzing and the small-instance oracle suite."""

import numpy as np

from .errors import HaloSpanViolation, ShapeUnderflow
from .model import ModelDescriptor, conv, fc
from .resources import MEMORY_BANDWIDTH, BandwidthMatrix, Cluster, DeviceProfile
from .scenario import Scenario

__all__ = ["random_model", "random_cluster", "random_scenario", "random_rows"]


def random_model(rng, height, n_layers, width=None, max_channels=8):
    """A stack of ``n_layers`` layers on an ``(height, width, c)`` input.

    Convolutions come first; with probability one half the stack ends in
    one or two fully-connected layers.  Strides are drawn so the feature map
    never collapses below one row.
    """
    width = int(rng.integers(2, 9)) if width is None else width
    c = int(rng.integers(1, 4))
    n_fc = 0
    if n_layers > 1 and rng.random() < 0.5:
        n_fc = int(rng.integers(1, min(2, n_layers - 1) + 1))
    layers = []
    h, w, ch = height, width, c
    for _ in range(n_layers - n_fc):
        k = int(rng.choice([1, 3, 5]))
        k = min(k, 2 * (min(h, w) // 2) + 1)
        s = int(rng.choice([1, 1, 2])) if h >= 4 else 1
        c_out = int(rng.integers(1, max_channels + 1))
        layer = conv(k, ch, c_out, s, k // 2)
        layers.append(layer)
        h = (h - k + 2 * layer.p) // s + 1
        w = (w - k + 2 * layer.p) // s + 1
        ch = c_out
    for _ in range(n_fc):
        c_out = int(rng.integers(1, 64))
        layers.append(fc(ch, c_out))
        ch = c_out
    return ModelDescriptor("random", (height, width, c), tuple(layers))


def random_cluster(rng, n, link_range=(2e5, 5e6), symmetric=False):
    """``n`` devices with intensities, clocks and powers in realistic edge ranges."""
    devices = tuple(
        DeviceProfile(
            f"dev-{i}",
            rho=float(rng.uniform(2e5, 2e6)),
            f=float(rng.uniform(1e9, 4e9)),
            m=float(rng.uniform(64, 1e6)),
            p_c=float(rng.uniform(1, 15)),
            p_x=float(rng.uniform(0.05, 1.0)),
        )
        for i in range(n)
    )
    b = rng.uniform(*link_range, size=(n, n))
    if symmetric:
        b = np.triu(b) + np.triu(b, 1).T
    np.fill_diagonal(b, MEMORY_BANDWIDTH)
    return Cluster(devices, BandwidthMatrix(b), master=int(rng.integers(n)))


def random_scenario(rng, max_devices=4, heights=(4, 32), max_layers=5, elem_bytes=None):
    """A random scenario whose deadline is loose, tight or unreachable in roughly equal shares."""
    n = int(rng.integers(1, max_devices + 1))
    while True:
        h = int(rng.integers(heights[0], heights[1] + 1))
        try:
            model = random_model(rng, h, int(rng.integers(1, max_layers + 1)))
            break
        except ShapeUnderflow:
            continue
    eb = int(rng.choice([1, 2, 4])) if elem_bytes is None else elem_bytes
    deadline = float(10 ** rng.uniform(-4, 0))
    return Scenario(model, random_cluster(rng, n), deadline, elem_bytes=eb,
                    result_bytes=float(rng.choice([0.0, 64.0, 4096.0])))


def random_rows(rng, scenario, tries=50):
    """Random layer-1 row counts summing to the input height.

    Draws are retried until the halo of every layer can be served by the
    next active device; ``None`` if no such split turns up.
    """
    from .cost import total_costs

    h, n = scenario.height, scenario.n
    for _ in range(tries):
        k = int(rng.integers(1, n + 1))
        active = np.sort(rng.choice(n, size=k, replace=False))
        cuts = np.sort(rng.integers(0, h + 1, size=k - 1))
        parts = np.diff(np.concatenate([[0], cuts, [h]]))
        rows = np.zeros(n, dtype=np.int64)
        rows[active] = parts
        try:
            total_costs(scenario, rows)
        except HaloSpanViolation:
            continue
        return rows
    return None
