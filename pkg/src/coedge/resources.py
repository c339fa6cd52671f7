"""Device resource profiles, the pairwise bandwidth matrix and cluster files."""

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, MissingBandwidth, NonPositiveInput, ParseError

__all__ = [
    "MEMORY_BANDWIDTH",
    "DeviceProfile",
    "BandwidthMatrix",
    "Cluster",
    "derive_intensity",
    "parse_cluster",
    "load_cluster",
    "cluster_to_dict",
    "dump_cluster",
]

# bytes/s, DDR3-class memory bandwidth used for device-to-itself transfers
MEMORY_BANDWIDTH = 12.8e9


@dataclass(frozen=True)
class DeviceProfile:
    """Resource tuple of one device.

    Attributes
    ----------
    rho : float
        Computing intensity, cycles per KB of layer input.
    f : float
        CPU frequency, cycles per second.
    m : float
        Memory available to the inference workload, KB.
    p_c, p_x : float
        Computation and transmission power, watts.
    """

    name: str
    rho: float
    f: float
    m: float
    p_c: float
    p_x: float

    def __post_init__(self):
        for attr in ("rho", "f", "m"):
            v = getattr(self, attr)
            if not (math.isfinite(v) and v > 0):
                raise InvariantViolation(attr, f"must be > 0 for device {self.name!r}, got {v!r}")
        for attr in ("p_c", "p_x"):
            v = getattr(self, attr)
            if not (math.isfinite(v) and v >= 0):
                raise InvariantViolation(attr, f"must be >= 0 for device {self.name!r}, got {v!r}")

    @property
    def seconds_per_kb(self):
        return self.rho / self.f


class BandwidthMatrix:
    """Directed N x N bandwidths in bytes/s; ``nan`` marks an undefined link."""

    def __init__(self, b):
        b = np.array(b, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise InvariantViolation("bandwidth", f"need a square matrix, got shape {b.shape}")
        defined = ~np.isnan(b)
        if np.any(b[defined] <= 0) or np.any(np.isinf(b)):
            i, j = np.argwhere(defined & ((b <= 0) | np.isinf(b)))[0]
            raise InvariantViolation(f"bandwidth[{i}][{j}]", f"must be a positive finite value, got {b[i, j]}")
        b.setflags(write=False)
        self._b = b

    @classmethod
    def uniform(cls, n, link, mem=MEMORY_BANDWIDTH):
        b = np.full((n, n), float(link))
        np.fill_diagonal(b, mem)
        return cls(b)

    @property
    def n(self):
        return self._b.shape[0]

    @property
    def array(self):
        return self._b

    def __call__(self, i, j):
        v = self._b[i, j]
        if np.isnan(v):
            raise MissingBandwidth(i, j)
        return float(v)

    def __eq__(self, other):
        return isinstance(other, BandwidthMatrix) and np.array_equal(self._b, other._b, equal_nan=True)

    def __repr__(self):
        return f"BandwidthMatrix(n={self.n})"

    def with_links(self, link):
        """Copy with every off-diagonal entry replaced by ``link`` (scalar or matrix)."""
        if np.isscalar(link):
            b = np.full_like(self._b, float(link))
            np.fill_diagonal(b, np.diag(self._b))
        else:
            b = np.array(link, dtype=float)
            if b.shape != self._b.shape:
                raise InvariantViolation("bandwidth", f"override shape {b.shape} != {self._b.shape}")
            b = b.copy()
            np.fill_diagonal(b, np.diag(self._b))
        return BandwidthMatrix(b)

    def subset(self, idx):
        idx = list(idx)
        return BandwidthMatrix(self._b[np.ix_(idx, idx)])


@dataclass(frozen=True)
class Cluster:
    """Devices in neighbour order, their bandwidths and the master index."""

    devices: tuple
    bandwidth: BandwidthMatrix
    master: int = 0

    def __post_init__(self):
        object.__setattr__(self, "devices", tuple(self.devices))
        if not self.devices:
            raise InvariantViolation("devices", "cluster has no devices")
        if self.bandwidth.n != len(self.devices):
            raise InvariantViolation("bandwidth", f"{self.bandwidth.n}x{self.bandwidth.n} matrix for {len(self.devices)} devices")
        if not 0 <= self.master < len(self.devices):
            raise InvariantViolation("master", f"index {self.master} out of range")

    @property
    def n(self):
        return len(self.devices)

    def prefix(self, k):
        """The first ``k`` devices, as used when growing a cluster device by device."""
        if not 1 <= k <= self.n:
            raise InvariantViolation("prefix", f"k={k} outside 1..{self.n}")
        if self.master >= k:
            raise InvariantViolation("prefix", f"master {self.master} not among the first {k} devices")
        return Cluster(self.devices[:k], self.bandwidth.subset(range(k)), self.master)

    def with_bandwidth(self, link):
        return replace(self, bandwidth=self.bandwidth.with_links(link))

    def vector(self, attr):
        return np.array([getattr(d, attr) for d in self.devices], dtype=float)


def derive_intensity(measured_latency, f, input_size):
    """Cycles per KB from one profiled inference: ``latency * f / input_size``."""
    for name, v in (("measured_latency", measured_latency), ("f", f), ("input_size", input_size)):
        if not v > 0:
            raise NonPositiveInput(f"{name} must be > 0, got {v!r}")
    return measured_latency * f / input_size


_DEVICE_FIELDS = {"name", "rho", "f_hz", "m_kb", "p_c_watts", "p_x_watts"}


def _device_from_dict(d, idx):
    if not isinstance(d, dict):
        raise ParseError(f"devices[{idx}] must be an object")
    missing = _DEVICE_FIELDS - set(d)
    if missing:
        raise ParseError(f"devices[{idx}]: missing fields {sorted(missing)}")
    try:
        return DeviceProfile(str(d["name"]), float(d["rho"]), float(d["f_hz"]), float(d["m_kb"]),
                             float(d["p_c_watts"]), float(d["p_x_watts"]))
    except InvariantViolation as exc:
        raise InvariantViolation(f"devices[{idx}].{exc.field}", str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise ParseError(f"devices[{idx}]: {exc}") from None


def parse_cluster(doc):
    """Build a :class:`Cluster` from a decoded cluster document.

    Bandwidth entries are directed; an entry whose reverse direction is not
    listed is mirrored.  ``default_bytes_per_s`` fills every remaining
    off-diagonal pair and ``mem_bandwidth`` overrides the diagonal.
    """
    if not isinstance(doc, dict):
        raise ParseError("cluster document must be an object")
    devices = doc.get("devices")
    if not isinstance(devices, list) or not devices:
        raise ParseError("cluster document needs a non-empty 'devices' list")
    devs = [_device_from_dict(d, i) for i, d in enumerate(devices)]
    n = len(devs)
    mem = float(doc.get("mem_bandwidth", MEMORY_BANDWIDTH))
    if not mem > 0:
        raise InvariantViolation("mem_bandwidth", f"must be > 0, got {mem}")
    b = np.full((n, n), np.nan)
    np.fill_diagonal(b, mem)
    given = set()
    for k, e in enumerate(doc.get("bandwidth", [])):
        try:
            i, j, v = int(e["from"]), int(e["to"]), float(e["bytes_per_s"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bandwidth[{k}]: {exc}") from None
        if not (0 <= i < n and 0 <= j < n):
            raise InvariantViolation(f"bandwidth[{k}]", f"device index out of range ({i}, {j})")
        if not v > 0:
            raise InvariantViolation(f"bandwidth[{k}].bytes_per_s", f"must be > 0, got {v}")
        b[i, j] = v
        given.add((i, j))
    for i, j in list(given):
        if (j, i) not in given and i != j:
            b[j, i] = b[i, j]
    if "default_bytes_per_s" in doc:
        dflt = float(doc["default_bytes_per_s"])
        if not dflt > 0:
            raise InvariantViolation("default_bytes_per_s", f"must be > 0, got {dflt}")
        b[np.isnan(b)] = dflt
    master = int(doc.get("master", 0))
    return Cluster(tuple(devs), BandwidthMatrix(b), master)


def load_cluster(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    return parse_cluster(doc)


def cluster_to_dict(cluster):
    b = cluster.bandwidth.array
    diag = np.diag(b)
    doc = {
        "master": cluster.master,
        "devices": [
            {"name": d.name, "rho": d.rho, "f_hz": d.f, "m_kb": d.m,
             "p_c_watts": d.p_c, "p_x_watts": d.p_x}
            for d in cluster.devices
        ],
        "bandwidth": [
            {"from": i, "to": j, "bytes_per_s": float(b[i, j])}
            for i in range(cluster.n) for j in range(cluster.n)
            if i != j and not np.isnan(b[i, j])
        ],
    }
    if np.all(diag == diag[0]):
        doc["mem_bandwidth"] = float(diag[0])
    else:
        doc["bandwidth"] += [{"from": i, "to": i, "bytes_per_s": float(diag[i])} for i in range(cluster.n)]
    return doc


def dump_cluster(cluster, path):
    Path(path).write_text(json.dumps(cluster_to_dict(cluster), indent=2) + "\n")
