"""Scenario: one inference query on a model over a cluster, with its deadline."""

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import InvariantViolation, ParseError
from .model import load_model
from .resources import load_cluster

__all__ = ["DEFAULT_RESULT_BYTES", "Scenario", "load_scenario"]

DEFAULT_RESULT_BYTES = 4096.0


@dataclass(frozen=True)
class Scenario:
    """Everything a planner needs besides the plan itself.

    ``deadline`` is in seconds.  ``result_device`` defaults to the master and
    ``result_bytes`` to 4 KB, roughly a class-probability vector.
    """

    model: object
    cluster: object
    deadline: float
    elem_bytes: int = 4
    result_device: int = None
    result_bytes: float = None

    def __post_init__(self):
        if not self.deadline > 0:
            raise InvariantViolation("deadline", f"must be > 0, got {self.deadline}")
        if not (isinstance(self.elem_bytes, int) and self.elem_bytes >= 1):
            raise InvariantViolation("elem_bytes", f"must be a positive integer, got {self.elem_bytes!r}")
        if self.result_device is None:
            object.__setattr__(self, "result_device", self.cluster.master)
        if not 0 <= self.result_device < self.cluster.n:
            raise InvariantViolation("result_device", f"index {self.result_device} out of range")
        if self.result_bytes is None:
            object.__setattr__(self, "result_bytes", DEFAULT_RESULT_BYTES)
        if self.result_bytes < 0:
            raise InvariantViolation("result_bytes", "must be >= 0")

    @property
    def n(self):
        return self.cluster.n

    @property
    def height(self):
        return self.model.input_shape[0]

    def with_deadline(self, deadline):
        return replace(self, deadline=deadline)

    def with_cluster(self, cluster):
        rd = self.result_device if self.result_device < cluster.n else cluster.master
        return replace(self, cluster=cluster, result_device=rd)

    def with_bandwidth(self, link):
        return replace(self, cluster=self.cluster.with_bandwidth(link))


def load_scenario(path, model=None, cluster=None):
    """Read a scenario document ``{model, cluster, deadline_ms, ...}``.

    ``model`` and ``cluster`` entries are paths relative to the document or
    names of bundled fixtures; explicit arguments override them.
    """
    from . import fixtures

    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be an object")

    def resolve(ref, loader, builtin):
        p = path.parent / str(ref)
        if p.exists():
            return loader(p)
        return builtin(str(ref))

    if model is None:
        if "model" not in doc:
            raise ParseError("scenario document missing field 'model'")
        model = resolve(doc["model"], load_model, fixtures.model)
    if cluster is None:
        if "cluster" not in doc:
            raise ParseError("scenario document missing field 'cluster'")
        cluster = resolve(doc["cluster"], load_cluster, fixtures.cluster)
    if "deadline_ms" not in doc:
        raise ParseError("scenario document missing field 'deadline_ms'")
    return Scenario(
        model,
        cluster,
        float(doc["deadline_ms"]) / 1e3,
        elem_bytes=int(doc.get("elem_bytes", 4)),
        result_device=doc.get("result_device"),
        result_bytes=doc.get("result_bytes"),
    )
