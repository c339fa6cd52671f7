"""Bundled model stacks, clusters, scenarios and the bandwidth schedule.

The four model stacks are scaled-down layer sequences shaped after the
classic image networks; the six-device cluster mixes four Raspberry Pis,
a desktop PC and a Jetson board.  ``tools/build_fixtures.py`` regenerates
the documents.
"""

from importlib import resources

from .model import load_model
from .resources import load_cluster

__all__ = ["MODELS", "DEVICE_ORDER", "model", "cluster", "scenario", "schedule", "model_names",
           "cluster_names", "scenario_names", "data_path"]

MODELS = ("alexnet", "vggf", "googlenet", "mobilenet")
DEVICE_ORDER = ("pi-0", "pi-1", "pc", "pi-2", "pi-3", "jetson")


def data_path(kind, name):
    """Path of a bundled ``kind`` document (``models``, ``clusters``, ``scenarios``, ``schedules``)."""
    p = resources.files("coedge") / "data" / kind / f"{name}.json"
    if not p.is_file():
        raise FileNotFoundError(f"no bundled {kind[:-1]} named {name!r}; available: {_names(kind)}")
    return p


def _names(kind):
    return sorted(p.name[:-5] for p in (resources.files("coedge") / "data" / kind).iterdir()
                  if p.name.endswith(".json"))


def model_names():
    return _names("models")


def cluster_names():
    return _names("clusters")


def scenario_names():
    return _names("scenarios")


def model(name):
    return load_model(data_path("models", name))


def cluster(name):
    return load_cluster(data_path("clusters", name))


def scenario(name):
    from .scenario import load_scenario

    return load_scenario(data_path("scenarios", name))


def schedule(name="bandwidth-trace"):
    from .simulator import load_schedule

    return load_schedule(data_path("schedules", name))
