"""CNN model descriptors: layer tuples, shape propagation and halo sizes.

A model is an ordered stack of layers, each either a convolution or a
fully-connected layer described by ``(k, c_in, c_out, s, p)``.  Pooling is
expressed as a convolution-kind layer with ``c_out == c_in``.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import InvariantViolation, ParseError, ShapeUnderflow

__all__ = [
    "LayerKind",
    "LayerConfig",
    "ModelDescriptor",
    "conv",
    "fc",
    "output_shape",
    "propagate_shape",
    "final_shape",
    "halo_rows",
    "parse_model",
    "load_model",
    "model_to_dict",
    "dump_model",
]


class LayerKind(str, Enum):
    CONV = "conv"
    FC = "fc"


_KIND_NAMES = {
    "conv": LayerKind.CONV,
    "fc": LayerKind.FC,
    "fullyconnected": LayerKind.FC,
}


@dataclass(frozen=True)
class LayerConfig:
    kind: LayerKind
    k: int
    c_in: int
    c_out: int
    s: int = 1
    p: int = 0

    def __post_init__(self):
        for name in ("k", "c_in", "c_out", "s", "p"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise InvariantViolation(name, f"must be an integer, got {v!r}")
        if self.k < 1 or self.s < 1 or self.c_in < 1 or self.c_out < 1:
            raise InvariantViolation("layer", f"k, s, c_in, c_out must be >= 1 in {self}")
        if self.p < 0:
            raise InvariantViolation("p", "padding must be >= 0")
        if self.kind is LayerKind.FC and (self.k, self.s, self.p) != (1, 1, 0):
            raise InvariantViolation("kind", "fully-connected layers need k=1, s=1, p=0")

    @property
    def is_conv(self):
        return self.kind is LayerKind.CONV


def conv(k, c_in, c_out, s=1, p=0):
    return LayerConfig(LayerKind.CONV, k, c_in, c_out, s, p)


def fc(c_in, c_out):
    return LayerConfig(LayerKind.FC, 1, c_in, c_out, 1, 0)


@dataclass(frozen=True)
class ModelDescriptor:
    """An ordered CNN layer stack applied to an ``(H, W, C)`` input.

    Invariants checked on construction: channel chaining from the input
    through every layer, fully-connected layers forming a contiguous suffix
    after at least one convolution, and shape propagation staying >= 1.
    """

    name: str
    input_shape: tuple
    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(int(v) for v in self.input_shape))
        object.__setattr__(self, "layers", tuple(self.layers))
        if len(self.input_shape) != 3 or min(self.input_shape) < 1:
            raise InvariantViolation("input_shape", f"need positive (h, w, c), got {self.input_shape}")
        if not self.layers:
            raise InvariantViolation("layers", "model has no layers")
        if not self.layers[0].is_conv:
            raise InvariantViolation("layers", "the first layer must be a convolution")
        if self.layers[0].c_in != self.input_shape[2]:
            raise InvariantViolation(
                "layers[0].c_in",
                f"{self.layers[0].c_in} does not match input channels {self.input_shape[2]}",
            )
        seen_fc = False
        for i, (a, b) in enumerate(zip(self.layers, self.layers[1:])):
            if a.c_out != b.c_in:
                raise InvariantViolation(f"layers[{i + 1}].c_in", f"expected {a.c_out}, got {b.c_in}")
        for i, layer in enumerate(self.layers):
            if layer.is_conv and seen_fc:
                raise InvariantViolation(f"layers[{i}]", "convolution after a fully-connected layer")
            seen_fc = seen_fc or not layer.is_conv
        propagate_shape(self)

    @property
    def n_layers(self):
        return len(self.layers)

    @property
    def n_conv(self):
        return sum(1 for layer in self.layers if layer.is_conv)

    @property
    def height(self):
        return self.input_shape[0]


def output_shape(layer, shape):
    """Shape produced by ``layer`` from an ``(H, W, C)`` input."""
    h, w, _ = shape
    if not layer.is_conv:
        return (1, 1, layer.c_out)
    h_out = (h - layer.k + 2 * layer.p) // layer.s + 1
    w_out = (w - layer.k + 2 * layer.p) // layer.s + 1
    if h_out < 1 or w_out < 1:
        raise ShapeUnderflow(f"{layer} maps {shape} to ({h_out}, {w_out})")
    return (h_out, w_out, layer.c_out)


def propagate_shape(model):
    """Input shape consumed by each layer, first entry equal to the model input."""
    shapes = [tuple(model.input_shape)]
    for layer in model.layers[:-1]:
        shapes.append(output_shape(layer, shapes[-1]))
    # the last layer's output must exist too
    output_shape(model.layers[-1], shapes[-1])
    return shapes


def final_shape(model):
    shapes = propagate_shape(model)
    return output_shape(model.layers[-1], shapes[-1])


def halo_rows(layer):
    """Rows of neighbour data a convolution needs across a partition boundary."""
    if not layer.is_conv:
        raise ValueError("halo rows are only defined for convolution layers")
    return layer.k // 2


def _layer_from_dict(d, idx):
    if not isinstance(d, dict):
        raise ParseError(f"layers[{idx}] must be an object")
    unknown = set(d) - {"kind", "k", "c_in", "c_out", "s", "p"}
    if unknown:
        raise ParseError(f"layers[{idx}]: unknown fields {sorted(unknown)}")
    raw_kind = str(d.get("kind", "")).replace("_", "").replace("-", "").lower()
    if raw_kind not in _KIND_NAMES:
        raise ParseError(f"layers[{idx}].kind: unknown layer kind {d.get('kind')!r}")
    kind = _KIND_NAMES[raw_kind]
    try:
        if kind is LayerKind.FC:
            return LayerConfig(kind, int(d.get("k", 1)), int(d["c_in"]), int(d["c_out"]),
                               int(d.get("s", 1)), int(d.get("p", 0)))
        return LayerConfig(kind, int(d["k"]), int(d["c_in"]), int(d["c_out"]),
                           int(d.get("s", 1)), int(d.get("p", 0)))
    except KeyError as exc:
        raise ParseError(f"layers[{idx}]: missing field {exc.args[0]!r}") from None
    except InvariantViolation as exc:
        raise InvariantViolation(f"layers[{idx}].{exc.field}", str(exc)) from None


def parse_model(doc):
    if not isinstance(doc, dict):
        raise ParseError("model document must be an object")
    try:
        name = str(doc["name"])
        shp = doc["input_shape"]
        layers = doc["layers"]
    except KeyError as exc:
        raise ParseError(f"model document missing field {exc.args[0]!r}") from None
    if isinstance(shp, dict):
        try:
            shp = (shp["h"], shp["w"], shp["c"])
        except KeyError as exc:
            raise ParseError(f"input_shape missing {exc.args[0]!r}") from None
    if not isinstance(layers, list):
        raise ParseError("layers must be a list")
    return ModelDescriptor(name, tuple(shp), tuple(_layer_from_dict(d, i) for i, d in enumerate(layers)))


def load_model(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    return parse_model(doc)


def model_to_dict(model):
    h, w, c = model.input_shape
    return {
        "name": model.name,
        "input_shape": {"h": h, "w": w, "c": c},
        "layers": [
            {"kind": layer.kind.value, "k": layer.k, "c_in": layer.c_in,
             "c_out": layer.c_out, "s": layer.s, "p": layer.p}
            for layer in model.layers
        ],
    }


def dump_model(model, path):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")
