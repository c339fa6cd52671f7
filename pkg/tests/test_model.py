import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coedge.errors import InvariantViolation, ParseError, ShapeUnderflow
from coedge.model import (
    LayerKind,
    ModelDescriptor,
    conv,
    dump_model,
    fc,
    final_shape,
    halo_rows,
    load_model,
    model_to_dict,
    output_shape,
    parse_model,
    propagate_shape,
)


def test_same_convolution_keeps_height():
    assert output_shape(conv(3, 1, 1, 1, 1), (12, 12, 1))[0] == 12


def test_strided_valid_convolution():
    assert output_shape(conv(3, 1, 1, 2, 0), (12, 12, 1))[0] == 5


def test_three_layer_toy_shapes():
    m = ModelDescriptor("toy", (12, 12, 3), (conv(3, 3, 8, 1, 1), conv(3, 8, 8, 2, 0), fc(8, 10)))
    assert propagate_shape(m) == [(12, 12, 3), (12, 12, 8), (5, 5, 8)]
    assert final_shape(m) == (1, 1, 10)


@pytest.mark.parametrize("k, rows", [(3, 1), (1, 0), (7, 3)])
def test_halo_rows(k, rows):
    assert halo_rows(conv(k, 1, 1)) == rows


def test_halo_rows_rejects_fc():
    with pytest.raises(ValueError):
        halo_rows(fc(4, 4))


@given(st.sampled_from([1, 3, 5, 7]), st.integers(7, 64), st.integers(7, 64))
def test_same_padding_preserves_shape(k, h, w):
    out = output_shape(conv(k, 2, 3, 1, k // 2), (h, w, 2))
    assert out == (h, w, 3)


@given(st.lists(st.tuples(st.sampled_from([1, 3, 5]), st.integers(1, 2), st.integers(1, 6)),
                min_size=1, max_size=6))
def test_channel_chain_reported(stack):
    c, layers = 2, []
    for k, s, c_out in stack:
        layers.append(conv(k, c, c_out, s, k // 2))
        c = c_out
    m = ModelDescriptor("chain", (64, 64, 2), tuple(layers))
    for shape, layer in zip(propagate_shape(m), m.layers):
        assert shape[2] == layer.c_in


def test_fc_needs_unit_geometry():
    from coedge.model import LayerConfig

    with pytest.raises(InvariantViolation):
        LayerConfig(LayerKind.FC, 3, 4, 4, 1, 0)


@pytest.mark.parametrize("bad", [dict(k=0), dict(s=0), dict(p=-1), dict(c_in=0)])
def test_layer_bounds(bad):
    args = dict(k=3, c_in=1, c_out=1, s=1, p=0)
    args.update(bad)
    with pytest.raises(InvariantViolation):
        conv(**args)


def test_channel_mismatch_rejected():
    with pytest.raises(InvariantViolation, match=r"layers\[1\].c_in"):
        ModelDescriptor("bad", (8, 8, 1), (conv(3, 1, 4), conv(3, 5, 4)))


def test_conv_after_fc_rejected():
    with pytest.raises(InvariantViolation):
        ModelDescriptor("bad", (8, 8, 1), (conv(3, 1, 4), fc(4, 4), conv(1, 4, 4)))


def test_fc_first_rejected():
    with pytest.raises(InvariantViolation):
        ModelDescriptor("bad", (8, 8, 4), (fc(4, 4),))


def test_shape_underflow():
    with pytest.raises(ShapeUnderflow):
        ModelDescriptor("tiny", (2, 2, 1), (conv(5, 1, 1, 1, 0),))


def test_round_trip(tmp_path):
    m = ModelDescriptor("rt", (16, 8, 3), (conv(3, 3, 4, 2, 1), conv(1, 4, 4), fc(4, 7)))
    p = tmp_path / "m.json"
    dump_model(m, p)
    assert load_model(p) == m


def test_parse_accepts_spelled_out_kind():
    doc = {"name": "x", "input_shape": {"h": 4, "w": 4, "c": 1},
           "layers": [{"kind": "conv", "k": 3, "c_in": 1, "c_out": 2, "s": 1, "p": 1},
                      {"kind": "FullyConnected", "c_in": 2, "c_out": 3}]}
    assert parse_model(doc).layers[1].kind is LayerKind.FC


def test_parse_rejects_unknown_kind():
    doc = model_to_dict(ModelDescriptor("x", (4, 4, 1), (conv(3, 1, 1, 1, 1),)))
    doc["layers"][0]["kind"] = "pool"
    with pytest.raises(ParseError, match="kind"):
        parse_model(doc)


def test_load_reports_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ParseError, match="broken.json"):
        load_model(p)


def test_bundled_models_load():
    from coedge import fixtures

    for name in fixtures.MODELS:
        m = fixtures.model(name)
        assert m.input_shape == (160, 128, 1)
        assert json.loads(json.dumps(model_to_dict(m)))["name"] == f"{name}-like"
