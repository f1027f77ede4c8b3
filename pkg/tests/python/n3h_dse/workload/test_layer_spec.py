import pytest
from pydantic import ValidationError

from n3h_dse.workload.layer_spec import GemmShape, LayerSpec, NetworkSpec, im2col_dims, mac_count


def test_im2col_dims():
    padded_conv = LayerSpec(index=1, c_in=3, c_out=16, kernel=3, stride=1, fmap=8, padding=1, n_params=432)
    assert GemmShape(rows=64, depth=27, cols=16) == im2col_dims(padded_conv), "invalid padded 3x3 shape"

    pointwise = LayerSpec(index=1, c_in=64, c_out=64, kernel=1, stride=1, fmap=7, n_params=4096)
    assert GemmShape(rows=49, depth=64, cols=64) == im2col_dims(pointwise, padding=0), "invalid 1x1 shape"

    fully_connected = LayerSpec(index=1, c_in=512, c_out=1000, kernel=1, stride=1, fmap=1, n_params=512000)
    assert GemmShape(rows=1, depth=512, cols=1000) == im2col_dims(fully_connected), "invalid fc shape"

    # padding argument overrides the descriptor padding
    assert 36 == im2col_dims(padded_conv, padding=0).rows, "padding override ignored"


def test_depthwise_im2col_dims():
    depthwise = LayerSpec(index=2, c_in=32, c_out=32, kernel=3, stride=2, fmap=112, padding=1,
                          is_sc_or_dw=True, is_depthwise=True)
    assert 288 == depthwise.n_params, "depthwise n_params should be derived per channel"

    shape = im2col_dims(depthwise)
    assert GemmShape(rows=56 * 56, depth=9, cols=32) == shape, "invalid depthwise shape"
    assert shape.macs == mac_count(depthwise), "depthwise macs differ"


def test_layer_validation():
    with pytest.raises(ValidationError, match="n_params"):
        LayerSpec(index=1, c_in=3, c_out=8, kernel=3, stride=1, fmap=8, n_params=100)

    with pytest.raises(ValidationError, match="c_out must be >= 1"):
        LayerSpec(index=1, c_in=3, c_out=0, kernel=3, stride=1, fmap=8)

    with pytest.raises(ValidationError, match="depthwise layer needs c_in == c_out"):
        LayerSpec(index=1, c_in=3, c_out=8, kernel=3, stride=1, fmap=8, is_sc_or_dw=True, is_depthwise=True)

    with pytest.raises(ValidationError, match="does not fit"):
        LayerSpec(index=1, c_in=3, c_out=8, kernel=7, stride=1, fmap=4)


def test_network_validation(two_layer_network):
    layers = list(two_layer_network.layers)

    with pytest.raises(ValidationError, match="contiguous"):
        NetworkSpec(name="gap", layers=[layers[0], layers[1].copy(update={"index": 3})])

    with pytest.raises(ValidationError, match="producer"):
        NetworkSpec(name="broken-chain",
                    layers=[layers[0],
                            LayerSpec(index=2, c_in=8, c_out=10, kernel=1, stride=1, fmap=1)])

    with pytest.raises(ValidationError, match="at least one layer"):
        NetworkSpec(name="empty", layers=[])

    assert 592 == two_layer_network.total_params(), "invalid total params"
    assert "layer 2 (fc)" == str(two_layer_network.layer(2)), "invalid layer label"


def test_shortcut_layers_do_not_break_the_chain():
    net = NetworkSpec(
        name="residual",
        layers=[
            LayerSpec(index=1, c_in=64, c_out=128, kernel=3, stride=2, fmap=56, padding=1),
            LayerSpec(index=2, c_in=128, c_out=128, kernel=3, stride=1, fmap=28, padding=1),
            LayerSpec(index=3, c_in=64, c_out=128, kernel=1, stride=2, fmap=56, is_sc_or_dw=True),
            LayerSpec(index=4, c_in=128, c_out=128, kernel=3, stride=1, fmap=28, padding=1),
        ]
    )
    assert net.layer(3).is_shortcut(), "layer 3 should be a shortcut"
    assert 28 * 28 == im2col_dims(net.layer(3)).rows, "shortcut must match the main path output size"
