import pytest
from pydantic import ValidationError

from n3h_dse.quantize.scheme import LayerQuant, QuantScheme, uniform_scheme
from n3h_dse.workload.builtin import builtin_network


def test_uniform_scheme():
    net = builtin_network("resnet18")

    scheme = uniform_scheme(net)

    assert len(net) == len(scheme.layers), "scheme must cover every layer"
    assert (8, 8) == (scheme.layer(1).b_a, scheme.layer(1).b_wl), "first layer must be 8/8"
    assert (8, 8) == (scheme.layer(21).b_a, scheme.layer(21).b_wl), "last layer must be 8/8"
    assert all((lq.b_a, lq.b_wl, lq.b_wd) == (4, 4, 4) for lq in scheme.layers[1:-1]), "inner layers must be 4/4"

    mixed = uniform_scheme(net, weight_bits=6, activation_bits=2)
    assert (2, 6) == (mixed.layer(5).b_a, mixed.layer(5).b_wl), "explicit bits ignored"


def test_layer_quant_validation():
    with pytest.raises(ValidationError, match="b_wd is fixed to 4"):
        LayerQuant(index=1, b_a=4, b_wl=4, b_wd=8)

    with pytest.raises(ValidationError, match="b_wl must be between 2 and 8"):
        LayerQuant(index=1, b_a=4, b_wl=1)


def test_check_network():
    net = builtin_network("synthetic-small")

    with pytest.raises(ValueError, match="activation bits must be between 2 and 4"):
        uniform_scheme(net, weight_bits=4, activation_bits=6)

    scheme = uniform_scheme(net)
    broken = QuantScheme(layers=[lq if lq.index != 1 else LayerQuant(index=1, b_a=4, b_wl=4)
                                 for lq in scheme.layers])
    with pytest.raises(ValueError, match="first/last layer"):
        broken.check_network(net)

    with pytest.raises(ValueError, match="scheme covers 3 layers"):
        QuantScheme(layers=scheme.layers[:3]).check_network(net)

    with pytest.raises(ValueError, match="no entry for layer 9"):
        scheme.layer(9)


def test_json_round_trip():
    scheme = uniform_scheme(builtin_network("mobilenetv2"), weight_bits=3)
    assert scheme == QuantScheme.parse_raw(scheme.json()), "scheme changed after json round trip"
