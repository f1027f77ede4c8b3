import numpy as np
import pytest

from n3h_dse.dse.accuracy_oracle import MlpAccuracyOracle, ProxyAccuracyOracle, make_oracle
from n3h_dse.quantize.hybrid import hybrid_quantize_layer
from n3h_dse.quantize.kl_alloc import kl_filter_alloc
from n3h_dse.quantize.scheme import uniform_scheme
from n3h_dse.workload.builtin import builtin_network


def test_proxy_baselines(synthetic_small):
    oracle = ProxyAccuracyOracle()
    assert 69.76 == oracle.baseline(builtin_network("resnet18")), "invalid resnet18 baseline"
    assert 71.88 == oracle.baseline(builtin_network("mobilenetv2")), "invalid mobilenetv2 baseline"
    assert 90.0 == oracle.baseline(synthetic_small), "invalid synthetic-small baseline"


def test_proxy_is_monotone_in_bits():
    net = builtin_network("resnet18")
    oracle = ProxyAccuracyOracle(seed=1)

    estimates = [oracle.estimate(net, uniform_scheme(net, weight_bits=bits, activation_bits=min(bits, 4)))
                 for bits in range(2, 9)]
    assert all(a <= b for a, b in zip(estimates, estimates[1:])), f"accuracy must grow with bits: {estimates}"
    assert 0.0 <= estimates[0] and estimates[-1] <= oracle.baseline(net), "accuracy outside [0, baseline]"
    assert estimates[-1] > 60.0, "8-bit weights with 4-bit activations should stay close to the baseline"


def test_proxy_split_ratio(synthetic_small):
    oracle = ProxyAccuracyOracle()
    scheme = uniform_scheme(synthetic_small, weight_bits=8, activation_bits=4)

    all_lut = oracle.estimate(synthetic_small, scheme, [1.0, 1.0, 1.0, 1.0])
    half = oracle.estimate(synthetic_small, scheme, [1.0, 0.5, 0.5, 1.0])
    mostly_dsp = oracle.estimate(synthetic_small, scheme, [1.0, 0.0, 0.0, 1.0])
    assert all_lut > mostly_dsp, "8-bit LUT filters should beat 4-bit DSP filters"
    assert all_lut > half > mostly_dsp, "every filter moved to the DSP-core should cost accuracy"
    assert all_lut == oracle.estimate(synthetic_small, scheme), "without ratios every filter runs at B_wL"

    assert all_lut == ProxyAccuracyOracle().estimate(synthetic_small, scheme), "oracle must be deterministic"

    with pytest.raises(ValueError, match="2 ratios given"):
        oracle.estimate(synthetic_small, scheme, [1.0, 1.0])


def test_mlp_oracle(synthetic_small):
    oracle = MlpAccuracyOracle(seed=2)
    baseline = oracle.baseline(synthetic_small)
    assert baseline > 80.0, "the synthetic task should be learnable"

    high = oracle.estimate(synthetic_small, uniform_scheme(synthetic_small, weight_bits=8, activation_bits=4))
    low = oracle.estimate(synthetic_small, uniform_scheme(synthetic_small, weight_bits=2))
    assert 0.0 <= low <= 100.0 and 0.0 <= high <= 100.0, "accuracy must be a percentage"
    assert high > baseline - 10.0, "8-bit weights should stay close to full precision"

    again = MlpAccuracyOracle(seed=2)
    assert high == again.estimate(synthetic_small, uniform_scheme(synthetic_small, weight_bits=8, activation_bits=4)), \
        "oracle must be deterministic"


def test_unknown_oracle():
    assert isinstance(make_oracle("proxy"), ProxyAccuracyOracle), "proxy oracle expected"
    with pytest.raises(ValueError, match="unknown accuracy oracle 'imagenet'"):
        make_oracle("imagenet")


def test_proxy_weight_error_follows_hybrid_quantization(synthetic_small):
    oracle = ProxyAccuracyOracle(seed=3)
    layer = synthetic_small.layers[1]
    weights = oracle.layer_weights(layer)
    assert (16, 72) == weights.shape, "one row of synthetic weights per filter expected"
    assert np.array_equal(weights, ProxyAccuracyOracle(seed=3).layer_weights(layer)), "weights must be seeded"
    assert not np.array_equal(weights, ProxyAccuracyOracle(seed=4).layer_weights(layer)), "seed ignored"

    assignment = kl_filter_alloc(weights, ratio=0.5, b_wl=6, b_wd=4, layer_index=layer.index)
    quantized = hybrid_quantize_layer(weights, assignment, uniform_scheme(synthetic_small, weight_bits=6))
    expected = np.mean((quantized.dequantize() - weights) ** 2) / np.var(weights)

    assert expected == pytest.approx(oracle.weight_error(layer, b_wl=6, ratio=0.5)), \
        "weight error should come from the KL allocated hybrid quantization"
    assert oracle.weight_error(layer, b_wl=6, ratio=0.5) == oracle.weight_error(layer, b_wl=6, ratio=0.52), \
        "ratios giving the same LUT filters should give the same error"
    assert oracle.weight_error(layer, b_wl=6, ratio=1.0) < oracle.weight_error(layer, b_wl=6, ratio=0.0), \
        "6-bit LUT filters should beat 4-bit DSP filters"


def test_mlp_oracle_split_ratio(synthetic_small):
    oracle = MlpAccuracyOracle(seed=2)
    scheme = uniform_scheme(synthetic_small, weight_bits=8, activation_bits=4)

    all_lut = oracle.estimate(synthetic_small, scheme)
    assert all_lut == oracle.estimate(synthetic_small, scheme, [1.0, 1.0, 1.0, 1.0]), \
        "without ratios every filter runs at B_wL"

    split = oracle.estimate(synthetic_small, scheme, [1.0, 0.5, 0.5, 1.0])
    assert 0.0 <= split <= 100.0, "accuracy must be a percentage"
    assert split == MlpAccuracyOracle(seed=2).estimate(synthetic_small, scheme, [1.0, 0.5, 0.5, 1.0]), \
        "split estimate must be deterministic"
