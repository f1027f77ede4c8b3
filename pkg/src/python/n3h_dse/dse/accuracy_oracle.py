"""
Accuracy estimates of quantized networks.

Neither oracle retrains anything.  `ProxyAccuracyOracle` charges every layer the error of its
hybrid quantization on seeded synthetic weights, `MlpAccuracyOracle` quantizes a small torch
perceptron trained on a seeded synthetic classification task and runs its output layer on the
emulated cores.  Both split filters with the KL allocation, are deterministic for fixed inputs
and seed, and neither claims fidelity to ImageNet numbers.
"""
import abc
import functools
import logging
from typing import Final, Optional

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.cores.hetero import hetero_gemm
from n3h_dse.quantize.hybrid import HybridQuantizedLayer, hybrid_quantize_layer
from n3h_dse.quantize.kl_alloc import allocate_by_divergence, filter_kl_divergences, kl_filter_alloc, lut_filter_count
from n3h_dse.quantize.scheme import DSP_WEIGHT_BITS, LayerQuant, QuantScheme
from n3h_dse.quantize.uniform import MAX_BITS, MIN_BITS, covering_params, fake_quantize, quantize_array
from n3h_dse.workload.layer_spec import LayerSpec, NetworkSpec

logger = logging.getLogger(__name__)

# fp32 top-1 accuracy of the built-in networks
BASELINE_ACCURACY: Final = {
    "resnet18": 69.76,
    "mobilenetv2": 71.88,
    "synthetic-small": 90.0,
}
DEFAULT_BASELINE_ACCURACY: Final = 70.0

PROXY_SAMPLES: Final = 4096
PROXY_SENSITIVITY: Final = 50.0
# synthetic weights per filter, larger layers are subsampled
PROXY_FILTER_DEPTH: Final = 128
# spread of the per-filter weight scales (log-normal sigma)
PROXY_SCALE_SIGMA: Final = 0.25

MLP_LUT_GEOMETRY: Final = LutCoreGeometry(m=8, n=8, k=64)
MLP_DSP_GEOMETRY: Final = DspCoreGeometry(n_reg_row_a=8)


def baseline_accuracy(net: NetworkSpec) -> float:
    return BASELINE_ACCURACY.get(net.name, DEFAULT_BASELINE_ACCURACY)


def _check_ratios(net: NetworkSpec,
                  ratios: Optional[list[float]]) -> list[float]:
    if ratios is None:
        return [1.0] * len(net.layers)
    if len(ratios) != len(net.layers):
        raise ValueError(f"{len(ratios)} ratios given but {net.name} has {len(net.layers)} layers")
    return list(ratios)


def _hybrid_quantize(weights: np.ndarray,
                     ratio: float,
                     b_wl: int,
                     b_a: int) -> tuple[HybridQuantizedLayer, QuantScheme]:
    """KL-allocates the filters of one layer's `weights` at `ratio` and quantizes them for both cores."""
    scheme = QuantScheme(layers=[LayerQuant(index=1, b_a=b_a, b_wl=b_wl)])
    assignment = kl_filter_alloc(weights, ratio, b_wl, DSP_WEIGHT_BITS)
    return hybrid_quantize_layer(weights, assignment, scheme), scheme


def _normalized_mse(original: np.ndarray,
                    quantized: np.ndarray) -> float:
    variance = float(np.var(original))
    if variance == 0.0:
        return 0.0
    return float(np.mean((quantized - original) ** 2) / variance)


class AccuracyOracle(abc.ABC):

    @abc.abstractmethod
    def baseline(self,
                 net: NetworkSpec) -> float:
        """Accuracy in percent of `net` at full precision."""

    @abc.abstractmethod
    def estimate(self,
                 net: NetworkSpec,
                 scheme: QuantScheme,
                 ratios: Optional[list[float]] = None) -> float:
        """
        Returns
        -------
        float
            accuracy in percent of `net` quantized by `scheme`, ratios[i - 1] of the filters of layer i
            at B_wL bits and the rest at the DSP-core's 4 bits (all filters at B_wL without ratios)
        """


@functools.lru_cache(maxsize=None)
def _activation_errors(seed: int,
                       samples: int) -> dict[int, float]:
    """Quantization mean squared error over variance of unsigned activations per bit-width."""
    activations = np.abs(np.random.default_rng(seed).standard_normal(samples))
    return {bits: _normalized_mse(activations, fake_quantize(activations, bits, signed=False))
            for bits in range(MIN_BITS, MAX_BITS + 1)}


@functools.lru_cache(maxsize=256)
def _synthetic_weights(seed: int,
                       layer_index: int,
                       c_out: int,
                       depth: int) -> np.ndarray:
    rng = np.random.default_rng([seed, layer_index])
    scales = rng.lognormal(0.0, PROXY_SCALE_SIGMA, size=(c_out, 1))
    weights = rng.standard_normal((c_out, depth)) * scales
    weights.flags.writeable = False
    return weights


class ProxyAccuracyOracle(AccuracyOracle):
    """
    acc_q = acc_b - sensitivity * sum_i share_i * (e_w,i + e_a,i), share_i = n_params_i / total params.

    e_w,i is the normalized error of layer i's seeded synthetic weights after KL filter allocation at
    the layer's ratio and hybrid quantization, e_a,i the normalized error of unsigned activations at B_a.
    """

    def __init__(self,
                 seed: int = 0,
                 sensitivity: float = PROXY_SENSITIVITY,
                 samples: int = PROXY_SAMPLES,
                 baselines: Optional[dict[str, float]] = None):
        self.seed = seed
        self.sensitivity = sensitivity
        self.samples = samples
        self.baselines = BASELINE_ACCURACY if baselines is None else baselines
        # (layer index, c_out, depth, KL bits) -> per-filter divergences
        self._divergences: dict[tuple[int, int, int, int], np.ndarray] = {}
        # (layer index, c_out, depth, B_wL, LUT filters) -> e_w
        self._weight_errors: dict[tuple[int, int, int, int, int], float] = {}

    def baseline(self,
                 net: NetworkSpec) -> float:
        return self.baselines.get(net.name, DEFAULT_BASELINE_ACCURACY)

    def layer_weights(self,
                      layer: LayerSpec) -> np.ndarray:
        """Seeded (c_out, depth) stand-in for the weights of `layer`, filters with log-normal scales."""
        depth = max(min(layer.n_params // layer.c_out, PROXY_FILTER_DEPTH), 1)
        return _synthetic_weights(self.seed, layer.index, layer.c_out, depth)

    def weight_error(self,
                     layer: LayerSpec,
                     b_wl: int,
                     ratio: float) -> float:
        weights = self.layer_weights(layer)
        key = (layer.index, layer.c_out, weights.shape[1], b_wl, lut_filter_count(ratio, layer.c_out))
        error = self._weight_errors.get(key)
        if error is None:
            # same allocation as kl_filter_alloc, the divergences only depend on the lower bit-width
            kl_bits = min(b_wl, DSP_WEIGHT_BITS)
            kl_key = (layer.index, layer.c_out, weights.shape[1], kl_bits)
            if kl_key not in self._divergences:
                self._divergences[kl_key] = filter_kl_divergences(weights, kl_bits)
            assignment = allocate_by_divergence(self._divergences[kl_key], ratio, b_wl, DSP_WEIGHT_BITS, layer.index)
            # the activation bits do not touch the weight quantizer
            scheme = QuantScheme(layers=[LayerQuant(index=i, b_a=MAX_BITS, b_wl=b_wl)
                                         for i in range(1, layer.index + 1)])
            error = _normalized_mse(weights, hybrid_quantize_layer(weights, assignment, scheme).dequantize())
            self._weight_errors[key] = error
        return error

    def estimate(self,
                 net: NetworkSpec,
                 scheme: QuantScheme,
                 ratios: Optional[list[float]] = None) -> float:
        scheme.check_network(net)
        ratios = _check_ratios(net, ratios)
        activation_errors = _activation_errors(self.seed, self.samples)

        total_params = net.total_params()
        penalty = 0.0
        for layer, ratio in zip(net.layers, ratios):
            layer_quant = scheme.layer(layer.index)
            weight_error = self.weight_error(layer, layer_quant.b_wl, ratio)
            penalty += layer.n_params / total_params * (weight_error + activation_errors[layer_quant.b_a])

        acc_q = max(self.baseline(net) - self.sensitivity * penalty, 0.0)
        logger.debug(f"estimate: {net.name} penalty {penalty:.6f}, accuracy {acc_q:.4f}")
        return acc_q


def _percent_correct(predictions: np.ndarray,
                     labels: np.ndarray) -> float:
    return float(np.mean(predictions == labels) * 100.0)


class _SyntheticTask:
    """Gaussian blobs classified by a perceptron with one hidden layer, trained by full-batch gradient descent."""

    def __init__(self,
                 seed: int,
                 classes: int = 8,
                 features: int = 16,
                 hidden: int = 32,
                 samples_per_class: int = 100,
                 epochs: int = 300,
                 lr: float = 0.5):
        rng = np.random.default_rng(seed)
        centers = rng.standard_normal((classes, features)) * 1.5
        labels = np.repeat(np.arange(classes, dtype=np.int64), samples_per_class)
        inputs = centers[labels] + rng.standard_normal((len(labels), features))
        order = rng.permutation(len(labels))
        inputs, labels = inputs[order], labels[order]
        split = len(labels) // 2
        self.train_x, self.train_y = inputs[:split], labels[:split]
        self.test_x, self.test_y = inputs[split:], labels[split:]

        self.model = nn.Sequential(nn.Linear(features, hidden, bias=False, dtype=torch.float64),
                                   nn.ReLU(),
                                   nn.Linear(hidden, classes, bias=False, dtype=torch.float64))
        with torch.no_grad():
            self.model[0].weight.copy_(torch.from_numpy(rng.standard_normal((hidden, features)) / np.sqrt(features)))
            self.model[2].weight.copy_(torch.from_numpy(rng.standard_normal((classes, hidden)) / np.sqrt(hidden)))

        train_x = torch.from_numpy(self.train_x)
        train_y = torch.from_numpy(self.train_y)
        optimizer = torch.optim.SGD(self.model.parameters(), lr=lr)
        for _ in range(epochs):
            optimizer.zero_grad()
            loss = F.cross_entropy(self.model(train_x), train_y)
            loss.backward()
            optimizer.step()

        logger.debug(f"_SyntheticTask: seed {seed}, training loss {float(loss):.4f} after {epochs} epochs")

    def weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Hidden and output layer weights, (out, in) each so filters run along the first axis."""
        return (self.model[0].weight.detach().numpy().copy(),
                self.model[2].weight.detach().numpy().copy())

    @torch.no_grad()
    def float_accuracy(self) -> float:
        predictions = self.model(torch.from_numpy(self.test_x)).argmax(dim=1).numpy()
        return _percent_correct(predictions, self.test_y)

    @torch.no_grad()
    def hidden_activations(self,
                           w1: np.ndarray) -> np.ndarray:
        return F.relu(F.linear(torch.from_numpy(self.test_x), torch.from_numpy(w1))).numpy()


class MlpAccuracyOracle(AccuracyOracle):
    """
    Maps the network onto a trained two-layer perceptron: the first half of the layers sets the
    hidden layer's bits, the second half the output layer's, each half by its lowest bit-widths and
    mean split ratio.  The output layer runs on the emulated LUT- and DSP-cores, so its activation
    bits must fit the DSP-core whenever it gets filters.
    """

    def __init__(self,
                 seed: int = 0):
        self.seed = seed
        self.task = _SyntheticTask(seed)
        self.float_accuracy = self.task.float_accuracy()

    def baseline(self,
                 net: NetworkSpec) -> float:
        return self.float_accuracy

    def estimate(self,
                 net: NetworkSpec,
                 scheme: QuantScheme,
                 ratios: Optional[list[float]] = None) -> float:
        scheme.check_network(net)
        ratios = _check_ratios(net, ratios)

        half = max(len(net.layers) // 2, 1)
        groups = [range(0, half), range(half, len(net.layers))] if len(net.layers) > 1 else [range(0, 1)] * 2
        group_bits = [min(scheme.layers[i].b_wl for i in group) for group in groups]
        group_ratios = [float(np.mean([ratios[i] for i in group])) for group in groups]
        activation_bits = min(scheme.layers[i].b_a for group in groups for i in group)

        w1, w2 = self.task.weights()
        hidden, _ = _hybrid_quantize(w1, group_ratios[0], group_bits[0], activation_bits)
        output, output_scheme = _hybrid_quantize(w2, group_ratios[1], group_bits[1], activation_bits)

        h = self.task.hidden_activations(hidden.dequantize())
        h_params = covering_params(h, activation_bits, signed=False)
        accumulators = hetero_gemm(quantize_array(h, h_params), output.gemm_weights(), output.assignment,
                                   output_scheme, MLP_LUT_GEOMETRY, MLP_DSP_GEOMETRY, concurrent=False)
        logits = accumulators * h_params.step * output.filter_steps()

        acc_q = _percent_correct(np.argmax(logits, axis=1), self.task.test_y)
        logger.debug(f"estimate: {net.name} on the synthetic task, accuracy {acc_q:.2f}")
        return acc_q


def make_oracle(name: str,
                seed: int = 0) -> AccuracyOracle:
    if name == "proxy":
        return ProxyAccuracyOracle(seed=seed)
    if name == "mlp":
        return MlpAccuracyOracle(seed=seed)
    raise ValueError(f"unknown accuracy oracle '{name}', choose one of proxy, mlp")
