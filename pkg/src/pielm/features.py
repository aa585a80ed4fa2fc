"""Random tanh feature layer with analytic first and second derivatives.

The layer is a single random hidden layer: neuron k with direction
weights w_k (one per input axis) and bias b_k produces

    h_k(p) = tanh(z_k),   z_k = w_k . p + b_k.

Only this layer's outputs (and their exact partial derivatives) are ever
needed; the output weights are fitted elsewhere by least squares.

Reproducibility: weights are drawn from a counter-based splitmix64
stream, so a layer is a pure function of (seed, n_neurons, dim,
init_scale).  The i-th raw draw (i >= 1) is

    mix64(seed + i * 0x9E3779B97F4A7C15)

with the standard splitmix64 finalizer (xor-shift 30/27/31, multipliers
0xBF58476D1CE4E5B9 and 0x94D049BB133111EB), mapped to [0, 1) by taking
the top 53 bits.  Draw order: the weight matrix row-major (neuron-major),
then the biases.
"""

from dataclasses import dataclass

import numpy as np

from ._accel import maybe_njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix64(seed: int, count: int) -> np.ndarray:
    """First `count` outputs of the splitmix64 stream for `seed`, as uint64."""
    idx = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = np.uint64(seed % (1 << 64)) + idx * _GAMMA
        z = (x ^ (x >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def uniform_symmetric(seed: int, count: int, scale: float) -> np.ndarray:
    """`count` deterministic i.i.d. uniform draws on [-scale, scale)."""
    u = (_splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return scale * (2.0 * u - 1.0)


@dataclass(frozen=True)
class FeatureLayer:
    """Immutable random hidden layer.

    weights has shape (n_neurons, dim) with one direction weight per input
    axis; axes are ordered spatial-first, time last.
    """

    n_neurons: int
    dim: int
    weights: np.ndarray
    bias: np.ndarray
    seed: int
    init_scale: float


def init_layer(n_neurons: int, dim: int, seed: int, init_scale: float = 1.0) -> FeatureLayer:
    """Draw a layer with weights and biases uniform on [-init_scale, init_scale).

    init_scale = 0 is allowed and produces the all-zero (constant) layer.
    """
    if n_neurons < 1:
        raise ValueError(f"n_neurons must be >= 1, got {n_neurons}")
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if init_scale < 0:
        raise ValueError(f"init_scale must be >= 0, got {init_scale}")
    draws = uniform_symmetric(seed, n_neurons * (dim + 1), init_scale)
    weights = draws[: n_neurons * dim].reshape(n_neurons, dim).copy()
    bias = draws[n_neurons * dim :].copy()
    return FeatureLayer(n_neurons, dim, weights, bias, seed, init_scale)


@maybe_njit
def _phi0(z):
    return np.tanh(z)


@maybe_njit
def _phi1(z):
    t = np.tanh(z)
    return 1.0 - t * t


@maybe_njit
def _phi2(z):
    t = np.tanh(z)
    return -2.0 * t * (1.0 - t * t)


def _pre_activation(layer: FeatureLayer, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != layer.dim:
        raise ValueError(
            f"points must have shape (N, {layer.dim}), got {points.shape}"
        )
    return points @ layer.weights.T + layer.bias


def eval_features(layer: FeatureLayer, points: np.ndarray) -> np.ndarray:
    """Feature matrix: entry (i, k) = tanh(w_k . p_i + b_k)."""
    return _phi0(_pre_activation(layer, points))


def eval_feature_partial(
    layer: FeatureLayer, points: np.ndarray, axis: int, order: int
) -> np.ndarray:
    """Analytic partial of the feature matrix along one input axis.

    order 1: w_axis * phi'(z),  order 2: w_axis^2 * phi''(z) with
    phi' = 1 - phi^2 and phi'' = -2 phi (1 - phi^2).  Higher orders are
    rejected; no operator in scope needs them.
    """
    if not 0 <= axis < layer.dim:
        raise ValueError(f"axis {axis} out of range for dim {layer.dim}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    z = _pre_activation(layer, points)
    w = layer.weights[:, axis]
    if order == 1:
        return w * _phi1(z)
    return (w * w) * _phi2(z)


def eval_feature_mixed(
    layer: FeatureLayer, points: np.ndarray, axis_a: int, axis_b: int
) -> np.ndarray:
    """Mixed second partial w_a * w_b * phi''(z).  Exposed for testing only;
    no operator in scope assembles mixed terms."""
    for axis in (axis_a, axis_b):
        if not 0 <= axis < layer.dim:
            raise ValueError(f"axis {axis} out of range for dim {layer.dim}")
    z = _pre_activation(layer, points)
    return (layer.weights[:, axis_a] * layer.weights[:, axis_b]) * _phi2(z)
