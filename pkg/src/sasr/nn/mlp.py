"""
Dense ReLU networks with manual backpropagation.

Inputs are batches of rows. A network has a trunk of ReLU hidden layers and one
or more linear output heads reading the last hidden activation: one head for a
Q-network, two (mean and log-std) for the policy.
"""

import struct
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import numpy.typing as npt

from sasr.exceptions import ArtifactError, DimensionError, TrainingError
from sasr.sasr_types import FloatArray
from sasr.validation import positive_int

PARAMS_MAGIC = b"SASRMLP1"


class Mlp:
    """ReLU trunk with linear heads.

    Parameters are ordered trunk ``W0, b0, W1, b1, ...`` then heads in order.
    Weight matrices have shape ``(d_in, d_out)``.
    """

    def __init__(
        self,
        input_dim: int,
        hidden_dims: Sequence[int],
        head_dims: Sequence[int],
        rng: np.random.Generator | None = None,
    ) -> None:
        self.input_dim = positive_int(input_dim, "input_dim")
        self.hidden_dims = tuple(positive_int(d, "hidden_dim") for d in hidden_dims)
        self.head_dims = tuple(positive_int(d, "head_dim") for d in head_dims)
        if not self.head_dims:
            raise DimensionError("An Mlp needs at least one output head")

        rng = rng if rng is not None else np.random.default_rng(0)
        self.weights: list[FloatArray] = []
        self.biases: list[FloatArray] = []
        for d_in, d_out in self.layer_shapes:
            bound = 1.0 / np.sqrt(d_in)
            self.weights.append(rng.uniform(-bound, bound, (d_in, d_out)))
            self.biases.append(rng.uniform(-bound, bound, d_out))
        self._cache: tuple[list[FloatArray], list[FloatArray]] | None = None

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_dims)

    @property
    def layer_shapes(self) -> list[tuple[int, int]]:
        dims = self.layer_dims
        trunk = list(zip(dims[:-1], dims[1:], strict=True))
        return trunk + [(dims[-1], d) for d in self.head_dims]

    @property
    def parameters(self) -> list[FloatArray]:
        params: list[FloatArray] = []
        for weight, bias in zip(self.weights, self.biases, strict=True):
            params.extend((weight, bias))
        return params

    @property
    def parameter_count(self) -> int:
        return sum((d_in + 1) * d_out for d_in, d_out in self.layer_shapes)

    def copy(self) -> "Mlp":
        clone = Mlp.__new__(Mlp)
        clone.input_dim = self.input_dim
        clone.hidden_dims = self.hidden_dims
        clone.head_dims = self.head_dims
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        clone._cache = None
        return clone

    def load_parameters_from(self, params: Sequence[FloatArray]) -> None:
        """Copy values into this network's parameter arrays in place."""
        own = self.parameters
        if len(params) != len(own):
            raise DimensionError(
                "Parameter list length mismatch", reason=f"{len(params)} != {len(own)}"
            )
        for target, source in zip(own, params, strict=True):
            if target.shape != np.shape(source):
                raise DimensionError(
                    "Parameter shape mismatch", reason=f"{np.shape(source)} != {target.shape}"
                )
            target[...] = source

    def forward(self, x: npt.ArrayLike) -> list[FloatArray]:
        """Head outputs for a batch; caches activations for :meth:`backward`."""
        inputs = np.asarray(x, dtype=np.float64)
        if inputs.ndim == 1:
            inputs = inputs[None, :]
        if inputs.ndim != 2 or inputs.shape[1] != self.input_dim:
            raise DimensionError(
                "Network input has the wrong shape",
                reason=f"expected (*, {self.input_dim}), got {inputs.shape}",
            )

        activations = [inputs]
        pre_activations: list[FloatArray] = []
        hidden = inputs
        n_trunk = len(self.hidden_dims)
        for weight, bias in zip(self.weights[:n_trunk], self.biases[:n_trunk], strict=True):
            z = hidden @ weight + bias
            pre_activations.append(z)
            hidden = np.maximum(z, 0.0)
            activations.append(hidden)

        outputs = [
            hidden @ weight + bias
            for weight, bias in zip(self.weights[n_trunk:], self.biases[n_trunk:], strict=True)
        ]
        self._cache = (activations, pre_activations)
        return outputs

    def backward(
        self, upstream: Sequence[FloatArray | None]
    ) -> tuple[list[FloatArray], FloatArray]:
        """Gradients for every parameter (in :attr:`parameters` order) and for the input.

        ``upstream[k]`` is dLoss/dHead_k summed into the loss as given; ``None``
        means the head does not contribute.
        """
        if self._cache is None:
            raise TrainingError("backward called without a cached forward pass")
        if len(upstream) != len(self.head_dims):
            raise DimensionError(
                "One upstream gradient per head is required",
                reason=f"{len(upstream)} != {len(self.head_dims)}",
            )
        activations, pre_activations = self._cache
        n_trunk = len(self.hidden_dims)
        last = activations[-1]

        weight_grads: list[FloatArray] = [np.zeros_like(w) for w in self.weights]
        bias_grads: list[FloatArray] = [np.zeros_like(b) for b in self.biases]
        d_hidden = np.zeros_like(last)
        for k, grad in enumerate(upstream):
            if grad is None:
                continue
            grad = np.asarray(grad, dtype=np.float64).reshape(last.shape[0], self.head_dims[k])
            index = n_trunk + k
            weight_grads[index] = last.T @ grad
            bias_grads[index] = grad.sum(axis=0)
            d_hidden = d_hidden + grad @ self.weights[index].T

        for layer in reversed(range(n_trunk)):
            d_z = d_hidden * (pre_activations[layer] > 0.0)
            weight_grads[layer] = activations[layer].T @ d_z
            bias_grads[layer] = d_z.sum(axis=0)
            d_hidden = d_z @ self.weights[layer].T

        grads: list[FloatArray] = []
        for weight_grad, bias_grad in zip(weight_grads, bias_grads, strict=True):
            grads.extend((weight_grad, bias_grad))
        return grads, d_hidden

    def __repr__(self) -> str:
        return f"Mlp({self.input_dim} -> {list(self.hidden_dims)} -> heads {list(self.head_dims)})"


_HEADER = struct.Struct("<8sIII")


def save_parameters(net: Mlp, path: str | Path) -> Path:
    """Write ``magic, input, n_hidden, n_heads, dims..., params`` as little-endian values."""
    target = Path(path)
    dims = np.array([*net.hidden_dims, *net.head_dims], dtype="<u4")
    with target.open("wb") as handle:
        handle.write(_HEADER.pack(PARAMS_MAGIC, net.input_dim, len(net.hidden_dims), len(net.head_dims)))
        handle.write(dims.tobytes())
        for param in net.parameters:
            handle.write(param.astype("<f8").tobytes())
    return target


def load_parameters(path: str | Path) -> Mlp:
    source = Path(path)
    try:
        payload = source.read_bytes()
    except OSError as e:
        raise ArtifactError(f"Cannot read parameter file {source}", reason=str(e)) from e
    if len(payload) < _HEADER.size:
        raise ArtifactError(f"Parameter file {source} is truncated")
    magic, input_dim, n_hidden, n_heads = _HEADER.unpack_from(payload)
    if magic != PARAMS_MAGIC:
        raise ArtifactError(f"{source} is not a parameter file")

    offset = _HEADER.size
    dims = np.frombuffer(payload, dtype="<u4", count=n_hidden + n_heads, offset=offset)
    offset += dims.nbytes
    net = Mlp(input_dim, [int(d) for d in dims[:n_hidden]], [int(d) for d in dims[n_hidden:]])
    values = np.frombuffer(payload, dtype="<f8", offset=offset)
    if values.size != net.parameter_count:
        raise ArtifactError(
            f"Parameter file {source} has the wrong size",
            reason=f"expected {net.parameter_count} values, found {values.size}",
        )
    cursor = 0
    for param in net.parameters:
        param[...] = values[cursor : cursor + param.size].reshape(param.shape)
        cursor += param.size
    return net
