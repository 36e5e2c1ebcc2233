"""Adam optimiser over lists of parameter arrays."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from sasr.exceptions import DimensionError
from sasr.sasr_types import FloatArray


@dataclass
class AdamState:
    learning_rate: float
    first_moments: list[FloatArray] = field(default_factory=list)
    second_moments: list[FloatArray] = field(default_factory=list)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_parameters(cls, params: Sequence[FloatArray], learning_rate: float) -> "AdamState":
        return cls(
            learning_rate=learning_rate,
            first_moments=[np.zeros_like(p) for p in params],
            second_moments=[np.zeros_like(p) for p in params],
        )


def adam_step(
    params: Sequence[FloatArray], grads: Sequence[FloatArray], state: AdamState
) -> AdamState:
    """Bias-corrected Adam update, applied to ``params`` in place."""
    if not (len(params) == len(grads) == len(state.first_moments)):
        raise DimensionError(
            "Adam needs one gradient and one moment pair per parameter",
            reason=f"params={len(params)} grads={len(grads)} moments={len(state.first_moments)}",
        )
    for index, (param, grad, m, v) in enumerate(
        zip(params, grads, state.first_moments, state.second_moments, strict=True)
    ):
        if not param.shape == np.shape(grad) == m.shape == v.shape:
            raise DimensionError(
                "Gradient shape does not match its parameter",
                reason=f"parameter {index}: {np.shape(grad)} != {param.shape}",
            )

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for param, grad, m, v in zip(
        params, grads, state.first_moments, state.second_moments, strict=True
    ):
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(grad)
        param -= state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)
    return state
