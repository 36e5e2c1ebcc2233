from typing import Any

from sasr.exceptions import ConfigurationError

from .base import SparseEnv
from .mountain_car import MountainCar
from .sparse_chain import SparseChain

ENVIRONMENTS: dict[str, type[SparseEnv]] = {
    MountainCar.name: MountainCar,
    SparseChain.name: SparseChain,
}


def make_env(name: str, seed: int | None = None, **kwargs: Any) -> SparseEnv:
    try:
        env_class = ENVIRONMENTS[name]
    except KeyError:
        raise ConfigurationError(
            f"Unknown environment {name!r}",
            reason=f"choose one of {sorted(ENVIRONMENTS)}",
            key="env",
        ) from None
    return env_class(seed=seed, **kwargs)


__all__ = ["ENVIRONMENTS", "MountainCar", "SparseChain", "SparseEnv", "make_env"]
