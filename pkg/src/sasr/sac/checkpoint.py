"""
Checkpoint directory layout::

    meta.json        config text, step counters, RNG and environment state, eval rows
    policy.bin ...   one parameter file per network (see ``sasr.nn.save_parameters``)
    optim.npz        Adam moments and the log-temperature
    stores.npz       success and failure stores
    replay.npz       filled part of the replay buffer
    running.npz      in-progress trajectory, visit log and binned reward moments

Loading a checkpoint and running on gives the same outputs as never stopping.
"""

import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from sasr.config import Config, RunConfig, format_config, parse_config_text
from sasr.envs import make_env
from sasr.exceptions import ArtifactError, SasrError
from sasr.nn import AdamState, load_parameters, save_parameters
from sasr.sac.agent import AgentBundle, new_agent
from sasr.sac.trainer import EvalRow, Trainer
from sasr.sasr_types import FloatArray

logger = logging.getLogger("sasr.sac")

CHECKPOINT_FORMAT = "sasr-checkpoint-v1"
NETWORKS = ("policy", "q1", "q2", "q1_target", "q2_target")
OPTIMIZERS = ("policy_optimizer", "critic_optimizer", "temperature_optimizer")


def _write_npz(path: Path, arrays: dict[str, npt.NDArray[np.generic]]) -> None:
    with path.open("wb") as handle:
        np.savez(handle, **arrays)


def _read_npz(path: Path) -> dict[str, npt.NDArray[np.generic]]:
    try:
        with np.load(path) as data:
            return {name: data[name] for name in data.files}
    except (OSError, ValueError) as e:
        raise ArtifactError(f"Cannot read checkpoint file {path}", reason=str(e)) from e


def _prefixed(prefix: str, arrays: dict[str, Any]) -> dict[str, Any]:
    return {f"{prefix}.{name}": value for name, value in arrays.items()}


def _unprefixed(prefix: str, arrays: dict[str, Any]) -> dict[str, Any]:
    start = len(prefix) + 1
    return {name[start:]: value for name, value in arrays.items() if name.startswith(prefix + ".")}


def _optimizer_arrays(bundle: AgentBundle) -> dict[str, FloatArray]:
    arrays: dict[str, FloatArray] = {"log_temperature": bundle.log_temperature}
    for name in OPTIMIZERS:
        state: AdamState = getattr(bundle, name)
        for i, (m, v) in enumerate(zip(state.first_moments, state.second_moments, strict=True)):
            arrays[f"{name}.m{i}"] = m
            arrays[f"{name}.v{i}"] = v
    return arrays


def _restore_optimizers(bundle: AgentBundle, arrays: dict[str, Any], steps: dict[str, int]) -> None:
    bundle.log_temperature[...] = arrays["log_temperature"]
    for name in OPTIMIZERS:
        state: AdamState = getattr(bundle, name)
        for i in range(len(state.first_moments)):
            state.first_moments[i][...] = arrays[f"{name}.m{i}"]
            state.second_moments[i][...] = arrays[f"{name}.v{i}"]
        state.step = int(steps[name])


def save_checkpoint(trainer: Trainer, directory: str | Path) -> Path:
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    bundle = trainer.bundle

    meta = {
        "format": CHECKPOINT_FORMAT,
        "config": format_config(trainer.config),
        "seed": trainer.seed,
        "step": trainer.step,
        "episodes": trainer.episodes,
        "bandwidth": trainer.projector.bandwidth,
        "rngs": {name: rng.bit_generator.state for name, rng in trainer.rngs.items()},
        "env": trainer.env.get_state(),
        "state": [float(v) for v in trainer.state],
        "optimizer_steps": {name: getattr(bundle, name).step for name in OPTIMIZERS},
        "shaping_stats": trainer.shaping_stats.state_dict(),
        "rows": [asdict(row) for row in trainer.rows],
    }
    (target / "meta.json").write_text(json.dumps(meta, indent=2))

    for name in NETWORKS:
        save_parameters(getattr(bundle, name), target / f"{name}.bin")
    _write_npz(target / "optim.npz", _optimizer_arrays(bundle))
    _write_npz(
        target / "stores.npz",
        {
            **_prefixed("success", trainer.stores.success.state_dict()),
            **_prefixed("failure", trainer.stores.failure.state_dict()),
        },
    )
    _write_npz(target / "replay.npz", trainer.replay.state_dict())

    trajectory = trainer.trajectory
    state_width = trainer.env.state_dim
    running: dict[str, npt.NDArray[np.generic]] = {
        "trajectory.states": np.asarray(trajectory.states, dtype=np.float64).reshape(-1, state_width),
        "trajectory.actions": np.asarray(trajectory.actions, dtype=np.float64).reshape(
            -1, trainer.env.action_dim
        ),
        "trajectory.rewards": np.asarray(trajectory.rewards, dtype=np.float64),
        "trajectory.slots": np.asarray(trajectory.slots, dtype=np.int64),
        **_prefixed("bins", trainer.reward_bins.state_dict()),
    }
    if trainer.visits is not None:
        running["visits"] = trainer.visits.rows
    _write_npz(target / "running.npz", running)

    logger.info("Checkpoint written to %s at step %d", target, trainer.step)
    return target


def _read_meta(source: Path) -> dict[str, Any]:
    try:
        meta = json.loads((source / "meta.json").read_text())
    except (OSError, ValueError) as e:
        raise ArtifactError(f"Cannot read checkpoint {source}", reason=str(e)) from e
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise ArtifactError(f"{source} is not a {CHECKPOINT_FORMAT} checkpoint")
    return meta


def _config_from_meta(source: Path, meta: dict[str, Any]) -> RunConfig:
    try:
        return Config(overrides=parse_config_text(meta["config"], str(source)), environ={}).resolve()
    except SasrError as e:
        raise ArtifactError(f"Checkpoint {source} holds an invalid config", reason=str(e)) from e


def _load_networks(bundle: AgentBundle, source: Path) -> None:
    for name in NETWORKS:
        net = getattr(bundle, name)
        try:
            net.load_parameters_from(load_parameters(source / f"{name}.bin").parameters)
        except SasrError as e:
            raise ArtifactError(f"Checkpoint {source} has a bad {name} network", reason=str(e)) from e


def load_agent(directory: str | Path) -> tuple[AgentBundle, RunConfig]:
    """Networks and temperature of a checkpoint, enough for greedy evaluation."""
    source = Path(directory)
    meta = _read_meta(source)
    config = _config_from_meta(source, meta)
    env = make_env(config.env)
    bundle = new_agent(
        env.state_dim,
        env.action_dim,
        config.sac,
        np.random.default_rng(0),
        action_low=env.action_low,
        action_high=env.action_high,
    )
    _load_networks(bundle, source)
    _restore_optimizers(bundle, _read_npz(source / "optim.npz"), meta["optimizer_steps"])
    return bundle, config


def load_checkpoint(directory: str | Path) -> Trainer:
    source = Path(directory)
    meta = _read_meta(source)
    config = _config_from_meta(source, meta)
    trainer = Trainer(config, int(meta["seed"]))

    _load_networks(trainer.bundle, source)
    _restore_optimizers(trainer.bundle, _read_npz(source / "optim.npz"), meta["optimizer_steps"])

    if meta["bandwidth"] != trainer.projector.bandwidth:
        trainer.projector = trainer.projector.with_bandwidth(float(meta["bandwidth"]))
    stores = _read_npz(source / "stores.npz")
    trainer.stores.success.load_state_dict(_unprefixed("success", stores))
    trainer.stores.failure.load_state_dict(_unprefixed("failure", stores))
    trainer.replay.load_state_dict(_read_npz(source / "replay.npz"))

    running = _read_npz(source / "running.npz")
    trainer.trajectory.clear()
    for state, action, reward, slot in zip(
        running["trajectory.states"],
        running["trajectory.actions"],
        running["trajectory.rewards"],
        running["trajectory.slots"],
        strict=True,
    ):
        trainer.trajectory.append(state, action, float(reward), int(slot))
    trainer.reward_bins.load_state_dict(_unprefixed("bins", running))
    if trainer.visits is not None and "visits" in running:
        trainer.visits.load_rows(running["visits"])

    for name, state in meta["rngs"].items():
        trainer.rngs[name].bit_generator.state = state
    trainer.env.set_state(meta["env"])
    trainer.state = np.asarray(meta["state"], dtype=np.float64)
    trainer.step = int(meta["step"])
    trainer.episodes = int(meta["episodes"])
    trainer.shaping_stats.load_state_dict(meta["shaping_stats"])
    trainer.rows = [EvalRow(**row) for row in meta["rows"]]

    logger.info("Resumed %s seed=%d from %s at step %d", config.env, trainer.seed, source, trainer.step)
    return trainer
