"""
Success and failure state stores with RFF-accelerated count estimation.

Each store keeps the projected features of the states it retained plus their
running sum. Because the kernel density estimate is linear in the store, the
count for a query is ``(N_X / |D_X|) * z(s) . sum_j z(s_j)``, which costs
O(M) per query regardless of the store size.
"""

import logging
import struct
from collections.abc import Iterator
from pathlib import Path

import numpy as np
import numpy.typing as npt

from sasr.exceptions import ArtifactError, DimensionError, ValidationError
from sasr.rff import RffProjector, project
from sasr.sasr_types import CountEstimate, FloatArray, Outcome
from sasr.validation import finite_matrix, positive_int

logger = logging.getLogger("sasr.density")

SNAPSHOT_MAGIC = b"SASRSTOR"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<8sIBIdQQ")
_LABEL_CODES = {Outcome.SUCCESS: 0, Outcome.FAILURE: 1}


class LabeledStateStore:
    """Retained, projected states for one outcome label."""

    def __init__(
        self,
        label: Outcome | str,
        feature_dim: int,
        retention_rate: float,
        *,
        keep_raw: bool = False,
    ) -> None:
        if not 0.0 < retention_rate <= 1.0:
            raise ValidationError(
                "retention_rate must lie in (0, 1]", reason=f"got {retention_rate!r}"
            )
        self.label = Outcome(label)
        self.feature_dim = positive_int(feature_dim, "feature_dim")
        self.retention_rate = float(retention_rate)
        self.keep_raw = keep_raw

        self.feature_sum: FloatArray = np.zeros(self.feature_dim)
        self.observed_count = 0
        self._features: FloatArray = np.empty((0, self.feature_dim))
        self._raw: FloatArray | None = None
        self._size = 0

    @property
    def retained_count(self) -> int:
        return self._size

    @property
    def retained_features(self) -> FloatArray:
        view = self._features[: self._size]
        view.setflags(write=False)
        return view

    @property
    def retained_states(self) -> FloatArray:
        """Raw retained states; only kept when the store was built with ``keep_raw``."""
        if self._raw is None:
            if self.keep_raw:
                return np.empty((0, 0))
            raise ValidationError(f"{self.label.value} store does not keep raw states")
        return self._raw[: self._size]

    @property
    def nbytes(self) -> int:
        used = self._size * self.feature_dim * 8 + self.feature_sum.nbytes
        if self._raw is not None:
            used += self._size * self._raw.shape[1] * 8
        return used

    def _grow(self, extra: int, state_dim: int) -> None:
        needed = self._size + extra
        capacity = self._features.shape[0]
        if needed <= capacity:
            return
        new_capacity = max(needed, 2 * capacity, 64)
        features = np.empty((new_capacity, self.feature_dim))
        features[: self._size] = self._features[: self._size]
        self._features = features
        if self.keep_raw:
            raw = np.empty((new_capacity, state_dim))
            if self._raw is not None:
                raw[: self._size] = self._raw[: self._size]
            self._raw = raw

    def append(self, states: FloatArray, features: FloatArray) -> None:
        """Append already-retained states and their features."""
        count = features.shape[0]
        if count == 0:
            return
        self._grow(count, states.shape[1])
        self._features[self._size : self._size + count] = features
        if self._raw is not None:
            self._raw[self._size : self._size + count] = states
        self._size += count
        self.feature_sum += features.sum(axis=0)

    def reproject(self, projector: RffProjector) -> None:
        """Rebuild features and their sum from the retained raw states."""
        if not self.keep_raw:
            raise ValidationError(
                f"Cannot reproject the {self.label.value} store",
                reason="raw states were not kept",
            )
        _check_projector(self, projector)
        if self._size == 0:
            return
        features = project(projector, self.retained_states)
        self._features[: self._size] = features
        self.feature_sum = features.sum(axis=0)
        logger.debug("Reprojected %s store with h=%s", self.label.value, projector.bandwidth)

    def state_dict(self) -> dict[str, npt.NDArray[np.generic]]:
        arrays: dict[str, npt.NDArray[np.generic]] = {
            "features": self._features[: self._size].copy(),
            "feature_sum": self.feature_sum.copy(),
            "counts": np.array([self.observed_count, self._size], dtype=np.int64),
        }
        if self._raw is not None:
            arrays["raw"] = self._raw[: self._size].copy()
        return arrays

    def load_state_dict(self, arrays: dict[str, npt.NDArray[np.generic]]) -> None:
        features = np.asarray(arrays["features"], dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.feature_dim:
            raise ArtifactError(f"Stored {self.label.value} features have the wrong shape")
        self._features = features.copy()
        self._size = features.shape[0]
        self.feature_sum = np.asarray(arrays["feature_sum"], dtype=np.float64).copy()
        self.observed_count = int(arrays["counts"][0])
        if "raw" in arrays:
            self._raw = np.asarray(arrays["raw"], dtype=np.float64).copy()
            self.keep_raw = True
        elif self.keep_raw and self._size:
            raise ArtifactError(f"Stored {self.label.value} data lacks the raw states")
        else:
            self._raw = None

    def __repr__(self) -> str:
        return (
            f"<LabeledStateStore {self.label.value} retained={self._size} "
            f"observed={self.observed_count} phi={self.retention_rate}>"
        )


def _check_projector(store: LabeledStateStore, projector: RffProjector) -> None:
    if projector.feature_dim != store.feature_dim:
        raise DimensionError(
            f"Projector does not match the {store.label.value} store",
            reason=f"store M={store.feature_dim}, projector M={projector.feature_dim}",
        )


def record_states(
    store: LabeledStateStore,
    states: npt.ArrayLike,
    projector: RffProjector,
    rng: np.random.Generator,
) -> LabeledStateStore:
    """Offer states to the store; each one is kept independently with probability phi."""
    if np.size(states) == 0:
        return store
    _check_projector(store, projector)
    rows = finite_matrix(states, "states", width=projector.state_dim)

    keep = rng.random(rows.shape[0]) < store.retention_rate
    store.observed_count += rows.shape[0]
    kept = rows[keep]
    if kept.shape[0]:
        store.append(kept, project(projector, kept))

    logger.debug(
        "%s store: offered=%d kept=%d retained=%d",
        store.label.value,
        rows.shape[0],
        kept.shape[0],
        store.retained_count,
    )
    return store


def _query_rows(store: LabeledStateStore, features: npt.ArrayLike) -> tuple[FloatArray, bool]:
    single = np.ndim(features) == 1
    return finite_matrix(features, "feature", width=store.feature_dim), single


def estimate_count(store: LabeledStateStore, features: npt.ArrayLike) -> FloatArray | float:
    """Smoothed count of the query feature(s) via the cached feature sum; 0 for an empty store."""
    rows, single = _query_rows(store, features)
    if store.retained_count == 0:
        counts = np.zeros(rows.shape[0])
    else:
        scale = store.observed_count / store.retained_count
        counts = np.maximum(scale * (rows @ store.feature_sum), 0.0)
    return float(counts[0]) if single else counts


def estimate_count_per_pair(
    store: LabeledStateStore, features: npt.ArrayLike
) -> FloatArray | float:
    """Same estimate through every (query, retained state) inner product: O(M * D * B)."""
    rows, single = _query_rows(store, features)
    if store.retained_count == 0:
        counts = np.zeros(rows.shape[0])
    else:
        scale = store.observed_count / store.retained_count
        pairwise = rows @ store.retained_features.T
        counts = np.maximum(scale * pairwise.sum(axis=1), 0.0)
    return float(counts[0]) if single else counts


def save_snapshot(store: LabeledStateStore, path: str | Path) -> Path:
    """Write the store as header + feature sum + features (little-endian float64)."""
    target = Path(path)
    header = _HEADER.pack(
        SNAPSHOT_MAGIC,
        SNAPSHOT_VERSION,
        _LABEL_CODES[store.label],
        store.feature_dim,
        store.retention_rate,
        store.retained_count,
        store.observed_count,
    )
    with target.open("wb") as handle:
        handle.write(header)
        handle.write(store.feature_sum.astype("<f8").tobytes())
        handle.write(store.retained_features.astype("<f8").tobytes())
    return target


def load_snapshot(path: str | Path) -> LabeledStateStore:
    source = Path(path)
    try:
        payload = source.read_bytes()
    except OSError as e:
        raise ArtifactError(f"Cannot read store snapshot {source}", reason=str(e)) from e
    if len(payload) < _HEADER.size:
        raise ArtifactError(f"Store snapshot {source} is truncated")

    magic, version, label_code, feature_dim, phi, retained, observed = _HEADER.unpack_from(payload)
    if magic != SNAPSHOT_MAGIC or version != SNAPSHOT_VERSION:
        raise ArtifactError(f"{source} is not a version {SNAPSHOT_VERSION} store snapshot")
    body = np.frombuffer(payload, dtype="<f8", offset=_HEADER.size)
    if body.size != feature_dim * (retained + 1):
        raise ArtifactError(
            f"Store snapshot {source} has an inconsistent body",
            reason=f"expected {feature_dim * (retained + 1)} values, found {body.size}",
        )

    label = Outcome.SUCCESS if label_code == 0 else Outcome.FAILURE
    store = LabeledStateStore(label, feature_dim, phi)
    store.load_state_dict(
        {
            "features": body[feature_dim:].reshape(retained, feature_dim).astype(np.float64),
            "feature_sum": body[:feature_dim].astype(np.float64),
            "counts": np.array([observed, retained], dtype=np.int64),
        }
    )
    return store


class StorePair:
    """The success and failure stores of one run."""

    def __init__(self, success: LabeledStateStore, failure: LabeledStateStore) -> None:
        if success.label is not Outcome.SUCCESS or failure.label is not Outcome.FAILURE:
            raise ValidationError("StorePair needs a success store and a failure store")
        self.success = success
        self.failure = failure

    @classmethod
    def empty(cls, feature_dim: int, retention_rate: float, *, keep_raw: bool = False) -> "StorePair":
        return cls(
            LabeledStateStore(Outcome.SUCCESS, feature_dim, retention_rate, keep_raw=keep_raw),
            LabeledStateStore(Outcome.FAILURE, feature_dim, retention_rate, keep_raw=keep_raw),
        )

    def for_label(self, label: Outcome) -> LabeledStateStore:
        return self.success if label is Outcome.SUCCESS else self.failure

    def counts(self, features: npt.ArrayLike) -> CountEstimate:
        success = estimate_count(self.success, features)
        return CountEstimate.of(success, estimate_count(self.failure, features))

    def reproject(self, projector: RffProjector) -> None:
        self.success.reproject(projector)
        self.failure.reproject(projector)

    def __iter__(self) -> Iterator[LabeledStateStore]:
        return iter((self.success, self.failure))
