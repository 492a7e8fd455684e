"""User and song factor matrices and their on-disk format.

A model file is little-endian: 8-byte magic, a version byte, the user count,
song count and dimension as int64, then the user matrix and the song matrix
in row-major float64.
"""
import logging
import struct

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ModelDimensionError, ModelHeaderError, ModelTruncatedError

_log = logging.getLogger(__name__)

DEFAULT_DIMENSION = 20
MAGIC = b"PIKIWRMF"
VERSION = 1
_HEADER = struct.Struct("<8sBqqq")
_FLOAT = np.dtype("<f8")


@dataclass(eq=False)
class FactorModel:
    user_factors: np.ndarray
    item_factors: np.ndarray

    def __post_init__(self):
        self.user_factors = np.ascontiguousarray(self.user_factors, dtype=np.float64)
        self.item_factors = np.ascontiguousarray(self.item_factors, dtype=np.float64)
        if self.user_factors.ndim != 2 or self.item_factors.ndim != 2:
            raise ValueError("factor matrices must be two-dimensional")
        if self.user_factors.shape[1] != self.item_factors.shape[1]:
            raise ValueError(
                f"dimension mismatch: users have {self.user_factors.shape[1]} "
                f"columns, items have {self.item_factors.shape[1]}"
            )

    @property
    def d(self) -> int:
        return self.user_factors.shape[1]

    @property
    def num_users(self) -> int:
        return self.user_factors.shape[0]

    @property
    def num_items(self) -> int:
        return self.item_factors.shape[0]

    def copy(self) -> "FactorModel":
        return FactorModel(self.user_factors.copy(), self.item_factors.copy())

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.user_factors).all() and np.isfinite(self.item_factors).all()
        )


def init_model(
    num_users: int, num_items: int, d: int = DEFAULT_DIMENSION, seed: int = 0
) -> FactorModel:
    """Draw every entry from N(0, (0.1 / sqrt(d))^2)."""
    if num_users < 1 or num_items < 1 or d < 1:
        raise ValueError(
            f"model dimensions must be positive: {num_users} x {num_items} x {d}"
        )
    rng = np.random.default_rng(seed)
    scale = 0.1 / np.sqrt(d)
    return FactorModel(
        rng.normal(0.0, scale, size=(num_users, d)),
        rng.normal(0.0, scale, size=(num_items, d)),
    )


def _check_range(model: FactorModel, users: np.ndarray, items: np.ndarray):
    if np.any((users < 0) | (users >= model.num_users)):
        raise IndexError(f"user index out of range [0, {model.num_users})")
    if np.any((items < 0) | (items >= model.num_items)):
        raise IndexError(f"item index out of range [0, {model.num_items})")


def score_pairs(model: FactorModel, users: np.ndarray, items: np.ndarray) -> np.ndarray:
    """Row-wise dot products; the single kernel every scoring path goes through."""
    return np.sum(model.user_factors[users] * model.item_factors[items], axis=1)


def predict(model: FactorModel, u: int, i: int) -> float:
    users = np.array([u], dtype=np.int64)
    items = np.array([i], dtype=np.int64)
    _check_range(model, users, items)
    return float(score_pairs(model, users, items)[0])


def predict_batch(model: FactorModel, pairs) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    users, items = pairs[:, 0], pairs[:, 1]
    _check_range(model, users, items)
    return score_pairs(model, users, items)


def save_model(model: FactorModel, path):
    header = _HEADER.pack(MAGIC, VERSION, model.num_users, model.num_items, model.d)
    with open(path, "wb") as f:
        f.write(header)
        f.write(model.user_factors.astype(_FLOAT, copy=False).tobytes(order="C"))
        f.write(model.item_factors.astype(_FLOAT, copy=False).tobytes(order="C"))


def load_model(path) -> FactorModel:
    payload = Path(path).read_bytes()
    if len(payload) < _HEADER.size:
        raise ModelTruncatedError(_HEADER.size, len(payload))
    magic, version, num_users, num_items, d = _HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise ModelHeaderError(f"bad magic bytes {magic!r} in {path}")
    if version != VERSION:
        raise ModelHeaderError(f"unsupported model file version {version} in {path}")
    if num_users < 1 or num_items < 1 or d < 1:
        raise ModelDimensionError(
            f"invalid dimensions {num_users} x {num_items} x {d} in {path}"
        )

    user_size = num_users * d
    expected = _HEADER.size + (user_size + num_items * d) * _FLOAT.itemsize
    if len(payload) < expected:
        raise ModelTruncatedError(expected, len(payload))
    if len(payload) > expected:
        raise ModelDimensionError(
            f"{path} holds {len(payload)} bytes but its header declares {expected}"
        )

    values = np.frombuffer(payload, dtype=_FLOAT, offset=_HEADER.size)
    model = FactorModel(
        values[:user_size].reshape(num_users, d).copy(),
        values[user_size:].reshape(num_items, d).copy(),
    )
    _log.debug("loaded %d x %d x %d model from %s", num_users, num_items, d, path)
    return model
