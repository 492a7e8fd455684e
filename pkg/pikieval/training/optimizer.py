import logging

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import TrainingDivergedError
from ..factors import FactorModel, score_pairs
from .schema import TrainingBatch

_log = logging.getLogger(__name__)

EPSILON = 1e-8


class RowGradients(NamedTuple):
    users: np.ndarray
    user_grad: np.ndarray
    items: np.ndarray
    item_grad: np.ndarray


@dataclass
class AdagradState:
    """Running sums of squared gradients, one per model coordinate."""

    user_accum: np.ndarray
    item_accum: np.ndarray
    iteration: int = field(default=0)

    @classmethod
    def for_model(cls, model: FactorModel) -> "AdagradState":
        return cls(
            np.zeros_like(model.user_factors), np.zeros_like(model.item_factors)
        )

    def step_sizes(self, learning_rate: float, epsilon: float = EPSILON):
        return (
            learning_rate / np.sqrt(self.user_accum + epsilon),
            learning_rate / np.sqrt(self.item_accum + epsilon),
        )


def batch_loss(model: FactorModel, batch: TrainingBatch, lam: float) -> float:
    """Weighted squared error of the batch plus the penalty on touched rows."""
    scores = score_pairs(model, batch.users, batch.items)
    data = float(np.sum(batch.weights * (scores - batch.targets) ** 2))
    users = np.unique(batch.users)
    items = np.unique(batch.items)
    penalty = float(
        np.sum(model.user_factors[users] ** 2) + np.sum(model.item_factors[items] ** 2)
    )
    return data + lam * penalty


def batch_gradients(model: FactorModel, batch: TrainingBatch, lam: float) -> RowGradients:
    """Gradient of :func:`batch_loss`, restricted to touched rows.

    The penalty term 2*lam*x lands once per row however often the row was
    drawn; the data term accumulates over every occurrence.
    """
    scores = score_pairs(model, batch.users, batch.items)
    residual = 2.0 * batch.weights * (scores - batch.targets)

    users, user_slot = np.unique(batch.users, return_inverse=True)
    items, item_slot = np.unique(batch.items, return_inverse=True)
    user_grad = 2.0 * lam * model.user_factors[users]
    item_grad = 2.0 * lam * model.item_factors[items]
    np.add.at(user_grad, user_slot, residual[:, None] * model.item_factors[batch.items])
    np.add.at(item_grad, item_slot, residual[:, None] * model.user_factors[batch.users])
    return RowGradients(users, user_grad, items, item_grad)


def _check_finite(name: str, rows: np.ndarray, grad: np.ndarray, iteration: int):
    bad = ~np.isfinite(grad)
    if bad.any():
        row, column = np.argwhere(bad)[0]
        _log.error("%s gradient diverged at iteration %d", name, iteration)
        raise TrainingDivergedError(iteration, f"{name}[{rows[row]}, {column}]")


def adagrad_step(
    model: FactorModel,
    batch: TrainingBatch,
    lam: float,
    learning_rate: float,
    state: AdagradState,
    epsilon: float = EPSILON,
) -> float:
    """Apply one Adagrad update in place and return the pre-update batch loss."""
    loss = batch_loss(model, batch, lam)
    grads = batch_gradients(model, batch, lam)
    _check_finite("user", grads.users, grads.user_grad, state.iteration)
    _check_finite("item", grads.items, grads.item_grad, state.iteration)

    for factors, accum, rows, grad in (
        (model.user_factors, state.user_accum, grads.users, grads.user_grad),
        (model.item_factors, state.item_accum, grads.items, grads.item_grad),
    ):
        accum[rows] += grad**2
        factors[rows] -= learning_rate * grad / np.sqrt(accum[rows] + epsilon)

    state.iteration += 1
    return loss
