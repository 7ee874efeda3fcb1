"""Small builders shared across test modules."""

from __future__ import annotations

import numpy as np

from iema.data import CATEGORICAL, NUMERIC, Column, Dataset
from iema.models import LinearModel, ModelHandle, TreeEnsembleModel, schema_from_dataset


def make_dataset(columns: dict, target: str, name: str = "test") -> Dataset:
    cols = []
    for cid, values in columns.items():
        if all(isinstance(v, str) for v in values):
            cols.append(Column(id=cid, kind=CATEGORICAL, values=np.array(values, dtype=object)))
        else:
            cols.append(Column(id=cid, kind=NUMERIC, values=np.array(values, dtype=float)))
    return Dataset(name=name, columns=tuple(cols), target=target)


def linear_model(d: Dataset, weights: dict, intercept: float = 0.0, link: str = "identity"):
    return LinearModel(
        schema=schema_from_dataset(d), weights=weights, intercept=intercept, link=link
    )


def tree_model(d: Dataset, trees: list, aggregation: str = "mean"):
    return TreeEnsembleModel(schema=schema_from_dataset(d), trees=trees, aggregation=aggregation)


class ConstantModel(ModelHandle):
    """Custom handle predicting a constant; exercises the black-box contract."""

    def __init__(self, d: Dataset, value: float = 0.5):
        super().__init__(
            id="constant", task="regression", schema=schema_from_dataset(d), refittable=False
        )
        self.value = value

    def predict_columns(self, cols):
        n = len(next(iter(cols.values()))) if cols else 0
        return np.full(n, self.value)
