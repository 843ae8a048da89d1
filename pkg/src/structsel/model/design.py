from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch
from ..varsets import VarRegistry


@dataclass(frozen=True, eq=False)
class Design:
    """Covariates aligned to a registry, an outcome, and column standardization.

    Columns are centered and scaled to unit (population) variance. A constant
    column keeps scale 1, so it centers to zero and never enters a fit.
    """

    registry: VarRegistry
    X: np.ndarray
    y: np.ndarray
    outcome_kind: str = "binary"
    mean: np.ndarray = field(init=False)
    scale: np.ndarray = field(init=False)
    Xs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        y = np.array(self.y, dtype=float, copy=True).ravel()
        if X.ndim != 2 or X.shape[1] != len(self.registry):
            raise DimensionMismatch(
                f"design has shape {X.shape}, registry has {len(self.registry)} variables"
            )
        if y.shape[0] != X.shape[0]:
            raise DimensionMismatch("outcome length differs from the number of rows")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("design contains missing or non-finite values")
        if self.outcome_kind not in ("binary", "continuous"):
            raise ValueError("outcome_kind must be 'binary' or 'continuous'")
        if self.outcome_kind == "binary" and not np.isin(y, (0.0, 1.0)).all():
            raise ValueError("binary outcome must be coded 0/1")
        mean = X.mean(axis=0)
        sd = X.std(axis=0)
        scale = np.where(sd > 0, sd, 1.0)
        Xs = (X - mean) / scale
        for name, arr in (("X", X), ("y", y), ("mean", mean), ("scale", scale), ("Xs", Xs)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> Design:
        """Rows ``rows`` as a new design, standardized on those rows only."""
        rows = np.asarray(rows)
        return Design(self.registry, self.X[rows], self.y[rows], self.outcome_kind)

    def standardize(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    @classmethod
    def from_csv(cls, path, registry: VarRegistry, outcome: str = "y",
                 outcome_kind: str = "binary") -> Design:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
            header = reader.fieldnames or []
        missing = [n for n in (*registry.names, outcome) if n not in header]
        if missing:
            raise DimensionMismatch(f"CSV lacks columns {missing}")
        X = np.array([[float(r[n]) for n in registry.names] for r in rows])
        y = np.array([float(r[outcome]) for r in rows])
        return cls(registry, X.reshape(len(rows), len(registry)), y, outcome_kind)

    def to_csv(self, path, outcome: str = "y"):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([*self.registry.names, outcome])
            for row, yi in zip(self.X, self.y):
                w.writerow([_num(v) for v in row] + [_num(yi)])


def _num(v):
    return int(v) if float(v).is_integer() else repr(float(v))
