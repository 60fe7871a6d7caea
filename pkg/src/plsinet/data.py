"""Dataset container shared by the fitting, inference, and simulation code."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, ShapeError

FAMILIES = ("gaussian", "binomial", "poisson", "cox")


@dataclass
class Dataset:
    """Exposures, covariates, and one outcome block.

    ``y`` holds the response for gaussian/binomial/poisson; cox uses
    ``time`` and ``event`` instead.  ``weights`` are optional per-observation
    case weights entering the loss (not the bootstrap resampling).
    """

    family: str
    x: np.ndarray
    z: np.ndarray
    y: np.ndarray | None = None
    time: np.ndarray | None = None
    event: np.ndarray | None = None
    weights: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.z.shape[1]

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise DataError(f"unknown outcome family {self.family!r}; expected one of {FAMILIES}")
        if self.x.ndim != 2 or self.z.ndim != 2:
            raise ShapeError("exposures and covariates must be 2-d arrays")
        n = self.x.shape[0]
        if self.z.shape[0] != n:
            raise ShapeError(f"exposures have {n} rows but covariates have {self.z.shape[0]}")
        if n == 0:
            raise DataError("dataset is empty")
        if not (np.isfinite(self.x).all() and np.isfinite(self.z).all()):
            raise DataError("exposures/covariates contain non-finite values")
        if self.family == "cox":
            if self.y is not None:
                raise DataError("cox outcomes use (time, event), not y")
            if self.time is None or self.event is None:
                raise DataError("cox outcomes need both time and event columns")
            if self.time.shape != (n,) or self.event.shape != (n,):
                raise ShapeError("time/event lengths do not match the data")
            if np.any(self.time <= 0) or not np.isfinite(self.time).all():
                bad = np.flatnonzero(~(self.time > 0))[:5]
                raise DataError(f"times must be positive and finite (first bad rows: {bad.tolist()})")
            if not np.isin(self.event, (0, 1)).all():
                bad = np.flatnonzero(~np.isin(self.event, (0, 1)))[:5]
                raise DataError(f"event flags must be 0/1 (first bad rows: {bad.tolist()})")
        else:
            if self.time is not None or self.event is not None:
                raise DataError(f"{self.family} outcomes use y, not (time, event)")
            if self.y is None:
                raise DataError(f"{self.family} outcomes need a y column")
            if self.y.shape != (n,):
                raise ShapeError("y length does not match the data")
            if not np.isfinite(self.y).all():
                raise DataError("y contains non-finite values")
            if self.family == "binomial" and not np.isin(self.y, (0, 1)).all():
                bad = sorted(set(np.unique(self.y)) - {0.0, 1.0})[:5]
                raise DataError(f"binomial y must be 0/1; found values {bad}")
            if self.family == "poisson" and (
                np.any(self.y < 0) or np.any(self.y != np.round(self.y))
            ):
                bad = self.y[(self.y < 0) | (self.y != np.round(self.y))][:5]
                raise DataError(f"poisson y must be non-negative integers; found {bad.tolist()}")
        if self.weights is not None:
            if self.weights.shape != (n,):
                raise ShapeError("weights length does not match the data")
            if np.any(self.weights < 0) or not np.isfinite(self.weights).all():
                raise DataError("weights must be finite and non-negative")

    def subset(self, idx: np.ndarray) -> "Dataset":
        """Row subset/resample; idx may repeat rows (bootstrap)."""
        return replace(
            self,
            x=self.x[idx],
            z=self.z[idx],
            y=None if self.y is None else self.y[idx],
            time=None if self.time is None else self.time[idx],
            event=None if self.event is None else self.event[idx],
            weights=None if self.weights is None else self.weights[idx],
        )
