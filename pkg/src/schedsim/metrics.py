"""Fairness and summary statistics over per-scheduler response times."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FairnessReport:
    fi: float
    per_scheduler: np.ndarray


def fairness_index(d) -> float:
    """Jain's fairness index ``sum(d)**2 / (n * sum(d**2))``.

    Equals 1 exactly when all entries agree and falls towards ``1/n`` as
    one entry dominates.
    """
    d = np.asarray(d, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("need a nonempty vector of response times")
    if np.any(d <= 0):
        raise ValueError("response times must be positive")
    # rescale first; the index is scale-free and this avoids overflow
    d = d / d.max()
    return float(d.sum() ** 2 / (d.size * np.dot(d, d)))


def fairness_report(d) -> FairnessReport:
    d = np.asarray(d, dtype=float)
    return FairnessReport(fairness_index(d), d)


def summarize(values) -> tuple[float, float, float]:
    """Return ``(min, max, mean)`` of a nonempty sequence."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot summarize an empty sequence")
    return float(v.min()), float(v.max()), float(v.mean())
