"""Laplace noise and the exponential mechanism."""

from __future__ import annotations

import math

import numpy as np


def laplace_from_uniform(u, scale: float):
    """Inverse CDF of the Laplace law with the given scale, for u in (-1/2, 1/2)."""
    u = np.asarray(u, dtype=np.float64)
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def laplace_sample(scale: float, rng: np.random.Generator, size=None):
    if not scale > 0:
        raise ValueError("Laplace scale must be positive")
    u = rng.random(size) - 0.5
    out = laplace_from_uniform(u, scale)
    return float(out) if size is None else out


def laplace_sf(x: float, scale: float) -> float:
    """Pr[Lap(scale) > x]."""
    if x >= 0:
        return 0.5 * math.exp(-x / scale)
    return 1.0 - 0.5 * math.exp(x / scale)


def em_probabilities(qualities, alpha: float) -> np.ndarray:
    """Probabilities proportional to exp(alpha * q / 2), computed after shifting by the max."""
    q = np.asarray(qualities, dtype=np.float64)
    if q.size == 0:
        raise ValueError("the exponential mechanism needs at least one candidate")
    w = np.exp(alpha * (q - q.max()) / 2.0)
    return w / w.sum()


def exponential_mechanism(h_set, quality, samples, alpha: float, rng: np.random.Generator):
    """Pick h from h_set with probability proportional to exp(alpha * quality(samples, h) / 2).

    Returns (chosen h, probability vector over h_set).
    """
    h_set = list(h_set)
    if not h_set:
        raise ValueError("empty hypothesis set")
    probs = em_probabilities([quality(samples, h) for h in h_set], alpha)
    i = int(rng.choice(len(h_set), p=probs))
    return h_set[i], probs


def match_counts(rows, idx, labels) -> np.ndarray:
    """For each hypothesis row, the number of samples it labels correctly."""
    rows = np.asarray(rows, dtype=np.uint8)
    idx = np.asarray(idx, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.uint8)
    return (rows[:, idx] == labels[None, :]).sum(axis=1)
