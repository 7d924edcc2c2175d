"""Entropies, divergences and the numeric bounds built on them.

Entropies are in bits. KL divergence is reported in both nats and bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .concepts import FiniteDistribution, as_distribution


def _p(d) -> np.ndarray:
    return as_distribution(d).probs


def shannon(p) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def renyi2(p) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    return float(-np.log2((p * p).sum()))


def min_entropy(p) -> float:
    return float(-np.log2(np.asarray(p, dtype=np.float64).max()))


def binary_entropy(e: float) -> float:
    if e in (0, 1):
        return 0.0
    return -e * math.log2(e) - (1 - e) * math.log2(1 - e)


def conditional_entropy(joint) -> float:
    """H(x | y) for a joint indexed (x, y)."""
    j = _p(joint)
    py = j.sum(axis=0)
    return float(sum(py[y] * shannon(j[:, y] / py[y]) for y in np.flatnonzero(py > 0)))


def mutual_information(joint) -> float:
    j = _p(joint)
    return shannon(j.sum(axis=1)) + shannon(j.sum(axis=0)) - shannon(j)


def conditional_min_entropy(joint) -> np.ndarray:
    """H_inf(x | y = y) for every y with positive mass (nan elsewhere)."""
    j = _p(joint)
    py = j.sum(axis=0)
    out = np.full(len(py), np.nan)
    pos = py > 0
    out[pos] = -np.log2(j[:, pos].max(axis=0) / py[pos])
    return out


@dataclass(frozen=True)
class EntropyReport:
    shannon: float
    renyi2: float
    min_entropy: float
    log_support: float
    conditional_shannon: float | None = None
    mutual_information: float | None = None

    @property
    def ordered(self) -> bool:
        tol = 1e-9
        return (self.log_support + tol >= self.shannon
                and self.shannon + tol >= self.renyi2
                and self.renyi2 + tol >= self.min_entropy)

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()} | {"ordered": self.ordered}


def entropy_suite(d) -> EntropyReport:
    """All entropies of d in bits; 2-D inputs are treated as joints over (x, y)."""
    p = _p(d)
    base = dict(shannon=shannon(p), renyi2=renyi2(p), min_entropy=min_entropy(p),
                log_support=math.log2(p.size))
    if p.ndim == 2:
        base.update(conditional_shannon=conditional_entropy(p), mutual_information=mutual_information(p))
    rep = EntropyReport(**base)
    if not rep.ordered:
        raise AssertionError(f"entropy ordering violated: {rep}")
    return rep


@dataclass(frozen=True)
class DivergenceReport:
    kl_nats: float
    kl_bits: float
    statistical_distance: float
    pinsker_bound: float
    pinsker_ok: bool
    kl_infinite: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def kl_nats(p, q) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    pos = p > 0
    if np.any(q[pos] == 0):
        return math.inf
    return float((p[pos] * np.log(p[pos] / q[pos])).sum())


def statistical_distance(p, q) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    return 0.5 * float(np.abs(p - q).sum())


def statistical_distance_events(p, q) -> float:
    """max over events T of p(T) - q(T), by enumerating all 2^n events."""
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    n = len(p)
    if n > 20:
        raise ValueError("event enumeration needs at most 20 outcomes")
    masks = (np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1
    return float((masks @ (p - q)).max())


def divergence_and_distance(p, q) -> DivergenceReport:
    p, q = _p(p), _p(q)
    if p.shape != q.shape:
        raise ValueError("distributions must share the index set")
    kl = kl_nats(p, q)
    sd = statistical_distance(p, q)
    bound = math.sqrt(kl / 2) if math.isfinite(kl) else math.inf
    return DivergenceReport(kl, kl / math.log(2), sd, bound, sd <= bound + 1e-12, not math.isfinite(kl))


def min_entropy_conditioning_tail(joint, s_bits: float, t: float) -> float:
    """Pr_y[H_inf(x | y) < H_inf(x) - s - t] for a joint indexed (x, y).

    Requires y to take at most 2^s_bits values with positive mass; the result
    is checked against 2^-t.
    """
    j = _p(joint)
    py = j.sum(axis=0)
    if np.count_nonzero(py) > 2 ** s_bits:
        raise ValueError(f"y has {np.count_nonzero(py)} values, more than 2^{s_bits}")
    h = min_entropy(j.sum(axis=1))
    cond = conditional_min_entropy(j)
    bad = (py > 0) & (cond < h - s_bits - t - 1e-12)
    prob = float(py[bad].sum())
    if not prob < 2.0 ** (-t):
        raise AssertionError(f"tail {prob} is not below 2^-{t}")
    return prob


def augindex_bound(d: int, eps: float) -> float:
    """(1 - H(eps)) * d bits."""
    if not 0 <= eps <= 0.5:
        raise ValueError("eps must lie in [0, 1/2]")
    return (1 - binary_entropy(float(eps))) * d


def product(p, q) -> FiniteDistribution:
    return FiniteDistribution(np.multiply.outer(as_distribution(p).weights, as_distribution(q).weights))
