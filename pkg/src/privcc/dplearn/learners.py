"""Generic private learners and the PAC evaluation harness.

An oracle is a callable n -> (point indices, labels) that draws n labeled
examples. Learners take an oracle and a numpy Generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..concepts import ConceptClass, FiniteDistribution, as_distribution, vc_dimension, xor_class
from ..repdim import ProbRepresentation, min_cover
from ..stats import clopper_pearson
from .hypothesis import Hypothesis
from .mechanisms import em_probabilities, match_counts

COVER_RADIUS = Fraction(1, 8)


class Sampler:
    """Draws indices from a finite distribution by inverse CDF."""

    def __init__(self, d):
        self.d = as_distribution(d)
        self.cdf = np.cumsum(self.d.probs.ravel())
        self.cdf[-1] = 1.0

    def __call__(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(n)
        return np.minimum(np.searchsorted(self.cdf, u, side="right"), len(self.cdf) - 1)


def make_oracle(d, f_row, rng: np.random.Generator):
    """Realizable oracle: x ~ d, label f(x)."""
    sampler = Sampler(d)
    f_row = np.asarray(f_row, dtype=np.uint8)

    def oracle(n: int):
        idx = sampler(n, rng)
        return idx, f_row[idx]
    return oracle


def make_agnostic_oracle(joint, rng: np.random.Generator):
    """Oracle for a joint distribution indexed (point, label)."""
    joint = as_distribution(joint)
    if joint.shape[1:] != (2,):
        raise ValueError("joint must have shape (points, 2)")
    sampler = Sampler(FiniteDistribution(joint.weights.ravel()))

    def oracle(n: int):
        flat = sampler(n, rng)
        return flat // 2, (flat % 2).astype(np.uint8)
    return oracle


@dataclass(frozen=True)
class EMResult:
    hypothesis: Hypothesis
    index: int
    probabilities: tuple
    qualities: tuple

    def to_json(self) -> dict:
        return {"hypothesis": self.hypothesis.to_json(), "index": self.index,
                "probabilities": list(self.probabilities), "qualities": list(self.qualities)}


def em_over_rows(rows, idx, labels, alpha: float, rng: np.random.Generator) -> EMResult:
    q = match_counts(rows, idx, labels)
    probs = em_probabilities(q, alpha)
    i = int(rng.choice(len(probs), p=probs))
    return EMResult(Hypothesis.table(np.asarray(rows)[i]), i, tuple(float(v) for v in probs),
                    tuple(int(v) for v in q))


def prdim_learner(rep: ProbRepresentation, oracle, n: int, alpha: float, rng: np.random.Generator) -> EMResult:
    """Sample H from the representation, then run the exponential mechanism over H on n samples."""
    if n < 0:
        raise ValueError("n must be non-negative")
    j = int(rng.choice(len(rep.support), p=rep.probs.probs.ravel()))
    idx, labels = oracle(n) if n else (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.uint8))
    return em_over_rows(rep.support[j].hypotheses, idx, labels, alpha, rng)


def default_sample_size(h_size: int, alpha: float) -> int:
    return math.ceil(32.0 / alpha * (math.log(max(h_size, 2)) + 3.0))


def dist_specific_learner(c: ConceptClass, d_known, oracle, alpha: float, rng: np.random.Generator,
                          n: int | None = None, proper: bool = True, cover=None) -> EMResult:
    """Exponential mechanism over a minimum 1/8-cover of c under the known distribution."""
    if cover is None:
        cover = min_cover(c, d_known, COVER_RADIUS, proper=proper, allow_greedy=True)
    n = default_sample_size(cover.size, alpha) if n is None else n
    idx, labels = oracle(n) if n else (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.uint8))
    return em_over_rows(cover.rep.hypotheses, idx, labels, alpha, rng)


def label_private_unlabeled_size(c: ConceptClass) -> int:
    k, _ = vc_dimension(xor_class(c, c))
    return math.ceil(64.0 * (k + math.log(8.0)))


@dataclass(frozen=True)
class LabelPrivateResult:
    hypothesis: Hypothesis
    unlabeled: int
    cover_size: int
    selection: EMResult

    def to_json(self) -> dict:
        return {"hypothesis": self.hypothesis.to_json(), "unlabeled_samples": self.unlabeled,
                "cover_size": self.cover_size, "selection": self.selection.to_json()}


def label_private_learner(c: ConceptClass, oracle, alpha: float, rng: np.random.Generator,
                          t: int | None = None, n: int | None = None) -> LabelPrivateResult:
    """Cover c under the empirical distribution of t points (labels discarded), then select privately."""
    t = label_private_unlabeled_size(c) if t is None else t
    idx, _ = oracle(t)
    counts = np.bincount(np.asarray(idx, dtype=np.int64), minlength=c.domain_size)
    d_s = FiniteDistribution([Fraction(int(v), t) for v in counts])
    cover = min_cover(c, d_s, COVER_RADIUS, proper=True, allow_greedy=True)
    sel = dist_specific_learner(c, d_s, oracle, alpha, rng, n=n, cover=cover)
    return LabelPrivateResult(sel.hypothesis, t, cover.size, sel)


@dataclass(frozen=True)
class PacReport:
    success_rate: float
    successes: int
    trials: int
    ci_low: float
    ci_high: float
    eps: float
    errors: tuple

    def to_json(self) -> dict:
        return {"success_rate": self.success_rate, "successes": self.successes, "trials": self.trials,
                "ci_low": self.ci_low, "ci_high": self.ci_high, "eps": self.eps,
                "errors": [str(e) for e in self.errors]}


def hypothesis_row(h, n: int) -> np.ndarray:
    if isinstance(h, Hypothesis):
        return h.row(n)
    if hasattr(h, "hypothesis"):
        return h.hypothesis.row(n)
    return np.asarray(h, dtype=np.uint8)


def pac_evaluate(learner, c: ConceptClass, f_target, d, trials: int, eps, seed: int = 0,
                 joint=None) -> PacReport:
    """Run learner(oracle, rng) on fresh data each trial and count outputs with error at most eps.

    In the realizable mode data come from (d, f_target) and error is the exact
    d-disagreement with f_target. Passing joint (shape (points, 2)) switches to
    the agnostic mode: error is the exact joint mislabel rate and success means
    error <= best-in-class error + eps.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    n = c.domain_size
    children = np.random.SeedSequence(seed).spawn(trials)
    if joint is None:
        d = as_distribution(d)
        f_row = np.asarray(f_target if not isinstance(f_target, (int, np.integer)) else c.rows[f_target],
                           dtype=np.uint8)
        target = eps
    else:
        joint = as_distribution(joint)
        best = min(_joint_error(joint, row) for row in c.rows)
        target = best + eps
    errors, wins = [], 0
    for child in children:
        data_seq, learn_seq = child.spawn(2)
        data_rng = np.random.Generator(np.random.Philox(data_seq))
        learn_rng = np.random.Generator(np.random.Philox(learn_seq))
        oracle = make_oracle(d, f_row, data_rng) if joint is None else make_agnostic_oracle(joint, data_rng)
        row = hypothesis_row(learner(oracle, learn_rng), n)
        err = d.mass(row != f_row) if joint is None else _joint_error(joint, row)
        errors.append(err)
        wins += err <= target
    lo, hi = clopper_pearson(wins, trials)
    return PacReport(wins / trials, wins, trials, lo, hi, float(eps), tuple(errors))


def _joint_error(joint: FiniteDistribution, row) -> Fraction | float:
    row = np.asarray(row, dtype=np.int64)
    mask = np.zeros(joint.shape, dtype=bool)
    mask[np.arange(len(row)), 1 - row] = True
    return joint.mass(mask)
