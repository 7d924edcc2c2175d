"""Differential-privacy audits on explicit neighboring inputs.

A mechanism exposes distribution(x) -> {output key: probability} for exact
audits and/or sample_many(x, n, rng) -> list of output keys for Monte Carlo
audits. Outputs are compared per key; the additive slack of a pair is
max over output sets T of Pr_S[T] - e^alpha Pr_S'[T], attained by the set of
keys where the difference is positive.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .dplearn.linelearn import LineLearnerConfig, LineReleaseStage
from .dplearn.mechanisms import em_probabilities
from .stats import clopper_pearson

TOL = 1e-9


@dataclass(frozen=True)
class PairResult:
    pair: int
    forward_ratio: float
    max_ratio: float
    slack: float
    verdict: str
    ci: dict | None = None

    def to_json(self) -> dict:
        out = {"pair": self.pair, "forward_ratio": _num(self.forward_ratio), "max_ratio": _num(self.max_ratio),
               "slack": self.slack, "verdict": self.verdict}
        if self.ci is not None:
            out["ci"] = self.ci
        return out


@dataclass(frozen=True)
class AuditReport:
    mode: str
    alpha: float
    beta: float
    verdict: str
    max_ratio: float
    max_slack: float
    pairs: tuple = field(default_factory=tuple)
    trials: int | None = None

    @property
    def forward_ratio(self) -> float:
        return max(p.forward_ratio for p in self.pairs)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        out = {"mode": self.mode, "alpha": self.alpha, "beta": self.beta, "verdict": self.verdict,
               "forward_ratio": _num(self.forward_ratio), "max_ratio": _num(self.max_ratio),
               "max_slack": self.max_slack, "pairs": [p.to_json() for p in self.pairs]}
        if self.trials is not None:
            out["trials"] = self.trials
        return out


def _num(v: float):
    return "inf" if math.isinf(v) else v


def ratio_and_slack(P: dict, Q: dict, alpha: float) -> tuple[float, float]:
    """max_o P(o)/Q(o) and max_T P(T) - e^alpha Q(T)."""
    ratio, slack = 0.0, 0.0
    e = math.exp(alpha)
    for o, p in P.items():
        q = Q.get(o, 0.0)
        if p > 0:
            ratio = max(ratio, math.inf if q == 0 else p / q)
        slack += max(0.0, p - e * q)
    return ratio, slack


def _exact(mech, neighbors, alpha, beta) -> AuditReport:
    pairs = []
    for i, (s, s2) in enumerate(neighbors):
        P, Q = mech.distribution(s), mech.distribution(s2)
        fr, fs = ratio_and_slack(P, Q, alpha)
        br, bs = ratio_and_slack(Q, P, alpha)
        slack = max(fs, bs)
        ok = slack <= beta + TOL
        pairs.append(PairResult(i, fr, max(fr, br), slack, "pass" if ok else "fail"))
    verdict = "pass" if all(p.verdict == "pass" for p in pairs) else "fail"
    return AuditReport("exact", alpha, beta, verdict, max(p.max_ratio for p in pairs),
                       max(p.slack for p in pairs), tuple(pairs))


def _mc_direction(cs: Counter, cs2: Counter, n: int, alpha: float, beta: float, conf: float):
    """Test the empirically worst output set in one direction."""
    e = math.exp(alpha)
    worst = {o for o in cs if cs[o] / n - e * cs2.get(o, 0) / n > 0}
    k1 = sum(cs[o] for o in worst)
    k2 = sum(cs2.get(o, 0) for o in worst)
    lo1, hi1 = clopper_pearson(k1, n, conf)
    lo2, hi2 = clopper_pearson(k2, n, conf)
    # the worst set is also probed as single outputs, which catches sparse leaks
    fail = lo1 - e * hi2 > beta
    for o in worst:
        a_lo, _ = clopper_pearson(cs[o], n, conf)
        _, b_hi = clopper_pearson(cs2.get(o, 0), n, conf)
        fail = fail or a_lo - e * b_hi > beta
    clean = not worst or hi1 - e * lo2 <= beta
    est_ratio = math.inf if k2 == 0 and k1 > 0 else (k1 / k2 if k2 else 1.0)
    ci = {"p_low": lo1, "p_high": hi1, "q_low": lo2, "q_high": hi2, "outputs": len(worst)}
    return fail, clean, (k1 - e * k2) / n, est_ratio, ci


def _monte_carlo(mech, neighbors, alpha, beta, trials, seed, conf) -> AuditReport:
    if trials <= 0:
        raise ValueError("trials must be positive")
    pairs = []
    for i, (s, s2) in enumerate(neighbors):
        seqs = np.random.SeedSequence([seed, i]).spawn(2)
        a = Counter(mech.sample_many(s, trials, np.random.Generator(np.random.Philox(seqs[0]))))
        b = Counter(mech.sample_many(s2, trials, np.random.Generator(np.random.Philox(seqs[1]))))
        f1, c1, sl1, r1, ci1 = _mc_direction(a, b, trials, alpha, beta, conf)
        f2, c2, sl2, r2, ci2 = _mc_direction(b, a, trials, alpha, beta, conf)
        verdict = "fail" if (f1 or f2) else ("pass" if (c1 and c2) else "inconclusive")
        pairs.append(PairResult(i, r1, max(r1, r2), max(sl1, sl2, 0.0), verdict,
                                {"forward": ci1, "backward": ci2}))
    verdicts = {p.verdict for p in pairs}
    verdict = "fail" if "fail" in verdicts else ("inconclusive" if "inconclusive" in verdicts else "pass")
    return AuditReport("monte_carlo", alpha, beta, verdict, max(p.max_ratio for p in pairs),
                       max(p.slack for p in pairs), tuple(pairs), trials)


def audit(mech, neighbors, alpha: float, beta: float = 0.0, mode: str = "exact",
          trials: int = 100_000, seed: int = 0, confidence: float = 0.99) -> AuditReport:
    """Check (alpha, beta)-differential privacy of mech on each neighboring pair, in both directions.

    Monte Carlo verdicts: fail when the confidence bounds already exceed the
    allowed slack, pass when even the pessimistic bounds stay within it, and
    inconclusive otherwise.
    """
    neighbors = list(neighbors)
    if not neighbors:
        raise ValueError("need at least one neighboring pair")
    if mode == "exact":
        if not hasattr(mech, "distribution"):
            raise ValueError("exact audits need a mechanism exposing its output distribution")
        return _exact(mech, neighbors, alpha, beta)
    if mode == "monte_carlo":
        if not hasattr(mech, "sample_many"):
            raise ValueError("Monte Carlo audits need a sampling mechanism")
        return _monte_carlo(mech, neighbors, alpha, beta, trials, seed, confidence)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------- mechanisms


class _FromDistribution:
    """Sampling by inverse CDF over the exact output law."""

    def sample_many(self, x, n, rng):
        dist = self.distribution(x)
        keys = sorted(dist)
        probs = np.array([dist[k] for k in keys])
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(n), side="right")
        return [keys[i] for i in np.minimum(idx, len(keys) - 1)]


class ConstantMechanism(_FromDistribution):
    def __init__(self, value="0"):
        self.value = value

    def distribution(self, x):
        return {self.value: 1.0}


class ExponentialMechanism(_FromDistribution):
    """Input: a quality vector; output: the chosen index as a string."""

    def __init__(self, alpha: float):
        self.alpha = alpha

    def distribution(self, q):
        probs = em_probabilities(q, self.alpha)
        return {str(i): float(v) for i, v in enumerate(probs)}


class RandomizedResponse(_FromDistribution):
    """Input: one bit; output: that bit, flipped with probability flip."""

    def __init__(self, flip: float):
        self.flip = flip

    def distribution(self, bit):
        b = int(bit)
        return {str(b): 1.0 - self.flip, str(1 - b): self.flip}


class LeakyMechanism:
    """Publishes the first label of its input verbatim."""

    def sample_many(self, dataset, n, rng):
        _, labels = dataset
        return [str(int(labels[0]))] * n

    def distribution(self, dataset):
        _, labels = dataset
        return {str(int(labels[0])): 1.0}


class LineLearnerMechanism:
    """The randomized-t line learner on a fixed dataset (idx, labels)."""

    def __init__(self, cfg: LineLearnerConfig):
        self.cfg = cfg
        # keyed by id; the dataset is kept alive alongside so the id stays unique
        self._stages: dict[int, tuple] = {}

    def _stage(self, dataset) -> LineReleaseStage:
        key = id(dataset)
        if key not in self._stages:
            self._stages[key] = (dataset, LineReleaseStage(self.cfg, *dataset))
        return self._stages[key][1]

    def distribution(self, dataset):
        return self._stage(dataset).distribution()

    def sample_many(self, dataset, n, rng):
        return self._stage(dataset).sample_many(n, rng)
