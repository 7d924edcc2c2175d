"""Private learner for lines over Z_p^2.

A basic learner turns t samples into zero, a point, or a line. The overall
learner picks t = 2^k at random, runs the basic learner on ell blocks of t
samples, and releases the most frequent answer only when its distance to
instability, plus Laplace noise, clears a threshold. The boosted learner runs
the overall learner several times and picks one answer with the exponential
mechanism.
"""

from __future__ import annotations

import dataclasses
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..concepts import is_prime
from .hypothesis import Hypothesis, evaluate_codes
from .mechanisms import em_probabilities, laplace_sample, laplace_sf


@dataclass(frozen=True)
class LineLearnerConfig:
    p: int
    eps: float
    delta: float
    alpha: float
    beta: float
    range_width_override: float | None = None
    ell_override: int | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        for name in ("eps", "delta", "beta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.range_width_override is not None and self.range_width_override < 0:
            raise ValueError("range width must be non-negative")
        if self.ell_override is not None and self.ell_override < 1:
            raise ValueError("ell must be positive")

    @property
    def deviation_flags(self) -> list[str]:
        flags = []
        if self.range_width_override is not None:
            flags.append("non-paper-constants:range_width")
        if self.ell_override is not None:
            flags.append("non-paper-constants:ell")
        for name in ("eps", "delta", "alpha", "beta"):
            if getattr(self, name) >= 0.5:
                flags.append(f"parameter-outside-(0,1/2):{name}")
        return flags

    @property
    def log_lo(self) -> float:
        return math.log2(math.log(1.5) / self.eps)

    @property
    def range_width(self) -> float:
        return 6.0 / self.delta if self.range_width_override is None else self.range_width_override

    @property
    def k_range(self) -> tuple[int, int]:
        lo = max(0, math.ceil(self.log_lo))
        return lo, lo + math.ceil(self.range_width)

    @property
    def ks(self) -> np.ndarray:
        lo, hi = self.k_range
        return np.arange(lo, hi + 1)

    @property
    def ell(self) -> int:
        if self.ell_override is not None:
            return int(self.ell_override)
        a = 12.0 / self.alpha * math.log(2.0 / (self.beta * self.delta)) + 13.0
        b = 72.0 * math.log(4.0 / self.delta)
        return math.ceil(max(a, b))

    @property
    def threshold(self) -> float:
        return math.log(1.0 / (2.0 * self.beta)) / self.alpha + 1.0

    @property
    def max_samples(self) -> int:
        return (1 << self.k_range[1]) * self.ell

    def to_json(self) -> dict:
        return dataclasses.asdict(self) | {
            "k_range": list(self.k_range), "ell": self.ell, "threshold": self.threshold,
        }


# ---------------------------------------------------------------- basic learner


@dataclass(frozen=True)
class BasicResult:
    hypothesis: Hypothesis
    realizable: bool


def _split(idx, p):
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    return idx // p, idx % p


def basic_codes(idx, labels, t: int, ell: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Basic learner on ell consecutive blocks of t samples: (codes, realizable flags)."""
    xs, ys = _split(np.asarray(idx)[: t * ell], p)
    labels = np.ascontiguousarray(np.asarray(labels)[: t * ell], dtype=np.uint8)
    if len(labels) < t * ell:
        raise ValueError(f"need {t * ell} samples, got {len(labels)}")
    return kernels.basic_line_batch(xs, ys, labels, t, ell, p)


def line_basic_learner(points, labels, p: int) -> BasicResult:
    """Line through the first two distinct positives, else the point, else zero.

    points may be indices x*p + y or (x, y) pairs. Positives off the
    returned line, or two positives sharing x, mark the result non-realizable.
    """
    pts = np.asarray(points, dtype=np.int64)
    if pts.ndim == 2:
        pts = (pts[:, 0] % p) * p + pts[:, 1] % p
    if len(pts) == 0:
        return BasicResult(Hypothesis.zero(p), True)
    codes, ok = basic_codes(pts, labels, len(pts), 1, p)
    return BasicResult(Hypothesis.from_code(int(codes[0]), p), bool(ok[0]))


# ---------------------------------------------------------------- frequency and instability


def _changes_needed(top: int, other: int, other_wins_ties: bool) -> int:
    if other_wins_ties:
        return max(1, -(-(top - other) // 2))
    return max(1, (top - other) // 2 + 1)


def freq_and_instability(h_list) -> tuple[Hypothesis, int]:
    """Most frequent hypothesis (ties to the smallest) and the fewest edits that change it."""
    h_list = list(h_list)
    if not h_list:
        raise ValueError("empty hypothesis list")
    counts = Counter(h_list)
    top = min(counts, key=lambda h: (-counts[h], h.sort_key()))
    n = counts[top]
    best = None
    for g, cg in counts.items():
        if g != top:
            j = _changes_needed(n, cg, g < top)
            best = j if best is None else min(best, j)
    # a hypothesis absent from the list; zero precedes everything else
    fresh = _changes_needed(n, 0, top.kind != "zero")
    best = fresh if best is None else min(best, fresh)
    return top, best


def freq_and_instability_codes(codes) -> tuple[int, int]:
    """Same as freq_and_instability for coded zero/point/line hypotheses."""
    vals, counts = np.unique(np.asarray(codes, dtype=np.int64), return_counts=True)
    i = int(np.argmax(counts))  # first maximum is the smallest code
    top, n = int(vals[i]), int(counts[i])
    best = _changes_needed(n, 0, top != 0)
    for v, cg in zip(vals, counts):
        if v != top:
            best = min(best, _changes_needed(n, int(cg), int(v) < top))
    return top, best


# ---------------------------------------------------------------- overall learner


def release_probability(c: int, cfg: LineLearnerConfig) -> float:
    """Pr[c + Lap(1/alpha) > threshold]."""
    return laplace_sf(cfg.threshold - c, 1.0 / cfg.alpha)


@dataclass(frozen=True)
class LineRun:
    hypothesis: Hypothesis
    k: int
    t: int
    ell: int
    candidate: Hypothesis
    instability: int
    noise: float
    released: bool
    samples_used: int

    def to_json(self) -> dict:
        return {"hypothesis": self.hypothesis.to_json(), "k": self.k, "t": self.t, "ell": self.ell,
                "candidate": self.candidate.to_json(), "instability": self.instability,
                "noise": self.noise, "released": self.released, "samples_used": self.samples_used}


def line_overall_learner(cfg: LineLearnerConfig, oracle, rng: np.random.Generator) -> LineRun:
    """One run of the randomized-t learner; oracle(n) returns (point indices, labels)."""
    lo, hi = cfg.k_range
    k = int(rng.integers(lo, hi + 1))
    t, ell = 1 << k, cfg.ell
    idx, labels = oracle(t * ell)
    codes, _ = basic_codes(idx, labels, t, ell, cfg.p)
    top, c = freq_and_instability_codes(codes)
    noise = laplace_sample(1.0 / cfg.alpha, rng)
    released = c + noise > cfg.threshold
    cand = Hypothesis.from_code(top, cfg.p)
    out = cand if released else Hypothesis.zero(cfg.p)
    return LineRun(out, k, t, ell, cand, c, noise, bool(released), t * ell)


class LineReleaseStage:
    """The overall learner on one fixed dataset, with the deterministic part cached per k.

    For a given k the learner reads the first 2^k * ell samples.
    """

    def __init__(self, cfg: LineLearnerConfig, idx, labels):
        self.cfg = cfg
        self.idx = np.asarray(idx, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.uint8)
        if len(self.idx) < cfg.max_samples:
            raise ValueError(f"dataset needs {cfg.max_samples} samples")
        self._cache: dict[int, tuple[int, int]] = {}

    def stage(self, k: int) -> tuple[int, int]:
        if k not in self._cache:
            t = 1 << k
            codes, _ = basic_codes(self.idx, self.labels, t, self.cfg.ell, self.cfg.p)
            self._cache[k] = freq_and_instability_codes(codes)
        return self._cache[k]

    def distribution(self) -> dict[str, float]:
        """Exact output law, keyed by canonical hypothesis serialization."""
        ks = self.cfg.ks
        out: dict[str, float] = {}
        zero = Hypothesis.zero(self.cfg.p).key()
        for k in ks:
            top, c = self.stage(int(k))
            pr = release_probability(c, self.cfg) if top != 0 else 1.0
            key = Hypothesis.from_code(top, self.cfg.p).key()
            out[key] = out.get(key, 0.0) + pr / len(ks)
            out[zero] = out.get(zero, 0.0) + (1.0 - pr) / len(ks)
        return out

    def sample_many(self, n: int, rng: np.random.Generator) -> list[str]:
        lo, hi = self.cfg.k_range
        ks = rng.integers(lo, hi + 1, size=n)
        noise = laplace_sample(1.0 / self.cfg.alpha, rng, size=n)
        stages = {int(k): self.stage(int(k)) for k in np.unique(ks)}
        tops = np.array([stages[int(k)][0] for k in ks])
        cs = np.array([stages[int(k)][1] for k in ks])
        codes = np.where(cs + noise > self.cfg.threshold, tops, 0)
        keys = {int(v): Hypothesis.from_code(int(v), self.cfg.p).key() for v in np.unique(codes)}
        return [keys[int(v)] for v in codes]


# ---------------------------------------------------------------- boosted learner


def boost_runs(delta: float) -> int:
    return math.ceil(math.log(2.0 / delta) / math.log(4.0 / 3.0))


def boost_selection_samples(eps: float, alpha: float, delta: float, k: int) -> int:
    return math.ceil(16.0 / (eps * alpha) * math.log(4.0 * k / delta))


@dataclass(frozen=True)
class BoostedRun:
    hypothesis: Hypothesis
    candidates: tuple
    probabilities: tuple
    runs: int
    selection_samples: int
    samples_used: int

    def to_json(self) -> dict:
        return {"hypothesis": self.hypothesis.to_json(),
                "candidates": [h.to_json() for h in self.candidates],
                "probabilities": list(self.probabilities), "runs": self.runs,
                "selection_samples": self.selection_samples, "samples_used": self.samples_used}


def inner_config(cfg: LineLearnerConfig) -> LineLearnerConfig:
    """The (eps/4, 1/4)-accurate configuration each boosted run uses."""
    return dataclasses.replace(cfg, eps=cfg.eps / 4, delta=0.25)


def line_boosted_learner(cfg: LineLearnerConfig, oracle, rng: np.random.Generator) -> BoostedRun:
    k = boost_runs(cfg.delta)
    inner = inner_config(cfg)
    runs = [line_overall_learner(inner, oracle, rng) for _ in range(k)]
    cands = [r.hypothesis for r in runs]
    m = boost_selection_samples(cfg.eps, cfg.alpha, cfg.delta, k)
    idx, labels = oracle(m)
    preds = evaluate_codes([h.code for h in cands], idx, cfg.p)
    q = (preds == np.asarray(labels, dtype=np.uint8)[None, :]).sum(axis=1)
    probs = em_probabilities(q, cfg.alpha)
    i = int(rng.choice(k, p=probs))
    used = sum(r.samples_used for r in runs) + m
    return BoostedRun(cands[i], tuple(cands), tuple(float(v) for v in probs), k, m, used)


# ---------------------------------------------------------------- stability analysis


@dataclass(frozen=True)
class StabilityReport:
    none: float
    one: float
    two: float
    r: float
    q: float
    t: int
    bound_none: float
    bound_one: float
    bound_two: float
    bound_two_as_stated: float
    bounds_ok: bool
    stated_two_bound_ok: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def stability_probs(r: float, atoms, t: int, diffuse: bool = False) -> StabilityReport:
    """Exact probabilities that t samples contain no positive, one distinct positive, or two.

    atoms are the masses of the positive points. With diffuse=True the mass
    r - sum(atoms) is treated as atomless, the limit of many tiny atoms
    (two positives from it are then distinct almost surely).
    The two-positive lower bound splits the sample into halves of floor(t/2);
    the version with t/2 is reported alongside.
    """
    atoms = np.asarray(list(atoms), dtype=np.float64)
    if t < 1:
        raise ValueError("t must be at least 1")
    if np.any(atoms < 0) or not 0 <= r <= 1:
        raise ValueError("masses must lie in [0, 1]")
    if diffuse:
        if atoms.sum() > r + 1e-12:
            raise ValueError("atoms exceed r")
    elif abs(atoms.sum() - r) > 1e-12:
        raise ValueError("atoms must sum to r")
    q = float(atoms.max()) if atoms.size else 0.0
    none = (1.0 - r) ** t
    one = float(sum((1.0 - r + a) ** t - none for a in atoms))
    if diffuse:
        # many tiny atoms: exactly one positive sample, almost surely distinct
        one += t * (r - float(atoms.sum())) * (1.0 - r) ** (t - 1)
    two = 1.0 - none - one
    half = t // 2
    b_none = 1.0 - r * t
    b_one = 1.0 - (r - q) * t - math.exp(-r * t)
    b_two = (1.0 - math.exp(-r * half)) * (1.0 - math.exp(-(r - q) * half))
    b_two_stated = (1.0 - math.exp(-r * t / 2)) * (1.0 - math.exp(-(r - q) * t / 2))
    tol = 1e-12
    exact_one_lb = (1.0 - r + q) ** t - none
    ok = (none + tol >= b_none and one + tol >= exact_one_lb and exact_one_lb + tol >= b_one
          and two + tol >= b_two)
    return StabilityReport(none, one, max(two, 0.0), r, q, t, b_none, b_one, b_two, b_two_stated,
                           bool(ok), bool(two + tol >= b_two_stated))


def bad_log_t_values(r: float, atoms, ks, diffuse: bool = False) -> list[int]:
    """k with none of the three events reaching probability 2/3 at t = 2^k."""
    bad = []
    for k in ks:
        s = stability_probs(r, atoms, 1 << int(k), diffuse)
        if max(s.none, s.one, s.two) < 2.0 / 3.0:
            bad.append(int(k))
    return bad
