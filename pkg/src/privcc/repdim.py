"""Deterministic and probabilistic representations of concept classes.

Distribution-free checks solve small zero-sum games by linear programming;
fixed-distribution checks are exact sums. The conversions between public-coin
protocols and probabilistic representations, and between private-coin
protocols and deterministic representations, are constructive and their
errors are recomputed exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .commsim import OneWayProtocol, error_matrix, EvalProblem
from .concepts import ConceptClass, FiniteDistribution, as_distribution, distance_matrix
from .errors import CapExceeded

LP_TOL = 1e-9
MIX_TOL = 1e-6
MAX_LP_SIZE = 64
MAX_SUPPORT = 12
MAX_POOL = 1 << 16
MAX_IMPROPER_EXACT_POINTS = 4
BB_NODE_BUDGET = 2_000_000


@dataclass(frozen=True, eq=False)
class DetRepresentation:
    hypotheses: np.ndarray
    names: tuple = ()

    def __post_init__(self):
        h = np.ascontiguousarray(self.hypotheses, dtype=np.uint8)
        if h.ndim == 1:
            h = h[None, :]
        if h.ndim != 2 or h.shape[0] < 1:
            raise ValueError("a representation needs at least one hypothesis row")
        h.setflags(write=False)
        object.__setattr__(self, "hypotheses", h)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"h{i}" for i in range(h.shape[0])))

    @classmethod
    def unique(cls, rows, names=None) -> "DetRepresentation":
        """Keep the first copy of every distinct row."""
        rows = np.asarray(rows, dtype=np.uint8)
        names = list(names) if names is not None else [f"h{i}" for i in range(len(rows))]
        keep, seen = [], set()
        for i, r in enumerate(rows):
            if r.tobytes() not in seen:
                seen.add(r.tobytes())
                keep.append(i)
        return cls(rows[keep], tuple(names[i] for i in keep))

    @property
    def size(self) -> int:
        return self.hypotheses.shape[0]

    @property
    def domain_size(self) -> int:
        return self.hypotheses.shape[1]

    @property
    def log_size(self) -> float:
        return math.log2(self.size)

    def key(self) -> frozenset:
        return frozenset(r.tobytes() for r in self.hypotheses)

    def to_json(self) -> dict:
        return {
            "domain_size": self.domain_size,
            "hypotheses": [{"name": n, "bits": "".join(map(str, r.tolist()))}
                           for n, r in zip(self.names, self.hypotheses)],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DetRepresentation":
        rows = [[int(ch) for ch in h["bits"]] for h in doc["hypotheses"]]
        return cls(np.asarray(rows, dtype=np.uint8).reshape(len(rows), doc["domain_size"]),
                   tuple(h["name"] for h in doc["hypotheses"]))


@dataclass(frozen=True, eq=False)
class ProbRepresentation:
    support: tuple
    probs: FiniteDistribution

    def __post_init__(self):
        if len(self.support) < 1:
            raise ValueError("a probabilistic representation needs a nonempty support")
        probs = as_distribution(self.probs)
        if probs.size != len(self.support):
            raise ValueError("probs and support differ in length")
        if len({h.domain_size for h in self.support}) != 1:
            raise ValueError("support members must share the domain")
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point_mass(cls, h: DetRepresentation) -> "ProbRepresentation":
        return cls((h,), FiniteDistribution([Fraction(1)]))

    @property
    def max_log_size(self) -> float:
        return max(h.log_size for h in self.support)

    @property
    def domain_size(self) -> int:
        return self.support[0].domain_size

    def merged(self) -> "ProbRepresentation":
        """Combine support members holding the same hypothesis set."""
        order, mass = [], {}
        w = self.probs.weights.ravel()
        for h, p in zip(self.support, w):
            k = h.key()
            if k not in mass:
                order.append(h)
                mass[k] = p
            else:
                mass[k] = mass[k] + p
        return ProbRepresentation(tuple(order), FiniteDistribution([mass[h.key()] for h in order]))

    def union(self) -> DetRepresentation:
        return DetRepresentation.unique(np.vstack([h.hypotheses for h in self.support]))

    def to_json(self) -> dict:
        return {"support": [h.to_json() for h in self.support], "probs": self.probs.to_json()}


# ---------------------------------------------------------------- games


def _diff(f_row, H) -> np.ndarray:
    return (np.asarray(H, dtype=np.uint8) != np.asarray(f_row, dtype=np.uint8)[None, :]).astype(np.float64)


def _check_lp(H, n):
    if len(H) > MAX_LP_SIZE or n > MAX_LP_SIZE:
        raise CapExceeded(f"LP games are capped at {MAX_LP_SIZE} hypotheses and points")


def game_value(f_row, H) -> tuple[float, np.ndarray]:
    """max over D of min over h in H of err_D(f, h), with a maximizing D."""
    diff = _diff(f_row, H)
    k, n = diff.shape
    _check_lp(diff, n)
    if not diff.any(axis=1).all():
        D = np.zeros(n)
        D[0] = 1.0
        return 0.0, D
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-diff, np.ones((k, 1))])
    A_eq = np.hstack([np.ones((1, n)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(k), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, 1)] * n + [(0, 1)], method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP did not converge: {res.message}")
    return float(res.x[-1]), np.clip(res.x[:n], 0, None)


def mixed_strategy(f_row, H) -> tuple[float, np.ndarray]:
    """min over mixtures q on H of max over x of Pr_{h~q}[h(x) != f(x)]."""
    diff = _diff(f_row, H)
    k, n = diff.shape
    _check_lp(diff, n)
    exact = np.flatnonzero(~diff.any(axis=1))
    if len(exact):
        q = np.zeros(k)
        q[exact[0]] = 1.0
        return 0.0, q
    c = np.zeros(k + 1)
    c[-1] = 1.0
    A_ub = np.hstack([diff.T, -np.ones((n, 1))])
    A_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, 1)] * k + [(0, 1)], method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP did not converge: {res.message}")
    return float(res.x[-1]), np.clip(res.x[:k], 0, None)


def _rationalize(q: np.ndarray, max_den: int = 10 ** 6) -> list[Fraction]:
    fr = [Fraction(float(v)).limit_denominator(max_den) for v in q]
    fr = [max(v, Fraction(0)) for v in fr]
    top = max(range(len(fr)), key=lambda i: fr[i])
    fr[top] += 1 - sum(fr)
    return fr


@dataclass(frozen=True)
class DistFreeCheck:
    passed: bool
    worst_concept: int
    worst_value: float
    worst_distribution: tuple
    values: tuple

    def to_json(self) -> dict:
        return {"pass": self.passed, "worst_concept": self.worst_concept,
                "worst_value": self.worst_value, "worst_distribution": list(self.worst_distribution),
                "values": list(self.values)}


def check_det_rep_distfree(h: DetRepresentation, c: ConceptClass, eps) -> DistFreeCheck:
    """Does every concept sit within eps of H under every distribution?"""
    if h.domain_size != c.domain_size:
        raise ValueError("representation and class must share the domain")
    values, dists = [], []
    for f in c.rows:
        v, D = game_value(f, h.hypotheses)
        values.append(v)
        dists.append(D)
    worst = int(np.argmax(values))
    return DistFreeCheck(values[worst] <= float(eps) + LP_TOL, worst, values[worst],
                         tuple(float(x) for x in dists[worst]), tuple(values))


@dataclass(frozen=True)
class FixedCheck:
    passed: bool
    worst_concept: int
    coverage: tuple  # per concept: nearest distance (deterministic) or covered mass (probabilistic)

    def to_json(self) -> dict:
        return {"pass": self.passed, "worst_concept": self.worst_concept,
                "coverage": [str(v) for v in self.coverage]}


def _covered(h: DetRepresentation, c: ConceptClass, d, eps) -> tuple[np.ndarray, np.ndarray]:
    dist = distance_matrix(c.rows, h.hypotheses, d)
    nearest = dist.min(axis=1)
    return np.array([v <= eps for v in nearest]), nearest


def check_rep_fixed_dist(rep, c: ConceptClass, d, eps, delta=0) -> FixedCheck:
    """Exact check of a deterministic or probabilistic representation under one distribution."""
    d = as_distribution(d)
    if d.size != c.domain_size:
        raise ValueError("distribution must cover the class's domain")
    if isinstance(rep, DetRepresentation):
        ok, nearest = _covered(rep, c, d, eps)
        worst = int(np.argmax([float(v) for v in nearest]))
        return FixedCheck(bool(ok.all()), worst, tuple(nearest))
    rep = rep.merged()
    w = rep.probs.weights.ravel()
    mass = [0 for _ in range(c.size)]
    for h, p in zip(rep.support, w):
        ok, _ = _covered(h, c, d, eps)
        for i in np.flatnonzero(ok):
            mass[i] = mass[i] + p
    worst = int(np.argmin([float(m) for m in mass]))
    return FixedCheck(all(m >= 1 - delta for m in mass), worst, tuple(mass))


@dataclass(frozen=True)
class ProbDistFreeCheck:
    passed: bool
    worst_concept: int | None
    worst_subfamily: tuple | None
    worst_distribution: tuple | None
    lp_solves: int

    def to_json(self) -> dict:
        return {"pass": self.passed, "worst_concept": self.worst_concept,
                "worst_subfamily": None if self.worst_subfamily is None else list(self.worst_subfamily),
                "worst_distribution": None if self.worst_distribution is None else list(self.worst_distribution),
                "lp_solves": self.lp_solves}


def _minimal_heavy_subsets(w, delta) -> list[tuple[int, ...]]:
    """Subsets with mass above delta that lose that property when any member is dropped."""
    k = len(w)
    out = []
    for r in range(1, k + 1):
        for S in itertools.combinations(range(k), r):
            m = sum(w[i] for i in S)
            if m > delta and all(m - w[i] <= delta for i in S):
                out.append(S)
    return out


def check_prob_rep_distfree(r: ProbRepresentation, c: ConceptClass, eps, delta) -> ProbDistFreeCheck:
    """For every concept and every subfamily of mass above delta, is there a D that defeats all of it?

    The bad region of a subfamily S is {D : err_D(f, h) > eps for all h in the
    union of S}; it is nonempty exactly when the game value of f against that
    union exceeds eps. Regions shrink as S grows, so only inclusion-minimal
    heavy subfamilies need checking.
    """
    r = r.merged()
    if len(r.support) > MAX_SUPPORT:
        raise CapExceeded(f"support above {MAX_SUPPORT} after merging identical sets")
    w = list(r.probs.weights.ravel())
    families = _minimal_heavy_subsets(w, delta)
    solves = 0
    for fi, f in enumerate(c.rows):
        for S in families:
            H = np.vstack([r.support[i].hypotheses for i in S])
            v, D = game_value(f, H)
            solves += 1
            if v > float(eps) + LP_TOL:
                return ProbDistFreeCheck(False, fi, S, tuple(float(x) for x in D), solves)
    return ProbDistFreeCheck(True, None, None, None, solves)


# ---------------------------------------------------------------- conversions


def protocol_to_prob_rep(p: OneWayProtocol) -> ProbRepresentation:
    """H_r is the set of Bob's functions x -> bob(m, x; r) over all messages m."""
    if p.flavor == "private_coin":
        raise ValueError("needs a public-coin (or deterministic) protocol")
    support = []
    for r in range(p.bob.shape[2]):
        rows = p.bob[:, :, r]
        support.append(DetRepresentation.unique(rows, [f"r{r}_m{m}" for m in range(len(rows))]))
    return ProbRepresentation(tuple(support), p.alice_coins)


def _conditionals(mu: FiniteDistribution, n_concepts: int, n_points: int) -> list:
    if mu.shape != (n_concepts, n_points):
        raise ValueError("mu must be indexed by (concept, point)")
    out = []
    for f in range(n_concepts):
        row = mu.weights[f]
        tot = row.sum()
        out.append(None if tot == 0 else FiniteDistribution(row / tot if not mu.is_exact
                                                           else [Fraction(v) / tot for v in row]))
    return out


def prob_rep_to_protocol(r: ProbRepresentation, c: ConceptClass, eps, mu=None, d=None) -> OneWayProtocol:
    """Public coins pick H; Alice sends the lowest index of an h within eps of f, else 0; Bob outputs h(x).

    Alice measures closeness under the conditional of mu given f, or under
    the fixed distribution d when that is supplied instead.
    """
    if (mu is None) == (d is None):
        raise ValueError("give exactly one of mu or d")
    if d is not None:
        d = as_distribution(d)
        conds = [d] * c.size
    else:
        conds = _conditionals(as_distribution(mu), c.size, c.domain_size)
    M = max(h.size for h in r.support)
    R = len(r.support)
    alice = np.zeros((c.size, R), dtype=np.int64)
    bob = np.zeros((M, c.domain_size, R), dtype=np.uint8)
    for j, H in enumerate(r.support):
        bob[: H.size, :, j] = H.hypotheses
        for f in range(c.size):
            if conds[f] is None:
                continue
            dist = distance_matrix(c.rows[f:f + 1], H.hypotheses, conds[f])[0]
            good = [i for i, v in enumerate(dist) if v <= eps]
            alice[f, j] = good[0] if good else 0
    return OneWayProtocol.public(alice, bob, r.probs)


def det_rep_to_protocol(h: DetRepresentation, c: ConceptClass, eps) -> OneWayProtocol:
    """Alice samples h from the optimal mixed strategy for f and sends its index; Bob outputs h(x).

    Requires H to pass the distribution-free check at eps. The mixtures are
    rationalized and the worst-case error is re-verified exactly.
    """
    check = check_det_rep_distfree(h, c, eps)
    if not check.passed:
        raise ValueError(f"H does not represent the class at eps={eps}: concept "
                         f"{check.worst_concept} has game value {check.worst_value:.6g}")
    mixes = []
    for f in c.rows:
        _, q = mixed_strategy(f, h.hypotheses)
        mixes.append(_rationalize(q))
    cuts = sorted({Fraction(0), Fraction(1)} | {sum(q[: i + 1]) for q in mixes for i in range(len(q))})
    lows = cuts[:-1]
    widths = [b - a for a, b in zip(cuts, cuts[1:])]
    alice = np.zeros((c.size, len(lows)), dtype=np.int64)
    for f, q in enumerate(mixes):
        cum = list(itertools.accumulate(q))
        for j, a in enumerate(lows):
            alice[f, j] = next(i for i, v in enumerate(cum) if v > a)
    bob = h.hypotheses[:, :, None]
    proto = OneWayProtocol.private(alice, bob, FiniteDistribution(widths), FiniteDistribution([Fraction(1)]))
    err, den = error_matrix(proto, EvalProblem.from_class(c))
    worst = Fraction(int(err.max()), den)
    if worst > Fraction(eps) + Fraction(MIX_TOL):
        raise RuntimeError(f"rationalized strategy has error {worst}, above {eps}")
    return proto


def det_rep_to_protocol_fixed(h: DetRepresentation, c: ConceptClass, d, eps) -> OneWayProtocol:
    """Deterministic protocol: Alice sends the lowest index of an h within eps of f under d."""
    dist = distance_matrix(c.rows, h.hypotheses, as_distribution(d))
    msgs = np.zeros(c.size, dtype=np.int64)
    for f in range(c.size):
        good = [i for i, v in enumerate(dist[f]) if v <= eps]
        if not good:
            raise ValueError(f"concept {c.names[f]} has no hypothesis within {eps}")
        msgs[f] = good[0]
    return OneWayProtocol.deterministic(msgs, h.hypotheses)


def fixed_dist_error(p: OneWayProtocol, c: ConceptClass, d):
    """max over f of the d-average error on Alice input f."""
    d = as_distribution(d)
    err, den = error_matrix(p, EvalProblem.from_class(c))
    if den is not None and d.is_exact:
        dn, dd = d.int_weights()
        per = [sum(int(a) * int(b) for a, b in zip(row, dn)) for row in err]
        return Fraction(max(per), den * dd)
    probs = err.astype(np.float64) / (1.0 if den is None else den)
    return float((probs @ d.probs).max())


def protocol_to_det_rep(p: OneWayProtocol) -> DetRepresentation:
    """h_m(x) is the majority of Bob's outputs over his coins; ties go to 0."""
    if p.flavor == "public_coin" and p.bob.shape[2] > 1:
        raise ValueError("needs a private-coin (or deterministic) protocol")
    if p.bob_coins.is_exact:
        nums, den = p.bob_coins.int_weights()
        ones = np.tensordot(p.bob.astype(nums.dtype), nums.ravel(), axes=([2], [0]))
        rows = (2 * ones > den).astype(np.uint8)
    else:
        ones = np.tensordot(p.bob.astype(np.float64), p.bob_coins.probs.ravel(), axes=([2], [0]))
        rows = (ones > 0.5).astype(np.uint8)
    used = np.unique(p.alice)
    return DetRepresentation.unique(rows[used], [f"m{m}" for m in used])


# ---------------------------------------------------------------- covers and packings


@dataclass(frozen=True)
class CoverResult:
    rep: DetRepresentation
    indices: tuple
    optimal: bool
    size: int
    drdim: float

    def to_json(self) -> dict:
        return {"size": self.size, "drdim": self.drdim, "optimal": self.optimal,
                "indices": list(self.indices), "rep": self.rep.to_json()}


def _pool(c: ConceptClass, proper: bool) -> np.ndarray:
    if proper:
        if c.size > MAX_POOL:
            raise CapExceeded(f"candidate pool above {MAX_POOL}")
        return c.rows
    n = c.domain_size
    if n > 16:
        raise CapExceeded("improper pool needs at most 16 points")
    idx = np.arange(1 << n)
    return ((idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1).astype(np.uint8)


def _cover_sets(c: ConceptClass, pool: np.ndarray, d, eps) -> list[int]:
    if c.size * len(pool) * c.domain_size > (1 << 26):
        raise CapExceeded("distance table too large")
    dist = distance_matrix(pool, c.rows, d)
    close = np.vectorize(lambda v: v <= eps, otypes=[bool])(dist)
    return [sum(1 << int(j) for j in np.flatnonzero(row)) for row in close]


def _greedy_cover(sets: list[int], universe: int) -> list[int]:
    chosen, left = [], universe
    while left:
        best = max(range(len(sets)), key=lambda i: (bin(sets[i] & left).count("1"), -i))
        chosen.append(best)
        left &= ~sets[best]
    return chosen


def _exact_cover(sets: list[int], universe: int, budget: int) -> list[int] | None:
    """Minimum set cover by branch and bound; None when the node budget runs out."""
    # drop candidates dominated by an earlier or larger one
    order = sorted(range(len(sets)), key=lambda i: (-bin(sets[i]).count("1"), i))
    kept = []
    for i in order:
        if sets[i] and not any((sets[i] | sets[j]) == sets[j] for j in kept):
            kept.append(i)
    covers_of: dict[int, list[int]] = {}
    for i in kept:
        s = sets[i]
        while s:
            low = s & -s
            covers_of.setdefault(low.bit_length() - 1, []).append(i)
            s ^= low
    best = _greedy_cover(sets, universe)
    max_size = max(bin(sets[i]).count("1") for i in kept)
    nodes = 0

    def rec(left: int, chosen: list[int]):
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            raise _Budget
        if not left:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        need = -(-bin(left).count("1") // max_size)
        if len(chosen) + need >= len(best):
            return
        # branch on the uncovered element with the fewest options
        elem, opts = None, None
        s = left
        while s:
            low = s & -s
            e = low.bit_length() - 1
            o = covers_of[e]
            if opts is None or len(o) < len(opts):
                elem, opts = e, o
            s ^= low
        for i in sorted(opts, key=lambda i: -bin(sets[i] & left).count("1")):
            chosen.append(i)
            rec(left & ~sets[i], chosen)
            chosen.pop()

    try:
        rec(universe, [])
    except _Budget:
        return None
    return best


class _Budget(Exception):
    pass


def min_cover(c: ConceptClass, d, eps, proper: bool = True, allow_greedy: bool = False,
              node_budget: int = BB_NODE_BUDGET) -> CoverResult:
    """Smallest H from the candidate pool with every concept within eps of some h under d.

    The pool is the class itself when proper, otherwise every row over the
    domain (exact only up to four points). Without allow_greedy, oversized
    instances raise CapExceeded; with it, a greedy cover is returned and
    flagged as not optimal.
    """
    d = as_distribution(d)
    if d.size != c.domain_size:
        raise ValueError("distribution must cover the class's domain")
    exact_ok = proper or c.domain_size <= MAX_IMPROPER_EXACT_POINTS
    if not exact_ok and not allow_greedy:
        raise CapExceeded(f"exact improper covers need at most {MAX_IMPROPER_EXACT_POINTS} points")
    pool = _pool(c, proper)
    sets = _cover_sets(c, pool, d, eps)
    universe = (1 << c.size) - 1
    chosen = _exact_cover(sets, universe, node_budget) if exact_ok else None
    optimal = chosen is not None
    if chosen is None:
        if not allow_greedy:
            raise CapExceeded("branch and bound exceeded its node budget")
        chosen = _greedy_cover(sets, universe)
    chosen = sorted(chosen)
    names = [c.names[i] for i in chosen] if proper else ["".join(map(str, pool[i])) for i in chosen]
    rep = DetRepresentation(pool[chosen], tuple(names))
    return CoverResult(rep, tuple(chosen), optimal, len(chosen), math.log2(len(chosen)))


def is_cover(h: DetRepresentation, c: ConceptClass, d, eps) -> bool:
    ok, _ = _covered(h, c, d, eps)
    return bool(ok.all())


@dataclass(frozen=True)
class PackingReport:
    packing: tuple
    packing_size: int
    is_cover: bool
    log_packing: float
    cover_size: int | None
    log_cover: float | None
    cover_optimal: bool | None
    duality: dict | None

    def to_json(self) -> dict:
        return {"packing": list(self.packing), "packing_size": self.packing_size,
                "packing_is_cover": self.is_cover, "log2_packing": self.log_packing,
                "cover_size": self.cover_size, "log2_cover": self.log_cover,
                "cover_optimal": self.cover_optimal, "duality": self.duality}


def greedy_packing(c: ConceptClass, d, eps) -> list[int]:
    """Scan concepts in index order, keeping each one farther than eps from all kept so far."""
    dist = distance_matrix(c.rows, c.rows, as_distribution(d))
    kept: list[int] = []
    for i in range(c.size):
        if all(dist[i, j] > eps for j in kept):
            kept.append(i)
    return kept


def max_packing_and_duality(c: ConceptClass, d, eps, delta=0, rep: ProbRepresentation | None = None,
                            with_cover: bool = True) -> PackingReport:
    """Greedy maximal eps-packing, its cover check, and the expected-size accounting.

    For a representation that (eps/2, delta)-represents c under d, every
    packing member needs its own nearby hypothesis, so
    E|H| >= (1 - delta)|P| and max log|H| >= log|P| - log(1/(1 - delta)).
    """
    d = as_distribution(d)
    P = greedy_packing(c, d, eps)
    cover_ok = is_cover(DetRepresentation(c.rows[P]), c, d, eps)
    cov = min_cover(c, d, eps, proper=True, allow_greedy=True) if with_cover else None
    duality = None
    if rep is not None:
        half = Fraction(eps) / 2 if not isinstance(eps, float) else eps / 2
        represents = check_rep_fixed_dist(rep, c, d, half, delta).passed
        w = rep.probs.weights.ravel()
        expected = sum(p * h.size for p, h in zip(w, rep.support))
        need = (1 - delta) * len(P)
        bound = math.log2(len(P)) + math.log2(1 - float(delta)) if delta < 1 else -math.inf
        duality = {
            "represents_at_half_eps": represents,
            "expected_size": str(expected) if isinstance(expected, Fraction) else float(expected),
            "required_expected_size": str(need) if isinstance(need, Fraction) else float(need),
            "max_log_size": rep.max_log_size,
            "log_bound": bound,
            "holds": (not represents) or (expected >= need and rep.max_log_size >= bound - 1e-12),
        }
    return PackingReport(tuple(P), len(P), cover_ok, math.log2(len(P)),
                         None if cov is None else cov.size, None if cov is None else cov.drdim,
                         None if cov is None else cov.optimal, duality)
