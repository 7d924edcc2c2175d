"""One-way two-party protocols as explicit tables.

Alice holds a row index f, Bob a column index y. A protocol stores Alice's
message for every (input, coin) pair and Bob's output bit for every
(message, input, coin) triple. Public-coin protocols share one coin index;
private-coin protocols have separate coins for each side.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .concepts import ConceptClass, FiniteDistribution, as_distribution
from .errors import CapExceeded
from .stats import clopper_pearson

FLAVORS = ("deterministic", "private_coin", "public_coin")
MAX_TABLE = 1 << 26
EXACT_COINS = 1 << 24
MAX_DP_INPUTS = 16


def _single_coin() -> FiniteDistribution:
    return FiniteDistribution([Fraction(1)])


@dataclass(frozen=True, eq=False)
class OneWayProtocol:
    flavor: str
    alice: np.ndarray
    bob: np.ndarray
    alice_coins: FiniteDistribution
    bob_coins: FiniteDistribution

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        alice = np.ascontiguousarray(self.alice, dtype=np.int64)
        bob = np.ascontiguousarray(self.bob, dtype=np.uint8)
        if alice.ndim != 2 or bob.ndim != 3:
            raise ValueError("alice must be 2-D (input, coin) and bob 3-D (message, input, coin)")
        if alice.min() < 0 or alice.max() >= bob.shape[0]:
            raise ValueError("Alice sends a message Bob has no entry for")
        if alice.shape[1] != self.alice_coins.size or bob.shape[2] != self.bob_coins.size:
            raise ValueError("coin tables and coin distributions disagree in size")
        if self.flavor == "public_coin" and alice.shape[1] != bob.shape[2]:
            raise ValueError("public coins must index both tables identically")
        if self.flavor == "deterministic" and (alice.shape[1] != 1 or bob.shape[2] != 1):
            raise ValueError("deterministic protocols have a single coin")
        alice.setflags(write=False)
        bob.setflags(write=False)
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)

    @classmethod
    def deterministic(cls, messages, outputs) -> "OneWayProtocol":
        """messages[f] is Alice's message; outputs[m, y] is Bob's answer."""
        one = _single_coin()
        return cls("deterministic", np.asarray(messages)[:, None], np.asarray(outputs)[:, :, None], one, one)

    @classmethod
    def public(cls, alice, bob, coins=None) -> "OneWayProtocol":
        coins = FiniteDistribution.uniform(np.shape(alice)[1]) if coins is None else as_distribution(coins)
        return cls("public_coin", alice, bob, coins, coins)

    @classmethod
    def private(cls, alice, bob, alice_coins=None, bob_coins=None) -> "OneWayProtocol":
        ac = FiniteDistribution.uniform(np.shape(alice)[1]) if alice_coins is None else as_distribution(alice_coins)
        bc = FiniteDistribution.uniform(np.shape(bob)[2]) if bob_coins is None else as_distribution(bob_coins)
        return cls("private_coin", alice, bob, ac, bc)

    @property
    def n_alice(self) -> int:
        return self.alice.shape[0]

    @property
    def n_bob(self) -> int:
        return self.bob.shape[1]

    @property
    def n_messages(self) -> int:
        return self.bob.shape[0]

    @property
    def cost(self) -> int:
        """Bits in the longest message Alice ever sends."""
        return int(self.alice.max()).bit_length()

    @property
    def coin_space_size(self) -> int:
        if self.flavor == "public_coin":
            return self.alice_coins.size
        return self.alice_coins.size * self.bob_coins.size

    @property
    def is_exact(self) -> bool:
        return self.alice_coins.is_exact and self.bob_coins.is_exact

    def acceptance(self) -> tuple[np.ndarray, int | None]:
        """Pr[Bob outputs 1] for every (f, y).

        Exact protocols give (integer numerators, common denominator);
        otherwise (float probabilities, None).
        """
        if self.flavor == "public_coin":
            w, den = _coin_vector(self.alice_coins)
            R = self.alice.shape[1]
            g = self.bob[self.alice, :, np.arange(R)[None, :]]  # (f, r, y)
            num = np.tensordot(g.astype(w.dtype), w, axes=([1], [0]))
            return num, den
        wa, da = _coin_vector(self.alice_coins)
        wb, db = _coin_vector(self.bob_coins)
        big = da is not None and da * db >= (1 << 62)
        if big:
            wa, wb = wa.astype(object), wb.astype(object)
        b1 = np.tensordot(self.bob.astype(wb.dtype), wb, axes=([2], [0]))  # (m, y)
        num = np.tensordot(b1[self.alice], wa, axes=([1], [0]))  # (f, y)
        return num, (None if da is None else da * db)

    def to_json(self) -> dict:
        return {
            "flavor": self.flavor,
            "cost_bits": self.cost,
            "alice": self.alice.tolist(),
            "bob": self.bob.tolist(),
            "alice_coins": self.alice_coins.to_json(),
            "bob_coins": self.bob_coins.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "OneWayProtocol":
        def dist(ws):
            return FiniteDistribution([Fraction(w) if isinstance(w, str) else w for w in ws])
        return cls(doc["flavor"], np.asarray(doc["alice"]), np.asarray(doc["bob"]),
                   dist(doc["alice_coins"]), dist(doc["bob_coins"]))


def _coin_vector(dist: FiniteDistribution):
    if dist.is_exact:
        nums, den = dist.int_weights()
        return nums.ravel(), den
    return dist.probs.ravel(), None


@dataclass(frozen=True, eq=False)
class EvalProblem:
    """A (partial) boolean function of Alice's and Bob's inputs; -1 marks entries outside the promise."""

    table: np.ndarray
    name: str = "custom"
    alice_labels: tuple = ()
    bob_labels: tuple = ()

    def __post_init__(self):
        t = np.ascontiguousarray(self.table, dtype=np.int8)
        if t.ndim != 2 or not np.isin(t, (-1, 0, 1)).all():
            raise ValueError("table must be 2-D with entries in {-1, 0, 1}")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_class(cls, c: ConceptClass) -> "EvalProblem":
        return cls(c.rows.astype(np.int8), f"eval_{c.kind}", tuple(c.names), tuple(c.points))

    @classmethod
    def augindex(cls, d: int) -> "EvalProblem":
        """Alice holds x in {0,1}^d; Bob holds (i, x_1..x_{i-1}) and must output x_i."""
        if d < 1:
            raise ValueError("d must be positive")
        xs = list(itertools.product((0, 1), repeat=d))
        bobs = [(i, pre) for i in range(1, d + 1) for pre in itertools.product((0, 1), repeat=i - 1)]
        table = np.full((len(xs), len(bobs)), -1, dtype=np.int8)
        for a, x in enumerate(xs):
            for j, (i, pre) in enumerate(bobs):
                if x[: i - 1] == pre:
                    table[a, j] = x[i - 1]
        return cls(table, f"augindex_{d}", tuple(xs), tuple(bobs))

    @property
    def shape(self) -> tuple[int, int]:
        return self.table.shape

    @property
    def promise(self) -> np.ndarray:
        return self.table >= 0

    def uniform_mu(self) -> FiniteDistribution:
        """Uniform over the entries inside the promise."""
        mask = self.promise
        n = int(mask.sum())
        w = np.empty(self.shape, dtype=object)
        w[...] = Fraction(0)
        w[mask] = Fraction(1, n)
        return FiniteDistribution(w)

    def product_mu(self, alice_dist, bob_dist) -> FiniteDistribution:
        a = as_distribution(alice_dist).weights
        b = as_distribution(bob_dist).weights
        return FiniteDistribution(np.multiply.outer(a, b))


@dataclass(frozen=True)
class ErrorReport:
    value: Fraction | float
    exact: bool
    mode: str
    cost_bits: int
    worst_pair: tuple[int, int] | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    trials: int | None = None

    def to_json(self) -> dict:
        out = {"cost_bits": self.cost_bits, "mode": self.mode}
        if self.exact and isinstance(self.value, Fraction):
            out.update(error_num=self.value.numerator, error_den=self.value.denominator)
        else:
            out.update(estimate=float(self.value), ci_low=self.ci_low, ci_high=self.ci_high)
            if self.trials is not None:
                out["trials"] = self.trials
        if self.worst_pair is not None:
            out["worst_pair"] = list(self.worst_pair)
        return out


def error_matrix(p: OneWayProtocol, g: EvalProblem) -> tuple[np.ndarray, int | None]:
    """Pr[output != g(f, y)] for every pair, as (numerators, denominator) or (floats, None)."""
    if (p.n_alice, p.n_bob) != g.shape:
        raise ValueError(f"protocol shape {(p.n_alice, p.n_bob)} does not match problem {g.shape}")
    num, den = p.acceptance()
    full = 1.0 if den is None else den
    err = np.where(g.table == 1, full - num, num)
    return err, den


def protocol_error(p: OneWayProtocol, g: EvalProblem | ConceptClass, mode: str = "worst_case",
                   mu=None, method: str = "exact", trials: int = 100_000, seed: int = 0) -> ErrorReport:
    """Worst-case or mu-distributional error, exact or by seeded Monte Carlo."""
    if isinstance(g, ConceptClass):
        g = EvalProblem.from_class(g)
    if mode not in ("worst_case", "distributional"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "distributional":
        if mu is None:
            raise ValueError("distributional mode needs mu")
        mu = as_distribution(mu)
        if mu.shape != g.shape:
            raise ValueError("mu must have the problem's shape")
    if method == "monte_carlo":
        return _mc_error(p, g, mode, mu, trials, seed)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    if p.coin_space_size > EXACT_COINS:
        raise CapExceeded("coin space above 2^24; use method='monte_carlo'")
    err, den = error_matrix(p, g)
    valid = g.promise
    if mode == "worst_case":
        masked = np.where(valid, err, -1)
        flat = int(np.argmax(masked))
        pair = tuple(int(i) for i in np.unravel_index(flat, g.shape))
        top = masked[pair]
        value = Fraction(int(top), den) if den is not None else float(top)
        return ErrorReport(value, den is not None, mode, p.cost, pair)
    if den is not None and mu.is_exact:
        mnum, mden = mu.int_weights()
        total = sum(int(a) * int(b) for a, b in zip(mnum[valid], err[valid]))
        return ErrorReport(Fraction(total, mden * den), True, mode, p.cost)
    probs = err.astype(np.float64) / (1.0 if den is None else den)
    return ErrorReport(float((mu.probs * probs)[valid].sum()), False, mode, p.cost)


def _mc_error(p: OneWayProtocol, g: EvalProblem, mode: str, mu, trials: int, seed: int) -> ErrorReport:
    if trials <= 0:
        raise ValueError("trials must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    pa = p.alice_coins.probs.ravel()
    pb = p.bob_coins.probs.ravel()

    def run(f, y, n):
        ra = rng.choice(len(pa), size=n, p=pa)
        rb = ra if p.flavor == "public_coin" else rng.choice(len(pb), size=n, p=pb)
        msg = p.alice[f, ra]
        return p.bob[msg, y, rb]

    if mode == "distributional":
        flat = mu.probs.ravel()
        pairs = rng.choice(len(flat), size=trials, p=flat)
        f, y = np.unravel_index(pairs, g.shape)
        out = run(f, y, trials)
        wrong = int(np.sum((out != g.table[f, y]) & (g.table[f, y] >= 0)))
        lo, hi = clopper_pearson(wrong, trials)
        return ErrorReport(wrong / trials, False, mode, p.cost, None, lo, hi, trials)
    best = None
    for f, y in zip(*np.nonzero(g.promise)):
        out = run(np.full(trials, f), np.full(trials, y), trials)
        wrong = int(np.sum(out != g.table[f, y]))
        if best is None or wrong > best[0]:
            best = (wrong, (int(f), int(y)))
    lo, hi = clopper_pearson(best[0], trials)
    return ErrorReport(best[0] / trials, False, mode, p.cost, best[1], lo, hi, trials)


class _PartitionDP:
    """Optimal partitions of Alice's inputs into at most 2^B blocks, for B = 0, 1, ..."""

    def __init__(self, g: EvalProblem, mu):
        n_alice, n_bob = g.shape
        if n_alice > MAX_DP_INPUTS:
            raise CapExceeded(f"at most {MAX_DP_INPUTS} Alice inputs for the exact search")
        mu = as_distribution(mu)
        if mu.shape != g.shape:
            raise ValueError("mu must have the problem's shape")
        self.exact = mu.is_exact
        if self.exact:
            nums, den = mu.int_weights()
            if den >= (1 << 53):
                raise CapExceeded("mu's common denominator is too large for exact search")
            w = nums.astype(np.float64)
            self.den = den
        else:
            w = mu.probs
            self.den = None
        self.n = n_alice
        size = 1 << n_alice
        m1 = np.where(g.table == 1, w, 0.0)
        m0 = np.where(g.table == 0, w, 0.0)
        M1 = np.zeros((size, n_bob))
        M0 = np.zeros((size, n_bob))
        for i in range(n_alice):
            M1[1 << i: 2 << i] = M1[: 1 << i] + m1[i]
            M0[1 << i: 2 << i] = M0[: 1 << i] + m0[i]
        self.M1, self.M0 = M1, M0
        self.levels = [np.minimum(M1, M0).sum(axis=1)]
        self.args: list[np.ndarray] = []

    @property
    def max_budget(self) -> int:
        return (self.n - 1).bit_length()

    def error(self, budget: int):
        budget = min(budget, self.max_budget)
        while len(self.levels) <= budget:
            G, A = kernels.minplus_square(self.levels[-1])
            self.levels.append(G)
            self.args.append(A)
        v = self.levels[budget][(1 << self.n) - 1]
        return Fraction(int(round(v)), self.den) if self.exact else float(v)

    def blocks(self, budget: int) -> list[int]:
        budget = min(budget, self.max_budget)
        self.error(budget)

        def rec(S, level):
            if level == 0:
                return [S]
            T = int(self.args[level - 1][S])
            rest = S ^ T
            return rec(T, level - 1) + (rec(rest, level - 1) if rest else [])
        return sorted(rec((1 << self.n) - 1, budget), key=lambda S: S & -S)


def optimal_distributional_protocol(g: EvalProblem | ConceptClass, mu, budget_bits: int):
    """Best deterministic one-way protocol with at most budget_bits bits under mu.

    Returns (protocol, exact error). Bob answers the mu-weighted majority of
    each (block, y) cell, with ties going to 0.
    """
    if isinstance(g, ConceptClass):
        g = EvalProblem.from_class(g)
    if budget_bits < 0:
        raise ValueError("budget must be non-negative")
    dp = _PartitionDP(g, mu)
    err = dp.error(budget_bits)
    blocks = dp.blocks(budget_bits)
    msgs = np.zeros(g.shape[0], dtype=np.int64)
    outs = np.zeros((len(blocks), g.shape[1]), dtype=np.uint8)
    for k, S in enumerate(blocks):
        for f in range(g.shape[0]):
            if (S >> f) & 1:
                msgs[f] = k
        outs[k] = dp.M1[S] > dp.M0[S]
    return OneWayProtocol.deterministic(msgs, outs), err


def dist_cc(g: EvalProblem | ConceptClass, mu, eps) -> int:
    """Fewest bits a deterministic one-way protocol needs for error at most eps under mu."""
    if isinstance(g, ConceptClass):
        g = EvalProblem.from_class(g)
    dp = _PartitionDP(g, mu)
    for budget in range(dp.max_budget + 1):
        if dp.error(budget) <= eps:
            return budget
    raise AssertionError("singleton blocks always reach zero error")


def _product(dist: FiniteDistribution, k: int) -> FiniteDistribution:
    w = dist.weights.ravel()
    out = w
    for _ in range(k - 1):
        out = np.multiply.outer(out, w).ravel()
    return FiniteDistribution(out)


def _digits(count: int, base: int, k: int) -> np.ndarray:
    """Base-`base` digits of 0..count-1, most significant first, shape (count, k)."""
    idx = np.arange(count, dtype=np.int64)
    return np.stack([(idx // base ** (k - 1 - i)) % base for i in range(k)], axis=1)


def amplify(p: OneWayProtocol, k: int) -> OneWayProtocol:
    """k independent runs; Bob outputs the majority of the k answers."""
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be a positive odd integer")
    if k == 1:
        return p
    M = p.n_messages
    RA = p.alice_coins.size
    RB = p.bob_coins.size
    if M ** k * p.n_bob * RB ** k > MAX_TABLE or p.n_alice * RA ** k > MAX_TABLE:
        raise CapExceeded("amplified tables exceed the size cap")
    ra = _digits(RA ** k, RA, k)
    rb = ra if p.flavor == "public_coin" else _digits(RB ** k, RB, k)
    sig = _digits(M ** k, M, k)
    alice = np.zeros((p.n_alice, RA ** k), dtype=np.int64)
    for i in range(k):
        alice = alice * M + p.alice[:, ra[:, i]]
    votes = np.zeros((M ** k, p.n_bob, RB ** k), dtype=np.int16)
    for i in range(k):
        votes += p.bob[sig[:, i]][:, :, rb[:, i]]
    bob = (votes > k // 2).astype(np.uint8)
    if p.flavor == "public_coin":
        return OneWayProtocol.public(alice, bob, _product(p.alice_coins, k))
    flavor = p.flavor
    return OneWayProtocol(flavor, alice, bob, _product(p.alice_coins, k), _product(p.bob_coins, k))


def binomial_tail(q, k: int):
    """Pr[Binomial(k, q) >= (k+1)/2]."""
    return sum(math.comb(k, j) * q ** j * (1 - q) ** (k - j) for j in range((k + 1) // 2, k + 1))


def newman_sparsify(p: OneWayProtocol, m: int, seed: int) -> OneWayProtocol:
    """Replace the public coin by m sampled seeds that Alice picks privately and announces.

    With uniform coins and m no larger than the coin space, the seeds are
    drawn without repetition (so m equal to the space keeps every seed once);
    otherwise i.i.d. from the coin distribution. The message is
    (seed index, original message), which costs ceil(log2 m) extra bits.
    """
    if m <= 0:
        raise ValueError("m must be positive")
    if p.flavor != "public_coin":
        raise ValueError("sparsification needs a public-coin protocol")
    R = p.alice_coins.size
    rng = np.random.Generator(np.random.Philox(seed))
    probs = p.alice_coins.probs.ravel()
    if m <= R and np.all(probs == probs[0]):
        seeds = np.sort(rng.choice(R, size=m, replace=False))
    else:
        seeds = rng.choice(R, size=m, replace=True, p=probs)
    M = p.n_messages
    if m * M * p.n_bob > MAX_TABLE:
        raise CapExceeded("sparsified table exceeds the size cap")
    j = np.arange(m)
    alice = j[None, :] * M + p.alice[:, seeds]
    bob = np.transpose(p.bob[:, :, seeds], (2, 0, 1)).reshape(m * M, p.n_bob)[:, :, None]
    return OneWayProtocol.private(alice, bob, FiniteDistribution.uniform(m), _single_coin())


def equality_protocol(b: int, k: int) -> OneWayProtocol:
    """Inner-product hashing for Eval of Point_b.

    Seed r packs k vectors r_j in {0,1}^b. Alice (holding z) sends the bits
    <z, r_j> mod 2; Bob accepts iff <x, r_j> gives the same bits.
    """
    if b < 1 or k < 1:
        raise ValueError("b and k must be positive")
    if b * k > 24:
        raise CapExceeded("b*k must be at most 24")
    n, R = 1 << b, 1 << (b * k)
    if (1 << k) * n * R > MAX_TABLE:
        raise CapExceeded("equality tables exceed the size cap")
    v = np.arange(n, dtype=np.int64)[:, None]
    r = np.arange(R, dtype=np.int64)[None, :]
    code = np.zeros((n, R), dtype=np.int64)
    for j in range(k):
        rj = (r >> (b * j)) & (n - 1)
        code |= (np.bitwise_count(v & rj) & 1).astype(np.int64) << j
    bob = (code[None, :, :] == np.arange(1 << k)[:, None, None]).astype(np.uint8)
    return OneWayProtocol.public(code, bob)
