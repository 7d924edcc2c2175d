"""Finite concept classes, finite distributions, built-in families and VC dimension.

A concept class is a boolean matrix: rows are concepts, columns are domain
points. Rows are deduplicated unless the class is flagged as a multiset.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from .errors import CapExceeded

# Largest materialized matrix (concepts x points) a built-in may produce.
MAX_CELLS = 1 << 26
# Largest number of integer weight vectors swept for halfspaces.
MAX_WEIGHT_VECTORS = 1 << 21


class FiniteDistribution:
    """Non-negative weights over a finite index set of any shape.

    Weights given as ints or Fractions are kept exact; anything else is held
    as float64.
    """

    def __init__(self, weights, tol: float = 1e-12):
        items = list(np.asarray(weights, dtype=object).ravel())
        shape = np.shape(np.asarray(weights, dtype=object))
        if not items:
            raise ValueError("distribution needs at least one outcome")
        exact = all(isinstance(w, Rational) for w in items)
        if exact:
            vals = [Fraction(w) for w in items]
            if any(v < 0 for v in vals):
                raise ValueError("negative weight")
            if abs(sum(vals) - 1) > tol:
                raise ValueError(f"weights sum to {float(sum(vals))}, not 1")
            arr = np.empty(len(vals), dtype=object)
            arr[:] = vals
            self._weights = arr.reshape(shape)
        else:
            arr = np.asarray([float(w) for w in items], dtype=np.float64)
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ValueError("weights must be finite and non-negative")
            if abs(arr.sum() - 1.0) > tol:
                raise ValueError(f"weights sum to {arr.sum()!r}, not 1")
            self._weights = arr.reshape(shape)
        self._weights.setflags(write=False)
        self.is_exact = exact
        self._ints = None

    @classmethod
    def uniform(cls, shape) -> "FiniteDistribution":
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = math.prod(shape)
        arr = np.empty(n, dtype=object)
        arr[:] = [Fraction(1, n)] * n
        return cls(arr.reshape(shape))

    @classmethod
    def point_mass(cls, n: int, i: int) -> "FiniteDistribution":
        w = [Fraction(0)] * n
        w[i] = Fraction(1)
        return cls(w)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def shape(self) -> tuple:
        return self._weights.shape

    @property
    def size(self) -> int:
        return self._weights.size

    @property
    def probs(self) -> np.ndarray:
        """Float64 view of the weights."""
        return self._weights.astype(np.float64)

    def int_weights(self) -> tuple[np.ndarray, int]:
        """Integer numerators over a common denominator (exact weights only)."""
        if not self.is_exact:
            raise ValueError("float weights have no exact integer form")
        if self._ints is None:
            flat = self._weights.ravel()
            den = 1
            for w in flat:
                den = den * w.denominator // math.gcd(den, w.denominator)
            nums = [int(w * den) for w in flat]
            dtype = np.int64 if den < (1 << 62) else object
            self._ints = (np.asarray(nums, dtype=dtype).reshape(self.shape), den)
        return self._ints

    def mass(self, mask) -> Fraction | float:
        """Total weight of the entries where mask is true."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.shape:
            raise ValueError(f"mask shape {mask.shape} does not match {self.shape}")
        if self.is_exact:
            nums, den = self.int_weights()
            return Fraction(int(nums[mask].sum()), den)
        return float(self._weights[mask].sum())

    def marginal(self, axis: int) -> "FiniteDistribution":
        """Marginal over the given axis (2-D joints)."""
        other = tuple(i for i in range(self._weights.ndim) if i != axis)
        return FiniteDistribution(self._weights.sum(axis=other))

    def support(self) -> np.ndarray:
        return np.flatnonzero(self._weights.ravel() != 0)

    def to_json(self) -> list:
        flat = [str(w) if self.is_exact else float(w) for w in self._weights.ravel()]
        return np.asarray(flat, dtype=object).reshape(self.shape).tolist()

    def __repr__(self) -> str:
        return f"FiniteDistribution(shape={self.shape}, exact={self.is_exact})"


def as_distribution(d) -> FiniteDistribution:
    return d if isinstance(d, FiniteDistribution) else FiniteDistribution(d)


@dataclass(frozen=True, eq=False)
class ConceptClass:
    rows: np.ndarray
    names: tuple
    points: tuple
    params: tuple
    kind: str = "custom"
    multiset: bool = False

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.uint8)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError("a concept class needs a 2-D matrix with at least one row")
        if np.any(rows > 1):
            raise ValueError("rows must be 0/1")
        if len(self.names) != rows.shape[0] or len(self.params) != rows.shape[0]:
            raise ValueError("names/params must match the number of concepts")
        if len(self.points) != rows.shape[1]:
            raise ValueError("points must match the domain size")
        if not self.multiset:
            if len({r.tobytes() for r in rows}) != rows.shape[0]:
                raise ValueError("duplicate rows in a class not flagged as multiset")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows, names=None, points=None, params=None, kind="custom",
                  multiset=False) -> "ConceptClass":
        """Build a class, keeping the first occurrence of every distinct row."""
        rows = np.asarray(rows, dtype=np.uint8)
        if rows.ndim == 1:
            rows = rows[None, :]
        m, n = rows.shape
        names = list(names) if names is not None else [f"c{i}" for i in range(m)]
        params = list(params) if params is not None else [(i,) for i in range(m)]
        points = tuple(points) if points is not None else tuple(range(n))
        if not multiset:
            keep, seen = [], set()
            for i, r in enumerate(rows):
                key = r.tobytes()
                if key not in seen:
                    seen.add(key)
                    keep.append(i)
            rows = rows[keep]
            names = [names[i] for i in keep]
            params = [params[i] for i in keep]
        return cls(rows, tuple(names), points, tuple(params), kind, multiset)

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    @property
    def domain_size(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.size

    def index_of(self, row) -> int:
        """Index of the concept equal to row, or -1."""
        lookup = self.__dict__.get("_lookup")
        if lookup is None:
            lookup = {}
            for i, r in enumerate(self.rows):
                lookup.setdefault(r.tobytes(), i)
            object.__setattr__(self, "_lookup", lookup)
        return lookup.get(np.asarray(row, dtype=np.uint8).tobytes(), -1)

    def point_masks(self) -> list[int]:
        """For each point x, the bitmask of concepts labelling x with 1."""
        masks = []
        for x in range(self.domain_size):
            col = np.flatnonzero(self.rows[:, x])
            masks.append(sum(1 << int(i) for i in col))
        return masks

    def subclass(self, indices) -> "ConceptClass":
        idx = list(indices)
        return ConceptClass(self.rows[idx], tuple(self.names[i] for i in idx), self.points,
                            tuple(self.params[i] for i in idx), self.kind, self.multiset)

    def to_json(self) -> dict:
        return {
            "domain_size": self.domain_size,
            "points": [list(p) if isinstance(p, tuple) else p for p in self.points],
            "concepts": [
                {"name": name, "bits": "".join(map(str, row.tolist()))}
                for name, row in zip(self.names, self.rows)
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ConceptClass":
        n = int(doc["domain_size"])
        rows, names = [], []
        for c in doc["concepts"]:
            bits = c["bits"]
            if len(bits) != n:
                raise ValueError(f"concept {c['name']} has {len(bits)} bits, expected {n}")
            rows.append([int(ch) for ch in bits])
            names.append(c["name"])
        points = tuple(tuple(p) if isinstance(p, list) else p for p in doc.get("points", range(n)))
        return cls.from_rows(np.asarray(rows, dtype=np.uint8).reshape(len(rows), n), names, points)


def _check_cells(m: int, n: int) -> None:
    if m * n > MAX_CELLS:
        raise CapExceeded(f"class would have {m} x {n} cells, above the cap {MAX_CELLS}")


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def grid_points(b: int, d: int) -> np.ndarray:
    """All points of {0..2^b-1}^d in lexicographic order, shape (2^(bd), d)."""
    side = np.arange(1 << b)
    mesh = np.meshgrid(*([side] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1).astype(np.int64)


def _point_class(b: int) -> ConceptClass:
    n = 1 << b
    _check_cells(n, n)
    rows = np.eye(n, dtype=np.uint8)
    return ConceptClass(rows, tuple(f"point_{z}" for z in range(n)), tuple(range(n)),
                        tuple((z,) for z in range(n)), "point")


def _threshold_class(b: int) -> ConceptClass:
    n = 1 << b
    _check_cells(n, n)
    y = np.arange(n)
    rows = (y[None, :] >= y[:, None]).astype(np.uint8)
    return ConceptClass(rows, tuple(f"t_{x}" for x in range(n)), tuple(range(n)),
                        tuple((x,) for x in range(n)), "threshold")


def _line_class(p: int) -> ConceptClass:
    _check_cells(p * p, p * p)
    xs = np.repeat(np.arange(p), p)
    ys = np.tile(np.arange(p), p)
    a = np.repeat(np.arange(p), p)
    c = np.tile(np.arange(p), p)
    rows = ((a[:, None] * xs[None, :] + c[:, None]) % p == ys[None, :]).astype(np.uint8)
    points = tuple((int(x), int(y)) for x, y in zip(xs, ys))
    params = tuple((int(i), int(j)) for i, j in zip(a, c))
    names = tuple(f"line_{i}_{j}" for i, j in params)
    return ConceptClass(rows, names, points, params, "line")


def _box_class(b: int, d: int) -> ConceptClass:
    side = 1 << b
    pts = grid_points(b, d)
    intervals = [(s, t) for s in range(side) for t in range(s, side)]
    m = len(intervals) ** d + 1
    _check_cells(m, len(pts))
    entries = []
    for combo in itertools.product(intervals, repeat=d):
        s = tuple(iv[0] for iv in combo)
        t = tuple(iv[1] for iv in combo)
        entries.append(s + t)
    # the empty box: lexicographically smallest (s, t) with some s_i > t_i
    empty = (0,) * (d - 1) + (1,) + (0,) * d
    entries.append(empty)
    entries.sort()
    rows = np.zeros((len(entries), len(pts)), dtype=np.uint8)
    for i, par in enumerate(entries):
        if par == empty:
            continue
        s = np.asarray(par[:d])
        t = np.asarray(par[d:])
        rows[i] = np.all((pts >= s) & (pts <= t), axis=1)
    names = tuple("box_" + "_".join(map(str, par)) for par in entries)
    return ConceptClass(rows, names, tuple(tuple(map(int, q)) for q in pts), tuple(entries), "box")


def halfspace_weight_bound(b: int, d: int) -> int:
    return 3 * (1 << (b * (d + 1)))


def _halfspace_class(b: int, d: int) -> ConceptClass:
    pts = grid_points(b, d)
    n = len(pts)
    if n > 64:
        raise CapExceeded("halfspace enumeration supports at most 64 grid points")
    W = halfspace_weight_bound(b, d)
    n_w = (2 * W + 1) ** d
    if n_w > MAX_WEIGHT_VECTORS:
        raise CapExceeded(f"halfspace sweep needs {n_w} weight vectors, above {MAX_WEIGHT_VECTORS}")
    theta_lo = -W * d * ((1 << b) - 1)
    theta_hi = -theta_lo
    bitval = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
    found_tables, found_first = [], []
    chunk = max(1, (1 << 22) // (n * n))
    for start in range(0, n_w, chunk):
        widx = np.arange(start, min(n_w, start + chunk), dtype=np.int64)
        # decode the weight vector in lexicographic order (first coordinate slowest)
        w = np.empty((len(widx), d), dtype=np.int64)
        rem = widx.copy()
        for j in range(d - 1, -1, -1):
            w[:, j] = rem % (2 * W + 1) - W
            rem //= 2 * W + 1
        dots = w @ pts.T
        ge = dots[:, None, :] >= dots[:, :, None]  # [w, threshold point, point]
        tables = (ge.astype(np.uint64) * bitval).sum(axis=2, dtype=np.uint64)
        empty_ok = dots.max(axis=1) + 1 <= theta_hi
        cand = np.concatenate([tables, np.where(empty_ok, 0, tables[:, 0])[:, None]], axis=1)
        owner = np.repeat(widx, n + 1)
        uniq, first = np.unique(cand.ravel(), return_index=True)
        found_tables.append(uniq)
        found_first.append(owner[first])
    tables = np.concatenate(found_tables)
    owners = np.concatenate(found_first)
    order = np.lexsort((owners, tables))
    tables, owners = tables[order], owners[order]
    keep = np.ones(len(tables), dtype=bool)
    keep[1:] = tables[1:] != tables[:-1]
    tables, owners = tables[keep], owners[keep]
    entries = []
    for table, widx in zip(tables.tolist(), owners.tolist()):
        w, rem = [0] * d, widx
        for j in range(d - 1, -1, -1):
            w[j] = rem % (2 * W + 1) - W
            rem //= 2 * W + 1
        dots = pts @ np.asarray(w, dtype=np.int64)
        mask = np.array([(table >> x) & 1 for x in range(n)], dtype=bool)
        if mask.all():
            theta = theta_lo
        else:
            theta = int(dots[~mask].max()) + 1
        entries.append((tuple(w) + (theta,), mask))
    entries.sort(key=lambda e: e[0])
    rows = np.asarray([e[1] for e in entries], dtype=np.uint8)
    params = tuple(e[0] for e in entries)
    names = tuple("hs_" + "_".join(map(str, par)) for par in params)
    return ConceptClass(rows, names, tuple(tuple(map(int, q)) for q in pts), params, "halfspace")


_KIND_ALIASES = {"thr": "threshold", "hs": "halfspace", "points": "point"}


@lru_cache(maxsize=64)
def _builtin(kind: str, b: int, d: int, p: int) -> ConceptClass:
    if kind == "point":
        return _point_class(b)
    if kind == "threshold":
        return _threshold_class(b)
    if kind == "line":
        return _line_class(p)
    if kind == "box":
        return _box_class(b, d)
    return _halfspace_class(b, d)


def make_builtin(kind: str, b: int | None = None, d: int | None = None,
                 p: int | None = None) -> ConceptClass:
    """Point_b, Thr_b, Line_p, BOX_b^d or HS_b^d as an explicit class.

    Thresholds are t_x(y) = [y >= x]; lines are y = a*x + b over Z_p with
    point index x*p + y; boxes and halfspaces live on {0..2^b-1}^d in
    lexicographic point order. Halfspaces are [w.x >= theta] found by an
    integer sweep and named by their lexicographically smallest (w, theta).
    """
    kind = _KIND_ALIASES.get(kind, kind)
    if kind not in ("point", "threshold", "line", "box", "halfspace"):
        raise ValueError(f"unknown class kind {kind!r}")
    if kind == "line":
        if p is None or not is_prime(int(p)):
            raise ValueError(f"p must be prime, got {p}")
        if p > 251:
            raise CapExceeded("p must be at most 251")
        return _builtin(kind, 0, 0, int(p))
    if b is None or b < 1:
        raise ValueError("b must be a positive integer")
    if kind in ("point", "threshold"):
        if b > 16:
            raise CapExceeded("b must be at most 16")
        return _builtin(kind, int(b), 1, 0)
    if d is None or d < 1:
        raise ValueError("d must be a positive integer")
    if b * d > 12:
        raise CapExceeded("b*d must be at most 12")
    return _builtin(kind, int(b), int(d), 0)


def vc_dimension(cls: ConceptClass) -> tuple[int, tuple[int, ...]]:
    """Largest shattered subset size, with the lexicographically first witness.

    Shattered sets are closed under taking subsets, so candidates of size k
    are grown from shattered sets of size k-1.
    """
    n = cls.domain_size
    if n > 24:
        raise CapExceeded("vc_dimension supports domains of at most 24 points")
    rows = cls.rows.astype(np.int64)
    best: tuple[int, ...] = ()
    level = [()]
    k = 0
    while level and (1 << (k + 1)) <= cls.size:
        k += 1
        prev = set(level)
        cands = set()
        for s in level:
            start = s[-1] + 1 if s else 0
            for x in range(start, n):
                t = s + (x,)
                if all(t[:i] + t[i + 1:] in prev for i in range(k)):
                    cands.add(t)
        weights = 1 << np.arange(k, dtype=np.int64)
        level = []
        for t in sorted(cands):
            codes = rows[:, list(t)] @ weights
            if len(np.unique(codes)) == 1 << k:
                level.append(t)
        if level:
            best = level[0]
    return len(best), best


def sauer_bound(n: int, k: int) -> int:
    return sum(math.comb(n, i) for i in range(k + 1))


def xor_class(a: ConceptClass, b: ConceptClass) -> ConceptClass:
    """All pointwise XORs f ^ g, deduplicated in (f, g) order."""
    if a.domain_size != b.domain_size:
        raise ValueError("classes must share the domain")
    _check_cells(a.size * b.size, a.domain_size)
    rows = (a.rows[:, None, :] ^ b.rows[None, :, :]).reshape(-1, a.domain_size)
    names = [f"{fa}^{fb}" for fa in a.names for fb in b.names]
    params = [(i, j) for i in range(a.size) for j in range(b.size)]
    return ConceptClass.from_rows(rows, names, a.points, params, kind="xor")


def disagreement(f, h, d) -> Fraction | float:
    """Exact mass of the points where f and h differ."""
    f = np.asarray(f, dtype=np.uint8)
    h = np.asarray(h, dtype=np.uint8)
    d = as_distribution(d)
    if f.shape != h.shape or f.shape != d.shape:
        raise ValueError("rows and distribution must have equal length")
    return d.mass(f != h)


def distance_matrix(a_rows, b_rows, d) -> np.ndarray:
    """Disagreement between every row of a_rows and every row of b_rows.

    Exact distributions give an object array of Fractions.
    """
    d = as_distribution(d)
    diff = (np.asarray(a_rows, dtype=np.uint8)[:, None, :]
            != np.asarray(b_rows, dtype=np.uint8)[None, :, :])
    if d.is_exact:
        nums, den = d.int_weights()
        tot = diff.astype(nums.dtype) @ nums if nums.dtype != object else diff.astype(object) @ nums
        out = np.empty(tot.shape, dtype=object)
        out.ravel()[:] = [Fraction(int(v), den) for v in tot.ravel()]
        return out
    return diff.astype(np.float64) @ d.probs
