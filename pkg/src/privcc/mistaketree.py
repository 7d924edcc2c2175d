"""Mistake trees, exact Littlestone dimension, the halfspace tree and the AugIndex embedding."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

import numpy as np

from .concepts import ConceptClass, grid_points, make_builtin
from .errors import CapExceeded


@dataclass(frozen=True)
class Leaf:
    concept: int


@dataclass(frozen=True)
class Node:
    point: int
    left: "Tree"
    right: "Tree"


Tree = Union[Leaf, Node]


@dataclass(frozen=True)
class MistakeTree:
    root: Tree

    @property
    def depth(self) -> int:
        def rec(t):
            return 0 if isinstance(t, Leaf) else 1 + max(rec(t.left), rec(t.right))
        return rec(self.root)

    @property
    def is_complete(self) -> bool:
        depths = {len(path) for path, _ in self.leaves()}
        return len(depths) == 1

    def leaves(self) -> list[tuple[tuple[int, ...], int]]:
        """(path of 0/1 branch choices, concept) for every leaf, left to right."""
        out = []

        def rec(t, path):
            if isinstance(t, Leaf):
                out.append((path, t.concept))
            else:
                rec(t.left, path + (0,))
                rec(t.right, path + (1,))
        rec(self.root, ())
        return out

    def to_json(self) -> dict:
        def rec(t):
            if isinstance(t, Leaf):
                return {"leaf": t.concept}
            return {"point": t.point, "left": rec(t.left), "right": rec(t.right)}
        return rec(self.root)

    @classmethod
    def from_json(cls, doc: dict) -> "MistakeTree":
        def rec(d):
            if "leaf" in d:
                return Leaf(int(d["leaf"]))
            return Node(int(d["point"]), rec(d["left"]), rec(d["right"]))
        return cls(rec(doc))


@dataclass(frozen=True)
class TreeCheck:
    valid: bool
    first_violation: dict | None = None


def validate_tree(tree: MistakeTree, cls: ConceptClass) -> TreeCheck:
    """Check that every leaf under a node sits on the side given by its label there."""
    def check_indices(t):
        if isinstance(t, Leaf):
            if not 0 <= t.concept < cls.size:
                raise IndexError(f"concept index {t.concept} out of range")
        else:
            if not 0 <= t.point < cls.domain_size:
                raise IndexError(f"point index {t.point} out of range")
            check_indices(t.left)
            check_indices(t.right)
    check_indices(tree.root)

    def leaves_of(t):
        if isinstance(t, Leaf):
            return [t.concept]
        return leaves_of(t.left) + leaves_of(t.right)

    def rec(t, path):
        if isinstance(t, Leaf):
            return None
        for side, sub in ((0, t.left), (1, t.right)):
            for c in leaves_of(sub):
                if cls.rows[c, t.point] != side:
                    return {"path": list(path), "point": t.point, "concept": c,
                            "side": side, "label": int(cls.rows[c, t.point])}
        return rec(t.left, path + (0,)) or rec(t.right, path + (1,))

    bad = rec(tree.root, ())
    return TreeCheck(bad is None, bad)


class LDimBudgetExceeded(CapExceeded):
    pass


def ldim(cls: ConceptClass, budget: int = 1 << 20) -> tuple[int, MistakeTree]:
    """Exact Littlestone dimension with a complete witness tree.

    Iterative deepening on the question "does a complete tree of depth k
    exist for concept subset S", memoized per subset (bitmask) as known
    lower and upper bounds. A subset of size n cannot exceed floor(log2 n).
    """
    masks = cls.point_masks()
    full = (1 << cls.size) - 1
    lo: dict[int, int] = {}
    hi: dict[int, int] = {}
    arg: dict[tuple[int, int], int] = {}

    def split(S: int, k: int) -> int | None:
        need = 1 << (k - 1)
        seen = set()
        for x, m in enumerate(masks):
            s1 = S & m
            s0 = S ^ s1
            if s1.bit_count() < need or s0.bit_count() < need:
                continue
            key = min(s0, s1)
            if key in seen:
                continue
            seen.add(key)
            small, large = (s0, s1) if s0.bit_count() <= s1.bit_count() else (s1, s0)
            if at_least(small, k - 1) and at_least(large, k - 1):
                return x
        return None

    def at_least(S: int, k: int) -> bool:
        if k <= 0:
            return True
        if S.bit_count() < (1 << k) or hi.get(S, k) < k:
            return False
        if lo.get(S, 0) >= k:
            return True
        if len(hi) + len(lo) >= budget:
            raise LDimBudgetExceeded(f"more than {budget} concept subsets visited")
        x = split(S, k)
        if x is None:
            hi[S] = k - 1
            return False
        lo[S] = k
        arg[(S, k)] = x
        return True

    value = 0
    while at_least(full, value + 1):
        value += 1

    def build(S: int, depth: int) -> Tree:
        if depth == 0:
            return Leaf((S & -S).bit_length() - 1)
        x = arg.get((S, depth))
        if x is None:
            x = split(S, depth)
        s1 = S & masks[x]
        return Node(x, build(S ^ s1, depth - 1), build(s1, depth - 1))

    return value, MistakeTree(build(full, value))


def _grid_dot_values(w, b: int) -> list[int]:
    pts = grid_points(b, len(w)) if len(w) else np.zeros((1, 0), dtype=np.int64)
    return [int(v) for v in pts @ np.asarray(w, dtype=np.int64)]


def collision_free_halfspace(w_prime, theta_prime: int, b: int) -> tuple[tuple[int, ...], int]:
    """Integer representation of [w'.x >= theta'] with pairwise-distinct dot products on {0..2^b-1}^d.

    Weights are w_i = 2^(bd+1) w'_i + 2^(b(i-1)+1), so the low-order part of
    w.x spells out x in base 2^b (times two) and cannot collide. The
    threshold 2^(d+1) theta' - 2^d is used when it still represents the
    same set, otherwise the always-valid 2^(bd+1) theta' - 1.
    """
    w_prime = [int(v) for v in w_prime]
    d = len(w_prime)
    if d < 1:
        raise ValueError("need at least one coordinate")
    if b < 0:
        raise ValueError("b must be non-negative")
    scale = 1 << (b * d + 1)
    w = tuple(scale * w_prime[i] + (1 << (b * i + 1)) for i in range(d))
    pts = grid_points(b, d)
    target = [v >= theta_prime for v in _grid_dot_values(w_prime, b)]
    dots = [int(v) for v in pts.astype(object) @ np.asarray(w, dtype=object)]
    theta = scale * theta_prime - (1 << (b * d))
    if [v >= theta for v in dots] != target:
        theta = scale * theta_prime - 1
    limit = (1 << 63) - 1
    if max([abs(theta)] + [abs(v) for v in w] + [abs(v) for v in dots]) > limit:
        raise OverflowError("collision-free weights exceed 64-bit integers")
    assert [v >= theta for v in dots] == target
    assert len(set(dots)) == len(dots)
    return w, theta


def halfspace_tree_depth(d: int, b: int) -> int:
    return (d * (d - 1) // 2 + 1) * b


def _bst(lo: int, hi: int, query, leaf):
    """Balanced tree over thresholds j in [lo, hi): right side holds j <= query index."""
    if hi - lo == 1:
        return leaf(lo)
    half = (hi - lo) // 2
    q = lo + half - 1
    return ("node", query(q), _bst(lo + half, hi, query, leaf), _bst(lo, lo + half, query, leaf))


def build_halfspace_tree(d: int, b: int, cls: ConceptClass | None = None) -> MistakeTree:
    """Complete mistake tree for HS_b^d of depth (d(d-1)/2 + 1) b, built dimension by dimension.

    Leaves index concepts of make_builtin("halfspace", b=b, d=d) (or cls).
    Each leaf of the (k-1)-dimensional tree is replaced by a binary search
    over the thresholds w'.y >= z_j placed on the slice x_k = 1, using the
    collision-free form of the lexicographically smallest enumerated
    representation.
    """
    if d < 1 or b < 1:
        raise ValueError("d and b must be positive")
    if halfspace_tree_depth(d, b) > 14:
        raise CapExceeded("tree depth above 14")
    if cls is None:
        cls = make_builtin("halfspace", b=b, d=d)
    side = 1 << b

    # dimension 1: thresholds [y >= j] on {0..2^b-1}; leaves carry (w, theta)
    tree = _bst(0, side, lambda q: (q,), lambda j: ("leaf", (1,), j))
    for k in range(2, d + 1):
        lower = make_builtin("halfspace", b=b, d=k - 1)
        pts = [tuple(map(int, q)) for q in grid_points(b, k - 1)]

        def expand(t):
            if t[0] == "node":
                return ("node", t[1] + (0,), expand(t[2]), expand(t[3]))
            _, w, theta = t
            table = np.array([int(np.dot(w, y) >= theta) for y in pts], dtype=np.uint8)
            idx = lower.index_of(table)
            if idx < 0:
                raise RuntimeError("leaf halfspace missing from the enumerated class")
            par = lower.params[idx]
            cw, ctheta = collision_free_halfspace(par[:-1], par[-1], b)
            order = sorted(range(len(pts)), key=lambda i: int(np.dot(cw, pts[i])))
            zs = [int(np.dot(cw, pts[i])) for i in order]
            return _bst(0, len(pts), lambda q: pts[order[q]] + (1,),
                        lambda j: ("leaf", cw + (ctheta - zs[j],), ctheta))
        tree = expand(tree)

    pts = [tuple(map(int, q)) for q in grid_points(b, d)]
    point_index = {q: i for i, q in enumerate(pts)}

    def finish(t) -> Tree:
        if t[0] == "node":
            return Node(point_index[t[1]], finish(t[2]), finish(t[3]))
        _, w, theta = t
        table = np.array([int(np.dot(w, y) >= theta) for y in pts], dtype=np.uint8)
        idx = cls.index_of(table)
        if idx < 0:
            raise RuntimeError("leaf halfspace missing from the enumerated class")
        return Leaf(idx)

    out = MistakeTree(finish(tree))
    check = validate_tree(out, cls)
    if not check.valid:
        raise RuntimeError(f"constructed tree is invalid: {check.first_violation}")
    return out


@dataclass(frozen=True)
class AugIndexEmbedding:
    depth: int
    concept_map: dict
    point_map: dict

    def to_json(self) -> dict:
        key = lambda bits: "".join(map(str, bits))
        return {
            "depth": self.depth,
            "concept_map": {key(k): v for k, v in sorted(self.concept_map.items())},
            "point_map": {key(k): v for k, v in sorted(self.point_map.items(), key=lambda kv: (len(kv[0]), kv[0]))},
        }


def augindex_embedding(tree: MistakeTree, cls: ConceptClass) -> AugIndexEmbedding:
    """Maps x in {0,1}^d to the leaf on x's path and each prefix to the point queried there."""
    check = validate_tree(tree, cls)
    if not check.valid:
        raise ValueError(f"tree is invalid: {check.first_violation}")
    if not tree.is_complete:
        raise ValueError("tree is not complete")
    depth = tree.depth
    concept_map, point_map = {}, {}
    if depth == 0:
        return AugIndexEmbedding(0, concept_map, point_map)
    for x in itertools.product((0, 1), repeat=depth):
        node = tree.root
        for i, bit in enumerate(x):
            point_map[x[:i]] = node.point
            node = node.right if bit else node.left
        concept_map[x] = node.concept
    for x, c in concept_map.items():
        for i in range(depth):
            if cls.rows[c, point_map[x[:i]]] != x[i]:
                raise AssertionError(f"embedding fails at x={x}, i={i + 1}")
    return AugIndexEmbedding(depth, concept_map, point_map)
