from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

_RANK = {"zero": 0, "point": 1, "line": 2, "table": 3}


@dataclass(frozen=True)
class Hypothesis:
    """zero, point(x, y), line y = a*x + b over Z_p^2, or an explicit truth table.

    Hypotheses are totally ordered: zero, then points by (x, y), then lines
    by (a, b), then tables by their bits.
    """

    kind: str
    params: tuple = ()
    p: int | None = None

    def __post_init__(self):
        if self.kind not in _RANK:
            raise ValueError(f"unknown hypothesis kind {self.kind!r}")
        if self.kind in ("point", "line"):
            if self.p is None:
                raise ValueError("points and lines need the modulus p")
            object.__setattr__(self, "params", tuple(int(v) % self.p for v in self.params))
        elif self.kind == "table":
            object.__setattr__(self, "params", tuple(int(v) for v in self.params))

    @classmethod
    def zero(cls, p: int | None = None) -> "Hypothesis":
        return cls("zero", (), p)

    @classmethod
    def point(cls, x: int, y: int, p: int) -> "Hypothesis":
        return cls("point", (x, y), p)

    @classmethod
    def line(cls, a: int, b: int, p: int) -> "Hypothesis":
        return cls("line", (a, b), p)

    @classmethod
    def table(cls, bits) -> "Hypothesis":
        return cls("table", tuple(int(v) for v in np.asarray(bits).ravel()))

    @classmethod
    def from_code(cls, code: int, p: int) -> "Hypothesis":
        """Inverse of .code: 0 zero, 1 + x*p + y point, 1 + p^2 + a*p + b line."""
        code = int(code)
        if code == 0:
            return cls.zero(p)
        if code <= p * p:
            return cls.point(*divmod(code - 1, p), p)
        return cls.line(*divmod(code - 1 - p * p, p), p)

    @property
    def code(self) -> int:
        if self.kind == "zero":
            return 0
        if self.kind == "point":
            return 1 + self.params[0] * self.p + self.params[1]
        if self.kind == "line":
            return 1 + self.p * self.p + self.params[0] * self.p + self.params[1]
        raise ValueError("tables have no integer code")

    def sort_key(self) -> tuple:
        return (_RANK[self.kind], self.params)

    def __lt__(self, other: "Hypothesis") -> bool:
        return self.sort_key() < other.sort_key()

    def row(self, n: int | None = None) -> np.ndarray:
        """Truth table over the domain; Z_p^2 is indexed x*p + y."""
        if self.kind == "table":
            return np.asarray(self.params, dtype=np.uint8)
        if n is None:
            if self.p is None:
                raise ValueError("domain size needed")
            n = self.p * self.p
        out = np.zeros(n, dtype=np.uint8)
        if self.kind == "point":
            out[self.params[0] * self.p + self.params[1]] = 1
        elif self.kind == "line":
            a, b = self.params
            x = np.arange(self.p)
            out[x * self.p + (a * x + b) % self.p] = 1
        return out

    def evaluate(self, idx) -> np.ndarray:
        """Labels at the given point indices."""
        idx = np.asarray(idx, dtype=np.int64)
        if self.kind == "zero":
            return np.zeros(idx.shape, dtype=np.uint8)
        if self.kind == "table":
            return np.asarray(self.params, dtype=np.uint8)[idx]
        x, y = np.divmod(idx, self.p)
        if self.kind == "point":
            return ((x == self.params[0]) & (y == self.params[1])).astype(np.uint8)
        a, b = self.params
        return ((a * x + b - y) % self.p == 0).astype(np.uint8)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "point":
            out.update(x=self.params[0], y=self.params[1], p=self.p)
        elif self.kind == "line":
            out.update(a=self.params[0], b=self.params[1], p=self.p)
        elif self.kind == "table":
            out["bits"] = "".join(map(str, self.params))
        elif self.p is not None:
            out["p"] = self.p
        return out

    def key(self) -> str:
        """Canonical serialization, used to bin outputs."""
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def evaluate_codes(codes, idx, p: int) -> np.ndarray:
    """Labels of several coded zero/point/line hypotheses at the given points, shape (h, n)."""
    codes = np.asarray(codes, dtype=np.int64)[:, None]
    idx = np.asarray(idx, dtype=np.int64)[None, :]
    x, y = np.divmod(idx, p)
    is_point = (codes >= 1) & (codes <= p * p)
    is_line = codes > p * p
    pc = np.where(is_point, codes - 1, 0)
    lc = np.where(is_line, codes - 1 - p * p, 0)
    a, b = np.divmod(lc, p)
    on_point = is_point & (idx == pc)
    on_line = is_line & ((a * x + b - y) % p == 0)
    return (on_point | on_line).astype(np.uint8)
