"""Semialgebraic norms used to cut links out of a germ.

Every supported norm is a maximum over coordinate blocks: a block is either a
single weighted coordinate (``w * |x_i|``) or a group of coordinates measured
with an even p-norm.  The level set ``{N(x) = t}`` is then a union of smooth
pieces, one per block (two per single coordinate, one for each sign), which is
what the samplers project onto.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = ["NormSpec", "LevelPiece"]


@dataclass(frozen=True)
class LevelPiece:
    """One smooth piece ``value(x) = 0`` of a level set, plus the mask of
    points for which this piece is the active one."""

    kind: str  # "coord" or "pnorm"
    index: tuple[int, ...]
    weight: float = 1.0
    sign: int = 1
    p: int = 2

    def value_grad(self, X: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
        X = np.atleast_2d(X)
        grad = np.zeros_like(X)
        if self.kind == "coord":
            (i,) = self.index
            val = self.sign * self.weight * X[:, i] - t
            grad[:, i] = self.sign * self.weight
            return val, grad
        sub = X[:, self.index]
        nrm = _pnorm(sub, self.p)
        safe = np.where(nrm > 0, nrm, 1.0)
        g = sub ** (self.p - 1) / safe[:, None] ** (self.p - 1)
        grad[:, self.index] = g
        return nrm - t, grad


def _pnorm(sub: np.ndarray, p: int) -> np.ndarray:
    if p == 2:
        return np.sqrt(np.sum(sub * sub, axis=1))
    # scale first; x**p underflows quickly for small coordinates
    m = np.max(np.abs(sub), axis=1)
    safe = np.where(m > 0, m, 1.0)
    return m * np.sum((sub / safe[:, None]) ** p, axis=1) ** (1.0 / p)


@dataclass(frozen=True)
class NormSpec:
    """A norm on R^n given as a maximum over coordinate blocks.

    Use the constructors rather than the raw fields:

    >>> NormSpec.euclidean()
    >>> NormSpec.max_v([1, 1, 2])      # max(|x|, |y|, 2|z|)
    >>> NormSpec.one_p(2, split=1)     # max(|x_0|, ||(x_1..x_n)||_p)
    >>> NormSpec.b_one(4, split=2)     # max(||(x, y)||_b, |z|)
    """

    variant: str
    weights: tuple[float, ...] | None = None
    p: int | None = None
    split: int | None = None
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.variant not in ("euclidean", "max_v", "one_p", "b_one"):
            raise ValueError(f"unknown norm variant {self.variant!r}")
        if self.variant == "max_v":
            if not self.weights or any(w <= 0 for w in self.weights):
                raise ValueError("max_v weights must be strictly positive")
        if self.variant in ("one_p", "b_one"):
            if self.p is None or self.p < 2 or self.p % 2:
                raise ValueError(f"{self.variant} needs an even exponent >= 2, got {self.p}")
            if self.split is None or self.split < 1:
                raise ValueError("split index must be >= 1")

    @classmethod
    def euclidean(cls) -> "NormSpec":
        return cls("euclidean")

    @classmethod
    def max_v(cls, v: Sequence[float]) -> "NormSpec":
        return cls("max_v", weights=tuple(float(w) for w in v))

    @classmethod
    def one_p(cls, p: int, split: int = 1) -> "NormSpec":
        return cls("one_p", p=int(p), split=int(split))

    @classmethod
    def b_one(cls, b: int, split: int = 2) -> "NormSpec":
        return cls("b_one", p=int(b), split=int(split))

    def label(self) -> str:
        if self.variant == "euclidean":
            return "euclidean"
        if self.variant == "max_v":
            return "max_v(" + ",".join(f"{w:g}" for w in self.weights) + ")"
        return f"{self.variant}(p={self.p},split={self.split})"

    def to_dict(self) -> dict:
        d = {"variant": self.variant}
        if self.weights is not None:
            d["weights"] = list(self.weights)
        if self.p is not None:
            d["p"] = self.p
        if self.split is not None:
            d["split"] = self.split
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NormSpec":
        w = d.get("weights")
        return cls(d["variant"], weights=tuple(w) if w is not None else None,
                   p=d.get("p"), split=d.get("split"))

    def pieces(self, n: int) -> list[LevelPiece]:
        if n in self._cache:
            return self._cache[n]
        out: list[LevelPiece] = []

        def coords(idx, weights=None):
            for k, i in enumerate(idx):
                w = 1.0 if weights is None else weights[k]
                out.append(LevelPiece("coord", (i,), w, +1))
                out.append(LevelPiece("coord", (i,), w, -1))

        if self.variant == "euclidean":
            out.append(LevelPiece("pnorm", tuple(range(n)), p=2))
        elif self.variant == "max_v":
            if len(self.weights) != n:
                raise ValueError(f"max_v has {len(self.weights)} weights for dimension {n}")
            coords(range(n), self.weights)
        elif self.variant == "one_p":
            if self.split >= n:
                raise ValueError("split index leaves an empty p-norm block")
            coords(range(self.split))
            out.append(LevelPiece("pnorm", tuple(range(self.split, n)), p=self.p))
        else:
            if self.split >= n:
                raise ValueError("split index leaves an empty max block")
            out.append(LevelPiece("pnorm", tuple(range(self.split)), p=self.p))
            coords(range(self.split, n))
        self._cache[n] = out
        return out

    def piece_values(self, X: np.ndarray) -> np.ndarray:
        """Block values, one column per piece (signed pieces report the
        signed coordinate so the argmax picks the right sign)."""
        X = np.atleast_2d(X)
        cols = []
        for pc in self.pieces(X.shape[1]):
            if pc.kind == "coord":
                cols.append(pc.sign * pc.weight * X[:, pc.index[0]])
            else:
                cols.append(_pnorm(X[:, pc.index], pc.p))
        return np.stack(cols, axis=1)

    def __call__(self, X) -> np.ndarray | float:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        vals = self.piece_values(np.atleast_2d(X)).max(axis=1)
        return float(vals[0]) if single else vals

    def active_piece(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.piece_values(X), axis=1)
