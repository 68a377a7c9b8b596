"""Hamming-symmetric cost functions.

A cost here is a function f over n-bit strings that depends only on the
Hamming weight |z|, stored as a lookup table over weights 0..n.  The main
family is the "spiked" linear ramp

    f(z) = |z| + n^alpha   if n/4 - n^zeta/2 < |z| < n/4 + n^zeta/2
    f(z) = |z|             otherwise

whose global minimum sits at |z| = 0 while the spike plants a local minimum
just above the barrier.  The plain ramp f(z) = |z| ("spikeless") is the
exactly solvable reference system used throughout the analysis modules.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SymmetricCost",
    "SpikeIndicator",
    "make_spikeless_cost",
    "make_spike_cost",
    "make_custom_cost",
    "eval_cost",
]


@dataclass(frozen=True)
class SymmetricCost:
    """Cost function over {0,1}^n depending only on Hamming weight.

    Attributes
    ----------
    n : number of bits.
    values : tuple of n+1 finite floats; values[k] is the cost of any
        string of weight k.
    kind : "spikeless", "spike" or "custom".
    alpha, zeta : spike exponents (only meaningful when kind == "spike").
    """

    n: int
    values: tuple = field(repr=False)
    kind: str = "custom"
    alpha: float | None = None
    zeta: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if len(self.values) != self.n + 1:
            raise ValueError(
                f"values must have n+1={self.n + 1} entries, got {len(self.values)}"
            )
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("cost table contains non-finite entries")
        if self.kind not in ("spikeless", "spike", "custom"):
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def table(self) -> np.ndarray:
        """Cost table as a float array of length n+1."""
        return np.asarray(self.values, dtype=np.float64)

    def __call__(self, k: int) -> float:
        return self.values[k]

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "kind": self.kind,
                "alpha": self.alpha,
                "zeta": self.zeta,
                "values": list(self.values),
            }
        )

    @staticmethod
    def from_json(text: str) -> "SymmetricCost":
        obj = json.loads(text)
        return SymmetricCost(
            n=obj["n"],
            values=tuple(obj["values"]),
            kind=obj["kind"],
            alpha=obj.get("alpha"),
            zeta=obj.get("zeta"),
        )


@dataclass(frozen=True)
class SpikeIndicator:
    """Indicator of the spike window: 1 iff n/4 - n^zeta/2 < k < n/4 + n^zeta/2."""

    n: int
    zeta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.zeta) or self.zeta < 0:
            raise ValueError(f"zeta must be finite and >= 0, got {self.zeta}")

    @property
    def lo(self) -> float:
        return self.n / 4.0 - self.n**self.zeta / 2.0

    @property
    def hi(self) -> float:
        return self.n / 4.0 + self.n**self.zeta / 2.0

    def __call__(self, k) -> np.ndarray | int:
        k = np.asarray(k)
        out = ((k > self.lo) & (k < self.hi)).astype(np.int64)
        return out if out.ndim else int(out)

    def weights(self) -> np.ndarray:
        """All Hamming weights inside the window, ascending."""
        ks = np.arange(self.n + 1)
        return ks[self(ks).astype(bool)]


def make_spikeless_cost(n: int) -> SymmetricCost:
    """The plain Hamming-weight ramp f(k) = k."""
    return SymmetricCost(n=n, values=tuple(float(k) for k in range(n + 1)), kind="spikeless")


def make_spike_cost(n: int, alpha: float, zeta: float = 0.0) -> SymmetricCost:
    """Hamming ramp with an additive n^alpha bump on the spike window.

    The window endpoints are strict inequalities; for zeta = 0 and n divisible
    by 4 the window contains the single weight n/4.  Requires n >= 4 so the
    window sits inside (0, n).
    """
    if n < 4:
        raise ValueError(f"spike cost needs n >= 4, got {n}")
    if not (math.isfinite(alpha) and math.isfinite(zeta)):
        raise ValueError("alpha and zeta must be finite")
    if zeta < 0:
        raise ValueError(f"zeta must be >= 0, got {zeta}")
    ind = SpikeIndicator(n=n, zeta=zeta)
    bump = float(n) ** alpha
    vals = tuple(float(k) + bump * ind(k) for k in range(n + 1))
    return SymmetricCost(n=n, values=vals, kind="spike", alpha=alpha, zeta=zeta)


def make_custom_cost(values) -> SymmetricCost:
    """Wrap an explicit table of n+1 costs over Hamming weights."""
    vals = tuple(float(v) for v in values)
    return SymmetricCost(n=len(vals) - 1, values=vals, kind="custom")


def _weight(z, n: int) -> int:
    if isinstance(z, str):
        if len(z) != n or set(z) - {"0", "1"}:
            raise ValueError(f"expected a {n}-bit string, got {z!r}")
        return z.count("1")
    arr = np.asarray(z)
    if arr.shape != (n,):
        raise ValueError(f"expected length-{n} bit vector, got shape {arr.shape}")
    return int(arr.sum())


def eval_cost(cost: SymmetricCost, z) -> float:
    """Evaluate the cost on a bit string (str of 0/1 or length-n 0/1 array)."""
    return cost.values[_weight(z, cost.n)]
