"""Path-integral (Suzuki-Trotter) state space and its stationary weight.

A configuration is an n x L array of bits: row j is the periodic worldline
of qubit j across L imaginary-time slices, column k is the n-bit time slice
x_k.  The unnormalized stationary weight of the quantum-to-classical mapping
is

    pi(x) ~ exp(-(beta*s/L) * sum_k f(x_k)) * tanh(omega)^(total jumps)

with omega = beta*(1-s)/L and "jumps" counting nearest-slice disagreements
per worldline under the periodic boundary x_{L+1} = x_1.  The overall
cosh(omega)^(nL) factor is dropped here (it cancels in all transition
ratios); the oracle module reinstates it when absolute partition values are
compared against the trace form.

Configurations carry two caches so that Metropolis deltas are O(1): the
Hamming weight of every slice and the jump count of every worldline.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .costs import SpikeIndicator, SymmetricCost

__all__ = [
    "PathIntegralSystem",
    "WorldlineConfiguration",
    "default_trotter_number",
    "log_weight",
    "log_weight_delta_flip",
    "spike_time",
]


def default_trotter_number(n: int, beta: float) -> int:
    """Trotter number ceil(n^2 * beta^(3/2)).

    This is the slice count at which the Trotter error parameter is O(1/n);
    practical runs may pass any smaller L to the system constructor.
    """
    if n < 1 or beta <= 0:
        raise ValueError("need n >= 1 and beta > 0")
    return int(math.ceil(n * n * beta**1.5))


@dataclass(frozen=True)
class PathIntegralSystem:
    """Immutable parameters of the Trotterized annealing system.

    omega = beta*(1-s)/L is derived.  s < 1 is required: at s = 1 the bond
    weight tanh(omega) vanishes and single-flip moves disconnect the state
    space.
    """

    cost: SymmetricCost
    L: int
    beta: float
    s: float

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.s < 1.0:
            raise ValueError(f"s must lie in [0, 1), got {self.s}")

    @property
    def n(self) -> int:
        return self.cost.n

    @property
    def omega(self) -> float:
        return self.beta * (1.0 - self.s) / self.L

    @property
    def log_tanh_omega(self) -> float:
        return math.log(math.tanh(self.omega))

    @property
    def cost_scale(self) -> float:
        """Coefficient beta*s/L multiplying each slice cost."""
        return self.beta * self.s / self.L

    def with_s(self, s: float) -> "PathIntegralSystem":
        return PathIntegralSystem(cost=self.cost, L=self.L, beta=self.beta, s=s)


class WorldlineConfiguration:
    """Mutable n x L spin state with slice-weight and jump-count caches."""

    __slots__ = ("spins", "slice_weights", "jump_counts")

    def __init__(self, spins: np.ndarray):
        spins = np.ascontiguousarray(spins, dtype=np.int8)
        if spins.ndim != 2:
            raise ValueError("spins must be a 2-D (n, L) array")
        if not np.isin(spins, (0, 1)).all():
            raise ValueError("spins must be 0/1")
        self.spins = spins
        self.rebuild_caches()

    @property
    def n(self) -> int:
        return self.spins.shape[0]

    @property
    def L(self) -> int:
        return self.spins.shape[1]

    def rebuild_caches(self):
        self.slice_weights = self.spins.sum(axis=0).astype(np.int64)
        rolled = np.roll(self.spins, -1, axis=1)
        self.jump_counts = (self.spins != rolled).sum(axis=1).astype(np.int64)

    def caches_consistent(self) -> bool:
        sw = self.spins.sum(axis=0)
        jc = (self.spins != np.roll(self.spins, -1, axis=1)).sum(axis=1)
        return bool((sw == self.slice_weights).all() and (jc == self.jump_counts).all())

    def copy(self) -> "WorldlineConfiguration":
        return WorldlineConfiguration(self.spins.copy())

    def flip(self, j: int, k: int):
        """Flip spin (j, k) and update both caches in O(1)."""
        old = self.spins[j, k]
        new = 1 - old
        self.spins[j, k] = new
        self.slice_weights[k] += int(new) - int(old)
        L = self.L
        if L > 1:
            left = self.spins[j, (k - 1) % L]
            right = self.spins[j, (k + 1) % L]
            # each adjacent bond toggles between agree and disagree
            self.jump_counts[j] += (int(new != left) - int(old != left)) + (
                int(new != right) - int(old != right)
            )

    @staticmethod
    def all_zeros(n: int, L: int) -> "WorldlineConfiguration":
        return WorldlineConfiguration(np.zeros((n, L), dtype=np.int8))

    @staticmethod
    def from_integer(code: int, n: int, L: int) -> "WorldlineConfiguration":
        """Decode an nL-bit integer, row-major (worldline by worldline)."""
        bits = [(code >> (n * L - 1 - i)) & 1 for i in range(n * L)]
        return WorldlineConfiguration(np.array(bits, dtype=np.int8).reshape(n, L))

    def to_integer(self) -> int:
        code = 0
        for b in self.spins.reshape(-1):
            code = (code << 1) | int(b)
        return code

    def to_json(self) -> str:
        packed = np.packbits(self.spins.reshape(-1))
        return json.dumps({"n": self.n, "L": self.L, "spins_hex": packed.tobytes().hex()})

    @staticmethod
    def from_json(text: str) -> "WorldlineConfiguration":
        obj = json.loads(text)
        n, L = obj["n"], obj["L"]
        packed = np.frombuffer(bytes.fromhex(obj["spins_hex"]), dtype=np.uint8)
        bits = np.unpackbits(packed)[: n * L]
        return WorldlineConfiguration(bits.astype(np.int8).reshape(n, L))


def log_weight(sys: PathIntegralSystem, x: WorldlineConfiguration) -> float:
    """Log of the unnormalized stationary weight of a configuration."""
    if x.n != sys.n or x.L != sys.L:
        raise ValueError("configuration shape does not match system")
    table = sys.cost.table
    cost_term = -sys.cost_scale * float(table[x.slice_weights].sum())
    return cost_term + float(x.jump_counts.sum()) * sys.log_tanh_omega


def log_weight_delta_flip(sys: PathIntegralSystem, x: WorldlineConfiguration, site) -> float:
    """log pi(flip(x, j, k)) - log pi(x), in O(1) from the caches.

    The flip changes the slice-k cost term and the two imaginary-time bonds
    adjacent to (j, k); for L = 1 both bonds are the trivial self-bond and
    only the cost term moves.
    """
    j, k = site
    n, L = x.n, x.L
    if not (0 <= j < n and 0 <= k < L):
        raise ValueError(f"site {site} out of range for shape ({n}, {L})")
    table = sys.cost.table
    old = int(x.spins[j, k])
    w = int(x.slice_weights[k])
    dcost = -sys.cost_scale * (table[w + 1 - 2 * old] - table[w])
    if L == 1:
        return float(dcost)
    left = int(x.spins[j, (k - 1) % L])
    right = int(x.spins[j, (k + 1) % L])
    breaks_before = int(old != left) + int(old != right)
    djumps = 2 - 2 * breaks_before
    return float(dcost + djumps * sys.log_tanh_omega)


def spike_time(x: WorldlineConfiguration, ind: SpikeIndicator) -> int:
    """Number of time slices whose Hamming weight lies in the spike window."""
    return int(ind(x.slice_weights).sum())
