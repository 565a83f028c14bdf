"""Three-valued truth, belief pairs and the consensus operator.

A proposition is true (1), borderline (1/2) or false (0). An agent's belief
about a proposition is a pair ``(lower, upper)``: the probability that it is
true, and the probability that it is not false. The borderline probability
is ``upper - lower``.

The functions taking beliefs accept either a :class:`BeliefState` or a float
array of shape ``(..., n, 2)``; arrays come back as arrays so that large
batches can be pushed through in one call.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from vague_consensus import _kernels

TOL = _kernels.TOL


class DimensionError(ValueError):
    """Operands disagree on the number of propositions."""


class InvalidWorldError(ValueError):
    """A world valuation contains a borderline truth value."""


class TruthValue(enum.Enum):
    FALSE = 0.0
    BORDERLINE = 0.5
    TRUE = 1.0

    def __lt__(self, other):
        if not isinstance(other, TruthValue):
            return NotImplemented
        return self.value < other.value

    def __le__(self, other):
        if not isinstance(other, TruthValue):
            return NotImplemented
        return self.value <= other.value

    def __gt__(self, other):
        if not isinstance(other, TruthValue):
            return NotImplemented
        return self.value > other.value

    def __ge__(self, other):
        if not isinstance(other, TruthValue):
            return NotImplemented
        return self.value >= other.value

    def __float__(self):
        return self.value


F, B, T = TruthValue.FALSE, TruthValue.BORDERLINE, TruthValue.TRUE

CONSENSUS_TABLE = {
    (T, T): T, (T, B): T, (T, F): B,
    (B, T): T, (B, B): B, (B, F): F,
    (F, T): B, (F, B): F, (F, F): F,
}

Valuation = tuple  # tuple[TruthValue, ...]


def as_truth(x) -> TruthValue:
    if isinstance(x, TruthValue):
        return x
    return TruthValue(float(x))


def as_valuation(values: Iterable) -> Valuation:
    v = tuple(as_truth(x) for x in values)
    if not v:
        raise DimensionError("a valuation needs at least one proposition")
    return v


def consensus_truth(a, b) -> TruthValue:
    return CONSENSUS_TABLE[as_truth(a), as_truth(b)]


def consensus_valuation(v1: Sequence, v2: Sequence) -> Valuation:
    """Apply the truth-level consensus to each proposition independently."""
    v1, v2 = as_valuation(v1), as_valuation(v2)
    if len(v1) != len(v2):
        raise DimensionError(f"valuations of length {len(v1)} and {len(v2)}")
    return tuple(consensus_truth(a, b) for a, b in zip(v1, v2))


@dataclass(frozen=True)
class BeliefPair:
    """Lower and upper belief in a single proposition.

    Values within 1e-12 of the feasible region are clamped onto it; anything
    further out raises ``ValueError``.
    """

    lower: float
    upper: float

    def __post_init__(self):
        lower, upper = _kernels.settle_pair(float(self.lower), float(self.upper))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def p_true(self) -> float:
        return self.lower

    @property
    def p_borderline(self) -> float:
        return self.upper - self.lower

    @property
    def p_false(self) -> float:
        return 1.0 - self.upper

    @classmethod
    def from_truth(cls, value) -> "BeliefPair":
        """Certain belief in a single truth value: 0 -> (0,0), 1/2 -> (0,1), 1 -> (1,1)."""
        value = as_truth(value)
        return {F: cls(0.0, 0.0), B: cls(0.0, 1.0), T: cls(1.0, 1.0)}[value]


@dataclass(frozen=True)
class BeliefState:
    pairs: tuple

    def __post_init__(self):
        pairs = tuple(p if isinstance(p, BeliefPair) else BeliefPair(*p) for p in self.pairs)
        if not pairs:
            raise DimensionError("a belief state needs at least one proposition")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def of(cls, *pairs) -> "BeliefState":
        return cls(tuple(pairs))

    @classmethod
    def vague(cls, n: int) -> "BeliefState":
        """The fully vague state ``((0,1), ..., (0,1))``; identity for consensus."""
        return cls(((0.0, 1.0),) * n)

    @classmethod
    def from_valuation(cls, values: Iterable) -> "BeliefState":
        return cls(tuple(BeliefPair.from_truth(x) for x in values))

    @classmethod
    def from_array(cls, arr) -> "BeliefState":
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise DimensionError(f"expected an (n, 2) array, got shape {arr.shape}")
        return cls(tuple(map(tuple, arr.tolist())))

    def to_array(self) -> np.ndarray:
        return np.array([(p.lower, p.upper) for p in self.pairs], dtype=float)

    def __array__(self, dtype=None, copy=None):
        return self.to_array() if dtype is None else self.to_array().astype(dtype)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i) -> BeliefPair:
        return self.pairs[i]

    @property
    def is_crisp(self) -> bool:
        return all(p.upper - p.lower == 0.0 for p in self.pairs)

    @property
    def is_certain(self) -> bool:
        return all((p.lower, p.upper) in ((0.0, 0.0), (0.0, 1.0), (1.0, 1.0)) for p in self.pairs)


BeliefLike = Union[BeliefState, np.ndarray, Sequence]


def _arr(b: BeliefLike) -> np.ndarray:
    arr = b.to_array() if isinstance(b, BeliefState) else np.asarray(b, dtype=float)
    if arr.ndim < 2 or arr.shape[-1] != 2:
        raise DimensionError(f"expected shape (..., n, 2), got {arr.shape}")
    return arr


def _pair_arrays(b1: BeliefLike, b2: BeliefLike):
    a1, a2 = _arr(b1), _arr(b2)
    if a1.shape != a2.shape:
        raise DimensionError(f"belief shapes differ: {a1.shape} vs {a2.shape}")
    return a1, a2


def _wrap(result: np.ndarray, like: BeliefLike):
    return BeliefState.from_array(result) if isinstance(like, BeliefState) else result


def consensus_belief(b1: BeliefLike, b2: BeliefLike):
    """Combine two beliefs proposition by proposition.

    Per proposition, with ``L``/``U`` the lower/upper values::

        lower' = L1*U2 + U1*L2 - L1*L2
        upper' = L1 + L2 + U1*U2 - U1*L2 - L1*U2

    The result is exactly symmetric in its arguments, and the vague pair
    (0, 1) is an exact identity.
    """
    a1, a2 = _pair_arrays(b1, b2)
    a1 = np.ascontiguousarray(a1)
    a2 = np.ascontiguousarray(a2)
    out = np.empty_like(a1)
    lo = np.empty(a1.shape[:-1])
    up = np.empty(a1.shape[:-1])
    _kernels.combine_many(
        a1[..., 0].ravel(), a1[..., 1].ravel(), a2[..., 0].ravel(), a2[..., 1].ravel(),
        lo.reshape(-1), up.reshape(-1),
    )
    out[..., 0] = lo
    out[..., 1] = up
    return _wrap(out, b1)


def vagueness(b: BeliefLike):
    """Mean borderline probability across propositions."""
    a = _arr(b)
    return _scalar(np.mean(a[..., 1] - a[..., 0], axis=-1))


def _h(p):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0.0, -p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)


def entropy(b: BeliefLike):
    """Mean base-2 Shannon entropy of the per-proposition truth-value marginals.

    Zero-probability terms contribute nothing. Bounded by ``log2(3)``.
    """
    a = _arr(b)
    lo, up = a[..., 0], a[..., 1]
    return _scalar(np.mean(_h(lo) + _h(up - lo) + _h(1.0 - up), axis=-1))


def inconsistency(b1: BeliefLike, b2: BeliefLike):
    """Probability of a direct true/false clash, averaged over propositions."""
    a1, a2 = _pair_arrays(b1, b2)
    l1, u1, l2, u2 = a1[..., 0], a1[..., 1], a2[..., 0], a2[..., 1]
    return _scalar(np.mean(l1 * (1.0 - u2) + (1.0 - u1) * l2, axis=-1))


def world_array(truth) -> np.ndarray:
    """Boolean world valuation as a float array of 0.0/1.0."""
    if isinstance(truth, np.ndarray) and truth.dtype != object:
        w = truth.astype(float)
    else:
        w = np.array([as_truth(x).value for x in truth], dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise DimensionError("world must be a non-empty 1-D valuation")
    if not np.all((w == 0.0) | (w == 1.0)):
        raise InvalidWorldError("world valuation must be Boolean (no borderline values)")
    return w


def payoff(b: BeliefLike, truth) -> float:
    """Expected reward of a belief against a Boolean world; lies in ``[-n, n]``."""
    a = _arr(b)
    w = world_array(truth)
    if a.shape[-2] != w.size:
        raise DimensionError(f"belief has {a.shape[-2]} propositions, world has {w.size}")
    f = 2.0 * w - 1.0
    return _scalar(np.sum(f * (a[..., 0] + a[..., 1] - 1.0), axis=-1))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x
