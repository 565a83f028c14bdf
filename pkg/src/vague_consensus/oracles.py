"""Independent reformulations of the belief-pair consensus, used for testing.

Neither function shares arithmetic with :func:`vague_consensus.belief.consensus_belief`:

* :func:`consensus_belief_enum_oracle` builds the 3x3 joint probability table
  of the two truth-value marginals and pushes every cell through the
  truth-level consensus table.
* :func:`ds_union_combine_oracle` treats each pair as a Dempster-Shafer mass
  function on subsets of {0, 1} and applies the union combination rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vague_consensus.belief import (
    TruthValue,
    _pair_arrays,
    _wrap,
    consensus_truth,
)

TRUE_SET = frozenset({1})
FALSE_SET = frozenset({0})
BOTH_SET = frozenset({0, 1})


@dataclass(frozen=True)
class MassFunction:
    m_true: float
    m_false: float
    m_both: float

    def __post_init__(self):
        masses = (self.m_true, self.m_false, self.m_both)
        if min(masses) < -1e-12 or max(masses) > 1 + 1e-12:
            raise ValueError(f"masses must lie in [0, 1]: {masses}")
        if abs(sum(masses) - 1.0) > 1e-12:
            raise ValueError(f"masses must sum to 1: {masses}")

    @classmethod
    def from_pair(cls, lower: float, upper: float) -> "MassFunction":
        return cls(lower, 1.0 - upper, upper - lower)

    def to_pair(self) -> tuple[float, float]:
        return self.belief(TRUE_SET), self.plausibility(TRUE_SET)

    def mass(self, subset: frozenset) -> float:
        return {TRUE_SET: self.m_true, FALSE_SET: self.m_false, BOTH_SET: self.m_both}.get(subset, 0.0)

    def belief(self, subset: frozenset) -> float:
        return sum(self.mass(s) for s in (TRUE_SET, FALSE_SET, BOTH_SET) if s <= subset)

    def plausibility(self, subset: frozenset) -> float:
        return sum(self.mass(s) for s in (TRUE_SET, FALSE_SET, BOTH_SET) if s & subset)


def union_set_combination(a: frozenset, b: frozenset) -> frozenset:
    return a & b if a & b else a | b


def ds_union_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    out = {TRUE_SET: 0.0, FALSE_SET: 0.0, BOTH_SET: 0.0}
    for a in out:
        for b in out:
            out[union_set_combination(a, b)] += m1.mass(a) * m2.mass(b)
    return MassFunction(out[TRUE_SET], out[FALSE_SET], out[BOTH_SET])


def _marginals(a: np.ndarray) -> dict:
    lo, up = a[..., 0], a[..., 1]
    return {TruthValue.TRUE: lo, TruthValue.BORDERLINE: up - lo, TruthValue.FALSE: 1.0 - up}


def consensus_belief_enum_oracle(b1, b2):
    a1, a2 = _pair_arrays(b1, b2)
    w1, w2 = _marginals(a1), _marginals(a2)
    cell = {v: np.zeros(a1.shape[:-1]) for v in TruthValue}
    for x, px in w1.items():
        for y, py in w2.items():
            cell[consensus_truth(x, y)] += px * py
    lower = cell[TruthValue.TRUE]
    upper = cell[TruthValue.TRUE] + cell[TruthValue.BORDERLINE]
    return _wrap(np.stack([lower, upper], axis=-1), b1)


def ds_union_combine_oracle(b1, b2):
    a1, a2 = _pair_arrays(b1, b2)

    def masses(a):
        lo, up = a[..., 0], a[..., 1]
        return {TRUE_SET: lo, FALSE_SET: 1.0 - up, BOTH_SET: up - lo}

    m1, m2 = masses(a1), masses(a2)
    out = {s: np.zeros(a1.shape[:-1]) for s in m1}
    for a, ma in m1.items():
        for b, mb in m2.items():
            out[union_set_combination(a, b)] += ma * mb
    bel = out[TRUE_SET]
    pl = out[TRUE_SET] + out[BOTH_SET]
    return _wrap(np.stack([bel, pl], axis=-1), b1)


__all__ = [
    "MassFunction",
    "consensus_belief_enum_oracle",
    "ds_union_combine",
    "ds_union_combine_oracle",
    "union_set_combination",
]
