"""Randomised self-checks of the belief algebra against its oracles.

Used by the ``verify`` command; each check reports pass/fail and the worst
deviation it saw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from vague_consensus.belief import (
    BeliefState,
    consensus_belief,
    consensus_valuation,
    entropy,
    inconsistency,
    payoff,
    vagueness,
)
from vague_consensus.engine import evidence_update
from vague_consensus.oracles import consensus_belief_enum_oracle, ds_union_combine_oracle

ORACLE_TOL = 1e-12
CERTAIN_PAIRS = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def random_beliefs(rng, count, n):
    """``count`` random beliefs of ``n`` propositions, shape ``(count, n, 2)``.

    A fifth of the pairs are snapped to the corners (0,0), (0,1), (1,1) and to
    the crisp diagonal so the boundary cases are exercised.
    """
    arr = np.sort(rng.random((count, n, 2)), axis=-1)
    corner = rng.random((count, n)) < 0.1
    arr[corner] = CERTAIN_PAIRS[rng.integers(3, size=int(corner.sum()))]
    crisp = (rng.random((count, n)) < 0.1) & ~corner
    arr[crisp, 1] = arr[crisp, 0]
    return arr


def _batches(rng, cases):
    per_n = -(-cases // 5)
    for n in range(1, 6):
        yield n, random_beliefs(rng, per_n, n), random_beliefs(rng, per_n, n)


def check_example() -> Check:
    got = consensus_belief(BeliefState.of((0.6, 0.8)), BeliefState.of((0.4, 0.7)))[0]
    err = max(abs(got.lower - 0.5), abs(got.upper - 0.82))
    return Check("operator example (0.6,0.8).(0.4,0.7) = (0.5,0.82)", err <= ORACLE_TOL, f"max err {err:.2e}")


def check_oracles(rng, cases) -> Check:
    worst = 0.0
    for _, a, b in _batches(rng, cases):
        fast = consensus_belief(a, b)
        for oracle in (consensus_belief_enum_oracle, ds_union_combine_oracle):
            worst = max(worst, float(np.max(np.abs(fast - oracle(a, b)))))
        worst = max(worst, float(np.max(np.abs(consensus_belief_enum_oracle(a, b) - ds_union_combine_oracle(a, b)))))
    return Check(f"triple-oracle agreement ({cases} pairs)", worst <= ORACLE_TOL, f"max err {worst:.2e}")


def check_algebra(rng, cases) -> list:
    closure = commutative = identity = True
    for n, a, b in _batches(rng, cases):
        c = consensus_belief(a, b)
        closure &= bool(np.all((0.0 <= c[..., 0]) & (c[..., 0] <= c[..., 1]) & (c[..., 1] <= 1.0)))
        commutative &= bool(np.array_equal(c, consensus_belief(b, a)))
        vague = np.broadcast_to(np.array([0.0, 1.0]), a.shape).copy()
        identity &= bool(np.array_equal(consensus_belief(a, vague), a) and np.array_equal(consensus_belief(vague, a), a))
    return [
        Check(f"closure ({cases} pairs)", closure),
        Check(f"commutativity, exact ({cases} pairs)", commutative),
        Check(f"(0,1) is a two-sided identity, exact ({cases} states)", identity),
    ]


def check_fixed_points(rng, cases) -> Check:
    ok = True
    for n in range(1, 6):
        picks = rng.integers(2, size=(-(-cases // 5), n))
        crisp_certain = np.stack([picks, picks], axis=-1).astype(float)
        ok &= bool(np.array_equal(consensus_belief(crisp_certain, crisp_certain), crisp_certain))
        vague = np.tile([0.0, 1.0], (1, n, 1))
        ok &= bool(np.array_equal(consensus_belief(vague, vague), vague))
    return Check("fixed points: crisp-certain and fully vague states", ok)


def check_levels(rng, cases) -> Check:
    ok = True
    embed = {0.0: (0.0, 0.0), 0.5: (0.0, 1.0), 1.0: (1.0, 1.0)}
    for _ in range(min(cases, 2000)):
        n = int(rng.integers(1, 6))
        v1 = rng.choice([0.0, 0.5, 1.0], size=n)
        v2 = rng.choice([0.0, 0.5, 1.0], size=n)
        expected = BeliefState.from_valuation(consensus_valuation(v1, v2))
        got = consensus_belief(BeliefState(tuple(embed[x] for x in v1)), BeliefState(tuple(embed[x] for x in v2)))
        ok &= got == expected
    return Check("belief level reproduces truth-table level on certain states", ok)


def check_evidence(rng, cases) -> Check:
    ok = True
    for _ in range(min(cases, 20_000)):
        n = int(rng.integers(1, 6))
        b = random_beliefs(rng, 1, n)[0]
        i = int(rng.integers(n))
        t = int(rng.integers(2))
        e = np.tile([0.0, 1.0], (n, 1))
        e[i] = (t, t)
        ok &= bool(np.array_equal(evidence_update(b, i, t), consensus_belief(b, e)))
    return Check("evidence closed form equals consensus with evidence state, exact", ok)


def check_measure_bounds(rng, cases) -> Check:
    ok = True
    log3 = math.log2(3)
    for n, a, b in _batches(rng, cases):
        v, h, inc = vagueness(a), entropy(a), inconsistency(a, b)
        ok &= bool(np.all((v >= 0) & (v <= 1)))
        ok &= bool(np.all((h >= 0) & (h <= log3 + 1e-12)))
        ok &= bool(np.all((inc >= 0) & (inc <= 1)))
        ok &= bool(np.array_equal(inc, inconsistency(b, a)))
        world = rng.integers(2, size=n)
        p = payoff(a, world)
        ok &= bool(np.all((p >= -n) & (p <= n)))
    return Check("measure bounds and inconsistency symmetry", ok)


def run_checks(cases: int = 100_000, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    checks = [check_example(), check_oracles(rng, cases)]
    checks += check_algebra(rng, cases)
    checks += [
        check_fixed_points(rng, cases),
        check_levels(rng, cases),
        check_evidence(rng, cases),
        check_measure_bounds(rng, cases),
    ]
    return checks
