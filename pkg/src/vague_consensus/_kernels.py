"""Compiled scalar and loop kernels shared by the belief algebra and the simulator.

Everything here works on raw float64 arrays. A belief state is an ``(n, 2)``
array of ``(lower, upper)`` rows; a population is ``(N, n, 2)``.

Random draws follow a fixed layout: every iteration consumes exactly
``DRAWS_PER_ITERATION`` uniforms in ``[0, 1)``, laid out as

    0, 1  pair selection (first agent, second agent)
    2     evidence lottery
    3, 4  evidence target (agent, proposition)

so a block of uniforms drawn up front is equivalent to drawing them one
iteration at a time.
"""

import math

import numpy as np
from numba import njit

TOL = 1e-12
DRAWS_PER_ITERATION = 5

# counters returned by simulate()
ATTEMPTS, COMBINED, EVIDENCE, FALLBACKS = 0, 1, 2, 3


@njit(cache=True)
def settle_pair(lower, upper):
    """Clamp float round-off back into ``0 <= lower <= upper <= 1``."""
    if lower < -TOL or upper > 1.0 + TOL or lower > upper + TOL or upper < -TOL or lower > 1.0 + TOL:
        raise ValueError("belief pair outside the feasible region")
    lower = min(max(lower, 0.0), 1.0)
    upper = min(max(upper, 0.0), 1.0)
    if lower > upper:
        upper = lower
    return lower, upper


@njit(cache=True)
def _is_pivot(lower, upper):
    # (0,1), (0,0), (1,1): the vague identity and the two evidence states
    return (lower == 0.0 and (upper == 1.0 or upper == 0.0)) or (lower == 1.0 and upper == 1.0)


@njit(cache=True)
def combine_pair(l1, u1, l2, u2):
    """Consensus of two belief pairs.

    The operands are put in a canonical order first so the result does not
    depend on argument order, bit for bit. Pivot pairs go to the second slot,
    where the regrouped formula below reproduces them without round-off:
    ``x . (0,1) == x``, ``x . (1,1) == (u, 1)``, ``x . (0,0) == (0, l)``.
    """
    p1 = _is_pivot(l1, u1)
    p2 = _is_pivot(l2, u2)
    swap = False
    if p1 != p2:
        swap = p1
    elif l1 != l2:
        swap = l1 > l2
    else:
        swap = u1 > u2
    if swap:
        l1, u1, l2, u2 = l2, u2, l1, u1
    b2 = u2 - l2
    lower = l1 * b2 + l2 * u1
    upper = l2 + l1 * (1.0 - u2) + u1 * b2
    return settle_pair(lower, upper)


@njit(cache=True)
def combine_many(l1, u1, l2, u2, out_l, out_u):
    for k in range(l1.size):
        out_l[k], out_u[k] = combine_pair(l1[k], u1[k], l2[k], u2[k])


@njit(cache=True)
def conflict(l1, u1, l2, u2):
    return l1 * (1.0 - u2) + (1.0 - u1) * l2


@njit(cache=True)
def inconsistency_rows(a, b):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        s += conflict(a[i, 0], a[i, 1], b[i, 0], b[i, 1])
    return s / n


@njit(cache=True)
def vagueness_row(a):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        s += a[i, 1] - a[i, 0]
    return s / n


@njit(cache=True)
def _plogp(p):
    if p <= 0.0:
        return 0.0
    return -p * math.log2(p)


@njit(cache=True)
def entropy_row(a):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        lo = a[i, 0]
        up = a[i, 1]
        s += _plogp(lo) + _plogp(up - lo) + _plogp(1.0 - up)
    return s / n


@njit(cache=True)
def payoff_row(a, world):
    s = 0.0
    for i in range(a.shape[0]):
        f = 2.0 * world[i] - 1.0
        s += f * (a[i, 0] + a[i, 1] - 1.0)
    return s


@njit(cache=True)
def evidence_row(a, prop, truth):
    """In-place evidence update of proposition ``prop`` (closed form)."""
    if truth == 1:
        a[prop, 0] = a[prop, 1]
        a[prop, 1] = 1.0
    else:
        a[prop, 1] = a[prop, 0]
        a[prop, 0] = 0.0


@njit(cache=True)
def _index(u, size):
    k = int(u * size)
    if k >= size:
        k = size - 1
    return k


@njit(cache=True)
def pick_uniform_pair(size, u1, u2):
    i = _index(u1, size)
    j = _index(u2, size - 1)
    if j >= i:
        j += 1
    return i, j


@njit(cache=True)
def pick_weighted_pair(fitness, u1, u2):
    """Draw distinct ``(i, j)`` with ``P(i, j)`` proportional to ``f_i * f_j``.

    Equivalent to drawing both indices independently by fitness and
    redrawing the pair on a collision, but uses exactly two uniforms:
    ``i`` has marginal weight ``f_i * (F - f_i)`` and ``j | i`` has weight
    ``f_j`` over ``j != i``. Returns ``(-1, -1)`` when no distinct pair has
    positive weight.
    """
    size = fitness.size
    total = 0.0
    for k in range(size):
        total += fitness[k]
    z = 0.0
    for k in range(size):
        z += fitness[k] * (total - fitness[k])
    if not z > 0.0:
        return -1, -1

    target = u1 * z
    acc = 0.0
    i = -1
    for k in range(size):
        w = fitness[k] * (total - fitness[k])
        if w > 0.0:
            i = k
            acc += w
            if acc > target:
                break

    rest = 0.0
    for k in range(size):
        if k != i:
            rest += fitness[k]
    target = u2 * rest
    acc = 0.0
    j = -1
    for k in range(size):
        if k == i or not fitness[k] > 0.0:
            continue
        j = k
        acc += fitness[k]
        if acc > target:
            break
    return i, j


@njit(cache=True)
def try_combine(beliefs, i, j, gamma):
    a = beliefs[i]
    b = beliefs[j]
    if inconsistency_rows(a, b) > gamma:
        return False
    for p in range(a.shape[0]):
        lo, up = combine_pair(a[p, 0], a[p, 1], b[p, 0], b[p, 1])
        a[p, 0] = lo
        a[p, 1] = up
        b[p, 0] = lo
        b[p, 1] = up
    return True


@njit(cache=True)
def simulate(beliefs, world, fitness, uniforms, gamma, alpha, do_consensus, do_evidence, weighted):
    """Advance the population by ``uniforms.shape[0]`` iterations in place.

    ``fitness`` is only read and maintained when ``weighted`` is set.
    Returns event counters indexed by ATTEMPTS, COMBINED, EVIDENCE, FALLBACKS.
    """
    size = beliefs.shape[0]
    n = beliefs.shape[1]
    shift = float(n)
    counts = np.zeros(4, dtype=np.int64)
    for t in range(uniforms.shape[0]):
        u = uniforms[t]
        if do_consensus:
            if weighted:
                i, j = pick_weighted_pair(fitness, u[0], u[1])
                if i < 0:
                    counts[FALLBACKS] += 1
                    i, j = pick_uniform_pair(size, u[0], u[1])
            else:
                i, j = pick_uniform_pair(size, u[0], u[1])
            counts[ATTEMPTS] += 1
            if try_combine(beliefs, i, j, gamma):
                counts[COMBINED] += 1
                if weighted:
                    fitness[i] = payoff_row(beliefs[i], world) + shift
                    fitness[j] = fitness[i]
        if do_evidence and u[2] < alpha:
            k = _index(u[3], size)
            p = _index(u[4], n)
            evidence_row(beliefs[k], p, int(world[p]))
            counts[EVIDENCE] += 1
            if weighted:
                fitness[k] = payoff_row(beliefs[k], world) + shift
    return counts


@njit(cache=True)
def population_stats(beliefs, world):
    """Mean vagueness, mean entropy and total payoff over all agents."""
    size = beliefs.shape[0]
    vag = 0.0
    ent = 0.0
    pay = 0.0
    for k in range(size):
        vag += vagueness_row(beliefs[k])
        ent += entropy_row(beliefs[k])
        pay += payoff_row(beliefs[k], world)
    return vag / size, ent / size, pay


@njit(cache=True)
def _conflict_between(beliefs, a, b):
    s = 0.0
    for i in range(beliefs.shape[1]):
        s += conflict(beliefs[a, i, 0], beliefs[a, i, 1], beliefs[b, i, 0], beliefs[b, i, 1])
    return s / beliefs.shape[1]


@njit(cache=True)
def mean_inconsistency_all(beliefs):
    size = beliefs.shape[0]
    s = 0.0
    for a in range(size):
        for b in range(a + 1, size):
            s += _conflict_between(beliefs, a, b)
    return s / (size * (size - 1) // 2)


@njit(cache=True)
def mean_inconsistency_pairs(beliefs, first, second):
    s = 0.0
    for k in range(first.size):
        s += _conflict_between(beliefs, first[k], second[k])
    return s / first.size


@njit(cache=True)
def fitness_all(beliefs, world):
    """Selection weight per agent: payoff shifted by ``n`` into ``[0, 2n]``."""
    size = beliefs.shape[0]
    shift = float(beliefs.shape[1])
    out = np.empty(size)
    for k in range(size):
        out[k] = payoff_row(beliefs[k], world) + shift
    return out
