"""Compiled inner loops for batched trial simulation.

Each trial owns a SplitMix64 stream seeded from (master_seed, trial_index),
so results are a pure function of those two values: chunking and scheduling
cannot change any count.  The Python mirror of the generator lives in
``walk``; the two must consume uniforms in exactly the same order (for each
step: two uniforms per claim component in index order, then two for the
perturbation when present).
"""

import numpy as np
from numba import njit

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
MIX_A = U64(0xBF58476D1CE4E5B9)
MIX_B = U64(0x94D049BB133111EB)
UNIT = 1.0 / 9007199254740992.0  # 2**-53

# Event kinds understood by crossing_batch.
EVENT_NONE = 0  # count crossings of `level` only (ruin estimation)
EVENT_COMPONENT_GAP = 1  # fixed pre-level y, component jump exactly x + 1 - y
EVENT_COMPONENT_GAP_ANY_Y = 2  # y marginalized, component jump exactly x + 1 - y_pre
EVENT_WHOLE_CLAIM = 3  # perturbed model, claim side caused the crossing


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * MIX_A
    z = (z ^ (z >> U64(27))) * MIX_B
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True, inline="always")
def _trial_seed(master, trial):
    return _mix64(master + (U64(trial) + U64(1)) * GOLDEN)


@njit(cache=True, nogil=True)
def crossing_batch(
    master,
    t0,
    t1,
    horizon,
    level,
    barrier,
    sizes,
    offsets,
    values,
    qtab,
    alias,
    has_z,
    z_values,
    z_q,
    z_alias,
    event_kind,
    ev_portfolio,
    ev_x,
    ev_y,
):
    """Simulate trials [t0, t1) and return int64 counts.

    Returns [event, crossed, censored, sunk]:
      event    - crossing happened and the configured event fired,
      crossed  - dual walk exceeded `level` by `horizon`,
      censored - neither crossed nor sank below -barrier (still undecided),
      sunk     - reached `-barrier` or lower before crossing (resolved: the
                 comeback probability is below the caller's tolerance).

    Attribution events additionally require the walk never to have revisited
    level 0 strictly between start and crossing; the `touched` flag tracks
    that.
    """
    m = sizes.shape[0]
    zk = z_values.shape[0]
    n_event = np.int64(0)
    n_crossed = np.int64(0)
    n_censored = np.int64(0)
    n_sunk = np.int64(0)

    for t in range(t0, t1):
        state = _trial_seed(master, t)
        pos = np.int64(0)
        touched = False
        decided = 0  # 0 undecided, 1 crossed, 2 sunk
        for n in range(1, horizon + 1):
            dc = np.int64(0)
            cj = np.int64(0)
            for c in range(m):
                state = state + GOLDEN
                u1 = float(_mix64(state) >> U64(11)) * UNIT
                state = state + GOLDEN
                u2 = float(_mix64(state) >> U64(11)) * UNIT
                k = sizes[c]
                j = np.int64(u1 * k)
                if j >= k:
                    j = k - 1
                base = offsets[c]
                if u2 < qtab[base + j]:
                    v = values[base + j]
                else:
                    v = values[base + alias[base + j]]
                dc += v
                if c == ev_portfolio:
                    cj = v
            if has_z:
                state = state + GOLDEN
                u1 = float(_mix64(state) >> U64(11)) * UNIT
                state = state + GOLDEN
                u2 = float(_mix64(state) >> U64(11)) * UNIT
                j = np.int64(u1 * zk)
                if j >= zk:
                    j = zk - 1
                if u2 < z_q[j]:
                    zj = z_values[j]
                else:
                    zj = z_values[z_alias[j]]
            else:
                zj = np.int64(1)
            newpos = pos + dc - zj
            if newpos > level:
                n_crossed += 1
                decided = 1
                fired = False
                if event_kind == EVENT_COMPONENT_GAP:
                    fired = (
                        (not touched)
                        and pos == ev_y
                        and newpos >= ev_x
                        and cj == ev_x + 1 - ev_y
                    )
                elif event_kind == EVENT_COMPONENT_GAP_ANY_Y:
                    fired = (not touched) and newpos >= ev_x and cj == ev_x + 1 - pos
                elif event_kind == EVENT_WHOLE_CLAIM:
                    fired = (
                        (not touched)
                        and pos == ev_y
                        and newpos >= ev_x
                        and (
                            (dc >= ev_x + 1 - ev_y and zj == -1)
                            or (dc >= ev_x - ev_y and zj >= 0)
                        )
                    )
                if fired:
                    n_event += 1
                break
            pos = newpos
            if pos == 0:
                touched = True
            elif pos <= -barrier:
                n_sunk += 1
                decided = 2
                break
        if decided == 0:
            n_censored += 1

    out = np.empty(4, dtype=np.int64)
    out[0] = n_event
    out[1] = n_crossed
    out[2] = n_censored
    out[3] = n_sunk
    return out


@njit(cache=True, nogil=True)
def visit_identity_batch(
    master,
    t0,
    t1,
    horizon,
    sizes,
    offsets,
    values,
    qtab,
    alias,
    ev_portfolio,
    ev_x,
    ev_y,
):
    """Per-trial visit statistics for the jump-functional expectation identity.

    For each unit-drift trial let B count the steps n <= horizon whose
    pre-step position equals ev_y while the walk has stayed strictly below 0
    since leaving the origin, and A count those among them where the watched
    component jumps exactly ev_x + 1 - ev_y.  Returns
    [sum A, sum B, sum A^2, sum B^2, sum A*B] as int64.
    """
    m = sizes.shape[0]
    gap = ev_x + 1 - ev_y
    sum_a = np.int64(0)
    sum_b = np.int64(0)
    sum_a2 = np.int64(0)
    sum_b2 = np.int64(0)
    sum_ab = np.int64(0)
    for t in range(t0, t1):
        state = _trial_seed(master, t)
        pos = np.int64(0)
        a = np.int64(0)
        b = np.int64(0)
        for _n in range(1, horizon + 1):
            visit = pos == ev_y
            dc = np.int64(0)
            cj = np.int64(0)
            for c in range(m):
                state = state + GOLDEN
                u1 = float(_mix64(state) >> U64(11)) * UNIT
                state = state + GOLDEN
                u2 = float(_mix64(state) >> U64(11)) * UNIT
                k = sizes[c]
                j = np.int64(u1 * k)
                if j >= k:
                    j = k - 1
                base = offsets[c]
                if u2 < qtab[base + j]:
                    v = values[base + j]
                else:
                    v = values[base + alias[base + j]]
                dc += v
                if c == ev_portfolio:
                    cj = v
            if visit:
                b += 1
                if cj == gap:
                    a += 1
            pos = pos + dc - 1
            if pos >= 0:
                # Walk crossed or revisited 0: no later step can satisfy the
                # strictly-below-zero history, so the trial is finished.
                break
        sum_a += a
        sum_b += b
        sum_a2 += a * a
        sum_b2 += b * b
        sum_ab += a * b

    out = np.empty(5, dtype=np.int64)
    out[0] = sum_a
    out[1] = sum_b
    out[2] = sum_a2
    out[3] = sum_b2
    out[4] = sum_ab
    return out
