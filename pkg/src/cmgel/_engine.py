"""Event-driven core: clock-ordered arm activations with union-find cluster
tracking, compiled with numba.

One kernel drives both dynamics:

* freeze=True  -- clusters reaching size >= alpha become permanently inert
  (particles, bound arms and pending clocks on them are ignored afterwards);
* freeze=False -- plain dynamical pairing with no freezing; a size-alpha
  crossing can still be used as a stop condition.

Arm activations are fed in as an explicit (order, times) pair so that tests
can force particular activation orders on tiny instances.  For production
runs the order is a uniform permutation and the times are Exp(1) order
statistics, which is equivalent in law to i.i.d. unit-rate clocks per arm.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numba.core import types
from numba.typed import Dict, List

# stop modes
STOP_TMAX = 0
STOP_BTARGET = 1
STOP_FIRST_GEL = 2

# stop reason codes returned by the kernel
REASON_TMAX = 0
REASON_BTARGET = 1
REASON_GEL = 2
REASON_EXHAUSTED = 3

_CENSUS_ROW = types.int64[:, ::1]


def empty_census_list():
    return List.empty_list(_CENSUS_ROW)


@njit(cache=True, inline="always")
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:  # path compression
        parent[x], x = root, parent[x]
    return root


@njit(cache=True)
def _dump_census(census):
    out = np.empty((len(census), 3), dtype=np.int64)
    i = 0
    for key, cnt in census.items():
        out[i, 0] = key >> 32  # free arms
        out[i, 1] = key & 0xFFFFFFFF  # mass
        out[i, 2] = cnt
        i += 1
    return out


@njit(cache=True)
def _census_add(census, a, m, delta):
    key = (a << 32) | m
    cur = census.get(key, 0)
    cur += delta
    if cur == 0:
        del census[key]
    else:
        census[key] = cur


@njit(cache=True)
def run_events(
    deg,
    owner,
    order,
    times,
    alpha,
    freeze,
    allow_self_loops,
    stop_mode,
    b_target,
    t_max,
    snapshot_times,
    parent,
    csize,
    cfree,
    frozen,
    nxt,
    k_act,
    snap_t,
    snap_n,
    snap_b,
    snap_ngel,
    p_out,
    census_snaps,
    gel_tau,
    gel_size,
    gel_afree,
    gel_bact,
    gel_vkr,
    bind_u,
    bind_v,
    bind_t,
):
    """Process activations in time order; fill the preallocated outputs.

    Returns (n_snaps, n_gel, n_binds, rings, reason, stop_time).
    """
    n = deg.shape[0]
    n_events = order.shape[0]

    census = Dict.empty(types.int64, types.int64)
    for v in range(n):
        parent[v] = v
        csize[v] = 1
        cfree[v] = deg[v]
        frozen[v] = False
        nxt[v] = v
        k_act[v] = 0
        _census_add(census, deg[v], 1, 1)

    p = np.zeros(p_out.shape[1:], dtype=np.int64)
    for v in range(n):
        p[0, deg[v]] += 1

    n_sol = n
    b_sol = 0
    rings = 0
    pend = np.int64(-1)
    si = 0
    gi = 0
    nb = 0
    snap_ptr = 0
    reason = REASON_EXHAUSTED
    stop_time = 0.0
    stopped = False

    for i in range(n_events):
        t = times[i]
        while snap_ptr < snapshot_times.shape[0] and snapshot_times[snap_ptr] < t:
            snap_t[si] = snapshot_times[snap_ptr]
            snap_n[si] = n_sol
            snap_b[si] = b_sol
            snap_ngel[si] = gi
            p_out[si] = p
            census_snaps.append(_dump_census(census))
            si += 1
            snap_ptr += 1
        if stop_mode == STOP_TMAX and t > t_max:
            reason = REASON_TMAX
            stop_time = t_max
            stopped = True
            break
        stop_time = t

        v = owner[order[i]]
        rings += 1
        rv = _find(parent, v)
        if freeze and frozen[rv]:
            if stop_mode == STOP_BTARGET and rings >= b_target:
                reason = REASON_BTARGET
                stopped = True
                break
            continue
        if pend >= 0 and v == pend and not allow_self_loops:
            # forbidden self-loop: discard this ring entirely, keep pending
            rings -= 1
            continue

        p[k_act[v], deg[v]] -= 1
        k_act[v] += 1
        p[k_act[v], deg[v]] += 1
        b_sol += 1

        if pend < 0:
            pend = v
        else:
            u = pend
            pend = np.int64(-1)
            ru = _find(parent, u)
            bind_u[nb] = u
            bind_v[nb] = v
            bind_t[nb] = t
            nb += 1
            if ru == rv:
                # self-loop or cycle edge: two arms consumed, no merge
                _census_add(census, cfree[ru], csize[ru], -1)
                cfree[ru] -= 2
                _census_add(census, cfree[ru], csize[ru], 1)
            else:
                _census_add(census, cfree[ru], csize[ru], -1)
                _census_add(census, cfree[rv], csize[rv], -1)
                # union by size
                if csize[ru] < csize[rv]:
                    ru, rv = rv, ru
                parent[rv] = ru
                csize[ru] += csize[rv]
                cfree[ru] += cfree[rv] - 2
                tmp = nxt[u]
                nxt[u] = nxt[v]
                nxt[v] = tmp
                new_size = csize[ru]
                new_free = cfree[ru]
                if new_size >= alpha and (freeze or stop_mode == STOP_FIRST_GEL):
                    gel_tau[gi] = t
                    gel_size[gi] = new_size
                    gel_afree[gi] = new_free
                    bact = 0
                    w = u
                    while True:
                        gel_vkr[gi, k_act[w], deg[w]] += 1
                        bact += k_act[w]
                        if freeze:
                            p[k_act[w], deg[w]] -= 1
                        w = nxt[w]
                        if w == u:
                            break
                    gel_bact[gi] = bact
                    gi += 1
                    if freeze:
                        frozen[ru] = True
                        n_sol -= new_size
                        b_sol -= bact
                        # post-gel snapshot
                        snap_t[si] = t
                        snap_n[si] = n_sol
                        snap_b[si] = b_sol
                        snap_ngel[si] = gi
                        p_out[si] = p
                        census_snaps.append(_dump_census(census))
                        si += 1
                    if stop_mode == STOP_FIRST_GEL:
                        reason = REASON_GEL
                        stopped = True
                        break
                else:
                    _census_add(census, new_free, new_size, 1)
        if stop_mode == STOP_BTARGET and rings >= b_target:
            reason = REASON_BTARGET
            stopped = True
            break

    if not stopped:
        if stop_mode == STOP_TMAX:
            reason = REASON_TMAX
            stop_time = t_max
        else:
            reason = REASON_EXHAUSTED
    if reason == REASON_TMAX:
        while snap_ptr < snapshot_times.shape[0]:
            snap_t[si] = snapshot_times[snap_ptr]
            snap_n[si] = n_sol
            snap_b[si] = b_sol
            snap_ngel[si] = gi
            p_out[si] = p
            census_snaps.append(_dump_census(census))
            si += 1
            snap_ptr += 1
    # final-state snapshot
    snap_t[si] = stop_time
    snap_n[si] = n_sol
    snap_b[si] = b_sol
    snap_ngel[si] = gi
    p_out[si] = p
    census_snaps.append(_dump_census(census))
    si += 1

    for v in range(n):  # flatten union-find for the caller
        parent[v] = _find(parent, v)
        frozen[v] = frozen[parent[v]]

    return si, gi, nb, rings, reason, stop_time


@njit(cache=True)
def union_find_labels(n, edge_u, edge_v):
    """Root label per vertex for the multigraph on n vertices."""
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for i in range(edge_u.shape[0]):
        ru = _find(parent, edge_u[i])
        rv = _find(parent, edge_v[i])
        if ru != rv:
            if size[ru] < size[rv]:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]
    for v in range(n):
        parent[v] = _find(parent, v)
    return parent


def exp_order_statistics(m, rng):
    """Sorted arrival times of m independent Exp(1) clocks.

    Uses the gap representation: the k-th gap is Exp(1)/(m-k+1).
    """
    gaps = rng.exponential(size=m) / np.arange(m, 0, -1.0)
    return np.cumsum(gaps)


class RawRun:
    """Plain container for everything the kernel produced."""

    __slots__ = (
        "degrees", "owner", "alpha", "freeze", "reason", "stop_time",
        "snap_t", "snap_n", "snap_b", "snap_ngel", "p_snaps", "census_snaps",
        "gel_tau", "gel_size", "gel_afree", "gel_bact", "gel_vkr",
        "bind_u", "bind_v", "bind_t", "labels", "frozen", "k_act", "rings",
    )


_REASON_NAMES = {
    REASON_TMAX: "time",
    REASON_BTARGET: "arm_count",
    REASON_GEL: "gel",
    REASON_EXHAUSTED: "exhausted",
}


def reason_name(code: int) -> str:
    return _REASON_NAMES[code]


def drive(
    degrees,
    alpha,
    freeze,
    rng,
    stop_mode=STOP_TMAX,
    t_max=np.inf,
    b_target=0,
    snapshot_times=None,
    allow_self_loops=True,
    order=None,
    times=None,
) -> RawRun:
    """Set up buffers, run the kernel, repackage outputs.

    order/times may be supplied explicitly (tiny-instance enumeration); by
    default the order is a uniform permutation of arms and the times are
    Exp(1) order statistics drawn from rng.
    """
    degrees = np.ascontiguousarray(degrees, dtype=np.int64)
    n = len(degrees)
    m_arms = int(degrees.sum())
    owner = np.repeat(np.arange(n, dtype=np.int64), degrees)
    if order is None:
        order = rng.permutation(m_arms).astype(np.int64)
    else:
        order = np.ascontiguousarray(order, dtype=np.int64)
    if times is None:
        times = exp_order_statistics(m_arms, rng)
    else:
        times = np.ascontiguousarray(times, dtype=np.float64)
    if snapshot_times is None:
        snapshot_times = np.empty(0)
    snapshot_times = np.ascontiguousarray(snapshot_times, dtype=np.float64)

    k_dim = int(degrees.max()) + 1 if n else 1
    n_gel_max = (n // max(alpha, 1)) + 2
    max_snaps = len(snapshot_times) + n_gel_max + 1

    parent = np.empty(n, dtype=np.int64)
    csize = np.empty(n, dtype=np.int64)
    cfree = np.empty(n, dtype=np.int64)
    frozen = np.zeros(n, dtype=np.bool_)
    nxt = np.empty(n, dtype=np.int64)
    k_act = np.zeros(n, dtype=np.int64)
    snap_t = np.zeros(max_snaps)
    snap_n = np.zeros(max_snaps, dtype=np.int64)
    snap_b = np.zeros(max_snaps, dtype=np.int64)
    snap_ngel = np.zeros(max_snaps, dtype=np.int64)
    p_out = np.zeros((max_snaps, k_dim, k_dim), dtype=np.int64)
    census_snaps = empty_census_list()
    gel_tau = np.zeros(n_gel_max)
    gel_size = np.zeros(n_gel_max, dtype=np.int64)
    gel_afree = np.zeros(n_gel_max, dtype=np.int64)
    gel_bact = np.zeros(n_gel_max, dtype=np.int64)
    gel_vkr = np.zeros((n_gel_max, k_dim, k_dim), dtype=np.int64)
    nb_max = m_arms // 2 + 1
    bind_u = np.zeros(nb_max, dtype=np.int64)
    bind_v = np.zeros(nb_max, dtype=np.int64)
    bind_t = np.zeros(nb_max)

    si, gi, nb, rings, reason, stop_time = run_events(
        degrees, owner, order, times,
        np.int64(alpha), freeze, allow_self_loops,
        np.int64(stop_mode), np.int64(b_target), float(t_max), snapshot_times,
        parent, csize, cfree, frozen, nxt, k_act,
        snap_t, snap_n, snap_b, snap_ngel, p_out, census_snaps,
        gel_tau, gel_size, gel_afree, gel_bact, gel_vkr,
        bind_u, bind_v, bind_t,
    )

    out = RawRun()
    out.degrees = degrees
    out.owner = owner
    out.alpha = int(alpha)
    out.freeze = bool(freeze)
    out.reason = reason
    out.stop_time = stop_time
    out.snap_t = snap_t[:si]
    out.snap_n = snap_n[:si]
    out.snap_b = snap_b[:si]
    out.snap_ngel = snap_ngel[:si]
    out.p_snaps = p_out[:si]
    out.census_snaps = [np.asarray(census_snaps[i]) for i in range(si)]
    out.gel_tau = gel_tau[:gi]
    out.gel_size = gel_size[:gi]
    out.gel_afree = gel_afree[:gi]
    out.gel_bact = gel_bact[:gi]
    out.gel_vkr = gel_vkr[:gi]
    out.bind_u = bind_u[:nb]
    out.bind_v = bind_v[:nb]
    out.bind_t = bind_t[:nb]
    out.labels = parent
    out.frozen = frozen
    out.k_act = k_act
    out.rings = rings
    return out
