"""Frozen coagulation with limited aggregations.

N particles carry arms with i.i.d. Exp(1) clocks.  A freshly activated arm
binds to the (at most one) earlier activated free arm still in solution;
otherwise it waits.  A cluster whose size reaches alpha at a bind freezes
instantly: its particles, bonds and remaining clocks become inert.  The run
records snapshots of the solution state plus every gel event.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .graphs import realize_degrees
from .gw_local import RootedTree
from .measures import Pmf

__all__ = [
    "FrozenConfig",
    "SimState",
    "Trajectory",
    "TypicalSample",
    "run_frozen",
    "cluster_census",
    "tail_mass",
    "typical_cluster",
]

DEFAULT_SNAPSHOTS = 64


@dataclass(frozen=True)
class FrozenConfig:
    n: int
    mu: Pmf
    alpha: int
    t_max: float
    snapshot_times: tuple | None = None
    seed: int = 0
    allow_self_loops: bool = True

    def __post_init__(self):
        # alpha = n + 1 is allowed: no cluster can reach it, so freezing is off
        if not 2 <= self.alpha <= self.n + 1:
            raise ValueError("alpha must satisfy 2 <= alpha <= n + 1")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.snapshot_times is not None:
            st = tuple(float(t) for t in self.snapshot_times)
            if any(t < 0 or t > self.t_max for t in st):
                raise ValueError("snapshot times must lie in [0, t_max]")
            if list(st) != sorted(st):
                raise ValueError("snapshot times must be sorted")
            object.__setattr__(self, "snapshot_times", st)

    def resolved_snapshot_times(self) -> np.ndarray:
        if self.snapshot_times is not None:
            return np.asarray(self.snapshot_times)
        return np.linspace(0.0, self.t_max, DEFAULT_SNAPSHOTS)


@dataclass
class SimState:
    """Final particle-level state of a run."""

    n: int
    alpha: int
    degrees: np.ndarray
    labels: np.ndarray  # union-find root per particle
    frozen: np.ndarray  # bool per particle
    k_act: np.ndarray  # arms activated while in solution, per particle
    bind_u: np.ndarray
    bind_v: np.ndarray
    bind_t: np.ndarray
    _adj: tuple | None = field(default=None, repr=False)

    @property
    def in_solution(self) -> np.ndarray:
        return ~self.frozen

    def solution_adjacency(self):
        """CSR adjacency over in-solution particles (bonds only)."""
        if self._adj is None:
            mask = ~self.frozen[self.bind_u]
            u = self.bind_u[mask]
            v = self.bind_v[mask]
            deg = np.bincount(u, minlength=self.n) + np.bincount(v, minlength=self.n)
            indptr = np.concatenate(([0], np.cumsum(deg)))
            nbr = np.empty(indptr[-1], dtype=np.int64)
            cursor = indptr[:-1].copy()
            for a, b in zip(u, v):
                nbr[cursor[a]] = b
                cursor[a] += 1
                nbr[cursor[b]] = a
                cursor[b] += 1
            self._adj = (indptr, nbr)
        return self._adj


@dataclass
class Trajectory:
    """Snapshot record of one run; counts are integers, normalize lazily."""

    config: FrozenConfig
    times: np.ndarray
    n_t: np.ndarray  # particles in solution, per snapshot
    b_t: np.ndarray  # activated arms in solution, per snapshot
    ngel_t: np.ndarray  # gel events so far, per snapshot
    p_tables: np.ndarray  # (snap, activated k, degree r) integer counts
    censuses: list  # per snapshot: int array (rows, 3) of (free arms, mass, count)
    gel_events: list  # per event: {"k","tau","size","free_arms","b","v_kr"}
    final_state: SimState

    def index_at(self, t: float) -> int:
        """Snapshot closest to time t."""
        return int(np.argmin(np.abs(self.times - t)))

    def census_dict(self, i: int) -> dict:
        """Snapshot i census as {(free arms, mass): count / N}."""
        rows = self.censuses[i]
        return {(int(a), int(m)): c / self.config.n for a, m, c in rows}

    def concentration_grid(self, i: int, a_max: int, m_max: int) -> np.ndarray:
        """Dense c(a, m) = count/N window from snapshot i."""
        out = np.zeros((a_max + 1, m_max + 1))
        for a, m, c in self.censuses[i]:
            if a <= a_max and m <= m_max:
                out[a, m] = c / self.config.n
        return out

    def p_normalized(self, i: int) -> np.ndarray:
        return self.p_tables[i] / self.config.n


def run_frozen(config: FrozenConfig) -> Trajectory:
    """Run the frozen dynamics to t_max; deterministic given the config."""
    rng = np.random.default_rng(config.seed)
    degrees = realize_degrees(config.n, config.mu)
    raw = _engine.drive(
        degrees,
        alpha=config.alpha,
        freeze=True,
        rng=rng,
        stop_mode=_engine.STOP_TMAX,
        t_max=config.t_max,
        snapshot_times=config.resolved_snapshot_times(),
        allow_self_loops=config.allow_self_loops,
    )
    return _assemble(config, raw)


def _assemble(config: FrozenConfig, raw: _engine.RawRun) -> Trajectory:
    k_dim = raw.p_snaps.shape[1]
    gel_events = []
    for j in range(len(raw.gel_tau)):
        v_kr = {
            (k, r): int(raw.gel_vkr[j, k, r])
            for k in range(k_dim)
            for r in range(k_dim)
            if raw.gel_vkr[j, k, r]
        }
        gel_events.append(
            {
                "k": j + 1,
                "tau": float(raw.gel_tau[j]),
                "size": int(raw.gel_size[j]),
                "free_arms": int(raw.gel_afree[j]),
                "b": int(raw.gel_bact[j]),
                "v_kr": v_kr,
            }
        )
    state = SimState(
        n=config.n,
        alpha=config.alpha,
        degrees=raw.degrees,
        labels=raw.labels,
        frozen=raw.frozen,
        k_act=raw.k_act,
        bind_u=raw.bind_u,
        bind_v=raw.bind_v,
        bind_t=raw.bind_t,
    )
    return Trajectory(
        config=config,
        times=raw.snap_t,
        n_t=raw.snap_n,
        b_t=raw.snap_b,
        ngel_t=raw.snap_ngel,
        p_tables=raw.p_snaps,
        censuses=raw.census_snaps,
        gel_events=gel_events,
        final_state=state,
    )


def cluster_census(state: SimState) -> dict:
    """Recompute {(free arms, mass): count / N} for in-solution clusters.

    Independent of the engine's incremental census: free arms are counted
    as total arms minus arms consumed by bonds inside the cluster.
    """
    sol = state.in_solution
    n = state.n
    mass = np.zeros(n, dtype=np.int64)
    arms = np.zeros(n, dtype=np.int64)
    np.add.at(mass, state.labels[sol], 1)
    np.add.at(arms, state.labels[sol], state.degrees[sol])
    bonds = np.zeros(n, dtype=np.int64)
    mask = ~state.frozen[state.bind_u]
    np.add.at(bonds, state.labels[state.bind_u[mask]], 2)
    out: dict = {}
    roots = np.nonzero(mass)[0]
    for r in roots:
        key = (int(arms[r] - bonds[r]), int(mass[r]))
        out[key] = out.get(key, 0.0) + 1.0 / n
    return out


def tail_mass(census: dict, k: int) -> float:
    """Mass carried by in-solution clusters of size at least k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sum(m * c for (_, m), c in census.items() if m >= k)


@dataclass(frozen=True)
class TypicalSample:
    """Cluster of a uniformly chosen in-solution particle, rooted there."""

    size: int
    tree: RootedTree | None  # None when cyclic or truncated
    cyclic: bool
    truncated: bool


def typical_cluster(
    state: SimState, rng: np.random.Generator, node_cap: int | None = None
) -> TypicalSample:
    """Sample a uniform in-solution particle and return its rooted cluster.

    Clusters containing a cycle (self-loop or multi-edge included) are
    flagged instead of forced into a tree.  node_cap bounds the traversal;
    larger clusters come back with truncated=True.
    """
    sol_idx = np.nonzero(state.in_solution)[0]
    if len(sol_idx) == 0:
        raise ValueError("no particles left in solution")
    root = int(sol_idx[rng.integers(len(sol_idx))])
    indptr, nbr = state.solution_adjacency()

    parent = [-1]
    index_of = {root: 0}
    order = [root]
    edges_seen = 0
    qi = 0
    while qi < len(order):
        w = order[qi]
        qi += 1
        for j in range(indptr[w], indptr[w + 1]):
            x = int(nbr[j])
            edges_seen += 1
            if x not in index_of:
                if node_cap is not None and len(order) >= node_cap:
                    return TypicalSample(size=len(order), tree=None, cyclic=False, truncated=True)
                index_of[x] = len(order)
                parent.append(index_of[w])
                order.append(x)
    size = len(order)
    # every bond was seen from both ends; a tree on `size` nodes has size-1 bonds
    if edges_seen != 2 * (size - 1):
        return TypicalSample(size=size, tree=None, cyclic=True, truncated=False)
    return TypicalSample(size=size, tree=RootedTree(parent=tuple(parent)), cyclic=False, truncated=False)
