"""Static configuration-model multigraphs and component analysis.

Three samplers share one output type:

* :func:`sample_cm` -- uniform pairing of all arms;
* :func:`sample_arm_subset_pairing` -- uniform ordered choice of B arms,
  consecutive ones paired;
* :func:`sample_percolated` -- arms kept i.i.d. with probability p, then
  paired uniformly.

Components come from union-find (the fast path) or from a coloring
exploration that emits components in size-biased order; the two agree on
the partition by construction and the test suite checks it exhaustively
on small arm counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .measures import Pmf

__all__ = [
    "Pairing",
    "ComponentStats",
    "sample_cm",
    "sample_arm_subset_pairing",
    "sample_percolated",
    "components",
    "explore_components",
    "critical_window_prediction",
    "realize_degrees",
]


def realize_degrees(n: int, mu: Pmf) -> np.ndarray:
    """Deterministic degree sequence with counts as close to n*mu(r) as possible.

    Largest-remainder rounding: floor everything, then hand out the missing
    vertices in order of decreasing fractional part (ties to smaller degree).
    """
    target = np.asarray(mu.weights) * n
    counts = np.floor(target).astype(np.int64)
    short = n - int(counts.sum())
    if short > 0:
        frac = target - counts
        order = np.lexsort((np.arange(len(frac)), -frac))
        for r in order[:short]:
            counts[r] += 1
    return np.repeat(np.arange(len(counts)), counts)


@dataclass(frozen=True)
class Pairing:
    """A configuration-model outcome on a fixed degree sequence.

    matches holds pairs of arm ids; arm ids number the arms of vertex v as
    offsets[v] .. offsets[v]+degrees[v]-1.  Self-loops and parallel edges
    are legitimate.  activated, when present, counts retained arms per
    vertex (percolation bookkeeping).
    """

    degrees: np.ndarray
    matches: np.ndarray  # shape (n_edges, 2), arm ids
    unpaired: int | None = None
    activated: np.ndarray | None = None
    offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        off = np.concatenate(([0], np.cumsum(self.degrees)))
        object.__setattr__(self, "offsets", off)
        object.__setattr__(self, "degrees", np.asarray(self.degrees, dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.degrees)

    def arm_vertex(self, arm: int) -> int:
        return int(np.searchsorted(self.offsets, arm, side="right") - 1)

    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Vertex pairs for every match."""
        if len(self.matches) == 0:
            e = np.empty(0, dtype=np.int64)
            return e, e.copy()
        u = np.searchsorted(self.offsets, self.matches[:, 0], side="right") - 1
        v = np.searchsorted(self.offsets, self.matches[:, 1], side="right") - 1
        return u, v

    def to_json(self) -> dict:
        u, v = self.edge_endpoints()
        slots_u = self.matches[:, 0] - self.offsets[u] if len(self.matches) else []
        slots_v = self.matches[:, 1] - self.offsets[v] if len(self.matches) else []
        return {
            "degrees": self.degrees.tolist(),
            "matches": [
                [int(a), int(b), int(c), int(d)]
                for a, b, c, d in zip(u, slots_u, v, slots_v)
            ],
        }


@dataclass(frozen=True)
class ComponentStats:
    """Connected components, largest first (ties: smallest vertex id)."""

    components: list  # each: {"size", "vertices", "v_k", "v_kr" (optional)}

    @property
    def sizes(self) -> list[int]:
        return [c["size"] for c in self.components]

    def v_k(self, i: int) -> dict[int, int]:
        return self.components[i]["v_k"]

    def to_rows(self):
        """CSV-ready rows (component_id, size, k, count)."""
        rows = []
        for i, c in enumerate(self.components):
            for k in sorted(c["v_k"]):
                rows.append((i, c["size"], k, c["v_k"][k]))
        return rows


def _pair_consecutive(arms: np.ndarray) -> tuple[np.ndarray, int | None]:
    n_pairs = len(arms) // 2
    matches = arms[: 2 * n_pairs].reshape(n_pairs, 2).astype(np.int64)
    unpaired = int(arms[-1]) if len(arms) % 2 else None
    return matches, unpaired


def sample_cm(degrees, rng: np.random.Generator) -> Pairing:
    """Uniform pairing of all arms; one arm left over when the total is odd."""
    degrees = np.asarray(degrees, dtype=np.int64)
    arms = rng.permutation(int(degrees.sum()))
    matches, unpaired = _pair_consecutive(arms)
    return Pairing(degrees=degrees, matches=matches, unpaired=unpaired)


def sample_arm_subset_pairing(degrees, b: int, rng: np.random.Generator) -> Pairing:
    """Uniform sequence of b distinct arms; arm 2i is matched to arm 2i+1."""
    degrees = np.asarray(degrees, dtype=np.int64)
    total = int(degrees.sum())
    if b > total:
        raise ValueError(f"requested {b} arms but only {total} exist")
    arms = rng.permutation(total)[:b]
    matches, unpaired = _pair_consecutive(arms)
    return Pairing(degrees=degrees, matches=matches, unpaired=unpaired)


def sample_percolated(degrees, p: float, rng: np.random.Generator) -> Pairing:
    """Retain each arm independently with probability p, pair the survivors."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("retention probability must be in [0, 1]")
    degrees = np.asarray(degrees, dtype=np.int64)
    total = int(degrees.sum())
    keep = rng.random(total) < p
    kept = np.nonzero(keep)[0]
    kept = rng.permutation(kept)
    matches, unpaired = _pair_consecutive(kept)
    offsets = np.concatenate(([0], np.cumsum(degrees)))
    owner = np.searchsorted(offsets, np.nonzero(keep)[0], side="right") - 1
    activated = np.bincount(owner, minlength=len(degrees)).astype(np.int64)
    return Pairing(degrees=degrees, matches=matches, unpaired=unpaired, activated=activated)


def components(pairing: Pairing) -> ComponentStats:
    """Exact components via union-find; deterministic ordering."""
    u, v = pairing.edge_endpoints()
    labels = _engine.union_find_labels(pairing.n, u, v)
    return _stats_from_labels(pairing, labels)


def _stats_from_labels(pairing: Pairing, labels: np.ndarray) -> ComponentStats:
    groups: dict[int, list[int]] = {}
    for vtx, root in enumerate(labels):
        groups.setdefault(int(root), []).append(vtx)
    comps = []
    for verts in groups.values():
        v_k: dict[int, int] = {}
        for w in verts:
            k = int(pairing.degrees[w])
            v_k[k] = v_k.get(k, 0) + 1
        entry = {"size": len(verts), "vertices": verts, "v_k": v_k}
        if pairing.activated is not None:
            v_kr: dict[tuple[int, int], int] = {}
            for w in verts:
                key = (int(pairing.activated[w]), int(pairing.degrees[w]))
                v_kr[key] = v_kr.get(key, 0) + 1
            entry["v_kr"] = v_kr
        comps.append(entry)
    comps.sort(key=lambda c: (-c["size"], c["vertices"][0]))
    return ComponentStats(components=comps)


def explore_components(pairing: Pairing, rng: np.random.Generator) -> list[dict]:
    """Emit components in exploration order (size-biased).

    Coloring scheme: repeatedly pick a uniform unvisited (white) vertex and
    exhaust its component by following matched arms; a component's chance of
    being discovered first is proportional to its size.  Returns the same
    per-component records as :func:`components`, in discovery order.
    """
    n = pairing.n
    partner = {}
    for a, b in pairing.matches:
        partner[int(a)] = int(b)
        partner[int(b)] = int(a)

    white = list(range(n))
    pos = {v: i for i, v in enumerate(white)}
    visited = np.zeros(n, dtype=bool)

    def remove_white(v):
        i = pos.pop(v)
        last = white.pop()
        if last != v:
            white[i] = last
            pos[last] = i

    out = []
    while white:
        root = white[rng.integers(len(white))]
        stack = [root]
        visited[root] = True
        remove_white(root)
        verts = []
        while stack:
            w = stack.pop()
            verts.append(w)
            lo, hi = pairing.offsets[w], pairing.offsets[w + 1]
            for arm in range(lo, hi):
                nb = partner.get(arm)
                if nb is None:
                    continue
                x = pairing.arm_vertex(nb)
                if not visited[x]:
                    visited[x] = True
                    remove_white(x)
                    stack.append(x)
        v_k: dict[int, int] = {}
        for w in verts:
            k = int(pairing.degrees[w])
            v_k[k] = v_k.get(k, 0) + 1
        out.append({"size": len(verts), "vertices": sorted(verts), "v_k": v_k})
    return out


def critical_window_prediction(pi: Pmf, n: int) -> dict:
    """Largest-component forecasts inside the barely-supercritical window.

    Requires gamma = m2 - m1 > 0 and m3 > 0.  Returns the predicted size of
    the largest component 2 (m1/m3) n gamma and its degree census
    v_k = 2 k pi(k) / m3 * n gamma.
    """
    g = pi.gamma
    m3 = pi.m3
    if g <= 0:
        raise ValueError("prediction requires a supercritical degree law (m2 > m1)")
    if m3 <= 0:
        raise ValueError("prediction requires m3 > 0")
    v_k = {
        k: 2.0 * k * pi(k) / m3 * n * g
        for k in range(1, pi.k_max + 1)
        if pi(k) > 0
    }
    return {
        "c1_size": 2.0 * pi.m1 / m3 * n * g,
        "v_k": v_k,
        "gamma": g,
    }
