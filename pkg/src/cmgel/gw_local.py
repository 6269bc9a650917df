"""Galton-Watson machinery: samplers, the total-progeny pmf, canonical codes
for rooted unordered trees, and finite-marginal comparison of an empirical
cluster law against the exact branching-process law.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .measures import Pmf

__all__ = [
    "RootedTree",
    "sample_gw",
    "sample_delayed_gw",
    "progeny_pmf",
    "enumerate_trees",
    "delayed_gw_tree_prob",
    "tree_distribution_distance",
]


@dataclass(frozen=True)
class RootedTree:
    """Finite rooted unordered tree; node 0 is the root, parent[0] = -1.

    Nodes are in BFS order.  canonical_code is an AHU-style encoding,
    identical exactly for isomorphic rooted trees.
    """

    parent: tuple
    canonical_code: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "parent", tuple(int(p) for p in self.parent))
        if self.parent[0] != -1:
            raise ValueError("node 0 must be the root")
        object.__setattr__(self, "canonical_code", _ahu_code(self.parent))

    @property
    def size(self) -> int:
        return len(self.parent)

    def children(self) -> list[list[int]]:
        ch = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p >= 0:
                ch[p].append(v)
        return ch


def _ahu_code(parent) -> str:
    n = len(parent)
    ch = [[] for _ in range(n)]
    for v in range(1, n):
        ch[parent[v]].append(v)
    # process nodes deepest-first so children codes exist before parents
    order = sorted(range(n), key=lambda v: -_depth(parent, v))
    code = [""] * n
    for v in order:
        code[v] = "(" + "".join(sorted(code[c] for c in ch[v])) + ")"
    return code[0]


def _depth(parent, v) -> int:
    d = 0
    while parent[v] >= 0:
        v = parent[v]
        d += 1
    return d


def _sample_tree(root_law: Pmf, branch_law: Pmf, node_cap: int, rng) -> RootedTree | None:
    """BFS sampler; None signals the cap was exceeded (possible survival)."""
    if node_cap < 1:
        raise ValueError("node_cap must be >= 1")
    parent = [-1]
    queue = [(0, root_law)]
    while queue:
        v, law = queue.pop(0)
        d = _draw(law, rng)
        for _ in range(d):
            if len(parent) >= node_cap:
                return None
            parent.append(v)
            queue.append((len(parent) - 1, branch_law))
    return RootedTree(parent=tuple(parent))


def _draw(law: Pmf, rng) -> int:
    u = rng.random()
    acc = 0.0
    for k, w in enumerate(law.weights):
        acc += w
        if u < acc:
            return k
    return law.k_max


def sample_gw(pi: Pmf, node_cap: int, rng) -> RootedTree | None:
    """Galton-Watson tree with offspring law pi, truncated at node_cap nodes."""
    return _sample_tree(pi, pi, node_cap, rng)


def sample_delayed_gw(pi: Pmf, node_cap: int, rng) -> RootedTree | None:
    """Root reproduces by pi, every other node by the size-biased shift of pi."""
    return _sample_tree(pi, pi.size_biased_shift(), node_cap, rng)


def progeny_pmf(pi: Pmf, m: int) -> float:
    """Total-progeny law of the delayed tree: pi(0) for m = 1, else the
    hitting-time formula m1 * pihat^{*m}(m-2) / (m-1).

    Derivation: condition on the root having d children and apply the
    hitting-time identity to the d subtrees; the sum over d telescopes into
    one extra pihat factor, picking up the mean m1 of pi.  (For a unit-mean
    pi the prefactor disappears; for Poisson the result is the Borel pmf.)
    """
    if m < 1:
        raise ValueError("progeny size must be >= 1")
    if m == 1:
        return pi(0)
    pihat = pi.size_biased_shift()
    conv = pihat.convolve_power(m, support_cap=m)
    return pi.m1 * conv(m - 2) / (m - 1)


def enumerate_trees(max_nodes: int) -> list[RootedTree]:
    """All rooted unordered trees with up to max_nodes nodes, by size."""
    by_size: list[list[RootedTree]] = [[]]
    by_size.append([RootedTree(parent=(-1,))])
    for n in range(2, max_nodes + 1):
        seen = {}
        for sub_multiset in _subtree_multisets(n - 1, n - 1, by_size):
            parent = [-1]
            for sub in sub_multiset:
                base = len(parent)
                parent.append(0)
                for v in range(1, sub.size):
                    parent.append(sub.parent[v] + base)
            t = RootedTree(parent=tuple(parent))
            seen.setdefault(t.canonical_code, t)
        by_size.append(sorted(seen.values(), key=lambda t: t.canonical_code))
    return [t for size in range(1, max_nodes + 1) for t in by_size[size]]


def _subtree_multisets(total, max_part, by_size):
    """Multisets of trees whose sizes sum to total, parts bounded by max_part."""
    if total == 0:
        yield ()
        return
    for part in range(min(total, max_part), 0, -1):
        max_count = total // part
        for count in range(1, max_count + 1):
            for combo in itertools.combinations_with_replacement(by_size[part], count):
                for rest in _subtree_multisets(total - part * count, part - 1, by_size):
                    yield combo + rest


def delayed_gw_tree_prob(tree: RootedTree, pi: Pmf, pihat: Pmf | None = None) -> float:
    """Exact probability that the delayed Galton-Watson tree equals this
    (unordered) tree."""
    if pihat is None:
        pihat = pi.size_biased_shift()
    ch = tree.children()

    def prob(v: int, law: Pmf) -> float:
        kids = ch[v]
        d = len(kids)
        p = law(d)
        if p == 0.0 or d == 0:
            return p
        sub = [prob(c, pihat) for c in kids]
        mult = Counter(tree_codes[c] for c in kids)
        coef = math.factorial(d)
        for cnt in mult.values():
            coef //= math.factorial(cnt)
        return p * coef * math.prod(sub)

    tree_codes = _subtree_code_table(tree)
    return prob(0, pi)


def _subtree_code_table(tree: RootedTree) -> list[str]:
    parent = tree.parent
    n = len(parent)
    ch = tree.children()
    order = sorted(range(n), key=lambda v: -_depth(parent, v))
    code = [""] * n
    for v in order:
        code[v] = "(" + "".join(sorted(code[c] for c in ch[v])) + ")"
    return code


def tree_distribution_distance(empirical: dict, pi: Pmf, size_cap: int) -> float:
    """Total-variation distance between an empirical law over canonical codes
    and the exact delayed GW law, restricted to trees of <= size_cap nodes;
    all remaining mass on both sides is lumped into one bucket.

    empirical maps canonical codes to frequencies summing to <= 1 (mass on
    larger or cyclic clusters may simply be left out).
    """
    pihat = pi.size_biased_shift()
    trees = enumerate_trees(size_cap)
    tv = 0.0
    q_small = 0.0
    e_small = 0.0
    for t in trees:
        q = delayed_gw_tree_prob(t, pi, pihat)
        e = empirical.get(t.canonical_code, 0.0)
        tv += abs(e - q)
        q_small += q
        e_small += e
    e_rest = max(0.0, 1.0 - e_small)
    q_rest = max(0.0, 1.0 - q_small)
    tv += abs(e_rest - q_rest)
    return 0.5 * tv
