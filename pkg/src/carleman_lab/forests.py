"""Binary-tree and binary-forest combinatorics.

Rooted binary trees (every internal node has exactly two children) index
the terms of the Carleman diagonalizing blocks; ordered lists of them
("forests") with i trees and j total leaves index the (i, j) blocks.
The same trees appear as fusion paths when bounding lift errors for
gap-certified systems, which is where the Catalan convolution identities
checked here come from.

Trees are nested tuples: ``()`` is the single-leaf tree and
``(left, right)`` an internal node.  Everything is exact: enumeration is
duplicate-free and the fusion sums use rational arithmetic.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import CapExceededError

LEAF = ()

FOREST_CAP = 12
FUSION_CAP = 10
CLOSED_FORM_CAP = 30


def leaf_count(tree) -> int:
    if tree == LEAF:
        return 1
    return leaf_count(tree[0]) + leaf_count(tree[1])


@lru_cache(maxsize=None)
def enumerate_trees(m: int) -> tuple:
    """All binary-tree shapes with m leaves (Catalan(m-1) of them)."""
    if m < 1:
        raise ValueError("a tree has at least one leaf")
    if m > FOREST_CAP:
        raise CapExceededError(f"tree enumeration capped at {FOREST_CAP} leaves")
    if m == 1:
        return (LEAF,)
    out = []
    for a in range(1, m):
        for left in enumerate_trees(a):
            for right in enumerate_trees(m - a):
                out.append((left, right))
    return tuple(out)


def compositions(total: int, parts: int):
    """Ordered compositions of ``total`` into ``parts`` positive integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_forests(i: int, j: int) -> list:
    """All ordered forests of i binary trees with j total leaves."""
    if not 1 <= i <= j:
        raise ValueError("need 1 <= i <= j")
    if j > FOREST_CAP:
        raise CapExceededError(f"forest enumeration capped at {FOREST_CAP} leaves")
    out = []
    for comp in compositions(j, i):
        pools = [enumerate_trees(m) for m in comp]
        out.extend(itertools.product(*pools))
    return out


def count_forests(i: int, j: int) -> int:
    """|T^i_j| computed from the leaf-partition Catalan product."""
    if not 1 <= i <= j:
        raise ValueError("need 1 <= i <= j")
    total = 0
    for comp in compositions(j, i):
        prod = 1
        for m in comp:
            prod *= catalan(m - 1)
        total += prod
    return total


def catalan(k: int) -> int:
    if not 0 <= k <= CLOSED_FORM_CAP:
        raise CapExceededError(f"catalan(k) supported for 0 <= k <= {CLOSED_FORM_CAP}")
    return comb(2 * k, k) // (k + 1)


def catalan_convolution(j: int, k: int) -> int:
    """j-fold convolution of the Catalan sequence at k: (j/(k+j)) C(2k+j-1, k)."""
    if j < 1 or k < 0 or k + j > 2 * CLOSED_FORM_CAP:
        raise CapExceededError("catalan convolution arguments out of range")
    value = Fraction(j, k + j) * comb(2 * k + j - 1, k)
    assert value.denominator == 1
    return int(value)


def fusion_paths(j: int, k: int):
    """Yield fusion paths from k+1 unexcited subsystems down to j subsystems.

    A path is the tuple of fusion positions (l_k, ..., l_j); step i fuses
    neighbors l_i and l_i+1 of the current i+1 subsystems into one
    excited subsystem.  There are k!/(j-1)! paths.
    """
    if not 1 <= j <= k:
        raise ValueError("need 1 <= j <= k")
    ranges = [range(i) for i in range(k, j - 1, -1)]
    yield from itertools.product(*ranges)


def fusion_sum(j: int, k: int) -> Fraction:
    """Excitation-weighted fusion count, exactly.

    Sums the product of inverse excitation counts over every fusion path
    from k+1 subsystems to j; equals catalan_convolution(j, k-j+1).
    """
    if not 1 <= j <= k:
        raise ValueError("need 1 <= j <= k")
    if k > FUSION_CAP:
        raise CapExceededError(f"fusion-path enumeration capped at k = {FUSION_CAP}")
    total = Fraction(0)
    for path in fusion_paths(j, k):
        flags = [False] * (k + 1)
        weight = Fraction(1)
        for l in path:
            flags[l : l + 2] = [True]
            weight /= sum(flags)
        total += weight
    return total


def forest_count_bound(i: int, j: int) -> int:
    """The coarse bound 4^(j-i) C(j-1, i-1) on |T^i_j|."""
    return 4 ** (j - i) * comb(j - 1, i - 1)


# ---------------------------------------------------------------------------
# Structural views used by the diagonalization blocks


class TreeStructure:
    """Indexing view of one tree shape: nodes, leaves, topological orders.

    Nodes are integers in deposit order (root first, pre-order);
    ``leaves`` lists leaf nodes left to right.  ``order_frontiers``
    precomputes, for every topological order of the internal nodes, the
    frontier C(S) of each prefix S (children of S not in S); these are the
    label sets whose eigenvalue sums appear in the inverse-block weights.
    """

    def __init__(self, tree):
        self.tree = tree
        self.children: dict[int, tuple[int, int]] = {}
        self.leaves: list[int] = []
        counter = itertools.count()

        # pre-order with ids assigned before descending keeps the root at 0
        def build_preorder(t) -> int:
            node = next(counter)
            if t == LEAF:
                self.leaves.append(node)
                return node
            self.children[node] = (None, None)  # placeholder
            left = build_preorder(t[0])
            right = build_preorder(t[1])
            self.children[node] = (left, right)
            return node

        build_preorder(tree)
        self.n_nodes = len(self.leaves) + len(self.children)
        self.root = 0
        self.internal = sorted(self.children)
        self.leaf_descendants: dict[int, list[int]] = {}
        for v in self.internal:
            self.leaf_descendants[v] = self._collect_leaves(v)

    def _collect_leaves(self, v: int) -> list[int]:
        if v not in self.children:
            return [v]
        left, right = self.children[v]
        return self._collect_leaves(left) + self._collect_leaves(right)

    def topological_orders(self) -> list[tuple[int, ...]]:
        """All linear orders of internal nodes respecting ancestry."""
        children = self.children
        internal = set(self.internal)

        def extend(placed: tuple, available: set) -> list:
            if not available:
                return [placed]
            out = []
            for v in sorted(available):
                nxt = set(available)
                nxt.remove(v)
                for c in children[v]:
                    if c in internal:
                        nxt.add(c)
                out.extend(extend(placed + (v,), nxt))
            return out

        if not internal:
            return [()]
        return extend((), {self.root})

    def order_frontiers(self) -> list[list[tuple[int, ...]]]:
        """For each topological order, the frontier node tuple of each prefix."""
        out = []
        for order in self.topological_orders():
            frontiers = []
            placed: set[int] = set()
            frontier: set[int] = set()
            for v in order:
                placed.add(v)
                frontier.discard(v)
                frontier.update(self.children[v])
                frontiers.append(tuple(sorted(frontier)))
            out.append(frontiers)
        return out
