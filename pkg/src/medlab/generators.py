"""Constructors for the example corpus: cubes, trees, grids, random subalgebras."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .algebra import MedianAlgebra, max_points, median_closure_ids, product
from .errors import CapExceeded, NotATreeError, OutOfRangeError

MAX_HYPERCUBE_DIM = 12
MAX_RANDOM_DIM = 10

# identifier of the seeded generator used for random corpora; recorded in
# file metadata so corpora can be reproduced elsewhere
PRNG_ID = "numpy-pcg64"


def hypercube(n: int, name: Optional[str] = None) -> MedianAlgebra:
    """The full cube on n coordinates."""
    if not 0 <= n <= MAX_HYPERCUBE_DIM:
        raise OutOfRangeError(f"hypercube dimension {n} outside [0, {MAX_HYPERCUBE_DIM}]")
    return MedianAlgebra.from_masks(
        n, range(2**n), name=name or f"hypercube({n})", _validated=True
    )


def _tree_masks(edges: list) -> list:
    """Encode tree vertices: bit j of a vertex marks that edge j separates it from vertex 0."""
    if not edges:
        return [0]
    vertices = {u for e in edges for u in e}
    n_vertices = len(edges) + 1
    if vertices != set(range(n_vertices)):
        raise NotATreeError(
            f"{len(edges)} edges need vertex labels 0..{n_vertices - 1}, got {sorted(vertices)}"
        )
    adjacency = {v: [] for v in range(n_vertices)}
    for j, (u, v) in enumerate(edges):
        if u == v:
            raise NotATreeError(f"self-loop at vertex {u}")
        adjacency[u].append((v, j))
        adjacency[v].append((u, j))
    d = len(edges)
    masks = [None] * n_vertices
    masks[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v, j in adjacency[u]:
            if masks[v] is None:
                masks[v] = masks[u] | (1 << (d - 1 - j))
                queue.append(v)
    if any(m is None for m in masks):
        raise NotATreeError("edge list is not connected")
    return masks


def tree(edges: Iterable, name: Optional[str] = None) -> MedianAlgebra:
    """Algebra of a tree: one coordinate per edge, median = middle vertex."""
    return tree_points(edges, name=name)[0]


def tree_points(edges: Iterable, name: Optional[str] = None) -> tuple:
    """Like ``tree`` but also return the vertex -> point id mapping."""
    edge_list = [tuple(e) for e in edges]
    if len(set(frozenset(e) for e in edge_list)) != len(edge_list):
        raise NotATreeError("duplicate edges")
    masks = _tree_masks(edge_list)
    if len(masks) - 1 > 64:
        raise CapExceeded("trees are limited to 65 vertices (one coordinate per edge)")
    algebra = MedianAlgebra.from_masks(len(edge_list), list(masks), name=name)
    mapping = {v: algebra.rank_of_mask(m) for v, m in enumerate(masks)}
    return algebra, mapping


def path(n_vertices: int, name: Optional[str] = None) -> MedianAlgebra:
    if n_vertices < 1:
        raise OutOfRangeError("a path needs at least one vertex")
    return tree(
        [(i, i + 1) for i in range(n_vertices - 1)], name=name or f"path({n_vertices})"
    )


def star(n_leaves: int, name: Optional[str] = None) -> MedianAlgebra:
    return star_points(n_leaves, name=name)[0]


def star_points(n_leaves: int, name: Optional[str] = None) -> tuple:
    """Star with the center as vertex 0; returns (algebra, vertex -> id)."""
    if n_leaves < 1:
        raise OutOfRangeError("a star needs at least one leaf")
    return tree_points(
        [(0, i) for i in range(1, n_leaves + 1)], name=name or f"star({n_leaves})"
    )


def grid(a: int, b: int, name: Optional[str] = None) -> MedianAlgebra:
    """Product of an a-vertex path and a b-vertex path."""
    if a < 1 or b < 1:
        raise OutOfRangeError("grid sides must be >= 1")
    if a * b > max_points():
        raise CapExceeded(f"grid({a},{b}) has {a * b} points (cap {max_points()})")
    result = product(path(a), path(b), name=name or f"grid({a},{b})")
    return result


def random_subalgebra(d: int, k: int, seed: int, name: Optional[str] = None) -> MedianAlgebra:
    """Median closure of k uniformly chosen points of the d-cube, in reduced form.

    Uses the seeded PCG64 generator (see ``PRNG_ID``); the same (d, k, seed)
    always yields the same algebra.
    """
    if not 1 <= d <= MAX_RANDOM_DIM:
        raise OutOfRangeError(f"random subalgebra dimension {d} outside [1, {MAX_RANDOM_DIM}]")
    if not 1 <= k <= 2**d:
        raise OutOfRangeError(f"k={k} outside [1, 2^{d}]")
    rng = np.random.default_rng(seed)
    picks = rng.choice(2**d, size=k, replace=False)
    cube = hypercube(d)
    closed = median_closure_ids(cube, [int(p) for p in picks])
    view = cube.restriction(sorted(closed))
    reduced, _ = view.reduced()
    reduced.name = name or f"random_subalgebra(d={d},k={k},seed={seed})"
    return reduced


@dataclass(frozen=True)
class GeneratorSpec:
    """A reproducible recipe for one corpus algebra."""

    kind: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0

    def build(self) -> MedianAlgebra:
        if self.kind == "hypercube":
            return hypercube(int(self.parameters["n"]))
        if self.kind == "tree":
            return tree([tuple(e) for e in self.parameters["edges"]])
        if self.kind == "grid":
            return grid(int(self.parameters["a"]), int(self.parameters["b"]))
        if self.kind == "random_subalgebra":
            return random_subalgebra(
                int(self.parameters["d"]), int(self.parameters["k"]), int(self.seed)
            )
        raise OutOfRangeError(f"unknown generator kind {self.kind!r}")

    def describe(self) -> dict:
        out = {"kind": self.kind, "parameters": dict(self.parameters)}
        if self.kind == "random_subalgebra":
            out["seed"] = self.seed
            out["prng"] = PRNG_ID
        return out
