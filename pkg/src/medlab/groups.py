"""Finite group actions: automorphisms, averaging, invariant cubes.

Finite groups realize the averaging argument directly: the average of any
measure over the group is invariant, the self-median operator preserves
invariance (automorphisms are morphisms), and the support of an invariant
balanced measure is an invariant cube.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .algebra import MedianAlgebra, Morphism, _morphism_violation, interval
from .errors import (
    CapExceeded,
    InternalCheckError,
    InvalidAutomorphism,
    TooLargeError,
    UnresolvedSearch,
)
from .measures import (
    Measure,
    NotCubical,
    ScanResult,
    fixed_point_scan,
)
from .walls import CubeCertificate

DEFAULT_GROUP_CAP = 100_000
AUTOMORPHISM_SEARCH_LIMIT = 12


class Automorphism:
    """A bijective self-map commuting with the median, with its inverse."""

    __slots__ = ("algebra", "perm", "inverse_perm")

    def __init__(self, algebra: MedianAlgebra, perm, _validated: bool = False):
        self.algebra = algebra
        self.perm = tuple(int(v) for v in perm)
        if sorted(self.perm) != list(range(len(algebra))):
            raise InvalidAutomorphism("not a permutation of the points")
        inverse = [0] * len(self.perm)
        for i, v in enumerate(self.perm):
            inverse[v] = i
        self.inverse_perm = tuple(inverse)
        if not _validated:
            for mapping in (self.perm, self.inverse_perm):
                witness = _morphism_violation(mapping, algebra, algebra)
                if witness is not None:
                    raise InvalidAutomorphism(
                        f"median identity fails on triple {witness}", witness
                    )

    def __call__(self, point: int) -> int:
        return self.perm[point]

    def __mul__(self, other: "Automorphism") -> "Automorphism":
        if self.algebra != other.algebra:
            raise InvalidAutomorphism("automorphisms act on different algebras")
        composed = tuple(self.perm[v] for v in other.perm)
        return Automorphism(self.algebra, composed, _validated=True)

    def inverse(self) -> "Automorphism":
        return Automorphism(self.algebra, self.inverse_perm, _validated=True)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self.algebra == other.algebra and self.perm == other.perm

    def __hash__(self) -> int:
        return hash(self.perm)

    def __repr__(self) -> str:
        return f"<Automorphism {self.perm}>"

    def as_morphism(self) -> Morphism:
        return Morphism(self.algebra, self.algebra, self.perm, _validated=True)

    def is_identity(self) -> bool:
        return all(i == v for i, v in enumerate(self.perm))

    def push_exact(self, measure: Measure) -> Measure:
        out = [Fraction(0)] * len(self.perm)
        for i, w in enumerate(measure.weights):
            out[self.perm[i]] = w
        return Measure(self.algebra, out)

    def push_floats(self, weights: np.ndarray) -> np.ndarray:
        out = np.empty_like(weights)
        out[np.asarray(self.perm)] = weights
        return out


def validate_automorphism(algebra: MedianAlgebra, perm) -> Automorphism:
    """Check bijectivity and the median identity for the map and its inverse."""
    values = list(perm)
    if len(values) != len(algebra):
        raise InvalidAutomorphism("permutation must be total on the points")
    seen = {}
    for i, v in enumerate(values):
        if v in seen:
            raise InvalidAutomorphism(
                f"points {seen[v]} and {i} collide at {v}", witness=(seen[v], i)
            )
        seen[v] = i
    return Automorphism(algebra, values)


@dataclass(frozen=True)
class FiniteGroup:
    """Closure of a generating set of automorphisms."""

    algebra: MedianAlgebra
    elements: tuple
    generators: tuple

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def is_invariant_measure(self, measure: Measure) -> bool:
        return all(g.push_exact(measure) == measure for g in self.elements)

    def is_invariant_set(self, members: Iterable) -> bool:
        ids = set(members)
        return all({g(i) for i in ids} == ids for g in self.elements)


def group_closure(
    generators: Iterable[Automorphism],
    cap: int = DEFAULT_GROUP_CAP,
    algebra: Optional[MedianAlgebra] = None,
) -> FiniteGroup:
    """Breadth-first closure under composition; deterministic element order.

    An empty generator list yields the trivial group, but then ``algebra``
    must be given.
    """
    gens = sorted(generators, key=lambda a: a.perm)
    if gens:
        algebra = gens[0].algebra
        for g in gens:
            if g.algebra != algebra:
                raise InvalidAutomorphism("generators act on different algebras")
    elif algebra is None:
        raise InvalidAutomorphism("group_closure without generators needs the algebra")
    identity = Automorphism(algebra, range(len(algebra)), _validated=True)
    elements = {identity.perm: identity}
    frontier = [identity]
    while frontier:
        new_frontier = []
        for g in gens:
            for h in frontier:
                composed = g * h
                if composed.perm not in elements:
                    elements[composed.perm] = composed
                    new_frontier.append(composed)
                    if len(elements) > cap:
                        raise CapExceeded(f"group closure exceeded cap {cap}")
        frontier = new_frontier
    ordered = tuple(elements[p] for p in sorted(elements))
    return FiniteGroup(algebra=algebra, elements=ordered, generators=tuple(gens))


def trivial_group(algebra: MedianAlgebra) -> FiniteGroup:
    return group_closure([], algebra=algebra)


def average_measure(group: FiniteGroup, measure: Measure) -> Measure:
    """Exact group average; the result is checked to be invariant."""
    if measure.algebra != group.algebra:
        raise ValueError("measure lives on a different algebra than the group")
    n = len(group.algebra)
    totals = [Fraction(0)] * n
    for g in group.elements:
        pushed = g.push_exact(measure)
        for i in range(n):
            totals[i] += pushed.weights[i]
    averaged = Measure(group.algebra, [t / len(group) for t in totals])
    if not group.is_invariant_measure(averaged):
        raise InternalCheckError("group average failed the invariance check")
    return averaged


def invariant_balanced_search(
    algebra: MedianAlgebra,
    group: FiniteGroup,
    starts: int = 100,
    seed: int = 0,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    jobs: int = 1,
) -> ScanResult:
    """Scan for exactly invariant balanced measures.

    Each start is group-averaged before iteration (the operator preserves
    invariance, so the whole trajectory stays invariant up to float noise);
    snapped measures must then pass exact balancedness and exact invariance
    before classification.
    """
    if group.algebra != algebra:
        raise ValueError("group acts on a different algebra")
    perms = [np.asarray(g.perm) for g in group.elements]

    def symmetrize(weights: np.ndarray) -> np.ndarray:
        total = np.zeros_like(weights)
        for perm in perms:
            pushed = np.empty_like(weights)
            pushed[perm] = weights
            total += pushed
        return total / len(perms)

    return fixed_point_scan(
        algebra,
        starts=starts,
        seed=seed,
        tol=tol,
        max_iter=max_iter,
        symmetrize=symmetrize,
        accept=group.is_invariant_measure,
        jobs=jobs,
    )


def select_invariant_cube(scan: ScanResult, group: FiniteGroup) -> CubeCertificate:
    """Pick the invariant-cube certificate out of a finished scan.

    Returns the highest-dimensional verified certificate (ties broken by
    point ids) after explicitly re-checking that every group element maps
    the cube's point set to itself.  Raises UnresolvedSearch when no start
    produced a verified measure; that never claims no invariant cube exists.
    """
    candidates = []
    for _measure, verdict in scan.results:
        if isinstance(verdict, NotCubical):
            continue
        cert = verdict.cube
        if not group.is_invariant_set(cert.parent_ids):
            raise InternalCheckError(
                "support of an invariant measure must be an invariant set"
            )
        candidates.append(cert)
    if not candidates:
        raise UnresolvedSearch(
            "no start snapped to a verified invariant balanced measure"
        )
    candidates.sort(key=lambda cert: (-cert.dim, cert.parent_ids))
    return candidates[0]


def invariant_cube(
    algebra: MedianAlgebra,
    group: FiniteGroup,
    starts: int = 100,
    seed: int = 0,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    jobs: int = 1,
) -> CubeCertificate:
    """A setwise group-invariant cube, from the invariant balanced search."""
    scan = invariant_balanced_search(
        algebra, group, starts=starts, seed=seed, tol=tol, max_iter=max_iter, jobs=jobs
    )
    return select_invariant_cube(scan, group)


# -- small constructions used in tests and experiments --------------------------


def translation_automorphism(cube: MedianAlgebra, shift_mask: int) -> Automorphism:
    """Coordinatewise xor by a fixed vector on a full cube."""
    if len(cube) != 2**cube.ambient_dim:
        raise InvalidAutomorphism("translations need the full cube")
    perm = [cube.rank_of_mask(m ^ shift_mask) for m in cube.masks]
    return Automorphism(cube, perm)


def translation_group(cube: MedianAlgebra) -> FiniteGroup:
    """All coordinate translations of a full cube."""
    gens = [
        translation_automorphism(cube, 1 << i) for i in range(cube.ambient_dim)
    ] or [Automorphism(cube, range(len(cube)), _validated=True)]
    return group_closure(gens)


def coordinate_permutation_automorphism(cube: MedianAlgebra, sigma) -> Automorphism:
    """Relabel the coordinates of a full cube by the permutation sigma."""
    if len(cube) != 2**cube.ambient_dim:
        raise InvalidAutomorphism("coordinate permutations need the full cube")
    d = cube.ambient_dim
    perm = []
    for m in cube.masks:
        out = 0
        for coord in range(d):
            bit = (m >> (d - 1 - coord)) & 1
            out |= bit << (d - 1 - sigma[coord])
        perm.append(cube.rank_of_mask(out))
    return Automorphism(cube, perm)


def find_automorphisms(algebra: MedianAlgebra) -> list:
    """Brute-force automorphism list for small algebras (testing convenience).

    Backtracks over the covering graph (pairs whose interval has no third
    point) and validates each completed permutation as a median
    automorphism.
    """
    n = len(algebra)
    if n > AUTOMORPHISM_SEARCH_LIMIT:
        raise TooLargeError(
            f"automorphism search capped at {AUTOMORPHISM_SEARCH_LIMIT} points"
        )
    adjacency = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if len(interval(algebra, i, j)) == 2:
                adjacency[i].add(j)
                adjacency[j].add(i)
    degrees = [len(a) for a in adjacency]
    found = []
    assignment = [-1] * n
    used = [False] * n

    def backtrack(i: int) -> None:
        if i == n:
            try:
                found.append(Automorphism(algebra, list(assignment)))
            except InvalidAutomorphism:
                pass
            return
        for target in range(n):
            if used[target] or degrees[target] != degrees[i]:
                continue
            ok = True
            for j in range(i):
                if (j in adjacency[i]) != (assignment[j] in adjacency[target]):
                    ok = False
                    break
            if ok:
                assignment[i] = target
                used[target] = True
                backtrack(i + 1)
                used[target] = False
                assignment[i] = -1

    backtrack(0)
    found.sort(key=lambda a: a.perm)
    return found
