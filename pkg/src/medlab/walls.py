"""Half-spaces, walls, transversality and cube detection.

In a reduced algebra every wall is the partition induced by one coordinate
(the boundary edges of a convex bipartition are single-coordinate steps once
duplicate coordinates are collapsed), so wall enumeration is linear in the
ambient dimension.  ``brute_force_halfspaces`` scans all bipartitions and is
kept as the independent oracle for small instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .algebra import (
    MedianAlgebra,
    Morphism,
    gate,
    is_convex,
    median_closure_ids,
)
from .errors import (
    EmptySubsetError,
    InternalCheckError,
    NotConvex,
    NotDisjointError,
    NotMedianClosed,
    NotReduced,
    NoSeparatorError,
    SameWallError,
    TooLargeError,
)
from .generators import hypercube

BRUTE_FORCE_LIMIT = 16


@dataclass(frozen=True)
class HalfSpace:
    """A convex subset with convex complement."""

    owner: MedianAlgebra
    members: frozenset

    def __post_init__(self):
        if not self.members or len(self.members) == len(self.owner):
            raise EmptySubsetError("a half-space and its complement must be non-empty")

    @property
    def complement(self) -> frozenset:
        return frozenset(range(len(self.owner))) - self.members

    def validate(self) -> "HalfSpace":
        if not is_convex(self.owner, self.members):
            raise NotConvex("half-space side is not convex")
        if not is_convex(self.owner, self.complement):
            raise NotConvex("half-space complement is not convex")
        return self


@dataclass(frozen=True)
class Wall:
    """Unordered pair of complementary half-spaces.

    ``positive`` is the canonical side: the one not containing point 0
    (the lexicographically smallest point of the owner).
    """

    owner: MedianAlgebra
    index: int
    positive: frozenset
    negative: frozenset

    def __post_init__(self):
        if 0 in self.positive:
            raise InternalCheckError("canonical side must avoid the smallest point")

    @property
    def partition(self) -> frozenset:
        return frozenset({self.positive, self.negative})

    def side_of(self, point: int) -> int:
        return 1 if point in self.positive else 0

    def halfspaces(self) -> tuple:
        return (
            HalfSpace(self.owner, self.negative),
            HalfSpace(self.owner, self.positive),
        )


@dataclass(frozen=True)
class NotCube:
    """Negative cube-detection result; not an error."""

    reason: str
    witness: tuple = ()

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class CubeCertificate:
    """Witness that a median-closed subset is a cube.

    ``sub`` is the subset as a standalone algebra, ``parent_ids[i]`` the
    parent point id of sub point ``i``, and ``iso``/``inverse`` the verified
    bijective morphisms onto the reference cube of the certificate's
    dimension.
    """

    parent: MedianAlgebra
    sub: MedianAlgebra
    parent_ids: tuple
    walls: tuple
    iso: Morphism
    inverse: Morphism

    def __bool__(self) -> bool:
        return True

    @property
    def dim(self) -> int:
        return len(self.walls)

    def parent_points(self) -> tuple:
        return tuple(self.parent.point_string(i) for i in self.parent_ids)


def _wall_from_ones(owner: MedianAlgebra, index: int, ones: frozenset) -> Wall:
    other = frozenset(range(len(owner))) - ones
    if 0 in ones:
        ones, other = other, ones
    return Wall(owner, index, positive=ones, negative=other)


def enumerate_walls(algebra: MedianAlgebra) -> list:
    """One wall per coordinate of a reduced algebra."""
    if not algebra.is_reduced:
        raise NotReduced("enumerate_walls needs a reduced algebra; call reduced() first")
    return [
        _wall_from_ones(algebra, coord, ones)
        for coord, ones in enumerate(algebra.coordinate_partitions())
    ]


def walls_of(algebra: MedianAlgebra) -> list:
    """Walls of an arbitrary algebra, via its reduction (point ids coincide)."""
    reduced, _ = algebra.reduced()
    if reduced is algebra:
        return enumerate_walls(algebra)
    return [
        _wall_from_ones(algebra, coord, ones)
        for coord, ones in enumerate(reduced.coordinate_partitions())
    ]


def brute_force_halfspaces(algebra: MedianAlgebra) -> list:
    """All half-spaces by exhaustive bipartition scan; the oracle for small algebras.

    Returns two half-spaces per wall, complement first, walls ordered by
    (canonical side size, canonical side).
    """
    n = len(algebra)
    if n > BRUTE_FORCE_LIMIT:
        raise TooLargeError(f"bipartition scan capped at {BRUTE_FORCE_LIMIT} points")
    interval_bits = [[0] * n for _ in range(n)]
    from .algebra import interval  # local import keeps module init light

    for i in range(n):
        for j in range(i, n):
            bits = 0
            for u in interval(algebra, i, j):
                bits |= 1 << u
            interval_bits[i][j] = interval_bits[j][i] = bits
    full = (1 << n) - 1

    def convex_bits(mask: int) -> bool:
        members = [i for i in range(n) if (mask >> i) & 1]
        for a in members:
            for b in members:
                if b < a:
                    continue
                if interval_bits[a][b] & ~mask:
                    return False
        return True

    walls = []
    # enumerate sides not containing point 0 to visit each wall once
    for mask in range(1, full):
        if mask & 1:
            continue
        if convex_bits(mask) and convex_bits(full ^ mask):
            canonical = frozenset(i for i in range(n) if (mask >> i) & 1)
            walls.append(canonical)
    walls.sort(key=lambda side: (len(side), tuple(sorted(side))))
    out = []
    for side in walls:
        other = frozenset(range(n)) - side
        out.append(HalfSpace(algebra, other))
        out.append(HalfSpace(algebra, side))
    return out


def _as_ids(algebra: MedianAlgebra, members: Iterable) -> frozenset:
    ids = frozenset(int(i) for i in members)
    for i in ids:
        algebra._check_point(i)
    return ids


def delta(algebra: MedianAlgebra, side_a: Iterable, side_b: Iterable) -> list:
    """All half-spaces containing A whose complement contains B."""
    a = _as_ids(algebra, side_a)
    b = _as_ids(algebra, side_b)
    if not a or not b:
        raise EmptySubsetError("delta needs two non-empty subsets")
    if a & b:
        raise NotDisjointError(f"subsets share points {sorted(a & b)}")
    out = []
    for wall in walls_of(algebra):
        if a <= wall.positive and b <= wall.negative:
            out.append(HalfSpace(algebra, wall.positive))
        elif a <= wall.negative and b <= wall.positive:
            out.append(HalfSpace(algebra, wall.negative))
    return out


def separate(algebra: MedianAlgebra, convex_a: Iterable, convex_b: Iterable) -> HalfSpace:
    """Deterministic separator of two disjoint non-empty convex sets."""
    a = _as_ids(algebra, convex_a)
    b = _as_ids(algebra, convex_b)
    if not a or not b:
        raise EmptySubsetError("separate needs two non-empty subsets")
    if a & b:
        raise NotDisjointError(f"subsets share points {sorted(a & b)}")
    if not is_convex(algebra, a) or not is_convex(algebra, b):
        raise NotConvex("separate requires convex inputs")
    candidates = delta(algebra, a, b)
    if not candidates:
        # disjoint non-empty convex sets always admit a separator
        raise NoSeparatorError("no separating half-space found for convex inputs")
    return candidates[0]


def gate_representative(algebra: MedianAlgebra, convex_a: Iterable, other_b: Iterable) -> int:
    """A point a of A with delta(A, B) = delta({a}, B); the gate of min(B)."""
    a = _as_ids(algebra, convex_a)
    b = _as_ids(algebra, other_b)
    if not a or not b:
        raise EmptySubsetError("gate_representative needs non-empty subsets")
    if a & b:
        raise NotDisjointError(f"subsets share points {sorted(a & b)}")
    rep = gate(algebra, a, min(b))
    full = {h.members for h in delta(algebra, a, b)}
    single = {h.members for h in delta(algebra, {rep}, b)}
    if full != single:
        raise InternalCheckError("representative does not preserve the separator set")
    return rep


def is_transverse(algebra: MedianAlgebra, wall_a: Wall, wall_b: Wall) -> bool:
    """True when all four side intersections are non-empty."""
    if wall_a.partition == wall_b.partition:
        raise SameWallError("transversality is defined for distinct walls")
    for x in (wall_a.positive, wall_a.negative):
        for y in (wall_b.positive, wall_b.negative):
            if not (x & y):
                return False
    return True


def wall_embedding(algebra: MedianAlgebra, walls: Iterable[Wall]) -> Morphism:
    """The indicator map into the cube over the given walls (canonical sides)."""
    wall_list = list(walls)
    k = len(wall_list)
    target = hypercube(k)
    mapping = []
    for point in range(len(algebra)):
        mask = 0
        for j, wall in enumerate(wall_list):
            if point in wall.positive:
                mask |= 1 << (k - 1 - j)
        mapping.append(mask)  # cube rank equals its mask
    return Morphism(algebra, target, mapping)


def detect_cube(
    algebra: MedianAlgebra, members: Optional[Iterable] = None
) -> Union[CubeCertificate, NotCube]:
    """Certify a median-closed subset as a cube, or say why it is not one."""
    if members is None:
        ids = tuple(range(len(algebra)))
    else:
        ids = tuple(sorted(_as_ids(algebra, members)))
        if not ids:
            raise EmptySubsetError("detect_cube needs a non-empty subset")
        if median_closure_ids(algebra, ids) != frozenset(ids):
            raise NotMedianClosed(
                "subset is not median-closed; materialize it with subalgebra_closure"
            )
    sub = algebra.restriction(ids) if members is not None else algebra
    walls = walls_of(sub)
    for i in range(len(walls)):
        for j in range(i + 1, len(walls)):
            if not is_transverse(sub, walls[i], walls[j]):
                return NotCube("non-transverse wall pair", (walls[i].index, walls[j].index))
    embedding = wall_embedding(sub, walls)
    if not embedding.is_injective():
        seen = {}
        for p, v in enumerate(embedding.map):
            if v in seen:
                return NotCube("walls do not separate", (seen[v], p))
            seen[v] = p
    if len(sub) != 2 ** len(walls):
        return NotCube("cardinality mismatch", (len(sub), 2 ** len(walls)))
    if not embedding.is_bijective():
        raise InternalCheckError("separating transverse walls must give a bijection")
    inverse_map = [0] * len(sub)
    for p, v in enumerate(embedding.map):
        inverse_map[v] = p
    inverse = Morphism(embedding.target, sub, inverse_map)
    return CubeCertificate(
        parent=algebra,
        sub=sub,
        parent_ids=ids,
        walls=tuple(walls),
        iso=embedding,
        inverse=inverse,
    )
