"""Finite median algebras stored as median-closed sets of bit-vectors.

A point is a bit-vector of length ``ambient_dim``, encoded as a Python int
with coordinate 0 in the most significant bit, so ascending integer order
is exactly lexicographic order of the bit-strings.  The median of three
points is the coordinatewise majority, i.e. ``(x&y)|(x&z)|(y&z)`` on the
encoded ints, and membership of the result is an invariant of the class.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    AxiomViolation,
    CapExceeded,
    EmptySubsetError,
    InputFormatError,
    InternalCheckError,
    MedlabError,
    NotAMorphism,
    NotConvex,
    NotMedianClosed,
)

MAX_AMBIENT_DIM = 64
DEFAULT_MAX_POINTS = 4096
# beyond these sizes, exhaustive O(N^3)/O(N^5) scans switch to seeded sampling
EXHAUSTIVE_CLOSURE_LIMIT = 512
EXHAUSTIVE_MED3_LIMIT = 40
RANDOM_CHECK_SAMPLES = 10**6
MEDIAN_TABLE_LIMIT = 512


def max_points() -> int:
    """Point cap for one algebra; override with MEDLAB_MAX_POINTS."""
    raw = os.environ.get("MEDLAB_MAX_POINTS")
    if raw is None:
        return DEFAULT_MAX_POINTS
    try:
        value = int(raw)
    except ValueError as exc:
        raise InputFormatError(f"MEDLAB_MAX_POINTS is not an integer: {raw!r}") from exc
    if value < 1:
        raise InputFormatError("MEDLAB_MAX_POINTS must be positive")
    return value


def majority_mask(x: int, y: int, z: int) -> int:
    """Coordinatewise majority of three encoded points."""
    return (x & y) | (x & z) | (y & z)


def mask_to_string(mask: int, dim: int) -> str:
    if dim == 0:
        return ""
    return format(mask, f"0{dim}b")


def string_to_mask(bits: str, dim: int) -> int:
    if len(bits) != dim or (dim and not set(bits) <= {"0", "1"}):
        raise InputFormatError(f"not a {dim}-bit string: {bits!r}")
    return int(bits, 2) if dim else 0


def _maj_grid(masks: np.ndarray, x: np.uint64, pair: np.ndarray) -> np.ndarray:
    """Majority of (x, y, z) for all pairs (y, z); ``pair`` is masks&masks precomputed."""
    a = masks & x
    return a[:, None] | a[None, :] | pair


class MedianAlgebra:
    """A finite median algebra: a median-closed subset of a hypercube.

    Points are stored lexicographically sorted; a point's id is its rank in
    that order.  Instances are immutable; internal caches are built lazily
    and are safe to share across threads.
    """

    def __init__(self, ambient_dim: int, points: Iterable[str], name: Optional[str] = None):
        masks = [string_to_mask(p, ambient_dim) for p in points]
        self._init_from_masks(ambient_dim, masks, name, validated=False)

    @classmethod
    def from_masks(
        cls,
        ambient_dim: int,
        masks: Iterable[int],
        name: Optional[str] = None,
        _validated: bool = False,
    ) -> "MedianAlgebra":
        self = object.__new__(cls)
        self._init_from_masks(ambient_dim, list(masks), name, validated=_validated)
        return self

    def _init_from_masks(self, dim: int, masks: list, name: Optional[str], validated: bool) -> None:
        if dim < 0 or dim > MAX_AMBIENT_DIM:
            raise CapExceeded(f"ambient_dim {dim} outside [0, {MAX_AMBIENT_DIM}]")
        if not masks:
            raise EmptySubsetError("a median algebra must have at least one point")
        if len(set(masks)) != len(masks):
            raise InputFormatError("duplicate points")
        if len(masks) > max_points():
            raise CapExceeded(f"{len(masks)} points exceeds cap {max_points()}")
        for m in masks:
            if m < 0 or m >> dim:
                raise InputFormatError(f"point {m} does not fit in {dim} bits")
        self.ambient_dim = dim
        self.name = name
        self._masks = tuple(sorted(masks))
        self._rank = {m: i for i, m in enumerate(self._masks)}
        self._np_masks = np.array(self._masks, dtype=np.uint64)
        self._median_table_cache: Optional[np.ndarray] = None
        self._reduced_cache = None
        if not validated:
            self._check_closure()

    # -- validation -------------------------------------------------------

    def _check_closure(self) -> None:
        n = len(self._masks)
        masks = self._np_masks
        if n <= EXHAUSTIVE_CLOSURE_LIMIT:
            pair = masks[:, None] & masks[None, :]
            for i in range(n):
                majs = _maj_grid(masks, masks[i], pair)
                if not self._contains_all(majs):
                    bad = ~self._membership(majs)
                    y, z = map(int, np.argwhere(bad)[0])
                    raise NotMedianClosed(
                        f"majority of points {i},{y},{z} "
                        f"({mask_to_string(int(majs[y, z]), self.ambient_dim)}) is missing"
                    )
        else:
            # seeded random triples, same policy as Med 3 validation at scale
            rng = np.random.default_rng(0)
            idx = rng.integers(0, n, size=(3, RANDOM_CHECK_SAMPLES))
            x, y, z = masks[idx[0]], masks[idx[1]], masks[idx[2]]
            majs = (x & y) | (x & z) | (y & z)
            if not self._contains_all(majs):
                bad = int(np.argwhere(~self._membership(majs))[0][0])
                raise NotMedianClosed(
                    f"majority of sampled triple #{bad} is missing from the point set"
                )

    def _membership(self, values: np.ndarray) -> np.ndarray:
        flat = values.ravel()
        pos = np.searchsorted(self._np_masks, flat)
        pos_clip = np.minimum(pos, len(self._masks) - 1)
        ok = self._np_masks[pos_clip] == flat
        return ok.reshape(values.shape)

    def _contains_all(self, values: np.ndarray) -> bool:
        return bool(self._membership(values).all())

    def _ranks_of(self, values: np.ndarray) -> np.ndarray:
        """Ranks of encoded points known to be members."""
        return np.searchsorted(self._np_masks, values)

    # -- basic accessors ---------------------------------------------------

    def __len__(self) -> int:
        return len(self._masks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MedianAlgebra):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self._masks == other._masks

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self._masks))

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<MedianAlgebra{label} dim={self.ambient_dim} points={len(self)}>"

    @property
    def masks(self) -> tuple:
        return self._masks

    def point_string(self, point: int) -> str:
        return mask_to_string(self._masks[point], self.ambient_dim)

    @property
    def points(self) -> tuple:
        return tuple(mask_to_string(m, self.ambient_dim) for m in self._masks)

    def rank_of_mask(self, mask: int) -> int:
        return self._rank[mask]

    def rank_of_string(self, bits: str) -> int:
        return self._rank[string_to_mask(bits, self.ambient_dim)]

    def bit(self, point: int, coord: int) -> int:
        return (self._masks[point] >> (self.ambient_dim - 1 - coord)) & 1

    def _check_point(self, point: int) -> None:
        if not 0 <= point < len(self._masks):
            raise MedlabError(f"point id {point} out of range for {self!r}")

    # -- medians and intervals ----------------------------------------------

    def median_table(self) -> np.ndarray:
        """The full ternary operation as an (N,N,N) id table; cached for N <= 512."""
        if len(self) > MEDIAN_TABLE_LIMIT:
            raise CapExceeded(f"median table capped at {MEDIAN_TABLE_LIMIT} points")
        if self._median_table_cache is None:
            masks = self._np_masks
            n = len(self)
            pair = masks[:, None] & masks[None, :]
            dtype = np.int16 if n <= 2**15 - 1 else np.int32
            table = np.empty((n, n, n), dtype=dtype)
            for i in range(n):
                majs = _maj_grid(masks, masks[i], pair)
                table[i] = self._ranks_of(majs).astype(dtype)
            self._median_table_cache = table
        return self._median_table_cache

    def median_mask(self, x: int, y: int, z: int) -> int:
        return majority_mask(self._masks[x], self._masks[y], self._masks[z])

    def coordinate_partitions(self) -> list:
        """For each coordinate, the frozenset of point ids with bit 1 there."""
        out = []
        for coord in range(self.ambient_dim):
            shift = np.uint64(self.ambient_dim - 1 - coord)
            ones = (self._np_masks >> shift) & np.uint64(1)
            out.append(frozenset(int(i) for i in np.nonzero(ones)[0]))
        return out

    @property
    def is_reduced(self) -> bool:
        """True when no coordinate is constant and no two induce the same wall."""
        n = len(self)
        seen = set()
        for ones in self.coordinate_partitions():
            if len(ones) in (0, n):
                return False
            key = ones if 0 not in ones else frozenset(range(n)) - ones
            if key in seen:
                return False
            seen.add(key)
        return True

    def reduced(self) -> tuple:
        """Drop constant and duplicate coordinates.

        Returns ``(algebra, kept_coords)``.  Reduction never changes point
        ranks: two strings first differ at a kept coordinate, so deleting
        the other columns preserves lexicographic order.
        """
        if self._reduced_cache is not None:
            return self._reduced_cache
        n = len(self)
        kept = []
        seen = set()
        for coord, ones in enumerate(self.coordinate_partitions()):
            if len(ones) in (0, n):
                continue
            key = ones if 0 not in ones else frozenset(range(n)) - ones
            if key in seen:
                continue
            seen.add(key)
            kept.append(coord)
        if len(kept) == self.ambient_dim:
            self._reduced_cache = (self, tuple(kept))
            return self._reduced_cache
        d = len(kept)
        new_masks = []
        for m in self._masks:
            out = 0
            for j, coord in enumerate(kept):
                out |= ((m >> (self.ambient_dim - 1 - coord)) & 1) << (d - 1 - j)
            new_masks.append(out)
        if sorted(new_masks) != new_masks:
            # cannot happen: strings first differ at a kept coordinate
            raise InternalCheckError("coordinate reduction reordered the points")
        algebra = MedianAlgebra.from_masks(d, new_masks, name=self.name, _validated=True)
        self._reduced_cache = (algebra, tuple(kept))
        return self._reduced_cache

    def restriction(self, members: Iterable[int], name: Optional[str] = None) -> "MedianAlgebra":
        """Subalgebra view on a median-closed subset (same ambient cube)."""
        ids = sorted(set(members))
        for i in ids:
            self._check_point(i)
        return MedianAlgebra.from_masks(
            self.ambient_dim, [self._masks[i] for i in ids], name=name, _validated=True
        )


# -- operations --------------------------------------------------------------


def median(algebra: MedianAlgebra, x: int, y: int, z: int) -> int:
    """Id of the coordinatewise majority; total by median-closure."""
    for p in (x, y, z):
        algebra._check_point(p)
    return algebra.rank_of_mask(algebra.median_mask(x, y, z))


def interval(algebra: MedianAlgebra, x: int, y: int) -> frozenset:
    """All u with m(x,y,u) = u: the coordinatewise box between x and y."""
    algebra._check_point(x)
    algebra._check_point(y)
    lo = np.uint64(algebra.masks[x] & algebra.masks[y])
    hi = np.uint64(algebra.masks[x] | algebra.masks[y])
    inside = ((algebra._np_masks & ~hi) == 0) & ((algebra._np_masks & lo) == lo)
    return frozenset(int(i) for i in np.nonzero(inside)[0])


def _interval_masks(algebra: MedianAlgebra, mx: int, my: int) -> np.ndarray:
    lo = np.uint64(mx & my)
    hi = np.uint64(mx | my)
    return ((algebra._np_masks & ~hi) == 0) & ((algebra._np_masks & lo) == lo)


def is_convex(algebra: MedianAlgebra, members: Iterable[int]) -> bool:
    """True when the interval between any two members stays inside."""
    ids = sorted(set(members))
    if not ids:
        return True
    inside = np.zeros(len(algebra), dtype=bool)
    inside[ids] = True
    for i in ids:
        for j in ids:
            if j < i:
                continue
            box = _interval_masks(algebra, algebra.masks[i], algebra.masks[j])
            if np.any(box & ~inside):
                return False
    return True


def convex_hull(algebra: MedianAlgebra, members: Iterable[int]) -> frozenset:
    """Smallest convex superset: interval-closure iterated to a fixed point."""
    current = np.zeros(len(algebra), dtype=bool)
    ids = list(set(members))
    if not ids:
        return frozenset()
    current[ids] = True
    while True:
        new = current.copy()
        idx = np.nonzero(current)[0]
        for a in idx:
            for b in idx:
                if b < a:
                    continue
                new |= _interval_masks(algebra, algebra.masks[a], algebra.masks[b])
        if np.array_equal(new, current):
            return frozenset(int(i) for i in idx)
        current = new


def gate(algebra: MedianAlgebra, members: Iterable[int], x: int) -> int:
    """The unique point of a convex set lying between x and every member.

    Iterates y <- m(x, y, z) over members; each change strictly reduces the
    Hamming distance to x, so the loop terminates at the gate.
    """
    ids = sorted(set(members))
    if not ids:
        raise EmptySubsetError("gate of an empty set")
    if not is_convex(algebra, ids):
        raise NotConvex("gate requires a convex set")
    algebra._check_point(x)
    mx = algebra.masks[x]
    y = algebra.masks[ids[0]]
    changed = True
    while changed:
        changed = False
        for z in ids:
            m = majority_mask(mx, y, algebra.masks[z])
            if m != y:
                y = m
                changed = True
    return algebra.rank_of_mask(y)


def product(left: MedianAlgebra, right: MedianAlgebra, name: Optional[str] = None) -> MedianAlgebra:
    """Direct product: concatenated coordinates, coordinatewise median."""
    total = len(left) * len(right)
    if total > max_points():
        raise CapExceeded(f"product would have {total} points (cap {max_points()})")
    dim = left.ambient_dim + right.ambient_dim
    if dim > MAX_AMBIENT_DIM:
        raise CapExceeded(f"product ambient dimension {dim} exceeds {MAX_AMBIENT_DIM}")
    masks = [
        (lm << right.ambient_dim) | rm for lm in left.masks for rm in right.masks
    ]
    return MedianAlgebra.from_masks(dim, masks, name=name, _validated=True)


def median_closure_ids(algebra: MedianAlgebra, members: Iterable[int]) -> frozenset:
    """Smallest median-closed superset of ``members`` inside the algebra.

    Median-closed subsets of a hypercube are exactly the solution sets of
    two-literal clauses, so the closure is the set of points satisfying
    every clause that all of ``members`` satisfy.  Cross-validated against
    direct triple iteration in the test suite.
    """
    ids = sorted(set(members))
    if not ids:
        raise EmptySubsetError("closure of an empty set")
    d = algebra.ambient_dim
    if d == 0:
        return frozenset(ids)
    n = len(algebra)
    shifts = np.array([d - 1 - c for c in range(d)], dtype=np.uint64)
    bits_all = ((algebra._np_masks[:, None] >> shifts[None, :]) & np.uint64(1)).astype(bool)
    # violation matrix over the 2d literals (coord, wanted-bit)
    viol_all = np.concatenate([bits_all, ~bits_all], axis=1)  # lit k<d means bit==0
    viol_members = viol_all[ids]
    # clause (l1 or l2) holds on all members iff no member violates both
    common = viol_members.T.astype(np.int64) @ viol_members.astype(np.int64)
    clause = common == 0
    bad = ((viol_all.astype(np.int64) @ clause.astype(np.int64)) * viol_all).any(axis=1)
    closure = frozenset(int(i) for i in np.nonzero(~bad)[0])
    if not set(ids) <= closure:
        raise InternalCheckError("closure lost a generator")
    return closure


def subalgebra_closure(algebra: MedianAlgebra, members: Iterable[int]) -> tuple:
    """Generated subalgebra as a new view plus the inclusion morphism."""
    closure = median_closure_ids(algebra, members)
    ids = sorted(closure)
    view = algebra.restriction(ids)
    inclusion = Morphism(view, algebra, ids, _validated=True)
    return view, inclusion


def _morphism_violation(point_map: Sequence[int], source: MedianAlgebra, target: MedianAlgebra):
    """First triple where f(m(x,y,z)) != m(fx,fy,fz), or None."""
    f = np.asarray(point_map, dtype=np.int64)
    if f.shape != (len(source),):
        raise NotAMorphism("map must assign a target point to every source point")
    if f.min(initial=0) < 0 or f.max(initial=0) >= len(target):
        raise NotAMorphism("map image outside the target algebra")
    src = source._np_masks
    dst = target._np_masks[f]
    pair_src = src[:, None] & src[None, :]
    pair_dst = dst[:, None] & dst[None, :]
    for x in range(len(source)):
        majs_src = _maj_grid(src, src[x], pair_src)
        majs_dst = _maj_grid(dst, dst[x], pair_dst)
        lhs = dst[source._ranks_of(majs_src)]
        bad = lhs != majs_dst
        if bad.any():
            y, z = map(int, np.argwhere(bad)[0])
            return (x, y, z)
    return None


def is_morphism(point_map: Sequence[int], source: MedianAlgebra, target: MedianAlgebra) -> bool:
    """Exhaustive check of f∘m = m∘(f,f,f) over all triples."""
    try:
        return _morphism_violation(point_map, source, target) is None
    except NotAMorphism:
        return False


class Morphism:
    """A verified median morphism between two algebras."""

    def __init__(
        self,
        source: MedianAlgebra,
        target: MedianAlgebra,
        point_map: Sequence[int],
        _validated: bool = False,
    ):
        self.source = source
        self.target = target
        self.map = tuple(int(v) for v in point_map)
        if len(self.map) != len(source):
            raise NotAMorphism("map must be total on the source")
        if not _validated:
            witness = _morphism_violation(self.map, source, target)
            if witness is not None:
                raise NotAMorphism(f"median identity fails on triple {witness}", witness)

    def __call__(self, point: int) -> int:
        return self.map[point]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Morphism):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.map == other.map
        )

    def __hash__(self) -> int:
        return hash((self.source, self.target, self.map))

    def __repr__(self) -> str:
        return f"<Morphism {len(self.source)}->{len(self.target)} points>"

    def compose(self, inner: "Morphism") -> "Morphism":
        """self ∘ inner; composition of verified morphisms needs no recheck."""
        if inner.target != self.source:
            raise NotAMorphism("composition mismatch")
        return Morphism(
            inner.source, self.target, [self.map[v] for v in inner.map], _validated=True
        )

    @classmethod
    def identity(cls, algebra: MedianAlgebra) -> "Morphism":
        return cls(algebra, algebra, range(len(algebra)), _validated=True)

    def is_injective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    def is_bijective(self) -> bool:
        return self.is_injective() and len(self.source) == len(self.target)


# -- explicit ternary tables --------------------------------------------------


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple


def _as_table(table) -> np.ndarray:
    arr = np.asarray(table, dtype=np.int64)
    if arr.ndim != 3 or len({arr.shape[0], arr.shape[1], arr.shape[2]}) != 1:
        raise InputFormatError("table must be an N x N x N array")
    n = arr.shape[0]
    if n == 0:
        raise EmptySubsetError("table on an empty set")
    if arr.min() < 0 or arr.max() >= n:
        raise InputFormatError("table values must be point indices")
    return arr


def validate_axioms(table) -> Optional[Violation]:
    """Check the three median axioms; None means the table is a median algebra.

    Symmetry and absorption are exhaustive.  The five-variable axiom is
    exhaustive for N <= 40 and checked on 10^6 seeded random tuples above.
    """
    t = _as_table(table)
    n = t.shape[0]
    for axes in ((0, 2, 1), (1, 0, 2)):
        swapped = t.transpose(axes)
        if not np.array_equal(t, swapped):
            x, y, z = map(int, np.argwhere(t != swapped)[0])
            return Violation("Med 1", (x, y, z))
    absorbed = t[np.arange(n), np.arange(n), :]
    if not np.array_equal(absorbed, np.tile(np.arange(n)[:, None], (1, n))):
        x, y = map(int, np.argwhere(absorbed != np.arange(n)[:, None])[0])
        return Violation("Med 2", (x, x, y))
    if n <= EXHAUSTIVE_MED3_LIMIT:
        ids = np.arange(n)
        for u in range(n):
            b = t[:, u, :]  # b[y, v] = m(y, u, v)
            lhs = b[t]  # lhs[x, y, z, v] = m(m(x,y,z), u, v)
            rhs = t[ids[:, None, None, None], b[None, :, None, :], b[None, None, :, :]]
            if not np.array_equal(lhs, rhs):
                x, y, z, v = map(int, np.argwhere(lhs != rhs)[0])
                return Violation("Med 3", (x, y, z, u, v))
    else:
        rng = np.random.default_rng(0)
        idx = rng.integers(0, n, size=(5, RANDOM_CHECK_SAMPLES))
        x, y, z, u, v = idx
        lhs = t[t[x, y, z], u, v]
        rhs = t[x, t[y, u, v], t[z, u, v]]
        if not np.array_equal(lhs, rhs):
            k = int(np.argwhere(lhs != rhs)[0][0])
            return Violation("Med 3", (int(x[k]), int(y[k]), int(z[k]), int(u[k]), int(v[k])))
    return None


def _table_walls(t: np.ndarray) -> list:
    """Walls of a median table: partitions induced by gate maps onto edges."""
    n = t.shape[0]
    ids = np.arange(n)
    partitions = {}
    for a in range(n):
        for b in range(a + 1, n):
            row = t[a, b]
            if np.count_nonzero(row == ids) != 2:
                continue  # not an edge of the covering graph
            side_a = row == a
            if not np.array_equal(~side_a, row == b):
                raise MedlabError("gate onto an edge left the edge; table is not median")
            members = frozenset(int(i) for i in np.nonzero(side_a)[0])
            key = frozenset({members, frozenset(range(n)) - members})
            partitions.setdefault(key, members)
    walls = []
    for key in partitions:
        side0 = next(s for s in key if 0 in s)
        walls.append(tuple(sorted(frozenset(range(n)) - side0)))
    walls.sort(key=lambda canon: (len(canon), canon))
    return walls


def from_table(table, name: Optional[str] = None) -> tuple:
    """Canonicalize an explicit median table into a reduced bit-vector algebra.

    Returns ``(algebra, iso)`` where ``iso[i]`` is the point id of table
    element ``i``.  One coordinate per wall of the table; the bit is
    membership of the side away from element 0, so element 0 maps to the
    all-zeros vector.
    """
    t = _as_table(table)
    violation = validate_axioms(t)
    if violation is not None:
        raise AxiomViolation(violation)
    n = t.shape[0]
    walls = _table_walls(t)
    d = len(walls)
    if d > MAX_AMBIENT_DIM:
        raise CapExceeded(f"{d} walls exceed the ambient dimension cap")
    masks = []
    for i in range(n):
        m = 0
        for j, canon in enumerate(walls):
            if i in canon:
                m |= 1 << (d - 1 - j)
        masks.append(m)
    if len(set(masks)) != n:
        raise MedlabError("walls do not separate the table points; table is not median")
    algebra = MedianAlgebra.from_masks(d, masks, name=name)
    iso = tuple(algebra.rank_of_mask(m) for m in masks)
    # consistency: the embedding must intertwine the table with the majority median
    arr = np.array([algebra.masks[iso[i]] for i in range(n)], dtype=np.uint64)
    pair = arr[:, None] & arr[None, :]
    iso_arr = np.asarray(iso, dtype=np.int64)
    for x in range(n):
        majs = _maj_grid(arr, arr[x], pair)
        if not np.array_equal(algebra._ranks_of(majs), iso_arr[t[x]]):
            raise InternalCheckError("embedding does not intertwine the table median")
    if not algebra.is_reduced:
        raise InternalCheckError("wall embedding produced a non-reduced algebra")
    return algebra, iso
