import random
from itertools import combinations

import pytest

from medlab.algebra import convex_hull, is_convex
from medlab.errors import (
    EmptySubsetError,
    NotDisjointError,
    NotMedianClosed,
    NotReduced,
    SameWallError,
    TooLargeError,
)
from medlab.generators import grid, hypercube, path, star, tree
from medlab.walls import (
    CubeCertificate,
    NotCube,
    brute_force_halfspaces,
    delta,
    detect_cube,
    enumerate_walls,
    gate_representative,
    is_transverse,
    separate,
    wall_embedding,
    walls_of,
)


def wall_partitions(walls):
    return {w.partition for w in walls}


def halfspace_partitions(halfspaces):
    return {frozenset({h.members, h.complement}) for h in halfspaces}


# -- enumeration -----------------------------------------------------------------


def test_cube3_has_three_face_walls():
    cube3 = hypercube(3)
    walls = enumerate_walls(cube3)
    assert len(walls) == 3
    for wall in walls:
        assert len(wall.positive) == len(wall.negative) == 4


def test_path3_walls():
    p = path(3)  # points 00, 10, 11
    walls = enumerate_walls(p)
    assert len(walls) == 2
    assert wall_partitions(walls) == {
        frozenset({frozenset({0}), frozenset({1, 2})}),
        frozenset({frozenset({0, 1}), frozenset({2})}),
    }


def test_single_point_has_no_walls():
    assert enumerate_walls(hypercube(0)) == []


def test_enumerate_requires_reduced():
    from medlab.algebra import MedianAlgebra

    unreduced = MedianAlgebra(2, ["01", "10"])
    with pytest.raises(NotReduced):
        enumerate_walls(unreduced)
    assert len(walls_of(unreduced)) == 1


# -- brute-force oracle ------------------------------------------------------------


def test_square_has_four_halfspaces():
    halves = brute_force_halfspaces(hypercube(2))
    assert len(halves) == 4
    assert len(halfspace_partitions(halves)) == 2


def test_path3_has_four_halfspaces():
    halves = brute_force_halfspaces(path(3))
    assert len(halves) == 4
    assert len(halfspace_partitions(halves)) == 2


def test_single_point_has_no_halfspaces():
    assert brute_force_halfspaces(hypercube(0)) == []


def test_brute_force_cap():
    with pytest.raises(TooLargeError):
        brute_force_halfspaces(hypercube(5))


def test_all_halfspaces_are_convex_both_sides():
    for algebra in (hypercube(3), path(4), star(3), grid(2, 3)):
        for half in brute_force_halfspaces(algebra):
            half.validate()


def test_oracle_matches_enumeration(small_corpus):
    for algebra in small_corpus:
        coordinate = wall_partitions(enumerate_walls(algebra))
        exhaustive = halfspace_partitions(brute_force_halfspaces(algebra))
        assert coordinate == exhaustive, algebra.name


# -- separation --------------------------------------------------------------------


def test_delta_corner_pair():
    cube2 = hypercube(2)
    found = delta(cube2, {cube2.rank_of_string("00")}, {cube2.rank_of_string("11")})
    assert len(found) == 2
    assert {frozenset(h.members) for h in found} == {
        frozenset({0, 1}),
        frozenset({0, 2}),
    }


def test_delta_adjacent_pair_is_single_wall():
    cube3 = hypercube(3)
    found = delta(cube3, {cube3.rank_of_string("000")}, {cube3.rank_of_string("001")})
    assert len(found) == 1
    assert found[0].members == frozenset(
        i for i in range(8) if cube3.point_string(i).endswith("0")
    )


def test_delta_nonconvex_can_be_empty():
    cube2 = hypercube(2)
    assert delta(cube2, {0, 3}, {1, 2}) == []


def test_delta_validations():
    cube2 = hypercube(2)
    with pytest.raises(EmptySubsetError):
        delta(cube2, set(), {1})
    with pytest.raises(NotDisjointError):
        delta(cube2, {0, 1}, {1, 2})


def test_delta_nonempty_for_disjoint_convex(tiny_pool):
    rng = random.Random(17)
    checked = 0
    while checked < 200:
        algebra = rng.choice(tiny_pool)
        n = len(algebra)
        a = convex_hull(algebra, rng.sample(range(n), k=rng.randint(1, min(2, n))))
        b = convex_hull(algebra, rng.sample(range(n), k=rng.randint(1, min(2, n))))
        if not a or not b or (a & b):
            continue
        checked += 1
        assert delta(algebra, a, b), (algebra.name, sorted(a), sorted(b))


def test_separate_examples():
    cube2 = hypercube(2)
    half = separate(cube2, {0}, {3})
    assert 0 in half.members and 3 not in half.members
    cube3 = hypercube(3)
    face = {0, 1, 2, 3}
    got = separate(cube3, face, {7})
    assert got.members == frozenset(face)


def test_separate_singletons_always_work(tiny_pool):
    rng = random.Random(3)
    for _ in range(100):
        algebra = rng.choice(tiny_pool)
        x, y = rng.sample(range(len(algebra)), k=2) if len(algebra) > 1 else (0, 0)
        if x == y:
            continue
        half = separate(algebra, {x}, {y})
        assert x in half.members and y not in half.members


def test_separate_deterministic():
    cube3 = hypercube(3)
    runs = [separate(cube3, {0}, {7}).members for _ in range(3)]
    assert len(set(runs)) == 1


# -- gate representative -------------------------------------------------------------


def test_gate_representative_face():
    cube3 = hypercube(3)
    face = {0, 1, 2, 3}
    rep = gate_representative(cube3, face, {7})
    assert cube3.point_string(rep) == "011"


def test_gate_representative_singleton():
    cube3 = hypercube(3)
    assert gate_representative(cube3, {5}, {0}) == 5


def test_gate_representative_interval_case():
    cube3 = hypercube(3)
    box = convex_hull(cube3, [cube3.rank_of_string("000"), cube3.rank_of_string("011")])
    rep = gate_representative(cube3, box, {cube3.rank_of_string("100"), cube3.rank_of_string("111")})
    assert rep in box


# -- transversality -------------------------------------------------------------------


def test_square_walls_transverse():
    cube2 = hypercube(2)
    w = enumerate_walls(cube2)
    assert is_transverse(cube2, w[0], w[1])


def test_path_walls_not_transverse():
    p = path(3)
    w = enumerate_walls(p)
    assert not is_transverse(p, w[0], w[1])


def test_cube3_wall_pairs_transverse():
    cube3 = hypercube(3)
    w = enumerate_walls(cube3)
    for a, b in combinations(w, 2):
        assert is_transverse(cube3, a, b)


def test_same_wall_rejected():
    cube2 = hypercube(2)
    w = enumerate_walls(cube2)
    with pytest.raises(SameWallError):
        is_transverse(cube2, w[0], w[0])


def test_pairwise_transverse_iff_embedding_onto(tiny_pool):
    # with up to four walls, surjectivity of the indicator map is equivalent
    # to pairwise transversality
    rng = random.Random(9)
    for _ in range(120):
        algebra = rng.choice(tiny_pool)
        walls = walls_of(algebra)
        if not walls:
            continue
        k = rng.randint(1, min(4, len(walls)))
        chosen = rng.sample(walls, k=k)
        embedding = wall_embedding(algebra, chosen)
        onto = len(set(embedding.map)) == 2**k
        pairwise = all(
            is_transverse(algebra, a, b) for a, b in combinations(chosen, 2)
        )
        assert onto == pairwise


# -- embeddings ------------------------------------------------------------------------


def test_full_wall_embedding_of_cube_is_automorphism():
    cube3 = hypercube(3)
    emb = wall_embedding(cube3, enumerate_walls(cube3))
    assert emb.is_bijective()


def test_single_wall_embedding_of_path():
    p = path(3)
    wall = enumerate_walls(p)[0]
    emb = wall_embedding(p, [wall])
    assert sorted(emb.map) == [0, 1, 1]


def test_empty_embedding_is_constant():
    p = path(4)
    emb = wall_embedding(p, [])
    assert set(emb.map) == {0}
    assert len(emb.target) == 1


# -- cube detection ----------------------------------------------------------------------


def test_detect_full_cubes():
    for n in range(5):
        cert = detect_cube(hypercube(n))
        assert isinstance(cert, CubeCertificate)
        assert cert.dim == n
        assert len(cert.parent_ids) == 2**n
        assert cert.iso.is_bijective()


def test_detect_rejects_paths_and_stars():
    for algebra in (path(3), path(5), star(3), star(4)):
        verdict = detect_cube(algebra)
        assert isinstance(verdict, NotCube)
        assert verdict.reason == "non-transverse wall pair"


def test_detect_anti_diagonal_is_one_cube():
    cube2 = hypercube(2)
    cert = detect_cube(cube2, {1, 2})
    assert isinstance(cert, CubeCertificate)
    assert cert.dim == 1
    assert cert.parent_points() == ("01", "10")


def test_detect_requires_median_closed():
    cube3 = hypercube(3)
    with pytest.raises(NotMedianClosed):
        detect_cube(cube3, {cube3.rank_of_string("001"), cube3.rank_of_string("010"),
                            cube3.rank_of_string("100")})


def test_detect_grid_not_cube():
    verdict = detect_cube(grid(2, 3))
    assert isinstance(verdict, NotCube)


def test_certificate_iso_roundtrip():
    cube2 = hypercube(2)
    cert = detect_cube(cube2)
    for i in range(len(cert.sub)):
        assert cert.inverse.map[cert.iso.map[i]] == i
