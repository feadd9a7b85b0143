import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medlab.algebra import (
    MedianAlgebra,
    Morphism,
    convex_hull,
    from_table,
    gate,
    interval,
    is_convex,
    is_morphism,
    median,
    median_closure_ids,
    product,
    subalgebra_closure,
    validate_axioms,
)
from medlab.errors import (
    AxiomViolation,
    EmptySubsetError,
    InputFormatError,
    NotAMorphism,
    NotConvex,
    NotMedianClosed,
)
from medlab.generators import hypercube, path


def path_table(n):
    """Median table of an n-point path: the middle of three indices."""
    return [[[sorted((x, y, z))[1] for z in range(n)] for y in range(n)] for x in range(n)]


# -- construction ---------------------------------------------------------------


def test_points_sorted_and_deduped():
    alg = MedianAlgebra(2, ["11", "00", "01"])
    assert alg.points == ("00", "01", "11")
    with pytest.raises(InputFormatError):
        MedianAlgebra(2, ["00", "00", "01"])


def test_empty_algebra_rejected():
    with pytest.raises(EmptySubsetError):
        MedianAlgebra(1, [])


def test_non_closed_rejected():
    with pytest.raises(NotMedianClosed):
        MedianAlgebra(3, ["000", "011", "101"])


def test_bad_bitstring_rejected():
    with pytest.raises(InputFormatError):
        MedianAlgebra(2, ["00", "0x"])
    with pytest.raises(InputFormatError):
        MedianAlgebra(2, ["00", "011"])


# -- median ----------------------------------------------------------------------


def test_median_absorption_in_cube():
    cube3 = hypercube(3)
    a = cube3.rank_of_string("101")
    b = cube3.rank_of_string("010")
    assert median(cube3, a, a, b) == a


def test_median_majority():
    cube2 = hypercube(2)
    ids = [cube2.rank_of_string(s) for s in ("00", "01", "11")]
    assert cube2.point_string(median(cube2, *ids)) == "01"


def test_median_middle_of_path():
    p = MedianAlgebra(2, ["00", "01", "11"])
    m = median(p, p.rank_of_string("00"), p.rank_of_string("11"), p.rank_of_string("01"))
    assert p.point_string(m) == "01"


# -- axioms on tables -------------------------------------------------------------


def test_majority_table_is_median():
    assert validate_axioms(hypercube(2).median_table()) is None


def test_single_point_table():
    assert validate_axioms([[[0]]]) is None


def test_mutated_table_caught():
    table = np.array(hypercube(2).median_table(), dtype=np.int64)
    table[0, 1, 3] = 3  # overwrite m(00,01,11)
    violation = validate_axioms(table)
    assert violation is not None
    assert violation.axiom in ("Med 1", "Med 2", "Med 3")


def test_fully_symmetrized_mutation_caught():
    # mutate all six permutations of one triple so Med 1 stays intact;
    # on the 3-path such a mutation just relabels the path, so use 4 points
    table = np.array(path_table(4), dtype=np.int64)
    for x, y, z in [(0, 1, 3), (0, 3, 1), (1, 0, 3), (1, 3, 0), (3, 0, 1), (3, 1, 0)]:
        table[x, y, z] = 3
    violation = validate_axioms(table)
    assert violation is not None
    assert violation.axiom in ("Med 2", "Med 3")


# -- from_table -------------------------------------------------------------------


def test_from_table_square():
    algebra, iso = from_table(hypercube(2).median_table())
    assert algebra.ambient_dim == 2
    assert len(algebra) == 4
    assert sorted(iso) == [0, 1, 2, 3]


def test_from_table_path():
    algebra, iso = from_table(path_table(3))
    assert algebra.ambient_dim == 2
    assert algebra.points == ("00", "01", "11")
    assert iso == (0, 1, 2)


def test_from_table_single_point():
    algebra, iso = from_table([[[0]]])
    assert algebra.ambient_dim == 0
    assert len(algebra) == 1
    assert iso == (0,)


def test_from_table_rejects_bad_table():
    table = np.array(path_table(3), dtype=np.int64)
    table[0, 1, 2] = 2
    with pytest.raises(AxiomViolation):
        from_table(table)


def test_from_table_roundtrip_is_isomorphism():
    for source in (hypercube(3), path(5)):
        algebra, iso = from_table(source.median_table())
        assert len(algebra) == len(source)
        assert is_morphism(iso, source, algebra)


# -- intervals and convexity -------------------------------------------------------


def test_interval_box():
    cube3 = hypercube(3)
    got = interval(cube3, cube3.rank_of_string("000"), cube3.rank_of_string("011"))
    assert {cube3.point_string(i) for i in got} == {"000", "001", "010", "011"}


def test_interval_of_point_is_point():
    cube3 = hypercube(3)
    x = cube3.rank_of_string("101")
    assert interval(cube3, x, x) == frozenset({x})


def test_interval_spans_path():
    p = path(3)
    assert interval(p, 0, len(p) - 1) == frozenset(range(3))


def test_face_is_convex():
    cube3 = hypercube(3)
    face = [i for i in range(8) if cube3.point_string(i).startswith("0")]
    assert is_convex(cube3, face)


def test_diagonal_pair_not_convex():
    cube3 = hypercube(3)
    pair = [cube3.rank_of_string("000"), cube3.rank_of_string("011")]
    assert not is_convex(cube3, pair)


def test_empty_set_is_convex():
    assert is_convex(hypercube(3), [])


def test_convex_hull_of_diagonal():
    cube3 = hypercube(3)
    hull = convex_hull(cube3, [cube3.rank_of_string("000"), cube3.rank_of_string("011")])
    assert {cube3.point_string(i) for i in hull} == {"000", "001", "010", "011"}


def test_convex_hull_edge_cases():
    cube3 = hypercube(3)
    assert convex_hull(cube3, []) == frozenset()
    face = frozenset(range(4))
    assert convex_hull(cube3, face) == face


def test_convex_hull_is_closure_operator(tiny_pool):
    rng = random.Random(11)
    for _ in range(200):
        algebra = rng.choice(tiny_pool)
        members = frozenset(rng.sample(range(len(algebra)), k=rng.randint(0, min(4, len(algebra)))))
        hull = convex_hull(algebra, members)
        assert members <= hull
        assert convex_hull(algebra, hull) == hull
        assert is_convex(algebra, hull)
        bigger = members | {rng.randrange(len(algebra))} if len(algebra) else members
        assert hull <= convex_hull(algebra, bigger)


# -- gates -----------------------------------------------------------------------


def test_gate_onto_face():
    cube3 = hypercube(3)
    face = [i for i in range(8) if cube3.point_string(i).startswith("0")]
    got = gate(cube3, face, cube3.rank_of_string("111"))
    assert cube3.point_string(got) == "011"


def test_gate_onto_interval_is_median(tiny_pool):
    rng = random.Random(5)
    for _ in range(200):
        algebra = rng.choice(tiny_pool)
        n = len(algebra)
        x, y, z = (rng.randrange(n) for _ in range(3))
        box = interval(algebra, x, y)
        assert gate(algebra, box, z) == median(algebra, x, y, z)


def test_gate_of_member_is_itself():
    cube3 = hypercube(3)
    face = [0, 1, 2, 3]
    assert gate(cube3, face, 2) == 2


def test_gate_requires_convex_nonempty():
    cube3 = hypercube(3)
    with pytest.raises(EmptySubsetError):
        gate(cube3, [], 0)
    with pytest.raises(NotConvex):
        gate(cube3, [0, 3], 7)


# -- products ----------------------------------------------------------------------


def test_product_of_edges_is_square():
    square = product(hypercube(1), hypercube(1))
    assert square == hypercube(2)


def test_product_path_times_edge():
    got = product(path(3), hypercube(1))
    assert len(got) == 6
    assert validate_axioms(got.median_table()) is None


def test_product_with_point_is_identity():
    p = path(4)
    got = product(p, hypercube(0))
    assert got.ambient_dim == p.ambient_dim
    assert got.points == p.points


# -- subalgebra closure -------------------------------------------------------------


def brute_force_closure(algebra, members):
    """Oracle: iterate the ternary operation directly to a fixed point."""
    current = set(members)
    while True:
        added = set()
        items = list(current)
        for x in items:
            for y in items:
                for z in items:
                    m = median(algebra, x, y, z)
                    if m not in current:
                        added.add(m)
        if not added:
            return frozenset(current)
        current |= added


def test_closure_of_two_points():
    cube3 = hypercube(3)
    pair = [cube3.rank_of_string("000"), cube3.rank_of_string("111")]
    assert median_closure_ids(cube3, pair) == frozenset(pair)


def test_closure_adds_majority():
    cube3 = hypercube(3)
    ids = [cube3.rank_of_string(s) for s in ("001", "010", "100")]
    closed = median_closure_ids(cube3, ids)
    assert {cube3.point_string(i) for i in closed} == {"000", "001", "010", "100"}


def test_closure_of_subalgebra_is_itself():
    p = path(4)
    assert median_closure_ids(p, range(len(p))) == frozenset(range(len(p)))


def test_closure_matches_bruteforce(tiny_pool):
    rng = random.Random(23)
    for _ in range(150):
        algebra = rng.choice(tiny_pool)
        k = rng.randint(1, min(5, len(algebra)))
        members = rng.sample(range(len(algebra)), k=k)
        assert median_closure_ids(algebra, members) == brute_force_closure(algebra, members)


def test_subalgebra_closure_view_and_inclusion():
    cube3 = hypercube(3)
    ids = [cube3.rank_of_string(s) for s in ("001", "010", "100")]
    view, inclusion = subalgebra_closure(cube3, ids)
    assert len(view) == 4
    assert inclusion.source is view and inclusion.target is cube3
    assert {cube3.point_string(i) for i in inclusion.map} == {"000", "001", "010", "100"}
    with pytest.raises(EmptySubsetError):
        subalgebra_closure(cube3, [])


# -- morphisms ---------------------------------------------------------------------


def test_coordinate_projection_is_morphism():
    cube3, cube2 = hypercube(3), hypercube(2)
    projection = [i >> 1 for i in range(8)]  # drop the last coordinate
    assert is_morphism(projection, cube3, cube2)


def test_constant_map_is_morphism():
    cube3 = hypercube(3)
    assert is_morphism([5] * 8, cube3, cube3)


def test_swap_is_morphism_but_collapsing_map_is_not():
    cube2 = hypercube(2)
    assert is_morphism([0, 2, 1, 3], cube2, cube2)
    # send 00 to 11 and fix the rest: not a morphism
    assert not is_morphism([3, 1, 2, 3], cube2, cube2)
    # the antipodal transposition, by contrast, is the diagonal reflection
    assert is_morphism([3, 1, 2, 0], cube2, cube2)


def test_morphism_constructor_verifies():
    cube2 = hypercube(2)
    with pytest.raises(NotAMorphism):
        Morphism(cube2, cube2, [3, 1, 2, 3])
    ok = Morphism(cube2, cube2, [0, 2, 1, 3])
    assert ok(1) == 2


def test_gate_projection_is_morphism_and_maps_intervals(tiny_pool):
    rng = random.Random(31)
    for _ in range(60):
        algebra = rng.choice(tiny_pool)
        n = len(algebra)
        seedset = rng.sample(range(n), k=rng.randint(1, min(3, n)))
        region = convex_hull(algebra, seedset)
        mapping = [gate(algebra, region, x) for x in range(n)]
        projection = Morphism(algebra, algebra, mapping)
        x, y = rng.randrange(n), rng.randrange(n)
        image = {projection(u) for u in interval(algebra, x, y)}
        assert image == interval(algebra, projection(x), projection(y)) & frozenset(region) or \
            image == interval(algebra, projection(x), projection(y))


# -- randomized axiom properties -----------------------------------------------------


@st.composite
def random_subset_algebra(draw):
    dim = draw(st.integers(min_value=1, max_value=4))
    size = draw(st.integers(min_value=1, max_value=6))
    masks = draw(
        st.lists(st.integers(min_value=0, max_value=2**dim - 1), min_size=1, max_size=size)
    )
    cube = hypercube(dim)
    closed = median_closure_ids(cube, [cube.rank_of_mask(m) for m in set(masks)])
    return cube.restriction(sorted(closed))


@given(random_subset_algebra(), st.data())
@settings(max_examples=150, deadline=None)
def test_median_axioms_on_random_subalgebras(algebra, data):
    n = len(algebra)
    pick = st.integers(min_value=0, max_value=n - 1)
    x, y, z, u, v = (data.draw(pick) for _ in range(5))
    assert median(algebra, x, y, z) == median(algebra, x, z, y) == median(algebra, y, x, z)
    assert median(algebra, x, x, y) == x
    lhs = median(algebra, median(algebra, x, y, z), u, v)
    rhs = median(algebra, x, median(algebra, y, u, v), median(algebra, z, u, v))
    assert lhs == rhs


@given(random_subset_algebra(), st.data())
@settings(max_examples=150, deadline=None)
def test_interval_laws(algebra, data):
    n = len(algebra)
    pick = st.integers(min_value=0, max_value=n - 1)
    x, z = data.draw(pick), data.draw(pick)
    box = interval(algebra, x, z)
    for y in range(n):
        between = y in box
        if between:
            assert interval(algebra, x, y) <= box
        assert (interval(algebra, x, y) & interval(algebra, y, z) == frozenset({y})) == between
