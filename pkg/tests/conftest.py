"""Shared corpus fixtures.

The corpus mirrors the acceptance setup: small cubes, paths, stars, two
grids, and thirty seeded random subalgebras of the 6-cube.
"""

import pytest

from medlab.generators import grid, hypercube, path, random_subalgebra, star


def build_corpus():
    algebras = []
    algebras += [hypercube(n) for n in range(5)]
    algebras += [path(v) for v in range(2, 7)]
    algebras += [star(leaves) for leaves in range(3, 6)]
    algebras += [grid(2, 3), grid(3, 3)]
    algebras += [
        random_subalgebra(6, k, seed) for k in (3, 5, 8) for seed in range(10)
    ]
    return algebras


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()


@pytest.fixture(scope="session")
def small_corpus(corpus):
    """Members small enough for the exhaustive bipartition oracle."""
    return [a for a in corpus if len(a) <= 14]


@pytest.fixture(scope="session")
def tiny_pool():
    """Small varied algebras for randomized micro-suites."""
    return [
        hypercube(1),
        hypercube(2),
        hypercube(3),
        path(4),
        path(6),
        star(3),
        star(4),
        grid(2, 3),
        grid(3, 3),
        random_subalgebra(4, 5, 1),
        random_subalgebra(5, 4, 2),
        random_subalgebra(5, 6, 3),
    ]
