"""Exact probability measures and the self-median operator.

The self-median operator pushes the triple product of a measure through the
median: the new mass at y is the total mass of triples whose coordinatewise
majority is y.  Its fixed points are called balanced measures, and at this
scale they are exactly the uniform measures on cubes, which is what
``classify_balanced`` certifies.

Exact evaluation scales the weights to a common denominator D and sums
integer products, using a vectorized int64 path when D^3 fits and
arbitrary-precision ints otherwise.  Float iteration is the fast,
no-guarantee search phase: iterate, snap to small dyadic rationals, then
re-verify exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .algebra import MedianAlgebra, Morphism, MEDIAN_TABLE_LIMIT, median_closure_ids
from .errors import CapExceeded, InternalCheckError, NotBalancedInput
from .walls import CubeCertificate, HalfSpace, NotCube, detect_cube

logger = logging.getLogger("medlab")

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
# np.add.at on int64 stays exact while D^3 (the total integer mass) fits
_INT64_SAFE = 2**62


class Measure:
    """An exact non-negative rational weight per point, summing to 1."""

    __slots__ = ("algebra", "weights")

    def __init__(self, algebra: MedianAlgebra, weights: Iterable):
        ws = tuple(Fraction(w) for w in weights)
        if len(ws) != len(algebra):
            raise ValueError(f"expected {len(algebra)} weights, got {len(ws)}")
        if any(w < 0 for w in ws):
            raise ValueError("weights must be non-negative")
        if sum(ws) != 1:
            raise ValueError(f"weights sum to {sum(ws)}, not 1")
        self.algebra = algebra
        self.weights = ws

    @classmethod
    def point_mass(cls, algebra: MedianAlgebra, point: int) -> "Measure":
        algebra._check_point(point)
        return cls(algebra, [int(i == point) for i in range(len(algebra))])

    @classmethod
    def uniform(cls, algebra: MedianAlgebra) -> "Measure":
        n = len(algebra)
        return cls(algebra, [Fraction(1, n)] * n)

    def __getitem__(self, point: int) -> Fraction:
        return self.weights[point]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Measure):
            return NotImplemented
        return self.algebra == other.algebra and self.weights == other.weights

    def __hash__(self) -> int:
        return hash((self.algebra, self.weights))

    def __repr__(self) -> str:
        support_size = sum(1 for w in self.weights if w)
        return f"<Measure on {len(self.algebra)} points, support {support_size}>"

    def as_floats(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])


@dataclass
class FloatMeasure:
    """Float iteration workspace; renormalized, tiny negatives clamped."""

    algebra: MedianAlgebra
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.algebra),):
            raise ValueError(f"expected {len(self.algebra)} weights")
        if w.min(initial=0.0) < -1e-15:
            raise ValueError("negative weight beyond clamping tolerance")
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if not math.isfinite(total) or abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total}, not 1")
        self.weights = w / total


@dataclass(frozen=True)
class IterationResult:
    measure: FloatMeasure
    iterations: int
    residual: float
    converged: bool


@dataclass(frozen=True)
class CubicalCertificate:
    """A balanced measure certified as uniform on a cube."""

    cube: CubeCertificate
    uniform: bool
    measure: "Measure"

    def __bool__(self) -> bool:
        return True

    @property
    def dim(self) -> int:
        return self.cube.dim


@dataclass(frozen=True)
class NotCubical:
    """Failed classification; by theory unreachable for balanced input."""

    witness: tuple

    def __bool__(self) -> bool:
        return False


# -- the operator -------------------------------------------------------------


def _common_denominator(weights) -> tuple:
    denom = math.lcm(*(w.denominator for w in weights))
    nums = [int(w * denom) for w in weights]
    return denom, nums


def _phi_numerators(algebra: MedianAlgebra, nums: list, denom: int) -> list:
    """Numerators of the pushed measure over denominator denom**3."""
    n = len(algebra)
    if n <= MEDIAN_TABLE_LIMIT and denom**3 < _INT64_SAFE:
        flat = algebra.median_table().reshape(-1).astype(np.int64)
        arr = np.asarray(nums, dtype=np.int64)
        cube = np.einsum("i,j,k->ijk", arr, arr, arr).reshape(-1)
        out = np.zeros(n, dtype=np.int64)
        np.add.at(out, flat, cube)
        return [int(v) for v in out]
    # arbitrary-precision fallback, sparse in the support
    out = [0] * n
    live = [i for i, v in enumerate(nums) if v]
    masks = algebra.masks
    rank = algebra.rank_of_mask
    for a in live:
        na, ma = nums[a], masks[a]
        for b in live:
            nab = na * nums[b]
            mb = masks[b]
            for c in live:
                out[rank(majority_mask(ma, mb, masks[c]))] += nab * nums[c]
    return out


def phi(measure: Measure) -> Measure:
    """Push the triple product of the measure through the median, exactly."""
    algebra = measure.algebra
    denom, nums = _common_denominator(measure.weights)
    out = _phi_numerators(algebra, nums, denom)
    total = denom**3
    if sum(out) != total:
        raise InternalCheckError("pushed mass does not sum to 1")
    return Measure(algebra, [Fraction(v, total) for v in out])


def is_balanced(measure: Measure) -> bool:
    """Exact fixed-point test for the self-median operator."""
    return phi(measure) == measure


def support(measure: Measure) -> frozenset:
    """Ids of points with positive mass; non-empty by normalization."""
    return frozenset(i for i, w in enumerate(measure.weights) if w)


def pushforward(morphism: Morphism, measure: Measure) -> Measure:
    """Sum the mass over each fiber of the map."""
    if measure.algebra != morphism.source:
        raise ValueError("measure lives on a different algebra than the map's source")
    out = [Fraction(0)] * len(morphism.target)
    for i, w in enumerate(measure.weights):
        out[morphism.map[i]] += w
    return Measure(morphism.target, out)


def halfspace_mass(measure: Measure, halfspace: Union[HalfSpace, Iterable]) -> Fraction:
    """Total mass of one side of a wall."""
    members = halfspace.members if isinstance(halfspace, HalfSpace) else halfspace
    return sum((measure.weights[i] for i in members), start=Fraction(0))


def uniform_on_cube(algebra: MedianAlgebra, certificate: CubeCertificate) -> Measure:
    """Mass 1/2^k on each point of a certified k-cube."""
    if certificate.parent != algebra:
        raise ValueError("certificate belongs to a different algebra")
    share = Fraction(1, 2**certificate.dim)
    weights = [Fraction(0)] * len(algebra)
    for i in certificate.parent_ids:
        weights[i] = share
    return Measure(algebra, weights)


# -- float iteration and snapping ---------------------------------------------


def _float_phi_step(flat_table: np.ndarray, weights: np.ndarray) -> np.ndarray:
    cube = np.einsum("i,j,k->ijk", weights, weights, weights).reshape(-1)
    out = np.bincount(flat_table, weights=cube, minlength=len(weights))
    return out / out.sum()


def iterate_phi(
    algebra: MedianAlgebra,
    start: Union[FloatMeasure, Measure, np.ndarray],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> IterationResult:
    """Iterate the operator in floating point until the step norm drops below tol.

    Non-convergence is reported, not raised; the residual is the max-norm
    distance between the returned measure and one further application.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if len(algebra) > MEDIAN_TABLE_LIMIT:
        raise CapExceeded(f"float iteration needs the median table (<= {MEDIAN_TABLE_LIMIT} points)")
    if isinstance(start, Measure):
        w = start.as_floats()
    elif isinstance(start, FloatMeasure):
        w = start.weights.copy()
    else:
        w = FloatMeasure(algebra, np.asarray(start, dtype=float)).weights
    flat = algebra.median_table().reshape(-1).astype(np.int64)
    iterations = 0
    converged = False
    for _ in range(max_iter):
        new = _float_phi_step(flat, w)
        step = float(np.abs(new - w).max())
        w = new
        iterations += 1
        if step < tol:
            converged = True
            break
    residual = float(np.abs(_float_phi_step(flat, w) - w).max())
    return IterationResult(
        measure=FloatMeasure(algebra, w),
        iterations=iterations,
        residual=residual,
        converged=converged,
    )


def snap_and_verify(
    algebra: MedianAlgebra,
    float_measure: FloatMeasure,
    max_denominator_log2: Optional[int] = None,
) -> Optional[Measure]:
    """Round to dyadic rationals and keep the result only if exactly balanced.

    Balanced measures here are uniform on cubes, so denominators 2^j with
    j up to ambient_dim + 2 cover every genuine limit.  Returns None when
    the float data is not near a dyadic balanced measure.
    """
    if max_denominator_log2 is None:
        max_denominator_log2 = algebra.ambient_dim + 2
    denom = 2**max_denominator_log2
    scaled = [round(max(float(w), 0.0) * denom) for w in float_measure.weights]
    total = sum(scaled)
    if total == 0:
        return None
    candidate = Measure(algebra, [Fraction(v, total) for v in scaled])
    if is_balanced(candidate):
        return candidate
    return None


def classify_balanced(
    algebra: MedianAlgebra, measure: Measure
) -> Union[CubicalCertificate, NotCubical]:
    """Certify a balanced measure as uniform on a cube.

    The negative branch contradicts the classification this package is
    built around, so reaching it is reported loudly before returning.
    """
    if measure.algebra != algebra:
        raise ValueError("measure lives on a different algebra")
    if not is_balanced(measure):
        raise NotBalancedInput("classify_balanced requires an exactly balanced measure")
    supp = support(measure)
    closed = median_closure_ids(algebra, supp)
    if closed != supp:
        witness = ("support-not-median-closed", tuple(sorted(closed - supp)))
        logger.error("FALSIFICATION CANDIDATE: %s on %r", witness, algebra)
        return NotCubical(witness)
    cube = detect_cube(algebra, supp)
    if isinstance(cube, NotCube):
        witness = ("support-not-a-cube", cube.reason, cube.witness)
        logger.error("FALSIFICATION CANDIDATE: %s on %r", witness, algebra)
        return NotCubical(witness)
    share = Fraction(1, 2**cube.dim)
    for i in cube.parent_ids:
        if measure.weights[i] != share:
            witness = ("not-uniform-on-support", i, str(measure.weights[i]), str(share))
            logger.error("FALSIFICATION CANDIDATE: %s on %r", witness, algebra)
            return NotCubical(witness)
    return CubicalCertificate(cube=cube, uniform=True, measure=measure)


# -- seeded fixed-point search -------------------------------------------------


@dataclass(frozen=True)
class StartRecord:
    """Outcome of one iteration start."""

    index: int
    start_seed: tuple
    kind: str
    converged: bool
    iterations: int
    residual: float
    snapped: bool
    accepted: Optional[bool]
    cubical: Optional[bool]
    cube_dim: Optional[int]

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "start_seed": list(self.start_seed),
            "kind": self.kind,
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "snapped": self.snapped,
            "accepted": self.accepted,
            "cubical": self.cubical,
            "cube_dim": self.cube_dim,
        }


@dataclass(frozen=True)
class ScanResult:
    """Per-start records plus the distinct verified measures, in first-seen order."""

    records: tuple
    results: tuple  # pairs (Measure, CubicalCertificate | NotCubical)

    @property
    def snap_rate(self) -> float:
        if not self.records:
            return 0.0
        return sum(1 for r in self.records if r.snapped) / len(self.records)

    def counterexamples(self) -> list:
        return [(m, v) for m, v in self.results if isinstance(v, NotCubical)]


def fixed_point_scan(
    algebra: MedianAlgebra,
    starts: int,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    symmetrize: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    accept: Optional[Callable[[Measure], bool]] = None,
    jobs: int = 1,
) -> ScanResult:
    """Search for balanced measures from seeded starts and classify the finds.

    Start 0 is always the uniform measure: it is the canonical candidate, it
    is the unique fully supported fixed point when the algebra is a cube, and
    random starts are repelled from it there (the linearization expands along
    single-coordinate directions), so without it the fully supported case
    would almost never be reached.  Remaining starts draw from a Dirichlet
    via PCG64 seeded with (seed, index).

    ``symmetrize`` (e.g. a group average) is applied to every start;
    ``accept`` filters snapped measures by an exact side condition (e.g.
    exact invariance) before classification.
    """
    if starts < 1:
        raise ValueError("need at least one start")
    n = len(algebra)
    algebra.median_table()  # build the shared cache before any worker runs

    def make_start(index: int) -> np.ndarray:
        if index == 0:
            return np.full(n, 1.0 / n)
        rng = np.random.default_rng([seed, index])
        return rng.dirichlet(np.ones(n))

    def run_one(index: int) -> tuple:
        w = make_start(index)
        if symmetrize is not None:
            w = np.asarray(symmetrize(w), dtype=float)
            w = w / w.sum()
        result = iterate_phi(algebra, w, tol=tol, max_iter=max_iter)
        snapped = snap_and_verify(algebra, result.measure)
        return index, result, snapped

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_one, range(starts)))
    else:
        outcomes = [run_one(i) for i in range(starts)]

    records = []
    results = []
    seen: dict = {}
    for index, result, snapped in outcomes:
        accepted = None
        cubical = None
        cube_dim = None
        if snapped is not None:
            accepted = True if accept is None else bool(accept(snapped))
            if accepted:
                key = snapped.weights
                if key not in seen:
                    verdict = classify_balanced(algebra, snapped)
                    seen[key] = verdict
                    results.append((snapped, verdict))
                verdict = seen[key]
                cubical = not isinstance(verdict, NotCubical)
                cube_dim = verdict.dim if cubical else None
        records.append(
            StartRecord(
                index=index,
                start_seed=(seed, index),
                kind="uniform" if index == 0 else "dirichlet",
                converged=result.converged,
                iterations=result.iterations,
                residual=result.residual,
                snapped=snapped is not None,
                accepted=accepted,
                cubical=cubical,
                cube_dim=cube_dim,
            )
        )
    return ScanResult(records=tuple(records), results=tuple(results))
