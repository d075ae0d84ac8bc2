"""
Certification of the L^p → L^r estimates for k-plane transforms.

Covers the exponent region (hull membership and the three necessity
witnesses with their log-log exponent fits), seeded step-function
generators, the Δ(s) / L(l) incidence counters behind the X-ray estimate,
the character-sum bounds behind the Radon estimate, and exhaustive
restricted-type constants.  Norm maximisation lives in ``ffradon.search``.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ffradon.errors import (
    EmptySetError,
    InfeasibleLevelsError,
    OutOfSquareError,
    SizeCapExceededError,
    TooFewPointsError,
    TooLargeExactError,
)
from ffradon.executor_manager import ExecutorManager, run_ordered
from ffradon.field_core import field_for_order
from ffradon.geometry import (
    AffineSpace,
    Flat,
    count_lines_through,
    plane_family,
    vec_sub,
)
from ffradon.logging_config import get_logger
from ffradon.measures import Exponent, ExponentLike, batch_norms, lr_norm_planes
from ffradon.reports import IncidenceReport, LemmaReport
from ffradon.transforms import GridFunction, PlaneFunction, kplane_transform, radon_char_parts, transform_batch

if TYPE_CHECKING:
    from ffradon.config import Caps, Tolerances

logger = get_logger(__name__)

DEFAULT_TUPLE_BUDGET = 10**8
LEMMA_TOLERANCE = 1e-12
WITNESS_KINDS = ("delta", "kflat", "constant")
# least-squares slopes of exact powers land within rounding of the grid values
FIT_SLACK = 1e-6


def spread(values: Sequence[float]) -> float:
    """max / min of positive values (1.0 for a single value)."""
    values = list(values)
    if not values:
        return 1.0
    return max(values) / min(values)


def space_for(q: int, d: int, caps: Optional["Caps"] = None) -> AffineSpace:
    max_order = caps.max_field_order if caps else 1024
    space = AffineSpace(field_for_order(q, max_order), d)
    max_points = caps.max_points if caps else 2**24
    if space.size > max_points:
        raise SizeCapExceededError("point set", space.size, max_points)
    return space


# ---------------------------------------------------------------------------
# Exponent region
# ---------------------------------------------------------------------------

class HullRegion(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class HullSpec:
    """The quadrilateral of admissible (1/p, 1/r) pairs, vertices counterclockwise."""

    d: int
    k: int

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.d - 1:
            raise ValueError(f"need 1 <= k <= d-1, got k={self.k}, d={self.d}")

    @property
    def critical_vertex(self) -> Tuple[Fraction, Fraction]:
        return Fraction(self.k + 1, self.d + 1), Fraction(1, self.d + 1)

    @property
    def vertices(self) -> Tuple[Tuple[Fraction, Fraction], ...]:
        zero, one = Fraction(0), Fraction(1)
        return ((zero, zero), self.critical_vertex, (one, one), (zero, one))


Coordinate = Union[Fraction, int, float, str]


def hull_contains(d: int, k: int, x: Tuple[Coordinate, Coordinate]) -> HullRegion:
    """Classify (1/p, 1/r) against the hull with exact rational arithmetic."""
    point = tuple(Fraction(c) for c in x)
    if any(not 0 <= c <= 1 for c in point):
        raise OutOfSquareError(f"({x[0]}, {x[1]}) is outside the unit square")
    vertices = HullSpec(d, k).vertices
    on_edge = False
    for (ax, ay), (bx, by) in zip(vertices, vertices[1:] + vertices[:1]):
        cross = (bx - ax) * (point[1] - ay) - (by - ay) * (point[0] - ax)
        if cross < 0:
            return HullRegion.OUTSIDE
        if cross == 0:
            on_edge = True
    return HullRegion.BOUNDARY if on_edge else HullRegion.INTERIOR


def delta_exponent(d: int, k: int, p: ExponentLike, r: ExponentLike) -> Fraction:
    """Growth exponent of the point-mass ratio: d/p - k - (d-k)/r."""
    inv_p, inv_r = Exponent.parse(p).reciprocal, Exponent.parse(r).reciprocal
    return d * inv_p - k - (d - k) * inv_r


def kflat_exponent(d: int, k: int, p: ExponentLike, r: ExponentLike) -> Fraction:
    """Growth exponent of the self-incidence term of a k-flat indicator."""
    inv_p, inv_r = Exponent.parse(p).reciprocal, Exponent.parse(r).reciprocal
    return (d - k) * (inv_p - (k + 1) * inv_r)


# ---------------------------------------------------------------------------
# Witness families
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=256)
def _witness_profile(kind: str, q: int, d: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """(f, T f) for a witness family; independent of the exponents."""
    space = space_for(q, d)
    family = plane_family(space, k)
    if kind == "delta":
        f = GridFunction.indicator(space, [0])
    elif kind == "kflat":
        f = GridFunction.indicator(space, family.incidence[0].tolist())
    elif kind == "constant":
        f = GridFunction.constant(space)
    else:
        raise ValueError(f"Unknown witness kind '{kind}'. Supported: {', '.join(WITNESS_KINDS)}")
    tf = kplane_transform(f, k)
    return f.values, tf.values


def witness_ratio(kind: str, q: int, d: int, k: int, p: ExponentLike, r: ExponentLike) -> float:
    """
    Norm ratio of a necessity witness: point mass, k-flat indicator or constant.

    The point-mass ratio is checked against q^(d/p - k - (d-k)/r).
    """
    f, tf = _witness_profile(kind, q, d, k)
    ratio = float(batch_norms(tf[None, :], r)[0] / batch_norms(f[None, :], p)[0])
    if kind == "delta":
        closed = float(q) ** float(delta_exponent(d, k, p, r))
        if abs(ratio - closed) > 1e-9 * max(1.0, closed):
            raise ArithmeticError(
                f"point-mass ratio {ratio!r} disagrees with closed form {closed!r} "
                f"(q={q}, d={d}, k={k}, p={p}, r={r})"
            )
    return ratio


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares fit log(ratio) ≈ alpha·log(q) + intercept."""

    kind: str
    alpha: float
    intercept: float
    residual: float
    q_list: Tuple[int, ...]
    ratios: Tuple[float, ...]


def exponent_fit(
    kind: str, d: int, k: int, p: ExponentLike, r: ExponentLike, q_list: Sequence[int]
) -> ExponentFit:
    """Slope of log(witness_ratio) against log(q)."""
    q_list = tuple(q_list)
    if len(q_list) < 3:
        raise TooFewPointsError(f"exponent fit needs at least 3 field orders, got {len(q_list)}")
    ratios = tuple(witness_ratio(kind, q, d, k, p, r) for q in q_list)
    x = np.log(np.array(q_list, dtype=float))
    y = np.log(np.array(ratios))
    coeffs, residuals, *_ = np.polyfit(x, y, 1, full=True)
    residual = float(residuals[0]) if residuals.size else 0.0
    return ExponentFit(kind, float(coeffs[0]), float(coeffs[1]), residual, q_list, ratios)


@dataclass
class SharpnessPoint:
    """One (1/p, 1/r) grid point with its region and witness slopes."""

    inv_p: Fraction
    inv_r: Fraction
    region: HullRegion
    alphas: Dict[str, float]
    violations: List[str] = field(default_factory=list)

    @property
    def p(self) -> Exponent:
        return Exponent.from_reciprocal(self.inv_p)

    @property
    def r(self) -> Exponent:
        return Exponent.from_reciprocal(self.inv_r)


def classify_grid_point(
    d: int,
    k: int,
    inv_p: Fraction,
    inv_r: Fraction,
    q_list: Sequence[int],
    tolerances: Optional["Tolerances"] = None,
) -> SharpnessPoint:
    inside_tol = tolerances.inside_tolerance if tolerances else 0.01
    outside_min = tolerances.outside_threshold if tolerances else 0.05
    region = hull_contains(d, k, (inv_p, inv_r))
    p, r = Exponent.from_reciprocal(inv_p), Exponent.from_reciprocal(inv_r)
    alphas = {kind: exponent_fit(kind, d, k, p, r, q_list).alpha for kind in WITNESS_KINDS}
    point = SharpnessPoint(inv_p, inv_r, region, alphas)

    closed = float(delta_exponent(d, k, p, r))
    if abs(alphas["delta"] - closed) > inside_tol:
        point.violations.append(f"delta slope {alphas['delta']:.4f} != closed form {closed:.4f}")
    if region is HullRegion.OUTSIDE:
        if max(alphas.values()) < outside_min - FIT_SLACK:
            point.violations.append(f"no witness grows outside the hull (max slope {max(alphas.values()):.6f})")
    else:
        for kind, limit in (("delta", inside_tol), ("constant", inside_tol), ("kflat", outside_min)):
            if alphas[kind] > limit + FIT_SLACK:
                point.violations.append(f"{kind} slope {alphas[kind]:.4f} > {limit} inside the hull")
    return point


def sharpness_scan(
    d: int,
    k: int,
    q_list: Sequence[int],
    grid: int = 21,
    tolerances: Optional["Tolerances"] = None,
) -> List[SharpnessPoint]:
    """Classify every point of a grid × grid lattice in [0,1]^2, row-major in 1/r then 1/p."""
    if grid < 2:
        raise ValueError(f"grid resolution must be at least 2, got {grid}")
    steps = [Fraction(i, grid - 1) for i in range(grid)]
    points = [
        classify_grid_point(d, k, inv_p, inv_r, q_list, tolerances)
        for inv_r in steps
        for inv_p in steps
    ]
    bad = sum(1 for pt in points if pt.violations)
    logger.info("Sharpness grid %dx%d for d=%d, k=%d: %d violations", grid, grid, d, k, bad)
    return points


# ---------------------------------------------------------------------------
# Step functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepFunction:
    """
    f = scale · sum_j 2^-j · 1_{E_j} with pairwise disjoint E_j.

    ``rho`` is the normalisation exponent (d+1)/(k+1); the unscaled sizes obey
    |E_j| <= 2^(rho j) and ``scale`` makes sum_x f(x)^rho = 1.
    """

    space: AffineSpace
    rho: Fraction
    levels: Tuple[Tuple[int, ...], ...]
    scale: float
    seed: int

    @property
    def raw_mass(self) -> float:
        rho = float(self.rho)
        return math.fsum(2.0 ** (-rho * j) * len(level) for j, level in enumerate(self.levels))

    @property
    def normalized_mass(self) -> float:
        """scale^rho · sum_j 2^(-rho j) |E_j|; equals 1 after normalisation."""
        return self.scale ** float(self.rho) * self.raw_mass

    def values(self) -> np.ndarray:
        out = np.zeros(self.space.size, dtype=np.float64)
        for j, level in enumerate(self.levels):
            out[list(level)] = self.scale * 2.0 ** (-j)
        return out

    def to_function(self) -> GridFunction:
        return GridFunction(self.space, self.values())

    def describe(self) -> str:
        sizes = "/".join(str(len(level)) for level in self.levels)
        return f"step seed={self.seed} levels={sizes}"


def level_cap(rho: Fraction, j: int) -> int:
    """floor(2^(rho j))."""
    return int(math.floor(2.0 ** (float(rho) * j) + 1e-9))


def gen_step_function(
    seed: int,
    q: int,
    d: int,
    k: int,
    level_count: int,
    space: Optional[AffineSpace] = None,
) -> StepFunction:
    """
    Seeded step function with ``level_count`` disjoint nonempty levels.

    Level sizes are drawn uniformly and clipped to 2^(rho j).

    Raises:
        InfeasibleLevelsError: more levels than points.
    """
    if level_count < 1:
        raise ValueError(f"level_count must be at least 1, got {level_count}")
    space = space or space_for(q, d)
    if level_count > space.size:
        raise InfeasibleLevelsError(
            f"cannot place {level_count} disjoint nonempty levels in {space.size} points"
        )
    rho = Fraction(d + 1, k + 1)
    rng = np.random.default_rng(np.random.SeedSequence([seed, q, d, k, level_count]))
    order = rng.permutation(space.size)
    levels: List[Tuple[int, ...]] = []
    used = 0
    for j in range(level_count):
        available = space.size - used - (level_count - j - 1)
        size = int(rng.integers(1, min(level_cap(rho, j), available) + 1))
        levels.append(tuple(sorted(int(x) for x in order[used : used + size])))
        used += size
    raw = math.fsum(2.0 ** (-float(rho) * j) * len(level) for j, level in enumerate(levels))
    scale = raw ** (-1.0 / float(rho))
    return StepFunction(space, rho, tuple(levels), scale, seed)


def step_function_mass(step: StepFunction) -> float:
    """sum_x f(x)^rho (unnormalised counting measure)."""
    return math.fsum((step.values() ** float(step.rho)).tolist())


# ---------------------------------------------------------------------------
# Incidence counting
# ---------------------------------------------------------------------------

def _extend(flat: Flat, coords: Tuple[int, ...], memo: Dict[Tuple[Flat, Tuple[int, ...]], Flat]) -> Flat:
    key = (flat, coords)
    found = memo.get(key)
    if found is None:
        if flat.contains(coords):
            found = flat
        else:
            step = vec_sub(flat.space.field, coords, flat.basepoint)
            found = Flat.from_parametrization(flat.space, flat.basepoint, flat.directions + (step,))
        memo[key] = found
    return found


def _check_sets(space: AffineSpace, sets: Sequence[Sequence[int]], tuple_budget: int) -> List[List[Tuple[int, ...]]]:
    if len(sets) != space.d + 1:
        raise ValueError(f"expected d+1 = {space.d + 1} sets, got {len(sets)}")
    if any(len(s) == 0 for s in sets):
        raise EmptySetError("every set E_i must be nonempty")
    total = math.prod(len(s) for s in sets)
    if total > tuple_budget:
        raise TooLargeExactError(f"{total} tuples exceed the exact-count budget {tuple_budget}")
    return [[space.unrank(int(x)).coords for x in s] for s in sets]


def span_dimension_histogram(
    space: AffineSpace,
    sets: Sequence[Sequence[int]],
    weights: Optional[Sequence[np.ndarray]] = None,
    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
) -> Dict[Flat, float]:
    """
    Total weight of the tuples (x_0..x_d) ∈ E_0 × ... × E_d per affine span.

    Tuples are merged level by level on their running span, so the cost is
    driven by the number of distinct partial spans rather than the tuple
    count.  Without *weights* every tuple counts 1.
    """
    coords = _check_sets(space, sets, tuple_budget)
    memo: Dict[Tuple[Flat, Tuple[int, ...]], Flat] = {}
    states: Dict[Flat, float] = {}
    for i, c in enumerate(coords[0]):
        flat = Flat.from_parametrization(space, c, [])
        w = 1 if weights is None else weights[0][i]
        states[flat] = states.get(flat, 0) + w
    for level in range(1, len(coords)):
        nxt: Dict[Flat, float] = {}
        for flat, mass in states.items():
            for i, c in enumerate(coords[level]):
                new = _extend(flat, c, memo)
                w = mass if weights is None else mass * weights[level][i]
                nxt[new] = nxt.get(new, 0) + w
        states = nxt
    return states


@dataclass(frozen=True)
class DeltaCount:
    """Δ(s) as an exact count or a Monte Carlo estimate."""

    s: int
    value: float
    stderr: float = 0.0
    exact: bool = True
    samples: int = 0


def delta_histogram(
    space: AffineSpace, sets: Sequence[Sequence[int]], tuple_budget: int = DEFAULT_TUPLE_BUDGET
) -> List[int]:
    """[Δ(0), ..., Δ(d)] exactly."""
    hist = [0] * (space.d + 1)
    for flat, count in span_dimension_histogram(space, sets, tuple_budget=tuple_budget).items():
        hist[flat.dim] += int(count)
    return hist


def delta_incidence_count(
    s: int,
    sets: Sequence[Sequence[int]],
    space: AffineSpace,
    mode: str = "exact",
    samples: int = 10_000,
    seed: int = 0,
    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
) -> DeltaCount:
    """
    Number of (d+1)-tuples from E_0 × ... × E_d whose affine span has dimension s.

    ``mode="montecarlo"`` samples tuples uniformly and returns an unbiased
    estimate with its standard error.
    """
    if not 0 <= s <= space.d:
        raise ValueError(f"span dimension must lie in [0, {space.d}], got {s}")
    if mode == "exact":
        return DeltaCount(s, delta_histogram(space, sets, tuple_budget)[s])
    if mode != "montecarlo":
        raise ValueError(f"Unknown counting mode '{mode}'. Supported: exact, montecarlo")
    if any(len(e) == 0 for e in sets):
        raise EmptySetError("every set E_i must be nonempty")
    rng = np.random.default_rng(np.random.SeedSequence([seed, s]))
    arrays = [np.asarray(e, dtype=np.int64) for e in sets]
    total = math.prod(len(e) for e in arrays)
    hits = 0
    for _ in range(samples):
        picks = [space.unrank(int(e[rng.integers(len(e))])) for e in arrays]
        if _span_dim(space, picks) == s:
            hits += 1
    frac = hits / samples
    stderr = total * math.sqrt(frac * (1 - frac) / samples)
    return DeltaCount(s, total * frac, stderr, exact=False, samples=samples)


def _span_dim(space: AffineSpace, points) -> int:
    base = points[0].coords
    flat = Flat.from_parametrization(space, base, [vec_sub(space.field, p.coords, base) for p in points[1:]])
    return flat.dim


def l_class_count(
    l: int,
    sets: Sequence[Sequence[int]],
    space: AffineSpace,
    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
) -> int:
    """
    |L(l)|: tuples spanning a line whose first l points coincide and x_l differs.

    Counted through lines directly: a common point a of E_0..E_{l-1}, a second
    point b of E_l, and the remaining points on the line through a and b.
    """
    d = space.d
    if not 1 <= l <= d:
        raise ValueError(f"l must lie in [1, {d}], got {l}")
    _check_sets(space, sets, tuple_budget)
    common = set(int(x) for x in sets[0])
    for e in sets[1:l]:
        common &= set(int(x) for x in e)
    tail = [set(int(x) for x in e) for e in sets[l + 1 :]]
    total = 0
    for a in sorted(common):
        pa = space.unrank(a)
        for b in sets[l]:
            b = int(b)
            if b == a:
                continue
            line = set(Flat.from_parametrization(
                space, pa.coords, [vec_sub(space.field, space.unrank(b).coords, pa.coords)]
            ).point_ranks().tolist())
            total += math.prod(len(e & line) for e in tail)
    return total


def incidence_check(
    space: AffineSpace,
    sets: Sequence[Sequence[int]],
    seed: int = 0,
    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
) -> IncidenceReport:
    """Δ(s) histogram, L(l) classes, and their exact identities and bounds."""
    started = time.perf_counter()
    q, d = space.q, space.d
    hist = delta_histogram(space, sets, tuple_budget)
    classes = [l_class_count(l, sets, space, tuple_budget) for l in range(1, d + 1)]
    sizes = [len(e) for e in sets]
    violations = []
    if sum(hist) != math.prod(sizes):
        violations.append(f"sum of Δ(s) = {sum(hist)} != product of sizes {math.prod(sizes)}")
    if hist[0] > sizes[0]:
        violations.append(f"Δ(0) = {hist[0]} > |E_0| = {sizes[0]}")
    for l, count in enumerate(classes, start=1):
        bound = sizes[0] * sizes[l] * q ** (d - l)
        if count > bound:
            violations.append(f"L({l}) = {count} > {bound}")
    if sum(classes) != hist[1]:
        violations.append(f"sum of L(l) = {sum(classes)} != Δ(1) = {hist[1]}")
    return IncidenceReport(
        q=q,
        d=d,
        sets=[sorted(int(x) for x in e) for e in sets],
        delta=hist,
        l_classes=classes,
        violations=violations,
        seed=seed,
        elapsed_ms=(time.perf_counter() - started) * 1000,
    )


def incidence_batch(
    q: int,
    d: int,
    trials: int,
    seed: int = 0,
    max_set_size: int = 5,
    executor: Optional[ExecutorManager] = None,
    caps: Optional["Caps"] = None,
) -> List[IncidenceReport]:
    """Seeded random families E_0..E_d with |E_i| <= max_set_size."""
    space = space_for(q, d, caps)
    budget = caps.tuple_budget if caps else DEFAULT_TUPLE_BUDGET
    top = min(max_set_size, space.size)

    def run(index: int) -> IncidenceReport:
        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        sets = [
            rng.choice(space.size, size=int(rng.integers(1, top + 1)), replace=False).tolist()
            for _ in range(d + 1)
        ]
        return incidence_check(space, sets, seed=seed, tuple_budget=budget)

    reports = run_ordered(run, range(trials), executor)
    failed = sum(1 for rep in reports if not rep.passed)
    logger.info("Incidence batch q=%d d=%d: %d instances, %d failed", q, d, trials, failed)
    return reports


@dataclass(frozen=True)
class LineExpansion:
    lhs: complex
    rhs: complex

    @property
    def agrees(self) -> bool:
        return abs(self.lhs - self.rhs) <= 1e-9 * max(1.0, abs(self.lhs))


def line_expansion_check(f: GridFunction, tuple_budget: int = DEFAULT_TUPLE_BUDGET) -> LineExpansion:
    """
    Compare sum_w (sum_{x in w} f(x))^(d+1) over lines with its multilinear
    expansion sum over tuples of prod f(x_i) · #lines containing the tuple.
    """
    space = f.space
    support = f.support().tolist()
    if not support:
        return LineExpansion(0j, 0j)
    lines = kplane_transform(f, 1).values * space.q
    lhs = complex(np.sum(lines ** (space.d + 1)))
    weights = [f.values[support]] * (space.d + 1)
    spans = span_dimension_histogram(space, [support] * (space.d + 1), weights, tuple_budget)
    rhs = complex(sum(mass * count_lines_through(flat) for flat, mass in spans.items()))
    return LineExpansion(lhs, rhs)


# ---------------------------------------------------------------------------
# Radon character-sum bounds
# ---------------------------------------------------------------------------

def _gamma_kernel(space: AffineSpace) -> np.ndarray:
    sums = space.field.nonzero_char_sums
    return sums[space.dot_matrix(space.coords)]


def gamma_table(E: Sequence[int], space: AffineSpace) -> np.ndarray:
    """Γ(w′) = |q^-d sum_{x∈E} sum_{s≠0} χ(s w′·x)|^2 for every w′, indexed by rank."""
    from ffradon.cache import default_cache

    kernel = default_cache().get_or_build(("gamma-kernel", space.field.key, space.d), lambda: _gamma_kernel(space))
    indicator = np.zeros(space.size)
    indicator[list(E)] = 1.0
    return np.abs(kernel @ indicator / space.size) ** 2


def gamma_is_dilation_symmetric(gamma: np.ndarray, space: AffineSpace, tol: float = 1e-9) -> bool:
    """Γ(t w′) = Γ(w′) for every t ≠ 0."""
    scaled = gamma[space.scale_table[1:]]
    return bool(np.all(np.abs(scaled - gamma[None, :]) <= tol * max(1.0, float(gamma.max()))))


def cross_terms(E: Sequence[int], space: AffineSpace, plane_count: int) -> Tuple[float, float]:
    """
    I and II of the expansion of sum over all w′ of the T₁** kernel.

    I = (q-1)|E| / (|Π| q^d);  II = (|Π| q^d)^-1 sum_{s≠s′} χ(s′-s) N(s/s′),
    with N(u) = #{x ∈ E : u·x ∈ E}.
    """
    field_ = space.field
    q = field_.q
    members = np.zeros(space.size, dtype=bool)
    members[list(E)] = True
    ranks = np.flatnonzero(members)
    counts = members[space.scale_table[:, ranks]].sum(axis=1)
    s, s2 = np.meshgrid(np.arange(1, q), np.arange(1, q), indexing="ij")
    off = s != s2
    u = field_.mul_table[s, field_.inv_table[s2]]
    chars = field_.char_table[field_.add_table[s2, field_.neg_table[s]]]
    norm = plane_count * space.size
    term_i = (q - 1) * len(ranks) / norm
    term_ii = float(np.real(np.sum(chars[off] * counts[u[off]]))) / norm
    return term_i, term_ii


def lemma_suite(
    E: Sequence[int],
    q: int,
    d: int,
    seed: int = 0,
    caps: Optional["Caps"] = None,
) -> LemmaReport:
    """
    Measure the T₀**/T₁** norms of 1_E against their explicit bounds.

    Checks sup norms against 2 q^(1-d) |E|, squared L^2(dσ) norms against
    (q-1)|E| / (q^d |Π_{d-1}|), II <= 0, the chain ‖T₁**E‖² <= I + II, the
    dilation symmetry of Γ and, for d >= 3, the interpolated L^((d+1)/2) bound.
    """
    started = time.perf_counter()
    points = sorted(set(int(x) for x in E))
    if not points:
        raise EmptySetError("lemma suite needs a nonempty set")
    space = space_for(q, d, caps)
    f = GridFunction.indicator(space, points)
    parts = radon_char_parts(f, caps=caps)
    family = parts.t0_dstar.family
    size = len(points)

    t0 = np.abs(parts.t0_dstar.values)
    t1 = np.abs(parts.t1_dstar.values)
    sup_bound = 2.0 * q ** (1 - d) * size
    l2_bound = (q - 1) * size / (space.size * family.size)
    sup_t0, sup_t1 = float(t0.max()), float(t1.max())
    l2_t0, l2_t1 = float(np.mean(t0**2)), float(np.mean(t1**2))
    term_i, term_ii = cross_terms(points, space, family.size)
    gamma = gamma_table(points, space)
    symmetric = gamma_is_dilation_symmetric(gamma, space)

    violations = []
    tol = LEMMA_TOLERANCE
    if sup_t0 > sup_bound + tol:
        violations.append(f"sup T0** = {sup_t0} > {sup_bound}")
    if sup_t1 > sup_bound + tol:
        violations.append(f"sup T1** = {sup_t1} > {sup_bound}")
    if l2_t0 > l2_bound + tol:
        violations.append(f"|T0**|_2^2 = {l2_t0} > {l2_bound}")
    if l2_t1 > l2_bound + tol:
        violations.append(f"|T1**|_2^2 = {l2_t1} > {l2_bound}")
    if term_ii > tol:
        violations.append(f"II = {term_ii} > 0")
    if l2_t1 > term_i + term_ii + tol:
        violations.append(f"|T1**|_2^2 = {l2_t1} > I + II = {term_i + term_ii}")
    if not symmetric:
        violations.append("Γ is not dilation invariant")

    interp_norm = interp_bound = None
    if d >= 3:
        r = Fraction(d + 1, 2)
        interp_norm = lr_norm_planes(PlaneFunction(family, t0), r)
        theta = float(2 / r)
        interp_bound = math.sqrt(l2_bound) ** theta * sup_bound ** (1 - theta)
        if interp_norm > interp_bound * (1 + 1e-9):
            violations.append(f"|T0**|_{r} = {interp_norm} > {interp_bound}")

    if violations:
        logger.warning("Lemma checks failed for E=%s (q=%d, d=%d): %s", points, q, d, "; ".join(violations))
    return LemmaReport(
        q=q,
        d=d,
        points=points,
        sup_t0=sup_t0,
        sup_t1=sup_t1,
        sup_bound=sup_bound,
        l2sq_t0=l2_t0,
        l2sq_t1=l2_t1,
        l2sq_bound=l2_bound,
        term_i=term_i,
        term_ii=term_ii,
        gamma_symmetric=symmetric,
        interpolated_norm=interp_norm,
        interpolated_bound=interp_bound,
        violations=violations,
        seed=seed,
        elapsed_ms=(time.perf_counter() - started) * 1000,
    )


def lemma_batch(
    q: int,
    d: int,
    trials: int,
    seed: int = 0,
    executor: Optional[ExecutorManager] = None,
    caps: Optional["Caps"] = None,
) -> List[LemmaReport]:
    """``lemma_suite`` over seeded random subsets of F_q^d."""
    space = space_for(q, d, caps)
    plane_family(space, d - 1, caps)

    def run(index: int) -> LemmaReport:
        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        size = int(rng.integers(1, space.size + 1))
        E = rng.choice(space.size, size=size, replace=False).tolist()
        return lemma_suite(E, q, d, seed=seed, caps=caps)

    reports = run_ordered(run, range(trials), executor)
    failed = sum(1 for rep in reports if not rep.passed)
    logger.info("Lemma batch q=%d d=%d: %d sets, %d failed", q, d, trials, failed)
    return reports


# ---------------------------------------------------------------------------
# Restricted type
# ---------------------------------------------------------------------------

def subset_batches(n: int, batch_size: int = 4096) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """(masks, 0/1 rows) for every nonempty subset of n points, by mask order."""
    total = 1 << n
    bits = np.arange(n, dtype=np.int64)
    for lo in range(1, total, batch_size):
        masks = np.arange(lo, min(lo + batch_size, total), dtype=np.int64)
        yield masks, ((masks[:, None] >> bits[None, :]) & 1).astype(np.float64)


def mask_to_ranks(mask: int) -> List[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


@dataclass
class RestrictedTypeResult:
    d: int
    k: int
    constants: Dict[int, float]
    witnesses: Dict[int, List[int]]

    @property
    def spread(self) -> float:
        return spread(self.constants.values())


def restricted_type_constant(q: int, d: int, k: int, caps: Optional["Caps"] = None) -> Tuple[float, List[int]]:
    """
    max over nonempty E of ‖T 1_E‖_{L^(d+1)} / (|E|/q^d)^((k+1)/(d+1)), exhaustively.
    """
    space = space_for(q, d, caps)
    budget = caps.subset_budget if caps else 2**16
    if 2**space.size > budget:
        raise SizeCapExceededError("subset enumeration", 2**space.size, budget)
    family = plane_family(space, k, caps)
    r = Exponent.vertex_r(d)
    power = float(Fraction(k + 1, d + 1))
    best, best_mask = -1.0, 0
    for masks, rows in subset_batches(space.size):
        norms = batch_norms(transform_batch(rows, family), r)
        ratios = norms / (rows.sum(axis=1) / space.size) ** power
        i = int(np.argmax(ratios))
        if ratios[i] > best:
            best, best_mask = float(ratios[i]), int(masks[i])
    return best, mask_to_ranks(best_mask)


def restricted_type_constants(
    q_list: Sequence[int], d: int, k: int, caps: Optional["Caps"] = None
) -> RestrictedTypeResult:
    constants: Dict[int, float] = {}
    witnesses: Dict[int, List[int]] = {}
    for q in q_list:
        constants[q], witnesses[q] = restricted_type_constant(q, d, k, caps)
        logger.info("Restricted-type constant q=%d d=%d k=%d: %.6f", q, d, k, constants[q])
    return RestrictedTypeResult(d, k, constants, witnesses)
