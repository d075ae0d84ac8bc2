"""
Points, affine k-planes and their incidences in F_q^d.

A point is identified by its rank ``sum code_i q^i``.  A ``Flat`` is stored in
canonical form: its direction space as a reduced row-echelon matrix and its
basepoint as the unique coset representative vanishing on the pivot
coordinates.  Equal point sets therefore have identical canonical forms, which
makes ``Flat`` hashable in O(1).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ffradon.cache import TableCache, default_cache
from ffradon.errors import DimensionMismatchError, EmptyInputError, SizeCapExceededError
from ffradon.field_core import Elem, FieldCtx
from ffradon.logging_config import get_logger

if TYPE_CHECKING:
    from ffradon.config import Caps

logger = get_logger(__name__)

Vector = Tuple[Elem, ...]

DEFAULT_MAX_POINTS = 2**24
DEFAULT_MAX_PLANES = 2**22


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------

def gaussian_binomial(d: int, k: int, q: int) -> int:
    """Number of k-dimensional linear subspaces of F_q^d."""
    if k < 0 or k > d:
        return 0
    num, den = 1, 1
    for i in range(k):
        num *= q ** (d - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def count_kplanes(d: int, k: int, q: int) -> int:
    """|Π_k| = GaussianBinomial(d, k)_q · q^(d-k)."""
    return gaussian_binomial(d, k, q) * q ** (d - k)


def count_planes_through_point(d: int, k: int, q: int) -> int:
    """Every point lies on GaussianBinomial(d, k)_q k-planes."""
    return gaussian_binomial(d, k, q)


# ---------------------------------------------------------------------------
# Linear algebra over F_q
# ---------------------------------------------------------------------------

def vec_add(field: FieldCtx, a: Sequence[Elem], b: Sequence[Elem]) -> Vector:
    return tuple(field.add(x, y) for x, y in zip(a, b))


def vec_sub(field: FieldCtx, a: Sequence[Elem], b: Sequence[Elem]) -> Vector:
    return tuple(field.sub(x, y) for x, y in zip(a, b))


def vec_scale(field: FieldCtx, c: Elem, a: Sequence[Elem]) -> Vector:
    return tuple(field.mul(c, x) for x in a)


def dot(field: FieldCtx, a: Sequence[Elem], b: Sequence[Elem]) -> Elem:
    total = 0
    for x, y in zip(a, b):
        total = field.add(total, field.mul(x, y))
    return total


def row_reduce(field: FieldCtx, rows: Sequence[Sequence[Elem]]) -> Tuple[Tuple[Vector, ...], Tuple[int, ...]]:
    """
    Reduced row-echelon form of *rows* over F_q.

    Returns the nonzero rows (each with a leading 1 in its pivot column and
    zeros in every other pivot column) and the pivot columns.
    """
    matrix = [list(r) for r in rows]
    if not matrix:
        return (), ()
    ncols = len(matrix[0])
    pivots: List[int] = []
    rank = 0
    for col in range(ncols):
        pivot_row = next((i for i in range(rank, len(matrix)) if matrix[i][col]), None)
        if pivot_row is None:
            continue
        matrix[rank], matrix[pivot_row] = matrix[pivot_row], matrix[rank]
        scale = field.inv(matrix[rank][col])
        matrix[rank] = [field.mul(scale, v) for v in matrix[rank]]
        for i in range(len(matrix)):
            if i != rank and matrix[i][col]:
                c = matrix[i][col]
                matrix[i] = [field.sub(a, field.mul(c, b)) for a, b in zip(matrix[i], matrix[rank])]
        pivots.append(col)
        rank += 1
        if rank == len(matrix):
            break
    return tuple(tuple(r) for r in matrix[:rank]), tuple(pivots)


def reduce_against(
    field: FieldCtx, vector: Sequence[Elem], rows: Sequence[Vector], pivots: Sequence[int]
) -> Vector:
    """Subtract the RREF *rows* so that *vector* vanishes on every pivot column."""
    out = list(vector)
    for row, piv in zip(rows, pivots):
        c = out[piv]
        if c:
            out = [field.sub(a, field.mul(c, b)) for a, b in zip(out, row)]
    return tuple(out)


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    """A point of F_q^d: coordinates (element codes) and mixed-radix rank."""

    coords: Vector
    rank: int

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class AffineSpace:
    """F_q^d with point rank/unrank and vectorised coordinate tables."""

    field: FieldCtx
    d: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"dimension must be at least 1, got {self.d}")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def size(self) -> int:
        return self.q**self.d

    @functools.cached_property
    def radix(self) -> np.ndarray:
        return self.q ** np.arange(self.d, dtype=np.int64)

    @functools.cached_property
    def coords(self) -> np.ndarray:
        """``(q^d, d)`` array; row r holds the coordinates of the point of rank r."""
        ranks = np.arange(self.size, dtype=np.int64)
        table = (ranks[:, None] // self.radix[None, :]) % self.q
        table.setflags(write=False)
        return table

    def rank(self, coords: Sequence[Elem]) -> int:
        if len(coords) != self.d:
            raise DimensionMismatchError(f"expected {self.d} coordinates, got {len(coords)}")
        return sum(self.field.element(c) * self.q**i for i, c in enumerate(coords))

    def unrank(self, rank: int) -> Point:
        if not 0 <= rank < self.size:
            raise ValueError(f"rank {rank} outside [0, {self.size})")
        coords = tuple((rank // self.q**i) % self.q for i in range(self.d))
        return Point(coords, rank)

    def point(self, coords: Sequence[Elem]) -> Point:
        return Point(tuple(int(c) for c in coords), self.rank(coords))

    @property
    def origin(self) -> Point:
        return Point((0,) * self.d, 0)

    def ranks_of(self, coords: np.ndarray) -> np.ndarray:
        """Vectorised rank of an ``(..., d)`` coordinate array."""
        return coords @ self.radix

    def dot_matrix(self, duals: np.ndarray) -> np.ndarray:
        """``D[i, x] = duals[i] · x`` over F_q for every point x (element codes)."""
        add, mul = self.field.add_table, self.field.mul_table
        acc = np.zeros((duals.shape[0], self.size), dtype=np.int64)
        for i in range(self.d):
            acc = add[acc, mul[duals[:, i, None], self.coords[None, :, i]]]
        return acc

    @functools.cached_property
    def scale_table(self) -> np.ndarray:
        """``S[c, x]`` = rank of c·x for every scalar c and point x."""
        mul = self.field.mul_table
        scaled = mul[np.arange(self.q)[:, None, None], self.coords[None, :, :]]
        return self.ranks_of(scaled)


def enumerate_points(
    field: FieldCtx, d: int, max_points: int = DEFAULT_MAX_POINTS
) -> List[Point]:
    """All q^d points of F_q^d in rank order."""
    space = AffineSpace(field, d)
    if space.size > max_points:
        raise SizeCapExceededError("point set", space.size, max_points)
    return [Point(tuple(int(c) for c in row), r) for r, row in enumerate(space.coords.tolist())]


# ---------------------------------------------------------------------------
# Flats
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Flat:
    """
    An affine flat in canonical form.

    Attributes:
        space: The ambient F_q^d.
        basepoint: Coset representative, zero on every pivot coordinate.
        directions: RREF basis of the direction space (k rows).
        pivots: Pivot column of each direction row.
    """

    space: AffineSpace
    basepoint: Vector
    directions: Tuple[Vector, ...]
    pivots: Tuple[int, ...] = field(compare=False)

    @classmethod
    def from_parametrization(
        cls, space: AffineSpace, basepoint: Sequence[Elem], directions: Sequence[Sequence[Elem]]
    ) -> "Flat":
        """Canonicalize an arbitrary basepoint and spanning set of directions."""
        if len(basepoint) != space.d or any(len(v) != space.d for v in directions):
            raise DimensionMismatchError("basepoint and directions must have d coordinates")
        rows, pivots = row_reduce(space.field, directions)
        base = reduce_against(space.field, [int(c) for c in basepoint], rows, pivots)
        return cls(space, base, rows, pivots)

    @property
    def dim(self) -> int:
        return len(self.directions)

    @property
    def d(self) -> int:
        return self.space.d

    def contains(self, coords: Sequence[Elem]) -> bool:
        reduced = reduce_against(self.space.field, coords, self.directions, self.pivots)
        return reduced == self.basepoint

    def point_ranks(self) -> np.ndarray:
        """Ranks of the q^k points, ordered by the coefficient vector's rank."""
        field_ = self.space.field
        q, k = field_.q, self.dim
        coeff_ranks = np.arange(q**k, dtype=np.int64)
        coeffs = (coeff_ranks[:, None] // (q ** np.arange(k, dtype=np.int64))[None, :]) % q
        coords = np.broadcast_to(np.array(self.basepoint, dtype=np.int64), (q**k, self.d)).copy()
        for i, row in enumerate(self.directions):
            step = field_.mul_table[coeffs[:, i, None], np.array(row, dtype=np.int64)[None, :]]
            coords = field_.add_table[coords, step]
        return self.space.ranks_of(coords)

    def points(self) -> List[Point]:
        return [self.space.unrank(int(r)) for r in self.point_ranks()]

    def describe(self) -> str:
        """Canonical descriptor, e.g. ``base=(0,1) dirs=[(1,2)]``."""
        base = "(" + ",".join(map(str, self.basepoint)) + ")"
        dirs = ",".join("(" + ",".join(map(str, r)) + ")" for r in self.directions)
        return f"base={base} dirs=[{dirs}]"

    def __str__(self) -> str:
        return self.describe()


def _check_space(flat: Flat, x: Point | Sequence[Elem]) -> Vector:
    coords = x.coords if isinstance(x, Point) else tuple(x)
    if len(coords) != flat.d:
        raise DimensionMismatchError(f"point has {len(coords)} coordinates, flat lives in d={flat.d}")
    return coords


def incident(flat: Flat, x: Point | Sequence[Elem]) -> bool:
    """True iff x lies on *flat*."""
    if isinstance(x, Point) and any(not 0 <= c < flat.space.q for c in x.coords):
        raise DimensionMismatchError("point coordinates do not belong to the flat's field")
    return flat.contains(_check_space(flat, x))


def affine_span(points: Sequence[Point | Sequence[Elem]], space: Optional[AffineSpace] = None, field: Optional[FieldCtx] = None) -> Flat:
    """
    Smallest affine subspace containing *points*.

    The span's dimension is the rank of {x_i - x_0}.  Pass the ambient
    ``space`` (or its ``field``) so coordinates can be interpreted.
    """
    if not points:
        raise EmptyInputError("affine span of an empty point list")
    coords = [p.coords if isinstance(p, Point) else tuple(int(c) for c in p) for p in points]
    d = len(coords[0])
    if any(len(c) != d for c in coords):
        raise DimensionMismatchError("points of different dimensions")
    if space is None:
        if field is None:
            raise ValueError("affine_span needs the ambient space or field")
        space = AffineSpace(field, d)
    elif space.d != d:
        raise DimensionMismatchError(f"points have {d} coordinates, space has d={space.d}")
    base = coords[0]
    diffs = [vec_sub(space.field, c, base) for c in coords[1:]]
    return Flat.from_parametrization(space, base, diffs)


def count_lines_through(flat: Flat) -> int:
    """
    Number of lines containing *flat*.

    (q^d - 1)/(q - 1) for a point, 1 for a line, and 0 for anything larger
    (no line contains a flat of dimension 2 or more).
    """
    q, d = flat.space.q, flat.d
    if flat.dim == 0:
        return (q**d - 1) // (q - 1)
    if flat.dim == 1:
        return 1
    return 0


# ---------------------------------------------------------------------------
# Enumeration of Π_k
# ---------------------------------------------------------------------------

def _iter_rref(field: FieldCtx, d: int, k: int) -> Iterator[Tuple[Tuple[Vector, ...], Tuple[int, ...]]]:
    """Every k x d RREF matrix of rank k, pivots in lexicographic order."""
    q = field.q
    for pivots in itertools.combinations(range(d), k):
        pivot_set = set(pivots)
        free: List[Tuple[int, int]] = [
            (i, c) for i, piv in enumerate(pivots) for c in range(piv + 1, d) if c not in pivot_set
        ]
        for values in itertools.product(range(q), repeat=len(free)):
            rows = [[0] * d for _ in range(k)]
            for i, piv in enumerate(pivots):
                rows[i][piv] = 1
            for (i, c), v in zip(free, values):
                rows[i][c] = v
            yield tuple(tuple(r) for r in rows), pivots


def _iter_kplanes(space: AffineSpace, k: int) -> Iterator[Flat]:
    d, q = space.d, space.q
    for rows, pivots in _iter_rref(space.field, d, k):
        others = [c for c in range(d) if c not in pivots]
        for values in itertools.product(range(q), repeat=len(others)):
            base = [0] * d
            for c, v in zip(others, values):
                base[c] = v
            yield Flat(space, tuple(base), rows, pivots)


def enumerate_kplanes(
    field: FieldCtx,
    d: int,
    k: int,
    max_planes: int = DEFAULT_MAX_PLANES,
) -> List[Flat]:
    """
    All affine k-planes of F_q^d, each exactly once.

    Order: pivot columns (lexicographic), then free direction entries, then
    basepoint coordinates off the pivots.
    """
    if not 1 <= k <= d - 1:
        raise ValueError(f"need 1 <= k <= d-1, got k={k}, d={d}")
    expected = count_kplanes(d, k, field.q)
    if expected > max_planes:
        raise SizeCapExceededError("plane family", expected, max_planes)
    planes = list(_iter_kplanes(AffineSpace(field, d), k))
    return planes


class HyperplaneKind(str, Enum):
    """H: hyperplanes missing the origin; THETA: hyperplanes through it."""

    H = "H"
    THETA = "Theta"


@dataclass(frozen=True)
class HyperplaneDual:
    """
    A hyperplane with its dual vector w′.

    For kind H, ``flat = {x : w′·x = 1}``; for kind Θ, ``flat = {x : w′·x = 0}``
    with w′ normalized to leading nonzero coordinate 1.
    """

    kind: HyperplaneKind
    dual: Vector
    flat: Flat


def hyperplane_normal(flat: Flat) -> Vector:
    """A nonzero vector orthogonal to every direction of a hyperplane."""
    d = flat.d
    if flat.dim != d - 1:
        raise ValueError(f"expected a hyperplane (dim {d - 1}), got dim {flat.dim}")
    field_ = flat.space.field
    free = next(c for c in range(d) if c not in flat.pivots)
    normal = [0] * d
    normal[free] = 1
    for row, piv in zip(flat.directions, flat.pivots):
        normal[piv] = field_.neg(row[free])
    return tuple(normal)


def hyperplane_dual(flat: Flat) -> HyperplaneDual:
    field_ = flat.space.field
    normal = hyperplane_normal(flat)
    level = dot(field_, normal, flat.basepoint)
    if level == 0:
        lead = next(c for c in normal if c)
        return HyperplaneDual(HyperplaneKind.THETA, vec_scale(field_, field_.inv(lead), normal), flat)
    return HyperplaneDual(HyperplaneKind.H, vec_scale(field_, field_.inv(level), normal), flat)


def hyperplane_split(
    field: FieldCtx, d: int, max_planes: int = DEFAULT_MAX_PLANES
) -> List[HyperplaneDual]:
    """Tag every hyperplane of Π_{d-1} (in enumeration order) as H or Θ with its dual."""
    if d < 2:
        raise ValueError(f"hyperplane split needs d >= 2, got {d}")
    return [hyperplane_dual(w) for w in enumerate_kplanes(field, d, d - 1, max_planes)]


# ---------------------------------------------------------------------------
# Plane families (cached)
# ---------------------------------------------------------------------------

class PlaneFamily:
    """
    The enumerated family Π_k of F_q^d together with its incidence table.

    ``incidence[i]`` lists the ranks of the q^k points of plane i; the table
    is built once per (q, d, k) and shared read-only.
    """

    def __init__(self, space: AffineSpace, k: int, max_planes: int = DEFAULT_MAX_PLANES) -> None:
        self.space = space
        self.k = k
        self.flats: List[Flat] = enumerate_kplanes(space.field, space.d, k, max_planes)
        self.index: Dict[Flat, int] = {w: i for i, w in enumerate(self.flats)}
        self.incidence = np.stack([w.point_ranks() for w in self.flats])
        self.incidence.setflags(write=False)
        logger.info(
            "Enumerated %d %d-planes of F_%d^%d", len(self.flats), k, space.q, space.d
        )

    @property
    def key(self) -> Tuple:
        return (self.space.field.key, self.space.d, self.k)

    @property
    def size(self) -> int:
        return len(self.flats)

    def __len__(self) -> int:
        return len(self.flats)

    def nbytes_estimate(self) -> int:
        return int(self.incidence.nbytes) + 200 * len(self.flats)

    @functools.cached_property
    def incidence_matrix(self):
        """Sparse 0/1 matrix ``A[w, x] = 1`` iff x ∈ w (scipy CSR)."""
        from scipy import sparse

        rows = np.repeat(np.arange(self.size), self.incidence.shape[1])
        data = np.ones(rows.size, dtype=np.float64)
        return sparse.csr_matrix(
            (data, (rows, self.incidence.ravel())), shape=(self.size, self.space.size)
        )

    @functools.cached_property
    def hyperplane_duals(self) -> List[HyperplaneDual]:
        if self.k != self.space.d - 1:
            raise ValueError("H/Θ split only exists for hyperplanes")
        return [hyperplane_dual(w) for w in self.flats]


def plane_family(
    space: AffineSpace,
    k: int,
    caps: Optional["Caps"] = None,
    cache: Optional[TableCache] = None,
) -> PlaneFamily:
    """The cached ``PlaneFamily`` for (space, k), honouring the point and plane caps."""
    max_points = caps.max_points if caps else DEFAULT_MAX_POINTS
    max_planes = caps.max_planes if caps else DEFAULT_MAX_PLANES
    if space.size > max_points:
        raise SizeCapExceededError("point set", space.size, max_points)
    cache = cache or default_cache()
    return cache.get_or_build(
        ("family", space.field.key, space.d, k),
        lambda: PlaneFamily(space, k, max_planes),
    )
