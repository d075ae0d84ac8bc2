"""
The k-plane transform over F_q^d and the Radon-transform decompositions.

Functions on F_q^d are dense tables indexed by point rank (``GridFunction``),
functions on Π_k are dense tables indexed by the enumeration order of the
cached ``PlaneFamily`` (``PlaneFunction``).  The transform reads the family's
plane → point-rank incidence table, so each evaluation is one gather and one
mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from ffradon.cache import TableCache, default_cache
from ffradon.errors import DimensionMismatchError
from ffradon.geometry import AffineSpace, HyperplaneKind, PlaneFamily, plane_family
from ffradon.logging_config import get_logger

if TYPE_CHECKING:
    from ffradon.config import Caps

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Function types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    """A complex-valued function on F_q^d; ``values[rank]`` is f at that point."""

    space: AffineSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.ndim != 1 or values.shape[0] != self.space.size:
            raise DimensionMismatchError(
                f"expected {self.space.size} values for F_{self.space.q}^{self.space.d}, "
                f"got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("function values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, space: AffineSpace, value: complex = 1.0) -> "GridFunction":
        return cls(space, np.full(space.size, value, dtype=np.result_type(type(value), float)))

    @classmethod
    def indicator(cls, space: AffineSpace, ranks: Iterable[int]) -> "GridFunction":
        values = np.zeros(space.size, dtype=np.float64)
        values[np.fromiter((int(r) for r in ranks), dtype=np.int64)] = 1.0
        return cls(space, values)

    @classmethod
    def from_mapping(cls, space: AffineSpace, mapping: Mapping[int, complex]) -> "GridFunction":
        """Build from ``{rank: value}``; unlisted points are 0."""
        dtype = complex if any(isinstance(v, complex) for v in mapping.values()) else float
        values = np.zeros(space.size, dtype=dtype)
        for rank, value in mapping.items():
            values[rank] = value
        return cls(space, values)

    @property
    def q(self) -> int:
        return self.space.q

    @property
    def d(self) -> int:
        return self.space.d

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    def scaled(self, c: complex) -> "GridFunction":
        return GridFunction(self.space, c * self.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if other.space != self.space:
            raise DimensionMismatchError("cannot add functions on different spaces")
        return GridFunction(self.space, self.values + other.values)


@dataclass(frozen=True, eq=False)
class PlaneFunction:
    """A function on the enumerated family Π_k; ``values[i]`` belongs to ``family.flats[i]``."""

    family: PlaneFamily
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape != (self.family.size,):
            raise DimensionMismatchError(
                f"expected {self.family.size} plane values, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, family: PlaneFamily, value: complex = 1.0) -> "PlaneFunction":
        return cls(family, np.full(family.size, value, dtype=np.result_type(type(value), float)))

    @classmethod
    def indicator(cls, family: PlaneFamily, indices: Iterable[int]) -> "PlaneFunction":
        values = np.zeros(family.size, dtype=np.float64)
        values[np.fromiter((int(i) for i in indices), dtype=np.int64)] = 1.0
        return cls(family, values)

    @property
    def k(self) -> int:
        return self.family.k

    def __add__(self, other: "PlaneFunction") -> "PlaneFunction":
        if other.family is not self.family:
            raise DimensionMismatchError("cannot add functions on different plane families")
        return PlaneFunction(self.family, self.values + other.values)

    def rows(self) -> Iterable[Tuple[str, complex]]:
        """(descriptor, value) per plane in enumeration order."""
        for flat, value in zip(self.family.flats, self.values.tolist()):
            yield flat.describe(), value


# ---------------------------------------------------------------------------
# Inner products (normalized measures)
# ---------------------------------------------------------------------------

def inner_points(f: GridFunction, g: GridFunction) -> complex:
    """⟨f, g⟩ = q^-d sum_x f(x) conj(g(x))."""
    return complex(np.vdot(g.values, f.values)) / f.space.size


def inner_planes(F: PlaneFunction, G: PlaneFunction) -> complex:
    """⟨F, G⟩ = |Π_k|^-1 sum_w F(w) conj(G(w))."""
    return complex(np.vdot(G.values, F.values)) / F.family.size


# ---------------------------------------------------------------------------
# k-plane transform
# ---------------------------------------------------------------------------

def _check_k(space: AffineSpace, k: int) -> None:
    if not 1 <= k <= space.d - 1:
        raise DimensionMismatchError(f"plane dimension must satisfy 1 <= k <= d-1, got k={k}, d={space.d}")


def kplane_transform(
    f: GridFunction,
    k: int,
    caps: Optional["Caps"] = None,
    cache: Optional[TableCache] = None,
) -> PlaneFunction:
    """
    T f(w) = q^-k sum_{x in w} f(x) for every w in Π_k.

    k = 1 is the X-ray transform and k = d-1 the Radon transform.
    """
    _check_k(f.space, k)
    family = plane_family(f.space, k, caps, cache)
    return PlaneFunction(family, f.values[family.incidence].mean(axis=1))


def transform_batch(rows: np.ndarray, family: PlaneFamily) -> np.ndarray:
    """
    Transforms of a batch of functions at once.

    ``rows`` has shape ``(n, q^d)``; the result has shape ``(n, |Π_k|)``.
    """
    rows = np.atleast_2d(rows)
    if rows.shape[1] != family.space.size:
        raise DimensionMismatchError(
            f"batch rows have {rows.shape[1]} entries, expected {family.space.size}"
        )
    scale = family.space.q ** (-family.k)
    return np.asarray(family.incidence_matrix @ rows.T).T * scale


def adjoint_kplane(
    G: PlaneFunction,
    k: Optional[int] = None,
) -> GridFunction:
    """
    Adjoint of the k-plane transform for the normalized pairings.

    h(x) = q^(d-k) / |Π_k| · sum_{w ∋ x} G(w), so ⟨Tf, G⟩_dσ = ⟨f, h⟩_dx.
    """
    family = G.family
    if k is not None and k != family.k:
        raise DimensionMismatchError(f"plane function lives on Π_{family.k}, not Π_{k}")
    space = family.space
    totals = np.asarray(family.incidence_matrix.T @ G.values).ravel()
    scale = space.q ** (space.d - family.k) / family.size
    return GridFunction(space, totals * scale)


# ---------------------------------------------------------------------------
# Radon decompositions
# ---------------------------------------------------------------------------

def theta_mask(family: PlaneFamily) -> np.ndarray:
    """Boolean mask of the hyperplanes through the origin."""
    return np.array([h.kind is HyperplaneKind.THETA for h in family.hyperplane_duals])


def dual_matrix(family: PlaneFamily) -> np.ndarray:
    """``(|Π_{d-1}|, d)`` array of the dual vectors w′."""
    return np.array([h.dual for h in family.hyperplane_duals], dtype=np.int64)


def radon_geometric_split(
    f: GridFunction,
    caps: Optional["Caps"] = None,
    cache: Optional[TableCache] = None,
) -> Tuple[PlaneFunction, PlaneFunction]:
    """(T₀f, T₁f): the Radon transform restricted to Θ and to H."""
    radon = kplane_transform(f, f.space.d - 1, caps, cache)
    theta = theta_mask(radon.family)
    t0 = np.where(theta, radon.values, 0)
    t1 = np.where(theta, 0, radon.values)
    return PlaneFunction(radon.family, t0), PlaneFunction(radon.family, t1)


@dataclass(frozen=True)
class CharacterParts:
    """The four character-sum pieces of the Radon transform."""

    t0_star: PlaneFunction
    t0_dstar: PlaneFunction
    t1_star: PlaneFunction
    t1_dstar: PlaneFunction

    @property
    def t0(self) -> PlaneFunction:
        return self.t0_star + self.t0_dstar

    @property
    def t1(self) -> PlaneFunction:
        return self.t1_star + self.t1_dstar

    def __iter__(self):
        return iter((self.t0_star, self.t0_dstar, self.t1_star, self.t1_dstar))


def _character_kernels(family: PlaneFamily, duals: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    ``K0[w, x] = sum_{s≠0} χ(s w′·x)`` and ``K1[w, x] = sum_{s≠0} χ(s (w′·x - 1))``.
    """
    field = family.space.field
    dots = family.space.dot_matrix(duals)
    sums = field.nonzero_char_sums
    minus_one = field.neg(1)
    return sums[dots], sums[field.add_table[dots, minus_one]]


def character_kernels(family: PlaneFamily, cache: Optional[TableCache] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Cached ``_character_kernels`` for the canonical duals of *family*."""
    cache = cache or default_cache()
    return cache.get_or_build(
        ("char-kernel",) + family.key,
        lambda: _character_kernels(family, dual_matrix(family)),
    )


def radon_char_parts(
    f: GridFunction,
    theta_scales: Optional[Sequence[int]] = None,
    caps: Optional["Caps"] = None,
    cache: Optional[TableCache] = None,
) -> CharacterParts:
    """
    Split T₀f and T₁f with the orthogonality of χ.

    T₀*f = Θ·q^-d Σ_x f(x),  T₀**f(w) = Θ(w)·q^-d Σ_x Σ_{s≠0} χ(s w′·x) f(x),
    T₁*f = H·q^-d Σ_x f(x),  T₁**f(w) = H(w)·q^-d Σ_x Σ_{s≠0} χ(s(w′·x - 1)) f(x).

    Args:
        f: Function on F_q^d (d >= 2).
        theta_scales: Optional nonzero multiplier per hyperplane; the dual w′ of
            every Θ-plane is replaced by t·w′ (entries for H-planes are ignored).
    """
    space = f.space
    family = plane_family(space, space.d - 1, caps, cache)
    theta = theta_mask(family)
    if theta_scales is None:
        k0, k1 = character_kernels(family, cache)
    else:
        scales = np.asarray(theta_scales, dtype=np.int64)
        if scales.shape != (family.size,) or np.any(scales[theta] == 0):
            raise ValueError("theta_scales needs one nonzero element per hyperplane")
        duals = dual_matrix(family)
        scaled = space.field.mul_table[np.where(theta, scales, 1)[:, None], duals]
        k0, k1 = _character_kernels(family, scaled)

    norm = 1.0 / space.size
    total = f.values.sum() * norm
    zero = np.zeros(family.size, dtype=complex)
    t0_star = np.where(theta, total, zero)
    t1_star = np.where(theta, zero, total)
    t0_dstar = np.where(theta, (k0 @ f.values) * norm, zero)
    t1_dstar = np.where(theta, zero, (k1 @ f.values) * norm)
    return CharacterParts(
        PlaneFunction(family, t0_star),
        PlaneFunction(family, t0_dstar),
        PlaneFunction(family, t1_star),
        PlaneFunction(family, t1_dstar),
    )
