"""
Lebesgue norms under the normalized measures.

``dx`` gives each of the q^d points of F_q^d mass q^-d; ``dσ`` is the
uniform probability measure on a plane family Π_k.  Norms sum with
``math.fsum`` so the per-norm error stays near machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Collection, Union

import numpy as np

from ffradon.errors import BadExponentError, EmptySetError, ZeroFunctionError

if TYPE_CHECKING:
    from ffradon.geometry import AffineSpace
    from ffradon.transforms import GridFunction, PlaneFunction


@dataclass(frozen=True)
class Exponent:
    """
    An exponent in [1, ∞].

    Finite exponents are stored as exact ``Fraction`` values so that vertex
    exponents such as (d+1)/(k+1) never drift; ``None`` stands for ∞.
    """

    value: Fraction | None

    def __post_init__(self) -> None:
        if self.value is not None and self.value < 1:
            raise BadExponentError(f"exponent must be at least 1, got {self.value}")

    @classmethod
    def parse(cls, raw: Union[str, int, float, Fraction, "Exponent"]) -> "Exponent":
        """Accept ``"a/b"``, integers, ``"inf"`` or an existing exponent."""
        if isinstance(raw, Exponent):
            return raw
        if isinstance(raw, str):
            text = raw.strip().lower()
            if text in ("inf", "infinity", "∞"):
                return cls(None)
            try:
                return cls(Fraction(text))
            except (ValueError, ZeroDivisionError) as e:
                raise BadExponentError(f"cannot parse exponent {raw!r}") from e
        if isinstance(raw, float) and math.isinf(raw):
            if raw < 0:
                raise BadExponentError(f"exponent must be at least 1, got {raw}")
            return cls(None)
        return cls(Fraction(raw))

    @classmethod
    def infinity(cls) -> "Exponent":
        return cls(None)

    @classmethod
    def vertex_p(cls, d: int, k: int) -> "Exponent":
        """The domain exponent (d+1)/(k+1) of the critical vertex."""
        return cls(Fraction(d + 1, k + 1))

    @classmethod
    def vertex_r(cls, d: int) -> "Exponent":
        """The target exponent d+1 of the critical vertex."""
        return cls(Fraction(d + 1))

    @classmethod
    def from_reciprocal(cls, reciprocal: Fraction) -> "Exponent":
        """Build from 1/p in [0, 1]; 0 maps to ∞."""
        if reciprocal == 0:
            return cls(None)
        return cls(1 / Fraction(reciprocal))

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    @property
    def reciprocal(self) -> Fraction:
        return Fraction(0) if self.value is None else 1 / self.value

    def __float__(self) -> float:
        return math.inf if self.value is None else float(self.value)

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)


ExponentLike = Union[Exponent, str, int, float, Fraction]


def _normalized_norm(values: np.ndarray, exponent: ExponentLike) -> float:
    exponent = Exponent.parse(exponent)
    magnitudes = np.abs(np.asarray(values)).ravel()
    if magnitudes.size == 0:
        return 0.0
    if exponent.is_infinite:
        return float(magnitudes.max())
    power = float(exponent.value)
    mean = math.fsum((magnitudes**power).tolist()) / magnitudes.size
    return mean ** (1.0 / power)


def batch_norms(rows: np.ndarray, exponent: ExponentLike) -> np.ndarray:
    """Row-wise normalized norms of a 2-D array (search heuristics only)."""
    exponent = Exponent.parse(exponent)
    magnitudes = np.abs(rows)
    if exponent.is_infinite:
        return magnitudes.max(axis=1)
    power = float(exponent.value)
    return np.mean(magnitudes**power, axis=1) ** (1.0 / power)


def lp_norm(f: "GridFunction", p: ExponentLike) -> float:
    """(q^-d sum_x |f(x)|^p)^(1/p); max |f| when p = ∞."""
    return _normalized_norm(f.values, p)


def lr_norm_planes(F: "PlaneFunction", r: ExponentLike) -> float:
    """(|Π_k|^-1 sum_w |F(w)|^r)^(1/r); sup norm when r = ∞."""
    return _normalized_norm(F.values, r)


def restricted_norm_indicator(E: Collection[int], space: "AffineSpace", p: ExponentLike) -> float:
    """
    Lorentz L^{p,1} norm of the indicator of E under ``dx``.

    For indicators this is (|E| / q^d)^(1/p); *E* holds point ranks.
    """
    if len(E) == 0:
        raise EmptySetError("restricted norm needs a nonempty set")
    p = Exponent.parse(p)
    density = len(set(E)) / space.size
    if p.is_infinite:
        return 1.0
    return density ** float(p.reciprocal)


def norm_ratio(f: "GridFunction", k: int, p: ExponentLike, r: ExponentLike) -> float:
    """‖T_{Π_k} f‖_{L^r(dσ)} / ‖f‖_{L^p(dx)}."""
    from ffradon.transforms import kplane_transform

    denominator = lp_norm(f, p)
    if denominator == 0.0:
        raise ZeroFunctionError("norm ratio of the zero function is undefined")
    return lr_norm_planes(kplane_transform(f, k), r) / denominator
