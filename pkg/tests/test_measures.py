"""
Unit tests for exponents and normalized norms.
"""

from fractions import Fraction

import numpy as np
import pytest

from ffradon.errors import BadExponentError, EmptySetError, ZeroFunctionError
from ffradon.field_core import field_for_order
from ffradon.geometry import AffineSpace, affine_span, plane_family
from ffradon.measures import (
    Exponent,
    lp_norm,
    lr_norm_planes,
    norm_ratio,
    restricted_norm_indicator,
)
from ffradon.transforms import GridFunction, PlaneFunction, kplane_transform


def space(q, d):
    return AffineSpace(field_for_order(q), d)


class TestExponent:
    def test_parse(self):
        assert Exponent.parse("3/2").value == Fraction(3, 2)
        assert Exponent.parse(3).value == 3
        assert Exponent.parse("inf").is_infinite
        assert Exponent.parse(float("inf")).is_infinite

    def test_reciprocal(self):
        assert Exponent.parse("3/2").reciprocal == Fraction(2, 3)
        assert Exponent.infinity().reciprocal == 0
        assert Exponent.from_reciprocal(Fraction(0)).is_infinite
        assert Exponent.from_reciprocal(Fraction(1, 3)).value == 3

    def test_vertex(self):
        assert Exponent.vertex_p(3, 1) == Exponent(Fraction(2))
        assert Exponent.vertex_r(3) == Exponent(Fraction(4))

    @pytest.mark.parametrize("raw", ["1/2", "0", "abc", "-inf"])
    def test_rejects(self, raw):
        with pytest.raises(BadExponentError):
            Exponent.parse(raw)

    def test_str(self):
        assert str(Exponent.parse("3/2")) == "3/2"
        assert str(Exponent.infinity()) == "inf"


class TestPointNorms:
    @pytest.mark.parametrize("p", [1, "3/2", 2, 7, "inf"])
    def test_constant(self, p):
        assert lp_norm(GridFunction.constant(space(3, 2)), p) == pytest.approx(1.0)

    @pytest.mark.parametrize("p", [1, "3/2", 3])
    def test_indicator(self, p):
        sp = space(3, 2)
        f = GridFunction.indicator(sp, [0, 4, 7])
        expected = (3 / 9) ** (1 / float(Fraction(p)))
        assert lp_norm(f, p) == pytest.approx(expected, rel=1e-12)

    def test_sup_norm(self):
        f = GridFunction.from_mapping(space(3, 2), {5: 2.0})
        assert lp_norm(f, "inf") == 2.0

    def test_nesting(self):
        sp = space(3, 3)
        f = GridFunction(sp, np.random.default_rng(0).normal(size=sp.size))
        norms = [lp_norm(f, p) for p in [1, "3/2", 2, 4, 8, "inf"]]
        assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))

    def test_homogeneity(self):
        sp = space(3, 2)
        f = GridFunction(sp, np.random.default_rng(1).normal(size=sp.size))
        assert lp_norm(f.scaled(-2.5), 3) == pytest.approx(2.5 * lp_norm(f, 3), rel=1e-12)

    def test_large_p_approaches_sup(self):
        sp = space(3, 2)
        f = GridFunction(sp, np.random.default_rng(2).uniform(0.1, 1.0, size=sp.size))
        assert lp_norm(f, 64) == pytest.approx(lp_norm(f, "inf"), rel=0.05)


class TestPlaneNorms:
    def test_constant(self):
        family = plane_family(space(3, 2), 1)
        assert lr_norm_planes(PlaneFunction.constant(family), 3) == pytest.approx(1.0)

    def test_single_plane(self):
        family = plane_family(space(3, 2), 1)
        F = PlaneFunction.indicator(family, [2])
        assert lr_norm_planes(F, 3) == pytest.approx(12 ** (-1 / 3), rel=1e-12)

    def test_line_transform_in_f2(self):
        sp = space(2, 2)
        line = affine_span([(0, 0), (0, 1)], space=sp)
        tf = kplane_transform(GridFunction.indicator(sp, line.point_ranks()), 1)
        assert lr_norm_planes(tf, 3) == pytest.approx(0.25 ** (1 / 3), rel=1e-12)


class TestRestrictedNorm:
    def test_full_space(self):
        sp = space(3, 2)
        assert restricted_norm_indicator(range(9), sp, "3/2") == pytest.approx(1.0)

    def test_three_points(self):
        sp = space(3, 2)
        assert restricted_norm_indicator([0, 1, 2], sp, "3/2") == pytest.approx((1 / 3) ** (2 / 3))

    def test_singleton_at_vertex(self):
        sp = space(3, 2)
        p = Exponent.vertex_p(2, 1)
        assert restricted_norm_indicator([4], sp, p) == pytest.approx((1 / 9) ** (2 / 3))

    def test_matches_lp_norm_of_indicator(self):
        sp = space(3, 2)
        E = [1, 3, 5, 8]
        assert restricted_norm_indicator(E, sp, 2) == pytest.approx(lp_norm(GridFunction.indicator(sp, E), 2))

    def test_empty(self):
        with pytest.raises(EmptySetError):
            restricted_norm_indicator([], space(3, 2), 2)


class TestNormRatio:
    @pytest.mark.parametrize("q,d,k", [(2, 2, 1), (3, 2, 1), (2, 3, 2), (3, 3, 1)])
    def test_constant(self, q, d, k):
        f = GridFunction.constant(space(q, d))
        assert norm_ratio(f, k, Exponent.vertex_p(d, k), Exponent.vertex_r(d)) == pytest.approx(1.0)

    @pytest.mark.parametrize("point", range(4))
    def test_singleton_in_f2(self, point):
        f = GridFunction.indicator(space(2, 2), [point])
        assert norm_ratio(f, 1, "3/2", 3) == pytest.approx(1.0, abs=1e-12)

    def test_three_points_in_f2(self):
        f = GridFunction.indicator(space(2, 2), [0, 1, 3])
        assert norm_ratio(f, 1, "3/2", 3) == pytest.approx(1.0, abs=1e-12)

    def test_scale_invariant(self):
        sp = space(3, 2)
        f = GridFunction(sp, np.random.default_rng(4).uniform(size=sp.size))
        assert norm_ratio(f.scaled(7.0), 1, "3/2", 3) == pytest.approx(norm_ratio(f, 1, "3/2", 3), rel=1e-12)

    def test_zero_function(self):
        with pytest.raises(ZeroFunctionError):
            norm_ratio(GridFunction(space(3, 2), np.zeros(9)), 1, 2, 2)
