"""
Unit tests for points, canonical flats, plane enumeration and the H/Θ split.
"""

import itertools

import numpy as np
import pytest

from ffradon.cache import TableCache
from ffradon.config import Caps
from ffradon.errors import DimensionMismatchError, EmptyInputError, SizeCapExceededError
from ffradon.field_core import field_for_order
from ffradon.geometry import (
    AffineSpace,
    Flat,
    HyperplaneKind,
    affine_span,
    count_kplanes,
    count_lines_through,
    count_planes_through_point,
    dot,
    enumerate_kplanes,
    enumerate_points,
    gaussian_binomial,
    hyperplane_split,
    incident,
    plane_family,
    row_reduce,
    vec_scale,
)


def space(q, d):
    return AffineSpace(field_for_order(q), d)


def point_set_oracle(q, d, k):
    """Distinct point sets spanned by all (k+1)-tuples of points."""
    sp = space(q, d)
    seen = set()
    for tup in itertools.combinations(range(sp.size), k + 1):
        flat = affine_span([sp.unrank(r) for r in tup], space=sp)
        if flat.dim == k:
            seen.add(frozenset(flat.point_ranks().tolist()))
    return seen


class TestPoints:
    def test_enumerate_points(self):
        pts = enumerate_points(field_for_order(2), 2)
        assert [p.rank for p in pts] == [0, 1, 2, 3]
        assert len(enumerate_points(field_for_order(3), 3)) == 27

    def test_rank_round_trip(self):
        sp = space(3, 3)
        assert sp.rank(sp.unrank(17).coords) == 17
        for r in range(sp.size):
            assert sp.unrank(r).rank == r

    def test_coords_table_matches_unrank(self):
        sp = space(4, 2)
        for r in range(sp.size):
            assert tuple(sp.coords[r]) == sp.unrank(r).coords

    def test_point_cap(self):
        with pytest.raises(SizeCapExceededError):
            enumerate_points(field_for_order(3), 3, max_points=26)


class TestCounting:
    def test_gaussian_binomial(self):
        assert gaussian_binomial(2, 1, 3) == 4
        assert gaussian_binomial(3, 1, 2) == 7
        assert gaussian_binomial(3, 2, 3) == 13
        assert gaussian_binomial(4, 2, 2) == 35

    @pytest.mark.parametrize(
        "q,d,k,expected",
        [(3, 2, 1, 12), (2, 3, 1, 28), (3, 3, 2, 39), (2, 3, 2, 14)],
    )
    def test_enumeration_counts(self, q, d, k, expected):
        planes = enumerate_kplanes(field_for_order(q), d, k)
        assert len(planes) == expected == count_kplanes(d, k, q)
        assert len(set(planes)) == expected

    @pytest.mark.parametrize("q,d,k", [(2, 2, 1), (3, 2, 1), (2, 3, 1), (2, 3, 2), (3, 3, 2), (4, 2, 1)])
    def test_enumeration_matches_point_set_oracle(self, q, d, k):
        planes = enumerate_kplanes(field_for_order(q), d, k)
        as_sets = {frozenset(w.point_ranks().tolist()) for w in planes}
        assert as_sets == point_set_oracle(q, d, k)

    @pytest.mark.parametrize("q", [2, 3, 4, 5])
    @pytest.mark.parametrize("d", [2, 3])
    def test_closed_forms(self, q, d):
        if q**d > 64:
            pytest.skip("enumeration kept small")
        lines = enumerate_kplanes(field_for_order(q), d, 1)
        assert len(lines) == q ** (d - 1) * (q**d - 1) // (q - 1)
        hyper = enumerate_kplanes(field_for_order(q), d, d - 1)
        assert len(hyper) == q * (q**d - 1) // (q - 1)

    def test_every_plane_has_q_to_k_points(self):
        for w in enumerate_kplanes(field_for_order(3), 3, 2):
            assert len(set(w.point_ranks().tolist())) == 9

    def test_planes_through_point(self):
        sp = space(3, 2)
        family = plane_family(sp, 1)
        through = np.sum(family.incidence == 4, axis=1)
        assert through.sum() == count_planes_through_point(2, 1, 3) == 4

    def test_plane_cap(self):
        with pytest.raises(SizeCapExceededError):
            enumerate_kplanes(field_for_order(3), 2, 1, max_planes=11)


class TestFlats:
    def test_affine_span_dimensions(self):
        sp = space(3, 2)
        assert affine_span([(1, 1)], space=sp).dim == 0
        assert affine_span([(0, 0), (1, 0), (2, 0)], space=sp).dim == 1
        assert affine_span([(0, 0), (1, 0), (0, 1)], space=sp).dim == 2

    def test_affine_span_empty(self):
        with pytest.raises(EmptyInputError):
            affine_span([], space=space(3, 2))

    def test_incident(self):
        sp = space(3, 2)
        axis = affine_span([(0, 0), (1, 0)], space=sp)
        assert incident(axis, sp.point((0, 0)))
        assert not incident(axis, sp.point((0, 1)))
        for p in axis.points():
            assert incident(axis, p)

    def test_incident_dimension_mismatch(self):
        axis = affine_span([(0, 0), (1, 0)], space=space(3, 2))
        with pytest.raises(DimensionMismatchError):
            incident(axis, (0, 0, 0))

    def test_canonicalization_is_parametrization_independent(self):
        sp = space(5, 3)
        rng = np.random.default_rng(0)
        fq = sp.field
        for _ in range(1000):
            k = int(rng.integers(1, 3))
            base = tuple(int(c) for c in rng.integers(0, 5, size=3))
            dirs = [tuple(int(c) for c in rng.integers(0, 5, size=3)) for _ in range(k)]
            flat = Flat.from_parametrization(sp, base, dirs)
            # shift basepoint along the flat and recombine the directions
            shift = tuple(int(c) for c in rng.integers(0, 5, size=len(dirs)))
            moved = list(base)
            for c, v in zip(shift, dirs):
                moved = [fq.add(a, fq.mul(c, b)) for a, b in zip(moved, v)]
            scale = int(rng.integers(1, 5))
            mixed = [vec_scale(fq, scale, v) for v in reversed(dirs)]
            if len(mixed) == 2:
                mixed[1] = tuple(fq.add(a, b) for a, b in zip(mixed[0], mixed[1]))
            assert Flat.from_parametrization(sp, moved, mixed) == flat

    def test_basepoint_vanishes_on_pivots(self):
        for w in enumerate_kplanes(field_for_order(3), 3, 1):
            assert all(w.basepoint[p] == 0 for p in w.pivots)
            rows, pivots = row_reduce(w.space.field, w.directions)
            assert rows == w.directions and pivots == w.pivots

    def test_two_points_span_one_line(self):
        for q, d in [(2, 2), (3, 2), (2, 3), (3, 3)]:
            sp = space(q, d)
            lines = enumerate_kplanes(sp.field, d, 1)
            members = [set(w.point_ranks().tolist()) for w in lines]
            for a, b in itertools.combinations(range(sp.size), 2):
                assert sum(1 for m in members if a in m and b in m) == 1

    def test_describe(self):
        sp = space(3, 2)
        line = affine_span([(0, 1), (1, 1)], space=sp)
        assert str(line) == "base=(0,1) dirs=[(1,0)]"


class TestCountLinesThrough:
    def test_point(self):
        sp = space(3, 2)
        assert count_lines_through(affine_span([(1, 2)], space=sp)) == 4
        assert count_lines_through(affine_span([(0, 0, 1)], space=space(2, 3))) == 7

    def test_point_matches_enumeration(self):
        sp = space(3, 2)
        lines = enumerate_kplanes(sp.field, 2, 1)
        x = sp.point((2, 1))
        assert sum(1 for w in lines if incident(w, x)) == 4

    def test_line_and_plane(self):
        sp = space(3, 3)
        assert count_lines_through(affine_span([(0, 0, 0), (1, 0, 0)], space=sp)) == 1
        assert count_lines_through(affine_span([(0, 0, 0), (1, 0, 0), (0, 1, 0)], space=sp)) == 0


class TestHyperplaneSplit:
    @pytest.mark.parametrize("q,d,theta,h", [(3, 2, 4, 8), (2, 3, 7, 7)])
    def test_counts(self, q, d, theta, h):
        split = hyperplane_split(field_for_order(q), d)
        kinds = [s.kind for s in split]
        assert kinds.count(HyperplaneKind.THETA) == theta == (q**d - 1) // (q - 1)
        assert kinds.count(HyperplaneKind.H) == h

    @pytest.mark.parametrize("q,d", [(3, 2), (2, 3), (4, 2), (3, 3)])
    def test_duals_describe_the_planes(self, q, d):
        sp = space(q, d)
        for s in hyperplane_split(sp.field, d):
            level = 1 if s.kind is HyperplaneKind.H else 0
            members = set(s.flat.point_ranks().tolist())
            assert (0 in members) == (s.kind is HyperplaneKind.THETA)
            for r in range(sp.size):
                assert (dot(sp.field, s.dual, sp.unrank(r).coords) == level) == (r in members)

    def test_theta_representative_normalized(self):
        for s in hyperplane_split(field_for_order(5), 2):
            if s.kind is HyperplaneKind.THETA:
                assert next(c for c in s.dual if c) == 1

    def test_theta_dilation_invariance(self):
        sp = space(5, 2)
        fq = sp.field
        for s in hyperplane_split(fq, 2):
            if s.kind is not HyperplaneKind.THETA:
                continue
            base = {r for r in range(sp.size) if dot(fq, s.dual, sp.unrank(r).coords) == 0}
            for t in range(1, 5):
                scaled = vec_scale(fq, t, s.dual)
                assert {r for r in range(sp.size) if dot(fq, scaled, sp.unrank(r).coords) == 0} == base


class TestPlaneFamily:
    def test_family_is_cached(self):
        cache = TableCache(max_entries=4)
        sp = space(3, 2)
        first = plane_family(sp, 1, cache=cache)
        assert plane_family(sp, 1, cache=cache) is first
        assert cache.stats()["hits"] == 1

    def test_family_respects_point_cap(self):
        with pytest.raises(SizeCapExceededError):
            plane_family(space(3, 3), 1, caps=Caps(max_points=20), cache=TableCache())

    def test_incidence_matrix(self):
        family = plane_family(space(3, 2), 1)
        matrix = family.incidence_matrix.toarray()
        assert matrix.shape == (12, 9)
        assert np.all(matrix.sum(axis=1) == 3)
        assert np.all(matrix.sum(axis=0) == 4)
