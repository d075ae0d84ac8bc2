"""
Tests for the exponent region, witness fits, step functions, incidence
counters, the Radon lemma checks and restricted-type constants.
"""

from fractions import Fraction

import numpy as np
import pytest

from ffradon.errors import (
    EmptySetError,
    InfeasibleLevelsError,
    OutOfSquareError,
    SizeCapExceededError,
    TooFewPointsError,
    TooLargeExactError,
)
from ffradon.executor_manager import ExecutorManager
from ffradon.field_core import field_for_order
from ffradon.geometry import AffineSpace, affine_span
from ffradon.transforms import GridFunction
from ffradon.verifier import (
    HullRegion,
    HullSpec,
    classify_grid_point,
    cross_terms,
    delta_exponent,
    delta_histogram,
    delta_incidence_count,
    exponent_fit,
    gamma_is_dilation_symmetric,
    gamma_table,
    gen_step_function,
    hull_contains,
    incidence_batch,
    incidence_check,
    kflat_exponent,
    l_class_count,
    lemma_batch,
    lemma_suite,
    level_cap,
    line_expansion_check,
    restricted_type_constant,
    restricted_type_constants,
    sharpness_scan,
    spread,
    step_function_mass,
    witness_ratio,
)

ODD_PRIMES = [3, 5, 7, 11]


def space(q, d):
    return AffineSpace(field_for_order(q), d)


def line_ranks(sp, points):
    return affine_span(points, space=sp).point_ranks().tolist()


# ---------------------------------------------------------------------------
# Exponent region
# ---------------------------------------------------------------------------

class TestHull:
    @pytest.mark.parametrize("d,k", [(2, 1), (3, 1), (3, 2), (4, 2)])
    def test_vertex_is_boundary(self, d, k):
        assert hull_contains(d, k, HullSpec(d, k).critical_vertex) is HullRegion.BOUNDARY

    @pytest.mark.parametrize("d,k", [(2, 1), (3, 1), (3, 2)])
    def test_center_is_interior(self, d, k):
        assert hull_contains(d, k, (Fraction(1, 2), Fraction(1, 2))) is HullRegion.INTERIOR

    def test_outside(self):
        assert hull_contains(2, 1, (1, 0)) is HullRegion.OUTSIDE
        assert hull_contains(2, 1, (Fraction(1), Fraction(1, 3))) is HullRegion.OUTSIDE

    def test_edges(self):
        assert hull_contains(2, 1, (0, Fraction(1, 2))) is HullRegion.BOUNDARY
        assert hull_contains(2, 1, (1, 1)) is HullRegion.BOUNDARY

    def test_out_of_square(self):
        with pytest.raises(OutOfSquareError):
            hull_contains(2, 1, (Fraction(3, 2), 0))

    def test_exponents(self):
        assert delta_exponent(2, 1, "3/2", 3) == 0
        assert delta_exponent(2, 1, 1, 3) == Fraction(2, 3)
        assert delta_exponent(3, 1, 2, 4) == 0
        assert kflat_exponent(2, 1, "3/2", 3) == 0


class TestWitnesses:
    def test_constant(self):
        assert witness_ratio("constant", 5, 2, 1, 2, 7) == pytest.approx(1.0)

    @pytest.mark.parametrize("q", [2, 3, 5, 7])
    def test_delta_at_vertex(self, q):
        assert witness_ratio("delta", q, 2, 1, "3/2", 3) == pytest.approx(1.0)

    def test_delta_q9(self):
        assert witness_ratio("delta", 9, 2, 1, 1, 3) == pytest.approx(9 ** (2 / 3), rel=1e-9)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="Unknown witness kind"):
            witness_ratio("sphere", 3, 2, 1, 2, 2)

    def test_fit_constant(self):
        assert exponent_fit("constant", 2, 1, 2, 4, ODD_PRIMES).alpha == pytest.approx(0.0, abs=1e-9)

    def test_fit_delta_outside(self):
        fit = exponent_fit("delta", 2, 1, 1, 3, ODD_PRIMES)
        assert fit.alpha == pytest.approx(2 / 3, abs=0.01)
        assert fit.q_list == tuple(ODD_PRIMES)

    @pytest.mark.parametrize("d,k,q_list", [(2, 1, ODD_PRIMES), (3, 2, [2, 3, 4, 5])])
    def test_fit_delta_at_vertex(self, d, k, q_list):
        fit = exponent_fit("delta", d, k, Fraction(d + 1, k + 1), d + 1, q_list)
        assert fit.alpha == pytest.approx(0.0, abs=0.01)

    def test_fit_needs_three_orders(self):
        with pytest.raises(TooFewPointsError):
            exponent_fit("delta", 2, 1, 1, 3, [3, 5])


class TestSharpness:
    def test_coarse_grid(self):
        points = sharpness_scan(2, 1, ODD_PRIMES, grid=3)
        assert len(points) == 9
        assert not [pt for pt in points if pt.violations]
        outside = {(pt.inv_p, pt.inv_r) for pt in points if pt.region is HullRegion.OUTSIDE}
        half = Fraction(1, 2)
        assert outside == {(Fraction(1), Fraction(0)), (Fraction(1), half), (half, Fraction(0))}

    def test_grid_point_exponents(self):
        pt = sharpness_scan(2, 1, ODD_PRIMES, grid=2)[1]
        assert (pt.inv_p, pt.inv_r) == (1, 0)
        assert pt.p.value == 1 and pt.r.is_infinite

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            sharpness_scan(2, 1, ODD_PRIMES, grid=1)

    @pytest.mark.parametrize(
        "d, k, q_list, inv_p, inv_r",
        [
            (2, 1, ODD_PRIMES, Fraction(1, 20), Fraction(0)),
            (2, 1, ODD_PRIMES, Fraction(7, 10), Fraction(7, 20)),
            (3, 2, [2, 3, 4], Fraction(9, 10), Fraction(13, 20)),
        ],
    )
    def test_outside_slope_exactly_at_threshold(self, d, k, q_list, inv_p, inv_r):
        # growth exponent is exactly 1/20 at these points
        pt = classify_grid_point(d, k, inv_p, inv_r, q_list)
        assert pt.region is HullRegion.OUTSIDE
        assert max(pt.alphas.values()) == pytest.approx(0.05, abs=1e-9)
        assert pt.violations == []

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "d, k, q_list",
        [(2, 1, ODD_PRIMES), (3, 1, [2, 3, 4]), (3, 2, [2, 3, 4])],
    )
    def test_full_grid(self, d, k, q_list):
        points = sharpness_scan(d, k, q_list, grid=21)
        assert len(points) == 441
        assert [(pt.inv_p, pt.inv_r, pt.violations) for pt in points if pt.violations] == []


# ---------------------------------------------------------------------------
# Step functions
# ---------------------------------------------------------------------------

class TestStepFunctions:
    def test_single_level(self):
        step = gen_step_function(0, 3, 2, 1, 1)
        assert len(step.levels) == 1 and len(step.levels[0]) == 1
        values = step.values()
        assert values.sum() == pytest.approx(1.0)
        assert np.count_nonzero(values) == 1

    def test_deterministic(self):
        assert gen_step_function(42, 5, 2, 1, 4) == gen_step_function(42, 5, 2, 1, 4)

    @pytest.mark.parametrize("seed", range(20))
    def test_invariants(self, seed):
        step = gen_step_function(seed, 5, 2, 1, 5)
        seen = set()
        for j, level in enumerate(step.levels):
            assert 1 <= len(level) <= level_cap(step.rho, j)
            assert not seen & set(level)
            seen |= set(level)
        assert step.normalized_mass == pytest.approx(1.0, rel=1e-12)
        assert step_function_mass(step) == pytest.approx(1.0, rel=1e-12)
        assert np.all(step.to_function().values >= 0)

    def test_infeasible(self):
        with pytest.raises(InfeasibleLevelsError):
            gen_step_function(0, 2, 2, 1, 5)

    def test_describe(self):
        assert gen_step_function(3, 3, 2, 1, 1).describe() == "step seed=3 levels=1"


# ---------------------------------------------------------------------------
# Incidence counting
# ---------------------------------------------------------------------------

class TestDeltaCounts:
    def test_same_singleton(self):
        sp = space(3, 2)
        assert delta_histogram(sp, [[4], [4], [4]]) == [1, 0, 0]

    def test_full_line(self):
        sp = space(3, 2)
        line = line_ranks(sp, [(0, 0), (1, 1)])
        assert delta_histogram(sp, [line] * 3) == [3, 24, 0]

    def test_full_plane_f2(self):
        sp = space(2, 2)
        hist = delta_histogram(sp, [list(range(4))] * 3)
        assert hist[0] == 4
        assert sum(hist) == 64
        # three distinct points of F_2^2 are never collinear
        assert hist == [4, 36, 24]

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_tuple_scan(self, seed):
        sp = space(3, 2)
        rng = np.random.default_rng(seed)
        sets = [rng.choice(9, size=4, replace=False).tolist() for _ in range(3)]
        brute = [0, 0, 0]
        for a in sets[0]:
            for b in sets[1]:
                for c in sets[2]:
                    brute[affine_span([sp.unrank(x) for x in (a, b, c)], space=sp).dim] += 1
        assert delta_histogram(sp, sets) == brute

    def test_empty_set(self):
        with pytest.raises(EmptySetError):
            delta_histogram(space(3, 2), [[0], [], [1]])

    def test_budget(self):
        with pytest.raises(TooLargeExactError):
            delta_histogram(space(3, 2), [list(range(9))] * 3, tuple_budget=100)

    def test_monte_carlo(self):
        sp = space(3, 2)
        line = line_ranks(sp, [(0, 0), (1, 1)])
        est = delta_incidence_count(1, [line] * 3, sp, mode="montecarlo", samples=5000, seed=1)
        assert not est.exact
        assert abs(est.value - 24) <= 5 * est.stderr + 1e-9

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="Unknown counting mode"):
            delta_incidence_count(0, [[0]] * 3, space(3, 2), mode="guess")


class TestLineClasses:
    def test_full_line(self):
        sp = space(3, 2)
        line = line_ranks(sp, [(0, 0), (1, 1)])
        assert l_class_count(1, [line] * 3, sp) == 18
        assert l_class_count(2, [line] * 3, sp) == 6

    def test_singletons(self):
        sp = space(3, 2)
        assert [l_class_count(l, [[1], [1], [1]], sp) for l in (1, 2)] == [0, 0]

    @pytest.mark.parametrize("q,d", [(3, 2), (2, 3), (5, 2)])
    def test_incidence_check(self, q, d):
        sp = space(q, d)
        rng = np.random.default_rng(q + d)
        sets = [rng.choice(sp.size, size=3, replace=False).tolist() for _ in range(d + 1)]
        report = incidence_check(sp, sets)
        assert report.passed, report.violations
        assert sum(report.l_classes) == report.delta[1]

    def test_batch_is_thread_independent(self):
        serial = incidence_batch(3, 2, trials=10, seed=7, executor=ExecutorManager(1))
        with ExecutorManager(4) as pool:
            parallel = incidence_batch(3, 2, trials=10, seed=7, executor=pool)
        assert [r.sets for r in serial] == [r.sets for r in parallel]
        assert [r.delta for r in serial] == [r.delta for r in parallel]
        assert all(r.passed for r in serial)

    def test_records(self):
        sp = space(3, 2)
        records = incidence_check(sp, [[4], [4], [4]]).to_records()
        assert records[0]["method"] == "delta[0]" and records[0]["value"] == 1


class TestLineExpansion:
    @pytest.mark.parametrize("q,d", [(2, 2), (3, 2), (2, 3)])
    def test_agrees(self, q, d):
        sp = space(q, d)
        f = GridFunction(sp, np.random.default_rng(q * d).uniform(size=sp.size))
        result = line_expansion_check(f)
        assert result.agrees, (result.lhs, result.rhs)

    def test_zero_function(self):
        result = line_expansion_check(GridFunction(space(3, 2), np.zeros(9)))
        assert result.lhs == result.rhs == 0


# ---------------------------------------------------------------------------
# Radon character-sum bounds
# ---------------------------------------------------------------------------

class TestLemmaSuite:
    def test_origin_in_f3(self):
        report = lemma_suite([0], 3, 2)
        assert report.l2sq_t0 == pytest.approx(4 / 243, rel=1e-12)
        assert report.l2sq_bound == pytest.approx(1 / 54, rel=1e-12)
        assert report.l2sq_t1 == pytest.approx(2 / 243, rel=1e-12)
        assert report.term_i == pytest.approx(1 / 54, rel=1e-12)
        assert report.term_ii == pytest.approx(-1 / 108, rel=1e-12)
        assert report.passed

    def test_full_space(self):
        report = lemma_suite(range(9), 3, 2)
        assert report.sup_t0 == pytest.approx(0.0, abs=1e-12)
        assert report.passed

    def test_empty(self):
        with pytest.raises(EmptySetError):
            lemma_suite([], 3, 2)

    def test_interpolation_in_d3(self):
        report = lemma_suite([0, 1, 5], 3, 3)
        assert report.interpolated_norm is not None
        assert report.interpolated_norm <= report.interpolated_bound * (1 + 1e-9)
        assert report.passed

    @pytest.mark.parametrize("q,d", [(3, 2), (4, 2), (5, 2), (2, 3)])
    def test_random_sets(self, q, d):
        reports = lemma_batch(q, d, trials=40, seed=11)
        failed = [(r.points, r.violations) for r in reports if not r.passed]
        assert not failed
        assert all(r.term_ii <= 1e-12 for r in reports)

    def test_gamma_symmetry(self):
        sp = space(5, 2)
        gamma = gamma_table([1, 7, 12, 20], sp)
        assert gamma_is_dilation_symmetric(gamma, sp)
        assert gamma[0] == pytest.approx((4 * 4 / 25) ** 2)

    def test_cross_terms_singleton(self):
        sp = space(5, 2)
        term_i, term_ii = cross_terms([0], sp, 30)
        assert term_i == pytest.approx(4 / (30 * 25))
        # sum over s != s' of χ(s' - s) is 2 - q
        assert term_ii == pytest.approx(-3 / (30 * 25))


# ---------------------------------------------------------------------------
# Restricted type
# ---------------------------------------------------------------------------

class TestRestrictedType:
    def test_f2_plane(self):
        value, witness = restricted_type_constant(2, 2, 1)
        assert value == pytest.approx(1.0, abs=1e-9)
        assert witness

    def test_across_orders(self):
        result = restricted_type_constants([2, 3], 2, 1)
        assert set(result.constants) == {2, 3}
        assert all(v >= 1.0 - 1e-9 for v in result.constants.values())
        assert result.spread == spread(result.constants.values())

    def test_budget(self):
        with pytest.raises(SizeCapExceededError):
            restricted_type_constant(5, 2, 1)
