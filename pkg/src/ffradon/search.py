"""
Operator-norm search strategies for ‖T_{Π_k}‖_{L^p → L^r}.

Every strategy implements ``BaseSearch.run(problem) -> RatioReport``;
``SearchPipeline`` runs several of them on one problem and ``theorem_scan``
runs the pipeline once per field order, in parallel, with each work item
seeded from ``SeedSequence([seed, item_index, stream])``.
"""

from __future__ import annotations

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np

from ffradon.errors import BadExponentError, NoConvergenceError
from ffradon.executor_manager import ExecutorManager, run_ordered
from ffradon.geometry import AffineSpace, PlaneFamily, plane_family
from ffradon.logging_config import get_logger
from ffradon.measures import Exponent, ExponentLike, batch_norms
from ffradon.reports import RatioReport
from ffradon.transforms import PlaneFunction, adjoint_kplane, transform_batch
from ffradon.verifier import gen_step_function, mask_to_ranks, space_for, spread, subset_batches

if TYPE_CHECKING:
    from ffradon.config import Caps

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Problem
# ---------------------------------------------------------------------------

@dataclass
class SearchProblem:
    """One (q, d, k, p, r) maximisation with its seed and work-item index."""

    space: AffineSpace
    k: int
    p: Exponent
    r: Exponent
    seed: int = 0
    item_index: int = 0
    caps: Optional["Caps"] = None

    @classmethod
    def create(
        cls,
        q: int,
        d: int,
        k: int,
        p: ExponentLike,
        r: ExponentLike,
        seed: int = 0,
        item_index: int = 0,
        caps: Optional["Caps"] = None,
    ) -> "SearchProblem":
        return cls(space_for(q, d, caps), k, Exponent.parse(p), Exponent.parse(r), seed, item_index, caps)

    @property
    def family(self) -> PlaneFamily:
        return plane_family(self.space, self.k, self.caps)

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.item_index, stream]))

    def ratios(self, rows: np.ndarray) -> np.ndarray:
        """Norm ratios of a batch of functions (one per row)."""
        rows = np.atleast_2d(rows)
        return batch_norms(transform_batch(rows, self.family), self.r) / batch_norms(rows, self.p)

    def report(self, method: str, value: float, **extra) -> RatioReport:
        return RatioReport(
            q=self.space.q,
            d=self.space.d,
            k=self.k,
            p=str(self.p),
            r=str(self.r),
            method=method,
            value=float(value),
            seed=self.seed,
            **extra,
        )


def _describe_set(ranks: Sequence[int]) -> str:
    return "E=" + ",".join(str(int(x)) for x in ranks)


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------

class BaseSearch(ABC):
    """Common interface implemented by every search strategy."""

    name: str = "base"
    stream: int = 0

    def run(self, problem: SearchProblem) -> RatioReport:
        started = time.perf_counter()
        report = self.search(problem)
        report.elapsed_ms = (time.perf_counter() - started) * 1000
        logger.debug(
            "%s q=%d: ratio %.9f (%s)", self.name, problem.space.q, report.value, report.witness
        )
        return report

    @abstractmethod
    def search(self, problem: SearchProblem) -> RatioReport:
        """Maximise the norm ratio over this strategy's function family."""


class ConstantSearch(BaseSearch):
    """f ≡ 1; its ratio is 1 for every admissible exponent pair."""

    name = "constant"

    def search(self, problem: SearchProblem) -> RatioReport:
        value = problem.ratios(np.ones(problem.space.size))[0]
        return problem.report(self.name, value, witness="constant", exhaustive=True, iterations=1)


class IndicatorSearch(BaseSearch):
    """
    Maximum ratio over indicator functions.

    Exhaustive over all nonempty subsets when 2^(q^d) <= budget, otherwise
    seeded random restarts followed by single-point-flip hill climbing
    (best improving flip, ties to the lowest point rank).
    """

    name = "indicator"
    stream = 1

    def __init__(self, budget: Optional[int] = None, restarts: int = 8, max_steps: int = 10_000) -> None:
        self.budget = budget
        self.restarts = restarts
        self.max_steps = max_steps

    def search(self, problem: SearchProblem) -> RatioReport:
        budget = self.budget
        if budget is None:
            budget = problem.caps.subset_budget if problem.caps else 2**16
        n = problem.space.size
        if n < 63 and 2**n <= budget:
            return self._exhaustive(problem)
        return self._hill_climb(problem)

    def _exhaustive(self, problem: SearchProblem) -> RatioReport:
        best, best_mask, count = -1.0, 0, 0
        for masks, rows in subset_batches(problem.space.size):
            ratios = problem.ratios(rows)
            i = int(np.argmax(ratios))
            count += len(masks)
            if ratios[i] > best:
                best, best_mask = float(ratios[i]), int(masks[i])
        return problem.report(
            self.name,
            best,
            witness=_describe_set(mask_to_ranks(best_mask)),
            exhaustive=True,
            iterations=count,
        )

    def climb(self, problem: SearchProblem, start: np.ndarray) -> tuple[np.ndarray, float, int]:
        """Hill climb from a 0/1 vector; returns (set, ratio, steps)."""
        current = start.astype(np.float64)
        value = float(problem.ratios(current)[0])
        n = current.size
        for step in range(self.max_steps):
            flips = np.repeat(current[None, :], n, axis=0)
            flips[np.arange(n), np.arange(n)] = 1.0 - flips[np.arange(n), np.arange(n)]
            nonempty = flips.sum(axis=1) > 0
            ratios = np.full(n, -np.inf)
            ratios[nonempty] = problem.ratios(flips[nonempty])
            i = int(np.argmax(ratios))
            if ratios[i] <= value + 1e-15:
                return current, value, step
            current, value = flips[i], float(ratios[i])
        return current, value, self.max_steps

    def _hill_climb(self, problem: SearchProblem) -> RatioReport:
        rng = problem.rng(self.stream)
        n = problem.space.size
        best_set, best, steps = np.ones(n), float(problem.ratios(np.ones(n))[0]), 0
        for _ in range(self.restarts):
            density = rng.uniform(0.05, 1.0)
            start = (rng.random(n) < density).astype(np.float64)
            if not start.any():
                start[rng.integers(n)] = 1.0
            found, value, taken = self.climb(problem, start)
            steps += taken
            if value > best:
                best_set, best = found, value
        return problem.report(
            self.name,
            best,
            witness=_describe_set(np.flatnonzero(best_set)),
            exhaustive=False,
            iterations=steps,
        )


class PowerIteration(BaseSearch):
    """
    Nonlinear power method f ← (T†((T f)^(r-1)))^(1/(p-1)) for nonnegative f.

    Runs from f ≡ 1, from the point mass at the origin and from seeded random
    nonnegative starts; each run stops when successive ratios differ by less
    than ``tol``. Dense starts settle on the constant fixed point once q >= 5.
    """

    name = "power"
    stream = 2

    def __init__(
        self,
        tol: float = 1e-10,
        max_iter: int = 500,
        random_starts: int = 4,
        strict: bool = False,
    ) -> None:
        self.tol = tol
        self.max_iter = max_iter
        self.random_starts = random_starts
        self.strict = strict

    def iterate(self, problem: SearchProblem, start: np.ndarray) -> tuple[np.ndarray, List[float], bool]:
        """Run one iteration chain; returns (final f, ratio history, converged)."""
        p, r = float(problem.p), float(problem.r)
        family = problem.family
        f = np.asarray(start, dtype=np.float64)
        history = [float(problem.ratios(f)[0])]
        for _ in range(self.max_iter):
            tf = transform_batch(f, family)[0]
            grad = adjoint_kplane(PlaneFunction(family, tf ** (r - 1))).values.real
            f = np.maximum(grad, 0.0) ** (1.0 / (p - 1))
            scale = batch_norms(f[None, :], problem.p)[0]
            if scale == 0:
                break
            f = f / scale
            history.append(float(problem.ratios(f)[0]))
            if abs(history[-1] - history[-2]) < self.tol:
                return f, history, True
        return f, history, False

    def search(self, problem: SearchProblem) -> RatioReport:
        if problem.p.is_infinite or problem.r.is_infinite or float(problem.p) <= 1 or float(problem.r) <= 1:
            raise BadExponentError("power iteration needs 1 < p < inf and 1 < r < inf")
        rng = problem.rng(self.stream)
        n = problem.space.size
        point = np.zeros(n)
        point[0] = 1.0
        # T commutes with translations, so one point start covers every point
        starts = [("constant", np.ones(n)), ("point", point)]
        starts += [(f"random#{i}", rng.random(n) + 1e-3) for i in range(self.random_starts)]

        best, best_label, iterations, all_converged = -np.inf, "", 0, True
        for label, start in starts:
            _, history, converged = self.iterate(problem, start)
            iterations += len(history) - 1
            all_converged &= converged
            if max(history) > best:
                best, best_label = max(history), label
        if not all_converged:
            message = f"power iteration did not converge within {self.max_iter} steps at q={problem.space.q}"
            if self.strict:
                raise NoConvergenceError(message)
            logger.warning(message)
        return problem.report(
            self.name,
            best,
            witness=f"start={best_label}",
            exhaustive=False,
            iterations=iterations,
            converged=all_converged,
        )


class StepFunctionSearch(BaseSearch):
    """Best ratio over seeded step functions with 1..max_levels levels."""

    name = "step"
    stream = 3

    def __init__(self, trials: int = 100, max_levels: int = 6, batch_size: int = 256) -> None:
        self.trials = trials
        self.max_levels = max_levels
        self.batch_size = batch_size

    def search(self, problem: SearchProblem) -> RatioReport:
        space = problem.space
        seeds = problem.rng(self.stream).integers(0, 2**63 - 1, size=self.trials)
        levels_top = min(self.max_levels, space.size)
        best, best_step = -np.inf, None
        for lo in range(0, self.trials, self.batch_size):
            steps = [
                gen_step_function(int(seeds[i]), space.q, space.d, problem.k, 1 + i % levels_top, space)
                for i in range(lo, min(lo + self.batch_size, self.trials))
            ]
            ratios = problem.ratios(np.stack([s.values() for s in steps]))
            i = int(np.argmax(ratios))
            if ratios[i] > best:
                best, best_step = float(ratios[i]), steps[i]
        return problem.report(
            self.name,
            best,
            witness=best_step.describe() if best_step else "",
            exhaustive=False,
            iterations=self.trials,
        )


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

class SearchPipeline:
    """Runs several strategies on one problem and keeps every report."""

    def __init__(self, strategies: Optional[List[BaseSearch]] = None) -> None:
        self.strategies: List[BaseSearch] = strategies or []

    def add(self, strategy: BaseSearch) -> "SearchPipeline":
        self.strategies.append(strategy)
        return self

    def execute(self, problem: SearchProblem) -> List[RatioReport]:
        reports = [strategy.run(problem) for strategy in self.strategies]
        if reports:
            reports.append(best_of(reports))
        return reports


def best_of(reports: Sequence[RatioReport]) -> RatioReport:
    """A ``max`` report copying the best strategy's value and witness."""
    top = max(reports, key=lambda rep: rep.value)
    return RatioReport(
        q=top.q,
        d=top.d,
        k=top.k,
        p=top.p,
        r=top.r,
        method="max",
        value=top.value,
        witness=f"{top.method}:{top.witness}",
        exhaustive=top.exhaustive,
        iterations=sum(rep.iterations for rep in reports),
        elapsed_ms=sum(rep.elapsed_ms for rep in reports),
        converged=all(rep.converged for rep in reports),
        seed=top.seed,
    )


def default_pipeline(p: Exponent, r: Exponent, trials: int, budget: Optional[int] = None) -> SearchPipeline:
    pipeline = SearchPipeline([ConstantSearch(), StepFunctionSearch(trials), IndicatorSearch(budget)])
    if not (p.is_infinite or r.is_infinite or float(p) <= 1 or float(r) <= 1):
        pipeline.add(PowerIteration())
    return pipeline


# ---------------------------------------------------------------------------
# Operation-level API
# ---------------------------------------------------------------------------

def indicator_norm_search(
    q: int,
    d: int,
    k: int,
    p: ExponentLike,
    r: ExponentLike,
    budget: Optional[int] = None,
    seed: int = 0,
    restarts: int = 8,
    caps: Optional["Caps"] = None,
) -> RatioReport:
    problem = SearchProblem.create(q, d, k, p, r, seed=seed, caps=caps)
    return IndicatorSearch(budget, restarts).run(problem)


def power_iteration_norm(
    q: int,
    d: int,
    k: int,
    p: ExponentLike,
    r: ExponentLike,
    tol: float = 1e-10,
    max_iter: int = 500,
    seed: int = 0,
    strict: bool = False,
    caps: Optional["Caps"] = None,
) -> RatioReport:
    problem = SearchProblem.create(q, d, k, p, r, seed=seed, caps=caps)
    return PowerIteration(tol, max_iter, strict=strict).run(problem)


def theorem_scan(
    q_list: Sequence[int],
    d: int,
    k: int,
    trials: int = 100,
    seed: int = 0,
    p: Optional[ExponentLike] = None,
    r: Optional[ExponentLike] = None,
    executor: Optional[ExecutorManager] = None,
    caps: Optional["Caps"] = None,
) -> List[RatioReport]:
    """
    Per-q maxima of the norm ratio, at the vertex exponents unless p and r are given.

    Returns the reports of every strategy followed by a ``max`` report, per q
    in the order of *q_list*.
    """
    p = Exponent.parse(p) if p is not None else Exponent.vertex_p(d, k)
    r = Exponent.parse(r) if r is not None else Exponent.vertex_r(d)
    problems = [
        SearchProblem.create(q, d, k, p, r, seed=seed, item_index=index, caps=caps)
        for index, q in enumerate(q_list)
    ]
    budget = caps.subset_budget if caps else None

    def run(problem: SearchProblem) -> List[RatioReport]:
        logger.info("Scanning q=%d d=%d k=%d at p=%s r=%s", problem.space.q, d, k, p, r)
        return default_pipeline(p, r, trials, budget).execute(problem)

    reports = [rep for batch in run_ordered(run, problems, executor) for rep in batch]
    maxima = [rep.value for rep in reports if rep.method == "max"]
    logger.info("Scan d=%d k=%d: per-q maxima %s, spread %.4f", d, k, maxima, spread(maxima))
    return reports


def scan_spread(reports: Sequence[RatioReport]) -> float:
    return spread([rep.value for rep in reports if rep.method == "max"])
