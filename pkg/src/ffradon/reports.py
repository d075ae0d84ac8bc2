"""
Report records and the ordered report sink.

Every experiment produces plain dataclasses (``RatioReport``,
``LemmaReport``, ``IncidenceReport``, ...).  The command line turns them
into flat records carrying the common keys and writes them through one
``ReportSink`` in item order, never completion order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, TextIO

from ffradon.logging_config import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = "ffradon/1"

CSV_COLUMNS = [
    "schema",
    "cmd",
    "q",
    "d",
    "k",
    "p",
    "r",
    "method",
    "value",
    "witness",
    "exhaustive",
    "seed",
    "elapsed_ms",
    "config_hash",
    "build",
]

FORMATS = ("json-lines", "csv")


def _json_float(value: Optional[float]) -> Any:
    if value is None:
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return value


# ---------------------------------------------------------------------------
# Report types
# ---------------------------------------------------------------------------

@dataclass
class RatioReport:
    """
    One operator-norm experiment outcome.

    ``value`` is the largest norm ratio found by ``method`` and ``witness``
    describes the function attaining it.
    """

    q: int
    d: int
    k: int
    p: str
    r: str
    method: str
    value: float
    witness: str = ""
    exhaustive: bool = False
    iterations: int = 0
    elapsed_ms: float = 0.0
    converged: bool = True
    seed: int = 0

    def to_record(self) -> Dict[str, Any]:
        return {
            "q": self.q,
            "d": self.d,
            "k": self.k,
            "p": self.p,
            "r": self.r,
            "method": self.method,
            "value": _json_float(self.value),
            "witness": self.witness,
            "exhaustive": self.exhaustive,
            "seed": self.seed,
            "elapsed_ms": self.elapsed_ms,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass
class LemmaReport:
    """Measured norms, explicit bounds and the I/II split for one set E."""

    q: int
    d: int
    points: List[int]
    sup_t0: float
    sup_t1: float
    sup_bound: float
    l2sq_t0: float
    l2sq_t1: float
    l2sq_bound: float
    term_i: float
    term_ii: float
    gamma_symmetric: bool
    interpolated_norm: Optional[float] = None
    interpolated_bound: Optional[float] = None
    violations: List[str] = field(default_factory=list)
    seed: int = 0
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def worst_ratio(self) -> float:
        """Largest measured/bound quotient among the sup and L^2 checks."""
        return max(
            self.sup_t0 / self.sup_bound,
            self.sup_t1 / self.sup_bound,
            self.l2sq_t0 / self.l2sq_bound,
            self.l2sq_t1 / self.l2sq_bound,
        )

    def describe_set(self) -> str:
        return "E=" + ",".join(str(x) for x in self.points)

    def to_record(self) -> Dict[str, Any]:
        return {
            "q": self.q,
            "d": self.d,
            "k": self.d - 1,
            "p": None,
            "r": None,
            "method": "lemma",
            "value": self.worst_ratio,
            "witness": self.describe_set(),
            "exhaustive": True,
            "seed": self.seed,
            "elapsed_ms": self.elapsed_ms,
            "sup_t0": self.sup_t0,
            "sup_t1": self.sup_t1,
            "sup_bound": self.sup_bound,
            "l2sq_t0": self.l2sq_t0,
            "l2sq_t1": self.l2sq_t1,
            "l2sq_bound": self.l2sq_bound,
            "I": self.term_i,
            "II": self.term_ii,
            "gamma_symmetric": self.gamma_symmetric,
            "interpolated_norm": _json_float(self.interpolated_norm),
            "interpolated_bound": _json_float(self.interpolated_bound),
            "passed": self.passed,
            "violations": list(self.violations),
        }


@dataclass
class IncidenceReport:
    """Δ(s) histogram and L(l) classes of one family of sets E_0..E_d."""

    q: int
    d: int
    sets: List[List[int]]
    delta: List[int]
    l_classes: List[int]
    violations: List[str] = field(default_factory=list)
    seed: int = 0
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations

    def describe_sets(self) -> str:
        return "|".join(",".join(str(x) for x in s) for s in self.sets)

    def to_records(self) -> List[Dict[str, Any]]:
        base = {
            "q": self.q,
            "d": self.d,
            "k": 1,
            "p": None,
            "r": None,
            "witness": self.describe_sets(),
            "exhaustive": True,
            "seed": self.seed,
            "elapsed_ms": self.elapsed_ms,
        }
        rows = [{**base, "method": f"delta[{s}]", "value": count} for s, count in enumerate(self.delta)]
        rows.extend(
            {**base, "method": f"L[{l}]", "value": count}
            for l, count in enumerate(self.l_classes, start=1)
        )
        rows[-1]["passed"] = self.passed
        rows[-1]["violations"] = list(self.violations)
        return rows


# ---------------------------------------------------------------------------
# Sink
# ---------------------------------------------------------------------------

class ReportSink:
    """
    Writes records as json-lines or csv to one stream.

    Every record gets ``schema``, ``cmd``, ``config_hash`` and ``build``;
    ``elapsed_ms`` is zeroed when timing is off so reruns are byte-identical.
    """

    def __init__(
        self,
        stream: TextIO,
        fmt: str = "json-lines",
        cmd: str = "",
        config_hash: str = "",
        build: str = "",
        timing: bool = True,
    ) -> None:
        if fmt not in FORMATS:
            raise ValueError(f"Unknown report format '{fmt}'. Supported: {', '.join(FORMATS)}")
        self.stream = stream
        self.fmt = fmt
        self.cmd = cmd
        self.config_hash = config_hash
        self.build = build
        self.timing = timing
        self.count = 0
        self._csv: Optional[csv.DictWriter] = None

    def _complete(self, record: Dict[str, Any]) -> Dict[str, Any]:
        full: Dict[str, Any] = {"schema": SCHEMA_VERSION, "cmd": self.cmd}
        full.update(record)
        if not self.timing:
            full["elapsed_ms"] = 0
        else:
            full["elapsed_ms"] = round(float(full.get("elapsed_ms", 0.0)), 3)
        full["config_hash"] = self.config_hash
        full["build"] = self.build
        return full

    def write(self, record: Dict[str, Any]) -> None:
        full = self._complete(record)
        if self.fmt == "json-lines":
            self.stream.write(json.dumps(full, ensure_ascii=False) + "\n")
        else:
            if self._csv is None:
                self._csv = csv.DictWriter(
                    self.stream, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n"
                )
                self._csv.writeheader()
            self._csv.writerow(full)
        self.count += 1

    def write_all(self, records: Iterable[Dict[str, Any]]) -> None:
        for record in records:
            self.write(record)

    def flush(self) -> None:
        self.stream.flush()
        logger.debug("Wrote %d %s records", self.count, self.fmt)
