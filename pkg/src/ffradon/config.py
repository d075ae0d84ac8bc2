"""
Configuration loading utilities with Pydantic validation.

Two layers:

* ``Settings``: resource caps and verification tolerances, read from an
  optional JSON file (``ffradon.json``) with ``caps`` and ``tolerances`` keys.
* ``RunConfig``: one validated command-line run (command, q list, exponents,
  seed, threads, output).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ffradon.logging_config import get_logger
from ffradon.measures import Exponent

logger = get_logger(__name__)

THREADS_ENV = "FFRADON_THREADS"
DEFAULT_CONFIG_FILE = "ffradon.json"


# ---------------------------------------------------------------------------
# Caps and tolerances (non-run config)
# ---------------------------------------------------------------------------

@dataclass
class Caps:
    """Resource caps guarding against accidental blow-up."""

    max_field_order: int = 1024
    """Largest field order q accepted by ``make_field``."""

    max_points: int = 2**24
    """Largest q^d accepted for point enumeration."""

    max_planes: int = 2**22
    """Largest |Π_k| accepted for plane enumeration."""

    subset_budget: int = 2**16
    """Indicator search is exhaustive when 2^(q^d) does not exceed this."""

    tuple_budget: int = 10**8
    """Largest number of tuples an exhaustive incidence scan may visit."""

    table_cache_entries: int = 32
    """Maximum number of precomputed tables kept in the shared cache."""

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if value <= 0:
                raise ValueError(f"cap {name} must be positive, got {value}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Caps":
        return cls(
            max_field_order=data.get("maxFieldOrder", cls.max_field_order),
            max_points=data.get("maxPoints", cls.max_points),
            max_planes=data.get("maxPlanes", cls.max_planes),
            subset_budget=data.get("subsetBudget", cls.subset_budget),
            tuple_budget=data.get("tupleBudget", cls.tuple_budget),
            table_cache_entries=data.get("tableCacheEntries", cls.table_cache_entries),
        )


@dataclass
class Tolerances:
    """Acceptance thresholds for the verification commands."""

    spread_limit: float = 1.25
    """Maximum allowed max/min ratio of per-q maxima in a boundedness scan."""

    inside_tolerance: float = 0.01
    """Largest fitted exponent allowed for exact witnesses inside the hull."""

    outside_threshold: float = 0.05
    """Smallest fitted exponent some witness must reach outside the hull."""

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Tolerances":
        return cls(
            spread_limit=data.get("spreadLimit", cls.spread_limit),
            inside_tolerance=data.get("insideTolerance", cls.inside_tolerance),
            outside_threshold=data.get("outsideThreshold", cls.outside_threshold),
        )


@dataclass
class Settings:
    """Caps plus tolerances, as loaded from ``ffradon.json``."""

    caps: Caps = field(default_factory=Caps)
    tolerances: Tolerances = field(default_factory=Tolerances)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Settings":
        return cls(
            caps=Caps.from_dict(data.get("caps", {})),
            tolerances=Tolerances.from_dict(data.get("tolerances", {})),
        )


def load_settings(config_path: Optional[str] = None) -> Settings:
    """
    Load caps and tolerances from a JSON file.

    Expected format::

        {
          "caps": {"maxFieldOrder": 1024, "subsetBudget": 65536},
          "tolerances": {"spreadLimit": 1.25}
        }

    Args:
        config_path: Path to the file. If *None*, looks for ``ffradon.json``
                     in the current directory.

    Returns:
        The parsed ``Settings`` (defaults when the file is absent or empty).

    Raises:
        ValueError: If the file is not valid JSON or a cap is not positive.
    """
    config_file = Path(config_path) if config_path else Path(DEFAULT_CONFIG_FILE)

    if not config_file.exists():
        if config_path:
            logger.warning("Configuration file %s not found; using defaults.", config_file)
        return Settings()

    logger.info("Loading settings from %s", config_file)
    try:
        with open(config_file, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        error_msg = f"JSON parsing error in {config_file}: {e}"
        logger.error(error_msg)
        raise ValueError(error_msg) from e

    if not raw:
        logger.info("Config file is empty. Using defaults.")
        return Settings()
    if not isinstance(raw, dict):
        raise ValueError(f"Invalid configuration in {config_file}: expected a JSON object")

    try:
        return Settings.from_dict(raw)
    except (TypeError, ValueError) as e:
        error_msg = f"Invalid configuration in {config_file}: {e}"
        logger.error(error_msg)
        raise ValueError(error_msg) from e


# ---------------------------------------------------------------------------
# Run configuration (Pydantic)
# ---------------------------------------------------------------------------

Command = Literal["transform", "scan", "sharpness", "lemmas", "incidence"]
OutputFormat = Literal["json-lines", "csv"]


def default_thread_count() -> int:
    """Thread count from ``FFRADON_THREADS``, falling back to the CPU count."""
    raw = os.getenv(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", THREADS_ENV, raw)
        else:
            if value > 0:
                return value
            logger.warning("Ignoring non-positive %s=%r", THREADS_ENV, raw)
    return os.cpu_count() or 1


class RunConfig(BaseModel):
    """
    Validated configuration of one command-line run.

    Attributes:
        command: Which verification command runs.
        q_list: Field orders to run at.
        d, k: Ambient dimension and plane dimension (1 <= k <= d-1).
        p, r: Exponents as strings (``"3/2"``, ``"3"``, ``"inf"``); both are
              replaced by the hull vertex when ``vertex`` is set or omitted.
        trials: Number of seeded trials per q.
        seed: Base seed; every work item derives its own generator from it.
        threads: Worker threads (flag, then ``FFRADON_THREADS``, then CPU count).
        out: Output file (stdout when None).
        fmt: ``json-lines`` or ``csv``.
        timing: Whether records carry measured ``elapsed_ms`` (0 otherwise).
    """

    command: Command
    q_list: List[int] = Field(..., min_length=1, description="Field orders q")
    d: int = Field(2, ge=2, description="Ambient dimension")
    k: int = Field(1, ge=1, description="Plane dimension")
    p: Optional[str] = Field(None, description="Domain exponent, e.g. 3/2")
    r: Optional[str] = Field(None, description="Target exponent, e.g. 3")
    vertex: bool = Field(False, description="Use p=(d+1)/(k+1), r=d+1")
    trials: int = Field(100, ge=1)
    seed: int = Field(0, ge=0)
    grid: int = Field(21, ge=2, description="Sharpness grid resolution per axis")
    threads: Optional[int] = Field(None, validate_default=True, description="Worker thread count")
    out: Optional[str] = None
    fmt: OutputFormat = "json-lines"
    timing: bool = True
    caps: Caps = Field(default_factory=Caps)
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("q_list")
    @classmethod
    def validate_q_list(cls, v: List[int]) -> List[int]:
        if any(q < 2 for q in v):
            raise ValueError("every q must be at least 2")
        if len(v) != len(set(v)):
            raise ValueError(f"duplicate field orders in {v}")
        return v

    @field_validator("p", "r")
    @classmethod
    def validate_exponent(cls, v: Optional[str]) -> Optional[str]:
        if v is None:
            return v
        return str(Exponent.parse(v))

    @field_validator("threads", mode="before")
    @classmethod
    def resolve_threads(cls, v: Optional[int]) -> int:
        if v is None:
            return default_thread_count()
        return v

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v: int) -> int:
        if v < 1:
            raise ValueError("threads must be at least 1")
        return v

    @model_validator(mode="after")
    def resolve_exponents(self) -> "RunConfig":
        if self.k > self.d - 1:
            raise ValueError(f"k must satisfy 1 <= k <= d-1, got k={self.k}, d={self.d}")
        if self.vertex or (self.p is None and self.r is None):
            self.p = str(Exponent.vertex_p(self.d, self.k))
            self.r = str(Exponent.vertex_r(self.d))
            self.vertex = True
        elif self.p is None or self.r is None:
            raise ValueError("give both p and r, or neither (vertex exponents)")
        return self

    @property
    def p_exponent(self) -> Exponent:
        return Exponent.parse(self.p)

    @property
    def r_exponent(self) -> Exponent:
        return Exponent.parse(self.r)

    def config_hash(self) -> str:
        """Short stable hash of everything that determines the report content."""
        payload = self.model_dump_json(exclude={"threads", "out", "fmt", "timing"})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]

    model_config = ConfigDict(
        validate_assignment=False,
        json_schema_extra={
            "example": {
                "command": "scan",
                "q_list": [2, 3, 5],
                "d": 2,
                "k": 1,
                "vertex": True,
                "trials": 1000,
                "seed": 0,
            }
        },
    )


def build_run_config(**kwargs: Any) -> RunConfig:
    """Validate a run configuration, flattening pydantic errors into ``ValueError``."""
    try:
        return RunConfig(**kwargs)
    except ValidationError as e:
        errors = []
        for error in e.errors():
            field_path = " -> ".join(str(loc) for loc in error["loc"]) or "config"
            errors.append(f"  {field_path}: {error['msg']}")
        error_message = "Configuration validation errors:\n" + "\n".join(errors)
        logger.error(error_message)
        raise ValueError(error_message) from e
