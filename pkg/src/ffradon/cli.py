"""
Command-line front end: ``ffradon <transform|scan|sharpness|lemmas|incidence>``.

Exit codes: 0 when every check passes, 1 on an assertion failure, 2 on a
configuration or resource error.
"""

from __future__ import annotations

import contextlib
import functools
import logging
import re
import subprocess
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, TextIO

import click

from ffradon import __version__
from ffradon.cache import configure_default_cache, default_cache
from ffradon.config import RunConfig, Settings, build_run_config, load_settings
from ffradon.errors import FFRadonError, ParseError
from ffradon.executor_manager import ExecutorManager
from ffradon.logging_config import get_logger, setup_logging
from ffradon.reports import ReportSink
from ffradon.search import scan_spread, theorem_scan
from ffradon.transforms import GridFunction, kplane_transform
from ffradon.verifier import incidence_batch, lemma_batch, sharpness_scan, space_for

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

_BARE_HASH_RE = re.compile(r"^[0-9a-f]{7,40}(-dirty)?$")


@functools.lru_cache(maxsize=1)
def build_tag() -> str:
    """
    ``git describe`` of the source checkout, e.g. ``v0.1.0-3-g1a2b3c4-dirty``.

    Untagged checkouts get ``v<version>-g<hash>``; installs outside a git
    checkout get ``v<version>``.
    """
    fallback = f"v{__version__}"
    try:
        result = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
    except (OSError, subprocess.SubprocessError) as e:
        logger.debug("No git build tag (%s); using %s", e, fallback)
        return fallback
    described = result.stdout.strip()
    if not described:
        return fallback
    if _BARE_HASH_RE.match(described):
        return f"{fallback}-g{described}"
    return described


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------

_POINT_RE = re.compile(r"^\(?\s*(\d+(?:\s*,\s*\d+)*)\s*\)?$")


def parse_point(text: str, d: int, line_number: Optional[int] = None) -> tuple[int, ...]:
    """``"1,2"`` or ``"(1,2)"`` → coordinate tuple of length d."""
    match = _POINT_RE.match(text.strip())
    if not match:
        raise ParseError(f"malformed point literal {text.strip()!r}", line_number)
    coords = tuple(int(c) for c in match.group(1).split(","))
    if len(coords) != d:
        raise ParseError(f"point {text.strip()!r} has {len(coords)} coordinates, expected {d}", line_number)
    return coords


def parse_value(text: str, line_number: Optional[int] = None) -> complex:
    try:
        value = complex(text.strip().replace(" ", ""))
    except ValueError as e:
        raise ParseError(f"malformed value {text.strip()!r}", line_number) from e
    return value.real if value.imag == 0 else value


def parse_function_lines(lines: List[str], d: int) -> Dict[tuple[int, ...], complex]:
    """
    One ``point[: value]`` entry per line; the value defaults to 1.

    Blank lines and ``#`` comments are skipped.
    """
    values: Dict[tuple[int, ...], complex] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        point_text, _, value_text = line.partition(":")
        point = parse_point(point_text, d, number)
        values[point] = parse_value(value_text, number) if value_text.strip() else 1.0
    return values


def build_input_function(
    config: RunConfig,
    input_path: Optional[str],
    indicator: Optional[str],
    values: Optional[str],
    constant: Optional[float],
) -> GridFunction:
    space = space_for(config.q_list[0], config.d, config.caps)
    given = [x is not None for x in (input_path, indicator, values, constant)]
    if sum(given) != 1:
        raise click.UsageError("give exactly one of --input, --indicator, --values, --constant")
    if constant is not None:
        return GridFunction.constant(space, constant)
    if input_path is not None:
        lines = Path(input_path).read_text(encoding="utf-8").splitlines()
    else:
        lines = (indicator or values or "").split(";")
    mapping = parse_function_lines(lines, config.d)
    if indicator is not None:
        mapping = {point: 1.0 for point in mapping}
    return GridFunction.from_mapping(space, {space.rank(point): v for point, v in mapping.items()})


def _parse_q_list(ctx: click.Context, param: click.Parameter, value: str) -> List[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

def common_options(func: Callable) -> Callable:
    options = [
        click.option("--q", "q_list", default="3", callback=_parse_q_list, help="Field orders, e.g. 2,3,5"),
        click.option("--d", default=2, show_default=True, type=int, help="Ambient dimension"),
        click.option("--k", default=1, show_default=True, type=int, help="Plane dimension"),
        click.option("--p", default=None, help="Domain exponent (a/b, integer or inf)"),
        click.option("--r", default=None, help="Target exponent (a/b, integer or inf)"),
        click.option("--vertex", is_flag=True, help="Use p=(d+1)/(k+1), r=d+1"),
        click.option("--trials", default=100, show_default=True, type=int),
        click.option("--seed", default=0, show_default=True, type=int),
        click.option("--threads", default=None, type=int, help="Worker threads (default: FFRADON_THREADS or CPU count)"),
        click.option("--out", default=None, type=click.Path(dir_okay=False), help="Report file (default stdout)"),
        click.option(
            "--format", "fmt", default="json-lines", show_default=True, type=click.Choice(["json-lines", "csv"])
        ),
        click.option("--timing/--no-timing", default=True, help="Record wall time per row"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _make_config(ctx: click.Context, command: str, **kwargs: Any) -> RunConfig:
    settings: Settings = ctx.obj["settings"]
    return build_run_config(command=command, caps=settings.caps, tolerances=settings.tolerances, **kwargs)


@contextlib.contextmanager
def _open_sink(config: RunConfig) -> Iterator[ReportSink]:
    if config.out:
        stream: TextIO = open(config.out, "w", encoding="utf-8", newline="")
    else:
        stream = click.get_text_stream("stdout")
    sink = ReportSink(
        stream,
        fmt=config.fmt,
        cmd=config.command,
        config_hash=config.config_hash(),
        build=build_tag(),
        timing=config.timing,
    )
    try:
        yield sink
    finally:
        sink.flush()
        if config.out:
            stream.close()


def _execute(ctx: click.Context, body: Callable[[], int]) -> None:
    """Run a command body, translating library errors into exit codes."""
    try:
        code = body()
    except (FFRadonError, ValueError, OSError) as e:
        logger.error("%s", e, exc_info=logger.isEnabledFor(logging.DEBUG))
        ctx.exit(EXIT_CONFIG)
    logger.debug("Table cache: %s", default_cache().stats())
    ctx.exit(code)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

@click.group()
@click.version_option(__version__, prog_name="ffradon")
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (default FFRADON_LOG_LEVEL or INFO)")
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False), help="Settings JSON file")
@click.pass_context
def main(ctx: click.Context, log_level: Optional[str], config_path: Optional[str]) -> None:
    """Finite-field k-plane transforms and the verification of their L^p → L^r bounds."""
    setup_logging(level=log_level)
    ctx.ensure_object(dict)
    try:
        settings = load_settings(config_path)
    except (ValueError, OSError) as e:
        logger.error("Failed to load settings: %s", e)
        ctx.exit(EXIT_CONFIG)
    configure_default_cache(settings.caps.table_cache_entries)
    ctx.obj["settings"] = settings


@main.command()
@common_options
@click.option("--input", "input_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--indicator", default=None, help='Point set, e.g. "0,0;1,2"')
@click.option("--values", default=None, help='Point values, e.g. "0,0:1;1,2:0.5"')
@click.option("--constant", default=None, type=float)
@click.pass_context
def transform(ctx: click.Context, input_path, indicator, values, constant, **kwargs: Any) -> None:
    """Dump T_{Π_k} f per plane with canonical plane descriptors."""

    def body() -> int:
        config = _make_config(ctx, "transform", **kwargs)
        f = build_input_function(config, input_path, indicator, values, constant)
        tf = kplane_transform(f, config.k, config.caps)
        with _open_sink(config) as sink:
            for descriptor, value in tf.rows():
                sink.write({
                    "q": f.q,
                    "d": f.d,
                    "k": config.k,
                    "p": None,
                    "r": None,
                    "method": "transform",
                    "value": value.real if value.imag == 0 else str(value),
                    "witness": descriptor,
                    "exhaustive": True,
                    "seed": config.seed,
                    "elapsed_ms": 0,
                })
        return EXIT_OK

    _execute(ctx, body)


@main.command()
@common_options
@click.pass_context
def scan(ctx: click.Context, **kwargs: Any) -> None:
    """Per-q maxima of the norm ratio and their spread across q."""

    def body() -> int:
        config = _make_config(ctx, "scan", **kwargs)
        with ExecutorManager(config.threads) as executor:
            reports = theorem_scan(
                config.q_list,
                config.d,
                config.k,
                trials=config.trials,
                seed=config.seed,
                p=config.p_exponent,
                r=config.r_exponent,
                executor=executor,
                caps=config.caps,
            )
        with _open_sink(config) as sink:
            sink.write_all(rep.to_record() for rep in reports)

        code = EXIT_OK
        maxima = [rep for rep in reports if rep.method == "max"]
        low = [rep.q for rep in maxima if rep.value < 1 - 1e-9]
        if low:
            logger.warning("Maximum ratio below the constant-function value at q=%s", low)
            code = EXIT_FAILED
        observed = scan_spread(reports)
        if observed > config.tolerances.spread_limit:
            logger.warning("Cross-q spread %.4f exceeds %.2f", observed, config.tolerances.spread_limit)
            code = EXIT_FAILED
        return code

    _execute(ctx, body)


@main.command()
@common_options
@click.option("--grid", default=21, show_default=True, type=int, help="Grid points per axis")
@click.pass_context
def sharpness(ctx: click.Context, grid: int, **kwargs: Any) -> None:
    """Hull classification and witness slopes over a (1/p, 1/r) grid."""

    def body() -> int:
        config = _make_config(ctx, "sharpness", grid=grid, **kwargs)
        points = sharpness_scan(config.d, config.k, config.q_list, config.grid, config.tolerances)
        bad = 0
        with _open_sink(config) as sink:
            for point in points:
                for kind, alpha in point.alphas.items():
                    sink.write({
                        "q": ",".join(map(str, config.q_list)),
                        "d": config.d,
                        "k": config.k,
                        "p": str(point.p),
                        "r": str(point.r),
                        "method": f"alpha-{kind}",
                        "value": alpha,
                        "witness": point.region.value,
                        "exhaustive": True,
                        "seed": config.seed,
                        "elapsed_ms": 0,
                    })
                if point.violations:
                    bad += 1
                    logger.warning("(1/p, 1/r) = (%s, %s): %s", point.inv_p, point.inv_r, "; ".join(point.violations))
            sink.write({
                "q": ",".join(map(str, config.q_list)),
                "d": config.d,
                "k": config.k,
                "p": None,
                "r": None,
                "method": "violations",
                "value": bad,
                "witness": f"grid={config.grid}",
                "exhaustive": True,
                "seed": config.seed,
                "elapsed_ms": 0,
            })
        return EXIT_FAILED if bad else EXIT_OK

    _execute(ctx, body)


@main.command()
@common_options
@click.pass_context
def lemmas(ctx: click.Context, **kwargs: Any) -> None:
    """Character-sum bounds for the Radon transform over seeded random sets."""

    def body() -> int:
        config = _make_config(ctx, "lemmas", **kwargs)
        failed = 0
        with ExecutorManager(config.threads) as executor, _open_sink(config) as sink:
            for q in config.q_list:
                reports = lemma_batch(q, config.d, config.trials, config.seed, executor, config.caps)
                for rep in reports:
                    sink.write(rep.to_record())
                    if not rep.passed:
                        failed += 1
                        logger.warning("Offending set %s: %s", rep.describe_set(), "; ".join(rep.violations))
        return EXIT_FAILED if failed else EXIT_OK

    _execute(ctx, body)


@main.command()
@common_options
@click.option("--max-set-size", default=5, show_default=True, type=int)
@click.pass_context
def incidence(ctx: click.Context, max_set_size: int, **kwargs: Any) -> None:
    """Δ(s) and L(l) tuple counts over seeded random set families."""

    def body() -> int:
        config = _make_config(ctx, "incidence", **kwargs)
        failed = 0
        with ExecutorManager(config.threads) as executor, _open_sink(config) as sink:
            for q in config.q_list:
                reports = incidence_batch(
                    q, config.d, config.trials, config.seed, max_set_size, executor, config.caps
                )
                for rep in reports:
                    sink.write_all(rep.to_records())
                    if not rep.passed:
                        failed += 1
                        logger.warning("Offending sets %s: %s", rep.describe_sets(), "; ".join(rep.violations))
        return EXIT_FAILED if failed else EXIT_OK

    _execute(ctx, body)


if __name__ == "__main__":
    sys.exit(main())
