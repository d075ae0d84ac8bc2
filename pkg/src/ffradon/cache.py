"""
Table cache for ffradon.

Plane families, incidence tables and character kernels are immutable once
built and are reused by every transform at the same (q, d, k).  This module
keeps them in a bounded, size-aware LRU cache shared across worker threads.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, Optional

import numpy as np

from ffradon.logging_config import get_logger

logger = get_logger(__name__)


@dataclass
class CacheEntry:
    """A single cached table with metadata for eviction decisions."""

    key: Hashable
    value: Any
    last_accessed_at: float
    size_bytes: int = 0

    @property
    def idle_seconds(self) -> float:
        """Seconds since this entry was last accessed."""
        return time.monotonic() - self.last_accessed_at


def estimate_size(value: Any) -> int:
    """Rough byte size of a cached value (numpy arrays and their containers)."""
    if isinstance(value, np.ndarray):
        return int(value.nbytes)
    if hasattr(value, "nbytes_estimate"):
        return int(value.nbytes_estimate())
    if isinstance(value, (list, tuple)):
        return sum(estimate_size(v) for v in value)
    if isinstance(value, dict):
        return sum(estimate_size(v) for v in value.values())
    if hasattr(value, "data") and hasattr(value, "indices"):
        # scipy sparse matrices
        return int(value.data.nbytes + value.indices.nbytes + value.indptr.nbytes)
    return 64


class TableCache:
    """
    Bounded cache of precomputed tables.

    Features:
    - Keyed by hashable descriptors such as ``("family", field_key, d, k)``
    - Size-aware LRU eviction (large idle entries evicted first)
    - Thread-safe; a table is built at most once per key even when several
      workers ask for it concurrently
    """

    def __init__(self, max_entries: int = 32) -> None:
        """
        Initialise the cache.

        Args:
            max_entries: Maximum number of cached tables.
        """
        self._entries: Dict[Hashable, CacheEntry] = {}
        self.max_entries = max_entries
        self._lock = threading.RLock()
        self._hits = 0
        self._misses = 0

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def get_or_build(self, key: Hashable, builder: Callable[[], Any]) -> Any:
        """
        Return the table stored under *key*, building it with *builder* on a miss.

        The lock is held while building so concurrent callers never duplicate
        an expensive construction.
        """
        with self._lock:
            value = self.get(key)
            if value is not None:
                self._hits += 1
                logger.debug("Table cache hit for %s", key)
                return value

            self._misses += 1
            started = time.monotonic()
            value = builder()
            self.put(key, value)
            logger.debug(
                "Built table %s in %.1f ms", key, (time.monotonic() - started) * 1000.0
            )
            return value

    def put(self, key: Hashable, value: Any) -> None:
        """Store *value* under *key*, evicting if the cache is full."""
        with self._lock:
            if key not in self._entries:
                self._evict_to(self.max_entries - 1)
            self._entries[key] = CacheEntry(
                key=key,
                value=value,
                last_accessed_at=time.monotonic(),
                size_bytes=estimate_size(value),
            )

    def get(self, key: Hashable) -> Optional[Any]:
        """Return the cached value or ``None``."""
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            entry.last_accessed_at = time.monotonic()
            return entry.value

    def clear(self) -> None:
        """Remove all entries and reset the hit counters."""
        with self._lock:
            self._entries.clear()
            self._hits = 0
            self._misses = 0

    @property
    def size(self) -> int:
        return len(self._entries)

    def stats(self) -> Dict[str, Any]:
        with self._lock:
            return {
                "entries": len(self._entries),
                "max_entries": self.max_entries,
                "hits": self._hits,
                "misses": self._misses,
                "total_cached_bytes": sum(e.size_bytes for e in self._entries.values()),
            }

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------

    def _evict_to(self, limit: int) -> None:
        """Evict largest idle-time × size scores until at most *limit* entries remain."""
        while len(self._entries) > max(limit, 0) and self._entries:
            victim = max(
                self._entries.values(),
                key=lambda e: (e.idle_seconds + 1e-6) * max(e.size_bytes, 1),
            )
            del self._entries[victim.key]
            logger.debug("Evicted table %s (%d bytes)", victim.key, victim.size_bytes)


_default_cache = TableCache()


def default_cache() -> TableCache:
    """The process-wide table cache used when callers pass none."""
    return _default_cache


def configure_default_cache(max_entries: int) -> None:
    """Resize the shared cache (from ``Caps.table_cache_entries``)."""
    with _default_cache._lock:
        _default_cache.max_entries = max_entries
        _default_cache._evict_to(max_entries)
