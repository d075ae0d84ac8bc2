"""
Unit tests for TableCache.
"""

import threading
import time

import numpy as np

from ffradon.cache import TableCache, configure_default_cache, default_cache, estimate_size


def test_put_and_get():
    cache = TableCache(max_entries=10)
    cache.put(("family", 3, 2, 1), np.arange(4))

    retrieved = cache.get(("family", 3, 2, 1))
    assert retrieved is not None
    assert retrieved.tolist() == [0, 1, 2, 3]


def test_get_missing_returns_none():
    cache = TableCache()
    assert cache.get("nonexistent") is None


def test_get_or_build_builds_once():
    cache = TableCache()
    calls = []

    def build():
        calls.append(1)
        return np.zeros(3)

    first = cache.get_or_build("k", build)
    second = cache.get_or_build("k", build)
    assert first is second
    assert len(calls) == 1
    stats = cache.stats()
    assert stats["hits"] == 1
    assert stats["misses"] == 1


def test_concurrent_builders_share_one_table():
    cache = TableCache()
    calls = []
    results = []

    def build():
        calls.append(1)
        time.sleep(0.02)
        return object()

    def worker():
        results.append(cache.get_or_build("shared", build))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    assert len(calls) == 1
    assert all(r is results[0] for r in results)


def test_lru_eviction():
    cache = TableCache(max_entries=2)
    cache.put("a", np.zeros(10))
    cache.put("b", np.zeros(10))

    # Let some time pass so idle_seconds diverge after the access
    time.sleep(0.05)

    # Access a to keep it fresh (resets last_accessed_at)
    cache.get("a")

    # This should evict b (higher idle time × size score)
    cache.put("c", np.zeros(10))

    assert cache.get("a") is not None
    assert cache.get("c") is not None
    assert cache.get("b") is None


def test_clear():
    cache = TableCache()
    cache.put("a", np.ones(1))
    cache.put("b", np.ones(1))
    assert cache.size == 2
    cache.clear()
    assert cache.size == 0
    assert cache.stats()["misses"] == 0


def test_estimate_size():
    assert estimate_size(np.zeros(8, dtype=np.float64)) == 64
    assert estimate_size((np.zeros(2), np.zeros(2))) == 32


def test_configure_default_cache():
    original = default_cache().max_entries
    try:
        configure_default_cache(3)
        assert default_cache().max_entries == 3
        assert default_cache().size <= 3
    finally:
        configure_default_cache(original)


def test_shrinking_keeps_exactly_the_limit():
    original = default_cache().max_entries
    try:
        configure_default_cache(10)
        for i in range(5):
            default_cache().put(("shrink", i), np.zeros(1))
        assert default_cache().size >= 5
        configure_default_cache(3)
        assert default_cache().size == 3
    finally:
        configure_default_cache(original)


def test_put_at_capacity_keeps_limit():
    cache = TableCache(max_entries=3)
    for i in range(6):
        cache.put(i, np.zeros(1))
    assert cache.size == 3
    assert cache.get(5) is not None
