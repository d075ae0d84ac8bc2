"""
Unit tests for settings loading and run configuration validation.
"""

import json

import pytest

from ffradon.config import (
    Caps,
    Settings,
    Tolerances,
    build_run_config,
    default_thread_count,
    load_settings,
)


class TestCaps:
    """Tests for the Caps dataclass."""

    def test_defaults(self):
        caps = Caps()
        assert caps.max_field_order == 1024
        assert caps.max_points == 2**24
        assert caps.subset_budget == 2**16
        assert caps.table_cache_entries == 32

    def test_from_dict(self):
        caps = Caps.from_dict({
            "maxFieldOrder": 64,
            "maxPoints": 4096,
            "maxPlanes": 10000,
            "subsetBudget": 512,
            "tupleBudget": 1000,
            "tableCacheEntries": 4,
        })
        assert caps.max_field_order == 64
        assert caps.max_points == 4096
        assert caps.max_planes == 10000
        assert caps.subset_budget == 512
        assert caps.tuple_budget == 1000
        assert caps.table_cache_entries == 4

    def test_from_dict_partial(self):
        caps = Caps.from_dict({"maxPoints": 100})
        assert caps.max_points == 100
        # Others are defaults
        assert caps.max_field_order == 1024

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError, match="must be positive"):
            Caps(max_points=0)


class TestTolerances:
    def test_defaults(self):
        tol = Tolerances()
        assert tol.spread_limit == 1.25
        assert tol.inside_tolerance == 0.01
        assert tol.outside_threshold == 0.05

    def test_from_dict(self):
        tol = Tolerances.from_dict({"spreadLimit": 1.5})
        assert tol.spread_limit == 1.5
        assert tol.outside_threshold == 0.05


class TestLoadSettings:
    """Tests for load_settings."""

    def test_load_full(self, tmp_path):
        config = {
            "caps": {"maxFieldOrder": 32, "subsetBudget": 1024},
            "tolerances": {"spreadLimit": 1.1},
        }
        config_file = tmp_path / "ffradon.json"
        config_file.write_text(json.dumps(config))

        settings = load_settings(str(config_file))
        assert settings.caps.max_field_order == 32
        assert settings.caps.subset_budget == 1024
        assert settings.caps.max_points == 2**24  # default
        assert settings.tolerances.spread_limit == 1.1

    def test_missing_file_gives_defaults(self, tmp_path):
        settings = load_settings(str(tmp_path / "absent.json"))
        assert settings == Settings()

    def test_empty_object(self, tmp_path):
        config_file = tmp_path / "ffradon.json"
        config_file.write_text("{}")
        assert load_settings(str(config_file)) == Settings()

    def test_invalid_json(self, tmp_path):
        config_file = tmp_path / "ffradon.json"
        config_file.write_text("{not json")
        with pytest.raises(ValueError, match="JSON parsing error"):
            load_settings(str(config_file))

    def test_non_positive_cap(self, tmp_path):
        config_file = tmp_path / "ffradon.json"
        config_file.write_text(json.dumps({"caps": {"maxPoints": -1}}))
        with pytest.raises(ValueError, match="Invalid configuration"):
            load_settings(str(config_file))

    def test_not_an_object(self, tmp_path):
        config_file = tmp_path / "ffradon.json"
        config_file.write_text("[1, 2]")
        with pytest.raises(ValueError, match="expected a JSON object"):
            load_settings(str(config_file))


class TestRunConfig:
    def test_vertex_default(self):
        config = build_run_config(command="scan", q_list=[2, 3], d=3, k=1, threads=1)
        assert config.vertex
        assert config.p == "2"
        assert config.r == "4"

    def test_explicit_exponents(self):
        config = build_run_config(command="scan", q_list=[3], p="3/2", r="3", threads=1)
        assert not config.vertex
        assert str(config.p_exponent) == "3/2"
        assert config.r_exponent.value == 3

    def test_vertex_overrides_exponents(self):
        config = build_run_config(command="scan", q_list=[3], p="2", r="2", vertex=True, threads=1)
        assert (config.p, config.r) == ("3/2", "3")

    def test_half_given_exponents(self):
        with pytest.raises(ValueError, match="give both p and r"):
            build_run_config(command="scan", q_list=[3], p="2", threads=1)

    def test_k_out_of_range(self):
        with pytest.raises(ValueError, match="Configuration validation errors"):
            build_run_config(command="scan", q_list=[3], d=2, k=2, threads=1)

    def test_duplicate_q(self):
        with pytest.raises(ValueError, match="duplicate"):
            build_run_config(command="scan", q_list=[3, 3], threads=1)

    def test_bad_exponent(self):
        with pytest.raises(ValueError):
            build_run_config(command="scan", q_list=[3], p="1/2", r="3", threads=1)

    def test_hash_ignores_output_options(self):
        a = build_run_config(command="scan", q_list=[3], threads=1, fmt="csv")
        b = build_run_config(command="scan", q_list=[3], threads=8, out="x.jsonl", timing=False)
        c = build_run_config(command="scan", q_list=[3], threads=1, seed=1)
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()

    def test_threads_from_environment(self, monkeypatch):
        monkeypatch.setenv("FFRADON_THREADS", "3")
        assert default_thread_count() == 3
        assert build_run_config(command="scan", q_list=[3]).threads == 3

    def test_threads_default_without_environment(self, monkeypatch):
        monkeypatch.delenv("FFRADON_THREADS", raising=False)
        monkeypatch.setattr("ffradon.config.os.cpu_count", lambda: 6)
        config = build_run_config(command="scan", q_list=[3])
        assert config.threads == 6

    def test_bad_threads_environment(self, monkeypatch):
        monkeypatch.setenv("FFRADON_THREADS", "many")
        assert default_thread_count() >= 1
