import json

import numpy as np
import pytest

from core import (FlagSeverity, ParticleStreams, StreamTag, derive_seed, export_json_file, flags,
                  import_json_file, raise_flag)


def test_derive_seed_is_deterministic_and_key_sensitive():
    assert derive_seed(1, StreamTag.TRIAL, 3) == derive_seed(1, StreamTag.TRIAL, 3)
    assert derive_seed(1, StreamTag.TRIAL, 3) != derive_seed(1, StreamTag.TRIAL, 4)
    assert 0 <= derive_seed(7) < 2 ** 63


def test_derive_seed_rejects_negative_keys():
    with pytest.raises(ValueError):
        derive_seed(1, -2)


def test_particle_draws_do_not_depend_on_particle_count():
    streams = ParticleStreams(42)
    small = streams.normals(StreamTag.TRANSITION, 3, np.arange(10), 4)
    large = streams.normals(StreamTag.TRANSITION, 3, np.arange(1000), 4)
    np.testing.assert_array_equal(small, large[:10])


def test_particle_draws_are_addressed_by_id():
    streams = ParticleStreams(42)
    full = streams.normals(StreamTag.RESAMPLE, 0, np.arange(8), 2)
    subset = streams.normals(StreamTag.RESAMPLE, 0, np.array([5, 2]), 2)
    np.testing.assert_array_equal(subset, full[[5, 2]])


def test_particle_draws_differ_between_steps_and_tags():
    streams = ParticleStreams(1)
    a = streams.normals(StreamTag.TRANSITION, 0, np.arange(5), 3)
    assert not np.array_equal(a, streams.normals(StreamTag.TRANSITION, 1, np.arange(5), 3))
    assert not np.array_equal(a, streams.normals(StreamTag.RESAMPLE, 0, np.arange(5), 3))


def test_particle_draws_are_standard_normal():
    z = ParticleStreams(3).normals(StreamTag.TRANSITION, 0, np.arange(100_000), 1)[:, 0]
    assert abs(z.mean()) < 3 / np.sqrt(z.size)
    assert abs(z.std() - 1.0) < 0.01


def test_flag_registry_counts_and_failures():
    raise_flag("jitter", "a")
    raise_flag("jitter", "b")
    assert not flags.has_failures()
    raise_flag("truncated", "c", FlagSeverity.FAILURE)
    assert flags.counts() == {"jitter": 2, "truncated": 1}
    assert flags.summary()["failure"] is True
    flags.clear()
    assert flags.snapshot() == []


def test_json_export_round_trips_floats_exactly(tmp_path):
    values = list(np.random.default_rng(0).standard_normal(50))
    path = tmp_path / "sub" / "values.json"
    export_json_file(str(path), {"values": values})
    assert import_json_file(str(path))["values"] == values


def test_json_import_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        import_json_file(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{nope", encoding="utf-8")
    with pytest.raises(json.JSONDecodeError):
        import_json_file(str(broken))
