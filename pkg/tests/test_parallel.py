import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horoflow.checks import identity_residuals
from horoflow.errors import ConfigInvalid
from horoflow.parallel import map_shards, shard_rngs, shard_sizes, worker_count


@given(st.integers(0, 10**7), st.integers(1, 64))
def test_shard_sizes_partition(n, k):
    sizes = shard_sizes(n, k)
    assert sum(sizes) == n and len(sizes) == k and max(sizes) - min(sizes) <= 1


def test_worker_count_from_environment(monkeypatch):
    monkeypatch.setenv("HOROFLOW_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.delenv("HOROFLOW_THREADS")
    assert worker_count() >= 1
    for bad in ("0", "-2", "two"):
        monkeypatch.setenv("HOROFLOW_THREADS", bad)
        with pytest.raises(ConfigInvalid):
            worker_count()


def test_shards_independent_of_threads(monkeypatch):
    def draw(rng):
        return rng.standard_normal(5)

    monkeypatch.setenv("HOROFLOW_THREADS", "1")
    serial = map_shards(draw, shard_rngs(17))
    monkeypatch.setenv("HOROFLOW_THREADS", "8")
    threaded = map_shards(draw, shard_rngs(17))
    assert all(np.array_equal(a, b) for a, b in zip(serial, threaded))
    assert not np.array_equal(serial[0], serial[1])


def test_identity_residuals_small_run():
    res = identity_residuals(300, seed=1)
    assert set(res) >= {"associativity", "conjugation", "equivariance", "alpha_vs_commutation"}
    assert max(res.values()) < 1e-9
