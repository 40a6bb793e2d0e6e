import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evlbench.mclass import (
    MCState,
    MicroCluster,
    mc_centroid,
    mc_radius,
    mclass_init,
    mclass_predict_batch,
    mclass_step,
)


def test_singleton():
    mc = MicroCluster.from_point([3.0, 4.0], 1)
    assert np.array_equal(mc_centroid(mc), [3.0, 4.0])
    assert mc_radius(mc) == 0.0


def test_worked_pair_example():
    mc = MicroCluster.from_points([[0.0, 0.0], [2.0, 0.0]], 0)
    assert mc.n == 2
    assert np.array_equal(mc.linear_sum, [2.0, 0.0])
    assert np.array_equal(mc.square_sum, [4.0, 0.0])
    assert np.array_equal(mc_centroid(mc), [1.0, 0.0])
    assert mc_radius(mc) == 1.0


def test_empty_mc_rejected():
    mc = MicroCluster(0, np.zeros(2), np.zeros(2), 0)
    with pytest.raises(ValueError):
        mc_centroid(mc)
    with pytest.raises(ValueError):
        mc_radius(mc)


@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from([1, 2, 4, 8, 16, 32]).flatmap(
        lambda n: st.lists(
            st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=n, max_size=n
        )
    ),
    st.tuples(st.integers(-20, 20), st.integers(-20, 20)),
)
def test_additivity_and_translation_exact(pts, shift):
    # dyadic coordinates and power-of-two counts keep every operation exact
    X = np.array(pts, dtype=float) / 4
    v = np.array(shift, dtype=float) / 2
    a = MicroCluster.from_point(X[0], 0)
    for x in X[1:]:
        a.absorb(x)
    b = MicroCluster.from_points(X, 0)
    assert a.n == b.n
    assert np.array_equal(a.linear_sum, b.linear_sum)
    assert np.array_equal(a.square_sum, b.square_sum)
    moved = MicroCluster.from_points(X + v, 0)
    assert np.array_equal(mc_centroid(moved), mc_centroid(b) + v)
    assert mc_radius(moved) == mc_radius(b)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=2**32 - 1))
def test_variance_non_negative(n, seed):
    X = np.random.default_rng(seed).normal(size=(n, 3)) * 1e3
    mc = MicroCluster.from_points(X, 0)
    assert np.all(mc.square_sum >= mc.linear_sum**2 / mc.n - 1e-9 * np.abs(mc.square_sum).max())
    assert mc_radius(mc) >= 0.0


def test_init_singletons():
    X = np.random.default_rng(0).random((20, 2))
    y = np.arange(20) % 3
    s = mclass_init(X, y)
    assert len(s.clusters) == 20
    assert all(mc_radius(mc) == 0.0 for mc in s.clusters)
    assert [mc.label for mc in s.clusters] == list(y)


def test_init_duplicates_not_merged():
    s = mclass_init([[1.0, 1.0], [1.0, 1.0]], [0, 0])
    assert len(s.clusters) == 2


def test_init_errors():
    with pytest.raises(ValueError):
        mclass_init(np.empty((0, 2)), [])
    with pytest.raises(ValueError):
        MCState([], 0.0)


def test_nearest_centroid_prediction():
    s = mclass_init([[0.0, 0.0], [10.0, 0.0]], ["A", "B"], r=0.1)
    label, _ = mclass_step(s, [1.0, 0.0])
    assert label == "A"


def test_radius_violation_creates_new_cluster():
    s = mclass_init([[0.0, 0.0]], [0], r=0.5)
    label, s = mclass_step(s, [2.0, 0.0])
    assert label == 0
    assert len(s.clusters) == 2
    assert np.array_equal(mc_centroid(s.clusters[1]), [2.0, 0.0])
    assert s.clusters[1].label == 0


def test_within_radius_absorbs():
    s = mclass_init([[0.0, 0.0]], [0], r=1.5)
    _, s = mclass_step(s, [2.0, 0.0])
    assert len(s.clusters) == 1
    assert np.array_equal(mc_centroid(s.clusters[0]), [1.0, 0.0])
    assert np.array_equal(s.centroids[0], [1.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(
    st.floats(min_value=0.01, max_value=2.0),
    st.integers(min_value=1, max_value=200),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_online_invariants(r, n, seed):
    rng = np.random.default_rng(seed)
    X0 = rng.normal(size=(6, 2))
    y0 = np.arange(6) % 2
    stream = rng.normal(size=(n, 2)) * 2

    one = mclass_init(X0, y0, r)
    counts = [len(one.clusters)]
    labels_one = []
    for x in stream:
        before = len(one.clusters)
        lab, one = mclass_step(one, x)
        labels_one.append(lab)
        assert len(one.clusters) in (before, before + 1)
        counts.append(len(one.clusters))
    for mc in one.clusters:
        assert mc_radius(mc) <= r + 1e-9
    assert np.allclose(one.centroids, [mc_centroid(mc) for mc in one.clusters])

    batch = mclass_init(X0, y0, r)
    labels_batch = mclass_predict_batch(batch, stream)
    assert list(labels_batch) == labels_one
    assert len(batch.clusters) == len(one.clusters)
    assert counts == sorted(counts)
