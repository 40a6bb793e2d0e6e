import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evlbench.harness import (
    ALGORITHMS,
    AlgorithmConfig,
    ConfigError,
    RunResult,
    average_rank,
    label_canary,
    run_stream,
    sensitivity_sweep,
)
from evlbench.streams import StreamSpec, generate_stream


def _result(algo, dataset, acc, seconds=1.0):
    return RunResult(algo, {}, algo, dataset, "", [acc], acc, seconds, 0, 0, "")


@pytest.fixture(scope="module")
def stationary():
    return generate_stream(
        StreamSpec(drift_rate=0.0, class_overlap=0.05, total_instances=1500, batch_size=150, seed=1)
    )


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_stationary_separable(algo, stationary):
    r = run_stream(AlgorithmConfig(algo), stationary)
    assert r.average_accuracy >= 0.99
    assert len(r.per_batch_accuracy) == stationary.batch_count
    assert abs(r.average_accuracy - np.mean(r.per_batch_accuracy)) <= 1e-12
    assert r.wall_seconds > 0


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_determinism(algo):
    s = generate_stream(StreamSpec(total_instances=900, batch_size=150, seed=2, class_overlap=0.3))
    a = run_stream(AlgorithmConfig(algo, seed=7), s).to_record()
    b = run_stream(AlgorithmConfig(algo, seed=7), s).to_record()
    a.pop("wall_seconds"), b.pop("wall_seconds")
    assert a == b


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_label_canary(algo):
    s = generate_stream(StreamSpec(total_instances=600, batch_size=150, seed=3, class_overlap=0.3))
    assert label_canary(AlgorithmConfig(algo), s)


def test_canary_actually_poisons():
    s = generate_stream(StreamSpec(total_instances=600, batch_size=150, seed=3))
    p = s.with_hidden_labels([np.zeros(150, dtype=int)] * 4)
    assert not all(np.array_equal(s.hidden_labels(t), p.hidden_labels(t)) for t in range(4))


def test_config_errors():
    with pytest.raises(ConfigError):
        AlgorithmConfig("svm")
    with pytest.raises(ConfigError):
        AlgorithmConfig("scargc", {"r": 0.1})
    assert AlgorithmConfig("level-iw", {"σ": 2.0, "lambda": 0.5}).params == {"sigma": 2.0, "lam": 0.5}


def test_resolve_defaults_from_stream():
    s = generate_stream(StreamSpec(class_count=3, modes_per_class=2, total_instances=300, batch_size=60))
    assert AlgorithmConfig("scargc").resolve(s) == {"k": 6, "pool_size": 60}
    assert AlgorithmConfig("compose-gmm").resolve(s)["gmm_components"] == 2


def test_alpha_requires_planar_data():
    s = generate_stream(StreamSpec(dimension=3, total_instances=300))
    with pytest.raises(ConfigError):
        run_stream(AlgorithmConfig("compose-alpha"), s)


def test_dataset_ref_and_record_round_trip():
    s = generate_stream(StreamSpec(total_instances=300))
    r = run_stream(AlgorithmConfig("fast-compose"), s)
    assert StreamSpec.from_json(r.dataset_ref) == s.spec
    assert RunResult.from_record(r.to_record()).to_record() == r.to_record()


# -- ranks ---------------------------------------------------------------------


def test_rank_simple():
    t = average_rank([_result("A", "d", 0.9), _result("B", "d", 0.8), _result("C", "d", 0.7)])
    assert t.ranks["d"] == {"A": 1.0, "B": 2.0, "C": 3.0}


def test_rank_tie_at_top():
    t = average_rank([_result("A", "d", 0.9), _result("B", "d", 0.9), _result("C", "d", 0.7)])
    assert t.ranks["d"]["A"] == t.ranks["d"]["B"] == 1.5


def test_rank_single_cell():
    t = average_rank([_result("A", "d", 0.5)])
    assert t.ranks == {"d": {"A": 1.0}} and t.average == {"A": 1.0}


def test_rank_runtime_ascending():
    t = average_rank([_result("A", "d", 0.9, 5.0), _result("B", "d", 0.8, 1.0)], metric="wall_seconds")
    assert t.ranks["d"] == {"A": 2.0, "B": 1.0}


def test_rank_missing_cell():
    with pytest.raises(ValueError):
        average_rank([_result("A", "d1", 0.9), _result("B", "d1", 0.8), _result("A", "d2", 0.9)])
    with pytest.raises(ValueError):
        average_rank([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(0, 5), min_size=4, max_size=4), min_size=1, max_size=5))
def test_rank_properties(table):
    algos = ["a", "b", "c", "d"]
    results = [_result(a, f"ds{i}", v / 5) for i, row in enumerate(table) for a, v in zip(algos, row)]
    t = average_rank(results)
    for ds in t.datasets:
        r = t.ranks[ds]
        assert sum(r.values()) == pytest.approx(len(algos) * (len(algos) + 1) / 2)
        vals = t.values[ds]
        for a in algos:
            better = sum(vals[b] > vals[a] for b in algos)
            tied = sum(vals[b] == vals[a] for b in algos)
            assert r[a] == pytest.approx(better + (tied + 1) / 2)


def test_identical_accuracies_share_rank():
    results = [_result(a, ds, 0.7) for ds in ("x", "y") for a in ("p", "q", "r")]
    t = average_rank(results)
    assert set(t.average.values()) == {2.0}


# -- sweeps --------------------------------------------------------------------


def test_sweep_one_run_per_value_rest_fixed():
    s = generate_stream(StreamSpec(total_instances=600, seed=4))
    rs = sensitivity_sweep(AlgorithmConfig("scargc", {"pool_size": 50}, seed=3), s, "k", [2, 3, 4])
    assert [r.params["k"] for r in rs] == [2, 3, 4]
    assert all(r.params["pool_size"] == 50 and r.seed == 3 for r in rs)


def test_sweep_alias_and_wrong_param():
    s = generate_stream(StreamSpec(total_instances=300, seed=4))
    rs = sensitivity_sweep(AlgorithmConfig("level-iw"), s, "σ", [0.5, 1.0])
    assert [r.params["sigma"] for r in rs] == [0.5, 1.0]
    with pytest.raises(ConfigError):
        sensitivity_sweep(AlgorithmConfig("mclassification"), s, "k", [1])
