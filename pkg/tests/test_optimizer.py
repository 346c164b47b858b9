import logging
import time

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.spatial.distance import pdist

from labelmap.errors import (
    InvalidConfig, InvalidLambda, InvalidSchedule, NonFiniteUpdate, SizeMismatch
)
from labelmap.ingest.synthetic import overlapping_gaussians, planted_plane
from labelmap.mapping.geometry import DissimilarityMatrix, Embedding, co_membership, pairwise_stats
from labelmap.mapping.metrics import (
    configuration_diameter, evaluate_map, procrustes_align, tear_between_fraction
)
from labelmap.mapping.optimizer import (
    EpochRecord, InitMethod, OptimizerConfig, RunTrace, StressOptimizer, anneal_state,
    classical_mds, initialize, run
)
from labelmap.mapping.stress import StressMode, StressModel
from labelmap.mapping.weighting import WeightFunction


def _stats_2_1():
    return (2.0, 1.0)


def test_config_validation():
    with pytest.raises(InvalidSchedule):
        OptimizerConfig(epochs=0)
    with pytest.raises(InvalidLambda):
        OptimizerConfig(lambda_start=1.5)
    with pytest.raises(InvalidConfig):
        OptimizerConfig(learning_rate_start=0.0)
    with pytest.raises(InvalidConfig):
        OptimizerConfig(p=-1.0)
    with pytest.raises(InvalidConfig):
        OptimizerConfig(workers=0)
    with pytest.raises(ValueError):
        OptimizerConfig(mode='isomap')


def test_config_coerces_enums():
    config = OptimizerConfig(init='random', mode='cca')
    assert config.init is InitMethod.RANDOM_GAUSSIAN
    assert config.mode is StressMode.CCA


def test_anneal_state_endpoints():
    config = OptimizerConfig(epochs=200)
    first = anneal_state(0, config, _stats_2_1())
    assert first.lam == 0.9
    assert first.mu == pytest.approx(1.8)
    assert first.sigma == pytest.approx(1.8)

    last = anneal_state(config.epochs, config, _stats_2_1())
    assert last.lam == 0.1
    assert last.mu == pytest.approx(0.2)
    assert last.sigma == pytest.approx(0.2)
    assert anneal_state(config.epochs - 1, config, _stats_2_1()) == last


def test_anneal_state_constant_schedule():
    config = OptimizerConfig(epochs=10, lambda_start=0.4, lambda_end=0.4)
    states = {anneal_state(epoch, config, _stats_2_1()) for epoch in range(11)}
    assert len(states) == 1


def test_anneal_state_rejects_out_of_range_epoch():
    config = OptimizerConfig(epochs=5)
    with pytest.raises(InvalidSchedule):
        anneal_state(6, config, _stats_2_1())
    with pytest.raises(InvalidSchedule):
        anneal_state(-1, config, _stats_2_1())


def test_classical_mds_collinear_points():
    points = np.array([[0.0, 0.0], [1.0, 1.0], [3.0, 3.0]])
    d = DissimilarityMatrix.from_points(points)
    coords = classical_mds(d)
    mean, _ = pairwise_stats(d)
    assert np.all(np.abs(coords[:, 1]) <= 1e-9 * mean)
    assert np.allclose(pdist(coords), pdist(points))


def test_classical_mds_equilateral_triangle():
    d = DissimilarityMatrix(np.ones((3, 3)) - np.eye(3))
    coords = classical_mds(d)
    assert np.all(np.abs(pdist(coords) - 1.0) <= 1e-9)


def test_classical_mds_triangle_violation_is_one_dimensional():
    d = DissimilarityMatrix([[0.0, 1.0, 10.0], [1.0, 0.0, 1.0], [10.0, 1.0, 0.0]])
    coords = classical_mds(d)
    assert coords is not None
    assert np.all(coords[:, 1] == 0.0)


def test_classical_mds_without_positive_eigenvalues_falls_back(caplog):
    d = DissimilarityMatrix(np.zeros((4, 4)))
    assert classical_mds(d) is None
    with caplog.at_level(logging.WARNING):
        embedding = initialize(d, OptimizerConfig(init='mds', seed=3))
    assert np.all(np.isfinite(embedding.y))
    assert 'falling back' in caplog.text


def test_initialize_deterministic():
    d = DissimilarityMatrix.from_points(np.random.default_rng(0).normal(size=(10, 4)))
    for init in InitMethod:
        config = OptimizerConfig(init=init, seed=11)
        assert np.array_equal(initialize(d, config).y, initialize(d, config).y)


def test_random_init_scale():
    d = DissimilarityMatrix.from_points(np.random.default_rng(0).normal(size=(200, 3)))
    mean, _ = pairwise_stats(d)
    y = initialize(d, OptimizerConfig(init='random', seed=5)).y
    assert y.std() == pytest.approx(0.1 * mean, rel=0.15)


def test_run_rejects_label_mismatch(plane_instance):
    d, _, labels, _ = plane_instance
    with pytest.raises(SizeMismatch):
        StressOptimizer(d, labels[:-1], OptimizerConfig(epochs=1))


def test_single_epoch_run(plane_instance):
    d, _, labels, _ = plane_instance
    embedding, trace = run(d, labels, OptimizerConfig(epochs=1, init='random'))
    assert np.all(np.isfinite(embedding.y))
    assert len(trace.records) == 1
    assert trace.records[0].lam == 0.9


def test_schedule_endpoints_in_trace(plane_instance):
    d, _, labels, _ = plane_instance
    config = OptimizerConfig(epochs=200, steps_per_epoch=2)
    _, trace = run(d, labels, config)
    assert len(trace.records) == 200
    assert [r.epoch for r in trace.records] == list(range(200))
    assert abs(trace.records[0].lam - 0.9) <= 1e-12
    assert abs(trace.records[-1].lam - 0.1) <= 1e-12
    rates = [r.learning_rate for r in trace.records]
    mean, _ = pairwise_stats(d)
    assert rates[0] == pytest.approx(0.5 * mean)
    assert rates[-1] == pytest.approx(0.01 * mean)
    assert all(a > b for a, b in zip(rates, rates[1:]))


def test_run_is_deterministic():
    rng = np.random.default_rng(9)
    d = DissimilarityMatrix.from_points(rng.normal(size=(25, 4)))
    labels = rng.integers(0, 3, size=25).tolist()
    config = OptimizerConfig(epochs=20, init='random', seed=42, workers=2)
    e1, t1 = run(d, labels, config)
    e2, t2 = run(d, labels, config)
    assert np.array_equal(e1.y, e2.y)
    assert t1.records == t2.records
    assert t1.to_text() == t2.to_text()


def test_returned_embedding_never_worse_than_initialization():
    rng = np.random.default_rng(4)
    d = DissimilarityMatrix.from_points(rng.normal(size=(20, 5)))
    labels = ['a'] * 10 + ['b'] * 10
    for mode in StressMode:
        config = OptimizerConfig(epochs=30, mode=mode, seed=1)
        embedding, trace = run(d, labels, config)
        model = StressModel(d, co_membership(labels), mode)
        final_params = anneal_state(config.epochs, config, pairwise_stats(d))
        assert model.total(embedding, final_params) == pytest.approx(trace.best_selection_stress, rel=1e-12)
        assert trace.best_selection_stress <= trace.initial_selection_stress


def test_random_start_reduces_stress():
    rng = np.random.default_rng(6)
    d = DissimilarityMatrix.from_points(rng.normal(size=(20, 3)))
    labels = ['a'] * 10 + ['b'] * 10
    _, trace = run(d, labels, OptimizerConfig(epochs=60, init='random', seed=2))
    assert trace.best_epoch >= 0
    assert trace.best_selection_stress < 0.5 * trace.initial_selection_stress


def test_non_euclidean_input_maps_to_finite_coordinates():
    d = DissimilarityMatrix([[0.0, 1.0, 10.0], [1.0, 0.0, 1.0], [10.0, 1.0, 0.0]])
    embedding, trace = run(d, ['a', 'b', 'a'], OptimizerConfig(epochs=20))
    assert np.all(np.isfinite(embedding.y))
    assert len(trace.records) == 20


def test_non_finite_update_aborts_with_trace():
    exploding = WeightFunction(
        value=lambda x, params: np.full(np.shape(x), np.inf),
        derivative=lambda x, params: np.zeros(np.shape(x)),
    )
    rng = np.random.default_rng(8)
    d = DissimilarityMatrix.from_points(rng.normal(size=(6, 2)))
    optimizer = StressOptimizer(d, ['a'] * 6, OptimizerConfig(epochs=3, init='random'), exploding)
    with pytest.raises(NonFiniteUpdate) as excinfo:
        optimizer.run()
    assert isinstance(excinfo.value.trace, RunTrace)


def test_trace_text_round_trip():
    trace = RunTrace(records=[EpochRecord(0, 0.9, 0.5, 12.25), EpochRecord(1, 0.1, 0.01, 3.5)],
                     best_epoch=1)
    text = trace.to_text({'method': 'classimap', 'seed': 7})
    assert text.startswith('# method=classimap\n# seed=7\n# best_epoch=1\n')
    assert '# epoch\tlambda\tlearning_rate\ttotal_stress\n' in text
    parsed = RunTrace.from_text(text)
    assert parsed.records == trace.records
    assert parsed.best_epoch == 1


def _plane_run(seed):
    dataset = planted_plane(100, 8, seed=seed)
    d = DissimilarityMatrix.from_points(dataset.points)
    started = time.perf_counter()
    embedding, trace = run(d, ['plane'] * d.n, OptimizerConfig(seed=seed, init='random'))
    elapsed = time.perf_counter() - started
    _, rms = procrustes_align(dataset.plane, embedding.y)
    return trace, rms / configuration_diameter(dataset.plane), elapsed


def test_planted_plane_recovery_from_random_start():
    trace, relative_rms, elapsed = _plane_run(0)
    assert elapsed <= 30
    assert trace.best_epoch >= 0
    assert trace.best_selection_stress <= 0.01 * trace.initial_selection_stress
    assert relative_rms <= 0.05


@pytest.mark.slow
def test_planted_plane_recovery_over_seeds():
    recovered = 0
    for seed in range(10):
        trace, relative_rms, elapsed = _plane_run(seed)
        assert elapsed <= 30
        recovered += (trace.best_epoch >= 0
                      and trace.best_selection_stress <= 0.01 * trace.initial_selection_stress
                      and relative_rms <= 0.05)
    assert recovered >= 9


def _dense_descent_oracle(model, params, n, rng, restarts=50):
    def objective(flat):
        e = Embedding(flat.reshape(n, 2))
        return model.total(e, params), model.gradient(e, params).ravel()

    best = np.inf
    for _ in range(restarts):
        start = rng.normal(size=2 * n)
        result = minimize(objective, start, jac=True, method='L-BFGS-B',
                          options={'maxiter': 200})
        best = min(best, float(result.fun))
    return best


@pytest.mark.slow
def test_small_instance_near_optimality():
    rng = np.random.default_rng(10)
    for _ in range(10):
        d = DissimilarityMatrix.from_points(rng.normal(size=(4, 3)))
        labels = ['a', 'a', 'b', 'b']
        config = OptimizerConfig(seed=0)
        embedding, _ = run(d, labels, config)

        model = StressModel(d, co_membership(labels), config.mode)
        params = anneal_state(config.epochs, config, pairwise_stats(d))
        oracle = _dense_descent_oracle(model, params, d.n, rng)
        assert model.total(embedding, params) <= 1.1 * oracle + 1e-9 * float(d.d.mean())


@pytest.mark.slow
def test_performance_envelope():
    rng = np.random.default_rng(11)
    d = DissimilarityMatrix.from_points(rng.normal(size=(500, 10)))
    labels = rng.integers(0, 4, size=500).tolist()
    started = time.perf_counter()
    embedding, _ = run(d, labels, OptimizerConfig(workers=4))
    assert time.perf_counter() - started <= 60
    assert np.all(np.isfinite(embedding.y))


def test_weight_function_is_pluggable(plane_instance):
    d, _, labels, _ = plane_instance
    flat = WeightFunction(value=lambda x, params: np.ones(np.shape(x)),
                          derivative=lambda x, params: np.zeros(np.shape(x)))
    embedding, trace = run(d, labels, OptimizerConfig(epochs=5), flat)
    assert np.all(np.isfinite(embedding.y))


@pytest.mark.slow
def test_classimap_places_more_tears_between_classes_than_sammon():
    dataset = overlapping_gaussians(200, 5, 1.0, seed=0)
    d = DissimilarityMatrix.from_points(dataset.points)
    fractions = {}
    for mode in (StressMode.CLASSIMAP, StressMode.SAMMON):
        embedding, _ = run(d, dataset.labels, OptimizerConfig(seed=0, mode=mode))
        fractions[mode] = tear_between_fraction(evaluate_map(d, embedding, dataset.labels, k=10))
    assert fractions[StressMode.CLASSIMAP] >= fractions[StressMode.SAMMON]
