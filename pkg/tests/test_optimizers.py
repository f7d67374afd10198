import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from support import random_params
from unfis.core import forward, pack
from unfis.data import normalize, split
from unfis.errors import DivergenceError, InvalidParameterError, SolverError
from unfis.gradients import JacobianBatch, build_batch
from unfis.initialization import init_params
from unfis.optimizers import (
    MIN_WIDTH,
    TrainConfig,
    TrainHistory,
    cross_entropy,
    cross_entropy_gradient,
    gqlm_delta,
    gqlm_train,
    lm_delta,
    lm_train,
    momentum_step,
    sgd_step,
    train,
)


def scalar_batch(q, target=1.0, jac=1.0):
    return JacobianBatch(J=np.array([[[jac]]]), xi=np.array([[1.0 / q]]), targets=np.array([[target]]))


@pytest.mark.parametrize("q", [0.2, 0.5, 0.9])
def test_gqlm_scalar_case(q):
    assert gqlm_delta(scalar_batch(q), damping=0.0, eta=1.0)[0] == pytest.approx(1.0 / q)
    assert gqlm_delta(scalar_batch(q), damping=1.0, eta=1.0)[0] == pytest.approx(1.0 / (2.0 * q))


def test_gqlm_zero_targets_give_zero_step():
    rng = np.random.default_rng(0)
    batch = JacobianBatch(J=rng.normal(size=(3, 5, 4)), xi=np.ones((3, 5)), targets=np.zeros((3, 5)))
    np.testing.assert_array_equal(gqlm_delta(batch, 1.0, 1.0), 0.0)


def test_gqlm_damping_enters_once_per_class():
    rng = np.random.default_rng(1)
    J = rng.normal(size=(2, 6, 3))
    batch = JacobianBatch(J=J, xi=rng.uniform(1, 3, size=(2, 6)), targets=rng.integers(0, 2, size=(2, 6)) * 1.0)
    A = sum(J[c].T @ J[c] + 0.7 * np.eye(3) for c in range(2))
    b = sum(J[c].T @ (batch.xi[c] * batch.targets[c]) for c in range(2))
    np.testing.assert_allclose(gqlm_delta(batch, 0.7, 0.5), np.linalg.solve(A, b) / 0.5, rtol=1e-10)


def test_gqlm_masked_columns_stay_zero():
    rng = np.random.default_rng(2)
    batch = JacobianBatch(J=rng.normal(size=(2, 4, 5)), xi=np.ones((2, 4)), targets=np.ones((2, 4)))
    mask = np.array([True, False, True, True, False])
    d = gqlm_delta(batch, 1.0, 1.0, mask)
    assert d[1] == 0 and d[4] == 0 and np.all(d[mask] != 0)


def test_singular_system_raises():
    batch = JacobianBatch(J=np.array([[[1.0, 1.0], [1.0, 1.0]]]), xi=np.ones((1, 2)), targets=np.ones((1, 2)))
    with pytest.raises(SolverError):
        gqlm_delta(batch, 0.0, 1.0)
    assert np.all(np.isfinite(gqlm_delta(batch, 1.0, 1.0)))


def test_asymmetric_system_is_rejected():
    from unfis.optimizers import _solve_spd

    with pytest.raises(SolverError):
        _solve_spd(np.array([[2.0, 1.0], [0.0, 2.0]]), np.ones(2))


@settings(max_examples=50)
@given(st.integers(0, 10_000), st.floats(0.1, 10.0), st.floats(1.5, 20.0))
def test_larger_damping_shrinks_the_step(seed, lam, factor):
    rng = np.random.default_rng(seed)
    batch = JacobianBatch(J=rng.normal(size=(2, 5, 4)), xi=rng.uniform(1, 5, size=(2, 5)),
                          targets=np.eye(2)[rng.integers(0, 2, size=5)].T)
    small = np.linalg.norm(gqlm_delta(batch, lam * factor, 1.0))
    large = np.linalg.norm(gqlm_delta(batch, lam, 1.0))
    assert small <= large * (1 + 1e-12)


def test_infinite_damping_collapses_the_step():
    rng = np.random.default_rng(3)
    batch = JacobianBatch(J=rng.normal(size=(2, 5, 4)), xi=np.ones((2, 5)), targets=np.ones((2, 5)))
    assert np.linalg.norm(gqlm_delta(batch, 1e12, 1.0)) < 1e-10
    assert np.linalg.norm(lm_delta(batch.J, np.ones((2, 5)), 1e12)) < 1e-10


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_gqlm_step_is_a_descent_direction(seed):
    rng = np.random.default_rng(seed)
    params = random_params(rng, 2, 3, 3)
    X = rng.normal(size=(8, 3))
    Y = np.eye(3)[rng.integers(0, 3, size=8)]
    batch, _ = build_batch(params, X, Y)
    step = gqlm_delta(batch, 10.0, 1.0)
    assert step @ cross_entropy_gradient(batch) <= 1e-15


def test_lm_scalar_case():
    d = lm_delta(np.array([[[1.0]]]), np.array([[0.5]]), damping=1.0)
    assert d[0] == pytest.approx(0.25)


def test_lm_zero_residuals():
    rng = np.random.default_rng(4)
    np.testing.assert_array_equal(lm_delta(rng.normal(size=(2, 3, 4)), np.zeros((2, 3)), 1.0), 0.0)


def test_lm_matches_normal_equations():
    rng = np.random.default_rng(5)
    J = rng.normal(size=(3, 4, 2))
    r = rng.normal(size=(3, 4))
    flat = J.reshape(12, 2)
    expected = np.linalg.solve(flat.T @ flat + 2.0 * np.eye(2), flat.T @ r.ravel())
    np.testing.assert_allclose(lm_delta(J, r, 2.0), expected, rtol=1e-10)


def test_first_order_steps():
    v = np.array([1.0, -2.0])
    np.testing.assert_array_equal(sgd_step(v, np.zeros(2), 0.1), v)
    np.testing.assert_allclose(sgd_step(v, np.array([1.0, 1.0]), 0.1), [0.9, -2.1])
    new, vel = momentum_step(v, np.zeros(2), np.zeros(2), 0.1, 0.9)
    np.testing.assert_array_equal(new, v)
    new, vel = momentum_step(v, np.array([1.0, 0.0]), np.array([0.0, 1.0]), 0.1, 0.5)
    np.testing.assert_allclose(vel, [0.5, 0.1])
    np.testing.assert_allclose(new, [0.5, -2.1])


def test_cross_entropy_gradient_matches_loss():
    rng = np.random.default_rng(6)
    params = random_params(rng, 2, 2, 3)
    X = rng.normal(size=(5, 2))
    Y = np.eye(3)[rng.integers(0, 3, size=5)]
    batch, _ = build_batch(params, X, Y)
    g = cross_entropy_gradient(batch)
    base = pack(params)
    h = 1e-6
    num = np.empty_like(base)
    for k in range(base.size):
        e = np.zeros_like(base)
        e[k] = h
        up = cross_entropy(forward(params.with_vector(base + e), X).p, Y) * len(X)
        down = cross_entropy(forward(params.with_vector(base - e), X).p, Y) * len(X)
        num[k] = (up - down) / (2 * h)
    np.testing.assert_allclose(g, num, atol=1e-6)


@pytest.fixture(scope="module")
def iris_task(dataset):
    train_view, test_view = split(dataset("iris"))
    train_view, test_view, _ = normalize(train_view, test_view)
    return train_view, test_view


def fresh(task, selection=True):
    params, _ = init_params(task[0].X, task[0].Y, 2, seed=0, selection=selection)
    return params


def test_zero_iterations_return_initial_params(iris_task):
    params = fresh(iris_task)
    out, history = train(iris_task[0].X, iris_task[0].Y, TrainConfig(iterations=0), params)
    assert np.array_equal(pack(out), pack(params))
    assert len(history) == 0


def test_zero_momentum_applies_raw_steps(iris_task):
    params = fresh(iris_task)
    X, Y = iris_task[0].X, iris_task[0].Y
    order = np.random.default_rng(0).permutation(len(X))
    expected = params
    for start in range(0, len(X), 32):
        idx = order[start:start + 32]
        batch, _ = build_batch(expected, X[idx], Y[idx])
        expected = expected.with_vector(pack(expected) + gqlm_delta(batch, 1e3, 1e-3))
    out, _ = train(X, Y, TrainConfig(iterations=1, beta=0.0), params)
    np.testing.assert_allclose(pack(out), pack(expected), rtol=0, atol=1e-12)


@pytest.mark.parametrize("optimizer", ["gqlm", "lm", "sgd", "momentum"])
def test_training_is_deterministic(iris_task, optimizer):
    cfg = TrainConfig(iterations=3, optimizer=optimizer, seed=4)
    a, ha = train(iris_task[0].X, iris_task[0].Y, cfg, fresh(iris_task))
    b, hb = train(iris_task[0].X, iris_task[0].Y, cfg, fresh(iris_task))
    assert np.array_equal(pack(a), pack(b))
    assert ha.loss == hb.loss and ha.optimizer == optimizer


def test_gqlm_reduces_training_loss(iris_task):
    params = fresh(iris_task)
    X, Y = iris_task[0].X, iris_task[0].Y
    start = cross_entropy(forward(params, X).p, Y)
    out, history = gqlm_train(X, Y, TrainConfig(iterations=20), params, X_test=iris_task[1].X, Y_test=iris_task[1].Y)
    assert history.loss[-1] < start
    assert len(history.test_accuracy) == 20
    assert history.train_accuracy[-1] > 80


def test_fnn_training_leaves_logits_alone(iris_task):
    params = fresh(iris_task, selection=False)
    out, _ = train(iris_task[0].X, iris_task[0].Y, TrainConfig(iterations=2, selection=False), params)
    assert np.array_equal(out.logits, params.logits)
    assert not np.array_equal(out.centers, params.centers)


def test_lm_train_records_name(iris_task):
    _, history = lm_train(iris_task[0].X, iris_task[0].Y, TrainConfig(iterations=1), fresh(iris_task))
    assert history.optimizer == "lm"


def test_widths_stay_positive(iris_task):
    cfg = TrainConfig(iterations=5, optimizer="sgd", learning_rate=5.0)
    try:
        out, _ = train(iris_task[0].X, iris_task[0].Y, cfg, fresh(iris_task))
    except DivergenceError:
        return
    assert np.all(out.widths >= MIN_WIDTH)


def test_divergence_is_reported_with_iteration(iris_task):
    cfg = TrainConfig(iterations=5, optimizer="sgd", learning_rate=1e300)
    with np.errstate(all="ignore"), pytest.raises(DivergenceError) as info:
        train(iris_task[0].X, iris_task[0].Y, cfg, fresh(iris_task))
    assert info.value.iteration == 1


def test_callback_sees_each_iteration(iris_task):
    seen = []
    train(iris_task[0].X, iris_task[0].Y, TrainConfig(iterations=3), fresh(iris_task),
          callback=lambda it, p, h: seen.append((it, len(h))))
    assert seen == [(1, 1), (2, 2), (3, 3)]


@pytest.mark.parametrize("field,value", [
    ("batch_size", 0), ("damping", -1.0), ("eta", 0.0), ("beta", 1.0),
    ("iterations", -1), ("rules", 0), ("optimizer", "adam"), ("learning_rate", 0.0),
])
def test_config_validation(field, value):
    with pytest.raises(InvalidParameterError):
        TrainConfig(**{field: value})


def test_config_defaults_follow_the_reference_table():
    cfg = TrainConfig()
    assert (cfg.batch_size, cfg.damping, cfg.eta, cfg.beta, cfg.iterations, cfg.rules) == (32, 1e3, 1e-3, 0.9, 100, 2)


def test_history_csv(tmp_path):
    h = TrainHistory("gqlm", loss=[0.5, 0.25], train_accuracy=[80.0, 90.0], seconds=[0.1, 0.2])
    h.write_csv(tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "iteration,optimizer,loss,train_acc,test_acc,seconds"
    assert lines[2].startswith("2,gqlm,0.25,90.0,,")
