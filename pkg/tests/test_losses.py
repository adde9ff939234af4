import numpy as np
import pytest

from stabcert.losses import (
    LogisticTask,
    QuadraticTask,
    random_sector_quadratics,
    reg_logistic_grad,
    reg_logistic_loss,
    sigmoid,
)
from stabcert.optimizers import SectorBounds


def test_sigmoid_stability_and_values():
    assert sigmoid(0.0) == pytest.approx(0.5)
    assert sigmoid(800.0) == pytest.approx(1.0)
    assert sigmoid(-800.0) == pytest.approx(0.0)  # no overflow
    assert sigmoid(2.0) + sigmoid(-2.0) == pytest.approx(1.0, abs=1e-15)


def _central_diff(f, w, h=1e-6):
    g = np.zeros_like(w)
    for k in range(w.size):
        e = np.zeros_like(w)
        e[k] = h
        g[k] = (f(w + e) - f(w - e)) / (2.0 * h)
    return g


def test_logistic_grad_matches_finite_differences():
    rng = np.random.default_rng(3)
    for _ in range(20):
        dim = int(rng.integers(1, 6))
        w = rng.normal(size=dim)
        x = rng.normal(size=dim)
        y = 1.0 if rng.random() < 0.5 else -1.0
        lam = float(rng.uniform(1e-4, 0.1))
        loss, grad = reg_logistic_grad(w, x, y, lam)
        assert loss == pytest.approx(reg_logistic_loss(w, x, y, lam), rel=1e-12)
        want = _central_diff(lambda v: reg_logistic_loss(v, x, y, lam), w)
        np.testing.assert_allclose(grad, want, atol=1e-6)


def test_logistic_loss_overflow_safe():
    w = np.array([1000.0])
    x = np.array([1.0])
    val = reg_logistic_loss(w, x, -1.0, 0.0)
    assert np.isfinite(val) and val == pytest.approx(1000.0, rel=1e-9)


def test_logistic_task_accessors():
    x = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    y = np.array([1.0, -1.0, 1.0])
    task = LogisticTask(x=x, y=y, lam=0.01)
    assert task.n_samples == 3 and task.dim == 2
    w = np.array([0.3, -0.2])
    np.testing.assert_allclose(
        task.grad(w, 1), reg_logistic_grad(w, x[1], y[1], 0.01)[1]
    )
    assert task.loss(w, 2) == pytest.approx(reg_logistic_loss(w, x[2], y[2], 0.01))
    probes = task.losses_at(w, x, y)
    assert probes.shape == (3,)
    assert probes[0] == pytest.approx(task.loss(w, 0))


def test_logistic_replaced_touches_one_record():
    task = LogisticTask(
        x=np.ones((4, 2)), y=np.array([1.0, 1.0, -1.0, -1.0]), lam=0.1
    )
    other = task.replaced(2, np.array([5.0, 5.0]), 1.0)
    assert other.y[2] == 1.0
    np.testing.assert_array_equal(other.x[2], [5.0, 5.0])
    mask = np.arange(4) != 2
    np.testing.assert_array_equal(other.x[mask], task.x[mask])
    np.testing.assert_array_equal(other.y[mask], task.y[mask])
    # original untouched
    assert task.y[2] == -1.0


def test_quadratic_task_grad_and_loss():
    h = np.stack([np.diag([1.0, 2.0]), np.diag([0.5, 0.5])])
    c = np.array([[1.0, 0.0], [0.0, -1.0]])
    task = QuadraticTask(hessians=h, centers=c)
    assert task.n_samples == 2 and task.dim == 2
    w = np.array([2.0, 2.0])
    np.testing.assert_allclose(task.grad(w, 0), [1.0, 4.0])
    assert task.loss(w, 0) == pytest.approx(0.5 * (1.0 + 2.0 * 4.0))
    # gradient is the derivative of the loss
    got = task.grad(w, 1)
    want = _central_diff(lambda v: task.loss(v, 1), w)
    np.testing.assert_allclose(got, want, atol=1e-6)
    with pytest.raises(NotImplementedError):
        task.losses_at(w, None, None)


def test_quadratic_replaced():
    rng = np.random.default_rng(0)
    task = random_sector_quadratics(3, 2, SectorBounds(0.5, 1.0), rng)
    other = task.replaced(1, np.eye(2), np.zeros(2))
    np.testing.assert_array_equal(other.hessians[1], np.eye(2))
    np.testing.assert_array_equal(other.centers[1], np.zeros(2))
    np.testing.assert_array_equal(other.hessians[0], task.hessians[0])


def test_random_sector_quadratics_spectra():
    sb = SectorBounds(0.2, 0.9)
    task = random_sector_quadratics(20, 5, sb, np.random.default_rng(8))
    assert task.hessians.shape == (20, 5, 5)
    for h in task.hessians:
        np.testing.assert_allclose(h, h.T, atol=1e-12)
        vals = np.linalg.eigvalsh(h)
        assert vals[0] >= sb.gamma - 1e-10
        assert vals[-1] <= sb.beta + 1e-10
