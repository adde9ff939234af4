"""Per-sample loss models used by the coupled-run simulator.

A loss model exposes index-aware gradients so a simulation can run two
models that differ in exactly one sample while sharing the index
sequence.  The logistic model is the experiment workhorse; the quadratic
model gives exact sector members for contraction checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .optimizers import SectorBounds

__all__ = [
    "sigmoid",
    "reg_logistic_grad",
    "reg_logistic_loss",
    "LogisticTask",
    "QuadraticTask",
    "random_sector_quadratics",
]


def sigmoid(z: float) -> float:
    """Numerically stable scalar logistic function."""
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    ez = np.exp(z)
    return ez / (1.0 + ez)


def reg_logistic_grad(
    w: np.ndarray, x: np.ndarray, y: float, lam: float
) -> tuple[float, np.ndarray]:
    """Loss and gradient of log(1 + exp(-y w.x)) + lam/2 ||w||^2.

    Overflow-safe at any margin: logaddexp handles the loss and the
    sigmoid saturates cleanly, so for strongly positive margins the data
    terms vanish and only the regularizer remains.
    """
    m = y * np.dot(w, x)
    loss = float(np.logaddexp(0.0, -m) + 0.5 * lam * np.dot(w, w))
    return loss, -y * sigmoid(-m) * x + lam * w


def reg_logistic_loss(w: np.ndarray, x: np.ndarray, y: float, lam: float) -> float:
    """Regularized logistic loss at one sample, overflow-safe."""
    m = y * np.dot(w, x)
    return float(np.logaddexp(0.0, -m) + 0.5 * lam * np.dot(w, w))


@dataclass
class LogisticTask:
    """Regularized logistic regression over a fixed sample matrix."""

    x: np.ndarray
    y: np.ndarray
    lam: float

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def grad(self, w: np.ndarray, i: int) -> np.ndarray:
        return reg_logistic_grad(w, self.x[i], self.y[i], self.lam)[1]

    def loss(self, w: np.ndarray, i: int) -> float:
        return reg_logistic_loss(w, self.x[i], self.y[i], self.lam)

    def losses_at(self, w: np.ndarray, probe_x: np.ndarray, probe_y: np.ndarray) -> np.ndarray:
        """Vector of regularized losses over a probe set."""
        margins = probe_y * (probe_x @ w)
        return np.logaddexp(0.0, -margins) + 0.5 * self.lam * float(np.dot(w, w))

    def replaced(self, j: int, x_new: np.ndarray, y_new: float) -> "LogisticTask":
        x = self.x.copy()
        y = self.y.copy()
        x[j] = x_new
        y[j] = y_new
        return LogisticTask(x=x, y=y, lam=self.lam)


@dataclass
class QuadraticTask:
    """Per-sample quadratics l_i(w) = 1/2 (w - c_i)^T H_i (w - c_i)."""

    hessians: np.ndarray
    centers: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def grad(self, w: np.ndarray, i: int) -> np.ndarray:
        return self.hessians[i] @ (w - self.centers[i])

    def loss(self, w: np.ndarray, i: int) -> float:
        r = w - self.centers[i]
        return 0.5 * float(r @ self.hessians[i] @ r)

    def losses_at(self, w, probe_x, probe_y):
        raise NotImplementedError("quadratic tasks carry no probe losses")

    def replaced(self, j: int, hessian: np.ndarray, center: np.ndarray) -> "QuadraticTask":
        h = self.hessians.copy()
        c = self.centers.copy()
        h[j] = hessian
        c[j] = center
        return QuadraticTask(hessians=h, centers=c)


def random_sector_quadratics(
    n: int, dim: int, bounds: SectorBounds, rng: np.random.Generator,
    center_scale: float = 1.0,
) -> QuadraticTask:
    """Draw a task of quadratics whose Hessian spectra lie in the sector."""
    hs = np.zeros((n, dim, dim))
    cs = center_scale * rng.normal(size=(n, dim))
    for i in range(n):
        q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        lam = rng.uniform(bounds.gamma, bounds.beta, size=dim)
        hs[i] = (q * lam) @ q.T
    return QuadraticTask(hessians=hs, centers=cs)
