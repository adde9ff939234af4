"""First-order optimizer models and their feedback-system forms.

Covers plain SGD, heavy ball, Nesterov acceleration in its standard
(eta, mu) form, and the smooth-quadratic Nesterov variant whose momentum
weight theta is pinned by the condition number.  Each method is also
exposed as a linear system in feedback with the gradient, which is what
the Lyapunov and IQC certification layers consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "SectorBounds",
    "Sgd",
    "HeavyBall",
    "NagStandard",
    "NagSmoothQuadratic",
    "OptimizerSpec",
    "OptimizerState",
    "LureSystem",
    "theta_of",
    "sgd_step",
    "heavy_ball_step",
    "nag_step",
    "nag_sq_step",
    "a_alpha",
    "lure_of",
    "verify_gradient_difference",
]

GradFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SectorBounds:
    """Curvature interval [gamma, beta] for the gradient nonlinearity.

    gamma is the strong-convexity modulus, beta the smoothness constant.
    grad_bound optionally carries a gradient-norm bound G for the loss
    class; the certification machinery never needs it, only the
    closed-form stability bounds do.
    """

    gamma: float
    beta: float
    grad_bound: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma <= self.beta):
            raise ValueError(
                f"need 0 < gamma <= beta, got gamma={self.gamma}, beta={self.beta}"
            )
        if self.grad_bound is not None and self.grad_bound <= 0.0:
            raise ValueError(f"gradient bound must be positive, got {self.grad_bound}")

    @property
    def kappa(self) -> float:
        return self.beta / self.gamma


@dataclass(frozen=True)
class Sgd:
    """Plain stochastic gradient descent with step size eta."""

    eta: float

    def __post_init__(self) -> None:
        if self.eta <= 0.0:
            raise ValueError(f"step size must be positive, got {self.eta}")


@dataclass(frozen=True)
class HeavyBall:
    """Polyak momentum: w+ = w - eta*grad(w) + mu*(w - w_prev)."""

    eta: float
    mu: float

    def __post_init__(self) -> None:
        if self.eta <= 0.0:
            raise ValueError(f"step size must be positive, got {self.eta}")
        if not (0.0 <= self.mu < 1.0):
            raise ValueError(f"momentum must lie in [0, 1), got {self.mu}")


@dataclass(frozen=True)
class NagStandard:
    """Nesterov acceleration with lookahead gradient.

    v+ = mu*v - eta*grad(w + mu*v); w+ = w + v+.
    """

    eta: float
    mu: float

    def __post_init__(self) -> None:
        if self.eta <= 0.0:
            raise ValueError(f"step size must be positive, got {self.eta}")
        if not (0.0 <= self.mu < 1.0):
            raise ValueError(f"momentum must lie in [0, 1), got {self.mu}")


@dataclass(frozen=True)
class NagSmoothQuadratic:
    """Nesterov tuned for a [gamma, beta] sector.

    The step is 1/beta and the momentum weight is
    theta = (sqrt(kappa) - 1)/(sqrt(kappa) + 1):

        v+ = w - (1/beta) * grad(w)
        w+ = (1 + theta) * v+ - theta * v
    """

    bounds: SectorBounds

    @property
    def theta(self) -> float:
        return theta_of(self.bounds.kappa)


OptimizerSpec = Union[Sgd, HeavyBall, NagStandard, NagSmoothQuadratic]


@dataclass
class OptimizerState:
    """Mutable iterate pair; v doubles as momentum or auxiliary sequence."""

    w: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "OptimizerState":
        return cls(w=np.zeros(dim), v=np.zeros(dim), t=0)


@dataclass(frozen=True)
class LureSystem:
    """Linear system x+ = A x + B u, y = C x + D u in feedback with a gradient."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def state_dim(self) -> int:
        return self.a.shape[0]

    @property
    def input_dim(self) -> int:
        return self.b.shape[1]


def theta_of(kappa: float) -> float:
    """Momentum weight (sqrt(kappa) - 1)/(sqrt(kappa) + 1).

    Zero at kappa = 1, strictly increasing, approaches 1 from below.

    Raises:
        ValueError: if kappa < 1.
    """
    if kappa < 1.0:
        raise ValueError(f"condition number must be >= 1, got {kappa}")
    rt = np.sqrt(kappa)
    return float((rt - 1.0) / (rt + 1.0))


def sgd_step(state: OptimizerState, grad: np.ndarray, eta: float) -> OptimizerState:
    """One gradient step w+ = w - eta*grad; v is carried unchanged.

    grad is the gradient already evaluated at state.w.
    """
    w = state.w - eta * np.asarray(grad, dtype=float)
    return OptimizerState(w=w, v=state.v.copy(), t=state.t + 1)


def heavy_ball_step(
    state: OptimizerState, grad: np.ndarray, eta: float, mu: float
) -> OptimizerState:
    """Polyak momentum step; state.v holds the previous iterate.

    grad is the gradient already evaluated at state.w.
    """
    w = state.w - eta * np.asarray(grad, dtype=float) + mu * (state.w - state.v)
    return OptimizerState(w=w, v=state.w.copy(), t=state.t + 1)


def nag_step(state: OptimizerState, grad_at: GradFn, eta: float, mu: float) -> OptimizerState:
    """Standard Nesterov step; grad_at is called at the lookahead w + mu*v."""
    v = mu * state.v - eta * grad_at(state.w + mu * state.v)
    return OptimizerState(w=state.w + v, v=v, t=state.t + 1)


def nag_sq_step(
    state: OptimizerState, grad: np.ndarray, bounds: SectorBounds
) -> OptimizerState:
    """Sector-tuned Nesterov step; state.v is the auxiliary sequence.

    grad is the gradient already evaluated at state.w; the step size is
    1/beta and theta follows from the sector's condition number.
    """
    theta = theta_of(bounds.kappa)
    v_next = state.w - np.asarray(grad, dtype=float) / bounds.beta
    w_next = (1.0 + theta) * v_next - theta * state.v
    return OptimizerState(w=w_next, v=v_next, t=state.t + 1)


def a_alpha(theta: float, alpha: float) -> np.ndarray:
    """Closed-loop difference map for the sector-tuned Nesterov method.

    On a quadratic direction with curvature lam, the coupled difference
    (dw, dv) evolves linearly with alpha = 1 - lam/beta:

        [[(1 + theta)*alpha, -theta],
         [alpha,              0    ]]

    Raises:
        ValueError: if alpha is outside [0, 1].
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return np.array([[(1.0 + theta) * alpha, -theta], [alpha, 0.0]])


def lure_of(spec: OptimizerSpec, bounds: SectorBounds) -> LureSystem:
    """Feedback-form matrices (A, B, C, D) for a supported optimizer.

    The gradient enters as u = grad(y) with y = C x + D u.  Supported:
    Sgd, HeavyBall, NagSmoothQuadratic.  The standard (eta, mu) Nesterov
    variant is simulation-only here and raises.

    Raises:
        TypeError: for unsupported optimizer variants.
    """
    if isinstance(spec, Sgd):
        return LureSystem(
            a=np.array([[1.0]]),
            b=np.array([[-spec.eta]]),
            c=np.array([[1.0]]),
            d=np.array([[0.0]]),
        )
    if isinstance(spec, HeavyBall):
        # State (w_t, w_{t-1}); u = grad(w_t).
        return LureSystem(
            a=np.array([[1.0 + spec.mu, -spec.mu], [1.0, 0.0]]),
            b=np.array([[-spec.eta], [0.0]]),
            c=np.array([[1.0, 0.0]]),
            d=np.array([[0.0]]),
        )
    if isinstance(spec, NagSmoothQuadratic):
        # State (v_t, v_{t-1}); the query point is w_t = (1+theta) v_t - theta v_{t-1},
        # so y = C x recovers w and v+ = w - grad(w)/beta drives the first coordinate.
        theta = spec.theta
        beta = spec.bounds.beta
        return LureSystem(
            a=np.array([[1.0 + theta, -theta], [1.0, 0.0]]),
            b=np.array([[-1.0 / beta], [0.0]]),
            c=np.array([[1.0 + theta, -theta]]),
            d=np.array([[0.0]]),
        )
    raise TypeError(f"no feedback form for optimizer {type(spec).__name__}")


def verify_gradient_difference(
    bounds: SectorBounds,
    trials: int = 200,
    dim: int = 6,
    seed: int = 0,
) -> dict:
    """Sample random sector quadratics and check the smoothness inequality.

    Draws Hessians with eigenvalues in [gamma, beta] and random point
    pairs, then verifies ||grad(w) - grad(w')|| <= beta * ||w - w'||.

    Returns:
        dict with max_ratio (worst observed Lipschitz ratio), trials,
        and ok (max_ratio <= 1 up to roundoff).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        lam = rng.uniform(bounds.gamma, bounds.beta, size=dim)
        hess = (q * lam) @ q.T
        w = rng.normal(size=dim)
        w2 = rng.normal(size=dim)
        num = float(np.linalg.norm(hess @ (w - w2)))
        den = bounds.beta * float(np.linalg.norm(w - w2))
        if den > 0:
            worst = max(worst, num / den)
    return {"max_ratio": worst, "trials": trials, "ok": worst <= 1.0 + 1e-12}
