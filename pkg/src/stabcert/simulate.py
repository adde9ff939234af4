"""Coupled-run stability experiments.

Two copies of an optimizer run on datasets differing in one record,
sharing the random index sequence, so the trajectory gap is exactly the
algorithmic-stability quantity.  The experiment drivers below reproduce
the two report figures: mean final parameter gap versus subset size
(expected slope about -1/2 on log-log axes) and gap growth versus
iteration count against the saturating envelope sqrt(1 - (1-rho)^T).

Every random draw comes from a named seed role so runs are reproducible
record-for-record: for master seed M, subset size n, and trial k, the
spawned streams are (M, n, k) for the replaced-record index, (M, n, k, 1)
for the replacement draw, (M, n, k, 2) for the index sequence,
(M, n, k, 3) for the subset draw, and (M, n, k, 4) for held-out probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, effective_sector, make_neighbor, subsample
from .losses import LogisticTask
from .lyapunov import contraction_rate, momentum_rate, sgd_rate
from .optimizers import NagSmoothQuadratic, NagStandard, OptimizerSpec, Sgd

__all__ = [
    "ExperimentConfig",
    "CoupledTrace",
    "StabilityReport",
    "FitResult",
    "VsNResult",
    "VsTResult",
    "coupled_run",
    "empirical_stability",
    "envelope_rate",
    "stability_vs_n",
    "stability_vs_t",
    "fit_loglog_slope",
    "saturating_fit",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Protocol knobs for the coupled-run experiments."""

    optimizer: OptimizerSpec = field(default_factory=lambda: NagStandard(eta=0.01, mu=0.9))
    lambda_reg: float = 1e-3
    horizon: int = 2000
    trials: int = 25
    subset_sizes: tuple = (50, 100, 200, 400)
    checkpoints: tuple = (10, 50, 250, 1250)
    neighbor_mode: str = "resample"
    probes: int = 32
    master_seed: int = 23

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.subset_sizes:
            raise ValueError("need at least one subset size")
        if self.checkpoints and max(self.checkpoints) > self.horizon:
            raise ValueError("checkpoints must not exceed the horizon")
        if self.neighbor_mode not in ("resample", "flip"):
            raise ValueError(f"unknown neighbor mode {self.neighbor_mode!r}")


@dataclass
class CoupledTrace:
    """Record of one coupled run.

    param_diff[t] is ||w - w'|| after step t+1; hits marks steps where
    the replaced index was drawn; loss_gap maps checkpoint step numbers
    to the worst probe-loss difference (empty without probes);
    hit_snapshots holds (t, w, w') taken just before each hit step so
    jump bounds can be audited after the fact.
    """

    param_diff: np.ndarray
    hits: np.ndarray
    loss_gap: dict
    hit_snapshots: list
    max_grad_norm: float

    @property
    def final_param_diff(self) -> float:
        return float(self.param_diff[-1])

    @property
    def final_loss_gap(self) -> float | None:
        step = len(self.param_diff)
        return self.loss_gap.get(step)


def coupled_run(
    task_a,
    task_b,
    j: int,
    optimizer: OptimizerSpec,
    horizon: int,
    index_rng: np.random.Generator,
    checkpoints: tuple = (),
    probe_x: np.ndarray | None = None,
    probe_y: np.ndarray | None = None,
) -> CoupledTrace:
    """Run the optimizer on two tasks coupled through one index stream.

    task_a and task_b must hold the same number of samples and differ
    only at index j.  Both runs start from zero.  The index sequence is
    drawn up front from index_rng, one uniform index per step, and
    shared by the two runs.  Probe losses are evaluated at checkpoint
    steps and at the final step when a probe set is supplied.
    """
    n = task_a.n_samples
    if task_b.n_samples != n:
        raise ValueError("coupled tasks must have equal sample counts")
    if not (0 <= j < n):
        raise ValueError(f"replaced index must lie in [0, {n}), got {j}")
    idx = index_rng.integers(0, n, size=horizon)
    dim = task_a.dim
    w = np.zeros(dim)
    v = np.zeros(dim)
    w2 = np.zeros(dim)
    v2 = np.zeros(dim)

    cps = set(int(c) for c in checkpoints)
    cps.add(horizon)
    param_diff = np.zeros(horizon)
    loss_gap: dict = {}
    snapshots: list = []
    max_grad = 0.0
    with_probes = probe_x is not None and probe_y is not None

    if isinstance(optimizer, NagStandard):
        eta, mu = optimizer.eta, optimizer.mu

        def advance(i: int) -> tuple:
            nonlocal w, v, w2, v2
            g1 = task_a.grad(w + mu * v, i)
            v = mu * v - eta * g1
            w = w + v
            g2 = task_b.grad(w2 + mu * v2, i)
            v2 = mu * v2 - eta * g2
            w2 = w2 + v2
            return g1, g2

    elif isinstance(optimizer, Sgd):
        eta = optimizer.eta

        def advance(i: int) -> tuple:
            nonlocal w, w2
            g1 = task_a.grad(w, i)
            w = w - eta * g1
            g2 = task_b.grad(w2, i)
            w2 = w2 - eta * g2
            return g1, g2

    elif isinstance(optimizer, NagSmoothQuadratic):
        theta = optimizer.theta
        beta = optimizer.bounds.beta

        def advance(i: int) -> tuple:
            nonlocal w, v, w2, v2
            g1 = task_a.grad(w, i)
            v_next = w - g1 / beta
            w = (1.0 + theta) * v_next - theta * v
            v = v_next
            g2 = task_b.grad(w2, i)
            v2_next = w2 - g2 / beta
            w2 = (1.0 + theta) * v2_next - theta * v2
            v2 = v2_next
            return g1, g2

    else:
        raise TypeError(f"unsupported optimizer {type(optimizer).__name__}")

    for t in range(horizon):
        i = int(idx[t])
        if i == j:
            snapshots.append((t, w.copy(), w2.copy()))
        g1, g2 = advance(i)
        max_grad = max(max_grad, float(np.linalg.norm(g1)), float(np.linalg.norm(g2)))
        param_diff[t] = np.linalg.norm(w - w2)
        if with_probes and (t + 1) in cps:
            gaps = np.abs(
                task_a.losses_at(w, probe_x, probe_y) - task_b.losses_at(w2, probe_x, probe_y)
            )
            loss_gap[t + 1] = float(gaps.max())

    return CoupledTrace(
        param_diff=param_diff,
        hits=idx == j,
        loss_gap=loss_gap,
        hit_snapshots=snapshots,
        max_grad_norm=max_grad,
    )


@dataclass(frozen=True)
class StabilityReport:
    """Summary statistics over a batch of coupled runs."""

    trials: int
    mean_param_diff: float
    max_param_diff: float
    mean_loss_gap: float | None
    max_loss_gap: float | None


def empirical_stability(traces: list) -> StabilityReport:
    """Aggregate final parameter gaps and loss gaps over trials."""
    if not traces:
        raise ValueError("need at least one trace")
    finals = np.array([tr.final_param_diff for tr in traces])
    gaps = [tr.final_loss_gap for tr in traces]
    has_gaps = all(g is not None for g in gaps)
    return StabilityReport(
        trials=len(traces),
        mean_param_diff=float(finals.mean()),
        max_param_diff=float(finals.max()),
        mean_loss_gap=float(np.mean(gaps)) if has_gaps else None,
        max_loss_gap=float(np.max(gaps)) if has_gaps else None,
    )


def _trial_trace(base: Dataset, n: int, trial: int, config: ExperimentConfig) -> CoupledTrace:
    """One coupled run under the named seed-role scheme."""
    m = config.master_seed
    sub_rng = np.random.default_rng(np.random.SeedSequence((m, n, trial, 3)))
    sub = subsample(base, n, sub_rng) if n < base.n else base
    j = int(np.random.default_rng(np.random.SeedSequence((m, n, trial))).integers(0, n))
    nb_rng = np.random.default_rng(np.random.SeedSequence((m, n, trial, 1)))
    neighbor = make_neighbor(sub, j, config.neighbor_mode, nb_rng)
    task_a = LogisticTask(x=sub.x, y=sub.y, lam=config.lambda_reg)
    task_b = LogisticTask(x=neighbor.x, y=neighbor.y, lam=config.lambda_reg)
    probe_x = probe_y = None
    if config.probes > 0:
        probe_rng = np.random.default_rng(np.random.SeedSequence((m, n, trial, 4)))
        records = [base.draw_record(probe_rng) for _ in range(config.probes)]
        probe_x = np.array([r[0] for r in records])
        probe_y = np.array([r[1] for r in records])
    idx_rng = np.random.default_rng(np.random.SeedSequence((m, n, trial, 2)))
    return coupled_run(
        task_a,
        task_b,
        j,
        config.optimizer,
        config.horizon,
        idx_rng,
        checkpoints=config.checkpoints,
        probe_x=probe_x,
        probe_y=probe_y,
    )


@dataclass(frozen=True)
class FitResult:
    """Least-squares line on log-log axes."""

    slope: float
    intercept: float
    r2: float


def fit_loglog_slope(xs: np.ndarray, ys: np.ndarray) -> FitResult:
    """Fit log(y) = slope * log(x) + intercept.

    Raises:
        ValueError: on fewer than 3 points or non-positive values.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 3:
        raise ValueError("need two equal-length 1-d arrays of length >= 3")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("log-log fit needs strictly positive values")
    lx, ly = np.log(xs), np.log(ys)
    design = np.vstack([lx, np.ones_like(lx)]).T
    coef = np.linalg.lstsq(design, ly, rcond=None)[0]
    resid = ly - design @ coef
    total = ly - ly.mean()
    sst = float(total @ total)
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0.0 else 1.0
    return FitResult(slope=float(coef[0]), intercept=float(coef[1]), r2=r2)


def saturating_fit(steps: np.ndarray, values: np.ndarray, rho: float) -> tuple[float, float]:
    """Best coefficient for values ~ c * sqrt(1 - (1-rho)^steps).

    One-parameter least squares; returns (c, r2) with r2 measured
    against the mean of the supplied values.
    """
    steps = np.asarray(steps, dtype=float)
    values = np.asarray(values, dtype=float)
    env = np.sqrt(1.0 - (1.0 - rho) ** steps)
    c = float((values * env).sum() / (env * env).sum())
    resid = values - c * env
    total = values - values.mean()
    sst = float(total @ total)
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0.0 else 1.0
    return c, r2


def envelope_rate(optimizer: OptimizerSpec, sector) -> float:
    """Squared-norm decay rate of the given optimizer over a sector."""
    if isinstance(optimizer, NagStandard):
        return momentum_rate(optimizer.eta, optimizer.mu, sector)
    if isinstance(optimizer, Sgd):
        return sgd_rate(optimizer.eta, sector)
    if isinstance(optimizer, NagSmoothQuadratic):
        return contraction_rate(optimizer.bounds.kappa).rho
    raise TypeError(f"unsupported optimizer {type(optimizer).__name__}")


@dataclass(frozen=True)
class VsNResult:
    """Stability versus sample count, with the log-log fit.

    fit is None when fewer than 3 subset sizes were run; a slope from
    1 or 2 points says nothing.
    """

    sizes: tuple
    mean_param_diff: np.ndarray
    trial_param_diff: np.ndarray
    trial_loss_gap: np.ndarray | None
    trial_max_grad: np.ndarray
    fit: FitResult | None


def stability_vs_n(base: Dataset, config: ExperimentConfig) -> VsNResult:
    """Mean final parameter gap for each subset size, plus slope fit.

    Each trial draws its own subset, replaced record, and index stream
    from the seed roles, so the per-size averages estimate stability of
    the subsampled learning problem rather than of one fixed subset.
    """
    finals = np.zeros((len(config.subset_sizes), config.trials))
    gaps = np.zeros_like(finals)
    grads = np.zeros_like(finals)
    have_gaps = config.probes > 0
    for a, n in enumerate(config.subset_sizes):
        for k in range(config.trials):
            trace = _trial_trace(base, int(n), k, config)
            finals[a, k] = trace.final_param_diff
            grads[a, k] = trace.max_grad_norm
            if have_gaps:
                gaps[a, k] = trace.final_loss_gap
    means = finals.mean(axis=1)
    fit = None
    if len(config.subset_sizes) >= 3:
        fit = fit_loglog_slope(np.asarray(config.subset_sizes, dtype=float), means)
    return VsNResult(
        sizes=tuple(config.subset_sizes),
        mean_param_diff=means,
        trial_param_diff=finals,
        trial_loss_gap=gaps if have_gaps else None,
        trial_max_grad=grads,
        fit=fit,
    )


@dataclass(frozen=True)
class VsTResult:
    """Gap growth against iteration count at the smallest subset size."""

    size: int
    checkpoints: tuple
    mean_curve: np.ndarray
    trial_curves: np.ndarray
    rho: float
    t_half: float
    fit_region: tuple
    loglog: FitResult
    sat_coeff: float
    sat_r2: float


def stability_vs_t(base: Dataset, config: ExperimentConfig) -> VsTResult:
    """Checkpointed gap curve with log-log and saturating-envelope fits.

    Runs the first configured subset size.  The envelope rate rho comes
    from the optimizer's own contraction over the effective curvature
    sector of the base data.  Fits use the checkpoints below the
    envelope half-life T_half (all of them when fewer than 3 qualify),
    keeping the growth fit away from the saturation plateau.
    """
    n = int(config.subset_sizes[0])
    cps = np.asarray(config.checkpoints, dtype=int)
    if cps.size < 3:
        raise ValueError("need at least three checkpoints for the growth fits")
    curves = np.zeros((config.trials, cps.size))
    for k in range(config.trials):
        trace = _trial_trace(base, n, k, config)
        curves[k] = trace.param_diff[cps - 1]
    mean_curve = curves.mean(axis=0)

    sector = effective_sector(base, config.lambda_reg)
    rho = envelope_rate(config.optimizer, sector)
    if not (0.0 < rho < 1.0):
        raise ValueError(f"optimizer does not contract over the data sector (rho={rho})")
    t_half = math.log(0.5) / math.log1p(-rho)
    region = tuple(int(c) for c in cps if c <= t_half)
    if len(region) < 3:
        region = tuple(int(c) for c in cps)
    mask = np.isin(cps, region)
    loglog = fit_loglog_slope(cps[mask].astype(float), mean_curve[mask])
    coeff, sat_r2 = saturating_fit(cps[mask].astype(float), mean_curve[mask], rho)
    return VsTResult(
        size=n,
        checkpoints=tuple(int(c) for c in cps),
        mean_curve=mean_curve,
        trial_curves=curves,
        rho=rho,
        t_half=t_half,
        fit_region=region,
        loglog=loglog,
        sat_coeff=coeff,
        sat_r2=sat_r2,
    )
