"""Projected-subgradient feasibility solver for the certificate LMI.

The decision variable is (P, lambda, tau1, tau2) and the goal is a
strictly negative definite LMI with P positive definite, lambda above a
floor, and nonnegative multipliers.  The solver minimizes the pointwise
max of the two eigenvalue violations with Polyak-style subgradient steps
(eigenvector outer products give exact subgradients of extreme
eigenvalues of an affine matrix map), projecting the box variables after
every step.  Restarts are deterministic in the seed; any returned
Feasible certificate is re-verified eigenvalue-by-eigenvalue and by a
randomized sector sampling check before being accepted.

Statuses: Feasible (verified certificate in hand), Infeasible (every
restart stalled at a clearly positive violation; an operational claim,
not a dual proof), Inconclusive (budget ran out while still improving,
or the residual landed too close to zero to call).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .iqc import IqcCertificate, assemble_lmi, sector_multipliers
from .linalg import extreme_eig_sym, sym_eigen
from .optimizers import LureSystem, SectorBounds

__all__ = [
    "SolverOptions",
    "RestartTrace",
    "FeasibilityResult",
    "RateResult",
    "CertificateCheck",
    "solve_feasibility",
    "verify_certificate",
    "s_lemma_cross_check",
    "certify_rate",
    "thread_count",
]

FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for solve_feasibility.

    feas_margin: the LMI must clear lambda_max <= -feas_margin.
    p_tol: P must clear lambda_min >= p_tol.
    lambda_min: floor for the decay-coupling variable lambda.
    restarts: independent seeded starts; first feasible one wins.
    max_iters: per-restart subgradient step budget.
    patience: break a restart after this many steps without improvement.
    infeasible_margin: stalled residual above this reports Infeasible,
        anything closer to zero reports Inconclusive.
    check_samples: sample count for the randomized certificate check.
    """

    feas_margin: float = 1e-8
    p_tol: float = 1e-8
    lambda_min: float = 1e-6
    restarts: int = 16
    max_iters: int = 50_000
    patience: int = 2000
    step_cap: float = 1.0
    target_gap: float = 1e-3
    stall_tol: float = 1e-9
    infeasible_margin: float = 1e-4
    check_samples: int = 10_000
    seed: int = 0


@dataclass(frozen=True)
class RestartTrace:
    """Per-restart outcome: best violation seen and how the run ended."""

    restart: int
    best_violation: float
    iterations: int
    stalled: bool


@dataclass(frozen=True)
class FeasibilityResult:
    """Aggregate solver outcome across restarts."""

    status: str
    certificate: IqcCertificate | None
    best_violation: float
    traces: list = field(default_factory=list)


@dataclass(frozen=True)
class RateResult:
    """Outcome of the bisection search for the largest certifiable rho."""

    status: str
    rho_star: float
    certificate: IqcCertificate | None
    tested: list = field(default_factory=list)


@dataclass(frozen=True)
class CertificateCheck:
    """Recheck verdict for one certificate; truthy iff it passed."""

    ok: bool
    lmi_max_eig: float
    p_min_eig: float
    lam: float
    tau1: float
    tau2: float

    def __bool__(self) -> bool:
        return self.ok


def thread_count() -> int:
    """Worker count from STABCERT_THREADS, clamped to at least 1."""
    raw = os.environ.get("STABCERT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _vech_indices(s: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(s) for j in range(i, s)]


class _Problem:
    """Precomputed pieces of the affine LMI map for one system/sector."""

    def __init__(self, system: LureSystem, bounds: SectorBounds, rho: float, with_lam: bool):
        self.system = system
        self.bounds = bounds
        self.rho = rho
        self.with_lam = with_lam
        self.s = system.state_dim
        self.m = system.input_dim
        self.f = np.hstack([system.a, system.b])
        pi1, pi2 = sector_multipliers(bounds)
        j = np.zeros((2 * self.m, self.s + self.m))
        j[: self.m, : self.s] = system.c
        j[: self.m, self.s :] = system.d
        j[self.m :, self.s :] = np.eye(self.m)
        self.q1 = j.T @ pi1 @ j
        self.q2 = j.T @ pi2 @ j
        self.pairs = _vech_indices(self.s)

    def lmi(self, p: np.ndarray, lam: float, tau1: float, tau2: float) -> np.ndarray:
        return assemble_lmi(self.system, self.bounds, p, lam, tau1, tau2, self.rho)


def _phi_and_grad(prob: _Problem, p, lam, tau1, tau2, opts: SolverOptions):
    """Violation value and a subgradient in (vech P, lam, tau1, tau2).

    Uses the closed-form extreme eigenpairs (linalg.extreme_eig_sym) to
    keep iterations cheap; accepted certificates are re-verified with
    the full Jacobi path afterwards.
    """
    top_val, q = extreme_eig_sym(prob.lmi(p, lam, tau1, tau2), "max")
    g_lmi = top_val + opts.feas_margin
    bot_val, w = extreme_eig_sym(p, "min")
    g_p = opts.p_tol - bot_val
    n_vech = len(prob.pairs)
    grad = np.zeros(n_vech + 3)
    if g_lmi >= g_p:
        phi = g_lmi
        x = q[: prob.s]
        u = prob.f @ q
        scale = 1.0 - prob.rho
        for k, (i, j) in enumerate(prob.pairs):
            if i == j:
                grad[k] = u[i] * u[i] - scale * x[i] * x[i]
            else:
                grad[k] = 2.0 * (u[i] * u[j] - scale * x[i] * x[j])
        grad[n_vech] = float(x @ x) if prob.with_lam else 0.0
        grad[n_vech + 1] = float(q @ prob.q1 @ q)
        grad[n_vech + 2] = float(q @ prob.q2 @ q)
    else:
        phi = g_p
        for k, (i, j) in enumerate(prob.pairs):
            grad[k] = -w[i] * w[i] if i == j else -2.0 * w[i] * w[j]
    return float(phi), grad


def _unpack(prob: _Problem, v: np.ndarray):
    p = np.zeros((prob.s, prob.s))
    for k, (i, j) in enumerate(prob.pairs):
        p[i, j] = p[j, i] = v[k]
    n = len(prob.pairs)
    return p, float(v[n]), float(v[n + 1]), float(v[n + 2])


def _project(prob: _Problem, v: np.ndarray, opts: SolverOptions) -> np.ndarray:
    n = len(prob.pairs)
    v = v.copy()
    v[n] = max(v[n], opts.lambda_min) if prob.with_lam else 0.0
    v[n + 1] = max(v[n + 1], 0.0)
    v[n + 2] = max(v[n + 2], 0.0)
    # The LMI is homogeneous in the decision tuple; rescale when trace(P)
    # drifts so the absolute margins keep their meaning.
    tr = sum(v[k] for k, (i, j) in enumerate(prob.pairs) if i == j)
    mean = tr / prob.s
    if mean > 10.0 or (0.0 < mean < 0.1):
        v /= mean
        if prob.with_lam:
            v[n] = max(v[n], opts.lambda_min)
    return v


def _run_restart(prob: _Problem, restart: int, opts: SolverOptions):
    rng = np.random.default_rng(np.random.SeedSequence((opts.seed, restart)))
    s = prob.s
    raw = rng.normal(size=(s, s))
    p0 = raw @ raw.T / s + 0.5 * np.eye(s)
    v = np.zeros(len(prob.pairs) + 3)
    for k, (i, j) in enumerate(prob.pairs):
        v[k] = p0[i, j]
    n = len(prob.pairs)
    v[n] = opts.lambda_min + 0.1 * abs(rng.normal()) if prob.with_lam else 0.0
    v[n + 1] = 0.1 + abs(rng.normal())
    v[n + 2] = 0.1 + abs(rng.normal())
    v = _project(prob, v, opts)

    best = np.inf
    best_v = v
    best_iter = 0
    k = 0
    for k in range(1, opts.max_iters + 1):
        p, lam, tau1, tau2 = _unpack(prob, v)
        phi, grad = _phi_and_grad(prob, p, lam, tau1, tau2, opts)
        if phi < best - opts.stall_tol:
            best = phi
            best_v = v.copy()
            best_iter = k
        if phi < 0.0:
            return v, phi, k, False
        if k - best_iter > opts.patience:
            return best_v, best, k, True
        gnorm2 = float(grad @ grad)
        if gnorm2 <= 1e-300:
            return best_v, best, k, True
        step = min((phi + opts.target_gap) / gnorm2, opts.step_cap)
        v = _project(prob, v - step * grad, opts)
    return best_v, best, k, False


def _make_cert(prob, v, name, status, opts) -> IqcCertificate:
    p, lam, tau1, tau2 = _unpack(prob, v)
    lmi_top = float(sym_eigen(prob.lmi(p, lam, tau1, tau2)).values[-1])
    p_bot = float(sym_eigen(p).values[0])
    return IqcCertificate(
        optimizer=name,
        gamma=prob.bounds.gamma,
        beta=prob.bounds.beta,
        p=p,
        lam=lam,
        tau1=tau1,
        tau2=tau2,
        rho=prob.rho,
        lmi_max_eig=lmi_top,
        p_min_eig=p_bot,
        status=status,
        solver_seed=opts.seed,
    )


def solve_feasibility(
    system: LureSystem,
    bounds: SectorBounds,
    optimizer_name: str = "custom",
    rho: float = 0.0,
    with_lam: bool = True,
    options: SolverOptions | None = None,
) -> FeasibilityResult:
    """Search for a verified solution of the certificate LMI.

    Runs seeded subgradient restarts (in parallel when STABCERT_THREADS
    is set; the outcome does not depend on the thread count because the
    lowest-numbered feasible restart always wins).  A candidate only
    becomes a Feasible result after verify_certificate and the sector
    sampling cross-check both pass.

    Args:
        system: feedback form of the optimizer.
        bounds: gradient sector.
        optimizer_name: label stored in the certificate.
        rho: decay factor for rate-mode certificates (0 for plain).
        with_lam: include the lambda ||x||^2 coupling term (stability
            certificates); rate-only searches drop it.
        options: solver knobs, defaults to SolverOptions().
    """
    opts = options or SolverOptions()
    if not (0.0 <= rho < 1.0):
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    prob = _Problem(system, bounds, rho, with_lam)

    workers = thread_count()
    results: dict[int, tuple] = {}
    if workers == 1:
        for r in range(opts.restarts):
            results[r] = _run_restart(prob, r, opts)
            if results[r][1] < 0.0:
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {r: pool.submit(_run_restart, prob, r, opts) for r in range(opts.restarts)}
            results = {r: f.result() for r, f in futs.items()}

    traces = [
        RestartTrace(restart=r, best_violation=res[1], iterations=res[2], stalled=res[3])
        for r, res in sorted(results.items())
    ]
    for r in sorted(results):
        v, phi, _, _ = results[r]
        if phi < 0.0:
            cert = _make_cert(prob, v, optimizer_name, FEASIBLE, opts)
            report = verify_certificate(cert, system, bounds, opts)
            sampled = s_lemma_cross_check(cert, system, bounds, samples=opts.check_samples,
                                          seed=opts.seed)
            if report.ok and sampled["ok"]:
                return FeasibilityResult(FEASIBLE, cert, phi, traces)

    best = min(res[1] for res in results.values())
    ran_out = any(
        not res[3] and res[2] >= opts.max_iters and res[1] >= 0.0 for res in results.values()
    )
    if ran_out or best <= opts.infeasible_margin:
        status = INCONCLUSIVE
    else:
        status = INFEASIBLE
    return FeasibilityResult(status, None, best, traces)


def verify_certificate(
    cert: IqcCertificate,
    system: LureSystem,
    bounds: SectorBounds,
    options: SolverOptions | None = None,
) -> CertificateCheck:
    """Independently recheck a certificate's eigenvalue conditions.

    Rebuilds the LMI from the stored variables and tests, with the
    package's own eigensolver, that the LMI clears -feas_margin, P
    clears p_tol, the multipliers are nonnegative, and lambda respects
    its floor (when the certificate carries one).  The result is truthy
    exactly when all conditions hold.
    """
    opts = options or SolverOptions()
    lmi_top, p_bot = cert.recompute_eigs(system, bounds)
    lam_ok = cert.lam >= opts.lambda_min or cert.lam == 0.0
    ok = (
        lmi_top <= -opts.feas_margin
        and p_bot >= opts.p_tol
        and cert.tau1 >= 0.0
        and cert.tau2 >= 0.0
        and lam_ok
    )
    return CertificateCheck(
        ok=bool(ok),
        lmi_max_eig=lmi_top,
        p_min_eig=p_bot,
        lam=cert.lam,
        tau1=cert.tau1,
        tau2=cert.tau2,
    )


def s_lemma_cross_check(
    cert: IqcCertificate,
    system: LureSystem,
    bounds: SectorBounds,
    samples: int = 10_000,
    seed: int = 0,
    h_low: float | None = None,
    h_high: float | None = None,
) -> dict:
    """Sample sector responses and test the decrement the LMI promises.

    Draws random states x and curvatures h in [h_low, h_high] (defaults
    to the sector), sets u = h * y for y = C x + D u, and evaluates

        V(A x + B u) - (1 - rho) V(x) + lambda ||x||^2,

    which must be <= 0 for every in-sector response if the certificate
    is sound.  Returns the max over samples; drawing h outside the
    sector should, and does, break valid certificates.
    """
    if system.input_dim != 1:
        raise ValueError("sampling check implemented for scalar input channels")
    rng = np.random.default_rng(seed)
    lo = bounds.gamma if h_low is None else h_low
    hi = bounds.beta if h_high is None else h_high
    s = system.state_dim
    x = rng.normal(size=(samples, s))
    h = rng.uniform(lo, hi, size=samples)
    d = float(system.d[0, 0])
    y = x @ system.c[0]
    denom = 1.0 - h * d
    if np.any(np.abs(denom) < 1e-12):
        raise ValueError("feedthrough makes the feedback loop singular")
    u = h * y / denom
    x_next = x @ system.a.T + np.outer(u, system.b[:, 0])
    v_next = np.einsum("ij,jk,ik->i", x_next, cert.p, x_next)
    v_now = np.einsum("ij,jk,ik->i", x, cert.p, x)
    vals = v_next - (1.0 - cert.rho) * v_now + cert.lam * np.einsum("ij,ij->i", x, x)
    worst = float(vals.max())
    return {"ok": bool(worst <= 1e-9), "max_violation": worst, "samples": samples}


def certify_rate(
    system: LureSystem,
    bounds: SectorBounds,
    optimizer_name: str = "custom",
    rho_low: float = 1e-4,
    rho_high: float = 0.999,
    tol: float = 1e-4,
    options: SolverOptions | None = None,
) -> RateResult:
    """Bisect for the largest decay rate the LMI can certify.

    Feasibility is monotone in rho (any certificate at rho works for
    smaller rho), so bisection applies.  Uses rate-mode searches (no
    lambda coupling).  If even rho_low is not certifiable the result is
    Infeasible-at-range.

    Returns:
        RateResult with rho_star the largest rho found feasible, its
        certificate, and the list of (rho, status) probes.
    """
    if not (0.0 < rho_low < rho_high < 1.0):
        raise ValueError(f"need 0 < rho_low < rho_high < 1, got {rho_low}, {rho_high}")
    opts = options or SolverOptions(restarts=6, max_iters=20_000, patience=1200)
    tested = []

    def probe(rho: float) -> FeasibilityResult:
        res = solve_feasibility(
            system, bounds, optimizer_name, rho=rho, with_lam=False, options=opts
        )
        tested.append((rho, res.status))
        return res

    low_res = probe(rho_low)
    if low_res.status != FEASIBLE:
        return RateResult("Infeasible-at-range", 0.0, None, tested)
    lo, lo_cert = rho_low, low_res.certificate
    high_res = probe(rho_high)
    if high_res.status == FEASIBLE:
        return RateResult("Certified", rho_high, high_res.certificate, tested)
    hi = rho_high
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res = probe(mid)
        if res.status == FEASIBLE:
            lo, lo_cert = mid, res.certificate
        else:
            hi = mid
    return RateResult("Certified", lo, lo_cert, tested)
