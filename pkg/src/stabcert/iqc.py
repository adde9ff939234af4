"""Sector quadratic constraints and the certificate LMI.

A gradient of a [gamma, beta]-sector function, acting on differences
y = w - w' and u = grad(w) - grad(w'), satisfies two pointwise quadratic
inequalities: strong monotonicity (u^T y >= gamma ||y||^2) and inverse
smoothness (u^T y >= ||u||^2 / beta).  Folding nonnegative multiples of
these into the Lyapunov decrement condition for a feedback system gives
one linear matrix inequality in (P, lambda, tau1, tau2); a negative
semidefinite solution is a machine-checkable stability certificate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linalg import eigvals_sym, loewner_leq
from .optimizers import LureSystem, SectorBounds

__all__ = [
    "IqcCertificate",
    "sector_multipliers",
    "iqc_holds_for_gradient",
    "assemble_lmi",
    "certificate_to_json",
    "certificate_from_json",
]


def sector_multipliers(bounds: SectorBounds) -> tuple[np.ndarray, np.ndarray]:
    """Multiplier matrices for the two sector inequalities on (y, u).

    Pi1 encodes u^T y - gamma ||y||^2 >= 0 and Pi2 encodes
    u^T y - ||u||^2 / beta >= 0, both as [y u] quadratic forms.
    """
    pi1 = np.array([[-bounds.gamma, 0.5], [0.5, 0.0]])
    pi2 = np.array([[0.0, 0.5], [0.5, -1.0 / bounds.beta]])
    return pi1, pi2


def iqc_holds_for_gradient(
    bounds: SectorBounds, hessian: np.ndarray, w: np.ndarray, w_prime: np.ndarray
) -> tuple[float, float]:
    """Evaluate both sector forms for a quadratic gradient difference.

    Args:
        bounds: curvature sector.
        hessian: symmetric matrix with spectrum inside [gamma, beta]
            (checked, error if outside).
        w, w_prime: the two points being coupled.

    Returns:
        (v1, v2), the values of the two quadratic forms; both are
        nonnegative for any in-sector Hessian.
    """
    hessian = np.asarray(hessian, dtype=float)
    dim = hessian.shape[0]
    eye = np.eye(dim)
    if not loewner_leq(bounds.gamma * eye, hessian, tol=1e-9):
        raise ValueError("hessian has curvature below gamma")
    if not loewner_leq(hessian, bounds.beta * eye, tol=1e-9):
        raise ValueError("hessian has curvature above beta")
    y = np.asarray(w, dtype=float) - np.asarray(w_prime, dtype=float)
    u = hessian @ y
    inner = float(u @ y)
    v1 = inner - bounds.gamma * float(y @ y)
    v2 = inner - float(u @ u) / bounds.beta
    return v1, v2


def assemble_lmi(
    system: LureSystem,
    bounds: SectorBounds,
    p: np.ndarray,
    lam: float,
    tau1: float,
    tau2: float,
    rho: float = 0.0,
) -> np.ndarray:
    """Certificate LMI in the joint variable z = (x, u).

    Returns the symmetric (s+m) x (s+m) matrix

        [F^T P F - (1-rho) blkdiag(P, 0)] + lam * blkdiag(I, 0)
            + J^T (tau1 Pi1 + tau2 Pi2) J,

    with F = [A B] and J = [[C, D], [0, I]].  Negative semidefiniteness
    certifies V(x+) <= (1-rho) V(x) - lam ||x||^2 whenever u is a sector
    gradient response to y = C x + D u.  Affine in (p, lam, tau1, tau2).
    """
    p = np.asarray(p, dtype=float)
    s = system.state_dim
    m = system.input_dim
    if p.shape != (s, s):
        raise ValueError(f"P must be {s}x{s}, got {p.shape}")
    f = np.hstack([system.a, system.b])
    lifted = np.zeros((s + m, s + m))
    lifted[:s, :s] = (1.0 - rho) * p - lam * np.eye(s)
    j = np.zeros((2 * m, s + m))
    j[:m, :s] = system.c
    j[:m, s:] = system.d
    j[m:, s:] = np.eye(m)
    pi1, pi2 = sector_multipliers(bounds)
    return f.T @ p @ f - lifted + j.T @ (tau1 * pi1 + tau2 * pi2) @ j


@dataclass(frozen=True)
class IqcCertificate:
    """A solved (or attempted) LMI certificate for one optimizer/sector."""

    optimizer: str
    gamma: float
    beta: float
    p: np.ndarray
    lam: float
    tau1: float
    tau2: float
    rho: float
    lmi_max_eig: float
    p_min_eig: float
    status: str
    solver_seed: int

    def recompute_eigs(self, system: LureSystem, bounds: SectorBounds) -> tuple[float, float]:
        """Re-derive (lmi_max_eig, p_min_eig) from the stored variables."""
        lmi = assemble_lmi(system, bounds, self.p, self.lam, self.tau1, self.tau2, self.rho)
        return float(eigvals_sym(lmi)[-1]), float(eigvals_sym(self.p)[0])


def certificate_to_json(cert: IqcCertificate) -> str:
    """Serialize a certificate to a stable, key-sorted JSON document."""
    payload = {
        "optimizer": cert.optimizer,
        "gamma": cert.gamma,
        "beta": cert.beta,
        "P": [float(x) for x in np.asarray(cert.p).reshape(-1)],
        "lambda": cert.lam,
        "tau1": cert.tau1,
        "tau2": cert.tau2,
        "rho": cert.rho,
        "lmi_max_eig": cert.lmi_max_eig,
        "p_min_eig": cert.p_min_eig,
        "status": cert.status,
        "solver_seed": cert.solver_seed,
    }
    return json.dumps(payload, sort_keys=True, indent=2)


def certificate_from_json(text: str) -> IqcCertificate:
    """Inverse of certificate_to_json."""
    raw = json.loads(text)
    flat = np.asarray(raw["P"], dtype=float)
    side = int(round(np.sqrt(flat.size)))
    if side * side != flat.size:
        raise ValueError(f"P payload of length {flat.size} is not square")
    return IqcCertificate(
        optimizer=raw["optimizer"],
        gamma=float(raw["gamma"]),
        beta=float(raw["beta"]),
        p=flat.reshape(side, side),
        lam=float(raw["lambda"]),
        tau1=float(raw["tau1"]),
        tau2=float(raw["tau2"]),
        rho=float(raw.get("rho", 0.0)),
        lmi_max_eig=float(raw["lmi_max_eig"]),
        p_min_eig=float(raw["p_min_eig"]),
        status=str(raw["status"]),
        solver_seed=int(raw["solver_seed"]),
    )
