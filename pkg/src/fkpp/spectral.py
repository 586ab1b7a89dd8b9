"""Half-line oscillator eigenproblems and drifted self-similar evolution.

In self-similar variables the linearized front problem reduces to the
operators

    M   = -d^2/dy^2 + (y^2/16 - 3/4),
    M_e = M + eps*(y/8 + eps/16),

on (0, Y) with Dirichlet ends.  M has principal eigenvalue 0 with
eigenfunction psi(y) = (2 sqrt(pi))^(-1/2) * y * exp(-y^2/8); the Dirichlet
spectrum of M is {0, 1, 2, ...} (odd Hermite levels shifted by -3/4).

Two drifted evolutions are integrated in the symmetrized variable zeta*:

* constant drift eps/2 (absorbed by the weight exp(-y^2/8 - eps*y/4)), giving
  the exact projection decay <psi_e, zeta*>(tau) = <psi_e, zeta*>(0) e^(-lam_e tau);
* decaying drift eps * e^((gamma-1/2) tau) (gamma < 1/2), which perturbs the
  projection onto psi by O(eps) only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg


def psi_exact(y) -> np.ndarray | float:
    """Principal Dirichlet eigenfunction of M: (2 sqrt(pi))^(-1/2) y e^(-y^2/8)."""
    y = np.asarray(y, dtype=float) if np.ndim(y) else float(y)
    return (2.0 * np.sqrt(np.pi)) ** (-0.5) * y * np.exp(-np.square(y) / 8.0)


def oscillator_potential(y: np.ndarray, epsilon: float) -> np.ndarray:
    """Potential of M_eps: y^2/16 - 3/4 + eps*(y/8 + eps/16)."""
    return y**2 / 16.0 - 0.75 + epsilon * (y / 8.0 + epsilon / 16.0)


@dataclass(frozen=True)
class SelfSimilarOperator:
    """Symmetric tridiagonal discretization of M_eps on (0, Y), Dirichlet ends."""

    epsilon: float
    Y: float
    dy: float
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.Y < 30.0:
            raise ValueError(
                f"half-line truncation needs Y >= 30, got Y={self.Y}"
            )
        if self.dy <= 0.0:
            raise ValueError(f"dy must be positive, got {self.dy}")

    @property
    def y(self) -> np.ndarray:
        """Interior nodes dy, 2*dy, ..., Y - dy."""
        m = self.diag.size
        return self.dy * np.arange(1, m + 1)


def make_operator(epsilon: float, Y: float = 40.0, dy: float = 1e-3) -> SelfSimilarOperator:
    m = int(round(Y / dy)) - 1
    y = dy * np.arange(1, m + 1)
    inv2 = 1.0 / dy**2
    diag = 2.0 * inv2 + oscillator_potential(y, epsilon)
    offdiag = np.full(m - 1, -inv2)
    return SelfSimilarOperator(epsilon=epsilon, Y=Y, dy=dy, diag=diag, offdiag=offdiag)


@dataclass
class EigenResult:
    """Two smallest eigenvalues of M_eps and the normalized principal mode."""

    epsilon: float
    lambda_eps: float
    mu_eps: float
    psi_eps: np.ndarray
    y: np.ndarray
    dy: float

    def __post_init__(self):
        if not self.lambda_eps < self.mu_eps:
            raise ValueError("eigenvalues out of order")

    def project(self, values: np.ndarray) -> float:
        """dy-weighted inner product <psi_eps, values> on the interior grid."""
        return float(np.dot(self.psi_eps, values) * self.dy)


def principal_eigs(op: SelfSimilarOperator) -> EigenResult:
    """Two smallest Dirichlet eigenvalues and the positive principal mode."""
    w, v = scipy.linalg.eigh_tridiagonal(
        op.diag, op.offdiag, select="i", select_range=(0, 1)
    )
    psi = v[:, 0]
    norm = np.sqrt(np.sum(psi**2) * op.dy)
    psi = psi / norm
    if psi.sum() < 0.0:
        psi = -psi
    return EigenResult(
        epsilon=op.epsilon,
        lambda_eps=float(w[0]),
        mu_eps=float(w[1]),
        psi_eps=psi,
        y=op.y,
        dy=op.dy,
    )


@dataclass(frozen=True)
class DecayingDrift:
    """Decaying drift eps * e^((gamma - 1/2) tau); needs gamma < 1/2."""

    epsilon: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma < 0.5:
            raise ValueError(f"decaying drift needs gamma in [0, 1/2), got {self.gamma}")


@dataclass(frozen=True)
class ConstantDrift:
    """Constant drift eps/2, absorbed into the symmetrization weight."""

    epsilon: float


Drift = Union[DecayingDrift, ConstantDrift]


@dataclass
class EvolutionResult:
    taus: np.ndarray
    projection: np.ndarray
    orth_norm: np.ndarray
    mode: EigenResult
    cfl_ratio: float
    final: np.ndarray
    y: np.ndarray


def evolve_selfsimilar(
    zeta0: Callable,
    drift: Drift,
    tau_end: float,
    dtau: float = 1e-3,
    Y: float = 40.0,
    dy: float = 2e-3,
    record_every: float = 0.05,
    mode: Optional[EigenResult] = None,
) -> EvolutionResult:
    """Integrate the drifted self-similar equation in the symmetrized variable.

    Records, per recorded tau, the projection onto the reference mode (the
    discrete principal eigenfunction of M for the decaying drift, of M_eps for
    the constant drift) and the L2 norm of the orthogonal complement.
    Crank-Nicolson handles the symmetric operator; the residual drift of the
    decaying case is advanced explicitly (Adams-Bashforth 2) and its advective
    CFL ratio is reported (flagged above 1).
    """
    eps_op = drift.epsilon if isinstance(drift, ConstantDrift) else 0.0
    op = make_operator(eps_op, Y=Y, dy=dy)
    y = op.y
    m = y.size
    zeta = np.asarray(zeta0(y), dtype=float)
    if zeta.shape != y.shape:
        raise ValueError("initial profile must evaluate pointwise on the grid")
    edge = max(2, int(round(0.5 / dy)))
    scale = np.max(np.abs(zeta))
    if scale == 0.0:
        raise ValueError("initial profile vanishes identically")
    if np.max(np.abs(zeta[-edge:])) > 1e-10 * scale or np.max(np.abs(zeta[:2])) > 1e-10 * scale:
        raise ValueError("initial profile must be compactly supported inside (0, Y)")
    if mode is None:
        mode = principal_eigs(op)
    elif abs(mode.dy - dy) > 1e-12 or mode.y.size != m:
        raise ValueError("supplied mode was computed on a different grid")

    n_steps = int(round(tau_end / dtau))
    stride = max(1, int(round(record_every / dtau)))
    # Crank-Nicolson factors for zeta_tau = -M zeta
    ab = np.zeros((3, m))
    ab[1] = 1.0 + 0.5 * dtau * op.diag
    ab[0, 1:] = 0.5 * dtau * op.offdiag
    ab[2, :-1] = 0.5 * dtau * op.offdiag
    b_diag = 1.0 - 0.5 * dtau * op.diag
    b_off = -0.5 * dtau * op.offdiag[0]

    decaying = isinstance(drift, DecayingDrift)
    eps = drift.epsilon
    rate = (drift.gamma - 0.5) if decaying else 0.0
    cfl = eps * dtau / dy if decaying else 0.0

    def drift_term(tau, z):
        # eps * e^(rate*tau) * (z_y - (y/4) z), Dirichlet ghosts
        dz = np.empty_like(z)
        dz[1:-1] = (z[2:] - z[:-2]) / (2.0 * dy)
        dz[0] = z[1] / (2.0 * dy)
        dz[-1] = -z[-2] / (2.0 * dy)
        return (eps * np.exp(rate * tau)) * (dz - 0.25 * y * z)

    def apply_b(z):
        out = np.empty_like(z)
        out[1:-1] = b_diag[1:-1] * z[1:-1] + b_off * (z[:-2] + z[2:])
        out[0] = b_diag[0] * z[0] + b_off * z[1]
        out[-1] = b_diag[-1] * z[-1] + b_off * z[-2]
        return out

    taus, projs, orths = [], [], []

    def record(tau, z):
        p = mode.project(z)
        taus.append(tau)
        projs.append(p)
        orths.append(float(np.sqrt(max(np.sum(z**2) * dy - p**2, 0.0))))

    record(0.0, zeta)
    F_prev = None
    for k in range(n_steps):
        tau = k * dtau
        rhs = apply_b(zeta)
        if decaying:
            F = drift_term(tau, zeta)
            F_hat = F if F_prev is None else 1.5 * F - 0.5 * F_prev
            rhs += dtau * F_hat
            F_prev = F
        zeta = scipy.linalg.solve_banded((1, 1), ab, rhs,
                                         overwrite_b=True, check_finite=False)
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            record((k + 1) * dtau, zeta)

    return EvolutionResult(
        taus=np.asarray(taus),
        projection=np.asarray(projs),
        orth_norm=np.asarray(orths),
        mode=mode,
        cfl_ratio=float(cfl),
        final=zeta,
        y=y,
    )


def evolve_unsymmetrized(
    zeta0: Callable,
    tau_end: float,
    dtau: float = 1e-3,
    Y: float = 40.0,
    dy: float = 2e-3,
) -> tuple[np.ndarray, np.ndarray]:
    """Crank-Nicolson for the raw variable: zeta_tau = zeta_yy + (y/2) zeta_y + zeta.

    Returns (y, zeta(tau_end)); used to confirm that the symmetrized evolution
    agrees after unwinding the Gaussian weight.
    """
    m = int(round(Y / dy)) - 1
    y = dy * np.arange(1, m + 1)
    zeta = np.asarray(zeta0(y), dtype=float)
    inv2 = 1.0 / dy**2
    adv = y / (4.0 * dy)
    lower = inv2 - adv  # coefficient of z[i-1] in L
    upper = inv2 + adv  # coefficient of z[i+1] in L
    diag = -2.0 * inv2 + 1.0
    ab = np.zeros((3, m))
    ab[1] = 1.0 - 0.5 * dtau * diag
    ab[0, 1:] = -0.5 * dtau * upper[:-1]
    ab[2, :-1] = -0.5 * dtau * lower[1:]
    n_steps = int(round(tau_end / dtau))
    for _ in range(n_steps):
        rhs = np.empty_like(zeta)
        rhs[1:-1] = (
            (1.0 + 0.5 * dtau * diag) * zeta[1:-1]
            + 0.5 * dtau * (lower[1:-1] * zeta[:-2] + upper[1:-1] * zeta[2:])
        )
        rhs[0] = (1.0 + 0.5 * dtau * diag) * zeta[0] + 0.5 * dtau * upper[0] * zeta[1]
        rhs[-1] = (1.0 + 0.5 * dtau * diag) * zeta[-1] + 0.5 * dtau * lower[-1] * zeta[-2]
        zeta = scipy.linalg.solve_banded((1, 1), ab, rhs,
                                         overwrite_b=True, check_finite=False)
    return y, zeta


def eigen_sweep(eps_values, Y: float = 40.0, dy: float = 1e-3) -> list[EigenResult]:
    """Eigenpairs of M_eps for a sweep of perturbation strengths."""
    return [principal_eigs(make_operator(e, Y=Y, dy=dy)) for e in eps_values]
