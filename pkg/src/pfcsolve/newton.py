"""Regularized Newton method with preconditioned conjugate gradients.

The mass constraint is eliminated by working in the reduced space of all
non-DC amplitudes. Each outer step regularizes the reduced Hessian with a
shift mu estimated from a Lanczos lower bound on its smallest eigenvalue,
solves the shifted system by PCG with a diagonal spectral preconditioner,
and backtracks along the resulting descent direction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .energy import ModelSpec, energy, max_second_derivative
from .lattice import FourierField, Lattice, project_mass_zero
from .report import SolverReport, TraceRow


class LineSearchError(RuntimeError):
    """Armijo backtracking exhausted its shrink budget."""


@dataclass
class NewtonConfig:
    c1: float = 1.0  # weight on the negative-eigenvalue part of mu
    c2: float = 0.1  # weight on the gradient-norm part of mu
    mu_max: float = 1e3
    tau: float = 0.01  # PCG tolerance factor
    rho: float = 0.5  # backtracking shrink
    nu: float = 1e-4  # Armijo slope fraction
    pcg_max_iter: int = 200
    max_iter: int = 100
    grad_tol: float = 1e-9
    lanczos_steps: int = 20
    lanczos_slack: float = 0.1
    mu_retries: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.c1 < 1.0 or self.c2 <= 0.0:
            raise ValueError("need c1 >= 1 and c2 > 0")
        if not (0.0 < self.tau < 1.0 and 0.0 < self.rho < 1.0 and 0.0 < self.nu < 1.0):
            raise ValueError("tau, rho, nu must lie in (0, 1)")


def reduce_field(field: FourierField) -> np.ndarray:
    """Drop the h = 0 amplitude; isometric image of a mass-free field."""
    return field.a.ravel()[1:].copy()


def lift(u: np.ndarray, lattice: Lattice) -> FourierField:
    """Embed a reduced vector as a field with zero h = 0 amplitude."""
    a = np.zeros(lattice.size, dtype=complex)
    a[1:] = u
    return FourierField(a.reshape(lattice.shape), lattice)


def _re_dot(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.real(np.vdot(u, v)))


def make_reduced_hessian(
    x: FourierField, model: ModelSpec, D: np.ndarray, mu: float
) -> Callable[[np.ndarray], np.ndarray]:
    """Reduced-space operator u -> Z^T (Hess E)(Z u) + mu u at the point x."""
    lattice = x.lattice
    mult = model.bulk_d2phi(x.samples)
    d_flat = D.ravel()[1:]

    def apply(u: np.ndarray) -> np.ndarray:
        v = lift(u, lattice)
        hv = lattice.to_spectral(mult * v.samples)
        return d_flat * u + hv.ravel()[1:] + mu * u

    return apply


def lanczos_min_eig(
    op: Callable[[np.ndarray], np.ndarray],
    dim: int,
    steps: int,
    rng: np.random.Generator,
    dtype=complex,
    start: np.ndarray | None = None,
) -> float:
    """Smallest Ritz value of a symmetric operator after m Lanczos steps.

    `start`, if given, restricts the Krylov space to the operator-invariant
    subspace containing it (the caller's job to pick one the operator is
    symmetric on).
    """
    steps = min(steps, 2 * dim if dtype is complex else dim)
    if start is not None:
        q = start.astype(complex if dtype is complex else float)
    else:
        q = rng.standard_normal(dim) + (
            1j * rng.standard_normal(dim) if dtype is complex else 0.0
        )
    q = q / np.sqrt(_re_dot(q, q))
    basis = [q]
    alphas: list[float] = []
    betas: list[float] = []
    q_prev = np.zeros_like(q)
    beta = 0.0
    for _ in range(steps):
        w = op(basis[-1])
        a = _re_dot(basis[-1], w)
        alphas.append(a)
        w = w - a * basis[-1] - beta * q_prev
        # full reorthogonalization; cheap at the step counts used here
        for b in basis:
            w = w - _re_dot(b, w) * b
        beta = float(np.sqrt(_re_dot(w, w)))
        if beta < 1e-12:
            break
        betas.append(beta)
        q_prev = basis[-1]
        basis.append(w / beta)
    if len(alphas) == 1:
        return alphas[0]
    vals = eigh_tridiagonal(
        np.array(alphas), np.array(betas[: len(alphas) - 1]), eigvals_only=True
    )
    return float(vals[0])


def choose_mu(
    hess: Callable[[np.ndarray], np.ndarray],
    dim: int,
    grad_norm: float,
    config: NewtonConfig,
    rng: np.random.Generator,
    dtype=complex,
    start: np.ndarray | None = None,
) -> float:
    """Regularization shift: c1 * max(0, -lambda_min estimate) + c2 * ||g||."""
    lam = lanczos_min_eig(hess, dim, config.lanczos_steps, rng, dtype, start=start)
    lam_lower = lam - config.lanczos_slack * abs(lam)
    mu = config.c1 * max(0.0, -lam_lower) + config.c2 * grad_norm
    return float(min(mu, config.mu_max))


def pcg(
    A: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    M_inv: Callable[[np.ndarray], np.ndarray],
    eta: float,
    max_iter: int,
) -> tuple[np.ndarray, float, int, bool]:
    """Preconditioned CG for A x = b from x0 = 0.

    Returns (x, residual norm, iterations, negative_curvature). Stops when
    ||A x - b|| <= eta or the iteration cap is reached; a nonpositive
    curvature <p, A p> aborts immediately with the flag set.
    """
    x = np.zeros_like(b)
    r = -b  # A x0 - b
    z = M_inv(r)
    p = -z
    rz = _re_dot(r, z)
    rnorm = float(np.sqrt(_re_dot(r, r)))
    for i in range(max_iter):
        if rnorm <= eta:
            return x, rnorm, i, False
        Ap = A(p)
        pAp = _re_dot(p, Ap)
        if pAp <= 0.0:
            return x, rnorm, i, True
        alpha = rz / pAp
        x = x + alpha * p
        r = r + alpha * Ap
        rnorm = float(np.sqrt(_re_dot(r, r)))
        z = M_inv(r)
        rz_next = _re_dot(r, z)
        beta = rz_next / rz
        rz = rz_next
        p = -z + beta * p
    return x, rnorm, max_iter, False


def precondition_apply(
    D_reduced: np.ndarray, delta: float, mu: float, r: np.ndarray
) -> np.ndarray:
    """Componentwise division by (D_h + delta + mu) on the reduced indices."""
    return r / (D_reduced + delta + mu)


def armijo_backtrack(
    e0: float,
    slope: float,
    eval_at: Callable[[float], float],
    nu: float,
    rho: float,
    max_shrinks: int = 60,
) -> tuple[float, float]:
    """Smallest n with E(t = rho^n) <= E(0) + nu t slope; returns (t, E(t))."""
    if slope >= 0.0:
        raise LineSearchError(f"not a descent direction (slope {slope:.3e})")
    t = 1.0
    for _ in range(max_shrinks + 1):
        e_t = eval_at(t)
        if np.isfinite(e_t) and e_t <= e0 + nu * t * slope:
            return t, e_t
        t *= rho
    raise LineSearchError("Armijo backtracking exhausted 60 shrinks")


def newton_pcg_run(
    x0: FourierField,
    model: ModelSpec,
    D: np.ndarray,
    config: NewtonConfig,
    observer=None,
) -> SolverReport:
    """Regularized Newton-PCG outer loop on the reduced space.

    `observer`, if given, is called with every accepted iterate.
    """
    lattice = x0.lattice
    rng = np.random.default_rng(config.seed)
    d_flat = D.ravel()[1:]
    report = SolverReport(method="newton_pcg")
    t_start = time.perf_counter()

    x = FourierField(project_mass_zero(lattice.symmetrize(x0.a)), lattice)
    e_x = energy(x, model, D).total

    def reduced_grad(f: FourierField) -> np.ndarray:
        gf = lattice.to_spectral(model.bulk_dphi(f.samples))
        return project_mass_zero(D * f.a + gf).ravel()[1:]

    g_red = reduced_grad(x)
    gnorm = float(np.sqrt(_re_dot(g_red, g_red)))
    report.rows.append(
        TraceRow(k=0, energy=e_x, grad_norm=gnorm,
                 seconds=time.perf_counter() - t_start)
    )
    for k in range(1, config.max_iter + 1):
        if gnorm < config.grad_tol:
            report.converged = True
            report.termination = "gradient_tolerance"
            break

        delta = 0.7 * max_second_derivative(x, model)
        hess0 = make_reduced_hessian(x, model, D, 0.0)
        # symmetric start keeps the Krylov space inside the Hermitian
        # (physical) subspace, where the operator is the true Hessian
        noise = rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(
            lattice.shape
        )
        start = project_mass_zero(lattice.symmetrize(noise)).ravel()[1:]
        mu = choose_mu(hess0, lattice.size - 1, gnorm, config, rng, start=start)
        eta_k = config.tau * min(1.0, gnorm)

        d = None
        pcg_iters = 0
        for _ in range(config.mu_retries + 1):
            A = make_reduced_hessian(x, model, D, mu)
            diag = d_flat + delta + mu
            if np.min(diag) > 0.0:
                M_inv = lambda r, dg=diag: r / dg
            else:
                M_inv = lambda r: r  # preconditioner disabled this step
            d, rnorm, pcg_iters, negcurv = pcg(
                A, -g_red, M_inv, eta_k, config.pcg_max_iter
            )
            if not negcurv:
                break
            mu = max(2.0 * mu, 1e-12)
        else:
            report.termination = "indefinite_hessian"
            break

        slope = _re_dot(g_red, d)
        d_field_a = lift(d, lattice).a
        last: dict = {}

        def eval_at(t: float) -> float:
            cand = FourierField(x.a + t * d_field_a, lattice)
            last["t"], last["field"] = t, cand
            return energy(cand, model, D).total

        try:
            t_step, e_new = armijo_backtrack(
                e_x, slope, eval_at, config.nu, config.rho
            )
        except LineSearchError:
            # Typically means the gradient tolerance sits below the
            # floating-point noise floor of energy differences; keep the
            # current (best) point rather than aborting the run.
            report.termination = "line_search_stall"
            break
        x = last["field"] if last["t"] == t_step else FourierField(
            x.a + t_step * d_field_a, lattice
        )
        e_x = e_new

        g_red = reduced_grad(x)
        gnorm = float(np.sqrt(_re_dot(g_red, g_red)))
        if observer is not None:
            observer(x)
        report.rows.append(
            TraceRow(
                k=k,
                energy=e_x,
                grad_norm=gnorm,
                step=t_step,
                mu=mu,
                pcg_iters=pcg_iters,
                seconds=time.perf_counter() - t_start,
            )
        )
    else:
        if gnorm < config.grad_tol:
            report.converged = True
            report.termination = "gradient_tolerance"
        else:
            report.termination = "max_iterations"

    report.final = x
    report.wall_time = time.perf_counter() - t_start
    return report
