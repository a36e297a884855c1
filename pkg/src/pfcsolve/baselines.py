"""Semi-implicit reference schemes: SIS, SSIS1 and SSIS2.

All three treat the interaction operator implicitly (a diagonal solve in
Fourier space) and the bulk force explicitly, sharing the mass-zero
projection with the optimization drivers. SIS coincides with a fixed-step
P2 prox step; SSIS1 adds a stabilizing shift S; SSIS2 turns the shift into
a center-difference (two-level) term, which behaves like inertia and may
oscillate at large steps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bregman import prox_p2
from .energy import ModelSpec, energy
from .lattice import FourierField, project_mass_zero
from .report import SolverReport, TraceRow


@dataclass
class BaselineConfig:
    scheme: str = "SIS"  # "SIS", "SSIS1" or "SSIS2"
    alpha: float = 0.1
    S: float = 0.0  # stabilization constant for SSIS1/2
    max_iter: int = 100000
    grad_tol: float = 1e-9

    def __post_init__(self):
        if self.scheme not in ("SIS", "SSIS1", "SSIS2"):
            raise ValueError(f"unknown baseline scheme {self.scheme!r}")
        if self.alpha <= 0.0 or self.S < 0.0:
            raise ValueError("need alpha > 0 and S >= 0")


def sis_step(
    x: FourierField,
    alpha: float,
    model: ModelSpec,
    D: np.ndarray,
    grad_f: np.ndarray | None = None,
) -> FourierField:
    """Semi-implicit step; identical to the P2 prox with fixed alpha."""
    return prox_p2(x, alpha, model, D, grad_f=grad_f)


def ssis1_step(
    x: FourierField,
    alpha: float,
    S: float,
    model: ModelSpec,
    D: np.ndarray,
    grad_f: np.ndarray | None = None,
) -> FourierField:
    """Stabilized step: (I + alpha D + alpha S) x+ = (I + alpha S) x - alpha P1 grad F(x)."""
    lattice = x.lattice
    if grad_f is None:
        grad_f = lattice.to_spectral(model.bulk_dphi(x.samples))
    rhs = (1.0 + alpha * S) * x.a - alpha * project_mass_zero(grad_f)
    out = rhs / (1.0 + alpha * D + alpha * S)
    out[(0,) * out.ndim] = 0.0
    return FourierField(out, lattice)


def ssis2_step(
    x_curr: FourierField,
    x_prev: FourierField,
    alpha: float,
    S: float,
    model: ModelSpec,
    D: np.ndarray,
    grad_f: np.ndarray | None = None,
) -> FourierField:
    """Two-level step with center-difference stabilizer S (x+ - 2x + x-)."""
    lattice = x_curr.lattice
    if grad_f is None:
        grad_f = lattice.to_spectral(model.bulk_dphi(x_curr.samples))
    rhs = (
        x_curr.a
        + alpha * S * (2.0 * x_curr.a - x_prev.a)
        - alpha * project_mass_zero(grad_f)
    )
    out = rhs / (1.0 + alpha * D + alpha * S)
    out[(0,) * out.ndim] = 0.0
    return FourierField(out, lattice)


def baseline_run(
    x0: FourierField,
    model: ModelSpec,
    D: np.ndarray,
    config: BaselineConfig,
    switch_test: Optional[Callable[[list[TraceRow]], bool]] = None,
    observer: Optional[Callable[[FourierField], None]] = None,
) -> SolverReport:
    """Iterate the selected scheme until the gradient tolerance or cap.

    `observer`, if given, is called with every new iterate.
    """
    lattice = x0.lattice
    report = SolverReport(method=config.scheme.lower())
    t_start = time.perf_counter()

    x = FourierField(project_mass_zero(lattice.symmetrize(x0.a)), lattice)
    x_prev = x
    gf = lattice.to_spectral(model.bulk_dphi(x.samples))
    pgrad = project_mass_zero(D * x.a + gf)
    gnorm = float(np.linalg.norm(pgrad))
    report.rows.append(
        TraceRow(k=0, energy=energy(x, model, D).total, grad_norm=gnorm,
                 seconds=time.perf_counter() - t_start)
    )
    if gnorm < config.grad_tol:
        report.final = x
        report.converged = True
        report.termination = "gradient_tolerance"
        report.wall_time = time.perf_counter() - t_start
        return report

    for k in range(1, config.max_iter + 1):
        if config.scheme == "SIS":
            x_new = sis_step(x, config.alpha, model, D, grad_f=gf)
        elif config.scheme == "SSIS1":
            x_new = ssis1_step(x, config.alpha, config.S, model, D, grad_f=gf)
        else:
            x_new = ssis2_step(x, x_prev, config.alpha, config.S, model, D, grad_f=gf)
        x_prev = x
        x = x_new
        gf = lattice.to_spectral(model.bulk_dphi(x.samples))
        pgrad_prev = pgrad
        pgrad = project_mass_zero(D * x.a + gf)
        gnorm = float(np.linalg.norm(pgrad))
        gdiff = float(np.linalg.norm(pgrad - pgrad_prev))
        e_x = energy(x, model, D).total
        if observer is not None:
            observer(x)
        report.rows.append(
            TraceRow(
                k=k,
                energy=e_x,
                grad_norm=gnorm,
                grad_diff=gdiff,
                step=config.alpha,
                seconds=time.perf_counter() - t_start,
            )
        )
        if gnorm < config.grad_tol:
            report.converged = True
            report.termination = "gradient_tolerance"
            break
        if switch_test is not None and len(report.rows) >= 2 and switch_test(report.rows):
            report.termination = "switch"
            break
    else:
        report.termination = "max_iterations"

    report.final = x
    report.wall_time = time.perf_counter() - t_start
    return report
