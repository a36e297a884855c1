"""Adaptive accelerated Bregman proximal gradient (AA-BPG) driver.

Each iteration extrapolates, estimates a step size by BB-initialized
backtracking, applies the Bregman prox step, and accepts the candidate only
if it decreases the energy sufficiently; otherwise the iterate is kept and
the extrapolation weight resets to zero. Accepted iterates therefore form a
non-increasing energy trace and stay exactly mass-free.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bregman import BregmanKernel, prox_p2, prox_p4
from .energy import ModelSpec, energy
from .lattice import FourierField, Lattice, project_mass_zero
from .report import SolverReport, TraceRow


@dataclass
class AabpgConfig:
    kernel: BregmanKernel = field(default_factory=lambda: BregmanKernel("P2"))
    c: Optional[float] = None  # restart constant; default 1e-9 * mode count
    eta: Optional[float] = None  # line-search constant; same default
    rho: float = 0.5
    alpha_min: float = 1e-6
    alpha_max: float = 10.0
    alpha0: float = 0.1
    w_max: float = 1.0
    grad_tol: float = 1e-9
    max_iter: int = 20000
    bb_variant: str = "long"  # "long", "short" or "alternating"

    def resolved(self, lattice: Lattice) -> tuple[float, float]:
        scale = 1e-9 * lattice.size
        return (
            self.c if self.c is not None else scale,
            self.eta if self.eta is not None else scale,
        )


def bb_step(
    s: np.ndarray,
    v: np.ndarray,
    alpha_min: float,
    alpha_max: float,
    variant: str = "long",
    k: int = 0,
) -> float:
    """Barzilai-Borwein step from iterate/gradient differences, clipped.

    Degenerate cases (zero movement or nonpositive curvature <s, v>) fall
    back to alpha_max; the line search shrinks from there.
    """
    ss = float(np.real(np.vdot(s, s)))
    sv = float(np.real(np.vdot(s, v)))
    if ss == 0.0 or sv <= 0.0:
        return alpha_max
    if variant == "alternating":
        variant = "long" if k % 2 == 0 else "short"
    if variant == "long":
        alpha = ss / sv
    elif variant == "short":
        vv = float(np.real(np.vdot(v, v)))
        alpha = sv / vv if vv > 0.0 else alpha_max
    else:
        raise ValueError(f"unknown BB variant {variant!r}")
    return float(min(max(alpha, alpha_min), alpha_max))


def nesterov_weight(t_prev: float) -> tuple[float, float]:
    """One step of the t-sequence: returns (t_next, weight (t_prev-1)/t_next)."""
    t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_prev * t_prev))
    return t_next, (t_prev - 1.0) / t_next


def estimate_step(
    y: FourierField,
    e_y: float,
    alpha_init: float,
    prox: Callable[[FourierField, float], FourierField],
    energy_of: Callable[[FourierField], float],
    eta: float,
    rho: float,
    alpha_min: float,
    alpha_max: float,
) -> tuple[float, FourierField, float]:
    """Backtracking step estimation at the extrapolated point.

    Accepts the largest tried alpha with E(y) - E(z) >= eta ||y - z||^2, or
    alpha_min unconditionally once backtracking falls below it.
    """
    alpha = float(min(max(alpha_init, alpha_min), alpha_max))
    while True:
        z = prox(y, alpha)
        e_z = energy_of(z)
        diff = y.a - z.a
        if e_y - e_z >= eta * float(np.real(np.vdot(diff, diff))):
            break
        if alpha <= alpha_min:
            break
        alpha *= rho
        if alpha < alpha_min:
            alpha = alpha_min
    return alpha, z, e_z


def aabpg_run(
    x0: FourierField,
    model: ModelSpec,
    D: np.ndarray,
    config: AabpgConfig,
    switch_test: Optional[Callable[[list[TraceRow]], bool]] = None,
    observer: Optional[Callable[[FourierField], None]] = None,
) -> SolverReport:
    """Run AA-BPG from x0 until the projected gradient norm meets tolerance.

    `switch_test`, if given, is evaluated on the trace after each iteration
    and stops the run early (used by the hybrid driver).  `observer`, if
    given, is called with every iterate, including restarts that keep the
    previous point.
    """
    lattice = x0.lattice
    c_const, eta = config.resolved(lattice)
    kernel = config.kernel
    method = "aabpg2" if kernel.kind == "P2" else "aabpg4"
    report = SolverReport(method=method)
    t_start = time.perf_counter()

    def prox(y: FourierField, alpha: float, grad_f=None) -> FourierField:
        if kernel.kind == "P2":
            return prox_p2(y, alpha, model, D, grad_f=grad_f)
        return prox_p4(y, alpha, model, D, kernel, grad_f=grad_f)

    x = FourierField(project_mass_zero(lattice.symmetrize(x0.a)), lattice)
    x_prev = x
    e_x = energy(x, model, D).total
    gf_x = lattice.to_spectral(model.bulk_dphi(x.samples))  # bulk gradient
    gf_prev = gf_x
    pgrad = project_mass_zero(D * x.a + gf_x)
    gnorm = float(np.linalg.norm(pgrad))
    report.rows.append(
        TraceRow(k=0, energy=e_x, grad_norm=gnorm,
                 seconds=time.perf_counter() - t_start)
    )
    if gnorm < config.grad_tol:
        report.final = x
        report.converged = True
        report.termination = "gradient_tolerance"
        report.wall_time = time.perf_counter() - t_start
        return report

    t_seq = 1.0
    w = 0.0
    for k in range(1, config.max_iter + 1):
        w_used = w
        # extrapolation; sample cache of x/x_prev makes this FFT-free
        if w == 0.0 or x is x_prev:
            y = x
            gf_y = gf_x
            e_y = e_x
        else:
            ya = x.a + w * (x.a - x_prev.a)
            ys = x.samples + w * (x.samples - x_prev.samples)
            y = FourierField(ya, lattice, ys)
            gf_y = lattice.to_spectral(model.bulk_dphi(ys))
            e_y = energy(y, model, D).total

        if k == 1:
            alpha_init = config.alpha0
        else:
            s = x.a - x_prev.a
            v = gf_x - gf_prev
            alpha_init = bb_step(
                s, v, config.alpha_min, config.alpha_max, config.bb_variant, k
            )
        alpha, z, e_z = estimate_step(
            y,
            e_y,
            alpha_init,
            lambda yy, aa: prox(yy, aa, grad_f=gf_y if yy is y else None),
            lambda f: energy(f, model, D).total,
            eta,
            config.rho,
            config.alpha_min,
            config.alpha_max,
        )

        diff = x.a - z.a
        restart = not (e_x - e_z >= c_const * float(np.real(np.vdot(diff, diff))))
        if restart:
            # keep x^{k+1} = x^k bitwise; reset acceleration
            t_seq = 1.0
            w = 0.0
            gdiff = 0.0
        else:
            x_prev = x
            gf_prev = gf_x
            x = z
            e_x = e_z
            gf_x = lattice.to_spectral(model.bulk_dphi(z.samples))
            pgrad_prev = pgrad
            pgrad = project_mass_zero(D * x.a + gf_x)
            gnorm = float(np.linalg.norm(pgrad))
            gdiff = float(np.linalg.norm(pgrad - pgrad_prev))
            t_seq, w = nesterov_weight(t_seq)
            w = min(w, config.w_max)

        if observer is not None:
            observer(x)
        report.rows.append(
            TraceRow(
                k=k,
                energy=e_x,
                grad_norm=gnorm,
                grad_diff=gdiff,
                step=alpha,
                weight=w_used,
                restarted=restart,
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
        if restart and w_used == 0.0 and alpha <= config.alpha_min:
            # No extrapolation, minimal step, and still no acceptable
            # decrease: the next iteration would repeat this one exactly
            # (nothing in the state changes), so stop at the best point.
            report.termination = "stalled"
            break
    else:
        report.termination = "max_iterations"

    report.final = x
    report.wall_time = time.perf_counter() - t_start
    return report
