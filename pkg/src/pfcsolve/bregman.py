"""Bregman kernels and constrained prox subproblem solvers.

Two strongly convex kernels are supported: the Euclidean one
h(x) = ||x||^2 / 2 ("P2"), whose prox step has a closed form, and the
quartic h(x) = a ||x||^4 / 4 + b ||x||^2 / 2 + 1 ("P4"), whose prox step
reduces to a scalar fixed-point problem for the squared norm of the output.
Both prox solvers keep the h = 0 amplitude exactly zero whenever the input
point is mass-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import ModelSpec, bulk_gradient
from .lattice import FourierField, project_mass_zero, re_dot


class FixedPointError(RuntimeError):
    """The scalar radius equation failed to converge."""


@dataclass(frozen=True)
class BregmanKernel:
    """Kernel choice: kind "P2" (modulus 1) or "P4" with coefficients a, b > 0."""

    kind: str
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("P2", "P4"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "P4" and (self.a <= 0.0 or self.b <= 0.0):
            raise ValueError("P4 kernel requires a, b > 0")

    @property
    def modulus(self) -> float:
        """Strong convexity modulus sigma."""
        return 1.0 if self.kind == "P2" else self.b

    def value(self, x: np.ndarray) -> float:
        nsq = float(np.vdot(x, x).real)
        if self.kind == "P2":
            return 0.5 * nsq
        return 0.25 * self.a * nsq**2 + 0.5 * self.b * nsq + 1.0

    def grad(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "P2":
            return x
        nsq = float(np.vdot(x, x).real)
        return (self.a * nsq + self.b) * x


def bregman_divergence(kernel: BregmanKernel, x: np.ndarray, y: np.ndarray) -> float:
    """D_h(x, y) = h(x) - h(y) - Re<grad h(y), x - y>; nonnegative."""
    return kernel.value(x) - kernel.value(y) - re_dot(kernel.grad(y), x - y)


def prox_p2(
    psi: FourierField,
    alpha: float,
    model: ModelSpec,
    D: np.ndarray,
    grad_f: np.ndarray | None = None,
) -> FourierField:
    """Closed-form P2 prox: (I + alpha D)^{-1} (psi - alpha P1 grad F(psi)).

    `grad_f` may pass a precomputed bulk gradient of psi (line searches
    reuse it across trial step sizes).
    """
    if alpha <= 0.0:
        raise ValueError("prox step size must be positive")
    if grad_f is None:
        grad_f = bulk_gradient(psi, model).a
    rhs = psi.a - alpha * project_mass_zero(grad_f)
    out = rhs / (1.0 + alpha * D)
    out[(0,) * out.ndim] = 0.0
    return FourierField(out, psi.lattice)


def solve_radius_fixed_point(
    beta: np.ndarray,
    D: np.ndarray,
    alpha: float,
    a: float,
    b: float,
    max_iter: int = 200,
) -> float:
    """Unique nonnegative root of R(p) = ||[alpha D + (a p + b) I]^{-1} beta||^2 - p.

    R(0) >= 0 and R is strictly decreasing, so the root lies in [0, r(0)].
    Safeguarded Newton with a bisection fallback on that bracket.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("P4 kernel requires a, b > 0")
    bsq = (beta.real**2 + beta.imag**2).ravel()
    dd = alpha * np.asarray(D, dtype=float).ravel()

    def r_and_slope(p: float) -> tuple[float, float]:
        denom = dd + (a * p + b)
        r = float(np.sum(bsq / denom**2))
        slope = -2.0 * a * float(np.sum(bsq / denom**3)) - 1.0
        return r, slope

    r0, _ = r_and_slope(0.0)
    if r0 == 0.0:
        return 0.0
    lo, hi = 0.0, r0
    p = 0.5 * (lo + hi)
    for _ in range(max_iter):
        r, slope = r_and_slope(p)
        res = r - p
        if abs(res) < 1e-14 * (1.0 + p):
            return p
        if res > 0.0:
            lo = p
        else:
            hi = p
        p_new = p - res / slope
        if not (lo < p_new < hi):
            p_new = 0.5 * (lo + hi)
        p = p_new
    r, _ = r_and_slope(p)
    if abs(r - p) < 1e-13 * (1.0 + p):
        return p
    raise FixedPointError(f"radius fixed point stalled at residual {r - p:.3e}")


def prox_p4(
    psi: FourierField,
    alpha: float,
    model: ModelSpec,
    D: np.ndarray,
    kernel: BregmanKernel,
    grad_f: np.ndarray | None = None,
) -> FourierField:
    """P4 prox: [alpha D + (a p* + b) I]^{-1} (grad h(psi) - alpha P1 grad F(psi))."""
    if alpha <= 0.0:
        raise ValueError("prox step size must be positive")
    if kernel.kind != "P4":
        raise ValueError("prox_p4 requires a P4 kernel")
    if grad_f is None:
        grad_f = bulk_gradient(psi, model).a
    beta = kernel.grad(psi.a) - alpha * project_mass_zero(grad_f)
    p_star = solve_radius_fixed_point(beta, D, alpha, kernel.a, kernel.b)
    out = beta / (alpha * D + (kernel.a * p_star + kernel.b))
    out[(0,) * out.ndim] = 0.0
    return FourierField(out, psi.lattice)
