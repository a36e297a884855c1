"""Discretized energies, gradients and Hessian products for LB/LP models.

The total energy splits as E = G + F: a quadratic interaction part that is
diagonal in Fourier space, and a quartic bulk part evaluated pointwise on
the dealiased physical grid. Both are expressed in the domain-average
convention, so values are directly comparable across grid resolutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import ConfigurationError, Lattice


class NumericalOverflowError(FloatingPointError):
    """Non-finite values encountered during an energy evaluation."""


@dataclass(frozen=True)
class ModelSpec:
    """Physical model: Landau-Brazovskii ("LB") or Lifshitz-Petrich ("LP").

    LB uses (xi, tau, gamma); LP uses (c, q1, q2, eps, kappa). Unused
    parameters for the other model are ignored.
    """

    kind: str
    xi: float = 1.0
    tau: float = 0.0
    gamma: float = 0.0
    c: float = 1.0
    q1: float = 1.0
    q2: float = 2.0
    eps: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.kind not in ("LB", "LP"):
            raise ConfigurationError(f"unknown model kind {self.kind!r}")
        if self.kind == "LB" and self.xi**2 <= 0.0:
            raise ConfigurationError("LB model requires xi^2 > 0")
        if self.kind == "LP":
            if self.c <= 0.0:
                raise ConfigurationError("LP model requires c > 0")
            if self.q1 == self.q2:
                raise ConfigurationError("LP model requires q1 != q2")

    # Bulk densities and their pointwise derivatives.  LB:
    # tau/2 phi^2 - gamma/6 phi^3 + phi^4/24; LP: eps/2 phi^2 - kappa/3 phi^3
    # + phi^4/4.  The derivative factors were validated against central
    # finite differences of the energy before being trusted anywhere else.
    def bulk_density(self, phi: np.ndarray) -> np.ndarray:
        if self.kind == "LB":
            return (
                0.5 * self.tau * phi**2
                - (self.gamma / 6.0) * phi**3
                + phi**4 / 24.0
            )
        return 0.5 * self.eps * phi**2 - (self.kappa / 3.0) * phi**3 + 0.25 * phi**4

    def bulk_dphi(self, phi: np.ndarray) -> np.ndarray:
        if self.kind == "LB":
            return self.tau * phi - 0.5 * self.gamma * phi**2 + phi**3 / 6.0
        return self.eps * phi - self.kappa * phi**2 + phi**3

    def bulk_d2phi(self, phi: np.ndarray) -> np.ndarray:
        if self.kind == "LB":
            return self.tau - self.gamma * phi + 0.5 * phi**2
        return self.eps - 2.0 * self.kappa * phi + 3.0 * phi**2


@dataclass(frozen=True)
class EnergyBreakdown:
    interaction: float
    bulk: float

    @property
    def total(self) -> float:
        return self.interaction + self.bulk


def _check_finite(value: float, what: str) -> None:
    if not np.isfinite(value):
        raise NumericalOverflowError(f"non-finite {what} encountered")


def energy(
    field,
    model: ModelSpec,
    D: np.ndarray,
) -> EnergyBreakdown:
    """Energy E = G + F of a Hermitian Fourier field."""
    G = 0.5 * float(np.sum(D * (field.a.real**2 + field.a.imag**2)))
    F = float(np.mean(model.bulk_density(field.samples)))
    _check_finite(G, "interaction energy")
    _check_finite(F, "bulk energy")
    return EnergyBreakdown(interaction=G, bulk=F)


def bulk_gradient(field, model: ModelSpec):
    """Spectral transform of the pointwise bulk derivative f'(phi)."""
    from .lattice import FourierField

    lattice: Lattice = field.lattice
    deriv = model.bulk_dphi(field.samples)
    grad = lattice.to_spectral(deriv)
    if not np.isfinite(grad.view(float)).all():
        raise NumericalOverflowError("non-finite bulk gradient")
    return FourierField(grad, lattice)


def full_gradient(field, model: ModelSpec, D: np.ndarray):
    """Gradient of E: D * a plus the bulk gradient."""
    from .lattice import FourierField

    g = bulk_gradient(field, model)
    return FourierField(D * field.a + g.a, field.lattice)


def hessian_vec(field, model: ModelSpec, D: np.ndarray, v):
    """Hessian of E at `field` applied to `v` (same lattice)."""
    from .lattice import FourierField

    if v.lattice is not field.lattice and v.lattice.shape != field.lattice.shape:
        raise ConfigurationError("hessian_vec: lattice mismatch")
    lattice: Lattice = field.lattice
    mult = model.bulk_d2phi(field.samples)
    hv = lattice.to_spectral(mult * v.samples)
    return FourierField(D * v.a + hv, lattice)


def max_second_derivative(field, model: ModelSpec) -> float:
    """Max of the bulk second-derivative multiplier over the sample grid."""
    return float(np.max(model.bulk_d2phi(field.samples)))
