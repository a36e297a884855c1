"""Truncated higher-dimensional Fourier lattices and spectral transforms.

A field is stored as complex amplitudes on the integer index box
{h : |h_j| <= N_j / 2}. Per axis the indices follow FFT ordering
(0, 1, ..., N/2, -N/2, ..., -1) so the flattened position 0 always holds
the h = 0 (mass) amplitude. Wave vectors are k_h = P . B . h; for periodic
crystals P is the identity and the machinery reduces to a plain Fourier
pseudo-spectral method.

Pointwise nonlinearities are evaluated on a padded physical grid with at
least 2x points per axis so that quartic products are alias-free; the
transforms are normalized so the h = 0 coefficient equals the domain
average of the physical samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft as sfft


class ConfigurationError(ValueError):
    """Invalid lattice or model configuration."""


_DET_TOL = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of the truncated reciprocal lattice.

    n: embedding dimension, d: physical dimension, N: per-axis mode counts
    (even), B: n x n invertible reciprocal basis, P: d x n projection matrix.
    """

    n: int
    d: int
    N: tuple[int, ...]
    B: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        P = np.asarray(self.P, dtype=float)
        object.__setattr__(self, "N", tuple(int(m) for m in self.N))
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "P", P)
        if len(self.N) != self.n:
            raise ConfigurationError(f"need {self.n} mode counts, got {len(self.N)}")
        if any(m <= 0 or m % 2 != 0 for m in self.N):
            raise ConfigurationError(f"mode counts must be positive even integers: {self.N}")
        if B.shape != (self.n, self.n):
            raise ConfigurationError(f"B must be {self.n}x{self.n}, got {B.shape}")
        if P.shape != (self.d, self.n):
            raise ConfigurationError(f"P must be {self.d}x{self.n}, got {P.shape}")
        if abs(np.linalg.det(B)) < _DET_TOL:
            raise ConfigurationError("reciprocal basis B is singular")


class Lattice:
    """Index grid, wave vectors and FFT plumbing for a LatticeSpec."""

    def __init__(self, spec: LatticeSpec):
        self.spec = spec
        n = spec.n
        self.shape = tuple(m + 1 for m in spec.N)
        self.size = int(np.prod(self.shape))
        # FFT-style axis indices: 0, 1, ..., N/2, -N/2, ..., -1
        self.axis_indices = [
            np.concatenate([np.arange(0, m // 2 + 1), np.arange(-(m // 2), 0)])
            for m in spec.N
        ]
        grids = np.meshgrid(*self.axis_indices, indexing="ij")
        self.h = np.stack(grids, axis=-1)  # (*shape, n)
        PB = spec.P @ spec.B
        self.k = self.h.reshape(-1, n) @ PB.T
        self.k = self.k.reshape(*self.shape, spec.d)
        self.ksq = np.sum(self.k**2, axis=-1)
        # negation map h -> -h, per axis
        self._rev = tuple((-np.arange(m + 1)) % (m + 1) for m in spec.N)
        # padded physical grid: alias-free for quartic products needs
        # M >= 4 * (N/2) + 1 points per axis
        self.grid_shape = tuple(sfft.next_fast_len(2 * m + 1, real=True) for m in spec.N)
        self.grid_size = int(np.prod(self.grid_shape))
        self._half_shape = self.grid_shape[:-1] + (self.grid_shape[-1] // 2 + 1,)
        # embedding of the h_last >= 0 part of the box into the half spectrum
        pos = [self.axis_indices[j] % self.grid_shape[j] for j in range(n - 1)]
        last_nn = np.arange(spec.N[-1] // 2 + 1)
        self._embed_ix = np.ix_(*pos, last_nn)
        # extraction of the h_last < 0 part via Hermitian mirror
        neg = [(-self.axis_indices[j]) % self.grid_shape[j] for j in range(n - 1)]
        last_neg = np.arange(spec.N[-1] // 2, 0, -1)  # mirrors of -N/2 .. -1
        self._mirror_ix = np.ix_(*neg, last_neg)
        self._nn_count = spec.N[-1] // 2 + 1

    def index_of(self, h: Sequence[int]) -> tuple[int, ...]:
        """Array position of integer index vector h (must lie in the box)."""
        pos = []
        for j, (hj, m) in enumerate(zip(h, self.spec.N)):
            if abs(hj) > m // 2:
                raise ConfigurationError(f"index {tuple(h)} outside truncation box")
            pos.append(int(hj) % (m + 1))
        return tuple(pos)

    def set_mode(self, a: np.ndarray, h: Sequence[int], amp: complex) -> None:
        """Place an amplitude at h and its conjugate at -h, in place."""
        pos = self.index_of(h)
        a[pos] = amp
        neg = self.index_of([-c for c in h])
        if neg != pos:
            a[neg] = np.conj(amp)

    def negate(self, a: np.ndarray) -> np.ndarray:
        """Amplitudes reindexed by h -> -h."""
        return a[np.ix_(*self._rev)]

    def symmetrize(self, a: np.ndarray) -> np.ndarray:
        """Average with the Hermitian conjugate, enforcing a real field."""
        return 0.5 * (a + np.conj(self.negate(a)))

    def to_physical(self, a: np.ndarray) -> np.ndarray:
        """Real-space samples on the padded grid (assumes a Hermitian field)."""
        half = np.zeros(self._half_shape, dtype=complex)
        half[self._embed_ix] = a[..., : self._nn_count]
        return sfft.irfftn(half, s=self.grid_shape, norm="forward")

    def to_spectral(self, samples: np.ndarray) -> np.ndarray:
        """Truncated Fourier amplitudes of real samples on the padded grid."""
        if samples.shape != self.grid_shape:
            raise ConfigurationError(
                f"sample grid {samples.shape} does not match {self.grid_shape}"
            )
        half = sfft.rfftn(samples, norm="forward")
        a = np.empty(self.shape, dtype=complex)
        a[..., : self._nn_count] = half[self._embed_ix]
        a[..., self._nn_count :] = np.conj(half[self._mirror_ix])
        return a

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)


@dataclass
class FourierField:
    """Complex amplitudes on a truncated lattice, with cached samples."""

    a: np.ndarray
    lattice: Lattice
    _samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def samples(self) -> np.ndarray:
        if self._samples is None:
            self._samples = self.lattice.to_physical(self.a)
        return self._samples

    def copy(self) -> "FourierField":
        return FourierField(self.a.copy(), self.lattice, self._samples)

    def norm(self) -> float:
        return float(np.linalg.norm(self.a))

    def mass(self) -> complex:
        return complex(self.a[(0,) * self.lattice.spec.n])


def build_lattice(spec: LatticeSpec) -> Lattice:
    """Build the index grid and wave vectors for a lattice specification."""
    return Lattice(spec)


def interaction_diagonal(grid: Lattice, model) -> np.ndarray:
    """Nonnegative diagonal of the interaction Hessian in Fourier space."""
    ksq = grid.ksq
    if model.kind == "LB":
        return model.xi**2 * (1.0 - ksq) ** 2
    if model.kind == "LP":
        return model.c * (model.q1**2 - ksq) ** 2 * (model.q2**2 - ksq) ** 2
    raise ConfigurationError(f"unknown model kind {model.kind!r}")


def project_mass_zero(a: np.ndarray) -> np.ndarray:
    """Zero the h = 0 amplitude, leaving all others unchanged."""
    out = a.copy()
    out[(0,) * out.ndim] = 0.0
    return out


def re_dot(u: np.ndarray, v: np.ndarray) -> float:
    """Real inner product Re <u, v> on complex amplitude arrays."""
    return float(np.real(np.vdot(u, v)))
