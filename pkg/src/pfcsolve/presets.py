"""Named problem presets and initial-condition builders.

A preset bundles a model, a lattice geometry, a bundled seed list for the
initial field, and solver defaults that are known to reach the documented
minimum.  Seed lists live as JSON data files next to this module; each entry
is ``[[h_1, ..., h_n], re, im]`` giving the complex amplitude at integer
index vector h.  Lists are auto-completed under h -> -h with conjugated
amplitudes, so only one representative per conjugate pair is required.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .energy import ModelSpec
from .lattice import (
    ConfigurationError,
    FourierField,
    Lattice,
    LatticeSpec,
    project_mass_zero,
)

SQRT6 = float(np.sqrt(6.0))


@dataclass(frozen=True)
class Preset:
    """A ready-to-run problem definition."""

    name: str
    model: ModelSpec
    lattice: LatticeSpec
    seed_file: str | None = None
    # Hybrid switch thresholds; the inactive one stays at 0.
    eps_energy: float = 0.0
    eps_grad: float = 1e-3
    # Step bound passed to the accelerated solver.
    alpha_max: float = 10.0
    notes: str = ""


def _lb_cubic(name, xi, tau, gamma, n_modes, box_edge, seed_file, **kw):
    b = 2.0 * np.pi / box_edge
    return Preset(
        name=name,
        model=ModelSpec("LB", xi=xi, tau=tau, gamma=gamma),
        lattice=LatticeSpec(
            n=3, d=3, N=(n_modes,) * 3, B=b * np.eye(3), P=np.eye(3)
        ),
        seed_file=seed_file,
        **kw,
    )


def _sigma(name, gamma, notes):
    lx, lz = 27.7884, 14.1514
    B = np.diag([2 * np.pi / lx, 2 * np.pi / lx, 2 * np.pi / lz])
    return Preset(
        name=name,
        model=ModelSpec("LB", xi=1.0, tau=0.01, gamma=gamma),
        lattice=LatticeSpec(n=3, d=3, N=(256, 256, 128), B=B, P=np.eye(3)),
        seed_file="sigma_seeds.json",
        eps_grad=1e-3,
        notes=notes,
    )


def _qc():
    c6, c3 = np.cos(np.pi / 6), np.cos(np.pi / 3)
    s6, s3 = np.sin(np.pi / 6), np.sin(np.pi / 3)
    P = np.array([[1.0, c6, c3, 0.0], [0.0, s6, s3, 1.0]])
    return Preset(
        name="qc",
        model=ModelSpec(
            "LP", c=24.0, q1=1.0, q2=2.0 * np.cos(np.pi / 12), eps=-6.0, kappa=6.0
        ),
        lattice=LatticeSpec(n=4, d=2, N=(38,) * 4, B=np.eye(4), P=P),
        seed_file="qc_seeds.json",
        eps_energy=1e-4,
        eps_grad=0.0,
        notes="dodecagonal quasicrystal via 4-D projection",
    )


def _registry() -> dict[str, Preset]:
    return {
        "dg": _lb_cubic(
            "dg", xi=0.1, tau=-2.0, gamma=2.0, n_modes=128,
            box_edge=2 * SQRT6 * np.pi, seed_file="dg_seeds.json",
            notes="double gyroid network phase",
        ),
        "dg32": _lb_cubic(
            "dg32", xi=0.1, tau=-2.0, gamma=2.0, n_modes=32,
            box_edge=2 * SQRT6 * np.pi, seed_file="dg_seeds.json",
            notes="reduced-resolution double gyroid for quick checks",
        ),
        "sigma": _sigma(
            "sigma", gamma=2.0, notes="Frank-Kasper sigma phase"
        ),
        "sigma-altgamma": _sigma(
            "sigma-altgamma", gamma=-2.0,
            notes="sigma phase with the alternate sign convention for gamma",
        ),
        "qc": _qc(),
        "smoke16": _lb_cubic(
            "smoke16", xi=0.5, tau=-0.3, gamma=1.0, n_modes=16,
            box_edge=2 * np.pi, seed_file=None,
            notes="small random-start problem for fast functional tests",
        ),
    }


def preset_names() -> list[str]:
    return sorted(_registry())


def get_preset(name: str) -> Preset:
    reg = _registry()
    try:
        return reg[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(sorted(reg))}"
        ) from None


def load_seed_entries(seed_file: str) -> list[tuple[tuple[int, ...], complex]]:
    """Read a bundled seed list (JSON) into (index vector, amplitude) pairs."""
    text = resources.files("pfcsolve.data").joinpath(seed_file).read_text()
    raw = json.loads(text)
    return [
        (tuple(int(c) for c in h), complex(re, im)) for h, re, im in raw["entries"]
    ]


def field_from_seeds(
    lattice: Lattice, entries: list[tuple[tuple[int, ...], complex]]
) -> FourierField:
    """Place seed amplitudes, auto-completing conjugate partners.

    Raises if an index vector falls outside the truncation box.  The result
    is projected to mean zero.
    """
    a = lattice.zeros()
    half = [m // 2 for m in lattice.spec.N]
    for h, amp in entries:
        if len(h) != lattice.spec.n:
            raise ConfigurationError(f"seed index {h} has wrong dimension")
        if any(abs(c) > half[j] for j, c in enumerate(h)):
            raise ConfigurationError(f"seed index {h} outside truncation box")
        lattice.set_mode(a, h, amp)
    return FourierField(a=project_mass_zero(a), lattice=lattice)


def random_field(
    lattice: Lattice, rng: np.random.Generator, scale: float = 0.1
) -> FourierField:
    """Small-amplitude random start: Hermitian noise, projected to mean zero."""
    a = scale * (
        rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(lattice.shape)
    )
    a = project_mass_zero(lattice.symmetrize(a))
    return FourierField(a=a, lattice=lattice)


def initial_field(preset: Preset, lattice: Lattice, rng=None) -> FourierField:
    """The preset's bundled seed field, or a seeded random start if none."""
    if preset.seed_file is not None:
        return field_from_seeds(lattice, load_seed_entries(preset.seed_file))
    if rng is None:
        rng = np.random.default_rng(0)
    return random_field(lattice, rng)
