"""Binary field snapshots, trace tables, and run summaries.

Snapshot layout (little-endian throughout):

    bytes 0..3    magic b"PFCF"
    uint32        format version (currently 1)
    uint32        n   (embedding dimension)
    uint32        d   (physical dimension)
    uint32 * n    N   (truncation box sizes, all even)
    float64 * n*n B, row-major
    float64 * d*n P, row-major
    float64 * 2M  amplitudes, interleaved (real, imag) in storage order

where M is the number of retained modes, prod(N_j + 1) over the full box
with the last axis halved by Hermitian symmetry.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .lattice import FourierField, Lattice, LatticeSpec, build_lattice
from .report import SolverReport

SNAPSHOT_MAGIC = b"PFCF"
SNAPSHOT_VERSION = 1


class SnapshotError(IOError):
    """Raised when a snapshot file is corrupt or incompatible."""


def snapshot_write(path, field: FourierField) -> None:
    """Serialize a spectral field together with its lattice geometry."""
    lat = field.lattice
    spec = lat.spec
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<3I", SNAPSHOT_VERSION, spec.n, spec.d))
        fh.write(struct.pack(f"<{spec.n}I", *spec.N))
        fh.write(np.asarray(spec.B, dtype="<f8").tobytes(order="C"))
        fh.write(np.asarray(spec.P, dtype="<f8").tobytes(order="C"))
        flat = np.ascontiguousarray(field.a).ravel()
        inter = np.empty(2 * flat.size, dtype="<f8")
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def _read_exact(fh, count: int, what: str) -> bytes:
    buf = fh.read(count)
    if len(buf) != count:
        raise SnapshotError(f"truncated snapshot while reading {what}")
    return buf


def snapshot_read(path, lattice: Lattice | None = None) -> FourierField:
    """Load a snapshot; if ``lattice`` is given, validate geometry against it.

    Without a lattice the geometry stored in the file is used to build one.
    """
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != SNAPSHOT_MAGIC:
            raise SnapshotError(f"bad magic {magic!r}, not a field snapshot")
        version, n, d = struct.unpack("<3I", _read_exact(fh, 12, "header"))
        if version != SNAPSHOT_VERSION:
            raise SnapshotError(f"unsupported snapshot version {version}")
        if not (1 <= d <= n <= 16):
            raise SnapshotError(f"implausible dimensions n={n}, d={d}")
        N = struct.unpack(f"<{n}I", _read_exact(fh, 4 * n, "box sizes"))
        B = np.frombuffer(
            _read_exact(fh, 8 * n * n, "lattice matrix"), dtype="<f8"
        ).reshape(n, n)
        P = np.frombuffer(
            _read_exact(fh, 8 * d * n, "projection matrix"), dtype="<f8"
        ).reshape(d, n)
        if lattice is not None:
            spec = lattice.spec
            if (spec.n, spec.d, tuple(spec.N)) != (n, d, tuple(N)):
                raise SnapshotError(
                    f"snapshot geometry n={n}, d={d}, N={tuple(N)} does not "
                    f"match target lattice N={tuple(spec.N)}"
                )
            if not (np.array_equal(spec.B, B) and np.array_equal(spec.P, P)):
                raise SnapshotError("snapshot B/P matrices differ from target lattice")
            lat = lattice
        else:
            lat = build_lattice(LatticeSpec(n=n, d=d, N=tuple(N), B=B, P=P))
        count = int(np.prod(lat.shape))
        inter = np.frombuffer(
            _read_exact(fh, 16 * count, "amplitudes"), dtype="<f8"
        )
        if fh.read(1):
            raise SnapshotError("trailing bytes after amplitude block")
    a = (inter[0::2] + 1j * inter[1::2]).reshape(lat.shape)
    return FourierField(a=a, lattice=lat)


TRACE_COLUMNS = (
    "iter",
    "phase",
    "energy",
    "grad_norm",
    "grad_diff",
    "step",
    "weight",
    "restarted",
    "mu",
    "pcg_iters",
    "seconds",
)


def trace_write(path, report: SolverReport) -> None:
    """Write the per-iteration trace as tab-separated text with a header."""
    with open(path, "w") as fh:
        fh.write("\t".join(TRACE_COLUMNS) + "\n")
        for r in report.rows:
            fh.write(
                f"{r.k}\t{r.phase}\t{r.energy:.17g}\t{r.grad_norm:.17g}\t"
                f"{r.grad_diff:.17g}\t{r.step:.17g}\t{r.weight:.17g}\t"
                f"{int(r.restarted)}\t{r.mu:.17g}\t{r.pcg_iters}\t"
                f"{r.seconds:.6f}\n"
            )


def summary_dict(report: SolverReport) -> dict:
    return {
        "method": report.method,
        "iterations": report.iterations,
        "final_energy": report.final_energy,
        "final_grad_norm": report.final_grad_norm,
        "converged": report.converged,
        "termination": report.termination,
        "wall_time_seconds": report.wall_time,
    }


def summary_write(path, report: SolverReport, extra: dict | None = None) -> None:
    data = summary_dict(report)
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
