"""Per-iteration traces and solver reports shared by all drivers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass
class TraceRow:
    k: int
    energy: float
    grad_norm: float
    grad_diff: float = float("inf")  # ||g_k - g_{k-1}|| between iterates
    step: float = 0.0
    weight: float = 0.0
    restarted: bool = False
    mu: float = 0.0
    pcg_iters: int = 0
    seconds: float = 0.0
    phase: str = ""


@dataclass
class SolverReport:
    method: str
    rows: list[TraceRow] = field(default_factory=list)
    final: Optional[object] = None  # FourierField
    converged: bool = False
    termination: str = ""
    wall_time: float = 0.0

    @property
    def iterations(self) -> int:
        return self.rows[-1].k if self.rows else 0

    @property
    def final_energy(self) -> float:
        return self.rows[-1].energy if self.rows else float("nan")

    @property
    def final_grad_norm(self) -> float:
        return self.rows[-1].grad_norm if self.rows else float("nan")

    def extend_phase(self, other: "SolverReport", phase: str) -> None:
        """Append another report's rows with renumbered iterations."""
        offset = self.rows[-1].k if self.rows else 0
        base_t = self.rows[-1].seconds if self.rows else 0.0
        for row in other.rows:
            if row.k == 0 and self.rows:
                continue  # the other phase's starting row restates our last row
            r = TraceRow(**{**row.__dict__})
            r.k = row.k + offset
            r.seconds = row.seconds + base_t
            r.phase = phase
            self.rows.append(r)
