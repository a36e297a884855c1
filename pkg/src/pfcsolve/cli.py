"""Command-line front end: configured runs, resumes, benchmarks, checks.

Subcommands
    run              minimize one configured problem, write artifacts
    resume           continue from a field snapshot
    bench            run several methods on one problem, report a ratio table
    check-gradients  finite-difference validation of gradient/Hessian code

A run is configured either by ``--preset NAME`` or by a JSON file with the
same fields a preset would provide::

    {
      "model":   {"kind": "LB", "xi": 0.1, "tau": -2.0, "gamma": 2.0},
      "lattice": {"n": 3, "d": 3, "N": [32, 32, 32], "B": [[...]], "P": [[...]]},
      "init":    {"kind": "random", "scale": 0.1},
      "method":  "aabpg2",
      "solver":  {"grad_tol": 1e-9, "max_iter": 5000},
      "seed": 0
    }

``init.kind`` is one of "seeds" (entries inline or via "file"), "random",
or "snapshot" (with "path").  Artifacts land in the output directory:
``trace.tsv``, ``final.snap``, ``summary.json``.  Runs are deterministic for
a fixed random seed with single-threaded transforms.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .aabpg import AabpgConfig, aabpg_run
from .baselines import BaselineConfig, baseline_run
from .bregman import BregmanKernel
from .energy import ModelSpec, energy, full_gradient, hessian_vec
from .hybrid import HybridConfig, acceleration_ratio, hybrid_run
from .lattice import (
    ConfigurationError,
    FourierField,
    LatticeSpec,
    build_lattice,
    interaction_diagonal,
    re_dot,
)
from .newton import NewtonConfig, newton_pcg_run
from .presets import (
    Preset,
    field_from_seeds,
    get_preset,
    initial_field,
    load_seed_entries,
    preset_names,
    random_field,
)
from .snapshots import snapshot_read, snapshot_write, summary_write, trace_write

METHODS = ("aabpg2", "aabpg4", "newton", "sis", "ssis1", "ssis2",
           "hybrid-aabpg2", "hybrid-aabpg4", "hybrid-sis")


def _model_from_dict(d: dict) -> ModelSpec:
    return ModelSpec(**d)


def _lattice_from_dict(d: dict) -> LatticeSpec:
    return LatticeSpec(
        n=int(d["n"]), d=int(d["d"]), N=tuple(d["N"]),
        B=np.asarray(d["B"], dtype=float), P=np.asarray(d["P"], dtype=float),
    )


def _solver_config(method: str, opts: dict, preset: Preset | None):
    """Build the nested config object for a method name."""
    opts = dict(opts)
    alpha_max = opts.pop("alpha_max", preset.alpha_max if preset else 10.0)
    if method in ("aabpg2", "aabpg4"):
        kernel = BregmanKernel("P2")
        if method == "aabpg4":
            kernel = BregmanKernel(
                "P4", a=opts.pop("kernel_a", 1.0), b=opts.pop("kernel_b", 1.0)
            )
        return AabpgConfig(kernel=kernel, alpha_max=alpha_max, **opts)
    if method == "newton":
        return NewtonConfig(**opts)
    if method in ("sis", "ssis1", "ssis2"):
        return BaselineConfig(scheme=method.upper(), **opts)
    if method.startswith("hybrid-"):
        inner = method.removeprefix("hybrid-")
        newton_opts = opts.pop("newton", {})
        eps_energy = opts.pop("eps_energy", preset.eps_energy if preset else 0.0)
        eps_grad = opts.pop("eps_grad", preset.eps_grad if preset else 1e-3)
        first = _solver_config(inner, opts, preset)
        return HybridConfig(
            first_stage=first,
            eps_energy=eps_energy,
            eps_grad=eps_grad,
            newton=NewtonConfig(**newton_opts),
        )
    raise ConfigurationError(
        f"unknown method {method!r}; available: {', '.join(METHODS)}"
    )


def _run_method(x0: FourierField, model, D, method: str, config):
    if isinstance(config, HybridConfig):
        return hybrid_run(x0, model, D, config)
    if isinstance(config, AabpgConfig):
        return aabpg_run(x0, model, D, config)
    if isinstance(config, NewtonConfig):
        return newton_pcg_run(x0, model, D, config)
    return baseline_run(x0, model, D, config)


class RunSetup:
    """Everything needed to launch a solver, validated up front."""

    def __init__(self, args, config: dict):
        preset = None
        if args.preset or "preset" in config:
            preset = get_preset(args.preset or config["preset"])
        if "model" in config:
            self.model = _model_from_dict(config["model"])
        elif preset:
            self.model = preset.model
        else:
            raise ConfigurationError("no model: give --preset or a 'model' block")
        if "lattice" in config:
            spec = _lattice_from_dict(config["lattice"])
        elif preset:
            spec = preset.lattice
        else:
            raise ConfigurationError("no lattice: give --preset or a 'lattice' block")
        self.preset = preset
        self.lattice = build_lattice(spec)
        self.D = interaction_diagonal(self.lattice, self.model)
        self.method = args.method or config.get("method", "aabpg2")
        self.seed = args.seed if args.seed is not None else config.get("seed", 0)
        self.config = _solver_config(self.method, config.get("solver", {}), preset)
        self.init_spec = config.get("init")

    def initial(self, snapshot_path=None) -> FourierField:
        if snapshot_path is not None:
            return snapshot_read(snapshot_path, self.lattice)
        spec = self.init_spec
        if spec is None:
            if self.preset is None:
                raise ConfigurationError("no initializer: give 'init' or a preset")
            return initial_field(
                self.preset, self.lattice, np.random.default_rng(self.seed)
            )
        kind = spec.get("kind")
        if kind == "seeds":
            if "file" in spec:
                entries = load_seed_entries(spec["file"])
            else:
                entries = [
                    (tuple(h), complex(re, im)) for h, re, im in spec["entries"]
                ]
            return field_from_seeds(self.lattice, entries)
        if kind == "random":
            rng = np.random.default_rng(self.seed)
            return random_field(self.lattice, rng, scale=spec.get("scale", 0.1))
        if kind == "snapshot":
            return snapshot_read(spec["path"], self.lattice)
        raise ConfigurationError(f"unknown init kind {kind!r}")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _write_artifacts(outdir: Path, report, model, D) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    trace_write(outdir / "trace.tsv", report)
    snapshot_write(outdir / "final.snap", report.final)
    reread = snapshot_read(outdir / "final.snap", report.final.lattice)
    e_disk = energy(reread, model, D).total
    summary_write(outdir / "summary.json", report, extra={"energy_from_disk": e_disk})


def cmd_run(args) -> int:
    setup = RunSetup(args, _load_config(args.config))
    x0 = setup.initial(snapshot_path=getattr(args, "from_snapshot", None))
    report = _run_method(x0, setup.model, setup.D, setup.method, setup.config)
    _write_artifacts(Path(args.out), report, setup.model, setup.D)
    print(
        f"{setup.method}: {report.iterations} iterations, "
        f"E = {report.final_energy:.14f}, |g| = {report.final_grad_norm:.3e}, "
        f"{report.wall_time:.1f}s, {report.termination}"
    )
    return 0 if report.converged else 3


def cmd_bench(args) -> int:
    setup = RunSetup(args, _load_config(args.config))
    methods = args.methods.split(",")
    configs = {m: _solver_config(m, _load_config(args.config).get("solver", {}), setup.preset)
               for m in methods}
    x0 = setup.initial()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    reports = {}
    for m in methods:
        reports[m] = _run_method(x0.copy(), setup.model, setup.D, m, configs[m])
        trace_write(outdir / f"trace_{m.replace('-', '_')}.tsv", reports[m])
    rows = []
    for m, rep in reports.items():
        base = m.removeprefix("hybrid-")
        ratio = ""
        if m.startswith("hybrid-") and base in reports:
            ratio = f"{acceleration_ratio(reports[base], rep):.2f}"
        rows.append((m, rep.iterations, rep.wall_time, rep.final_energy, ratio))
    header = f"{'method':<14} {'iters':>6} {'seconds':>9} {'final_E':>20} {'ratio':>6}"
    lines = [header] + [
        f"{m:<14} {it:>6} {sec:>9.2f} {e:>20.14f} {ratio:>6}"
        for m, it, sec, e, ratio in rows
    ]
    table = "\n".join(lines)
    print(table)
    (outdir / "bench.txt").write_text(table + "\n")
    return 0


def cmd_check_gradients(args) -> int:
    setup = RunSetup(args, _load_config(args.config))
    rng = np.random.default_rng(setup.seed)
    x = random_field(setup.lattice, rng, scale=0.2)
    g = full_gradient(x, setup.model, setup.D).a
    eps, worst_g, worst_h = 1e-6, 0.0, 0.0
    for _ in range(args.directions):
        v = random_field(setup.lattice, rng, scale=1.0).a
        v /= np.linalg.norm(v)
        xp = FourierField(x.a + eps * v, setup.lattice)
        xm = FourierField(x.a - eps * v, setup.lattice)
        de = (energy(xp, setup.model, setup.D).total
              - energy(xm, setup.model, setup.D).total) / (2 * eps)
        worst_g = max(worst_g, abs(de - re_dot(g, v)) / max(1.0, abs(de)))
        hv = hessian_vec(x, setup.model, setup.D, FourierField(v, setup.lattice)).a
        gp = full_gradient(xp, setup.model, setup.D).a
        gm = full_gradient(xm, setup.model, setup.D).a
        fd = (gp - gm) / (2 * eps)
        worst_h = max(
            worst_h, float(np.linalg.norm(hv - fd) / max(1.0, np.linalg.norm(fd)))
        )
    ok = worst_g < 1e-6 and worst_h < 1e-6
    print(f"gradient max rel err {worst_g:.3e}, hessian-vector {worst_h:.3e}: "
          + ("OK" if ok else "FAIL"))
    return 0 if ok else 4


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pfcsolve",
        description="Spectral energy minimization for phase-field-crystal models.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--preset", help=f"preset name ({', '.join(preset_names())})")
        p.add_argument("--method", help=f"solver ({', '.join(METHODS)})")
        p.add_argument("--seed", type=int, default=None, help="random seed")
        p.add_argument("--threads", type=int, default=1, help="FFT worker threads")
        if out:
            p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("run", help="minimize one configured problem")
    common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("resume", help="continue from a field snapshot")
    common(p)
    p.add_argument("from_snapshot", metavar="SNAPSHOT", help="snapshot file")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("bench", help="compare several methods on one problem")
    common(p)
    p.add_argument(
        "--methods", default="aabpg2,hybrid-aabpg2,sis,hybrid-sis",
        help="comma-separated method list",
    )
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("check-gradients", help="finite-difference validation")
    common(p, out=False)
    p.add_argument("--directions", type=int, default=10)
    p.set_defaults(fn=cmd_check_gradients)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with sfft.set_workers(max(1, args.threads)):
            return args.fn(args)
    except (ConfigurationError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
