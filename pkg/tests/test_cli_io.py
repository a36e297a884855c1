"""Snapshot/trace/summary I/O and the command-line front end."""

import json

import numpy as np
import pytest

from pfcsolve import (
    FourierField,
    LatticeSpec,
    ModelSpec,
    SnapshotError,
    build_lattice,
    energy,
    interaction_diagonal,
    project_mass_zero,
    snapshot_read,
    snapshot_write,
)
from pfcsolve.cli import main
from pfcsolve.presets import field_from_seeds, get_preset, preset_names


def small_lattice(n_modes=6):
    return build_lattice(
        LatticeSpec(n=3, d=3, N=(n_modes,) * 3, B=np.eye(3), P=np.eye(3))
    )


def random_field_on(lat, seed=0):
    rng = np.random.default_rng(seed)
    a = 0.2 * (rng.standard_normal(lat.shape) + 1j * rng.standard_normal(lat.shape))
    return FourierField(project_mass_zero(lat.symmetrize(a)), lat)


class TestSnapshots:
    def test_round_trip_bitwise(self, tmp_path):
        lat = small_lattice()
        x = random_field_on(lat, 1)
        path = tmp_path / "f.snap"
        snapshot_write(path, x)
        back = snapshot_read(path, lat)
        np.testing.assert_array_equal(back.a, x.a)

    def test_read_without_target_lattice(self, tmp_path):
        lat = small_lattice()
        x = random_field_on(lat, 2)
        path = tmp_path / "f.snap"
        snapshot_write(path, x)
        back = snapshot_read(path)
        np.testing.assert_array_equal(back.a, x.a)
        assert back.lattice.shape == lat.shape

    def test_truncated_file_rejected(self, tmp_path):
        lat = small_lattice()
        x = random_field_on(lat, 3)
        path = tmp_path / "f.snap"
        snapshot_write(path, x)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(SnapshotError):
            snapshot_read(path, lat)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "f.snap"
        path.write_bytes(b"JUNK" + b"\x00" * 64)
        with pytest.raises(SnapshotError):
            snapshot_read(path)

    def test_trailing_garbage_rejected(self, tmp_path):
        lat = small_lattice()
        path = tmp_path / "f.snap"
        snapshot_write(path, random_field_on(lat, 4))
        with open(path, "ab") as fh:
            fh.write(b"\x00" * 8)
        with pytest.raises(SnapshotError):
            snapshot_read(path, lat)

    def test_geometry_mismatch_rejected(self, tmp_path):
        lat6 = small_lattice(6)
        lat8 = small_lattice(8)
        path = tmp_path / "f.snap"
        snapshot_write(path, random_field_on(lat6, 5))
        with pytest.raises(SnapshotError):
            snapshot_read(path, lat8)


class TestSeeds:
    def test_empty_seed_list_gives_zero_field(self):
        lat = small_lattice()
        x = field_from_seeds(lat, [])
        assert np.all(x.a == 0.0)

    def test_single_seed_gives_cosine(self):
        lat = small_lattice()
        x = field_from_seeds(lat, [((1, 0, 0), 0.5 + 0.0j)])
        # amplitude at +h and its conjugate at -h; physical max = 2 * 0.5
        assert np.max(x.samples) == pytest.approx(1.0, rel=1e-12)
        assert x.mass() == 0.0

    def test_out_of_box_seed_rejected(self):
        lat = small_lattice()
        with pytest.raises(Exception):
            field_from_seeds(lat, [((7, 0, 0), 0.1 + 0.0j)])

    def test_all_presets_build(self):
        for name in preset_names():
            p = get_preset(name)
            assert p.model.kind in ("LB", "LP")


def smoke_config(tmp_path, **over):
    cfg = {
        "model": {"kind": "LB", "xi": 0.5, "tau": -0.3, "gamma": 1.0},
        "lattice": {
            "n": 3, "d": 3, "N": [8, 8, 8],
            "B": np.eye(3).tolist(), "P": np.eye(3).tolist(),
        },
        "init": {"kind": "random", "scale": 0.1},
        "method": "aabpg2",
        "solver": {"grad_tol": 1e-7, "max_iter": 2000},
        "seed": 7,
    }
    cfg.update(over)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestCli:
    def test_run_writes_artifacts(self, tmp_path):
        cfg = smoke_config(tmp_path)
        out = tmp_path / "out"
        rc = main(["run", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        assert (out / "trace.tsv").exists()
        assert (out / "final.snap").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["converged"] is True
        assert summary["method"] == "aabpg2"
        assert summary["final_energy"] == pytest.approx(
            summary["energy_from_disk"], rel=1e-14
        )

    def test_run_is_deterministic(self, tmp_path):
        cfg = smoke_config(tmp_path)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
            # drop the trailing wall-clock column; everything else is exact
            rows = [
                line.rsplit("\t", 1)[0]
                for line in (out / "trace.tsv").read_text().splitlines()
            ]
            snap = (out / "final.snap").read_bytes()
            outs.append((rows, snap))
        assert outs[0] == outs[1]

    def test_resume_from_snapshot_converges_immediately(self, tmp_path):
        cfg = smoke_config(tmp_path)
        out1 = tmp_path / "first"
        assert main(["run", "--config", str(cfg), "--out", str(out1)]) == 0
        out2 = tmp_path / "second"
        rc = main([
            "resume", "--config", str(cfg), "--out", str(out2),
            str(out1 / "final.snap"),
        ])
        assert rc == 0
        summary = json.loads((out2 / "summary.json").read_text())
        assert summary["iterations"] <= 2

    def test_method_override_and_nonconverged_exit(self, tmp_path):
        cfg = smoke_config(tmp_path, solver={"grad_tol": 1e-12, "max_iter": 3})
        out = tmp_path / "out"
        rc = main(["run", "--config", str(cfg), "--method", "sis", "--out", str(out)])
        assert rc == 3
        summary = json.loads((out / "summary.json").read_text())
        assert summary["method"] == "sis"
        assert summary["converged"] is False

    def test_invalid_config_exits_2_without_artifacts(self, tmp_path, capsys):
        cfg = smoke_config(tmp_path, model={"kind": "XX"})
        out = tmp_path / "out"
        rc = main(["run", "--config", str(cfg), "--out", str(out)])
        assert rc == 2
        assert not out.exists()
        assert "error:" in capsys.readouterr().err

    def test_unknown_method_exits_2(self, tmp_path):
        cfg = smoke_config(tmp_path, method="sor")
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_bench_table(self, tmp_path, capsys):
        cfg = smoke_config(tmp_path)
        out = tmp_path / "bench"
        rc = main([
            "bench", "--config", str(cfg), "--out", str(out),
            "--methods", "aabpg2,hybrid-aabpg2",
        ])
        assert rc == 0
        table = (out / "bench.txt").read_text()
        assert "aabpg2" in table and "hybrid-aabpg2" in table
        assert (out / "trace_aabpg2.tsv").exists()
        assert (out / "trace_hybrid_aabpg2.tsv").exists()

    def test_check_gradients(self, tmp_path):
        cfg = smoke_config(tmp_path)
        rc = main(["check-gradients", "--config", str(cfg), "--directions", "4"])
        assert rc == 0

    def test_trace_columns(self, tmp_path):
        cfg = smoke_config(tmp_path)
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        lines = (out / "trace.tsv").read_text().splitlines()
        header = lines[0].split("\t")
        assert header[0] == "iter" and "energy" in header and "grad_norm" in header
        first = lines[1].split("\t")
        assert int(first[0]) == 0

    def test_snapshot_energy_matches_run(self, tmp_path):
        cfg_path = smoke_config(tmp_path)
        out = tmp_path / "out"
        main(["run", "--config", str(cfg_path), "--out", str(out)])
        summary = json.loads((out / "summary.json").read_text())
        cfg = json.loads(cfg_path.read_text())
        lat = build_lattice(LatticeSpec(
            n=3, d=3, N=tuple(cfg["lattice"]["N"]),
            B=np.asarray(cfg["lattice"]["B"]), P=np.asarray(cfg["lattice"]["P"]),
        ))
        model = ModelSpec(**cfg["model"])
        D = interaction_diagonal(lat, model)
        x = snapshot_read(out / "final.snap", lat)
        assert energy(x, model, D).total == pytest.approx(
            summary["final_energy"], rel=1e-14
        )
