import os
import shutil
import subprocess
import sys

import pytest

from acdg_figures.render import FigureRequest, RenderError, main, render


def write_contract_fixture(root, dim=1):
    """Minimal run directory obeying the CSV contract."""
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "energy.csv", "w") as f:
        f.write("t,dt,energy,min_u,max_u,newton_iters\n")
        for i, (t, dt, e) in enumerate([(0, 0, 2.0), (0.5, 0.5, 1.5), (1.2, 0.7, 1.1)]):
            f.write(f"{t},{dt},{e},-0.2,{1.0 - 0.1 * i},2\n")
    snapdir = root / "snapshots"
    snapdir.mkdir(exist_ok=True)
    for label, scale in (("0", 1.0), ("1.2", 0.5)):
        with open(snapdir / f"t_{label}.csv", "w") as f:
            f.write(f"# requested_t={label} actual_t={label}\n")
            if dim == 1:
                f.write("x,u\n")
                for i in range(12):
                    f.write(f"{i / 12},{scale * (i % 3 - 1)}\n")
            else:
                f.write("x,y,u\n")
                for i in range(6):
                    for j in range(6):
                        f.write(f"{i / 6},{j / 6},{scale * ((i + j) % 3 - 1)}\n")
    return root


def test_energy_and_steps_render(tmp_path):
    run = write_contract_fixture(tmp_path / "run")
    for kind in ("energy", "steps"):
        out = tmp_path / f"{kind}.png"
        path = render(FigureRequest(str(run), kind, str(out)))
        assert os.path.getsize(path) > 0


def test_profile_waterfall_renders(tmp_path):
    run = write_contract_fixture(tmp_path / "run")
    out = tmp_path / "profile.png"
    render(FigureRequest(str(run), "profile_1d", str(out)))
    assert out.exists()


def test_contour_renders_and_snapshot_selection(tmp_path):
    run = write_contract_fixture(tmp_path / "run", dim=2)
    out = tmp_path / "contour.png"
    render(FigureRequest(str(run), "contour_2d", str(out)))
    assert out.exists()
    render(FigureRequest(str(run), "contour_2d", str(out), snapshot="t_0.csv"))
    with pytest.raises(RenderError, match="t_9.csv"):
        render(FigureRequest(str(run), "contour_2d", str(out), snapshot="t_9.csv"))


def test_contour_of_flat_field(tmp_path):
    run = tmp_path / "run"
    snapdir = run / "snapshots"
    snapdir.mkdir(parents=True)
    with open(snapdir / "t_0.csv", "w") as f:
        f.write("x,y,u\n")
        for i in range(5):
            for j in range(5):
                f.write(f"{i / 5},{j / 5},1.0\n")
    out = tmp_path / "flat.png"
    render(FigureRequest(str(run), "contour_2d", str(out)))
    assert out.exists()


def test_missing_column_diagnostic(tmp_path):
    run = tmp_path / "run"
    run.mkdir()
    (run / "energy.csv").write_text("t,value\n0,1\n")
    with pytest.raises(RenderError, match="'energy'"):
        render(FigureRequest(str(run), "energy", str(tmp_path / "x.png")))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(RenderError, match="unknown figure kind"):
        FigureRequest(str(tmp_path), "sparkline", str(tmp_path / "x.png"))


def test_inputs_unchanged_and_rerender_identical_size(tmp_path):
    run = write_contract_fixture(tmp_path / "run")
    before = {p.name: p.read_bytes() for p in run.rglob("*") if p.is_file()}
    out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
    render(FigureRequest(str(run), "energy", str(out1)))
    render(FigureRequest(str(run), "energy", str(out2)))
    after = {p.name: p.read_bytes() for p in run.rglob("*") if p.is_file()}
    assert before == after
    from PIL import Image
    assert Image.open(out1).size == Image.open(out2).size


def test_cli_roundtrip(tmp_path, capsys):
    run = write_contract_fixture(tmp_path / "run")
    out = tmp_path / "cli.png"
    assert main(["--kind", "energy", "--in", str(run), "--out", str(out)]) == 0
    assert out.exists()
    assert main(["--kind", "energy", "--in", str(tmp_path / "nowhere"),
                 "--out", str(out)]) == 2


@pytest.mark.skipif(shutil.which("acdg") is None,
                    reason="solver CLI not installed in this environment")
def test_all_kinds_from_a_real_1d_run(tmp_path):
    """End-to-end: drive the solver CLI, then render every figure kind."""
    rundir = tmp_path / "run1d"
    cmd = ["acdg", "run", "ex_1d_dw", "--out", str(rundir),
           "--set", "delta_tol=1e-3"]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    for kind in ("energy", "steps", "profile_1d"):
        out = tmp_path / f"real_{kind}.png"
        assert main(["--kind", kind, "--in", str(rundir), "--out", str(out)]) == 0
        assert out.stat().st_size > 0
    # contour needs a 2D run
    rundir2 = tmp_path / "run2d"
    cmd = ["acdg", "run", "ex_2d_dw", "--out", str(rundir2),
           "--set", "t_end=1", "--set", "delta_tol=1e-3",
           "--set", "snapshot_times=0, 1"]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    out = tmp_path / "real_contour.png"
    assert main(["--kind", "contour_2d", "--in", str(rundir2), "--out", str(out)]) == 0
