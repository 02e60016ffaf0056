from __future__ import annotations

import sys
import textwrap

import numpy as np
import pytest

from minimoose.fem.assembly import assemble
from minimoose.input.builder import load_input
from minimoose.mesh.partition import compute_ghosts, partition_mesh
from minimoose.input.builder import build_simulation
from minimoose.input.parser import parse_input
from minimoose.solver import TimeState


def build(text, base_dir="."):
    return build_simulation(parse_input(textwrap.dedent(text)), base_dir=base_dir)


def mesh_block(dim=1, nx=4, ny=1):
    if dim == 1:
        return f"[Mesh]\n  dim = 1\n  nx = {nx}\n[]\n"
    return f"[Mesh]\n  dim = 2\n  nx = {nx}\n  ny = {ny}\n[]\n"


def variables_block(*names):
    inner = "".join(f"  [{n}]\n  []\n" for n in names)
    return f"[Variables]\n{inner}[]\n"


def block(name, **objects):
    """Render ``[name]`` holding one sub-block per keyword (a dict of params)."""
    lines = [f"[{name}]"]
    for obj, params in objects.items():
        lines.append(f"  [{obj}]")
        for k, v in params.items():
            if isinstance(v, (list, tuple)):
                v = "'" + " ".join(str(x) for x in v) + "'"
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"    {k} = {v}")
        lines.append("  []")
    lines.append("[]")
    return "\n".join(lines) + "\n"


def fd_jacobian(problem, u, state=None, rel_step=1e-7):
    """Central-difference Jacobian of the assembled residual."""
    n = len(u)
    J = np.zeros((n, n))
    for j in range(n):
        h = rel_step * (1.0 + abs(u[j]))
        up, um = u.copy(), u.copy()
        up[j] += h
        um[j] -= h
        J[:, j] = (assemble(problem, up, state, jacobian=False)[0] - assemble(problem, um, state, jacobian=False)[0]) / (2 * h)
    return J


def jacobian_mismatch(problem, u, state=None):
    """Max |J_ad - J_fd| relative to max |J_ad|."""
    J = assemble(problem, u, state)[1].toarray()
    Jfd = fd_jacobian(problem, u, state)
    return float(np.max(np.abs(J - Jfd)) / max(np.max(np.abs(J)), 1e-300))


def transient_state(problem, u_old, dt=0.1, t=0.1):
    return TimeState(t, dt, 1, np.asarray(u_old, dtype=float))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def mms_error(n):
    """L2 error of the Q1 solution of -lap u = 2 pi^2 sin(pi x) sin(pi y) on an n x n mesh."""
    from minimoose.systems.postprocessors import value_context

    text = (
        mesh_block(2, n, n)
        + variables_block("u")
        + block("Functions", exact={"type": "SineProductFunction"})
        + block(
            "Kernels",
            diff={"type": "Diffusion", "variable": "u"},
            src={"type": "BodyForce", "variable": "u", "value": 2 * np.pi**2, "function": "exact"},
        )
        + block("BCs", walls={"type": "DirichletBC", "variable": "u", "boundary": ["left", "right", "bottom", "top"], "value": 0})
    )
    app = build(text)
    report = app.run()
    assert report.converged
    p = app.problem
    qp = p.volume
    uh = value_context(p, qp, p.u).u("u").val
    exact = np.sin(np.pi * qp.x[..., 0]) * np.sin(np.pi * qp.x[..., 1])
    return float(np.sqrt(np.sum(qp.JxW * (uh - exact) ** 2)))


def nonlinear_diffusion_input(mode="NEWTON", n=8, abs_tol=1e-8, rel_tol=1e-8):
    """Steady -div((1 + u^2) grad u) = 0 on an n x n mesh with u = 0 left, u = 2 right."""
    return (
        mesh_block(2, n, n)
        + variables_block("u")
        + block("Materials", k={"type": "PolynomialMaterial", "property": "k", "variable": "u", "coefficients": [1, 0, 1]})
        + block("Kernels", diff={"type": "Diffusion", "variable": "u", "diffusivity": "k"})
        + block(
            "BCs",
            left={"type": "DirichletBC", "variable": "u", "boundary": "left", "value": 0},
            right={"type": "DirichletBC", "variable": "u", "boundary": "right", "value": 2},
        )
        + f"[Executioner]\n  type = Steady\n  solve_type = {mode}\n  abs_tol = {abs_tol}\n  rel_tol = {rel_tol}\n"
        + "  gmres_rtol = 1e-12\n[]\n"
    )


def loglog_slope(norms, last=3):
    """Slope of log|R_k+1| against log|R_k| over the final ``last`` iterations."""
    r = np.log(np.asarray(norms[-(last + 1):], dtype=float))
    return float(np.polyfit(r[:-1], r[1:], 1)[0])


def example_copy(directory, num_steps=40, checkpoint_interval=10):
    """Copy of the packaged coupled example that runs a fixed number of steps."""
    import shutil
    from pathlib import Path

    from minimoose.driver.cli import example_input

    src = example_input().parent
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    shutil.copy(src / "micro.i", directory / "micro.i")
    text = (src / "parent.i").read_text()
    text = text.replace("  steady_state_detection = true\n", "").replace("  end_time = 400\n", f"  num_steps = {num_steps}\n")
    text = text.replace("  csv = true\n", f"  csv = true\n  checkpoint_interval = {checkpoint_interval}\n")
    (directory / "parent.i").write_text(text)
    return directory / "parent.i"


def per_part_residual(problem, u, state, nparts):
    """Sum of per-part residuals, each part assembling owned plus ghost elements
    but keeping only rows of nodes it owns (lowest adjacent owned-element part)."""
    mesh = problem.mesh
    part = partition_mesh(mesh, nparts)
    ghosts = compute_ghosts(mesh, part, 1)
    node_owner = np.full(mesh.n_nodes, nparts)
    for e, nodes in enumerate(mesh.elements):
        node_owner[nodes] = np.minimum(node_owner[nodes], part.owner[e])
    nvar = len(problem.variables)
    row_owner = np.tile(node_owner, nvar)
    total = np.zeros(problem.dofmap.n_dofs)
    for p in range(nparts):
        elems = np.union1d(part.owned(p), ghosts.ghost_elements[p])
        R = assemble(problem, u, state, jacobian=False, elements=elems)[0]
        total[row_owner == p] += R[row_owner == p]
    return total


def coupled_recovery(tmp_path):
    example = example_copy(tmp_path / "in")
    full = load_input(example)
    full.run(output_dir=tmp_path / "full")
    load_input(example).run(output_dir=tmp_path / "part", halt_after_step=10)
    resumed = load_input(example)
    resumed.run(output_dir=tmp_path / "part", recover_step=10)
    return full, resumed
