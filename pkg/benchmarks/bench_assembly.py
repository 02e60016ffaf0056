"""Time residual/Jacobian assembly with the numba kernels against the numpy fallback.

    python3 benchmarks/bench_assembly.py [--n 64] [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from minimoose import _accel
from minimoose.fem.assembly import assemble
from minimoose.fem.problem import FEProblem
from minimoose.mesh import build_structured_mesh
from minimoose.systems.bcs import DirichletBC
from minimoose.systems.kernels import Diffusion
from minimoose.systems.materials import ExponentialMaterial, resolve_material_order


def make_problem(n: int) -> FEProblem:
    mesh = build_structured_mesh(2, (n, n), [(0.0, 1.0), (0.0, 1.0)])
    problem = FEProblem(mesh, ["u"])
    mat = ExponentialMaterial("k", {"property": "k", "variable": "u", "rate": 0.5})
    diff = Diffusion("diff", {"variable": "u", "diffusivity": "k"})
    bc = DirichletBC("bc", {"variable": "u", "boundary": ["left", "right"], "value": 0.0})
    for obj in (mat, diff, bc):
        obj.attach(problem)
    problem.materials = [mat]
    problem.material_order = resolve_material_order([mat])
    problem.kernels = [diff]
    problem.nodal_bcs = [bc]
    return problem


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64, help="elements per side")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    problem = make_problem(args.n)
    u = np.random.default_rng(0).uniform(0.0, 1.0, problem.dofmap.n_dofs)
    print(f"{args.n}x{args.n} quads, {problem.dofmap.n_dofs} dofs, numba available: {_accel.USING_NUMBA}")

    # raw scatter kernel
    rng = np.random.default_rng(1)
    index = rng.integers(0, 100_000, size=2_000_000)
    vals = rng.standard_normal(2_000_000)
    out = np.zeros(100_000)
    flavours = [False, True] if _accel.USING_NUMBA else [False]
    for flag in flavours:
        _accel.scatter_add(out, index, vals, use_numba=flag)  # warm up / compile
        t = best_of(lambda: _accel.scatter_add(out, index, vals, use_numba=flag), args.repeat)
        print(f"scatter_add  {'numba' if flag else 'numpy':5s}  {t * 1e3:8.2f} ms")

    results = {}
    for flag in flavours:
        assemble(problem, u, use_numba=flag)
        t = best_of(lambda: assemble(problem, u, use_numba=flag), args.repeat)
        results[flag] = assemble(problem, u, use_numba=flag)
        print(f"assemble     {'numba' if flag else 'numpy':5s}  {t * 1e3:8.2f} ms")
    if len(results) == 2:
        (r0, j0), (r1, j1) = results[False], results[True]
        same = np.array_equal(r0, r1) and np.array_equal(j0.data, j1.data)
        print(f"bitwise identical results: {same}")


if __name__ == "__main__":
    main()
