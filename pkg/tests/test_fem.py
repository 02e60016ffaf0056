import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    block,
    build,
    jacobian_mismatch,
    mesh_block,
    mms_error,
    per_part_residual,
    transient_state,
    variables_block,
)
from minimoose import _accel
from minimoose.fem.assembly import assemble, assemble_residual, parallel_assemble
from minimoose.fem.shape import gauss_rule, reference_gradients, shape_eval, shape_values


def test_segment_center():
    phi, grad = shape_eval("segment", [0.0])
    np.testing.assert_array_equal(phi, [0.5, 0.5])
    np.testing.assert_array_equal(grad[:, 0], [-0.5, 0.5])


def test_quad_kronecker_and_center():
    phi, _ = shape_eval("quad", [-1.0, -1.0])
    np.testing.assert_array_equal(phi, [1, 0, 0, 0])
    phi, _ = shape_eval("quad", [0.0, 0.0])
    np.testing.assert_array_equal(phi, [0.25] * 4)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 2), st.lists(st.floats(-1, 1), min_size=2, max_size=2))
def test_partition_of_unity(dim, xi):
    xi = np.array(xi[:dim])
    assert abs(shape_values(dim, xi).sum() - 1.0) < 1e-14
    assert np.abs(reference_gradients(dim, xi).sum(axis=0)).max() < 1e-14


def test_quadrature_weights_measure():
    assert gauss_rule(1).weights.sum() == pytest.approx(2.0, abs=1e-15)
    assert gauss_rule(2).weights.sum() == pytest.approx(4.0, abs=1e-15)


def test_cubic_exactness_of_two_point_rule():
    r = gauss_rule(1)
    assert np.dot(r.weights, r.points[:, 0] ** 3) == pytest.approx(0.0, abs=1e-15)
    assert np.dot(r.weights, r.points[:, 0] ** 2) == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_physical_gradients_one_over_h():
    app = build(mesh_block(1, 4) + variables_block("u"))
    g = app.problem.volume.grad_phi
    np.testing.assert_allclose(np.abs(g[..., 0]), 4.0, rtol=0, atol=1e-13)


def test_dofmap_bijection():
    app = build(mesh_block(2, 3, 2) + variables_block("a", "b"))
    dm = app.problem.dofmap
    nn = app.problem.mesh.n_nodes
    assert dm.n_dofs == 2 * nn
    dofs = np.concatenate([dm.dof(v, np.arange(nn)) for v in ("a", "b")])
    assert sorted(dofs.tolist()) == list(range(2 * nn))


def diffusion_1d(nx=4, extra=""):
    return build(
        mesh_block(1, nx)
        + variables_block("u")
        + block("Kernels", diff={"type": "Diffusion", "variable": "u"})
        + block(
            "BCs",
            left={"type": "DirichletBC", "variable": "u", "boundary": "left", "value": 1},
            right={"type": "DirichletBC", "variable": "u", "boundary": "right", "value": 3},
        )
        + extra
    )


def test_linear_field_has_zero_interior_residual():
    app = diffusion_1d()
    p = app.problem
    u = 1.0 + 2.0 * p.mesh.nodes[:, 0]
    R = assemble_residual(p, u)
    assert np.abs(R).max() < 1e-14


def test_no_kernels_gives_dirichlet_rows_only(rng):
    app = build(
        mesh_block(1, 4) + variables_block("u") + block("BCs", left={"type": "DirichletBC", "variable": "u", "boundary": "left", "value": 2})
    )
    u = rng.normal(size=5)
    R = assemble_residual(app.problem, u)
    assert R[0] == u[0] - 2.0
    assert (R[1:] == 0).all()


def test_advection_of_linear_field_matches_hand_quadrature():
    n = 2
    app = build(mesh_block(2, n, n) + variables_block("u") + block("Kernels", adv={"type": "Advection", "variable": "u", "velocity": [1, 0]}))
    p = app.problem
    R = assemble_residual(p, p.mesh.nodes[:, 0].copy())
    # integral of a bilinear hat over one element is h^2 / 4
    h = 1.0 / n
    touching = np.zeros(p.mesh.n_nodes)
    np.add.at(touching, p.mesh.elements.ravel(), 1)
    np.testing.assert_allclose(R, touching * h * h / 4, rtol=0, atol=1e-15)


def test_diffusion_stencil():
    app = diffusion_1d()
    J = assemble(app.problem, np.zeros(5))[1].toarray()
    for i in (1, 2, 3):
        np.testing.assert_allclose(J[i, i - 1 : i + 2], [-4, 8, -4], rtol=0, atol=1e-12)
    np.testing.assert_array_equal(J[0], np.eye(5)[0])
    np.testing.assert_array_equal(J[4], np.eye(5)[4])


def test_sparsity_covers_element_couplings():
    app = build(mesh_block(2, 3, 3) + variables_block("a", "b") + block("Kernels", d={"type": "Diffusion", "variable": "a"}))
    p = app.problem
    indptr, indices = p.sparsity
    pattern = {(i, int(j)) for i in range(len(indptr) - 1) for j in indices[indptr[i] : indptr[i + 1]]}
    for dofs in p.dofmap.element_dofs:
        for i in dofs:
            for j in dofs:
                assert (int(i), int(j)) in pattern


def test_linear_problem_jacobian_independent_of_u(rng):
    app = build(
        mesh_block(2, 3, 3)
        + variables_block("u")
        + block(
            "Kernels",
            diff={"type": "Diffusion", "variable": "u", "coef": 2.0},
            adv={"type": "Advection", "variable": "u", "velocity": [0.3, -0.2]},
            react={"type": "Reaction", "variable": "u", "rate": 0.5},
        )
    )
    p = app.problem
    J1 = assemble(p, rng.normal(size=16))[1].toarray()
    J2 = assemble(p, rng.normal(size=16))[1].toarray()
    np.testing.assert_array_equal(J1, J2)


NONLINEAR = (
    mesh_block(2, 3, 3)
    + variables_block("u", "v")
    + block(
        "Materials",
        k={"type": "PolynomialMaterial", "property": "k", "variable": "u", "coefficients": [1, 0, 1]},
        e={"type": "ExponentialMaterial", "property": "e", "variable": "v", "prefactor": 0.5, "rate": 0.3},
        ke={"type": "ProductMaterial", "property": "ke", "factors": ["k", "e"]},
    )
    + block(
        "Kernels",
        du={"type": "Diffusion", "variable": "u", "diffusivity": "ke"},
        dt={"type": "TimeDerivative", "variable": "u"},
        dv={"type": "Diffusion", "variable": "v", "diffusivity": "k"},
        r={"type": "Reaction", "variable": "v"},
    )
    + block(
        "BCs",
        robin={"type": "ConvectiveFluxBC", "variable": "u", "boundary": "right", "coefficient_property": "k", "ambient": 1},
        fixed={"type": "DirichletBC", "variable": "v", "boundary": "left", "value": 0.5},
    )
)


def test_ad_jacobian_matches_fd(rng):
    app = build(NONLINEAR)
    n = app.problem.dofmap.n_dofs
    for _ in range(5):
        u = rng.uniform(-1, 1, n)
        state = transient_state(app.problem, rng.uniform(-1, 1, n))
        assert jacobian_mismatch(app.problem, u, state) < 1e-6


@pytest.mark.parametrize("workers", [1, 2, 4])
def test_threaded_assembly_bitwise(workers, rng, monkeypatch):
    import minimoose.fem.assembly as asm

    monkeypatch.setattr(asm, "CHUNK_SIZE", 4)
    app = build(NONLINEAR.replace("nx = 3", "nx = 6").replace("ny = 3", "ny = 5"))
    p = app.problem
    u = rng.normal(size=p.dofmap.n_dofs)
    state = transient_state(p, np.zeros_like(u))
    R1, J1 = assemble(p, u, state)
    Rw, Jw = assemble(p, u, state, nworkers=workers)
    assert R1.tobytes() == Rw.tobytes()
    assert J1.data.tobytes() == Jw.data.tobytes()
    assert parallel_assemble(p, u, workers, state).tobytes() == R1.tobytes()


def test_parallel_assemble_rejects_zero_workers():
    app = diffusion_1d()
    with pytest.raises(ValueError):
        parallel_assemble(app.problem, np.zeros(5), 0)


@pytest.mark.skipif(not _accel.USING_NUMBA, reason="numba unavailable")
def test_numba_and_numpy_paths_bitwise(rng):
    app = build(NONLINEAR)
    p = app.problem
    u = rng.normal(size=p.dofmap.n_dofs)
    state = transient_state(p, np.zeros_like(u))
    Ra, Ja = assemble(p, u, state, use_numba=True)
    Rb, Jb = assemble(p, u, state, use_numba=False)
    assert Ra.tobytes() == Rb.tobytes()
    assert Ja.data.tobytes() == Jb.data.tobytes()


@pytest.mark.parametrize("nparts", [2, 3, 4])
def test_per_part_assembly_matches_serial(nparts, rng):
    app = build(NONLINEAR.replace("nx = 3", "nx = 5").replace("ny = 3", "ny = 4"))
    p = app.problem
    u = rng.uniform(-1, 1, p.dofmap.n_dofs)
    state = transient_state(p, rng.uniform(-1, 1, p.dofmap.n_dofs))
    serial = assemble(p, u, state, jacobian=False)[0]
    assert np.abs(per_part_residual(p, u, state, nparts) - serial).max() <= 1e-12


def test_nan_residual_reports_element():
    app = build(
        mesh_block(1, 4)
        + variables_block("u")
        + block(
            "Materials",
            k={"type": "ExponentialMaterial", "property": "k", "variable": "u", "rate": 1000.0},
        )
        + block("Kernels", d={"type": "Diffusion", "variable": "u", "diffusivity": "k"})
    )
    u = np.zeros(5)
    u[3] = 1.0
    with np.errstate(over="ignore"):
        assemble_residual(app.problem, u)
    assert "non-finite residual in element 2" in app.problem.diagnostics
    assert "non-finite material property 'k' in element 2" in app.problem.diagnostics


@pytest.mark.slow
def test_mms_convergence_rate():
    errs = [mms_error(n) for n in (8, 16, 32)]
    slope = np.polyfit(np.log([1 / 8, 1 / 16, 1 / 32]), np.log(errs), 1)[0]
    assert abs(slope - 2.0) <= 0.1
