import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgfa.errors import GeometryError, ParameterError, SingularityError, SpdError
from qgfa.fem import (
    BcSpec, FemProblem, Material, Mesh, SpdSystem, apply_bcs, assemble_global, build_mesh_rect,
    cantilever_problem, condition_number, element_dofs, element_stiffness,
    free_block_condition_number, make_cantilever_problem, make_tensile_problem,
    pad_to_power_of_two, reactions, tensile_problem,
)
from qgfa.flow import solve_direct

from oracles import quad_stiffness_gauss

UNIT = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def rigid_modes(coords):
    tx = np.tile([1.0, 0.0], 4)
    ty = np.tile([0.0, 1.0], 4)
    rot = np.column_stack([-coords[:, 1], coords[:, 0]]).ravel()
    return tx, ty, rot


@pytest.mark.parametrize("args,nodes,elems", [((3, 3, 1, 1), 16, 9), ((1, 1, 1, 1), 4, 1), ((3, 1, 2, 1), 8, 3)])
def test_mesh_counts(args, nodes, elems):
    mesh = build_mesh_rect(*args)
    assert len(mesh.nodes) == nodes and len(mesh.elements) == elems


def test_mesh_is_counter_clockwise():
    mesh = build_mesh_rect(3, 2, 3.0, 2.0)
    for el in mesh.elements:
        xy = mesh.nodes[el]
        area2 = np.sum(xy[:, 0] * np.roll(xy[:, 1], -1) - np.roll(xy[:, 0], -1) * xy[:, 1])
        assert area2 > 0


@pytest.mark.parametrize("args", [(0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, -2)])
def test_mesh_rejects_bad_args(args):
    with pytest.raises(ParameterError):
        build_mesh_rect(*args)


def test_mesh_rejects_bad_indices():
    with pytest.raises(GeometryError):
        Mesh(UNIT, [[0, 1, 2, 7]])


def test_element_matches_4x4_gauss_oracle():
    K = element_stiffness(UNIT, Material(0.2, 0.3))
    np.testing.assert_allclose(K, quad_stiffness_gauss(UNIT, 0.2, 0.3), rtol=0, atol=1e-15)
    skew = np.array([[0.0, 0.0], [2.0, 0.3], [2.4, 1.7], [-0.2, 1.1]])
    np.testing.assert_allclose(element_stiffness(skew, Material(1.0, 0.25, 0.5)),
                               quad_stiffness_gauss(skew, 1.0, 0.25, 0.5, order=2), rtol=1e-12, atol=1e-15)


def test_element_rigid_modes_and_rank():
    K = element_stiffness(UNIT, Material())
    assert np.allclose(K, K.T, atol=1e-16)
    for mode in rigid_modes(UNIT):
        assert np.max(np.abs(K @ mode)) <= 1e-12
    lam = np.linalg.eigvalsh(K)
    assert np.sum(lam < 1e-12 * lam[-1]) == 3
    assert np.linalg.matrix_rank(K) == 5


@given(st.floats(0.1, 5), st.floats(-0.9, 0.49))
def test_element_psd_any_material(E, nu):
    K = element_stiffness(UNIT * 0.7, Material(E, nu))
    assert np.linalg.eigvalsh(K)[0] >= -1e-12 * E


def test_element_geometry_errors():
    with pytest.raises(GeometryError):
        element_stiffness(UNIT[::-1], Material())  # clockwise
    with pytest.raises(GeometryError):
        element_stiffness(np.array([[0, 0], [1, 0], [2, 0], [3, 0]], float), Material())


def test_material_validation():
    for bad in [dict(youngs_modulus=0), dict(poisson_ratio=0.5), dict(poisson_ratio=-1), dict(thickness=0)]:
        with pytest.raises(ParameterError):
            Material(**bad)


def test_one_element_global_is_element():
    mesh = build_mesh_rect(1, 1, 1, 1)
    dofs = element_dofs(mesh.elements[0])
    K = assemble_global(mesh, Material())
    np.testing.assert_array_equal(K[np.ix_(dofs, dofs)], element_stiffness(UNIT, Material()))


def test_global_energy_identity(rng):
    mesh = build_mesh_rect(3, 3, 1, 1)
    mat = Material()
    K = assemble_global(mesh, mat)
    assert np.max(np.abs(K - K.T)) <= 1e-12 * np.linalg.norm(K, 2)
    u = rng.normal(size=mesh.n_dof)
    total = sum(u[element_dofs(el)] @ element_stiffness(mesh.nodes[el], mat) @ u[element_dofs(el)]
                for el in mesh.elements)
    assert u @ K @ u == pytest.approx(total, rel=1e-12)


def test_patch_test_uniform_strain():
    mesh = build_mesh_rect(3, 2, 1.5, 1.0)
    mat = Material()
    K = assemble_global(mesh, mat)
    a, b, c = 0.01, -0.02, 0.005
    u = np.column_stack([a * mesh.nodes[:, 0] + c * mesh.nodes[:, 1], b * mesh.nodes[:, 1]]).ravel()
    forces = (K @ u).reshape(-1, 2)
    x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
    interior = (x > 0) & (x < 1.5) & (y > 0) & (y < 1.0)
    # uniform stress: interior nodes are in equilibrium, boundary forces sum to zero
    assert np.max(np.abs(forces[interior])) <= 1e-10
    assert np.max(np.abs(forces.sum(axis=0))) <= 1e-12
    # boundary tractions equal stress times edge length on the x = Lx edge
    sigma = mat.D @ np.array([a, b, c])
    right = np.isclose(x, 1.5)
    assert forces[right, 0].sum() == pytest.approx(sigma[0] * 1.0, rel=1e-10)


def test_fully_dirichlet_problem():
    mesh = build_mesh_rect(1, 1, 1, 1)
    ud = {i: 0.01 * i for i in range(8)}
    system = apply_bcs(assemble_global(mesh, Material()), BcSpec(ud))
    np.testing.assert_array_equal(system.matrix, np.eye(8))
    np.testing.assert_allclose(system.to_mesh_dofs(solve_direct(system)), [0.01 * i for i in range(8)])


def test_blocked_structure_and_neumann_oracle(tensile):
    prob = tensile_problem()
    K_g = prob.stiffness()
    D = np.array(sorted(prob.bcs.dirichlet))
    N = np.array([i for i in range(K_g.shape[0]) if i not in prob.bcs.dirichlet])
    u_D = np.array([prob.bcs.dirichlet[i] for i in D])
    nd = len(D)
    np.testing.assert_array_equal(tensile.matrix[:nd, :nd], np.eye(nd))
    assert np.all(tensile.matrix[:nd, nd:] == 0)
    np.testing.assert_array_equal(tensile.hot_start[:nd], u_D)
    assert np.all(tensile.hot_start[nd:] == 0)
    u = solve_direct(tensile)
    u_N = np.linalg.solve(K_g[np.ix_(N, N)], -K_g[np.ix_(N, D)] @ u_D)
    np.testing.assert_allclose(u[nd:], u_N, rtol=1e-12, atol=1e-14)
    np.testing.assert_array_equal(u[:nd], u_D)


def test_reactions_balance(tensile, cantilever):
    for prob, system in ((tensile_problem(), tensile), (cantilever_problem(), cantilever)):
        K_g = prob.stiffness()
        u_mesh = system.to_mesh_dofs(solve_direct(system))
        r = reactions(K_g, u_mesh).reshape(-1, 2)
        assert np.max(np.abs(r.sum(axis=0))) <= 1e-10
        free = [i for i in range(K_g.shape[0]) if i not in prob.bcs.dirichlet]
        assert np.max(np.abs(reactions(K_g, u_mesh)[free])) <= 1e-10


def test_insufficient_constraints():
    mesh = build_mesh_rect(1, 1, 1, 1)
    with pytest.raises(SingularityError):
        apply_bcs(assemble_global(mesh, Material()), BcSpec({0: 0.0}))
    with pytest.raises(SingularityError):
        apply_bcs(assemble_global(mesh, Material()), BcSpec({}))


def test_bc_spec_rejects_clash():
    with pytest.raises(ParameterError):
        BcSpec({0: 0.0}, {0: 1.0})


def test_condition_numbers(tensile, cantilever):
    assert tensile.dim == 32 and cantilever.dim == 16
    assert tensile.kappa == pytest.approx(32.136, rel=1e-2)
    assert cantilever.kappa == pytest.approx(37.018, rel=1e-2)
    assert condition_number(tensile) == pytest.approx(tensile.kappa, rel=1e-12)
    # the free block alone gives a different number; the blocked matrix is the reference
    assert free_block_condition_number(tensile) == pytest.approx(21.0137, rel=1e-4)


def test_edge_reading_of_cantilever_misses():
    kappa = cantilever_problem(tip="edge").build().kappa
    assert abs(kappa / 37.018 - 1) > 0.01
    with pytest.raises(ParameterError):
        cantilever_problem(tip="middle")


def test_make_helpers(tensile, cantilever):
    np.testing.assert_array_equal(make_tensile_problem().matrix, tensile.matrix)
    np.testing.assert_array_equal(make_cantilever_problem().load, cantilever.load)
    for system in (tensile, cantilever):
        nz = np.nonzero(system.hot_start)[0]
        assert set(nz) <= set(range(system.n_dirichlet))


def test_condition_number_identity_and_spd_error():
    assert condition_number(SpdSystem.from_arrays(np.eye(3), np.ones(3))) == 1.0
    with pytest.raises(SpdError):
        SpdSystem.from_arrays(np.diag([1.0, -1.0]), np.ones(2))
    with pytest.raises(SpdError):
        SpdSystem.from_arrays(np.array([[1.0, 0.5], [0.0, 1.0]]), np.ones(2))


def test_padding(rng):
    A = rng.normal(size=(6, 6))
    K = A @ A.T / 10 + np.eye(6) * 0.5
    system = SpdSystem.from_arrays(K, rng.normal(size=6), rng.normal(size=6))
    padded = pad_to_power_of_two(system)
    assert padded.dim == 8
    u = solve_direct(padded)
    np.testing.assert_allclose(u[:6], np.linalg.solve(K, system.load), rtol=1e-12, atol=1e-12)
    assert np.all(u[6:] == 0) and np.all(padded.hot_start[6:] == 0)
    lam = np.linalg.eigvalsh(padded.matrix)
    assert padded.kappa == pytest.approx(lam[-1] / lam[0], rel=1e-12)


def test_padding_identity_for_power_of_two(cantilever):
    assert pad_to_power_of_two(cantilever) is cantilever


def test_json_roundtrips(tmp_path, tensile):
    prob = tensile_problem()
    doc = json.loads(json.dumps(prob.to_json()))
    again = FemProblem.from_json(doc).build()
    np.testing.assert_array_equal(again.matrix, tensile.matrix)
    sdoc = json.loads(json.dumps(tensile.to_json()))
    s2 = SpdSystem.from_json(sdoc)
    np.testing.assert_array_equal(s2.matrix, tensile.matrix)
    np.testing.assert_array_equal(s2.dof_order, tensile.dof_order)
    assert s2.kappa == tensile.kappa
