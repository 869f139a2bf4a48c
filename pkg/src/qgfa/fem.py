"""Plane-stress bilinear quadrilateral FEM and the Dirichlet-blocked SPD system.

Dofs are node-major with ``(u_x, u_y)`` interleaved.  ``apply_bcs`` reorders
them as (Dirichlet, Neumann) and keeps the permutation so solutions can be
mapped back onto the mesh.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from .errors import GeometryError, ParameterError, SingularityError, SpdError

_GAUSS_2 = (-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0))


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray  # (n_nodes, 2)
    elements: np.ndarray  # (n_elem, 4), counter-clockwise

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        elements = np.asarray(self.elements, dtype=int).reshape(-1, 4)
        if elements.size and (elements.min() < 0 or elements.max() >= len(nodes)):
            raise GeometryError("element references a node that does not exist")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)

    @property
    def n_dof(self) -> int:
        return 2 * len(self.nodes)


@dataclass(frozen=True)
class Material:
    youngs_modulus: float = 0.2
    poisson_ratio: float = 0.3
    thickness: float = 1.0

    def __post_init__(self):
        if not self.youngs_modulus > 0:
            raise ParameterError("Young's modulus must be positive")
        if not -1.0 < self.poisson_ratio < 0.5:
            raise ParameterError("Poisson ratio must lie in (-1, 0.5)")
        if not self.thickness > 0:
            raise ParameterError("thickness must be positive")

    @property
    def D(self) -> np.ndarray:
        """Plane-stress constitutive matrix."""
        E, nu = self.youngs_modulus, self.poisson_ratio
        return E / (1.0 - nu**2) * np.array(
            [[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, (1.0 - nu) / 2.0]]
        )


@dataclass(frozen=True)
class BcSpec:
    dirichlet: dict[int, float]
    loads: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        clash = set(self.dirichlet) & {k for k, v in self.loads.items() if v != 0.0}
        if clash:
            raise ParameterError(f"dofs {sorted(clash)} carry both a prescribed displacement and a load")


@dataclass(frozen=True, eq=False)
class SpdSystem:
    """Blocked system ``K u = f`` with hot start ``u(0)``.

    ``dof_order[i]`` is the mesh dof stored in slot ``i``; slots beyond
    ``len(dof_order)`` are padding.
    """

    matrix: np.ndarray
    load: np.ndarray
    hot_start: np.ndarray
    spectral_norm: float
    kappa: float
    dof_order: np.ndarray | None = None
    n_dirichlet: int = 0

    @classmethod
    def from_arrays(cls, matrix, load, hot_start=None, **kw) -> "SpdSystem":
        K = np.asarray(matrix, dtype=float)
        f = np.asarray(load, dtype=float).ravel()
        u0 = np.zeros_like(f) if hot_start is None else np.asarray(hot_start, dtype=float).ravel()
        if K.shape != (len(f), len(f)) or u0.shape != f.shape:
            raise ParameterError(f"shape mismatch: K {K.shape}, f {f.shape}, u0 {u0.shape}")
        if not np.allclose(K, K.T, rtol=0, atol=1e-12 * max(1.0, np.abs(K).max())):
            raise SpdError("matrix is not symmetric")
        lam = np.linalg.eigvalsh(K)
        if lam[0] <= 0:
            raise SpdError(f"matrix has non-positive eigenvalue {lam[0]:.3e}")
        return cls(K, f, u0, float(lam[-1]), float(lam[-1] / lam[0]), **kw)

    @property
    def dim(self) -> int:
        return len(self.load)

    @cached_property
    def eig(self):
        """Ascending eigenvalues and orthonormal eigenvectors of ``matrix``."""
        return np.linalg.eigh(self.matrix)

    def to_mesh_dofs(self, u) -> np.ndarray:
        """Scatter a system-ordered vector back to mesh dof ordering."""
        if self.dof_order is None:
            return np.asarray(u)
        out = np.empty(len(self.dof_order))
        out[self.dof_order] = np.asarray(u)[: len(self.dof_order)]
        return out

    def to_json(self) -> dict:
        return {
            "matrix": self.matrix.tolist(),
            "load": self.load.tolist(),
            "hot_start": self.hot_start.tolist(),
            "spectral_norm": self.spectral_norm,
            "kappa": self.kappa,
            "dof_order": None if self.dof_order is None else self.dof_order.tolist(),
            "n_dirichlet": self.n_dirichlet,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SpdSystem":
        order = doc.get("dof_order")
        return cls.from_arrays(
            doc["matrix"], doc["load"], doc.get("hot_start"),
            dof_order=None if order is None else np.asarray(order, dtype=int),
            n_dirichlet=int(doc.get("n_dirichlet", 0)),
        )


def build_mesh_rect(nx: int, ny: int, Lx: float, Ly: float) -> Mesh:
    """Structured ``nx`` x ``ny`` quad grid on ``[0, Lx] x [0, Ly]``."""
    if nx < 1 or ny < 1:
        raise ParameterError("element counts must be >= 1")
    if not (Lx > 0 and Ly > 0):
        raise ParameterError("lengths must be positive")
    xs = np.linspace(0.0, Lx, nx + 1)
    ys = np.linspace(0.0, Ly, ny + 1)
    nodes = np.array([(x, y) for y in ys for x in xs])
    elements = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            elements.append((a, a + 1, a + nx + 2, a + nx + 1))
    return Mesh(nodes, np.array(elements))


def _shape_derivatives(xi, eta):
    return 0.25 * np.array([
        [-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)],
        [-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)],
    ])


def element_stiffness(coords, material: Material) -> np.ndarray:
    """8x8 stiffness of a bilinear quad with 2x2 Gauss quadrature."""
    xy = np.asarray(coords, dtype=float).reshape(4, 2)
    D = material.D
    K = np.zeros((8, 8))
    for xi, eta in product(_GAUSS_2, _GAUSS_2):
        dN = _shape_derivatives(xi, eta)
        J = dN @ xy
        detJ = np.linalg.det(J)
        if detJ <= 1e-14 * max(1.0, np.abs(xy).max() ** 2):
            raise GeometryError(f"non-positive Jacobian determinant {detJ:.3e}")
        dNx = np.linalg.solve(J, dN)
        B = np.zeros((3, 8))
        B[0, 0::2] = dNx[0]
        B[1, 1::2] = dNx[1]
        B[2, 0::2] = dNx[1]
        B[2, 1::2] = dNx[0]
        K += B.T @ D @ B * detJ * material.thickness
    return 0.5 * (K + K.T)


def element_dofs(element) -> np.ndarray:
    return np.ravel([[2 * a, 2 * a + 1] for a in element])


def assemble_global(mesh: Mesh, material: Material) -> np.ndarray:
    n = mesh.n_dof
    K = np.zeros((n, n))
    for element in mesh.elements:
        dofs = element_dofs(element)
        K[np.ix_(dofs, dofs)] += element_stiffness(mesh.nodes[element], material)
    return K


def apply_bcs(K_global, bcs: BcSpec) -> SpdSystem:
    """Block the Dirichlet dofs: ``K = diag(I, K_NN)``, ``f = (u_D, f_N - K_ND u_D)``."""
    K_global = np.asarray(K_global, dtype=float)
    n = len(K_global)
    D = np.array(sorted(bcs.dirichlet), dtype=int)
    if D.size == 0:
        raise SingularityError("no Dirichlet dofs: rigid-body modes are unconstrained")
    if D.min() < 0 or D.max() >= n:
        raise ParameterError("Dirichlet dof index out of range")
    N = np.array([i for i in range(n) if i not in bcs.dirichlet], dtype=int)
    u_D = np.array([bcs.dirichlet[i] for i in D], dtype=float)
    f_N = np.array([bcs.loads.get(int(i), 0.0) for i in N], dtype=float)

    nd = len(D)
    K = np.eye(n)
    f = np.empty(n)
    f[:nd] = u_D
    if N.size:
        K_NN = K_global[np.ix_(N, N)]
        lam = np.linalg.eigvalsh(K_NN)
        if lam[0] <= 1e-12 * max(lam[-1], 1.0):
            raise SingularityError(
                f"free block is singular (min eigenvalue {lam[0]:.3e}); constraints are insufficient"
            )
        K[nd:, nd:] = K_NN
        f[nd:] = f_N - K_global[np.ix_(N, D)] @ u_D
    u0 = np.zeros(n)
    u0[:nd] = u_D
    return SpdSystem.from_arrays(K, f, u0, dof_order=np.concatenate([D, N]), n_dirichlet=nd)


def condition_number(system: SpdSystem) -> float:
    lam = np.linalg.eigvalsh(system.matrix)
    if lam[0] <= 0:
        raise SpdError(f"non-positive eigenvalue {lam[0]:.3e}")
    return float(lam[-1] / lam[0])


def free_block_condition_number(system: SpdSystem) -> float:
    """Condition number of ``K_NN`` alone (without the identity block)."""
    n_phys = system.dim if system.dof_order is None else len(system.dof_order)
    block = system.matrix[system.n_dirichlet:n_phys, system.n_dirichlet:n_phys]
    lam = np.linalg.eigvalsh(block)
    return float(lam[-1] / lam[0])


def reactions(K_global, u_mesh) -> np.ndarray:
    """Nodal forces ``K^G u``; Dirichlet entries are the reactions ``f_D``."""
    return np.asarray(K_global) @ np.asarray(u_mesh)


def pad_to_power_of_two(system: SpdSystem) -> SpdSystem:
    n = system.dim
    size = 1 << max(0, (n - 1).bit_length())
    if size == n:
        return system
    K = np.eye(size)
    K[:n, :n] = system.matrix
    f = np.zeros(size)
    f[:n] = system.load
    u0 = np.zeros(size)
    u0[:n] = system.hot_start
    order = system.dof_order
    return SpdSystem.from_arrays(K, f, u0, dof_order=order, n_dirichlet=system.n_dirichlet)


@dataclass(frozen=True, eq=False)
class FemProblem:
    mesh: Mesh
    material: Material
    bcs: BcSpec

    def stiffness(self) -> np.ndarray:
        return assemble_global(self.mesh, self.material)

    def build(self) -> SpdSystem:
        return apply_bcs(self.stiffness(), self.bcs)

    @classmethod
    def from_json(cls, doc: dict) -> "FemProblem":
        mesh = Mesh(doc["nodes"], doc["elements"])
        material = Material(
            float(doc.get("E", doc.get("youngs_modulus", 0.2))),
            float(doc.get("nu", doc.get("poisson_ratio", 0.3))),
            float(doc.get("thickness", 1.0)),
        )
        bcs = BcSpec(
            {int(k): float(v) for k, v in doc["dirichlet"].items()},
            {int(k): float(v) for k, v in doc.get("loads", {}).items()},
        )
        return cls(mesh, material, bcs)

    def to_json(self) -> dict:
        return {
            "nodes": self.mesh.nodes.tolist(),
            "elements": self.mesh.elements.tolist(),
            "dirichlet": {str(k): v for k, v in self.bcs.dirichlet.items()},
            "loads": {str(k): v for k, v in self.bcs.loads.items()},
            "E": self.material.youngs_modulus,
            "nu": self.material.poisson_ratio,
            "thickness": self.material.thickness,
        }


def _nodes_where(mesh, pred):
    return [i for i, (x, y) in enumerate(mesh.nodes) if pred(x, y)]


def tensile_problem(material: Material | None = None) -> FemProblem:
    """Unit square, 3x3 elements, rollers on x=0 and y=0, u_x=0.1 on x=1."""
    mesh = build_mesh_rect(3, 3, 1.0, 1.0)
    dirichlet = {}
    for i in _nodes_where(mesh, lambda x, y: np.isclose(x, 0.0)):
        dirichlet[2 * i] = 0.0
    for i in _nodes_where(mesh, lambda x, y: np.isclose(y, 0.0)):
        dirichlet[2 * i + 1] = 0.0
    for i in _nodes_where(mesh, lambda x, y: np.isclose(x, 1.0)):
        dirichlet[2 * i] = 0.1
    return FemProblem(mesh, material or Material(), BcSpec(dirichlet))


def cantilever_problem(material: Material | None = None, tip: str = "corner") -> FemProblem:
    """2x1 beam, 3x1 elements, clamped at x=0, u_y=0.1 imposed at x=2.

    ``tip='corner'`` prescribes the displacement at the top-right node only;
    ``tip='edge'`` prescribes it on every node of the x=2 edge.
    """
    mesh = build_mesh_rect(3, 1, 2.0, 1.0)
    dirichlet = {}
    for i in _nodes_where(mesh, lambda x, y: np.isclose(x, 0.0)):
        dirichlet[2 * i] = 0.0
        dirichlet[2 * i + 1] = 0.0
    if tip == "corner":
        tip_nodes = _nodes_where(mesh, lambda x, y: np.isclose(x, 2.0) and np.isclose(y, 1.0))
    elif tip == "edge":
        tip_nodes = _nodes_where(mesh, lambda x, y: np.isclose(x, 2.0))
    else:
        raise ParameterError(f"unknown tip reading {tip!r}")
    for i in tip_nodes:
        dirichlet[2 * i + 1] = 0.1
    return FemProblem(mesh, material or Material(), BcSpec(dirichlet))


def make_tensile_problem() -> SpdSystem:
    return tensile_problem().build()


def make_cantilever_problem() -> SpdSystem:
    return cantilever_problem().build()
