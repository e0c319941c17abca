"""Global assembly of bulk contributions and the sparse linear solve."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .kernels import bulk_kernel
from .material import NEARLY_INCOMPRESSIBLE, ElementInversionError, Material
from .mesh import Mesh, gauss_2d, shape_functions


class SingularSystemError(RuntimeError):
    pass


def _reference_gradients(X: np.ndarray, conn: np.ndarray, etype: str, order: int):
    """dN/dX (ne, ng, nen, 2) and w det J (ne, ng) for a tensor Gauss rule."""
    P, W = gauss_2d(order)
    Xe = X[conn]
    dNdX = np.empty((len(conn), len(W), conn.shape[1], 2))
    wdet = np.empty((len(conn), len(W)))
    for g, ((r, s), w) in enumerate(zip(P, W)):
        _, dN = shape_functions(etype, r, s)
        J = np.einsum("eai,aj->eij", Xe, dN)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        if np.any(det <= 0):
            raise ElementInversionError(int(np.flatnonzero(det <= 0)[0]), float(det.min()))
        Jinv = np.linalg.inv(J)
        dNdX[:, g] = np.einsum("aj,eji->eai", dN, Jinv)
        wdet[:, g] = w * det
    return dNdX, wdet


class BulkOperator:
    """Internal force, tangent and stored energy of one body.

    ``offset`` is the index of the body's first node in the global node list.
    """

    def __init__(self, mesh: Mesh, material: Material, offset: int = 0):
        self.mesh = mesh
        self.material = material
        self.offset = offset
        full = 2 if mesh.etype == "Q1" else 3
        self.split = material.variant == NEARLY_INCOMPRESSIBLE
        self.dNdX, self.wdet = _reference_gradients(mesh.nodes, mesh.elements, mesh.etype, full)
        if self.split:
            self.dNdXv, self.wdetv = _reference_gradients(mesh.nodes, mesh.elements, mesh.etype, full - 1)
        else:
            self.dNdXv, self.wdetv = self.dNdX[:, :0], self.wdet[:, :0]
        ne, nen = mesh.elements.shape
        dofs = 2 * (mesh.elements + offset)[:, :, None] + np.arange(2)
        self.edofs = dofs.reshape(ne, 2 * nen)
        self.rows = np.repeat(self.edofs, 2 * nen, axis=1).ravel()
        self.cols = np.tile(self.edofs, (1, 2 * nen)).ravel()
        self._fe = np.empty((ne, 2 * nen))
        self._Ke = np.empty((ne, 2 * nen, 2 * nen))
        self._en = np.empty(ne)

    def compute(self, u_nodes: np.ndarray):
        """Return (element forces, element stiffness, element energies).

        ``u_nodes`` holds the displacements of this body's nodes (nn, 2).
        """
        m = self.material
        bad = bulk_kernel(self.mesh.elements, np.ascontiguousarray(u_nodes), self.dNdX, self.wdet,
                          self.dNdXv, self.wdetv, m.mu, m.lam, self.split,
                          self._fe, self._Ke, self._en)
        if bad >= 0:
            raise ElementInversionError(int(bad))
        return self._fe, self._Ke, self._en

    def energy(self, u_nodes: np.ndarray) -> float:
        return float(self.compute(u_nodes)[2].sum())


def element_force_and_stiffness(X_e: np.ndarray, u_e: np.ndarray, material: Material,
                                etype: str) -> tuple[np.ndarray, np.ndarray]:
    """Single-element internal force (2 nen,) and stiffness (2 nen, 2 nen)."""
    nen = len(X_e)
    mesh = Mesh(X_e, np.arange(nen)[None, :], etype)
    fe, Ke, _ = BulkOperator(mesh, material).compute(np.asarray(u_e, dtype=float).reshape(nen, 2))
    return fe[0].copy(), Ke[0].copy()


@dataclass
class GlobalSystem:
    """Assembled Newton system over all degrees of freedom."""

    ndof: int
    fixed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    residual: np.ndarray = None
    rows: list = field(default_factory=list)
    cols: list = field(default_factory=list)
    vals: list = field(default_factory=list)

    def __post_init__(self):
        if self.residual is None:
            self.residual = np.zeros(self.ndof)

    def add_matrix(self, rows, cols, vals) -> None:
        self.rows.append(np.asarray(rows, dtype=np.int64).ravel())
        self.cols.append(np.asarray(cols, dtype=np.int64).ravel())
        self.vals.append(np.asarray(vals, dtype=float).ravel())

    def matrix(self) -> sp.csr_matrix:
        if self.rows:
            r = np.concatenate(self.rows)
            c = np.concatenate(self.cols)
            v = np.concatenate(self.vals)
        else:
            r = c = np.zeros(0, dtype=np.int64)
            v = np.zeros(0)
        return sp.csr_matrix((v, (r, c)), shape=(self.ndof, self.ndof))

    @property
    def free(self) -> np.ndarray:
        mask = np.ones(self.ndof, dtype=bool)
        mask[self.fixed] = False
        return np.flatnonzero(mask)


def assemble_and_solve(system: GlobalSystem) -> np.ndarray:
    """Solve ``K du = -R`` on the free DOFs; fixed DOFs get a zero increment."""
    free = system.free
    du = np.zeros(system.ndof)
    R = system.residual[free]
    if not np.any(R):
        return du
    K = system.matrix()[free][:, free].tocsc()
    try:
        lu = spla.splu(K)
    except RuntimeError as exc:
        raise SingularSystemError(str(exc)) from exc
    sol = lu.solve(-R)
    if not np.all(np.isfinite(sol)):
        raise SingularSystemError("non-finite solution")
    du[free] = sol
    return du


def cauchy_stress(op: BulkOperator, u_nodes: np.ndarray):
    """Cauchy stress at the full-rule Gauss points.

    Returns reference positions (ne, ng, 2) and stresses (ne, ng, 2, 2); the
    dilatational part of the reduced variant is evaluated at the same points.
    """
    mesh, m = op.mesh, op.material
    ue = np.asarray(u_nodes)[mesh.elements]
    F = np.eye(2) + np.einsum("eai,egaJ->egiJ", ue, op.dNdX)
    J = np.linalg.det(F)
    lnJ = np.log(J)
    b = np.einsum("egiK,egjK->egij", F, F)
    sig = (m.mu * (b - np.eye(2)) + (m.lam * lnJ)[..., None, None] * np.eye(2)) / J[..., None, None]
    order = 2 if mesh.etype == "Q1" else 3
    P, _ = gauss_2d(order)
    pos = np.empty(sig.shape[:2] + (2,))
    for g, (r, s) in enumerate(P):
        N, _ = shape_functions(mesh.etype, r, s)
        pos[:, g] = np.einsum("a,eai->ei", N, mesh.nodes[mesh.elements])
    return pos, sig
