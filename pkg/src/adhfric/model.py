"""Assembled mechanical model: bodies, rigid pseudo-nodes and contact pairs."""
from __future__ import annotations

import numpy as np

from .contact import ContactPair
from .fem.assembly import BulkOperator, GlobalSystem
from .fem.material import Material
from .fem.mesh import Mesh


class Model:
    """Global node list = body nodes (in insertion order) + pseudo-nodes.

    Node ``i`` owns DOFs ``2 i`` and ``2 i + 1``. Pseudo-nodes carry the
    translation of rigid surfaces and have no bulk stiffness.
    """

    def __init__(self):
        self.bodies: list[BulkOperator] = []
        self._X: list[np.ndarray] = []
        self.pairs: list[ContactPair] = []
        self.pseudo: list[int] = []
        self.n_nodes = 0

    def add_body(self, mesh: Mesh, material: Material) -> int:
        """Register a body; returns the global index of its first node."""
        if self.pseudo:
            raise RuntimeError("add all bodies before pseudo-nodes")
        off = self.n_nodes
        self.bodies.append(BulkOperator(mesh, material, off))
        self._X.append(mesh.nodes)
        self.n_nodes += mesh.n_nodes
        return off

    def add_pseudo_node(self, position) -> int:
        nid = self.n_nodes
        self._X.append(np.asarray(position, dtype=float).reshape(1, 2))
        self.pseudo.append(nid)
        self.n_nodes += 1
        return nid

    def add_pair(self, pair: ContactPair) -> ContactPair:
        self.pairs.append(pair)
        return pair

    @property
    def X(self) -> np.ndarray:
        return np.vstack(self._X) if self._X else np.zeros((0, 2))

    @property
    def ndof(self) -> int:
        return 2 * self.n_nodes

    def current(self, u: np.ndarray) -> np.ndarray:
        return self.X + u.reshape(-1, 2)

    def initialize_contact(self, u: np.ndarray) -> None:
        X = self.X
        for pair in self.pairs:
            pair.initialize(self.current(u), X)

    def internal_energy(self, u: np.ndarray) -> float:
        U = u.reshape(-1, 2)
        return sum(b.energy(U[b.offset:b.offset + b.mesh.n_nodes]) for b in self.bodies)

    def assemble(self, u: np.ndarray, f_ext: np.ndarray, *, frozen: bool,
                 with_matrix: bool = True):
        """Residual ``f_int + f_c - f_ext`` and (optionally) the tangent system.

        Returns (system, f_int, f_c).
        """
        U = u.reshape(-1, 2)
        sys = GlobalSystem(self.ndof)
        f_int = np.zeros(self.ndof)
        for b in self.bodies:
            fe, Ke, _ = b.compute(U[b.offset:b.offset + b.mesh.n_nodes])
            f_int += np.bincount(b.edofs.ravel(), weights=fe.ravel(), minlength=self.ndof)
            if with_matrix:
                sys.add_matrix(b.rows, b.cols, Ke.ravel().copy())
        f_c = np.zeros(self.ndof)
        x = self.current(u)
        X = self.X
        for pair in self.pairs:
            pair.evaluate(x, X, f_c, sys if with_matrix else None, frozen=frozen)
        sys.residual = f_int + f_c - f_ext
        return sys, f_int, f_c

    def statuses(self) -> np.ndarray:
        if not self.pairs:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([p.last_statuses() for p in self.pairs])

    def snapshot(self):
        return [p.snapshot() for p in self.pairs]

    def restore(self, snap) -> None:
        for p, s in zip(self.pairs, snap):
            p.restore(s)

    def commit(self) -> None:
        for p in self.pairs:
            p.commit()
