"""Quadrilateral meshes (Q1 / Q2), element shape functions and quadrature.

Mesh file format (whitespace separated, ``#`` starts a comment line)::

    nodes <nn> elements <ne> sets <ns>
    <id> <x> <y>                      # nn lines, ids 0..nn-1
    <id> <Q1|Q2> <n1> ... <n4|n9>     # ne lines, ids 0..ne-1
    set <name> <contact|dirichlet|other> <count> <id> <id> ...

Node order in an element is counterclockwise corners, then (Q2) the
bottom/right/top/left mid-side nodes, then the centre node. Contact sets
list surface nodes in traversal order with the body on the left.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NEN = {"Q1": 4, "Q2": 9}


class MeshError(ValueError):
    pass


def gauss_1d(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def gauss_2d(n: int) -> tuple[np.ndarray, np.ndarray]:
    p, w = gauss_1d(n)
    P = np.array([[a, b] for b in p for a in p])
    W = np.array([wa * wb for wb in w for wa in w])
    return P, W


def _lagrange2(s):
    return np.array([0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)]), \
        np.array([s - 0.5, -2.0 * s, s + 0.5])


# tensor index (i, j) in {0,1,2}^2 of each Q2 node
_Q2_IJ = [(0, 0), (2, 0), (2, 2), (0, 2), (1, 0), (2, 1), (1, 2), (0, 1), (1, 1)]


def shape_functions(etype: str, r: float, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Shape values (nen,) and parametric gradients (nen, 2) at (r, s)."""
    if etype == "Q1":
        sr = np.array([-1.0, 1.0, 1.0, -1.0])
        ss = np.array([-1.0, -1.0, 1.0, 1.0])
        N = 0.25 * (1 + sr * r) * (1 + ss * s)
        dN = np.stack([0.25 * sr * (1 + ss * s), 0.25 * ss * (1 + sr * r)], axis=1)
        return N, dN
    if etype == "Q2":
        Lr, dLr = _lagrange2(r)
        Ls, dLs = _lagrange2(s)
        N = np.array([Lr[i] * Ls[j] for i, j in _Q2_IJ])
        dN = np.array([[dLr[i] * Ls[j], Lr[i] * dLs[j]] for i, j in _Q2_IJ])
        return N, dN
    raise MeshError(f"unknown element type {etype!r}")


@dataclass
class NodeSet:
    kind: str
    nodes: np.ndarray


@dataclass
class Mesh:
    nodes: np.ndarray
    elements: np.ndarray
    etype: str
    sets: dict[str, NodeSet] = field(default_factory=dict)
    dim: int = 2

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        if self.etype not in NEN:
            raise MeshError(f"unknown element type {self.etype!r}")
        if self.elements.ndim != 2 or self.elements.shape[1] != NEN[self.etype]:
            raise MeshError("element connectivity does not match the element type")
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= len(self.nodes)):
            raise MeshError("connectivity references missing nodes")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def add_set(self, name: str, kind: str, nodes) -> None:
        if kind not in ("contact", "dirichlet", "other"):
            raise MeshError(f"bad set kind {kind!r}")
        self.sets[name] = NodeSet(kind, np.asarray(nodes, dtype=np.int64))

    def check_jacobians(self) -> None:
        """Raise ``MeshError`` if any quadrature point has det J <= 0."""
        P, _ = gauss_2d(2 if self.etype == "Q1" else 3)
        for r, s in P:
            _, dN = shape_functions(self.etype, r, s)
            J = np.einsum("eai,ak->eik", self.nodes[self.elements], dN)
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            bad = np.flatnonzero(det <= 0)
            if bad.size:
                raise MeshError(f"non-positive Jacobian in element {int(bad[0])}")

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"nodes {self.n_nodes} elements {self.n_elements} sets {len(self.sets)}\n")
            for i, (x, y) in enumerate(self.nodes):
                fh.write(f"{i} {x:.17g} {y:.17g}\n")
            for i, conn in enumerate(self.elements):
                fh.write(f"{i} {self.etype} " + " ".join(str(int(c)) for c in conn) + "\n")
            for name, ns in self.sets.items():
                fh.write(f"set {name} {ns.kind} {ns.nodes.size} " + " ".join(map(str, ns.nodes)) + "\n")

    @classmethod
    def read(cls, path) -> "Mesh":
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
        try:
            head = lines[0]
            nn, ne, ns = int(head[1]), int(head[3]), int(head[5])
            nodes = np.array([[float(t[1]), float(t[2])] for t in lines[1:1 + nn]])
            el = lines[1 + nn:1 + nn + ne]
            etype = el[0][1] if el else "Q1"
            elements = np.array([[int(v) for v in t[2:]] for t in el], dtype=np.int64)
            mesh = cls(nodes, elements.reshape(ne, NEN[etype]), etype)
            for t in lines[1 + nn + ne:1 + nn + ne + ns]:
                mesh.add_set(t[1], t[2], [int(v) for v in t[4:4 + int(t[3])]])
        except (IndexError, ValueError, KeyError) as exc:
            raise MeshError(f"malformed mesh file {path}: {exc}") from exc
        return mesh
