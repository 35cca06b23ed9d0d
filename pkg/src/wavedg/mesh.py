"""Primal/dual staggered meshes in 1D and 2D and the global DOF layout.

The primal mesh carries u, the dual mesh carries v.  Away from physical
boundaries dual vertices sit at primal cell centers; at a physical boundary
the outermost dual cells are cut to half width so both meshes conform to it.

Dual cell ``k`` (1D, bounded) spans ``[x_left, rho_0]`` for ``k = 0``,
``[rho_{k-1}, rho_k]`` in the interior and ``[rho_{n-1}, x_right]`` for
``k = n``; it is centered on primal vertex ``x_k``.  In the periodic case there
are ``n`` dual cells, cell 0 straddling ``x_left``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class Piece(NamedTuple):
    """Overlap of one primal cell with one dual cell."""

    primal: int
    dual: int
    a: float
    b: float


class FacePoint(NamedTuple):
    """An edge of one mesh and the cell of the other mesh that owns it.

    ``local`` is the reference coordinate of the point inside ``owner``
    (0 for an interior point at the owner's center, -1/+1 at a physical
    boundary).  ``left``/``right`` are the cells of the edge's own mesh on
    each side (-1 where absent).
    """

    x: float
    left: int
    right: int
    owner: int
    local: float


@dataclass(frozen=True)
class StaggeredMesh1D:
    x_left: float
    x_right: float
    n: int
    periodic: bool = False
    h: float = field(init=False)
    primal_edges: np.ndarray = field(init=False, repr=False)
    dual_edges: np.ndarray = field(init=False, repr=False)
    dual_bounds: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 primal elements")
        if not self.x_right > self.x_left:
            raise ValueError("x_right must exceed x_left")
        h = (self.x_right - self.x_left) / self.n
        xe = self.x_left + h * np.arange(self.n + 1)
        xe[-1] = self.x_right
        centers = 0.5 * (xe[:-1] + xe[1:])
        if self.periodic:
            dual_edges = centers.copy()
            lo = np.concatenate([[centers[-1] - (self.x_right - self.x_left)], centers[:-1]])
            bounds = np.stack([lo, centers], axis=1)
        else:
            dual_edges = np.concatenate([[self.x_left], centers, [self.x_right]])
            bounds = np.stack([dual_edges[:-1], dual_edges[1:]], axis=1)
        for name, arr in (("h", h), ("primal_edges", xe), ("dual_edges", dual_edges), ("dual_bounds", bounds)):
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    @property
    def n_primal(self) -> int:
        return self.n

    @property
    def n_dual(self) -> int:
        return self.n if self.periodic else self.n + 1

    @property
    def primal_bounds(self) -> np.ndarray:
        return np.stack([self.primal_edges[:-1], self.primal_edges[1:]], axis=1)

    @property
    def dual_widths(self) -> np.ndarray:
        return self.dual_bounds[:, 1] - self.dual_bounds[:, 0]

    def pieces(self) -> list[Piece]:
        """Primal/dual overlaps: each primal cell splits at its center."""
        out = []
        nd = self.n_dual
        for j in range(self.n):
            a, b = self.primal_edges[j], self.primal_edges[j + 1]
            mid = 0.5 * (a + b)
            out.append(Piece(j, j % nd, a, mid))
            out.append(Piece(j, (j + 1) % nd, mid, b))
        return out

    def primal_faces(self) -> list[FacePoint]:
        """Primal vertices with the dual cell each one lies in."""
        faces = []
        if self.periodic:
            for j in range(self.n):
                faces.append(FacePoint(self.primal_edges[j], (j - 1) % self.n, j, j, 0.0))
            return faces
        for j in range(self.n + 1):
            left = j - 1 if j > 0 else -1
            right = j if j < self.n else -1
            local = -1.0 if j == 0 else (1.0 if j == self.n else 0.0)
            faces.append(FacePoint(self.primal_edges[j], left, right, j, local))
        return faces

    def dual_faces(self) -> list[FacePoint]:
        """Dual vertices with the primal cell each one lies in."""
        faces = []
        if self.periodic:
            # dual vertex rho_j sits between dual cells j and j+1, inside primal j
            for j in range(self.n):
                faces.append(FacePoint(self.dual_edges[j], j, (j + 1) % self.n, j, 0.0))
            return faces
        for k in range(self.n + 2):
            left = k - 1 if k > 0 else -1
            right = k if k <= self.n else -1
            if k == 0:
                owner, local = 0, -1.0
            elif k == self.n + 1:
                owner, local = self.n - 1, 1.0
            else:
                owner, local = k - 1, 0.0
            faces.append(FacePoint(self.dual_edges[k], left, right, owner, local))
        return faces

    def to_primal_ref(self, j: int, x):
        a = self.primal_edges[j]
        return 2.0 * (np.asarray(x) - a) / self.h - 1.0

    def to_dual_ref(self, k: int, x):
        a, b = self.dual_bounds[k]
        return 2.0 * (np.asarray(x) - a) / (b - a) - 1.0


def build_mesh_1d(x_left: float, x_right: float, n: int, periodic: bool = False) -> StaggeredMesh1D:
    return StaggeredMesh1D(float(x_left), float(x_right), int(n), bool(periodic))


@dataclass(frozen=True)
class StaggeredMesh2D:
    """Tensor staggered mesh on [-1, 1]^2.

    Primal cell ``(i, j)`` has flat index ``i * n + j``; dual cell ``(I, J)``
    has flat index ``I * (n + 1) + J``.  Both directions reuse the bounded 1D
    construction.
    """

    n: int
    line: StaggeredMesh1D = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 primal elements per direction")
        object.__setattr__(self, "line", build_mesh_1d(-1.0, 1.0, self.n, periodic=False))

    @property
    def h(self) -> float:
        return self.line.h

    @property
    def n_primal(self) -> int:
        return self.n * self.n

    @property
    def n_dual(self) -> int:
        return (self.n + 1) ** 2

    def primal_index(self, i: int, j: int) -> int:
        return i * self.n + j

    def dual_index(self, i: int, j: int) -> int:
        return i * (self.n + 1) + j

    def primal_rect(self, e: int) -> tuple[float, float, float, float]:
        i, j = divmod(e, self.n)
        xe = self.line.primal_edges
        return xe[i], xe[i + 1], xe[j], xe[j + 1]

    def dual_rect(self, e: int) -> tuple[float, float, float, float]:
        i, j = divmod(e, self.n + 1)
        db = self.line.dual_bounds
        return db[i, 0], db[i, 1], db[j, 0], db[j, 1]

    def primal_areas(self) -> np.ndarray:
        return np.full(self.n_primal, self.h**2)

    def dual_areas(self) -> np.ndarray:
        w = self.line.dual_widths
        return np.outer(w, w).ravel()

    def dual_cell_kinds(self) -> dict[str, int]:
        """Counts of interior, edge and corner dual cells."""
        w = self.line.dual_widths
        reduced = np.isclose(w, 0.5 * self.h)
        kinds = {"interior": 0, "edge": 0, "corner": 0}
        for a in reduced:
            for b in reduced:
                kinds[("interior", "edge", "corner")[int(a) + int(b)]] += 1
        return kinds


def build_mesh_2d(n: int) -> StaggeredMesh2D:
    return StaggeredMesh2D(int(n))


@dataclass(frozen=True)
class DofLayout:
    """Global ordering: all u elements first, then all v elements.

    Within an element the modal coefficients are stored in tensor
    lexicographic order (x-degree major), so local index 0 is always the
    cell-average mode.
    """

    n_u_elems: int
    nu_local: int
    n_v_elems: int
    nv_local: int

    @property
    def n_u(self) -> int:
        return self.n_u_elems * self.nu_local

    @property
    def n_v(self) -> int:
        return self.n_v_elems * self.nv_local

    @property
    def total_dofs(self) -> int:
        return self.n_u + self.n_v

    def u_offset(self, e: int) -> int:
        return e * self.nu_local

    def v_offset(self, k: int) -> int:
        return self.n_u + k * self.nv_local

    def u_slice(self, e: int) -> slice:
        o = self.u_offset(e)
        return slice(o, o + self.nu_local)

    def v_slice(self, k: int) -> slice:
        o = self.v_offset(k)
        return slice(o, o + self.nv_local)

    @property
    def w0_indices(self) -> np.ndarray:
        return np.arange(self.n_u_elems) * self.nu_local

    @property
    def w1_indices(self) -> np.ndarray:
        mask = np.ones(self.total_dofs, dtype=bool)
        mask[self.w0_indices] = False
        return np.flatnonzero(mask)

    def split(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-element views ``(u, v)`` of a flat coefficient vector."""
        u = w[: self.n_u].reshape(self.n_u_elems, self.nu_local)
        v = w[self.n_u :].reshape(self.n_v_elems, self.nv_local)
        return u, v
