"""2D staggered energy-based DG on the Cartesian staggered mesh of [-1, 1]^2.

u lives on the n x n primal cells, v on the (n+1) x (n+1) dual cells (the
boundary ones cut to half or quarter size).  Every integral is evaluated
piecewise on the intersections of primal and dual cells, so both fields are
smooth on each quadrature region.  Boundary faces use the (gamma, kappa)
boundary fluxes; the shipped 2D experiments use homogeneous Dirichlet walls.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .basis import gauss_rule, legendre_table, mass_diagonal, quadrature_size
from .mesh import DofLayout, StaggeredMesh2D
from .operator import (
    BlockAssembler,
    BoundaryCondition,
    DgState,
    FluxParams,
    SemiDiscreteOperator,
    finalize_operator,
    sine_time,
)


@dataclass(frozen=True)
class WaveSpeedField:
    """Wave speed ``c(x, y) > 0`` and its gradient."""

    c: Callable
    grad_c: Callable | None = None
    name: str = "custom"

    def c2(self, x, y):
        return np.asarray(self.c(x, y), dtype=float) ** 2 * np.ones(np.broadcast(x, y).shape)

    def grad_c2(self, x, y):
        shape = np.broadcast(x, y).shape
        if self.grad_c is None:
            return np.zeros(shape), np.zeros(shape)
        cx, cy = self.grad_c(x, y)
        c = np.asarray(self.c(x, y), dtype=float)
        return 2 * c * cx * np.ones(shape), 2 * c * cy * np.ones(shape)

    @classmethod
    def constant(cls, c0: float = 1.0):
        if c0 <= 0:
            raise ValueError("wave speed must be positive")
        return cls(lambda x, y: c0 + 0.0 * (x + y), None, f"constant {c0}")

    @classmethod
    def quadratic(cls):
        """``c = 1 + x^2 + y^2``."""
        return cls(lambda x, y: 1.0 + x**2 + y**2, lambda x, y: (2.0 * x, 2.0 * y), "1+x^2+y^2")


@dataclass(frozen=True)
class ManufacturedSolution:
    """``u = sin(w t) sin(k1 pi x) sin(k2 pi y)`` with ``w = pi sqrt(k1^2 + k2^2)``.

    The forcing is separable, ``f = sin(w t) g(x, y)`` with
    ``g = w^2 (c^2 - 1) S - grad(c^2) . grad(S)``.
    """

    k1: float
    k2: float
    speed: WaveSpeedField

    @property
    def omega(self) -> float:
        return float(np.pi * np.hypot(self.k1, self.k2))

    def shape(self, x, y):
        return np.sin(self.k1 * np.pi * x) * np.sin(self.k2 * np.pi * y)

    def shape_grad(self, x, y):
        a, b = self.k1 * np.pi, self.k2 * np.pi
        return a * np.cos(a * x) * np.sin(b * y), b * np.sin(a * x) * np.cos(b * y)

    def u(self, x, y, t):
        return np.sin(self.omega * t) * self.shape(x, y)

    def v(self, x, y, t):
        return self.omega * np.cos(self.omega * t) * self.shape(x, y)

    def spatial_forcing(self, x, y):
        w = self.omega
        c2 = self.speed.c2(x, y)
        gx, gy = self.speed.grad_c2(x, y)
        sx, sy = self.shape_grad(x, y)
        return w**2 * (c2 - 1.0) * self.shape(x, y) - (gx * sx + gy * sy)

    def f(self, x, y, t):
        return np.sin(self.omega * t) * self.spatial_forcing(x, y)

    def forcing_terms(self):
        return [(self.spatial_forcing, sine_time(self.omega))]


class _Grid:
    """Tensor Legendre evaluation on primal and dual rectangles."""

    def __init__(self, mesh: StaggeredMesh2D, q_u: int, q_v: int):
        self.mesh = mesh
        self.q_u, self.q_v = q_u, q_v

    @staticmethod
    def _eval(deg, rect, xs, ys, dx, dy):
        x0, x1, y0, y1 = rect
        hx, hy = x1 - x0, y1 - y0
        xi = 2.0 * (np.asarray(xs, dtype=float) - x0) / hx - 1.0
        eta = 2.0 * (np.asarray(ys, dtype=float) - y0) / hy - 1.0
        tx = legendre_table(deg, xi, dx)[dx] * (2.0 / hx) ** dx  # (deg+1, nx)
        ty = legendre_table(deg, eta, dy)[dy] * (2.0 / hy) ** dy
        # points x-major, modes x-degree major
        return np.einsum("ai,bj->ijab", tx, ty).reshape(tx.shape[1] * ty.shape[1], -1)

    def u(self, e, xs, ys, dx=0, dy=0):
        return self._eval(self.q_u, self.mesh.primal_rect(e), xs, ys, dx, dy)

    def v(self, k, xs, ys, dx=0, dy=0):
        return self._eval(self.q_v, self.mesh.dual_rect(k), xs, ys, dx, dy)


def _grid_points(xs, ys):
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return X.ravel(), Y.ravel()


def assemble_staggered_2d(
    mesh: StaggeredMesh2D,
    q_u: int,
    q_v: int,
    flux: FluxParams = FluxParams(),
    c: WaveSpeedField | float = 1.0,
    bc: BoundaryCondition = BoundaryCondition.dirichlet(),
    forcing: Sequence[tuple[Callable, Callable]] | None = None,
) -> SemiDiscreteOperator:
    """Assemble the coupled (u, v) system on a 2D staggered mesh."""
    if not isinstance(mesh, StaggeredMesh2D):
        raise TypeError("assemble_staggered_2d needs a StaggeredMesh2D")
    if q_u < 1 or q_v < 0:
        raise ValueError("need q_u >= 1 and q_v >= 0")
    speed = c if isinstance(c, WaveSpeedField) else WaveSpeedField.constant(float(c))
    n = mesh.n
    line = mesh.line
    grid = _Grid(mesh, q_u, q_v)
    nu, nv = (q_u + 1) ** 2, (q_v + 1) ** 2
    layout = DofLayout(mesh.n_primal, nu, mesh.n_dual, nv)
    beta, tau = flux.beta, flux.tau
    wv, ww, pv, pw = bc.v_weight, bc.w_weight, bc.v_penalty, bc.w_penalty
    m = quadrature_size(q_u, q_v, variable_coefficient=True)
    xg, wg = gauss_rule(m)

    # the beta face term carries c^4, one degree-2 factor more than any volume term
    face_nodes, face_weights = gauss_rule(m + 1)

    def rule(a, b):
        return a + 0.5 * (b - a) * (xg + 1.0), 0.5 * (b - a) * wg

    def face_rule(a, b):
        return a + 0.5 * (b - a) * (face_nodes + 1.0), 0.5 * (b - a) * face_weights

    A = BlockAssembler()
    mass_u = {e: np.zeros((nu, nu)) for e in range(mesh.n_primal)}
    forcing = list(forcing or [])
    sources = [dict() for _ in forcing]
    pieces = line.pieces()

    for ix, kx, ax, bx in pieces:
        xp, wx = rule(ax, bx)
        for iy, ky, ay, by in pieces:
            yp, wy = rule(ay, by)
            e, k = mesh.primal_index(ix, iy), mesh.dual_index(kx, ky)
            X, Y = _grid_points(xp, yp)
            W = np.outer(wx, wy).ravel()
            c2 = speed.c2(X, Y)[:, None]
            gx, gy = (g[:, None] for g in speed.grad_c2(X, Y))
            ux, uy = grid.u(e, xp, yp, 1, 0), grid.u(e, xp, yp, 0, 1)
            lap = grid.u(e, xp, yp, 2, 0) + grid.u(e, xp, yp, 0, 2)
            div = c2 * lap + gx * ux + gy * uy
            avg = np.zeros_like(div)
            avg[:, 0] = 1.0
            v0 = grid.v(k, xp, yp)
            vx, vy = grid.v(k, xp, yp, 1, 0), grid.v(k, xp, yp, 0, 1)
            A.add_form((("u", e), avg - div), W, [(("v", k), v0)])
            A.add_form((("v", k), -c2 * vx), W, [(("u", e), ux)])
            A.add_form((("v", k), -c2 * vy), W, [(("u", e), uy)])
            mass_u[e] += (ux * (c2[:, 0] * W)[:, None]).T @ ux + (uy * (c2[:, 0] * W)[:, None]).T @ uy
            for src, (g, _) in zip(sources, forcing):
                key = ("v", k)
                src[key] = src.get(key, 0.0) + v0.T @ (W * np.asarray(g(X, Y), dtype=float))

    # faces: axis 0 = normal along x (segments at fixed x), axis 1 = normal along y
    for axis in (0, 1):

        def seg(fixed, a, b):
            s, w = face_rule(a, b)
            if axis == 0:
                return [fixed], s, w, np.full_like(s, fixed), s
            return s, [fixed], w, s, np.full_like(s, fixed)

        def cell(idx_normal, idx_tangent, primal=True):
            if idx_normal < 0:
                return -1
            pair = (idx_normal, idx_tangent) if axis == 0 else (idx_tangent, idx_normal)
            return mesh.primal_index(*pair) if primal else mesh.dual_index(*pair)

        d_n = (1, 0) if axis == 0 else (0, 1)

        # u-equation: primal faces, v* from the dual cell containing the segment
        for xf, jl, jr, kd, _ in line.primal_faces():
            for it, kt, a, b in pieces:
                xs, ys, w, X, Y = seg(xf, a, b)
                c2 = speed.c2(X, Y)[:, None]
                cc = np.sqrt(c2)
                k = cell(kd, kt, primal=False)
                eL, eR = cell(jl, it), cell(jr, it)
                vt = grid.v(k, xs, ys)
                if eL >= 0 and eR >= 0:
                    dL, dR = grid.u(eL, xs, ys, *d_n), grid.u(eR, xs, ys, *d_n)
                    vstar = [(("v", k), vt), (("u", eL), -beta * c2 * dL), (("u", eR), beta * c2 * dR)]
                elif eL < 0:
                    dR = grid.u(eR, xs, ys, *d_n)
                    vstar = [(("v", k), wv * vt), (("u", eR), pv * cc * dR)]
                else:
                    dL = grid.u(eL, xs, ys, *d_n)
                    vstar = [(("v", k), wv * vt), (("u", eL), -pv * cc * dL)]
                if eL >= 0:
                    A.add_form((("u", eL), c2 * dL), w, vstar)
                if eR >= 0:
                    A.add_form((("u", eR), -c2 * dR), w, vstar)

        # v-equation: dual faces, normal derivative of u from the primal cell containing the segment
        for xf, kl, kr, jd, _ in line.dual_faces():
            for it, kt, a, b in pieces:
                xs, ys, w, X, Y = seg(xf, a, b)
                c2 = speed.c2(X, Y)[:, None]
                cc = np.sqrt(c2)
                e = cell(jd, it)
                kL, kR = cell(kl, kt, primal=False), cell(kr, kt, primal=False)
                dn = grid.u(e, xs, ys, *d_n)
                if kL >= 0 and kR >= 0:
                    vL, vR = grid.v(kL, xs, ys), grid.v(kR, xs, ys)
                    wstar = [(("u", e), c2 * dn), (("v", kL), -tau * vL), (("v", kR), tau * vR)]
                    A.add_form((("v", kL), vL), w, wstar)
                    A.add_form((("v", kR), -vR), w, wstar)
                elif kL < 0:
                    vR = grid.v(kR, xs, ys)
                    A.add_form((("v", kR), vR), w, [(("u", e), -ww * c2 * dn), (("v", kR), -pw * cc * vR)])
                else:
                    vL = grid.v(kL, xs, ys)
                    A.add_form((("v", kL), vL), w, [(("u", e), ww * c2 * dn), (("v", kL), -pw * cc * vL)])

    mass = {}
    for e, blk in mass_u.items():
        blk[0, :] = 0.0
        blk[:, 0] = 0.0
        blk[0, 0] = mesh.h**2
        mass[("u", e)] = blk
    md = np.kron(mass_diagonal(q_v), mass_diagonal(q_v))
    for k in range(mesh.n_dual):
        x0, x1, y0, y1 = mesh.dual_rect(k)
        mass[("v", k)] = np.diag(0.25 * (x1 - x0) * (y1 - y0) * md)

    c_min = _min_speed(speed, mesh, xg)
    if c_min <= 0:
        raise ValueError("wave speed must be positive at every quadrature point")
    meta = dict(dim=2, kind="staggered", mesh=mesh, q_u=q_u, q_v=q_v, c=speed, flux=flux, bcs=(bc,), grid=grid, nquad=m)
    srcs = [(src, theta) for src, (_, theta) in zip(sources, forcing)]
    return finalize_operator(layout, A, mass, srcs, "staggered", meta)


def _min_speed(speed: WaveSpeedField, mesh: StaggeredMesh2D, xg) -> float:
    lo = np.inf
    for ix, _, ax, bx in mesh.line.pieces():
        xp = ax + 0.5 * (bx - ax) * (xg + 1.0)
        for iy, _, ay, by in mesh.line.pieces():
            yp = ay + 0.5 * (by - ay) * (xg + 1.0)
            X, Y = _grid_points(xp, yp)
            lo = min(lo, float(np.min(speed.c(X, Y))))
    return lo


def project_initial_data(op: SemiDiscreteOperator, u0: Callable, v0: Callable, t: float = 0.0) -> DgState:
    """Per-element L2 projection (u onto primal, v onto dual cells)."""
    if op.meta["dim"] == 1:
        from .dg1d import project_initial_data_1d

        return project_initial_data_1d(op, u0, v0, t)
    mesh: StaggeredMesh2D = op.meta["mesh"]
    grid: _Grid = op.meta["grid"]
    xg, wg = gauss_rule(op.meta["nquad"])
    w = np.zeros(op.total_dofs)
    u, v = op.layout.split(w)
    md_u = np.kron(mass_diagonal(grid.q_u), mass_diagonal(grid.q_u))
    md_v = np.kron(mass_diagonal(grid.q_v), mass_diagonal(grid.q_v))
    ref_w = np.outer(wg, wg).ravel()
    for e in range(mesh.n_primal):
        x0, x1, y0, y1 = mesh.primal_rect(e)
        xs, ys = x0 + 0.5 * (x1 - x0) * (xg + 1), y0 + 0.5 * (y1 - y0) * (xg + 1)
        X, Y = _grid_points(xs, ys)
        u[e] = (grid.u(e, xs, ys).T @ (ref_w * u0(X, Y))) / md_u
    for k in range(mesh.n_dual):
        x0, x1, y0, y1 = mesh.dual_rect(k)
        xs, ys = x0 + 0.5 * (x1 - x0) * (xg + 1), y0 + 0.5 * (y1 - y0) * (xg + 1)
        X, Y = _grid_points(xs, ys)
        v[k] = (grid.v(k, xs, ys).T @ (ref_w * v0(X, Y))) / md_v
    return DgState(w, op.layout, t)


def l2_error_2d(op: SemiDiscreteOperator, state: DgState, exact_u: Callable, exact_v: Callable, t: float):
    mesh: StaggeredMesh2D = op.meta["mesh"]
    grid: _Grid = op.meta["grid"]
    xg, wg = gauss_rule(op.meta["nquad"] + 2)
    u, v = op.layout.split(state.w)
    ref_w = np.outer(wg, wg).ravel()
    eu = ev = 0.0
    for e in range(mesh.n_primal):
        x0, x1, y0, y1 = mesh.primal_rect(e)
        xs, ys = x0 + 0.5 * (x1 - x0) * (xg + 1), y0 + 0.5 * (y1 - y0) * (xg + 1)
        X, Y = _grid_points(xs, ys)
        diff = grid.u(e, xs, ys) @ u[e] - exact_u(X, Y, t)
        eu += 0.25 * (x1 - x0) * (y1 - y0) * float(ref_w @ diff**2)
    for k in range(mesh.n_dual):
        x0, x1, y0, y1 = mesh.dual_rect(k)
        xs, ys = x0 + 0.5 * (x1 - x0) * (xg + 1), y0 + 0.5 * (y1 - y0) * (xg + 1)
        X, Y = _grid_points(xs, ys)
        diff = grid.v(k, xs, ys) @ v[k] - exact_v(X, Y, t)
        ev += 0.25 * (x1 - x0) * (y1 - y0) * float(ref_w @ diff**2)
    return float(np.sqrt(eu)), float(np.sqrt(ev))
