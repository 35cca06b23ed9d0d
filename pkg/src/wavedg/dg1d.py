"""1D energy-based DG operators for ``u_t = v, v_t = c^2 u_xx + f``.

Both schemes test the u-equation with ``phi_x`` (modes 1..q_u) and close the
system with the cell-average row ``int u_t - v = 0``.  In the staggered
scheme v lives on the dual mesh, so every primal-cell integral involving v is
split at the cell center, and every dual-cell integral involving u_x is split
at the primal vertex it contains.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .basis import ReferenceBasis, gauss_rule, quadrature_size
from .mesh import DofLayout, StaggeredMesh1D
from .operator import (
    BlockAssembler,
    BoundaryCondition,
    DgState,
    FluxParams,
    SemiDiscreteOperator,
    finalize_operator,
)

# (g(x), theta(t, r)) pairs: f(x, t) = sum g(x) theta(t)
Forcing1D = Sequence[tuple[Callable, Callable[[float, int], float]]]


def _bcs(mesh: StaggeredMesh1D, bcs):
    if mesh.periodic:
        return None, None
    if bcs is None:
        raise ValueError("bounded mesh needs boundary conditions")
    if isinstance(bcs, BoundaryCondition):
        return bcs, bcs
    left, right = bcs
    return left, right


class _Line:
    """Basis evaluation helpers for one 1D discretization."""

    def __init__(self, mesh: StaggeredMesh1D, q_u: int, q_v: int, staggered: bool):
        self.mesh = mesh
        self.bu = ReferenceBasis(q_u, quadrature_size(q_u, q_v))
        self.bv = ReferenceBasis(q_v, quadrature_size(q_u, q_v))
        self.staggered = staggered

    def u_tab(self, j: int, x, deriv: int) -> np.ndarray:
        xi = self.mesh.to_primal_ref(j, x)
        return self.bu.table(xi, deriv)[deriv] * (2.0 / self.mesh.h) ** deriv

    def u_ref(self, xi: float, deriv: int) -> np.ndarray:
        return self.bu.table([xi], deriv)[deriv] * (2.0 / self.mesh.h) ** deriv

    def v_width(self, k: int) -> float:
        if not self.staggered:
            return self.mesh.h
        return float(self.mesh.dual_widths[k])

    def v_tab(self, k: int, x, deriv: int) -> np.ndarray:
        if self.staggered:
            x = self._wrap_dual(k, x)
            eta = self.mesh.to_dual_ref(k, x)
        else:
            eta = self.mesh.to_primal_ref(k, x)
        return self.bv.table(eta, deriv)[deriv] * (2.0 / self.v_width(k)) ** deriv

    def v_ref(self, k: int, eta: float, deriv: int = 0) -> np.ndarray:
        return self.bv.table([eta], deriv)[deriv] * (2.0 / self.v_width(k)) ** deriv

    def _wrap_dual(self, k: int, x):
        x = np.asarray(x, dtype=float)
        if not self.mesh.periodic:
            return x
        lo = self.mesh.dual_bounds[k, 0]
        return lo + np.mod(x - lo, self.mesh.length)


def _mass_blocks(line: _Line, c2: float, layout: DofLayout) -> dict:
    bu, bv, h = line.bu, line.bv, line.mesh.h
    gram = (bu.vandermonde_deriv.T * bu.quad_weights) @ bu.vandermonde_deriv
    mu = c2 * (2.0 / h) * gram
    mu[0, :] = 0.0
    mu[:, 0] = 0.0
    mu[0, 0] = h
    blocks = {("u", j): mu.copy() for j in range(layout.n_u_elems)}
    for k in range(layout.n_v_elems):
        blocks[("v", k)] = np.diag(0.5 * line.v_width(k) * bv.mass_diagonal)
    return blocks


def _forcing_sources(line: _Line, pieces, forcing: Forcing1D | None):
    if not forcing:
        return []
    xg, wg = gauss_rule(line.bu.nquad + 2)
    out = []
    for g, theta in forcing:
        src: dict = {}
        for j, k, a, b in pieces:
            xp = a + 0.5 * (b - a) * (xg + 1.0)
            wp = 0.5 * (b - a) * wg
            psi = line.v_tab(k, xp, 0)
            vals = np.asarray(g(xp), dtype=float) * np.ones_like(xp)
            key = ("v", k)
            src[key] = src.get(key, 0.0) + psi.T @ (wp * vals)
        out.append((src, theta))
    return out


def assemble_staggered_1d(
    mesh: StaggeredMesh1D,
    q_u: int,
    q_v: int,
    flux: FluxParams = FluxParams(),
    c: float = 1.0,
    bcs=None,
    forcing: Forcing1D | None = None,
) -> SemiDiscreteOperator:
    """Staggered scheme: u on primal cells, v on dual cells."""
    if not isinstance(mesh, StaggeredMesh1D):
        raise TypeError("assemble_staggered_1d needs a StaggeredMesh1D")
    if q_u < 1 or q_v < 0:
        raise ValueError("need q_u >= 1 and q_v >= 0")
    if c <= 0:
        raise ValueError("wave speed must be positive")
    left_bc, right_bc = _bcs(mesh, bcs)
    line = _Line(mesh, q_u, q_v, staggered=True)
    layout = DofLayout(mesh.n, q_u + 1, mesh.n_dual, q_v + 1)
    c2 = c * c
    beta, tau = flux.beta, flux.tau
    A = BlockAssembler()
    xg, wg = gauss_rule(line.bu.nquad)

    pieces = mesh.pieces()
    for j, k, a, b in pieces:
        xp = a + 0.5 * (b - a) * (xg + 1.0)
        wp = 0.5 * (b - a) * wg
        uxx = line.u_tab(j, xp, 2)
        ux = line.u_tab(j, xp, 1)
        v = line.v_tab(k, xp, 0)
        vx = line.v_tab(k, xp, 1)
        avg = np.zeros_like(uxx)
        avg[:, 0] = 1.0
        A.add_form((("u", j), -c2 * uxx + avg), wp, [(("v", k), v)])
        A.add_form((("v", k), -c2 * vx), wp, [(("u", j), ux)])

    one = np.ones(1)
    ux_right, ux_left = line.u_ref(1.0, 1), line.u_ref(-1.0, 1)
    ux_mid = line.u_ref(0.0, 1)

    # u-equation fluxes at primal vertices; v* uses v from the dual cell owning the vertex
    for x, jl, jr, k, loc in mesh.primal_faces():
        if jl >= 0 and jr >= 0:
            vstar = [
                (("v", k), line.v_ref(k, loc)),
                (("u", jl), -beta * c2 * ux_right),
                (("u", jr), beta * c2 * ux_left),
            ]
        elif jl < 0:  # left boundary, outward normal -1
            wv, pv = left_bc.v_weight, left_bc.v_penalty
            vstar = [(("v", k), wv * line.v_ref(k, -1.0)), (("u", jr), pv * c * ux_left)]
        else:
            wv, pv = right_bc.v_weight, right_bc.v_penalty
            vstar = [(("v", k), wv * line.v_ref(k, 1.0)), (("u", jl), -pv * c * ux_right)]
        if jl >= 0:
            A.add_form((("u", jl), c2 * ux_right), one, vstar)
        if jr >= 0:
            A.add_form((("u", jr), -c2 * ux_left), one, vstar)

    # v-equation fluxes at dual vertices; u_x is single valued there
    for x, kl, kr, j, loc in mesh.dual_faces():
        if kl >= 0 and kr >= 0:
            uxstar = [
                (("u", j), ux_mid),
                (("v", kl), -(tau / c2) * line.v_ref(kl, 1.0)),
                (("v", kr), (tau / c2) * line.v_ref(kr, -1.0)),
            ]
            A.add_form((("v", kl), c2 * line.v_ref(kl, 1.0)), one, uxstar)
            A.add_form((("v", kr), -c2 * line.v_ref(kr, -1.0)), one, uxstar)
        elif kl < 0:
            ww, pw = left_bc.w_weight, left_bc.w_penalty
            wstar = [(("u", j), -ww * c2 * ux_left), (("v", kr), -pw * c * line.v_ref(kr, -1.0))]
            A.add_form((("v", kr), line.v_ref(kr, -1.0)), one, wstar)
        else:
            ww, pw = right_bc.w_weight, right_bc.w_penalty
            wstar = [(("u", j), ww * c2 * ux_right), (("v", kl), -pw * c * line.v_ref(kl, 1.0))]
            A.add_form((("v", kl), line.v_ref(kl, 1.0)), one, wstar)

    meta = dict(dim=1, kind="staggered", mesh=mesh, q_u=q_u, q_v=q_v, c=c, flux=flux, bcs=(left_bc, right_bc), line=line)
    return finalize_operator(
        layout, A, _mass_blocks(line, c2, layout), _forcing_sources(line, pieces, forcing), "staggered", meta
    )


def assemble_nonstaggered_1d(
    mesh: StaggeredMesh1D,
    q_u: int,
    q_v: int,
    flux: FluxParams = FluxParams(),
    c: float = 1.0,
    bcs=None,
    forcing: Forcing1D | None = None,
) -> SemiDiscreteOperator:
    """Non-staggered scheme: u and v share the primal cells."""
    if q_u < 1 or q_v < 0:
        raise ValueError("need q_u >= 1 and q_v >= 0")
    if c <= 0:
        raise ValueError("wave speed must be positive")
    left_bc, right_bc = _bcs(mesh, bcs)
    line = _Line(mesh, q_u, q_v, staggered=False)
    n = mesh.n
    layout = DofLayout(n, q_u + 1, n, q_v + 1)
    c2 = c * c
    al, beta, tau = flux.alpha, flux.beta, flux.tau
    A = BlockAssembler()
    xg, wg = gauss_rule(line.bu.nquad)

    for j in range(n):
        a, b = mesh.primal_edges[j], mesh.primal_edges[j + 1]
        xp = a + 0.5 * (b - a) * (xg + 1.0)
        wp = 0.5 * (b - a) * wg
        ux = line.u_tab(j, xp, 1)
        v = line.v_tab(j, xp, 0)
        vx = line.v_tab(j, xp, 1)
        avg = np.zeros_like(ux)
        avg[:, 0] = 1.0
        A.add_form((("u", j), c2 * ux), wp, [(("v", j), vx)])
        A.add_form((("u", j), avg), wp, [(("v", j), v)])
        A.add_form((("v", j), -c2 * vx), wp, [(("u", j), ux)])

    one = np.ones(1)
    ux_r, ux_l = line.u_ref(1.0, 1), line.u_ref(-1.0, 1)
    v_r, v_l = line.v_ref(0, 1.0), line.v_ref(0, -1.0)
    for x, jl, jr, _, _ in mesh.primal_faces():
        if jl >= 0 and jr >= 0:
            vstar = [
                (("v", jl), al * v_r),
                (("v", jr), (1 - al) * v_l),
                (("u", jl), -beta * c2 * ux_r),
                (("u", jr), beta * c2 * ux_l),
            ]
            uxstar = [
                (("u", jl), (1 - al) * ux_r),
                (("u", jr), al * ux_l),
                (("v", jl), -(tau / c2) * v_r),
                (("v", jr), (tau / c2) * v_l),
            ]
            A.add_form((("u", jl), c2 * ux_r), one, vstar + [(("v", jl), -v_r)])
            A.add_form((("u", jr), -c2 * ux_l), one, vstar + [(("v", jr), -v_l)])
            A.add_form((("v", jl), c2 * v_r), one, uxstar)
            A.add_form((("v", jr), -c2 * v_l), one, uxstar)
        elif jl < 0:
            wv, ww, pv, pw = left_bc.v_weight, left_bc.w_weight, left_bc.v_penalty, left_bc.w_penalty
            vstar = [(("v", jr), wv * v_l), (("u", jr), pv * c * ux_l)]
            wstar = [(("u", jr), -ww * c2 * ux_l), (("v", jr), -pw * c * v_l)]
            A.add_form((("u", jr), -c2 * ux_l), one, vstar + [(("v", jr), -v_l)])
            A.add_form((("v", jr), v_l), one, wstar)
        else:
            wv, ww, pv, pw = right_bc.v_weight, right_bc.w_weight, right_bc.v_penalty, right_bc.w_penalty
            vstar = [(("v", jl), wv * v_r), (("u", jl), -pv * c * ux_r)]
            wstar = [(("u", jl), ww * c2 * ux_r), (("v", jl), -pw * c * v_r)]
            A.add_form((("u", jl), c2 * ux_r), one, vstar + [(("v", jl), -v_r)])
            A.add_form((("v", jl), v_r), one, wstar)

    pieces = [(j, j, mesh.primal_edges[j], mesh.primal_edges[j + 1]) for j in range(n)]
    meta = dict(dim=1, kind="nonstaggered", mesh=mesh, q_u=q_u, q_v=q_v, c=c, flux=flux, bcs=(left_bc, right_bc), line=line)
    return finalize_operator(
        layout, A, _mass_blocks(line, c2, layout), _forcing_sources(line, pieces, forcing), "nonstaggered", meta
    )


def _v_cells(op: SemiDiscreteOperator):
    mesh: StaggeredMesh1D = op.meta["mesh"]
    if op.meta["kind"] == "staggered":
        return [tuple(b) for b in mesh.dual_bounds]
    return [tuple(b) for b in mesh.primal_bounds]


def _wrap(mesh: StaggeredMesh1D, x):
    if not mesh.periodic:
        return x
    return mesh.x_left + np.mod(x - mesh.x_left, mesh.length)


def project_initial_data_1d(op: SemiDiscreteOperator, u0: Callable, v0: Callable, t: float = 0.0) -> DgState:
    """Element-wise L2 projection of ``u0`` onto primal cells and ``v0`` onto v cells."""
    line: _Line = op.meta["line"]
    mesh: StaggeredMesh1D = op.meta["mesh"]
    w = np.zeros(op.total_dofs)
    u, v = op.layout.split(w)
    for j, (a, b) in enumerate(mesh.primal_bounds):
        xs = a + 0.5 * (b - a) * (line.bu.quad_nodes + 1.0)
        u[j] = line.bu.project(np.asarray(u0(xs), dtype=float) * np.ones_like(xs))
    for k, (a, b) in enumerate(_v_cells(op)):
        xs = a + 0.5 * (b - a) * (line.bv.quad_nodes + 1.0)
        v[k] = line.bv.project(np.asarray(v0(_wrap(mesh, xs)), dtype=float) * np.ones_like(xs))
    return DgState(w, op.layout, t)


def discrete_energy(op: SemiDiscreteOperator, state) -> float:
    """``0.5 sum int v^2 + 0.5 sum int c^2 u_x^2``."""
    return op.energy(state)


def l2_error(op: SemiDiscreteOperator, state: DgState, exact_u: Callable, exact_v: Callable, t: float | None = None):
    """L2 norms of ``u^h - u`` and ``v^h - v`` at time ``t``.

    Works for both 1D and 2D operators; ``exact_u(x, t)`` (1D) or
    ``exact_u(x, y, t)`` (2D).
    """
    t = state.time if t is None else t
    if op.meta["dim"] == 2:
        from .dg2d import l2_error_2d

        return l2_error_2d(op, state, exact_u, exact_v, t)
    line: _Line = op.meta["line"]
    mesh: StaggeredMesh1D = op.meta["mesh"]
    u, v = op.layout.split(state.w)
    xg, wg = gauss_rule(max(line.bu.degree, line.bv.degree) + 6)
    tu = line.bu.table(xg, 0)[0]
    tv = line.bv.table(xg, 0)[0]
    eu = ev = 0.0
    for j, (a, b) in enumerate(mesh.primal_bounds):
        xs = a + 0.5 * (b - a) * (xg + 1.0)
        diff = tu @ u[j] - exact_u(xs, t)
        eu += 0.5 * (b - a) * float(wg @ diff**2)
    for k, (a, b) in enumerate(_v_cells(op)):
        xs = a + 0.5 * (b - a) * (xg + 1.0)
        diff = tv @ v[k] - exact_v(_wrap(mesh, xs), t)
        ev += 0.5 * (b - a) * float(wg @ diff**2)
    return float(np.sqrt(eu)), float(np.sqrt(ev))
