"""Explicit Taylor time stepping and boundary-layer local time stepping.

All internal routines accept either a state vector of shape (N,) or a block
of states of shape (N, ncols); the latter is used to build one-step matrices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .mesh import DofLayout
from .operator import DgState, SemiDiscreteOperator


@dataclass(frozen=True)
class TaylorScheme:
    order: int
    dt: float

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("Taylor order must be positive")
        if self.dt < 0:
            raise ValueError("dt must be nonnegative")


def locally_stable_order(order: int) -> bool:
    """Taylor truncations of order 3, 4, 7, 8, 11, 12, ... are locally stable."""
    return order % 4 in (0, 3)


def _add_forcing(out, f):
    if f is None:
        return out
    return out + (f if out.ndim == 1 else f[:, None])


def taylor_derivatives(op: SemiDiscreteOperator, w: np.ndarray, t: float, order: int) -> list[np.ndarray]:
    """``[W, W', ..., W^(order)]`` at time t by repeated application of the operator."""
    derivs = [np.asarray(w, dtype=float)]
    for r in range(order):
        derivs.append(_add_forcing(op.K @ derivs[-1], op.forcing_derivative(t, r)))
    return derivs


def taylor_sum(derivs: list[np.ndarray], s: float) -> np.ndarray:
    out = derivs[-1].copy()
    # Horner in s
    for ell in range(len(derivs) - 2, -1, -1):
        out *= s / (ell + 1)
        out += derivs[ell]
    return out


def taylor_advance(op: SemiDiscreteOperator, w: np.ndarray, t: float, dt: float, order: int) -> np.ndarray:
    return taylor_sum(taylor_derivatives(op, w, t, order), dt)


def taylor_step(op: SemiDiscreteOperator, state: DgState, scheme: TaylorScheme) -> DgState:
    w = taylor_advance(op, state.w, state.time, scheme.dt, scheme.order)
    return DgState(w, state.layout, state.time + scheme.dt)


def partition(layout: DofLayout) -> tuple[np.ndarray, np.ndarray]:
    """(W1, W0) index sets: everything but the u cell averages, and the averages."""
    return layout.w1_indices, layout.w0_indices


def boundary_element_sets(op: SemiDiscreteOperator, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks over primal and v elements lying within ``m`` cells of a physical boundary."""
    dim = op.meta["dim"]
    mesh = op.meta["mesh"]
    if dim == 1:
        n = mesh.n
        if mesh.periodic:
            return np.zeros(n, bool), np.zeros(op.layout.n_v_elems, bool)
        j = np.arange(n)
        primal = np.minimum(j, n - 1 - j) < m
        if op.meta["kind"] == "staggered":
            k = np.arange(n + 1)
            dual = np.minimum(k, n - k) < m
        else:
            dual = primal.copy()
        return primal, dual
    n = mesh.n
    i, j = np.divmod(np.arange(n * n), n)
    primal = np.minimum.reduce([i, j, n - 1 - i, n - 1 - j]) < m
    i, j = np.divmod(np.arange((n + 1) ** 2), n + 1)
    dual = np.minimum.reduce([i, j, n - i, n - j]) < m
    return primal, dual


def boundary_dof_mask(op: SemiDiscreteOperator, m: int) -> np.ndarray:
    primal, dual = boundary_element_sets(op, m)
    lay = op.layout
    return np.concatenate([np.repeat(primal, lay.nu_local), np.repeat(dual, lay.nv_local)])


@dataclass(frozen=True)
class LtsConfig:
    m: int
    p: int
    order: int
    boundary_dof_mask: np.ndarray

    def __post_init__(self):
        if self.m < 1 or self.p < 1 or self.order < 1:
            raise ValueError("m, p and order must be positive")


def make_lts(op: SemiDiscreteOperator, m: int, p: int, order: int, allow_full: bool = False) -> LtsConfig:
    mask = boundary_dof_mask(op, m)
    if mask.size and mask.all():
        if not allow_full:
            raise ValueError(f"boundary layer m={m} covers the whole mesh")
        warnings.warn("boundary layer covers the whole mesh; LTS degenerates to global sub-stepping")
    return LtsConfig(m, p, order, mask)


class _LtsPlan:
    """Index sets and operator blocks reused by every LTS step."""

    def __init__(self, op: SemiDiscreteOperator, lts: LtsConfig):
        mask = lts.boundary_dof_mask
        self.b_idx = np.flatnonzero(mask)
        i_idx = np.flatnonzero(~mask)
        K = op.K
        kb = K[self.b_idx]
        self.K_bb = kb[:, self.b_idx].tocsr()
        k_bi = kb[:, i_idx].tocsc()
        # interior DOFs that actually feed the boundary group
        touched = np.flatnonzero(np.diff(k_bi.indptr) > 0)
        self.iface_idx = i_idx[touched]
        self.K_bi = k_bi[:, touched].tocsr()


# values hold the keyed objects so their ids cannot be recycled
_plan_cache: dict[tuple[int, int], tuple] = {}


def _plan(op: SemiDiscreteOperator, lts: LtsConfig) -> _LtsPlan:
    key = (id(op), id(lts))
    hit = _plan_cache.get(key)
    if hit is None:
        if len(_plan_cache) > 16:
            _plan_cache.clear()
        hit = _plan_cache[key] = (op, lts, _LtsPlan(op, lts))
    return hit[2]


def lts_advance(op: SemiDiscreteOperator, w: np.ndarray, t: float, dt: float, lts: LtsConfig) -> np.ndarray:
    """One step of size ``dt``: global Taylor step for the interior, ``p`` sub-steps near the boundary."""
    q, p = lts.order, lts.p
    plan = _plan(op, lts)
    derivs = taylor_derivatives(op, w, t, q)
    w_new = taylor_sum(derivs, dt)
    if plan.b_idx.size == 0:
        return w_new
    b = plan.b_idx
    iface = [d[plan.iface_idx] for d in derivs]
    fb = bool(op.forcing)
    delta = dt / p
    wb = np.array(w[b], dtype=float)
    for s in range(p):
        ts = s * delta
        dB = [wb]
        for r in range(q):
            # r-th derivative of the interior Taylor polynomial at ts
            poly = taylor_sum(iface[r:], ts) if ts != 0.0 else iface[r]
            nxt = plan.K_bb @ dB[-1] + plan.K_bi @ poly
            if fb:
                nxt = _add_forcing(nxt, op.forcing_derivative(t + ts, r)[b])
            dB.append(nxt)
        wb = taylor_sum(dB, delta)
    w_new[b] = wb
    return w_new


def lts_step(op: SemiDiscreteOperator, state: DgState, lts: LtsConfig, dt: float) -> DgState:
    w = lts_advance(op, state.w, state.time, dt, lts)
    return DgState(w, state.layout, state.time + dt)


def advance(op, w, t, dt, order, lts: LtsConfig | None = None):
    if lts is None:
        return taylor_advance(op, w, t, dt, order)
    return lts_advance(op, w, t, dt, lts)


def evolve(op: SemiDiscreteOperator, state: DgState, dt: float, nsteps: int, order: int, lts: LtsConfig | None = None, callback=None) -> DgState:
    """March ``nsteps`` steps; ``callback(step, state)`` runs after each one."""
    w, t = state.w.copy(), state.time
    for step in range(1, nsteps + 1):
        w = advance(op, w, t, dt, order, lts)
        t = state.time + step * dt
        if callback is not None:
            callback(step, DgState(w, state.layout, t))
    return DgState(w, state.layout, t)
