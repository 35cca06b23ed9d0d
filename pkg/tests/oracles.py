"""Brute-force reference assemblies used only by the tests.

Every basis function is a standalone piecewise polynomial evaluated with
numpy.polynomial.legendre; integrals run over the common refinement of the
primal and dual meshes, and each matrix entry is a separate evaluation of the
variational form.  Slow, but shares no code with the package assemblers.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre as npleg

GAUSS = npleg.leggauss(24)


def _leg(coeff_index: int, xi, d: int):
    c = np.zeros(coeff_index + 1)
    c[-1] = 1.0
    if d:
        c = npleg.legder(c, d)
    return npleg.legval(xi, c)


class Basis1D:
    """Mode ``mode`` on the interval [a, b] (periodic shifts handled by ``period``)."""

    def __init__(self, a, b, mode, period=None):
        self.a, self.b, self.mode, self.period = a, b, mode, period

    def _local(self, x, side):
        x = np.asarray(x, float)
        if self.period is not None:
            # move x into [a, a + period) respecting the side of a breakpoint
            shift = np.floor((x - self.a + side * 1e-13) / self.period)
            x = x - shift * self.period
        inside = (x > self.a - 1e-13) & (x < self.b + 1e-13)
        on_left = np.abs(x - self.a) < 1e-12
        on_right = np.abs(x - self.b) < 1e-12
        if side > 0:
            inside &= ~on_right
        elif side < 0:
            inside &= ~on_left
        xi = 2 * (x - self.a) / (self.b - self.a) - 1
        return xi, inside

    def __call__(self, x, d=0, side=0):
        xi, inside = self._local(x, side)
        return np.where(inside, _leg(self.mode, np.clip(xi, -1, 1), d) * (2 / (self.b - self.a)) ** d, 0.0)


def _breaks(a, b, pts):
    pts = sorted(set([a, b] + [p for p in pts if a < p < b]))
    return list(zip(pts[:-1], pts[1:]))


def _integrate(f, segments):
    xg, wg = GAUSS
    tot = 0.0
    for a, b in segments:
        x = 0.5 * (a + b) + 0.5 * (b - a) * xg
        tot += 0.5 * (b - a) * np.sum(wg * f(x))
    return tot


def oracle_1d(n, q_u, q_v, c=1.0, alpha=0.5, beta=0.0, tau=0.0, staggered=True, xl=-1.0, xr=1.0, periodic=True, bcs=None):
    """Dense ``(M, A)`` for the 1D schemes.

    ``bcs`` is ``((wv, ww, penalty, penalty), (...))`` for the left and right ends of a bounded line.
    """
    h = (xr - xl) / n
    xe = xl + h * np.arange(n + 1)
    L = xr - xl
    per = L if periodic else None
    # u functions
    ufun = [(j, Basis1D(xe[j], xe[j + 1], m, per)) for j in range(n) for m in range(q_u + 1)]
    if staggered:
        centers = 0.5 * (xe[:-1] + xe[1:])
        if periodic:
            dual = [(centers[-1] - L, centers[0])] + [(centers[k - 1], centers[k]) for k in range(1, n)]
        else:
            edges = [xl] + list(centers) + [xr]
            dual = list(zip(edges[:-1], edges[1:]))
    else:
        dual = [(xe[j], xe[j + 1]) for j in range(n)]
    vfun = [(k, Basis1D(a, b, m, per)) for k, (a, b) in enumerate(dual) for m in range(q_v + 1)]
    nu, nv = len(ufun), len(vfun)
    N = nu + nv
    all_pts = list(xe) + [p for ab in dual for p in ab]
    if periodic:
        all_pts += [p + L for p in all_pts] + [p - L for p in all_pts]
    c2 = c * c

    M = np.zeros((N, N))
    A = np.zeros((N, N))

    def u_trial(j):
        return ufun[j][1], None

    def v_trial(k):
        return None, vfun[k][1]

    trials = [u_trial(j) for j in range(nu)] + [v_trial(k) for k in range(nv)]
    zero = lambda x, d=0, side=0: np.zeros_like(np.asarray(x, float))

    def flux_v_star(ut, vt, x, bside):
        """v* at a u-face x; bside = -1 left boundary, +1 right boundary, 0 interior."""
        if bside == 0:
            if staggered:
                vv = vt(x, 0, 0)
            else:
                vv = alpha * vt(x, 0, -1) + (1 - alpha) * vt(x, 0, +1)
            return vv - beta * c2 * (ut(x, 1, -1) - ut(x, 1, +1))
        wv, _, pv, _ = bcs[0] if bside < 0 else bcs[1]
        s = -1 if bside < 0 else 1  # outward normal
        side = -s
        return wv * (vt(x, 0, side) - pv * c * s * ut(x, 1, side))

    def flux_ux_star(ut, vt, x, bside):
        if bside == 0:
            if staggered:
                ux = ut(x, 1, 0)
            else:
                ux = (1 - alpha) * ut(x, 1, -1) + alpha * ut(x, 1, +1)
            return ux - (tau / c2) * (vt(x, 0, -1) - vt(x, 0, +1))
        _, ww, _, pw = bcs[0] if bside < 0 else bcs[1]
        s = -1 if bside < 0 else 1
        side = -s
        # (c^2 u_x n)* / (c^2 n)
        return ww * (c2 * s * ut(x, 1, side) - pw * c * vt(x, 0, side)) / (c2 * s)

    def bside_of(x):
        if periodic:
            return 0
        if abs(x - xl) < 1e-12:
            return -1
        if abs(x - xr) < 1e-12:
            return 1
        return 0

    for i, (cell, phi) in enumerate(ufun):
        a, b = xe[cell], xe[cell + 1]
        segs = _breaks(a, b, all_pts)
        for jt, (ut, vt) in enumerate(trials):
            ut = ut or zero
            vt = vt or zero
            if phi.mode == 0:
                M[i, jt] = _integrate(lambda x: ut(x, 0, 0), segs)
                A[i, jt] = _integrate(lambda x: vt(x, 0, 0), segs)
                continue
            M[i, jt] = _integrate(lambda x: c2 * phi(x, 1, 0) * ut(x, 1, 0), segs)
            vol = -_integrate(lambda x: c2 * phi(x, 2, 0) * vt(x, 0, 0), segs)
            fr = c2 * phi(b, 1, -1) * flux_v_star(ut, vt, b, bside_of(b))
            fl = c2 * phi(a, 1, +1) * flux_v_star(ut, vt, a, bside_of(a))
            A[i, jt] = vol + fr - fl
    for r, (cell, psi) in enumerate(vfun):
        i = nu + r
        a, b = dual[cell]
        segs = _breaks(a, b, all_pts)
        for jt, (ut, vt) in enumerate(trials):
            ut = ut or zero
            vt = vt or zero
            M[i, jt] = _integrate(lambda x: psi(x, 0, 0) * vt(x, 0, 0), segs)
            vol = -_integrate(lambda x: c2 * psi(x, 1, 0) * ut(x, 1, 0), segs)
            xb = ((b - xl) % L) + xl if periodic and b >= xr - 1e-12 else b
            xa = ((a - xl) % L) + xl if periodic and a < xl - 1e-12 else a
            fr = c2 * psi(b, 0, -1) * flux_ux_star(ut, vt, xb, bside_of(b))
            fl = c2 * psi(a, 0, +1) * flux_ux_star(ut, vt, xa, bside_of(a))
            A[i, jt] = vol + fr - fl
    return M, A


class Basis2D:
    def __init__(self, rect, a, b):
        self.x = Basis1D(rect[0], rect[1], a)
        self.y = Basis1D(rect[2], rect[3], b)
        self.rect = rect

    def __call__(self, x, y, dx=0, dy=0, sx=0, sy=0):
        return self.x(x, dx, sx) * self.y(y, dy, sy)


def oracle_2d(n, q_u, q_v, c_fun, grad_c2, penalty=0.0):
    """Dense ``(M, A)`` for the 2D staggered scheme on [-1, 1]^2 with Dirichlet faces."""
    h = 2.0 / n
    xe = -1 + h * np.arange(n + 1)
    de = np.concatenate([[-1.0], 0.5 * (xe[:-1] + xe[1:]), [1.0]])
    brk = sorted(set(np.round(np.concatenate([xe, de]), 14)))
    ufun = []
    for i in range(n):
        for j in range(n):
            for a in range(q_u + 1):
                for b in range(q_u + 1):
                    ufun.append(((i, j), a * (q_u + 1) + b, Basis2D((xe[i], xe[i + 1], xe[j], xe[j + 1]), a, b)))
    vfun = []
    for I in range(n + 1):
        for J in range(n + 1):
            for a in range(q_v + 1):
                for b in range(q_v + 1):
                    vfun.append(((I, J), a * (q_v + 1) + b, Basis2D((de[I], de[I + 1], de[J], de[J + 1]), a, b)))
    nu, nv = len(ufun), len(vfun)
    N = nu + nv
    xg, wg = npleg.leggauss(12)
    c2 = lambda x, y: c_fun(x, y) ** 2

    def rect_int(f, x0, x1, y0, y1):
        tot = 0.0
        for a, b in _breaks(x0, x1, brk):
            X = 0.5 * (a + b) + 0.5 * (b - a) * xg
            for cc, d in _breaks(y0, y1, brk):
                Y = 0.5 * (cc + d) + 0.5 * (d - cc) * xg
                XX, YY = np.meshgrid(X, Y, indexing="ij")
                W = np.outer(wg, wg) * 0.25 * (b - a) * (d - cc)
                tot += np.sum(W * f(XX, YY))
        return tot

    def seg_int(f, t0, t1):
        tot = 0.0
        for a, b in _breaks(t0, t1, brk):
            T = 0.5 * (a + b) + 0.5 * (b - a) * xg
            tot += 0.5 * (b - a) * np.sum(wg * f(T))
        return tot

    zero = lambda *args, **kw: 0.0
    M = np.zeros((N, N))
    A = np.zeros((N, N))
    trials = [(f, None) for _, _, f in ufun] + [(None, f) for _, _, f in vfun]

    def touches(f, x0, x1, y0, y1):
        if f is None:
            return False
        a0, a1, b0, b1 = f.rect
        return a0 <= x1 + 1e-12 and x0 <= a1 + 1e-12 and b0 <= y1 + 1e-12 and y0 <= b1 + 1e-12

    def on_bdry(p):
        return abs(abs(p) - 1) < 1e-12

    for r, ((i, j), mode, phi) in enumerate(ufun):
        x0, x1, y0, y1 = xe[i], xe[i + 1], xe[j], xe[j + 1]
        for col, (ut, vt) in enumerate(trials):
            if not (touches(ut, x0, x1, y0, y1) or touches(vt, x0, x1, y0, y1)):
                continue
            ut = ut or zero
            vt = vt or zero
            if mode == 0:
                M[r, col] = rect_int(lambda X, Y: ut(X, Y) + 0 * X, x0, x1, y0, y1)
                A[r, col] = rect_int(lambda X, Y: vt(X, Y) + 0 * X, x0, x1, y0, y1)
                continue
            M[r, col] = rect_int(
                lambda X, Y: c2(X, Y) * (phi(X, Y, 1, 0) * ut(X, Y, 1, 0) + phi(X, Y, 0, 1) * ut(X, Y, 0, 1)) + 0 * X,
                x0, x1, y0, y1,
            )

            def div(X, Y):
                gx, gy = grad_c2(X, Y)
                return c2(X, Y) * (phi(X, Y, 2, 0) + phi(X, Y, 0, 2)) + gx * phi(X, Y, 1, 0) + gy * phi(X, Y, 0, 1)

            val = -rect_int(lambda X, Y: div(X, Y) * vt(X, Y), x0, x1, y0, y1)
            # four sides: (fixed coordinate, axis, outward sign)
            for fixed, axis, s in ((x1, 0, 1), (x0, 0, -1), (y1, 1, 1), (y0, 1, -1)):
                inside = -s  # side of the face where phi lives

                def integrand(T, fixed=fixed, axis=axis, s=s, inside=inside):
                    X, Y = (np.full_like(T, fixed), T) if axis == 0 else (T, np.full_like(T, fixed))
                    d = (1, 0) if axis == 0 else (0, 1)
                    sides = (inside, 0) if axis == 0 else (0, inside)
                    out = (-inside, 0) if axis == 0 else (0, -inside)
                    dphi = s * phi(X, Y, *d, *sides)
                    if on_bdry(fixed):
                        # v* = wv (v - pv c du/dn) with Dirichlet wv = 0
                        vstar = 0.0 * T
                    else:
                        # jump of c^2 grad u . n summed over both sides (beta = 0 in these tests)
                        vstar = vt(X, Y, 0, 0, *sides)
                    return c2(X, Y) * dphi * vstar

                lo, hi = (y0, y1) if axis == 0 else (x0, x1)
                val += seg_int(integrand, lo, hi)
            A[r, col] = val
    for rr, ((I, J), mode, psi) in enumerate(vfun):
        r = nu + rr
        x0, x1, y0, y1 = de[I], de[I + 1], de[J], de[J + 1]
        for col, (ut, vt) in enumerate(trials):
            if not (touches(ut, x0, x1, y0, y1) or touches(vt, x0, x1, y0, y1)):
                continue
            ut = ut or zero
            vt = vt or zero
            M[r, col] = rect_int(lambda X, Y: psi(X, Y) * vt(X, Y) + 0 * X, x0, x1, y0, y1)
            val = -rect_int(
                lambda X, Y: c2(X, Y) * (psi(X, Y, 1, 0) * ut(X, Y, 1, 0) + psi(X, Y, 0, 1) * ut(X, Y, 0, 1)) + 0 * X,
                x0, x1, y0, y1,
            )
            for fixed, axis, s in ((x1, 0, 1), (x0, 0, -1), (y1, 1, 1), (y0, 1, -1)):
                inside = -s

                def integrand(T, fixed=fixed, axis=axis, s=s, inside=inside):
                    X, Y = (np.full_like(T, fixed), T) if axis == 0 else (T, np.full_like(T, fixed))
                    d = (1, 0) if axis == 0 else (0, 1)
                    sides = (inside, 0) if axis == 0 else (0, inside)
                    # grad u . n is single valued on dual faces (interior to primal cells)
                    dn = s * ut(X, Y, *d, *sides)
                    wstar = c2(X, Y) * dn
                    if on_bdry(fixed):
                        wstar = wstar - penalty * c_fun(X, Y) * vt(X, Y, 0, 0, *sides)
                    return psi(X, Y, 0, 0, *sides) * wstar

                lo, hi = (y0, y1) if axis == 0 else (x0, x1)
                val += seg_int(integrand, lo, hi)
            A[r, col] = val
    return M, A


# --------------------------------------------------------------- energy rates
#
# Along the homogeneous flow every volume term cancels; what is left is a sum
# of squared jumps at interior faces and boundary traces:
#   dE/dt = -beta sum c^4 [u_n]^2 - tau sum [v]^2
#           - penalty sum_boundary (kappa c^3 u_n^2 + gamma c v^2) / (gamma + kappa)


def _functions_1d(n, q_u, q_v, staggered, xl, xr, periodic, w):
    h = (xr - xl) / n
    xe = xl + h * np.arange(n + 1)
    L = xr - xl
    per = L if periodic else None
    if staggered:
        centers = 0.5 * (xe[:-1] + xe[1:])
        if periodic:
            dual = [(centers[-1] - L, centers[0])] + [(centers[k - 1], centers[k]) for k in range(1, n)]
        else:
            edges = [xl] + list(centers) + [xr]
            dual = list(zip(edges[:-1], edges[1:]))
    else:
        dual = [(xe[j], xe[j + 1]) for j in range(n)]
    terms_u = [(Basis1D(xe[j], xe[j + 1], m, per)) for j in range(n) for m in range(q_u + 1)]
    terms_v = [(Basis1D(a, b, m, per)) for a, b in dual for m in range(q_v + 1)]
    nu = len(terms_u)

    def u(x, d, side):
        return sum(w[i] * f(x, d, side) for i, f in enumerate(terms_u))

    def v(x, side):
        return sum(w[nu + i] * f(x, 0, side) for i, f in enumerate(terms_v))

    vfaces = sorted({b for _, b in dual} | {a for a, _ in dual})
    if periodic:
        vfaces = sorted({round(((p - xl) % L) + xl, 13) for p in vfaces})
        vfaces = [p for p in vfaces if p < xr - 1e-12]
    else:
        vfaces = [p for p in vfaces if xl + 1e-12 < p < xr - 1e-12]
    return xe, vfaces, u, v


def energy_rate_1d(w, n, q_u, q_v, c=1.0, beta=0.0, tau=0.0, staggered=True, xl=-1.0, xr=1.0, periodic=True, bcs=None):
    """``bcs`` holds ``(gamma, kappa, penalty)`` per end, gamma and kappa normalized."""
    xe, vfaces, u, v = _functions_1d(n, q_u, q_v, staggered, xl, xr, periodic, w)
    c2 = c * c
    rate = 0.0
    interior = xe[:-1] if periodic else xe[1:-1]
    for x in interior:
        rate -= beta * c2 * c2 * float(u(x, 1, -1) - u(x, 1, +1)) ** 2
    # in the staggered scheme v only jumps at dual vertices, in the other one at primal vertices
    for x in (vfaces if staggered else interior):
        rate -= tau * float(v(x, -1) - v(x, +1)) ** 2
    if not periodic:
        for x, side, (g, k, pen) in ((xl, +1, bcs[0]), (xr, -1, bcs[1])):
            ux, vv = float(u(x, 1, side)), float(v(x, side))
            rate -= pen * (k * c**3 * ux**2 + g * c * vv**2) / (g + k)
    return rate


def energy_rate_2d(w, n, q_u, q_v, c_fun, beta=0.0, tau=0.0, penalty=0.0):
    """Jump-sum rate for the 2D staggered scheme on [-1, 1]^2 with Dirichlet walls."""
    h = 2.0 / n
    xe = -1 + h * np.arange(n + 1)
    de = np.concatenate([[-1.0], 0.5 * (xe[:-1] + xe[1:]), [1.0]])
    brk = sorted(set(np.round(np.concatenate([xe, de]), 14)))
    ufun = [
        Basis2D((xe[i], xe[i + 1], xe[j], xe[j + 1]), a, b)
        for i in range(n) for j in range(n) for a in range(q_u + 1) for b in range(q_u + 1)
    ]
    vfun = [
        Basis2D((de[I], de[I + 1], de[J], de[J + 1]), a, b)
        for I in range(n + 1) for J in range(n + 1) for a in range(q_v + 1) for b in range(q_v + 1)
    ]
    nu = len(ufun)
    xg, wg = npleg.leggauss(14)

    def u(X, Y, dx, dy, sx, sy):
        return sum(w[i] * f(X, Y, dx, dy, sx, sy) for i, f in enumerate(ufun))

    def v(X, Y, sx, sy):
        return sum(w[nu + i] * f(X, Y, 0, 0, sx, sy) for i, f in enumerate(vfun))

    def line_int(fixed, axis, g):
        tot = 0.0
        for a, b in _breaks(-1.0, 1.0, brk):
            T = 0.5 * (a + b) + 0.5 * (b - a) * xg
            F = np.full_like(T, fixed)
            X, Y = (F, T) if axis == 0 else (T, F)
            tot += 0.5 * (b - a) * np.sum(wg * g(X, Y))
        return tot

    rate = 0.0
    for axis in (0, 1):
        d = (1, 0) if axis == 0 else (0, 1)
        lo = (-1, 0) if axis == 0 else (0, -1)
        hi = (1, 0) if axis == 0 else (0, 1)
        for x in xe[1:-1]:
            jump = lambda X, Y: u(X, Y, *d, *lo) - u(X, Y, *d, *hi)
            rate -= beta * line_int(x, axis, lambda X, Y: c_fun(X, Y) ** 4 * jump(X, Y) ** 2)
        for x in de[1:-1]:
            rate -= tau * line_int(x, axis, lambda X, Y: (v(X, Y, *lo) - v(X, Y, *hi)) ** 2)
        for x, side in ((-1.0, hi), (1.0, lo)):
            rate -= penalty * line_int(x, axis, lambda X, Y: c_fun(X, Y) * v(X, Y, *side) ** 2)
    return rate
