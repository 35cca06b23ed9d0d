"""Modal Legendre machinery on the reference interval [-1, 1].

Polynomials are the classical, un-normalized Legendre family with
``P_n(1) = 1``; the modal mass matrix is therefore ``diag(2 / (2n + 1))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_CLAMP_TOL = 1e-12


def legendre_table(degree: int, x, nderiv: int = 0) -> np.ndarray:
    """Values (and derivatives) of ``P_0 .. P_degree`` at ``x``.

    Returns an array of shape ``(nderiv + 1, degree + 1, len(x))``; slice ``d``
    holds the ``d``-th derivative.  Uses the three-term recurrence and
    ``P'_{n+1} = P'_{n-1} + (2n + 1) P_n`` for derivatives.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((nderiv + 1, degree + 1, x.size))
    out[0, 0] = 1.0
    if degree >= 1:
        out[0, 1] = x
    for n in range(1, degree):
        out[0, n + 1] = ((2 * n + 1) * x * out[0, n] - n * out[0, n - 1]) / (n + 1)
    for d in range(1, nderiv + 1):
        if degree >= 1 and d == 1:
            out[d, 1] = 1.0
        for n in range(1, degree):
            out[d, n + 1] = out[d, n - 1] + (2 * n + 1) * out[d - 1, n]
    return out


def legendre_eval(degree: int, x: float) -> float:
    """``P_degree(x)``; ``x`` may overshoot [-1, 1] by at most 1e-12."""
    if abs(x) > 1.0 + _CLAMP_TOL:
        raise ValueError(f"x={x} outside [-1, 1]")
    x = min(1.0, max(-1.0, float(x)))
    p_prev, p = 1.0, x
    if degree == 0:
        return 1.0
    for n in range(1, degree):
        p_prev, p = p, ((2 * n + 1) * x * p - n * p_prev) / (n + 1)
    return p


@lru_cache(maxsize=None)
def _gauss_rule_cached(m: int) -> tuple[np.ndarray, np.ndarray]:
    # Chebyshev-type initial guesses, Newton on P_m.
    k = np.arange(1, m + 1)
    x = np.cos(np.pi * (k - 0.25) / (m + 0.5))
    for _ in range(100):
        tab = legendre_table(m, x, nderiv=1)
        p, dp = tab[0, m], tab[1, m]
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    dp = legendre_table(m, x, nderiv=1)[1, m]
    w = 2.0 / ((1.0 - x**2) * dp**2)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1], exact to degree 2m - 1."""
    if m < 1:
        raise ValueError("gauss_rule needs m >= 1")
    if m == 1:
        return np.array([0.0]), np.array([2.0])
    x, w = _gauss_rule_cached(m)
    return x.copy(), w.copy()


def eval_at(coeffs, points) -> np.ndarray:
    """Evaluate the modal expansion ``sum_n c_n P_n`` at ``points``."""
    coeffs = np.asarray(coeffs, dtype=float)
    tab = legendre_table(coeffs.size - 1, points)[0]
    return coeffs @ tab


def mass_diagonal(degree: int) -> np.ndarray:
    n = np.arange(degree + 1)
    return 2.0 / (2 * n + 1)


@dataclass(frozen=True)
class ReferenceBasis:
    """Legendre modes of one degree together with a quadrature rule."""

    degree: int
    nquad: int
    quad_nodes: np.ndarray = field(init=False, repr=False)
    quad_weights: np.ndarray = field(init=False, repr=False)
    vandermonde: np.ndarray = field(init=False, repr=False)
    vandermonde_deriv: np.ndarray = field(init=False, repr=False)
    vandermonde_deriv2: np.ndarray = field(init=False, repr=False)
    edge_values_left: np.ndarray = field(init=False, repr=False)
    edge_values_right: np.ndarray = field(init=False, repr=False)
    mass_diagonal: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        x, w = gauss_rule(self.nquad)
        tab = legendre_table(self.degree, x, nderiv=2)
        edges = legendre_table(self.degree, [-1.0, 1.0], nderiv=2)
        values = {
            "quad_nodes": x,
            "quad_weights": w,
            # rows: quadrature points, columns: modes
            "vandermonde": tab[0].T.copy(),
            "vandermonde_deriv": tab[1].T.copy(),
            "vandermonde_deriv2": tab[2].T.copy(),
            "edge_values_left": edges[0, :, 0].copy(),
            "edge_values_right": edges[0, :, 1].copy(),
            "mass_diagonal": mass_diagonal(self.degree),
        }
        for name, arr in values.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def nmodes(self) -> int:
        return self.degree + 1

    def table(self, points, nderiv: int = 1) -> np.ndarray:
        """Basis values at arbitrary reference points, shape (nderiv+1, npts, nmodes)."""
        return np.transpose(legendre_table(self.degree, points, nderiv), (0, 2, 1))

    def project(self, values_at_nodes: np.ndarray) -> np.ndarray:
        """L2 projection of samples at the quadrature nodes onto the modes."""
        return (self.vandermonde.T @ (self.quad_weights * values_at_nodes)) / self.mass_diagonal


def quadrature_size(q_u: int, q_v: int, variable_coefficient: bool = False) -> int:
    """Gauss points per direction so the scheme's integrals are exact."""
    return max(q_u, q_v) + (4 if variable_coefficient else 2)


def inverse_constant_global(k: int) -> float:
    """sup ||p_x|| / (k^2 ||p||) over p in Q^k on [-1, 1]."""
    if k == 0:
        return 0.0
    return _ratio_max(k, -1.0, 1.0, deriv=True) / k**2


def inverse_constant_half(k: int) -> tuple[float, float]:
    """Half-interval ratios for Q^k on [-1, 1].

    Returns ``(sup ||p_x||_{[-1/2,1/2]} / (k ||p||), sup |p(1/2)| / (sqrt(k+1) ||p||))``.
    """
    d = _ratio_max(k, -0.5, 0.5, deriv=True) / k if k > 0 else 0.0
    e = legendre_table(k, [0.5])[0, :, 0] / np.sqrt(mass_diagonal(k))
    return d, float(np.linalg.norm(e)) / np.sqrt(k + 1)


def _ratio_max(k: int, a: float, b: float, deriv: bool) -> float:
    # generalized eigenproblem in the orthonormal Legendre basis
    x, w = gauss_rule(k + 2)
    xs = 0.5 * (b - a) * x + 0.5 * (a + b)
    tab = legendre_table(k, xs, nderiv=1)
    scale = 1.0 / np.sqrt(mass_diagonal(k))
    vals = (tab[1] if deriv else tab[0]) * scale[:, None]
    gram = (vals * (0.5 * (b - a) * w)) @ vals.T
    return float(np.sqrt(np.max(np.linalg.eigvalsh(gram))))
