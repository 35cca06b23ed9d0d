"""Types shared by the 1D and 2D assemblers.

An assembled scheme is the linear system ``M dW/dt = A W + F(t)``.  Both M
and A are built element block by element block; the operator stores
``K = M^{-1} A`` as a CSR matrix plus the projected forcing terms, so that
``apply`` is one sparse product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import scipy.sparse as sp

from .mesh import DofLayout


@dataclass(frozen=True)
class FluxParams:
    """Numerical flux parameters: averaging weight and the two penalties."""

    alpha: float = 0.5
    beta: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.beta < 0 or self.tau < 0:
            raise ValueError("beta and tau must be nonnegative")

    @classmethod
    def order_scaled(cls, beta_hat: float, tau_hat: float, q_u: int, q_v: int, c: float = 1.0):
        """Penalties that keep the staggered operator norm linear in the degree."""
        return cls(0.5, beta_hat / (q_u * c), c * tau_hat / (q_v + 1))


@dataclass(frozen=True)
class BoundaryCondition:
    """``gamma u_t + kappa c n.grad u = 0``, normalized to gamma^2 + kappa^2 = 1."""

    gamma: float
    kappa: float
    penalty: float = 1.0

    def __post_init__(self):
        if self.penalty < 0:
            raise ValueError("penalty must be nonnegative")
        if self.gamma < 0 or self.kappa < 0:
            raise ValueError("gamma and kappa must be nonnegative")
        norm = float(np.hypot(self.gamma, self.kappa))
        if norm == 0.0:
            raise ValueError("gamma and kappa cannot both vanish")
        object.__setattr__(self, "gamma", self.gamma / norm)
        object.__setattr__(self, "kappa", self.kappa / norm)

    @classmethod
    def dirichlet(cls, penalty: float = 0.0):
        return cls(1.0, 0.0, penalty)

    @classmethod
    def neumann(cls, penalty: float = 0.0):
        return cls(0.0, 1.0, penalty)

    @classmethod
    def parse(cls, name: str):
        name = name.strip().lower()
        if name == "dirichlet":
            return cls.dirichlet()
        if name == "neumann":
            return cls.neumann()
        if name in ("absorbing", "characteristic"):
            return cls(1.0, 1.0)
        raise ValueError(f"unknown boundary condition {name!r}")

    @property
    def v_weight(self) -> float:
        """Coefficient of the v* boundary flux."""
        return self.kappa / (self.gamma + self.kappa)

    @property
    def w_weight(self) -> float:
        """Coefficient of the (c^2 n.grad u)* boundary flux."""
        return self.gamma / (self.gamma + self.kappa)

    @property
    def v_penalty(self) -> float:
        """Coefficient of the ``c n.grad u`` term in v*."""
        return self.penalty * self.v_weight

    @property
    def w_penalty(self) -> float:
        """Coefficient of the ``c v`` term in (c^2 n.grad u)*."""
        return self.penalty * self.w_weight


@dataclass(frozen=True)
class ForcingTerm:
    """Separable forcing ``theta(t) * g(x)`` already multiplied by M^{-1}.

    ``time_derivative(t, r)`` returns the r-th time derivative of theta.
    """

    vector: np.ndarray
    time_derivative: Callable[[float, int], float]


def sine_time(omega: float, phase: float = 0.0) -> Callable[[float, int], float]:
    """Derivatives of ``sin(omega t + phase)``."""

    def theta(t: float, r: int) -> float:
        return omega**r * np.sin(omega * t + phase + 0.5 * np.pi * r)

    return theta


@dataclass
class DgState:
    """Flat coefficient vector in DofLayout order plus the current time."""

    w: np.ndarray
    layout: DofLayout
    time: float = 0.0

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if self.w.shape != (self.layout.total_dofs,):
            raise ValueError(f"state has {self.w.shape} entries, layout needs {self.layout.total_dofs}")

    @property
    def u_coeffs(self) -> np.ndarray:
        return self.layout.split(self.w)[0]

    @property
    def v_coeffs(self) -> np.ndarray:
        return self.layout.split(self.w)[1]

    def copy(self) -> "DgState":
        return DgState(self.w.copy(), self.layout, self.time)


Key = tuple[str, int]


class BlockAssembler:
    """Accumulates dense element-pair blocks of a sparse matrix.

    Keys are ``("u", e)`` or ``("v", k)``; a block couples the test modes of
    the row element with the trial modes of the column element.
    """

    def __init__(self):
        self.blocks: dict[tuple[Key, Key], np.ndarray] = {}

    def add(self, row: Key, col: Key, block: np.ndarray) -> None:
        cur = self.blocks.get((row, col))
        if cur is None:
            self.blocks[(row, col)] = np.array(block, dtype=float)
        else:
            cur += block

    def add_form(self, test: tuple[Key, np.ndarray], weights: np.ndarray, trial) -> None:
        """Add ``sum_p w_p test[p, i] * trial[p, j]`` for each trial element.

        ``test`` is ``(key, values)`` with values of shape (npts, ntest);
        ``trial`` is an iterable of ``(key, values)`` pairs, values (npts, ntrial).
        """
        key, tv = test
        tw = tv.T * weights
        for tkey, vals in trial:
            self.add(key, tkey, tw @ vals)

    def to_csr(self, layout: DofLayout) -> sp.csr_matrix:
        return blocks_to_csr(self.blocks, layout)


def key_offset(layout: DofLayout, key: Key) -> int:
    kind, e = key
    return layout.u_offset(e) if kind == "u" else layout.v_offset(e)


def blocks_to_csr(blocks: dict, layout: DofLayout, consume: bool = False) -> sp.csr_matrix:
    """Scatter dense blocks into CSR; ``consume`` empties ``blocks`` on the way to save memory."""
    n = layout.total_dofs
    nnz = sum(b.size for b in blocks.values())
    if nnz == 0:
        return sp.csr_matrix((n, n))
    rows = np.empty(nnz, dtype=np.int32)
    cols = np.empty(nnz, dtype=np.int32)
    vals = np.empty(nnz)
    pos = 0
    for key in list(blocks):
        blk = blocks.pop(key) if consume else blocks[key]
        rk, ck = key
        r0, c0 = key_offset(layout, rk), key_offset(layout, ck)
        nr, nc = blk.shape
        end = pos + blk.size
        rows[pos:end] = np.repeat(np.arange(r0, r0 + nr, dtype=np.int32), nc)
        cols[pos:end] = np.tile(np.arange(c0, c0 + nc, dtype=np.int32), nr)
        vals[pos:end] = blk.ravel()
        pos = end
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    del rows, cols, vals
    mat = mat.tocsr()
    mat.sum_duplicates()
    return mat


@dataclass
class SemiDiscreteOperator:
    """``dW/dt = K W + sum_i theta_i(t) g_i`` with ``K = M^{-1} A``.

    ``mass`` is M, ``energy_matrix`` is M with the cell-average rows removed
    (so ``0.5 W^T E W`` is the discrete energy).
    """

    layout: DofLayout
    K: sp.csr_matrix
    mass: sp.csr_matrix
    energy_matrix: sp.csr_matrix
    forcing: list[ForcingTerm] = field(default_factory=list)
    scheme: str = "staggered"
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def total_dofs(self) -> int:
        return self.layout.total_dofs

    @property
    def stiffness(self) -> sp.csr_matrix:
        """A = M K."""
        return (self.mass @ self.K).tocsr()

    def forcing_derivative(self, t: float, r: int = 0):
        """r-th time derivative of the projected forcing, or None if unforced."""
        if not self.forcing:
            return None
        out = np.zeros(self.total_dofs)
        for term in self.forcing:
            out += term.time_derivative(t, r) * term.vector
        return out

    def rhs(self, w: np.ndarray, t: float = 0.0) -> np.ndarray:
        out = self.K @ w
        f = self.forcing_derivative(t, 0)
        if f is not None:
            out = out + (f if out.ndim == 1 else f[:, None])
        return out

    def apply(self, state: DgState, t: float | None = None) -> DgState:
        """Time derivative of ``state``; the result is returned as a DgState."""
        t = state.time if t is None else t
        return DgState(self.rhs(state.w, t), self.layout, t)

    def energy(self, w) -> float:
        w = w.w if isinstance(w, DgState) else np.asarray(w)
        return 0.5 * float(w @ (self.energy_matrix @ w))

    def energy_rate(self, w) -> float:
        """dE/dt along the homogeneous semi-discrete flow."""
        w = w.w if isinstance(w, DgState) else np.asarray(w)
        return float(w @ (self.energy_matrix @ (self.K @ w)))

    def zero_state(self, t: float = 0.0) -> DgState:
        return DgState(np.zeros(self.total_dofs), self.layout, t)

    def without_forcing(self) -> "SemiDiscreteOperator":
        return SemiDiscreteOperator(self.layout, self.K, self.mass, self.energy_matrix, [], self.scheme, dict(self.meta))


def finalize_operator(
    layout: DofLayout,
    stiffness: BlockAssembler,
    mass_blocks: dict[Key, np.ndarray],
    forcing_sources: list[tuple[dict[Key, np.ndarray], Callable[[float, int], float]]] = (),
    scheme: str = "staggered",
    meta: dict[str, Any] | None = None,
) -> SemiDiscreteOperator:
    """Factorize the element mass blocks once and build K = M^{-1} A."""
    inv = {key: np.linalg.inv(blk) for key, blk in mass_blocks.items()}
    k_blocks = {}
    for key in list(stiffness.blocks):
        k_blocks[key] = inv[key[0]] @ stiffness.blocks.pop(key)
    K = blocks_to_csr(k_blocks, layout, consume=True)
    K.eliminate_zeros()
    mass = blocks_to_csr({(k, k): b for k, b in mass_blocks.items()}, layout)
    emass = {}
    for key, blk in mass_blocks.items():
        b = blk.copy()
        if key[0] == "u":
            b[0, :] = 0.0
            b[:, 0] = 0.0
        emass[(key, key)] = b
    energy = blocks_to_csr(emass, layout)
    forcing = []
    for src, theta in forcing_sources:
        vec = np.zeros(layout.total_dofs)
        for key, rhs in src.items():
            o = key_offset(layout, key)
            vec[o : o + rhs.size] += inv[key] @ rhs
        forcing.append(ForcingTerm(vec, theta))
    return SemiDiscreteOperator(layout, K, mass, energy, forcing, scheme, meta or {})

