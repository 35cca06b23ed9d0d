"""Spectral diagnostics: one-step matrices, eigenvalue audits, operator bounds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .dg1d import assemble_nonstaggered_1d, assemble_staggered_1d
from .mesh import build_mesh_1d
from .operator import FluxParams, SemiDiscreteOperator
from .timeint import LtsConfig, lts_advance, taylor_advance

MAX_DENSE_DOFS = 20000


@dataclass(frozen=True)
class OneStepMatrix:
    """Dense matrix B with ``W(t + dt) = B W(t)`` for the unforced system."""

    B: np.ndarray
    dt: float
    order: int
    lts: LtsConfig | None = None
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.B.shape[0]


def build_one_step_matrix(
    op: SemiDiscreteOperator,
    dt: float,
    order: int,
    lts: LtsConfig | None = None,
    max_dofs: int = MAX_DENSE_DOFS,
    chunk: int = 512,
) -> OneStepMatrix:
    """Apply one full step (global Taylor or LTS) to every unit vector."""
    n = op.total_dofs
    if n > max_dofs:
        raise ValueError(f"{n} DOFs exceeds the dense limit of {max_dofs}")
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    hom = op.without_forcing()
    B = np.empty((n, n))
    for c0 in range(0, n, chunk):
        c1 = min(n, c0 + chunk)
        block = np.zeros((n, c1 - c0))
        block[np.arange(c0, c1), np.arange(c1 - c0)] = 1.0
        if lts is None:
            B[:, c0:c1] = taylor_advance(hom, block, 0.0, dt, order)
        else:
            B[:, c0:c1] = lts_advance(hom, block, 0.0, dt, lts)
    info = {k: op.meta.get(k) for k in ("dim", "kind", "mesh", "q_u", "q_v")}
    return OneStepMatrix(B, dt, order, lts, info)


@dataclass(frozen=True)
class SpectrumReport:
    moduli: np.ndarray  # |lambda|, sorted descending

    @property
    def margins(self) -> np.ndarray:
        """``1 - |lambda|`` in ascending order (worst first)."""
        return 1.0 - self.moduli

    @property
    def min_margin(self) -> float:
        return float(self.margins.min())

    @property
    def max_growth(self) -> float:
        """``max |lambda| - 1``; positive means some mode grows."""
        return float(self.moduli[0] - 1.0)

    @property
    def spectral_radius(self) -> float:
        return float(self.moduli[0])

    def rows(self) -> list[tuple[int, float, float]]:
        """``(index, |lambda|, 1 - |lambda|)`` with the largest modulus first."""
        return [(i, float(m), float(1.0 - m)) for i, m in enumerate(self.moduli)]

    def stable(self, tol: float = 1e-8) -> bool:
        return self.min_margin > -tol


def eig_moduli(B) -> SpectrumReport:
    mat = B.B if isinstance(B, OneStepMatrix) else np.asarray(B)
    lam = sla.eigvals(mat, overwrite_a=False, check_finite=True)
    return SpectrumReport(np.sort(np.abs(lam))[::-1])


def stability_audit(op: SemiDiscreteOperator, dt: float, order: int, lts: LtsConfig | None = None) -> SpectrumReport:
    return eig_moduli(build_one_step_matrix(op, dt, order, lts))


def w1_blocks(op: SemiDiscreteOperator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense ``(K11, M11, A11)`` on the subspace without the u cell averages."""
    w1 = op.layout.w1_indices
    K = op.K[w1][:, w1].toarray()
    M = op.mass[w1][:, w1].toarray()
    return K, M, M @ K


def spectral_radius_semidiscrete(op: SemiDiscreteOperator) -> float:
    """max |eig(M^{-1} A)| restricted to W1."""
    K, _, _ = w1_blocks(op)
    return float(np.max(np.abs(sla.eigvals(K))))


def energy_norm(op: SemiDiscreteOperator) -> float:
    """``||M11^{-1} A11||`` in the M11 inner product, i.e. ``sigma_max(L^{-1} A11 L^{-T})``."""
    _, M, A = w1_blocks(op)
    L = np.linalg.cholesky(M)
    X = sla.solve_triangular(L, A, lower=True)
    X = sla.solve_triangular(L, X.T, lower=True).T
    return float(np.linalg.norm(X, 2))


def fit_power_law(x, y) -> tuple[float, float]:
    """Least-squares ``y = a x^b``; returns ``(b, a)``."""
    b, loga = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(b), float(np.exp(loga))


def convergence_rate(h, err) -> float:
    return fit_power_law(h, err)[0]


# constants of the operator-norm bounds
C1 = 2.0 * np.sqrt(3.0)
C2 = 2.0
C3 = (8.0 * np.sqrt(3.0) + 4.0) / 3.0
C4 = 128.0 / (np.sqrt(3.0) * np.pi)
C5 = 4.0


def nonstaggered_bound(q_u: int, q_v: int, h: float, c: float, flux: FluxParams) -> float:
    pen = max(c * flux.beta * q_u**2, (flux.tau / c) * (q_v + 1) ** 2)
    avg = (abs(flux.alpha) + abs(1.0 - flux.alpha)) * (q_v + 1) * q_u
    return (c / h) * (C1 * max((q_u - 1) ** 2, q_v**2) + C2 * (2.0 * pen + avg))


def staggered_bound(q_u: int, q_v: int, h: float, c: float, flux: FluxParams) -> float:
    pen = max(c * flux.beta * q_u**2, (flux.tau / c) * (q_v + 1) ** 2)
    return (c / h) * (C3 * (q_u + q_v - 1) + C4 * np.sqrt(q_u * (q_v + 1)) + C5 * pen)


@dataclass(frozen=True)
class BoundCase:
    scheme: str
    q_u: int
    q_v: int
    h: float
    flux: FluxParams
    measured: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound * (1.0 + 1e-12)


@dataclass
class BoundCheckReport:
    cases: list[BoundCase] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def violations(self) -> list[BoundCase]:
        return [c for c in self.cases if not c.ok]

    @property
    def passed(self) -> bool:
        return not self.violations and not self.errors


def check_operator_bounds(
    op: SemiDiscreteOperator,
    q_u: int | None = None,
    q_v: int | None = None,
    flux: FluxParams | None = None,
    c: float | None = None,
    h: float | None = None,
) -> BoundCase:
    """Compare the measured W1 energy norm of a periodic 1D operator with its analytic bound.

    Missing parameters are read from the operator; a violation shows up as
    ``ok == False`` on the returned case.
    """
    meta = op.meta
    if meta.get("dim") != 1:
        raise ValueError("operator bounds are only available in 1D")
    q_u = meta["q_u"] if q_u is None else q_u
    q_v = meta["q_v"] if q_v is None else q_v
    flux = meta["flux"] if flux is None else flux
    c = meta["c"] if c is None else c
    h = meta["mesh"].h if h is None else h
    scheme = meta["kind"]
    bound_fn = staggered_bound if scheme == "staggered" else nonstaggered_bound
    return BoundCase(scheme, q_u, q_v, h, flux, energy_norm(op), bound_fn(q_u, q_v, h, c, flux))


def bound_sweep(
    degrees=range(2, 11),
    hs=(2 / 5, 2 / 10),
    fluxes=None,
    c: float = 1.0,
    schemes=("nonstaggered", "staggered"),
    q_v_of=lambda q_u: q_u - 1,
) -> BoundCheckReport:
    """Run ``check_operator_bounds`` on periodic [-1, 1] for every combination.

    Failures to assemble or factor are recorded in ``errors`` rather than raised.
    """
    if fluxes is None:
        fluxes = [FluxParams(), FluxParams(0.5, 0.1 / c, 0.1 * c)]
    report = BoundCheckReport()
    for scheme in schemes:
        assemble = assemble_staggered_1d if scheme == "staggered" else assemble_nonstaggered_1d
        for q_u in degrees:
            q_v = q_v_of(q_u)
            for h in hs:
                n = int(round(2.0 / h))
                for flux in fluxes:
                    try:
                        op = assemble(build_mesh_1d(-1.0, 1.0, n, periodic=True), q_u, q_v, flux, c)
                        report.cases.append(check_operator_bounds(op))
                    except (ValueError, np.linalg.LinAlgError) as exc:
                        report.errors.append(f"{scheme} q_u={q_u} h={h}: {exc}")
    return report
