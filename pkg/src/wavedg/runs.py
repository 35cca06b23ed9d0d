"""Experiment configurations and drivers shared by the CLI, scripts and tests.

Each config is a dataclass whose field names are the flat config-file keys
with dots replaced by underscores (``flux.beta`` -> ``flux_beta``).
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .analysis import (
    build_one_step_matrix,
    convergence_rate,
    eig_moduli,
    SpectrumReport,
    spectral_radius_semidiscrete,
)
from .dg1d import assemble_nonstaggered_1d, assemble_staggered_1d, l2_error, project_initial_data_1d
from .dg2d import ManufacturedSolution, WaveSpeedField, assemble_staggered_2d, l2_error_2d, project_initial_data
from .mesh import build_mesh_1d, build_mesh_2d
from .operator import BoundaryCondition, DgState, FluxParams, SemiDiscreteOperator
from .timeint import LtsConfig, advance, make_lts


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class NumericalFailure(RuntimeError):
    """A run produced non-finite values."""

    def __init__(self, message: str, last_good_time: float | None = None):
        super().__init__(message)
        self.last_good_time = last_good_time


BC_NAMES = ("periodic", "dirichlet", "neumann", "absorbing")


@dataclass
class ProblemConfig:
    dim: int = 1
    scheme: str = "staggered"
    qu: int = 2
    qv: int | None = None
    flux_alpha: float = 0.5
    flux_beta: float = 0.0
    flux_tau: float = 0.0
    c: str = "1"
    x_left: float = -1.0
    x_right: float = 1.0
    bc_left: str = "periodic"
    bc_right: str = "periodic"
    bc: str = "dirichlet"
    bc_penalty: float = 0.0
    problem: str = "1d-wave"
    omega: float | None = None
    k1: float = 2.0
    k2: float = 2.0
    cfl: float = 0.1
    T: float = 1.0
    qT: int | None = None
    lts: str = "auto"
    m: int = 3
    p: int | None = None

    def validate(self) -> None:
        if self.dim not in (1, 2):
            raise ConfigError("dim must be 1 or 2")
        if self.scheme not in ("staggered", "nonstaggered"):
            raise ConfigError("scheme must be staggered or nonstaggered")
        if self.dim == 2 and self.scheme != "staggered":
            raise ConfigError("only the staggered scheme is available in 2D")
        if self.qu < 1 or self.q_v < 0:
            raise ConfigError("need qu >= 1 and qv >= 0")
        if self.cfl <= 0:
            raise ConfigError("cfl must be positive")
        if self.T < 0:
            raise ConfigError("T must be nonnegative")
        if self.flux_beta < 0 or self.flux_tau < 0:
            raise ConfigError("flux.beta and flux.tau must be nonnegative")
        if self.bc_penalty < 0:
            raise ConfigError("bc.penalty must be nonnegative")
        for name in (self.bc_left, self.bc_right, self.bc):
            if name not in BC_NAMES:
                raise ConfigError(f"unknown boundary condition {name!r}")
        if (self.bc_left == "periodic") != (self.bc_right == "periodic"):
            raise ConfigError("periodic must be set on both ends")
        if self.dim == 2 and self.bc == "periodic":
            raise ConfigError("2D meshes are bounded; use dirichlet, neumann or absorbing")
        if self.lts not in ("auto", "on", "off"):
            raise ConfigError("lts must be auto, on or off")
        if self.m < 1 or (self.p is not None and self.p < 1) or (self.qT is not None and self.qT < 1):
            raise ConfigError("m, p and qT must be positive")
        if self.x_right <= self.x_left:
            raise ConfigError("x.right must exceed x.left")
        known = ("1d-wave", "1d-standing", "gaussian") if self.dim == 1 else ("2d-manufactured", "gaussian")
        if self.problem not in known:
            raise ConfigError(f"problem must be one of {known} in {self.dim}D")
        speed(self)

    @property
    def q_v(self) -> int:
        if self.qv is not None:
            return self.qv
        return self.qu - 1 if self.dim == 1 else self.qu

    @property
    def order(self) -> int:
        return self.qT if self.qT is not None else self.qu + 1

    @property
    def substeps(self) -> int:
        return self.p if self.p is not None else self.order

    @property
    def periodic(self) -> bool:
        return self.dim == 1 and self.bc_left == "periodic"

    @property
    def flux(self) -> FluxParams:
        return FluxParams(self.flux_alpha, self.flux_beta, self.flux_tau)


@dataclass
class ConvergeConfig(ProblemConfig):
    n: tuple[int, ...] = (10, 20, 40)

    def validate(self) -> None:
        super().validate()
        if not self.n or min(self.n) < 2:
            raise ConfigError("every n must be at least 2")


@dataclass
class EvolveConfig(ProblemConfig):
    n: int = 10
    every: int = 1
    snapshot_every: int = 0
    snapshot_prefix: str = "snapshot"

    def validate(self) -> None:
        super().validate()
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.every < 1 or self.snapshot_every < 0:
            raise ConfigError("every must be positive and snapshot.every nonnegative")


@dataclass
class SpectrumConfig:
    scheme: str = "staggered"
    qu: tuple[int, ...] = tuple(range(4, 17))
    qv_offset: int = 0
    h: tuple[float, ...] = (0.4, 0.2, 0.1)
    flux_alpha: float = 0.5
    flux_beta: float = 0.0
    flux_tau: float = 0.0
    c: float = 1.0
    length: float = 2.0
    limits: str = ""

    def validate(self) -> None:
        if self.scheme not in ("staggered", "nonstaggered"):
            raise ConfigError("scheme must be staggered or nonstaggered")
        if not self.qu or min(self.qu) < 1 or min(self.qu) + self.qv_offset < 0:
            raise ConfigError("degrees must satisfy qu >= 1 and qu + qv.offset >= 0")
        if self.c <= 0 or self.length <= 0:
            raise ConfigError("c and length must be positive")
        for h in self.h:
            n = self.length / h
            if h <= 0 or abs(n - round(n)) > 1e-9 or round(n) < 2:
                raise ConfigError(f"h={h} does not divide the domain into at least 2 cells")
        if self.flux_beta < 0 or self.flux_tau < 0:
            raise ConfigError("flux.beta and flux.tau must be nonnegative")


@dataclass
class LtsAuditConfig:
    dim: int = 1
    qu: int = 14
    qv: int | None = None
    n: int = 10
    m: int = 3
    p: int | None = None
    qT: int | None = None
    cfl: float = 0.1
    c: str = "1"
    x_left: float = -1.0
    x_right: float = 1.5
    bc_left: str = "neumann"
    bc_right: str = "dirichlet"
    bc: str = "dirichlet"
    bc_penalty: float = 0.0
    flux_alpha: float = 0.5
    flux_beta: float = 0.0
    flux_tau: float = 0.0
    lts: str = "on"

    def validate(self) -> None:
        as_problem(self).validate()
        if self.n < 2:
            raise ConfigError("n must be at least 2")


def as_problem(cfg: LtsAuditConfig) -> ProblemConfig:
    keys = {f.name for f in dataclasses.fields(ProblemConfig)}
    vals = {k: v for k, v in dataclasses.asdict(cfg).items() if k in keys}
    vals["problem"] = "gaussian"
    return ProblemConfig(**vals)


# --------------------------------------------------------------------- setup


def speed(cfg: ProblemConfig):
    """Constant speed as a float (1D) or a WaveSpeedField (2D)."""
    text = str(cfg.c).strip().lower().replace(" ", "")
    if text in ("quadratic", "1+x^2+y^2"):
        if cfg.dim != 2:
            raise ConfigError("variable wave speed is only supported in 2D")
        return WaveSpeedField.quadratic()
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"cannot parse wave speed {cfg.c!r}") from None
    if value <= 0:
        raise ConfigError("wave speed must be positive")
    return value if cfg.dim == 1 else WaveSpeedField.constant(value)


def _bc(name: str, penalty: float) -> BoundaryCondition:
    bc = BoundaryCondition.parse(name)
    if name in ("dirichlet", "neumann"):
        bc = BoundaryCondition(bc.gamma, bc.kappa, penalty)
    return bc


@dataclass
class Setup:
    """Operator, exact solution and stepping parameters for one mesh."""

    op: SemiDiscreteOperator
    state: DgState
    dt: float
    nsteps: int
    order: int
    lts: LtsConfig | None
    exact: tuple[Callable, Callable] | None
    h: float


def _exact_1d(cfg: ProblemConfig, c: float):
    L = cfg.x_right - cfg.x_left
    if cfg.problem == "1d-wave":
        if not cfg.periodic:
            raise ConfigError("1d-wave needs periodic boundaries")
        w = cfg.omega if cfg.omega is not None else 2.0 * cfg.qu * math.pi
        if abs(w * L / (2 * math.pi) - round(w * L / (2 * math.pi))) > 1e-9:
            raise ConfigError("omega must be a multiple of 2 pi / length for a periodic wave")
        return (lambda x, t: np.sin(w * (x + c * t)), lambda x, t: w * c * np.cos(w * (x + c * t)))
    if cfg.problem == "1d-standing":
        if cfg.bc_left != "dirichlet" or cfg.bc_right != "dirichlet":
            raise ConfigError("1d-standing needs Dirichlet boundaries on both ends")
        w = cfg.k1 * math.pi / L
        a = cfg.x_left
        return (
            lambda x, t: np.sin(w * (x - a)) * np.cos(w * c * t),
            lambda x, t: -w * c * np.sin(w * (x - a)) * np.sin(w * c * t),
        )
    return None


def _gaussian(dim: int, x0: float = 0.0, width: float = 0.2):
    if dim == 1:
        return lambda x: np.exp(-((x - x0) / width) ** 2), lambda x: 0.0 * x
    return lambda x, y: np.exp(-((x - x0) ** 2 + (y - x0) ** 2) / width**2), lambda x, y: 0.0 * x


def build_setup(cfg: ProblemConfig, n: int) -> Setup:
    cfg.validate()
    c = speed(cfg)
    if cfg.dim == 1:
        mesh = build_mesh_1d(cfg.x_left, cfg.x_right, n, periodic=cfg.periodic)
        bcs = None if cfg.periodic else (_bc(cfg.bc_left, cfg.bc_penalty), _bc(cfg.bc_right, cfg.bc_penalty))
        assemble = assemble_staggered_1d if cfg.scheme == "staggered" else assemble_nonstaggered_1d
        op = assemble(mesh, cfg.qu, cfg.q_v, cfg.flux, c, bcs)
        exact = _exact_1d(cfg, c)
        if exact is None:
            u0, v0 = _gaussian(1, 0.5 * (cfg.x_left + cfg.x_right))
        else:
            u0, v0 = (lambda x, f=exact[0]: f(x, 0.0)), (lambda x, f=exact[1]: f(x, 0.0))
        state = project_initial_data_1d(op, u0, v0, 0.0)
        boundary = not cfg.periodic
    else:
        mesh = build_mesh_2d(n)
        bc = _bc(cfg.bc, cfg.bc_penalty)
        if cfg.problem == "2d-manufactured":
            if cfg.bc != "dirichlet":
                raise ConfigError("2d-manufactured needs Dirichlet boundaries")
            ms = ManufacturedSolution(cfg.k1, cfg.k2, c)
            op = assemble_staggered_2d(mesh, cfg.qu, cfg.q_v, cfg.flux, c, bc, ms.forcing_terms())
            exact = (ms.u, ms.v)
            state = project_initial_data(op, lambda x, y: ms.u(x, y, 0.0), lambda x, y: ms.v(x, y, 0.0))
        else:
            op = assemble_staggered_2d(mesh, cfg.qu, cfg.q_v, cfg.flux, c, bc)
            exact = None
            state = project_initial_data(op, *_gaussian(2))
        boundary = True
    h = mesh.h
    dt = cfg.cfl * h
    nsteps = max(1, int(math.ceil(cfg.T / dt - 1e-9))) if cfg.T > 0 else 0
    if nsteps:
        dt = cfg.T / nsteps
    use_lts = cfg.lts == "on" or (cfg.lts == "auto" and boundary)
    lts = None
    if use_lts:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lts = make_lts(op, cfg.m, cfg.substeps, cfg.order, allow_full=True)
    return Setup(op, state, dt, nsteps, cfg.order, lts, exact, h)


def _errors(setup: Setup, w: np.ndarray, t: float) -> tuple[float, float]:
    if setup.exact is None:
        return math.nan, math.nan
    st = DgState(w, setup.op.layout, t)
    if setup.op.meta["dim"] == 1:
        return l2_error(setup.op, st, setup.exact[0], setup.exact[1], t)
    return l2_error_2d(setup.op, st, setup.exact[0], setup.exact[1], t)


# ------------------------------------------------------------------ drivers


@dataclass
class ConvergenceResult:
    rows: list[tuple[int, float, float, float]] = field(default_factory=list)

    @property
    def rate_u(self) -> float:
        return self._rate(2)

    @property
    def rate_v(self) -> float:
        return self._rate(3)

    def _rate(self, col: int) -> float:
        pts = [(r[1], r[col]) for r in self.rows if np.isfinite(r[col]) and 0 < r[col] <= 1e3]
        if len(pts) < 2:
            return math.nan
        h, e = zip(*pts)
        return convergence_rate(h, e)


DIVERGED = 1e3


def run_convergence(cfg: ConvergeConfig, progress: Callable[[str], None] | None = None) -> ConvergenceResult:
    """Errors at time T on each mesh; divergent rows stay in the table but not in the fit."""
    cfg.validate()
    if cfg.problem == "gaussian":
        raise ConfigError("convergence studies need a problem with an exact solution")
    result = ConvergenceResult()
    for n in cfg.n:
        setup = build_setup(cfg, n)
        w, t = setup.state.w, 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for step in range(1, setup.nsteps + 1):
                w = advance(setup.op, w, t, setup.dt, setup.order, setup.lts)
                t = step * setup.dt
                if not np.all(np.isfinite(w)):
                    break
            eu, ev = _errors(setup, w, t) if np.all(np.isfinite(w)) else (math.inf, math.inf)
        result.rows.append((n, setup.h, eu, ev))
        if progress:
            progress(f"n={n} err_u={eu:.3e}" + ("  (diverged)" if not eu <= DIVERGED else ""))
        del setup
    return result


def load_limits(path: str) -> dict[int, float]:
    """Stability limits ``q,limit`` per line (user-supplied external table)."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            q, val = (s.strip() for s in line.replace(",", " ").split())
            out[int(q)] = float(val)
        except ValueError:
            raise ConfigError(f"bad line in limits table: {raw!r}") from None
    return out


def run_spectrum(cfg: SpectrumConfig) -> list[tuple]:
    """Rows ``(qu, h, rho, rho*h/qu[, limit/(rho*h)])`` for periodic 1D operators."""
    cfg.validate()
    limits = load_limits(cfg.limits) if cfg.limits else None
    flux = FluxParams(cfg.flux_alpha, cfg.flux_beta, cfg.flux_tau)
    assemble = assemble_staggered_1d if cfg.scheme == "staggered" else assemble_nonstaggered_1d
    rows = []
    for h in cfg.h:
        n = int(round(cfg.length / h))
        for qu in cfg.qu:
            mesh = build_mesh_1d(-0.5 * cfg.length, 0.5 * cfg.length, n, periodic=True)
            op = assemble(mesh, qu, qu + cfg.qv_offset, flux, cfg.c)
            rho = spectral_radius_semidiscrete(op)
            row = (qu, mesh.h, rho, rho * mesh.h / qu)
            if limits is not None:
                lim = limits.get(qu, math.nan)
                row = row + (lim / (rho * mesh.h),)
            rows.append(row)
    return rows


def run_ltsaudit(cfg: LtsAuditConfig) -> SpectrumReport:
    cfg.validate()
    prob = as_problem(cfg)
    setup = build_setup(prob, cfg.n)
    lts = setup.lts if cfg.lts != "off" else None
    B = build_one_step_matrix(setup.op, cfg.cfl * setup.h, prob.order, lts)
    return eig_moduli(B)


def write_snapshot(path: Path, op: SemiDiscreteOperator, w: np.ndarray, step: int) -> None:
    """Little-endian int64 header then float64 coefficients in DofLayout order.

    Header: dim, q_u, q_v, n_u_elems, nu_local, n_v_elems, nv_local, step.
    """
    lay = op.layout
    header = np.array(
        [op.meta["dim"], op.meta["q_u"], op.meta["q_v"], lay.n_u_elems, lay.nu_local, lay.n_v_elems, lay.nv_local, step],
        dtype="<i8",
    )
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(np.asarray(w, dtype="<f8").tobytes())


def read_snapshot(path) -> tuple[dict, np.ndarray]:
    raw = Path(path).read_bytes()
    head = np.frombuffer(raw[:64], dtype="<i8")
    keys = ("dim", "q_u", "q_v", "n_u_elems", "nu_local", "n_v_elems", "nv_local", "step")
    info = dict(zip(keys, (int(x) for x in head)))
    return info, np.frombuffer(raw[64:], dtype="<f8").copy()


def run_evolve(cfg: EvolveConfig, snapshot_dir: Path | None = None, on_row=None) -> list[tuple[float, float, float]]:
    """Time series ``(t, E^h, err_u)``; raises NumericalFailure on NaN/inf."""
    cfg.validate()
    setup = build_setup(cfg, cfg.n)
    op = setup.op
    w, t = setup.state.w.copy(), 0.0
    rows = []

    def record(step):
        with np.errstate(over="ignore", invalid="ignore"):
            row = (t, op.energy(w), _errors(setup, w, t)[0])
        if not math.isfinite(row[1]):
            raise NumericalFailure(f"energy overflow at t={t:.6g}", last_good)
        rows.append(row)
        if on_row:
            on_row(row)
        if snapshot_dir is not None and cfg.snapshot_every and step % cfg.snapshot_every == 0:
            write_snapshot(Path(snapshot_dir) / f"{cfg.snapshot_prefix}_{step:06d}.bin", op, w, step)

    last_good = 0.0
    record(0)
    for step in range(1, setup.nsteps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            w = advance(op, w, t, setup.dt, setup.order, setup.lts)
        t = step * setup.dt
        if not np.all(np.isfinite(w)):
            raise NumericalFailure(f"non-finite state at t={t:.6g}", last_good)
        last_good = t
        if step % cfg.every == 0 or step == setup.nsteps:
            record(step)
    return rows
