"""Time integration of local and non-local Fisher-KPP equations.

The scheme is IMEX: diffusion is advanced by Crank-Nicolson with a fourth
order compact (Numerov) mass matrix, the reaction explicitly (a trapezoidal
predictor-corrector pass inside :func:`run`, forward Euler or an
Adams-Bashforth extrapolation in the one-shot :func:`step`).  The first
steps of a run are Rannacher-smoothed (backward-Euler half steps) so that
discontinuous initial data do not ring.  Long horizons use a moving
computational window: when the front comes within ``window_margin`` of the
right boundary the window is shifted right, discarding trailing cells that
must already sit on the declared plateau.

Boundary conditions: pinned Dirichlet ``left_plateau`` or homogeneous Neumann
on the left (Neumann is the default for every model whose invaded state is
selected dynamically), homogeneous Dirichlet ``right_value`` on the right.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Union

import numpy as np
import scipy.linalg

from .front_analysis import FrontTrace
from .kernels import FftConvolver, SampledKernel
from .local_models import FrParams, GompertzParams, gompertz_g


@dataclass(frozen=True)
class Grid:
    """Uniform spatial grid in the lab frame.

    frame_shift records the cumulative window translation and must stay an
    integer multiple of dx.
    """

    x_left: float
    dx: float
    n: int
    frame_shift: float = 0.0

    def __post_init__(self):
        if self.dx <= 0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        if self.n < 16:
            raise ValueError(f"grid needs at least 16 points, got n={self.n}")
        cells = self.frame_shift / self.dx
        if abs(cells - round(cells)) > 1e-9 * max(1.0, abs(cells)):
            raise ValueError(
                f"frame_shift={self.frame_shift} is not a multiple of dx={self.dx}"
            )

    @property
    def positions(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.n)

    @property
    def x_right(self) -> float:
        return self.x_left + self.dx * (self.n - 1)


@dataclass(frozen=True)
class Field:
    """Solution snapshot: time, grid, values and declared far-field constants."""

    t: float
    grid: Grid
    values: np.ndarray
    left_plateau: float
    right_value: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.n,):
            raise ValueError(
                f"values shape {v.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")


# --- models -----------------------------------------------------------------


@dataclass(frozen=True)
class NonlocalModel:
    """u_t = u_xx + u(1 - phi * u) with a sampled competition kernel."""

    kernel: SampledKernel


@dataclass(frozen=True)
class LocalClassicModel:
    """u_t = u_xx + u(1 - u)."""


@dataclass(frozen=True)
class LocalFrModel:
    """u_t = u_xx + f_r(u) with the logarithmic KPP nonlinearity."""

    params: FrParams


@dataclass(frozen=True)
class LocalGompertzModel:
    """u_t = u_xx + u(1 - g(t, u)) with the time-dependent saturation."""

    params: GompertzParams


@dataclass(frozen=True)
class HeatModel:
    """u_t = u_xx; zero reaction, used for oracle work."""


Model = Union[NonlocalModel, LocalClassicModel, LocalFrModel, LocalGompertzModel, HeatModel]


def default_left_bc(model: Model) -> str:
    """Dirichlet pin for the classic equation, Neumann otherwise."""
    return "dirichlet" if isinstance(model, LocalClassicModel) else "neumann"


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters of a run.

    The window is [x_left, x_left + width] initially; it shifts right in
    ``shift_chunk`` increments whenever the front at ``front_level`` comes
    within ``window_margin`` of the right boundary, keeping at least
    ``left_keep`` of trailing profile.  ``shift_plateau_tol`` bounds how far
    discarded cells may deviate from the declared plateau (data-loss guard).
    """

    model: Model
    dx: float = 0.05
    dt: float = 0.02
    t_end: float = 100.0
    x_left: Optional[float] = None
    width: float = 800.0
    window_margin: float = 450.0
    left_keep: float = 300.0
    shift_chunk: float = 25.0
    front_level: float = 0.1
    trace_every: float = 0.5
    snapshot_every: float = 20.0
    left_bc: Optional[str] = None
    shift_plateau_tol: Optional[float] = None
    implicit_diffusion: bool = True

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dx, dt and t_end must be positive")
        if self.window_margin < 10 * self.dx:
            raise ValueError(
                f"window_margin={self.window_margin} must be at least 10*dx"
            )
        if not self.implicit_diffusion and self.dt > 0.45 * self.dx**2:
            raise ValueError(
                "explicit diffusion requires dt <= 0.45*dx^2; "
                "set implicit_diffusion=True for larger steps"
            )
        if self.width < self.left_keep + self.window_margin + 2 * self.shift_chunk:
            raise ValueError(
                "window width must cover left_keep + window_margin + 2*shift_chunk"
            )
        if self.left_bc not in (None, "dirichlet", "neumann"):
            raise ValueError(f"unknown left_bc {self.left_bc!r}")
        if not 0 < self.front_level:
            raise ValueError("front_level must be positive")

    @property
    def resolved_left_bc(self) -> str:
        return self.left_bc if self.left_bc is not None else default_left_bc(self.model)

    @property
    def resolved_plateau_tol(self) -> float:
        if self.shift_plateau_tol is not None:
            return self.shift_plateau_tol
        return 1e-6 if self.resolved_left_bc == "dirichlet" else 5e-3

    @property
    def resolved_x_left(self) -> float:
        if self.x_left is not None:
            return self.x_left
        return -(self.width - self.window_margin - 2 * self.shift_chunk)


@dataclass
class SolverReport:
    """Empirical bounds and bookkeeping of a completed run."""

    M_report: float
    min_value: float
    step_count: int
    shift_log: list
    stability_flags: dict
    sup_times: np.ndarray
    sup_values: np.ndarray

    def sup_over(self, t_lo: float, t_hi: float) -> float:
        """Max of the recorded sup series over [t_lo, t_hi]."""
        mask = (self.sup_times >= t_lo - 1e-12) & (self.sup_times <= t_hi + 1e-12)
        if not mask.any():
            raise ValueError(f"no sup samples recorded in [{t_lo}, {t_hi}]")
        return float(self.sup_values[mask].max())


class RunResult(NamedTuple):
    snapshots: list
    trace: FrontTrace
    report: SolverReport


class WindowShiftError(RuntimeError):
    """Shifting would discard values not yet settled on the plateau."""


# --- reaction terms ----------------------------------------------------------


def _make_reaction(model: Model, conv: Optional[FftConvolver]) -> Callable:
    """Return reaction(t, u, left_plateau, right_value) -> F with F(u<=0) = 0."""
    if isinstance(model, HeatModel):
        def react(t, u, lp, rv):
            return np.zeros_like(u)
    elif isinstance(model, LocalClassicModel):
        def react(t, u, lp, rv):
            F = u * (1.0 - u)
            F[u <= 0.0] = 0.0
            return F
    elif isinstance(model, LocalFrModel):
        r = model.params.r
        theta = model.params.theta_f

        def react(t, u, lp, rv):
            F = np.zeros_like(u)
            m = (u > 0.0) & (u < theta)
            if m.any():
                L = -np.log(u[m])
                F[m] = u[m] * (1.0 - L ** (1.0 - r))
            return F
    elif isinstance(model, LocalGompertzModel):
        p = model.params

        def react(t, u, lp, rv):
            F = u * (1.0 - gompertz_g(t, u, p))
            F[u <= 0.0] = 0.0
            return F
    elif isinstance(model, NonlocalModel):
        if conv is None:
            raise ValueError("non-local reaction needs a convolution workspace")

        def react(t, u, lp, rv):
            F = u * (1.0 - conv.apply(u, lp, rv))
            F[u <= 0.0] = 0.0
            return F
    else:
        raise TypeError(f"unknown model {model!r}")
    return react


# --- Crank-Nicolson core ------------------------------------------------------


class _CnCore:
    """Banded operators for one window size and boundary-condition choice.

    A = Mass - (dt/2) D and B = Mass + (dt/2) D, with D the second-difference
    operator and Mass the fourth-order compact (Numerov) mass matrix.  Row 0
    is either an identity row (Dirichlet) or the mirrored Neumann stencil; the
    last row is an identity row (Dirichlet).
    """

    def __init__(self, n: int, dx: float, dt: float, left_bc: str):
        self.n, self.dx, self.dt, self.left_bc = n, dx, dt, left_bc
        s = dt / dx**2
        self.a_diag = np.full(n, 10.0 / 12.0 + s)
        self.a_off = np.full(n - 1, 1.0 / 12.0 - 0.5 * s)
        self.b_diag = 10.0 / 12.0 - s
        self.b_off = 1.0 / 12.0 + 0.5 * s
        ab = np.zeros((3, n))
        ab[1] = self.a_diag
        ab[0, 1:] = self.a_off
        ab[2, :-1] = self.a_off
        # right boundary: identity row
        ab[1, -1] = 1.0
        ab[2, -2] = 0.0
        if left_bc == "dirichlet":
            ab[1, 0] = 1.0
            ab[0, 1] = 0.0
        else:  # mirrored ghost cell: u[-1] = u[1]
            ab[0, 1] = 2.0 * (1.0 / 12.0 - 0.5 * s)
        self._ab = ab

    def _apply_b(self, u: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        out[1:-1] = self.b_diag * u[1:-1] + self.b_off * (u[:-2] + u[2:])
        out[0] = self.b_diag * u[0] + 2.0 * self.b_off * u[1]
        out[-1] = 0.0
        return out

    @staticmethod
    def _apply_mass(F: np.ndarray) -> np.ndarray:
        out = np.empty_like(F)
        out[1:-1] = (10.0 * F[1:-1] + F[:-2] + F[2:]) / 12.0
        out[0] = (10.0 * F[0] + 2.0 * F[1]) / 12.0
        out[-1] = 0.0
        return out

    def advance(self, u, F_hat, left_value, right_value, scale=1.0):
        """One implicit step: A u+ = B u + scale*dt*Mass(F_hat) + boundaries.

        ``scale`` < 1 is used by the backward-Euler startup half steps, which
        share the same left-hand matrix.
        """
        rhs = self._apply_b(u) if scale == 1.0 else self._apply_mass(u)
        rhs += (scale * self.dt) * self._apply_mass(F_hat)
        rhs[-1] = right_value
        if self.left_bc == "dirichlet":
            rhs[0] = left_value
        return scipy.linalg.solve_banded((1, 1), self._ab, rhs,
                                         overwrite_b=True, check_finite=False)

    def advance_be_half(self, u, F, left_value, right_value):
        """Backward-Euler half step (Rannacher startup); reuses the CN matrix."""
        return self.advance(u, F, left_value, right_value, scale=0.5)


def _rightmost_crossing(u, x_left, dx, level):
    above = u >= level
    if not above.any():
        return None
    if above[-1]:
        return x_left + dx * (len(u) - 1)
    cross = above[:-1] & ~above[1:]
    j = int(np.nonzero(cross)[0][-1])
    u0, u1 = float(u[j]), float(u[j + 1])
    return x_left + dx * (j + (u0 - level) / (u0 - u1))


# --- public operations --------------------------------------------------------


def step(field: Field, config: SolverConfig,
         prev_reaction: Optional[np.ndarray] = None) -> Field:
    """Advance one IMEX step: Crank-Nicolson diffusion, explicit reaction.

    With ``prev_reaction`` (the reaction array of the previous step) the
    reaction is extrapolated Adams-Bashforth-2 style; otherwise forward Euler.
    """
    if abs(field.grid.dx - config.dx) > 1e-12 * config.dx:
        raise ValueError("field grid spacing does not match config.dx")
    conv = None
    if isinstance(config.model, NonlocalModel):
        conv = FftConvolver(config.model.kernel, field.grid.n)
    react = _make_reaction(config.model, conv)
    core = _CnCore(field.grid.n, config.dx, config.dt, config.resolved_left_bc)
    F = react(field.t, field.values, field.left_plateau, field.right_value)
    F_hat = F if prev_reaction is None else 1.5 * F - 0.5 * prev_reaction
    u_new = core.advance(field.values, F_hat, field.left_plateau, field.right_value)
    if not np.all(np.isfinite(u_new)):
        raise RuntimeError(f"non-finite values produced at t={field.t + config.dt}")
    return Field(
        t=field.t + config.dt,
        grid=field.grid,
        values=u_new,
        left_plateau=field.left_plateau,
        right_value=field.right_value,
    )


def shift_window(field: Field, amount: float,
                 plateau_tol: float = 1e-6) -> Field:
    """Translate the window right by ``amount`` (a multiple of dx).

    Discarded cells must already sit on the declared left plateau within
    ``plateau_tol``; new right cells are filled with the declared right value.
    Lab-frame positions of retained samples are unchanged.
    """
    dx = field.grid.dx
    cells = amount / dx
    k = int(round(cells))
    if abs(cells - k) > 1e-9 * max(1.0, abs(cells)) or k < 0:
        raise ValueError(f"shift amount {amount} is not a nonnegative multiple of dx")
    if k == 0:
        return field
    if k >= field.grid.n:
        raise WindowShiftError("shift discards the entire window")
    dev = float(np.max(np.abs(field.values[:k] - field.left_plateau)))
    if dev > plateau_tol:
        raise WindowShiftError(
            f"shift would discard values {dev:.3g} away from the plateau "
            f"(tolerance {plateau_tol:.3g})"
        )
    values = np.empty_like(field.values)
    values[:-k] = field.values[k:]
    values[-k:] = field.right_value
    grid = Grid(
        x_left=field.grid.x_left + k * dx,
        dx=dx,
        n=field.grid.n,
        frame_shift=field.grid.frame_shift + k * dx,
    )
    return Field(t=field.t, grid=grid, values=values,
                 left_plateau=field.left_plateau, right_value=field.right_value)


def indicator_initial(x0: float = 0.0, amplitude: float = 1.0) -> Callable:
    """Initial profile amplitude * 1_{x <= x0}."""
    def u0(x):
        return np.where(x <= x0, amplitude, 0.0)
    return u0


def bump_initial(center: float, half_width: float, amplitude: float) -> Callable:
    """Initial profile amplitude * 1_{|x - center| <= half_width}."""
    def u0(x):
        return np.where(np.abs(x - center) <= half_width, amplitude, 0.0)
    return u0


def run(config: SolverConfig, u0: Callable) -> RunResult:
    """Integrate from the profile ``u0`` (a function of lab position x).

    Returns snapshots at the snapshot cadence (including t=0 and t=t_end), the
    front trace at ``config.front_level``, and a report with the empirical
    sup-norm bound, the shift log and stability bookkeeping.
    """
    dx, dt = config.dx, config.dt
    n = int(round(config.width / dx)) + 1
    x_left = config.resolved_x_left
    grid = Grid(x_left=x_left, dx=dx, n=n)
    x = grid.positions
    u = np.asarray(u0(x), dtype=float).copy()
    if u.shape != x.shape:
        raise ValueError("initial profile must evaluate pointwise on the grid")
    left_plateau = float(u[0])
    right_value = 0.0

    conv = None
    if isinstance(config.model, NonlocalModel):
        if abs(config.model.kernel.spec.dx - dx) > 1e-12 * dx:
            raise ValueError("kernel and solver grid spacings differ")
        conv = FftConvolver(config.model.kernel, n)
    react = _make_reaction(config.model, conv)
    core = _CnCore(n, dx, dt, config.resolved_left_bc)

    n_steps = int(round(config.t_end / dt))
    trace_stride = max(1, int(round(config.trace_every / dt)))
    snap_stride = max(1, int(round(config.snapshot_every / dt)))
    shift_cells = int(round(config.shift_chunk / dx))
    plateau_tol = config.resolved_plateau_tol

    snapshots = []
    trace_t, trace_x, sup_t, sup_v = [], [], [], []
    shift_log = []
    m_report = float(u.max())
    min_value = float(u.min())
    level = config.front_level

    def take_snapshot(t_now, u_now, grid_now, lp_now):
        snapshots.append(Field(t=t_now, grid=grid_now, values=u_now.copy(),
                               left_plateau=lp_now, right_value=right_value))

    def record_trace(t_now, u_now, grid_now):
        pos = _rightmost_crossing(u_now, grid_now.x_left, dx, level)
        if pos is not None:
            trace_t.append(t_now)
            trace_x.append(pos)
        sup_t.append(t_now)
        sup_v.append(float(u_now.max()))

    take_snapshot(0.0, u, grid, left_plateau)
    record_trace(0.0, u, grid)

    rannacher_steps = 2
    for k in range(n_steps):
        t = k * dt
        F = react(t, u, left_plateau, right_value)
        if k < rannacher_steps:
            u = core.advance_be_half(u, F, left_plateau, right_value)
            F_mid = react(t + 0.5 * dt, u, left_plateau, right_value)
            u = core.advance_be_half(u, F_mid, left_plateau, right_value)
        else:
            # predictor-corrector: trapezoidal reaction around the CN step
            u_pred = core.advance(u, F, left_plateau, right_value)
            F_new = react(t + dt, u_pred, left_plateau, right_value)
            u = core.advance(u, 0.5 * (F + F_new), left_plateau, right_value)
        t = (k + 1) * dt
        if not np.isfinite(u[0]) or not np.all(np.isfinite(u)):
            raise RuntimeError(f"non-finite values produced at step {k + 1}, t={t}")
        um = float(u.max())
        if um > m_report:
            m_report = um
        umin = float(u.min())
        if umin < min_value:
            min_value = umin

        if (k + 1) % trace_stride == 0 or k + 1 == n_steps:
            record_trace(t, u, grid)
            front = trace_x[-1] if trace_t and trace_t[-1] == t else None
            if front is not None:
                if grid.x_right - front < 2 * dx:
                    raise RuntimeError(
                        "front reached the right boundary despite shifting; "
                        "window too small"
                    )
                if grid.x_right - front < config.window_margin:
                    if config.resolved_left_bc == "neumann":
                        left_plateau = float(u[:shift_cells].mean())
                    dev = float(np.max(np.abs(u[:shift_cells] - left_plateau)))
                    if dev > plateau_tol:
                        raise WindowShiftError(
                            f"shift at t={t} would discard values {dev:.3g} away "
                            f"from the plateau (tolerance {plateau_tol:.3g})"
                        )
                    if front - (grid.x_left + config.shift_chunk) < config.left_keep:
                        raise RuntimeError(
                            "window too narrow to keep left_keep behind the front"
                        )
                    u[: n - shift_cells] = u[shift_cells:]
                    u[n - shift_cells:] = right_value
                    grid = Grid(x_left=grid.x_left + config.shift_chunk, dx=dx,
                                n=n, frame_shift=grid.frame_shift + config.shift_chunk)
                    shift_log.append((t, config.shift_chunk))
        if (k + 1) % snap_stride == 0 or k + 1 == n_steps:
            take_snapshot(t, u, grid, left_plateau)

    trace = FrontTrace(level=level, times=np.asarray(trace_t),
                       positions=np.asarray(trace_x))
    report = SolverReport(
        M_report=m_report,
        min_value=min_value,
        step_count=n_steps,
        shift_log=shift_log,
        stability_flags={
            "nan_detected": False,
            "rannacher_startup": True,
            "negative_undershoot": min_value < 0.0,
        },
        sup_times=np.asarray(sup_t),
        sup_values=np.asarray(sup_v),
    )
    return RunResult(snapshots=snapshots, trace=trace, report=report)
