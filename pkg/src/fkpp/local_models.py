"""Local nonlinearities with logarithmic saturation and the comparison wave.

Two local reaction terms mimic the non-local competition:

* the time-dependent Gompertz-type saturation g(t, u), with threshold
  Theta_g = theta_g * exp(-A_g^(1/(r-1))), clamped to 0 below u = 0 and to 1
  above Theta_g;
* the autonomous KPP nonlinearity f_r(u) = u * max(0, 1 - log(1/u)^(1-r)),
  which vanishes at u = 0 and for u >= exp(-1).

The module also solves the speed-2 traveling wave of the logarithmic
nonlinearity by shooting backward from the far field, where the profile
behaves like (xi + b) * exp(-xi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp


@dataclass(frozen=True)
class GompertzParams:
    """Parameters of the saturation g(t, u); Theta_g is derived."""

    theta_g: float = 1.0
    A_g: float = 1.0
    r: float = 2.0

    def __post_init__(self):
        if self.theta_g <= 0:
            raise ValueError(f"theta_g must be positive, got {self.theta_g}")
        if self.A_g < 1.0:
            raise ValueError(f"A_g must be >= 1, got {self.A_g}")
        if self.r <= 1.0:
            raise ValueError(f"tail exponent must satisfy r > 1, got r={self.r}")

    @property
    def time_offset(self) -> float:
        """The A_g^(1/(r-1)) shift applied to t inside the saturation."""
        return self.A_g ** (1.0 / (self.r - 1.0))

    @property
    def Theta_g(self) -> float:
        """Saturation threshold theta_g * exp(-A_g^(1/(r-1))) < theta_g."""
        return self.theta_g * float(np.exp(-self.time_offset))


def gompertz_g(t, u, p: GompertzParams):
    """Evaluate the clamped saturation g(t, u).

    g = A_g * max(1, [log(theta_g/u) / (t + A_g^(1/(r-1)))]^((r-1)/2))
            * log(theta_g/u)^(1-r)          for u in (0, Theta_g],
    g = 0 for u <= 0 and g = 1 for u > Theta_g; continuous in u at Theta_g
    for every t >= 0.  Accepts scalars or broadcastable arrays.
    """
    u_arr = np.asarray(u, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    scalar = u_arr.ndim == 0 and t_arr.ndim == 0
    shape = np.broadcast_shapes(u_arr.shape, t_arr.shape)
    u_b = np.broadcast_to(u_arr, shape)
    t_b = np.broadcast_to(t_arr, shape)
    out = np.zeros(shape)
    out[u_b > p.Theta_g] = 1.0
    mid = (u_b > 0.0) & (u_b <= p.Theta_g)
    if mid.any():
        L = np.log(p.theta_g) - np.log(u_b[mid])
        scaled = L / (t_b[mid] + p.time_offset)
        boost = np.maximum(1.0, scaled ** (0.5 * (p.r - 1.0)))
        out[mid] = p.A_g * boost * L ** (1.0 - p.r)
    return float(out) if scalar else out


@dataclass(frozen=True)
class FrParams:
    """Concrete autonomous nonlinearity with two-sided constant A_f = 1.

    theta_f = exp(-1) is the zero of f_r; delta_f bounds the radius where the
    logarithmic sandwich is meaningful.
    """

    r: float = 2.0
    A_f: float = 1.0
    delta_f: float = float(np.exp(-2.0))

    def __post_init__(self):
        if self.r <= 1.0:
            raise ValueError(f"tail exponent must satisfy r > 1, got r={self.r}")

    @property
    def theta_f(self) -> float:
        return float(np.exp(-1.0))


def fr_nonlinearity(u, p: FrParams):
    """f_r(u) = u * max(0, 1 - log(1/u)^(1-r)) on [0, 1]; zero past exp(-1)."""
    u_arr = np.asarray(u, dtype=float)
    scalar = u_arr.ndim == 0
    u_arr = np.atleast_1d(u_arr)
    if np.any(u_arr < 0.0) or np.any(u_arr > 1.0):
        raise ValueError("fr_nonlinearity expects u in [0, 1]")
    out = np.zeros_like(u_arr)
    mask = (u_arr > 0.0) & (u_arr < p.theta_f)
    if mask.any():
        L = -np.log(u_arr[mask])
        out[mask] = u_arr[mask] * (1.0 - L ** (1.0 - p.r))
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class TravelingWave:
    """Speed-2 wave profile of the logarithmic nonlinearity.

    The profile is the resolved orbit from the closest plateau approach out to
    the far field, translated so that the far-field intercept vanishes (the
    representative with V ~ kappa * xi * exp(-xi) and no xi^0 correction).
    left_limit_estimate extrapolates the plateau approach (iterated Aitken);
    s_0 is an optional positioning shift used when the wave is placed under a
    solution.
    """

    A_V: float
    M: float
    r: float
    xi_grid: np.ndarray
    profile: np.ndarray
    dprofile: np.ndarray
    kappa: float
    left_limit_estimate: float
    closest_plateau_gap: float
    s_0: float = 0.0

    @property
    def left_limit(self) -> float:
        """Plateau value M * exp(-A_V^(1/(r-1))) approached as xi -> -inf."""
        return self.M * float(np.exp(-self.A_V ** (1.0 / (self.r - 1.0))))


class BracketingError(RuntimeError):
    """Shooting failed to bracket the wave orbit over the scanned interval."""

    def __init__(self, message: str, scanned: tuple[float, float]):
        super().__init__(f"{message} (scanned tail-shift interval {scanned})")
        self.scanned = scanned


def _wave_rhs(A_V: float, M: float, r: float):
    def rhs(xi, y):
        V, W = y
        if V <= 0.0:
            sat = V
        else:
            L = np.log(M / V)
            sat = V - A_V * V * L ** (1.0 - r) if L > 0.0 else 0.0
        return (W, -2.0 * W - sat)

    return rhs


def _integrate_back(A_V, M, r, state, xi_from, xi_min, plateau, rtol):
    """Integrate backward from ``state`` at xi_from.

    Classification: +1 when the orbit overshoots the plateau, -1 when the
    slope turns around below it (undershoot), 0 when xi_min is reached.
    """

    def hit_top(xi, y):
        return y[0] - 1.2 * plateau

    def turn_back(xi, y):
        return y[1]

    hit_top.terminal = True
    turn_back.terminal = True
    sol = solve_ivp(
        _wave_rhs(A_V, M, r),
        (xi_from, xi_min),
        state,
        method="DOP853",
        rtol=rtol,
        atol=1e-300,
        events=(hit_top, turn_back),
        dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"wave integration failed: {sol.message}")
    if sol.t_events[0].size:
        return 1, sol
    if sol.t_events[1].size:
        return -1, sol
    # reached xi_min without turning: settled only if close to the plateau
    v_end = float(sol.y[0, -1])
    if abs(v_end - plateau) <= 0.05 * plateau:
        return 0, sol
    return (-1 if v_end < plateau else 1), sol


def _bisect_orbit(classify, lo, hi, max_iter=200):
    """Generic bisection between an undershoot and an overshoot parameter.

    ``classify(p)`` returns (status, sol); statuses at lo and hi must differ
    (or be 0).  Returns (parameter, solution) of the last undershoot-or-
    settled orbit seen.
    """
    s_lo, sol_lo = classify(lo)
    s_hi, sol_hi = classify(hi)
    if s_lo == 0:
        return lo, sol_lo
    if s_hi == 0:
        return hi, sol_hi
    if s_lo == s_hi:
        raise BracketingError(
            "parameter scan does not bracket the wave orbit", (lo, hi)
        )
    best = (lo, sol_lo) if s_lo == -1 else (hi, sol_hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < 8.0 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
        s_mid, sol_mid = classify(mid)
        if s_mid == 0:
            return mid, sol_mid
        if s_mid == -1:
            best = (mid, sol_mid)
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return best


def _iterated_aitken(values: np.ndarray) -> float:
    """Limit of a geometrically converging sequence via repeated Aitken steps."""
    seq = np.asarray(values, dtype=float)
    while seq.size >= 3:
        d1 = seq[1:-1] - seq[:-2]
        d2 = seq[2:] - 2.0 * seq[1:-1] + seq[:-2]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = seq[:-2] - np.where(d2 != 0.0, d1**2 / d2, 0.0)
        seq = nxt
    return float(seq[-1])


def traveling_wave(
    A_V: float = 1.0,
    M: float = 1.0,
    r: float = 4.0,
    xi_min: float = -12.0,
    xi_max: float = 30.0,
    dxi: float = 0.01,
    rtol: float = 1e-13,
) -> TravelingWave:
    """Solve -2V' = V'' + V(1 - A_V log(M/V)^(1-r)) connecting the plateau to 0.

    Shoots backward from the linearized far field, bisecting the additive tail
    shift; a second bisection re-anchored just before the plateau approach
    refines the orbit (the left limit is a saddle point, so a single shot can
    track it only part way down).  The emitted profile is trimmed at the
    closest plateau approach and translated so the far-field intercept is
    zero; the plateau value itself is estimated by extrapolating the
    exponential approach.
    """
    if A_V < 1.0:
        raise ValueError(f"A_V must be >= 1, got {A_V}")
    if M <= 0.0:
        raise ValueError(f"amplitude cap M must be positive, got {M}")
    if r <= 1.0:
        raise ValueError(f"tail exponent must satisfy r > 1, got r={r}")
    plateau = M * float(np.exp(-(A_V ** (1.0 / (r - 1.0)))))

    # scan the slope of the far-field ray V'/V = -1 + drho around the value
    # selected by the tail asymptotics: drho ~ 1/xi for r > 3, where the tail
    # is (xi + b) e^(-xi), and ~ sqrt(A_V) xi^((1-r)/2) for r < 3, where the
    # slow saturation stretches the tail
    v0 = xi_max * np.exp(-xi_max)

    def from_ray(p):
        drho = np.exp(p)
        state = (v0, (-1.0 + drho) * v0)
        return _integrate_back(A_V, M, r, state, xi_max, xi_min, plateau, rtol)

    drho_center = max(1.0 / xi_max, np.sqrt(A_V) * xi_max ** (0.5 * (1.0 - r)))
    p_lo, p_hi = np.log(0.2 * drho_center), np.log(5.0 * drho_center)
    for _ in range(60):
        if from_ray(p_lo)[0] != from_ray(p_hi)[0]:
            break
        p_lo -= 1.0
        p_hi = min(p_hi + 1.0, np.log(0.9))
    _, stage1 = _bisect_orbit(from_ray, p_lo, p_hi)

    # re-anchor just before the saddle approach and bisect a relative
    # perturbation there; this restores full floating-point resolution for
    # the final climb onto the plateau
    xs = np.linspace(stage1.t[0], stage1.t[-1], 4096)
    vals = np.asarray(stage1.sol(xs))
    k_re = np.nonzero(vals[0] >= 0.9 * plateau)[0]
    if k_re.size:
        xi_re = float(xs[k_re[0]])
        state_re = (float(vals[0][k_re[0]]), float(vals[1][k_re[0]]))

        def from_sigma(sigma):
            state = (state_re[0] * (1.0 + sigma), state_re[1])
            return _integrate_back(A_V, M, r, state, xi_re, xi_min, plateau, rtol)

        lo, hi = -1e-7, 1e-7
        for _ in range(40):
            s_lo, _ = from_sigma(lo)
            s_hi, _ = from_sigma(hi)
            if s_lo != s_hi or s_lo == 0:
                break
            lo *= 4.0
            hi *= 4.0
        sigma_star, refined = _bisect_orbit(from_sigma, lo, hi)

        # one orbit through the refined state: backward (dense in `refined`)
        # and forward out to the far field, so the profile has no seam
        state = (state_re[0] * (1.0 + sigma_star), state_re[1])
        forward = solve_ivp(
            _wave_rhs(A_V, M, r), (xi_re, xi_max), state,
            method="DOP853", rtol=rtol, atol=1e-300, dense_output=True,
        )
        if not forward.success:
            raise RuntimeError(f"wave integration failed: {forward.message}")
        n_tail = int(np.floor((xi_max - xi_re) / dxi))
        xi_tail = xi_re + dxi * np.arange(1, n_tail + 1)
        tail = np.asarray(forward.sol(xi_tail))
        n_head = int(np.floor((xi_re - float(refined.t[-1])) / dxi))
        xi_head = xi_re - dxi * np.arange(n_head + 1)[::-1]
        head = np.asarray(refined.sol(xi_head))
        xi = np.concatenate([xi_head, xi_tail])
        V = np.concatenate([head[0], tail[0]])
        dV = np.concatenate([head[1], tail[1]])
    else:
        n_tail = int(np.floor((xi_max - float(stage1.t[-1])) / dxi))
        xi = xi_max - dxi * np.arange(n_tail + 1)[::-1]
        arr = np.asarray(stage1.sol(xi))
        V, dV = arr[0], arr[1]

    # trim at the closest plateau approach; past it the orbit leaves the saddle
    j = int(np.argmin(np.abs(V - plateau)))
    xi, V, dV = xi[j:], V[j:], dV[j:]
    gap = float(abs(V[0] - plateau))

    # plateau estimate: iterated Aitken on a dyadic ladder of the approach
    approach = plateau - V
    ladder = []
    target = 0.04 * plateau
    while target > 1.5 * gap and len(ladder) < 8:
        k = int(np.argmin(np.abs(approach - target)))
        ladder.append(float(V[k]))
        target *= 0.5
    left_estimate = _iterated_aitken(ladder) if len(ladder) >= 3 else float(V[0])

    # translate so the far-field intercept vanishes: V ~ kappa * xi * e^{-xi}.
    # Only meaningful when the tail is linear in xi after removing e^{-xi},
    # which requires tail corrections integrable against it (r > 3).
    if r > 3.0:
        fit_mask = (xi >= 0.5 * xi_max) & (xi <= xi_max - 2.0)
        Wlin = V[fit_mask] * np.exp(xi[fit_mask])
        a_fit, b_fit = np.polyfit(xi[fit_mask], Wlin, 1)
        xi = xi + b_fit / a_fit

    far = (xi >= 10.0) & (xi <= 25.0)
    kappa = float(np.mean(V[far] / (xi[far] * np.exp(-xi[far]))))
    return TravelingWave(
        A_V=A_V, M=M, r=r, xi_grid=xi, profile=V, dprofile=dV, kappa=kappa,
        left_limit_estimate=left_estimate, closest_plateau_gap=gap,
    )


def wave_residual(wave: TravelingWave) -> np.ndarray:
    """Residual of the wave ODE on the interior of the profile grid.

    V'' is formed by central differences of the stored derivative so the check
    does not reuse the integrator's right-hand side evaluations verbatim.
    """
    xi = wave.xi_grid
    h = xi[1] - xi[0]
    V = wave.profile[1:-1]
    d2 = (wave.dprofile[2:] - wave.dprofile[:-2]) / (2.0 * h)
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(wave.M / np.where(V > 0, V, 1.0))
        sat = np.where(V > 0, V - wave.A_V * V * L ** (1.0 - wave.r), 0.0)
    return d2 + 2.0 * wave.dprofile[1:-1] + sat


def dump_wave_csv(wave: TravelingWave, path) -> None:
    """Write the wave profile as CSV with columns xi, V."""
    with open(path, "w") as fh:
        fh.write("xi,V\n")
        for x, v in zip(wave.xi_grid, wave.profile):
            fh.write(f"{x:.17g},{v:.17g}\n")
