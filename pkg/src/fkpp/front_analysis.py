"""Front positions, delay series d(t) = 2t - X(t), and asymptotic fits.

The front of an invasion profile is located as the rightmost level crossing;
the delay behind the free-wave position 2t is fitted either with a logarithmic
model d = c*log(t) + s0 or a power model d = A*t^beta.  The predicted power
exponent for a competition tail exponent r is beta = (3-r)/(1+r) = 2*gamma - 1
with the competition scale exponent gamma = 2/(1+r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrontTrace:
    """Time series of front positions X_lambda(t) at a fixed level lambda."""

    level: float
    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.positions, dtype=float)
        if t.shape != x.shape:
            raise ValueError("times and positions must have equal length")
        if t.size and np.any(np.diff(t) <= 0):
            raise ValueError("trace times must be strictly increasing")
        if not np.all(np.isfinite(x)):
            raise ValueError("trace positions must be finite")


@dataclass(frozen=True)
class DelayFit:
    """Fitted delay model over a time window.

    model        "log" (d = coefficient*log t + offset) or
                 "power" (d = exp(offset)*t^exponent)
    rms_residual root-mean-square residual in delay units over the window
    """

    model: str
    coefficient: float
    exponent: float
    offset: float
    rms_residual: float
    window: tuple[float, float]

    def predict(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.model == "log":
            return self.coefficient * np.log(t) + self.offset
        return np.exp(self.offset) * t**self.exponent


def locate_front(field, level: float) -> float | None:
    """Rightmost x (lab frame) where the field crosses ``level`` downward.

    Linear interpolation between grid points; the rightmost crossing is the
    tie-break so oscillations behind the front are ignored.  Returns None when
    every value lies below the level ("no front").
    """
    u = field.values
    if level <= 0.0:
        raise ValueError(f"front level must be positive, got {level}")
    above = u >= level
    if not above.any():
        return None
    x = field.grid.positions
    if above[-1]:
        # profile still above the level at the right edge: no downward crossing
        return float(x[-1])
    cross = above[:-1] & ~above[1:]
    j = int(np.nonzero(cross)[0][-1])
    u0, u1 = float(u[j]), float(u[j + 1])
    frac = (u0 - level) / (u0 - u1)
    return float(x[j] + frac * field.grid.dx)


def delay_series(trace: FrontTrace) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise delay d(t) = 2t - X(t) behind the free-wave position."""
    if trace.times.size == 0:
        raise ValueError("empty front trace")
    t = np.asarray(trace.times, dtype=float)
    return t, 2.0 * t - np.asarray(trace.positions, dtype=float)


def _window_slice(t: np.ndarray, window: tuple[float, float], min_samples: int):
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"degenerate fit window {window}")
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < min_samples:
        raise ValueError(
            f"fit window {window} contains {int(mask.sum())} samples, "
            f"need at least {min_samples}"
        )
    return mask


def fit_log_delay(
    t: np.ndarray, d: np.ndarray, window: tuple[float, float], min_samples: int = 20
) -> DelayFit:
    """Least squares of d(t) = c*log(t) + s0 over the window."""
    t = np.asarray(t, dtype=float)
    d = np.asarray(d, dtype=float)
    mask = _window_slice(t, window, min_samples)
    tw, dw = t[mask], d[mask]
    if tw[0] <= 0:
        raise ValueError("log fit requires positive times in the window")
    c, s0 = np.polyfit(np.log(tw), dw, 1)
    resid = dw - (c * np.log(tw) + s0)
    rms = float(np.sqrt(np.mean(resid**2)))
    return DelayFit(
        model="log",
        coefficient=float(c),
        exponent=0.0,
        offset=float(s0),
        rms_residual=rms,
        window=(float(window[0]), float(window[1])),
    )


def fit_power_delay(
    t: np.ndarray, d: np.ndarray, window: tuple[float, float], min_samples: int = 20
) -> DelayFit:
    """Least squares of log(d) = beta*log(t) + log(A) over the window.

    The rms residual is reported in delay units (not log units) so that log
    and power fits of the same series are directly comparable.
    """
    t = np.asarray(t, dtype=float)
    d = np.asarray(d, dtype=float)
    mask = _window_slice(t, window, min_samples)
    tw, dw = t[mask], d[mask]
    if np.any(dw <= 0):
        raise ValueError("power fit requires positive delays in the window")
    beta, log_a = np.polyfit(np.log(tw), np.log(dw), 1)
    resid = dw - np.exp(log_a) * tw**beta
    rms = float(np.sqrt(np.mean(resid**2)))
    return DelayFit(
        model="power",
        coefficient=0.0,
        exponent=float(beta),
        offset=float(log_a),
        rms_residual=rms,
        window=(float(window[0]), float(window[1])),
    )


def delay_log_ratio(
    t: np.ndarray, d: np.ndarray, window: tuple[float, float]
) -> tuple[float, float]:
    """Range of d(t)/log(t) over the window (critical-regime diagnostic)."""
    t = np.asarray(t, dtype=float)
    d = np.asarray(d, dtype=float)
    mask = _window_slice(t, window, min_samples=2)
    ratio = d[mask] / np.log(t[mask])
    return float(ratio.min()), float(ratio.max())


def predicted_exponent(r: float) -> tuple[float, float]:
    """Predicted delay exponent and competition scale: (beta, gamma).

    gamma = 2/(1+r); beta = (3-r)/(1+r) = 2*gamma - 1.  beta <= 0 for r >= 3
    signals the logarithmic-delay regime.
    """
    if r <= 1.0:
        raise ValueError(f"tail exponent must satisfy r > 1, got r={r}")
    gamma = 2.0 / (1.0 + r)
    beta = (3.0 - r) / (1.0 + r)
    return beta, gamma
