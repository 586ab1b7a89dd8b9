"""Algebraic-tail competition kernels and tail-corrected FFT convolution.

The concrete kernel family is

    phi_r(x) = c_r (1 + |x|)^(-r),    c_r = (r - 1) / 2,  r > 1,

an even probability density whose one-sided tail integral has the closed form
``tail_mass(r, R) = (1 + R)^(1-r) / 2``.  Kernels are sampled as cell averages
so that discrete mass and analytic tail mass telescope exactly; convolution
against a field adds the analytic tail contribution of the field's declared
far-field constants (left plateau, right value) instead of silently truncating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft


def kernel_value(r: float, x) -> np.ndarray | float:
    """Pointwise value of the algebraic-tail family c_r (1+|x|)^(-r)."""
    if r <= 1.0:
        raise ValueError(f"tail exponent must satisfy r > 1, got r={r}")
    c = 0.5 * (r - 1.0)
    return c * (1.0 + np.abs(x)) ** (-r)


def tail_mass(r: float, R) -> np.ndarray | float:
    """One-sided tail integral of the kernel: int_R^inf phi_r = (1+R)^(1-r)/2."""
    if r <= 1.0:
        raise ValueError(f"tail exponent must satisfy r > 1, got r={r}")
    R = np.asarray(R, dtype=float) if np.ndim(R) else float(R)
    if np.any(np.asarray(R) < 0):
        raise ValueError("tail radius R must be >= 0")
    return 0.5 * (1.0 + R) ** (1.0 - r)


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of a sampled competition kernel.

    r          tail exponent (> 1)
    half_width truncation radius L of the sampled support [-L, L]
    dx         sample spacing; half_width must be an integer multiple of dx
    """

    r: float
    half_width: float
    dx: float

    def __post_init__(self):
        if self.r <= 1.0:
            raise ValueError(f"tail exponent must satisfy r > 1, got r={self.r}")
        if self.half_width <= 0.0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.dx <= 0.0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        if self.dx >= self.half_width:
            raise ValueError(
                f"degenerate sampling: dx={self.dx} >= half_width={self.half_width}"
            )
        n = self.half_width / self.dx
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(
                f"half_width/dx must be an integer, got {self.half_width}/{self.dx}"
            )

    @property
    def n_half(self) -> int:
        """Number of sample points on each side of zero."""
        return int(round(self.half_width / self.dx))


@dataclass(frozen=True)
class SampledKernel:
    """Discretized kernel: cell-averaged density samples on {-L, ..., L}.

    values[k] is the kernel mass of cell [k*dx - dx/2, k*dx + dx/2] divided by
    dx, so sum(values)*dx + 2*tail_mass_at_cutoff == 1 exactly (telescoping);
    tail_mass_at_cutoff is the analytic mass beyond L + dx/2 per side.
    """

    spec: KernelSpec
    values: np.ndarray
    tail_mass_at_cutoff: float

    @property
    def center_index(self) -> int:
        return self.spec.n_half


def make_algebraic_kernel(spec: KernelSpec) -> SampledKernel:
    """Construct the sampled algebraic-tail kernel for ``spec``.

    Cell averages are computed from the closed-form tail integral, so evenness,
    nonnegativity and the discrete-mass identity hold to round-off.
    """
    r, dx, K = spec.r, spec.dx, spec.n_half
    k = np.arange(-K, K + 1)
    a = np.abs(k) * dx
    lo = np.maximum(a - 0.5 * dx, 0.0)
    hi = a + 0.5 * dx
    cell_mass = tail_mass(r, lo) - tail_mass(r, hi)
    # center cell spans both sides of the origin
    cell_mass[K] = 1.0 - 2.0 * tail_mass(r, 0.5 * dx)
    values = cell_mass / dx
    tail = float(tail_mass(r, spec.half_width + 0.5 * dx))
    return SampledKernel(spec=spec, values=values, tail_mass_at_cutoff=tail)


class FftConvolver:
    """Reusable FFT workspace for convolving fields of a fixed length.

    Owns a private kernel spectrum (zero-padded past wrap-around) plus the
    per-index analytic tail corrections: beyond the grid or the truncation
    radius, the kernel tail multiplies the field's declared far-field
    constants (left plateau and right value).
    """

    def __init__(self, kernel: SampledKernel, n: int):
        K = kernel.spec.n_half
        if n < 2 * K + 1:
            raise ValueError(
                f"field of length {n} is shorter than kernel support {2 * K + 1}"
            )
        self.kernel = kernel
        self.n = n
        self.n_half = K
        self.fft_len = scipy.fft.next_fast_len(n + 2 * K)
        weights = kernel.values * kernel.spec.dx
        self._kernel_hat = scipy.fft.rfft(weights, self.fft_len)
        # analytic far-field mass seen from each grid index
        dx = kernel.spec.dx
        idx = np.arange(n)
        cutoff = kernel.spec.half_width + 0.5 * dx
        dist_left = np.minimum(idx * dx + 0.5 * dx, cutoff)
        dist_right = dist_left[::-1]
        r = kernel.spec.r
        self._tail_left = np.asarray(tail_mass(r, dist_left))
        self._tail_right = np.asarray(tail_mass(r, dist_right))

    def apply(
        self, values: np.ndarray, left_plateau: float, right_value: float
    ) -> np.ndarray:
        """Return (phi * u) on the grid, including far-field tail corrections."""
        if values.shape != (self.n,):
            raise ValueError(f"expected field of length {self.n}, got {values.shape}")
        u_hat = scipy.fft.rfft(values, self.fft_len)
        full = scipy.fft.irfft(u_hat * self._kernel_hat, self.fft_len)
        K = self.n_half
        out = full[K : K + self.n].copy()
        out += left_plateau * self._tail_left
        out += right_value * self._tail_right
        return out


def convolve(field, kernel: SampledKernel) -> np.ndarray:
    """Convolve a solver Field against a sampled kernel (one-shot workspace).

    The field's grid spacing must match the kernel's and the grid must cover
    the kernel support; far-field behavior is taken from the field's declared
    left_plateau and right_value.
    """
    if abs(field.grid.dx - kernel.spec.dx) > 1e-12 * kernel.spec.dx:
        raise ValueError(
            f"grid mismatch: field dx={field.grid.dx}, kernel dx={kernel.spec.dx}"
        )
    conv = FftConvolver(kernel, field.grid.n)
    return conv.apply(field.values, field.left_plateau, field.right_value)


def dump_kernel_csv(kernel: SampledKernel, path) -> None:
    """Write the sampled kernel as CSV with columns x, phi."""
    K = kernel.spec.n_half
    x = np.arange(-K, K + 1) * kernel.spec.dx
    with open(path, "w") as fh:
        fh.write("x,phi\n")
        for xi, vi in zip(x, kernel.values):
            fh.write(f"{xi:.17g},{vi:.17g}\n")
