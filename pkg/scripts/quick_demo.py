#!/usr/bin/env python3
"""Two-minute tour: short classic run, eigenvalue sweep, traveling wave.

Runs nothing heavyweight; prints the measured delay behavior and the key
spectral and wave quantities.
"""

import numpy as np

from fkpp.front_analysis import delay_series, fit_log_delay
from fkpp.local_models import traveling_wave, wave_residual
from fkpp.solver import LocalClassicModel, SolverConfig, indicator_initial, run
from fkpp.spectral import eigen_sweep


def main() -> int:
    print("== classic Fisher-KPP to t=150 ==")
    cfg = SolverConfig(model=LocalClassicModel(), dx=0.05, dt=0.02, t_end=150.0,
                       width=500.0, window_margin=250.0, left_keep=100.0)
    result = run(cfg, indicator_initial())
    t, d = delay_series(result.trace)
    fit = fit_log_delay(t, d, (15.0, 150.0))
    print(f"front at t=150: X={result.trace.positions[-1]:.3f}")
    print(f"delay fit d ~ c*log t + s0: c={fit.coefficient:.3f} "
          f"(Bramson constant 3/2), s0={fit.offset:.3f}")

    print("\n== self-similar oscillator eigenvalues ==")
    for res in eigen_sweep([0.0, 0.2, 0.1, 0.05], Y=40.0, dy=2e-3):
        print(f"eps={res.epsilon:<5g} lambda={res.lambda_eps: .6f} "
              f"mu={res.mu_eps:.6f}")

    print("\n== speed-2 traveling wave (logarithmic saturation) ==")
    wave = traveling_wave(A_V=1.0, M=1.0, r=4.0)
    res_sup = float(np.max(np.abs(wave_residual(wave))))
    print(f"kappa={wave.kappa:.5f}, plateau={wave.left_limit:.6f} "
          f"(estimate {wave.left_limit_estimate:.6f}), residual sup={res_sup:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
