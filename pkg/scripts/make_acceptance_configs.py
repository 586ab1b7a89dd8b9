#!/usr/bin/env python3
"""Write the TOML configs for the full acceptance experiment set.

Usage: python scripts/make_acceptance_configs.py [config_dir] [results_dir]

The generated directory can then be executed with
    fkpp sweep <config_dir> --jobs 1
(one core is enough; the delay sweeps dominate the budget).  The r=2 run
stores snapshots so the harnack/oracles configs can chain on its output.
"""

import sys
from pathlib import Path

CONFIGS = {
    # criterion 1: classical Bramson anchor
    "classic": """\
schema_version = 1
experiment = "delay_sweep"

[model]
kind = "local_classic"

[numerics]
dx = 0.05
dt = 0.02
t_end = 2000.0
width = 800.0
window_margin = 450.0
left_keep = 200.0
trace_every = 0.5
snapshot_every = 500.0

[fit]
model = "log"
window = [200.0, 2000.0]

[checks]
coefficient_range = [1.25, 1.75]

[output]
dir = "{results}/classic"
""",
    # criterion 2: algebraic delay at r=2 (snapshots kept for chaining)
    "nonlocal_r2": """\
schema_version = 1
experiment = "delay_sweep"

[model]
kind = "nonlocal"
r = 2.0
kernel_cutoff = 500.0

[numerics]
dx = 0.05
dt = 0.04
t_end = 2000.0
width = 1150.0
window_margin = 500.0
left_keep = 550.0
trace_every = 0.4
snapshot_every = 10.0
shift_plateau_tol = 0.005

[fit]
model = "power"
window = [500.0, 2000.0]

[checks]
exponent_range = [0.23, 0.43]
M_max = 5.0

[output]
dir = "{results}/nonlocal_r2"
""",
    "nonlocal_r15": """\
schema_version = 1
experiment = "delay_sweep"

[model]
kind = "nonlocal"
r = 1.5
kernel_cutoff = 500.0

[numerics]
dx = 0.05
dt = 0.04
t_end = 2000.0
width = 1400.0
window_margin = 650.0
left_keep = 650.0
trace_every = 0.4
snapshot_every = 100.0
shift_plateau_tol = 0.05

[fit]
model = "power"
window = [500.0, 2000.0]

[checks]
exponent_range = [0.48, 0.72]

[output]
dir = "{results}/nonlocal_r15"
""",
    "nonlocal_r25": """\
schema_version = 1
experiment = "delay_sweep"

[model]
kind = "nonlocal"
r = 2.5
kernel_cutoff = 500.0

[numerics]
dx = 0.05
dt = 0.04
t_end = 2000.0
width = 1100.0
window_margin = 450.0
left_keep = 550.0
trace_every = 0.4
snapshot_every = 100.0
shift_plateau_tol = 0.02

[fit]
model = "power"
window = [500.0, 2000.0]

[checks]
exponent_range = [0.022857142857142857, 0.2628571428571429]

[output]
dir = "{results}/nonlocal_r25"
""",
    # criterion 3: logarithmic regime beyond the phase transition
    "nonlocal_r4": """\
schema_version = 1
experiment = "delay_sweep"

[model]
kind = "nonlocal"
r = 4.0
kernel_cutoff = 300.0

[numerics]
dx = 0.05
dt = 0.01
t_end = 2000.0
width = 1600.0
window_margin = 900.0
left_keep = 600.0
trace_every = 0.4
snapshot_every = 100.0
shift_plateau_tol = 0.005

[fit]
model = "power"
window = [500.0, 2000.0]

[checks]
exponent_range = [-1.0, 0.15]
model_selection = true

[output]
dir = "{results}/nonlocal_r4"
""",
    # criterion 4: critical decay rate
    "nonlocal_r3": """\
schema_version = 1
experiment = "delay_sweep"

[model]
kind = "nonlocal"
r = 3.0
kernel_cutoff = 500.0

[numerics]
dx = 0.05
dt = 0.04
t_end = 2000.0
width = 1100.0
window_margin = 450.0
left_keep = 550.0
trace_every = 0.4
snapshot_every = 100.0
shift_plateau_tol = 0.005

[fit]
model = "log_ratio"
window = [500.0, 2000.0]

[checks]
ratio_range = [1.2, 3.5]

[output]
dir = "{results}/nonlocal_r3"
""",
    # criterion 10: local logarithmic nonlinearity, algebraic and log regimes
    "local_fr_r2": """\
schema_version = 1
experiment = "delay_sweep"

[model]
kind = "local_fr"
r = 2.0

[numerics]
dx = 0.05
dt = 0.02
t_end = 2000.0
width = 900.0
window_margin = 450.0
left_keep = 300.0
trace_every = 0.5
snapshot_every = 500.0

[fit]
model = "power"
window = [500.0, 2000.0]

[checks]
exponent_range = [0.23, 0.43]

[output]
dir = "{results}/local_fr_r2"
""",
    "local_fr_r4": """\
schema_version = 1
experiment = "delay_sweep"

[model]
kind = "local_fr"
r = 4.0

[numerics]
dx = 0.05
dt = 0.01
t_end = 2000.0
width = 1400.0
window_margin = 900.0
left_keep = 300.0
trace_every = 0.5
snapshot_every = 500.0

[fit]
model = "power"
window = [500.0, 2000.0]

[checks]
exponent_range = [-1.0, 0.15]
model_selection = true

[output]
dir = "{results}/local_fr_r4"
""",
    # Gompertz-saturation variant of the local equation
    "local_gompertz_r2": """\
schema_version = 1
experiment = "local_gompertz"

[model]
kind = "local_gompertz"
r = 2.0
theta_g = 1.0
A_g = 1.0

[numerics]
dx = 0.05
dt = 0.02
t_end = 2000.0
width = 900.0
window_margin = 450.0
left_keep = 300.0
trace_every = 0.5
snapshot_every = 500.0

[fit]
model = "power"
window = [500.0, 2000.0]

[checks]
exponent_range = [0.23, 0.43]

[output]
dir = "{results}/local_gompertz_r2"
""",
    # criterion 5, heat half: inline bump source
    "harnack_heat": """\
schema_version = 1
experiment = "harnack"

[model]
kind = "heat"

[numerics]
dx = 0.02
dt = 0.005
t_end = 2.0
width = 60.0
x_left = -30.0
window_margin = 10.0
left_keep = 10.0
shift_chunk = 2.0
front_level = 1e-12
snapshot_every = 0.25
trace_every = 0.05
u0 = "bump"
u0_half_width = 0.05
u0_amplitude = 1.0

[harnack]
T_values = [0.5, 1.0, 1.5, 2.0]
min_samples = 10000
lookbacks = [0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 1.75, 2.0]
x_offsets = [-6.0, -5.5, -5.0, -4.5, -4.0, -3.5, -3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0]

[output]
dir = "{results}/harnack_heat"
""",
    # criterion 5, nonlocal half + criteria 7 and 8 as chained post-processing
    "harnack_nonlocal": """\
schema_version = 1
experiment = "harnack"

[source]
run_dir = "{results}/nonlocal_r2"

[harnack]
T_values = [600.0, 1000.0, 1400.0, 1800.0, 2000.0]
min_samples = 10000
lookbacks = [0.4, 0.8, 1.6, 3.2, 6.4, 12.8, 25.6, 51.2]

[output]
dir = "{results}/harnack_nonlocal"
""",
    "oracles_r2": """\
schema_version = 1
experiment = "oracles"

[source]
run_dir = "{results}/nonlocal_r2"

[oracles]
super_T = 500.0
conv_times = [100.0, 300.0, 1000.0]

[output]
dir = "{results}/oracles_r2"
""",
    # criterion 9
    "spectral": """\
schema_version = 1
experiment = "spectral"

[spectral]
Y = 40.0
dy = 0.001

[output]
dir = "{results}/spectral"
""",
    # criterion 11
    "wave": """\
schema_version = 1
experiment = "wave"

[wave]
A_V = 1.0
M = 1.0
r = 4.0

[output]
dir = "{results}/wave"
""",
}

# chained configs must run after their sources
ORDER_PREFIX = {
    "harnack_nonlocal": "z1_",
    "oracles_r2": "z2_",
}


def main() -> int:
    config_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("configs")
    results_dir = Path(sys.argv[2]) if len(sys.argv) > 2 else Path("results")
    config_dir.mkdir(parents=True, exist_ok=True)
    for name, template in CONFIGS.items():
        fname = ORDER_PREFIX.get(name, "") + name + ".toml"
        (config_dir / fname).write_text(template.format(results=results_dir))
    print(f"wrote {len(CONFIGS)} configs to {config_dir}/")
    print(f"run them with: fkpp sweep {config_dir} --jobs 1")
    return 0


if __name__ == "__main__":
    sys.exit(main())
