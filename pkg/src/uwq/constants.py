"""Versioned default parameters, echoed into every verification report.

Tolerance regressions must be attributable to parameter changes, so every
report header carries CONSTANTS_VERSION together with the grid parameters
actually used for that run.
"""

CONSTANTS_VERSION = "uwq-defaults-1"

# Position-space grids: n points on the half-open box [-L, L) per axis.
DEFAULT_N_1D = 128
DEFAULT_L_1D = 10.0
DEFAULT_N_2D = 32
DEFAULT_L_2D = 8.0

# Quantization identity checks run on a tighter box so that polynomial
# symbols stay in a numerically comfortable range.
QUANT_N = 128
QUANT_L = 8.0

# Matrix-level checks in two dimensions use a reduced grid: dense
# n^(2d) x n^(2d) assembly at n=32 costs ~1e9 operations, which is out of
# desk-scale budget, while transforms (STFT etc.) stay cheap at n=32.
QUANT_N_2D = 16

# Weight-sequence machinery.
WEIGHTS_TRUNCATION = 64
M2_H_LATTICE_STEP = 0.1
M2_H_LATTICE_MAX = 8.0
CONDITION_C0_CAP = 10.0

# Oscillatory-kernel regularization ladder.
OSC_DELTA_LADDER = (0.4, 0.2, 0.1, 0.05, 0.025)
