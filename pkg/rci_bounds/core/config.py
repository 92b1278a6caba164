import os

# Set calculus
EMPTINESS_TOL = 1e-9
DEDUP_TOL = 1e-12
SINGULAR_TOL = 1e-12
VERTEX_CAP = 512

# Spectral analysis
EIG_CLUSTER_TOL = 1e-7
RESIDUAL_TOL = 1e-8
MAX_STATE_DIM = 8
MAX_ANGLE_DENOMINATOR = 64
ANGLE_MATCH_TOL = 1e-9

# Bounds
UNIT_BRANCH_TOL = 1e-12
TIE_TOL = 1e-12
SELF_CHECK_RTOL = 1e-9
SYMMETRY_TOL = 1e-9
K_MAX_DEFAULT = 15

# Oracle
ALPHA_TOL = 1e-4
ALPHA_INF_K_MAX = 30
PLATEAU_RUN = 3
MONOTONICITY_SAMPLES = 10
EQUALITY_DIRECTIONS = 64
EQUALITY_TOL = 1e-7

# Attack
ATTACK_STEPS_FALLBACK = 500

# Process settings
ORACLE_WORKERS = int(os.environ.get("RCI_ORACLE_WORKERS", "4"))
LOG_LEVEL = os.environ.get("RCI_LOG_LEVEL", "INFO")
