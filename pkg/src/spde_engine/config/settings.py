"""
Laboratory Settings
===================
Single source of truth for defaults used across modules.

Values here are the fallbacks when a RunConfig leaves a field unset. Edit
this file rather than hardcoding constants in the numerical modules.
"""

# =========================
# NOISE
# =========================

NOISE_DEFAULTS = {
    'modes': 16,                      # K, truncation of the cylindrical series
    'seed': 20240611,                 # master seed when none is configured
}


# =========================
# SOLVER
# =========================

SOLVER_DEFAULTS = {
    'stability_factor': 0.4,          # dt <= factor * min(h/max|b|, h^2/(2N max|A|))
    'state_range': 8.0,               # R_state: state interval sampled for the bound
    'stability_samples': 2001,        # xi samples on [-R_state, R_state]
    'scheme': 'tau-scheme',
}


# =========================
# ENSEMBLES
# =========================

ENSEMBLE_DEFAULTS = {
    'members': 64,                    # ensemble size
    'threads': 1,                     # worker threads for ensemble members
    'min_contraction_members': 8,
}


# =========================
# QUADRATURE
# =========================

QUADRATURE_CONFIG = {
    'relative_tolerance': 1e-10,      # adaptive quadrature for antiderivatives
    'mollifier_nodes': 64,            # Gauss-Legendre nodes for xi-convolutions
    'panel_nodes': 16,                # Gauss-Legendre nodes per cumulative panel
    'panel_width': 0.25,              # xi width of one cumulative panel
    'test_function_nodes': 32,        # nodes for xi-integrals of test functions
}


# =========================
# AUDIT
# =========================

AUDIT_DEFAULTS = {
    'samples': 4096,
    'xi_box': 8.0,                    # sampled xi in [-box, box]
    'holder_max_gap': 1.0,            # |xi - zeta| < 1 for the Holder condition
    'relative_slack': 1e-9,           # ratio <= 1 + slack counts as a pass
}


# =========================
# SEMINORMS
# =========================

SEMINORM_DEFAULTS = {
    'eps_points': 24,                 # geometric eps-grid from 2h to 2 D_N
    'pair_samples_2d': 512,           # sampled offsets for N = 2
    'sampling_seed': 7,
    'kernel': 'bump',
}


# =========================
# KINETIC
# =========================

KINETIC_DEFAULTS = {
    'velocity_points': 201,
    'velocity_margin_cells': 2,       # range margin >= 2 dxi
    'deposition': 'nearest',          # 'nearest' | 'exact'
}


# =========================
# OUTPUT
# =========================

OUTPUT_DEFAULTS = {
    'out_dir': 'output',
    'float_format': '%.17g',
    'out_dir_env': 'SPDE_ENGINE_OUT_DIR',
    'threads_env': 'SPDE_ENGINE_THREADS',
    'config_env': 'SPDE_ENGINE_CONFIG_PATH',
}
