"""
Experiment Configuration
Grids, sample sizes and tolerances used when a run does not override them.
"""

from config import settings

experiment_defaults = {
    "seed": settings.DEFAULT_SEED,
    "samples": 4096,
    "ensemble": 1000,
    # levels per experiment kind; exp-moment builds dense traces, so it stays below
    # DENSE_MAX_LEVEL
    "n_list": {
        "l2": [8, 16, 24, 32],
        "tail": [8, 12, 16],
        "exp-moment": [8, 12, 16],
        "lil": [16, 24, 32],
        "cancellation": [8, 16],
        "identity": [8],
    },
    "t_grid": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
    "lambda_grid": [0.1, 0.2, 0.4],
    "eps_levels": [8, 10, 12, 14, 16, 18, 20],
    "kink_exclusion": settings.KINK_EXCLUSION,
    # spectral series are truncated this many terms past the deepest level
    "spectral_margin": 40,
}

identity_sweep = {
    "default": {
        "kinds": ["constant", "linear", "sign-power", "lacunary"],
        "rhos": [1.0, 1.42, 2.0],
        "k_max": 8,
        "n_max": 8,
        "points": 10,
        "traces": 100,
        "trace_level": 14,
        "lacunary_terms": 12,
    },
    "quick": {
        "kinds": ["constant", "linear", "sign-power", "lacunary"],
        "rhos": [1.0, 1.42],
        "k_max": 3,
        "n_max": 3,
        "points": 2,
        "traces": 4,
        "trace_level": 8,
        "lacunary_terms": 8,
    },
}

tolerances = {
    "lemma": 1e-8,
    "decomposition": 1e-6,
    "summation_by_parts": 1e-12,
    "energy": 1e-10,
}

# Signed-to-absolute ratio threshold of the cancellation run: the signed ratio
# at the finest scale must not exceed this fraction of the absolute floor.
cancellation = {
    "signed_fraction": 0.2,
    # series truncated per band once the tail drops below this share of 2^(-k alpha)
    "band_rel_tol": 1e-2,
}
