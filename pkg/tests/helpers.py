"""Shared independent oracles for the test suite.

These deliberately avoid the library's own code paths: the grid search
evaluates the softmax objective with raw numpy, and the finite-difference
gradient only consumes objective values.
"""

import itertools

import numpy as np

# 13 dialects under 7 top-level labels, 5 of which group several dialects.
PAPER_LAYOUT = (
    ("Nepali", ("Achhami", "Dotyal")),
    ("Lyngam", ("Langkma", "Nongtrei")),
    ("Na-nasu", ("Acquaviva Collecroce", "Montemitro", "San Felice del Molise")),
    ("War", ("Amwi", "Nongtalang")),
    ("Na", ("Lataddi Na", "Yongning Na")),
    ("Naxi", ("Naxi",)),
    ("Laze", ("Laze",)),
)


def paper_layout_spec(seed=0, **overrides):
    """A synthetic-corpus spec mirroring the published corpus layout."""
    from lectometer.synth import SynthSpec

    params = dict(
        languages=PAPER_LAYOUT,
        dim=32,
        language_centroid_scale=10.0,
        dialect_offset_scale=1.0,
        within_dialect_noise=0.2,
        files_per_dialect=4,
        frames_per_file=2350,  # 10 full snippets per file at 47 Hz
        frame_rate_hz=47.0,
        seed=seed,
    )
    params.update(overrides)
    return SynthSpec(**params)


def two_point_objective_grid(w0, w1, b0, b1, C=1.0):
    """Vectorized objective for the 1-D dataset {(-1, class0), (+1, class1)}.

    Computed from scratch: summed NLL of a 2-class softmax plus the
    L2 penalty on weights.
    """
    # sample x=-1, gold class 0
    z0a, z0b = -w0 + b0, -w1 + b1
    m0 = np.maximum(z0a, z0b)
    nll0 = (m0 + np.log(np.exp(z0a - m0) + np.exp(z0b - m0))) - z0a
    # sample x=+1, gold class 1
    z1a, z1b = w0 + b0, w1 + b1
    m1 = np.maximum(z1a, z1b)
    nll1 = (m1 + np.log(np.exp(z1a - m1) + np.exp(z1b - m1))) - z1b
    return nll0 + nll1 + (w0**2 + w1**2) / (2.0 * C)


def two_point_grid_search_min(C=1.0, span=3.0, points=41, refinements=3):
    """Dense grid search over the 4 parameters, refined around the argmin."""
    center = np.zeros(4)
    best = np.inf
    for _ in range(refinements):
        axes = [np.linspace(c - span, c + span, points) for c in center]
        grids = np.meshgrid(*axes, indexing="ij", sparse=True)
        values = two_point_objective_grid(*grids, C=C)
        flat = int(np.argmin(values))
        idx = np.unravel_index(flat, values.shape)
        center = np.array([axes[i][idx[i]] for i in range(4)])
        best = float(values[idx])
        span = 2.0 * span / (points - 1)  # one grid step each side
    return best


def finite_difference_grads(objective, W, b, h=1e-5):
    """Central-difference gradients of objective(W, b)."""
    gW = np.zeros_like(W)
    for i, j in itertools.product(range(W.shape[0]), range(W.shape[1])):
        Wp, Wm = W.copy(), W.copy()
        Wp[i, j] += h
        Wm[i, j] -= h
        gW[i, j] = (objective(Wp, b) - objective(Wm, b)) / (2 * h)
    gb = np.zeros_like(b)
    for i in range(b.shape[0]):
        bp, bm = b.copy(), b.copy()
        bp[i] += h
        bm[i] -= h
        gb[i] = (objective(W, bp) - objective(W, bm)) / (2 * h)
    return gW, gb
