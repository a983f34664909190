"""NumPy implementations of the hot kernels.

Used when the compiled extension is unavailable or disabled; the compiled
module exposes the same three functions with identical semantics.
"""
import numpy as np

_CHUNK = 1 << 22  # elements per temporary matrix block


def even_convolve(a, b):
    """Full discrete convolution of two sequences that are symmetric about their centers."""
    return np.convolve(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def _blocks(n_rows, n_cols):
    step = max(1, _CHUNK // max(n_cols, 1))
    for i in range(0, n_rows, step):
        yield slice(i, min(i + step, n_rows))


def radial_sine_transform(q, r, c):
    """``sum_j c_j sin(q r_j) / (q r_j)`` for every ``q`` (limit 1 at ``q r = 0``)."""
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    c = np.asarray(c, dtype=float)
    out = np.empty(q.shape[0])
    for s in _blocks(q.shape[0], r.shape[0]):
        out[s] = np.sinc(np.outer(q[s], r) / np.pi) @ c
    return out


def trig_moments(f, w, t, kind):
    """``sum_i w_i (1 - cos f_i t)`` (kind 0) or ``sum_i w_i sin f_i t`` (kind 1) per ``t``."""
    f = np.asarray(f, dtype=float)
    w = np.asarray(w, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape[0])
    for s in _blocks(t.shape[0], f.shape[0]):
        ph = np.outer(t[s], f)
        if kind == 0:
            # 2 sin^2(x/2) avoids cancellation in 1 - cos x at small x
            out[s] = (2.0 * np.sin(0.5 * ph) ** 2) @ w
        else:
            out[s] = np.sin(ph) @ w
    return out
