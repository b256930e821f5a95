"""Pure numpy implementation of the Gram assembly core.

Mirrors the compiled ``_core`` extension function for function; used when
the extension is not built or when ``RKHSMERCER_BACKEND=python``.
"""
import numpy as np

GAUSSIAN, LAPLACE, BROWNIAN, CONSTANT, BLOCK = range(5)


def _block_index(x0, nblocks):
    k = np.floor(x0 / 2.0)
    inside = (k >= 0) & (k < nblocks) & (x0 - 2.0 * k < 1.0)
    return np.where(inside, k, -1).astype(np.int64)


def _sqdist(X, Y):
    diff = X[:, None, :] - Y[None, :, :]
    return np.sum(diff * diff, axis=-1)


def gram_closed_form(family, params, X, Y):
    """Cross Gram ``out[i, j] = k(X[i], Y[j])`` for a family code."""
    params = np.asarray(params, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    if family == GAUSSIAN:
        return np.exp(-_sqdist(X, Y) / (2.0 * params[0] * params[0]))
    if family == LAPLACE:
        return np.exp(-np.sqrt(_sqdist(X, Y)) / params[0])
    if family == BROWNIAN:
        return np.prod(np.minimum(X[:, None, :], Y[None, :, :]), axis=-1)
    if family == CONSTANT:
        return np.full((X.shape[0], Y.shape[0]), params[0])
    if family == BLOCK:
        nb = int(params[0])
        sig, mass = params[1:1 + nb], params[1 + nb:1 + 2 * nb]
        bx = _block_index(X[:, 0], nb)
        by = _block_index(Y[:, 0], nb)
        vals = np.where(bx >= 0, sig[bx] * sig[bx] / mass[bx], 0.0)
        same = (bx[:, None] == by[None, :]) & (bx[:, None] >= 0)
        return np.where(same, vals[:, None], 0.0)
    raise ValueError(f"unknown family code {family}")


def diag_closed_form(family, params, X):
    """Diagonal ``out[i] = k(X[i], X[i])``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    params = np.asarray(params, dtype=np.float64)
    if family in (GAUSSIAN, LAPLACE):
        return np.ones(X.shape[0])
    if family == BROWNIAN:
        return np.prod(X, axis=1)
    if family == CONSTANT:
        return np.full(X.shape[0], params[0])
    if family == BLOCK:
        nb = int(params[0])
        sig, mass = params[1:1 + nb], params[1 + nb:1 + 2 * nb]
        bx = _block_index(X[:, 0], nb)
        return np.where(bx >= 0, sig[bx] * sig[bx] / mass[bx], 0.0)
    raise ValueError(f"unknown family code {family}")
