"""Certified upper bounds for induced norms of discrete convolutions.

For lags ``K_n`` (acting ``U -> Y``) the induced norms of the causal
convolution on a long enough horizon are

* L^inf: the norm of ``(s_n) -> sum_n K_n s_n`` from the product of unit
  balls of U into Y;
* L^1: the norm of ``x -> (K_n x)_n`` from U into the l^1-sum of Y.

Both are computable exactly when the supremum reduces to extreme points
(sup output or weighted-1 input); otherwise we return the smallest of a
few valid bounds and say which one won.
"""

import math

import numpy as np

__all__ = ['linf_gain_upper', 'l1_gain_upper', 'op_norm_upper']


def _normalise(K, U, Y):
    # one-dimensional spaces carry a scale factor only
    K = np.asarray(K, float)
    if U.dim == 1:
        K = K / U.scale()
    if Y.dim == 1:
        K = K * Y.scale()
    return K


def _l2_embedding(U):
    """``(D, r)``: ``||D x||_2 <= r`` on the unit ball of U."""
    if U.dim == 1:
        return np.ones(1), 1.0
    if U.norm_kind == 'weighted-2':
        return 1.0 / np.sqrt(U.weights), 1.0
    if U.norm_kind == 'sup':
        return np.ones(U.dim), math.sqrt(U.dim)
    return np.ones(U.dim), 1.0 / U.weights.min()


def _dual_norms(rows, U):
    if U.dim == 1:
        return np.abs(rows[..., 0])
    return U.functional_norm(rows)


def linf_gain_upper(K, U, Y):
    """Upper bound on the L^inf -> L^inf gain; returns ``(value, exact, method)``."""
    raw = np.asarray(K, float)
    raw = raw[np.any(raw, axis=(1, 2))]
    if len(raw) == 0:
        return 0.0, True, 'zero kernel'
    K = _normalise(raw, U, Y)
    if Y.dim == 1 or Y.norm_kind == 'sup':
        per_row = _dual_norms(K, U).sum(axis=0)
        return float(per_row.max()), True, 'row dual-norm sums'
    cands = {'sum of per-lag operator norms': sum(op_norm_upper(k, U, Y) for k in raw)}
    D, r = _l2_embedding(U)
    if Y.norm_kind == 'weighted-2':
        cat = np.concatenate([np.sqrt(Y.weights)[:, None] * k * D for k in K], axis=1)
        cands['l2 embedding of the concatenated lags'] = (
            r * math.sqrt(len(K)) * np.linalg.norm(cat, 2))
    else:
        cands['weighted row dual-norm sums'] = float(Y.weights @ _dual_norms(K, U).sum(axis=0))
    method = min(cands, key=cands.get)
    return float(cands[method]), False, method


def l1_gain_upper(K, U, Y):
    """Upper bound on the L^1 -> L^1 gain; returns ``(value, exact, method)``."""
    raw = np.asarray(K, float)
    raw = raw[np.any(raw, axis=(1, 2))]
    if len(raw) == 0:
        return 0.0, True, 'zero kernel'
    K = _normalise(raw, U, Y)
    if U.dim == 1 or U.norm_kind == 'weighted-1':
        w = np.ones(1) if U.dim == 1 else U.weights
        cols = np.transpose(K, (0, 2, 1))  # (lag, input, output)
        per_col = _space_norm(cols, Y).sum(axis=0) / w
        return float(per_col.max()), True, 'column norm sums'
    cands = {'sum of per-lag operator norms': sum(op_norm_upper(k, U, Y) for k in raw)}
    D, r = _l2_embedding(U)
    if Y.dim == 1 or Y.norm_kind == 'weighted-1':
        wy = np.ones(1) if Y.dim == 1 else Y.weights
        S = np.concatenate([wy[:, None] * k for k in K], axis=0)
        S = S[np.any(S, axis=1)]
        # sum_r |s_r x| <= sqrt(#rows) ||S x||_2
        cands['l2 embedding of the stacked lags'] = (
            r * math.sqrt(len(S)) * np.linalg.norm(S * D, 2))
        cands['weighted row dual-norm sums'] = float(np.sum(_dual_norms(S[None], U)))
    else:
        wy = np.sqrt(Y.weights) if Y.norm_kind == 'weighted-2' else np.ones(Y.dim)
        S = np.concatenate([wy[:, None] * k for k in K], axis=0)
        cands['l2 embedding of the stacked lags'] = (
            r * math.sqrt(len(K)) * np.linalg.norm(S * D, 2))
    method = min(cands, key=cands.get)
    return float(cands[method]), False, method


def _space_norm(v, Y):
    if Y.dim == 1:
        return np.abs(v[..., 0])
    return Y.norm(v)


def op_norm_upper(K, U, Y):
    """Upper bound on ``||K||_{U -> Y}`` (exact for sup Y or weighted-1 U)."""
    K = np.asarray(K, float)
    if not np.any(K):
        return 0.0
    Kn = _normalise(K, U, Y)
    if Y.dim == 1 or Y.norm_kind == 'sup':
        return float(_dual_norms(Kn, U).max())
    if U.dim == 1 or U.norm_kind == 'weighted-1':
        w = np.ones(1) if U.dim == 1 else U.weights
        return float((_space_norm(Kn.T, Y) / w).max())
    D, r = _l2_embedding(U)
    if Y.norm_kind == 'weighted-2':
        if U.norm_kind == 'weighted-2':
            return float(np.linalg.norm(np.sqrt(Y.weights)[:, None] * Kn * D, 2))
        return float(r * np.linalg.norm(np.sqrt(Y.weights)[:, None] * Kn * D, 2))
    # weighted-1 output
    return float(Y.weights @ _dual_norms(Kn, U))
