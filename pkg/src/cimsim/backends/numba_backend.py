"""Numba twins of the numpy tile kernels.

Loop-level rewrites of ``numpy_backend`` with identical integer semantics;
the backend equivalence test holds the two bit-identical.  Trace collection
is not supported here (traces always run through the numpy engine).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _reduce_tile(s, eg, adder_mask, ga_exp_mask, ga_off_mask,
                 pw, depth, ga_level, out_sums, out_exps):
    n_samples, ic, oc = s.shape
    for level in range(1, depth + 1):
        n = ic >> level
        width = pw + level
        full = np.int64(1) << width
        half = full >> 1
        for i in range(n_samples):
            for j in range(n):
                for c in range(oc):
                    v = s[i, 2 * j, c] + s[i, 2 * j + 1, c]
                    if v > half or v < -half:
                        raise OverflowError("width law violated in adder tree")
                    m = adder_mask[level - 1, j, c]
                    if m != 0:
                        u = (v ^ m) & (full - 1)
                        if u >= half:
                            u -= full
                        v = u
                    s[i, j, c] = v
        if level == ga_level:
            for i in range(n_samples):
                for c in range(oc):
                    cmax = np.int64(0)
                    for gj in range(n):
                        e = eg[i, gj, c] ^ ga_exp_mask[gj, c]
                        eg[i, gj, c] = e
                        if e > cmax:
                            cmax = e
                    out_exps[i, c] = cmax
                    for gj in range(n):
                        off = cmax - eg[i, gj, c]
                        if off > 15:
                            off = 15
                        off = off ^ ga_off_mask[gj, c]
                        s[i, gj, c] = s[i, gj, c] >> off
    for i in range(n_samples):
        for c in range(oc):
            out_sums[i, c] = s[i, 0, c]


@njit(cache=True)
def _product(av, cell, mask, full, half):
    v = av * cell
    if v > half or v < -half:
        raise OverflowError("width law violated at multiplier output")
    if mask != 0:
        u = (v ^ mask) & (full - 1)
        if u >= half:
            u -= full
        v = u
    return v


@njit(cache=True)
def fp_tile_pre(a, in_gexp, cells, w_gexp, mult_mask, adder_mask,
                ga_exp_mask, ga_off_mask, bias, emax, pw, depth, ga_level):
    n_samples, ic = a.shape
    oc = cells.shape[1]
    gn = in_gexp.shape[1]
    full = np.int64(1) << pw
    half = full >> 1
    s = np.empty((n_samples, ic, oc), np.int64)
    for i in range(n_samples):
        for r in range(ic):
            av = a[i, r]
            for c in range(oc):
                s[i, r, c] = _product(av, cells[r, c], mult_mask[r, c], full, half)
    eg = np.empty((n_samples, gn, oc), np.int64)
    for i in range(n_samples):
        for gj in range(gn):
            base = in_gexp[i, gj] - bias
            for c in range(oc):
                e = base + w_gexp[gj, c]
                if e < 0:
                    e = 0
                elif e > emax:
                    e = emax
                eg[i, gj, c] = e
    out_sums = np.empty((n_samples, oc), np.int64)
    out_exps = np.zeros((n_samples, oc), np.int64)
    _reduce_tile(s, eg, adder_mask, ga_exp_mask, ga_off_mask,
                 pw, depth, ga_level, out_sums, out_exps)
    return out_sums, out_exps


@njit(cache=True)
def fp_tile_post(a, e_in, cells, cell_exp, mult_mask, adder_mask,
                 ga_exp_mask, ga_off_mask, bias, emax, pw, depth, ga_level,
                 group):
    n_samples, ic = a.shape
    oc = cells.shape[1]
    gn = ic // group
    full = np.int64(1) << pw
    half = full >> 1
    s = np.empty((n_samples, ic, oc), np.int64)
    eg = np.empty((n_samples, gn, oc), np.int64)
    for i in range(n_samples):
        for gj in range(gn):
            base = gj * group
            for c in range(oc):
                pmax = np.int64(0)
                for k in range(group):
                    r = base + k
                    e = e_in[i, r] + cell_exp[r, c] - bias
                    if e < 0:
                        e = 0
                    elif e > emax:
                        e = emax
                    if e > pmax:
                        pmax = e
                eg[i, gj, c] = pmax
                for k in range(group):
                    r = base + k
                    v = _product(a[i, r], cells[r, c], mult_mask[r, c], full, half)
                    e = e_in[i, r] + cell_exp[r, c] - bias
                    if e < 0:
                        e = 0
                    elif e > emax:
                        e = emax
                    off = pmax - e
                    if off > 15:
                        off = 15
                    s[i, r, c] = v >> off
    out_sums = np.empty((n_samples, oc), np.int64)
    out_exps = np.zeros((n_samples, oc), np.int64)
    _reduce_tile(s, eg, adder_mask, ga_exp_mask, ga_off_mask,
                 pw, depth, ga_level, out_sums, out_exps)
    return out_sums, out_exps


@njit(cache=True)
def int_tile(a, cells, mult_mask, adder_mask, pw, depth):
    n_samples, ic = a.shape
    oc = cells.shape[1]
    full = np.int64(1) << pw
    half = full >> 1
    s = np.empty((n_samples, ic, oc), np.int64)
    for i in range(n_samples):
        for r in range(ic):
            av = a[i, r]
            for c in range(oc):
                s[i, r, c] = _product(av, cells[r, c], mult_mask[r, c], full, half)
    eg = np.zeros((n_samples, 1, oc), np.int64)
    zeros = np.zeros((1, oc), np.int64)
    out_sums = np.empty((n_samples, oc), np.int64)
    out_exps = np.zeros((n_samples, oc), np.int64)
    _reduce_tile(s, eg, adder_mask, zeros, zeros, pw, depth, 0,
                 out_sums, out_exps)
    return out_sums
