"""Vectorized integer kernels for the per-tile crossbar pipeline.

Each kernel carries one tile's batch of operands through products, fault
masks, local/global alignment, and the binary adder tree, returning final
sums plus per-column exponents.  Semantics are defined here once and the
numba backend mirrors them loop-for-loop; the two must agree bit-exactly.

Every add is checked against the level's width law (|s| <= 2^(w-1) at a
w-bit level); with exact int64 arithmetic a violation can only mean a bug,
never silent hardware-style wraparound.

Kernels optionally record stage values into a ``collect`` dict for traces.
"""

from __future__ import annotations

import numpy as np


def _xor_signed(v: np.ndarray, mask, width: int) -> np.ndarray:
    """XOR at ``width`` bits, then reinterpret as two's complement."""
    full = 1 << width
    u = (v ^ mask) & (full - 1)
    return u - ((u >> (width - 1)) & 1) * full


def _check_width(s: np.ndarray, width: int, where: str) -> None:
    limit = 1 << (width - 1)
    if s.size and int(np.abs(s).max()) > limit:
        raise OverflowError(f"width law violated at {where}: {width} bits")


def _reduce(s, eg, adder_mask, ga_exp_mask, ga_off_mask,
            pw, depth, ga_level, collect=None):
    """Binary adder tree with per-level fault masks and mid-tree alignment.

    ``s`` is (N, ic, oc) signed products; ``eg`` is (N, groups, oc) group
    exponents whose count matches the partial sums at ``ga_level``.
    """
    col_exps = None
    for level in range(1, depth + 1):
        s = s[:, 0::2, :] + s[:, 1::2, :]
        width = pw + level
        _check_width(s, width, f"adder level {level}")
        s = _xor_signed(s, adder_mask[level - 1, :s.shape[1], :][None], width)
        if level == ga_level:
            eg = eg ^ ga_exp_mask[None, :, :]
            col_exps = eg.max(axis=1)
            off = np.clip(col_exps[:, None, :] - eg, 0, 15) ^ ga_off_mask[None]
            s = s >> off
            if collect is not None:
                collect["group_exponents"] = eg[0].copy()
                collect["global_offsets"] = off[0].copy()
        if collect is not None:
            collect.setdefault("adder_levels", []).append(s[0].copy())
    if col_exps is None:
        col_exps = np.zeros((s.shape[0], s.shape[2]), np.int64)
    return s[:, 0, :], col_exps


def _products(a, cells, mult_mask, pw, collect):
    s = a[:, :, None] * cells[None, :, :]
    _check_width(s, pw, "multiplier output")
    s = _xor_signed(s, mult_mask[None, :, :], pw)
    if collect is not None:
        collect["products"] = s[0].copy()
    return s


def fp_tile_pre(a, in_gexp, cells, w_gexp, mult_mask, adder_mask,
                ga_exp_mask, ga_off_mask, bias, emax, pw, depth, ga_level,
                collect=None):
    """Pre-aligned paradigm: operands arrive shifted, groups carry exponents.

    ``a``: (N, ic) aligned signed input mantissas; ``in_gexp``: (N, groups)
    input-group max exponents (fault-adjusted); ``cells``/(``w_gexp``): the
    programmed weight mantissas and their per-group max exponents.
    """
    s = _products(a, cells, mult_mask, pw, collect)
    eg = np.clip(in_gexp[:, :, None] + w_gexp[None, :, :] - bias, 0, emax)
    return _reduce(s, eg, adder_mask, ga_exp_mask, ga_off_mask,
                   pw, depth, ga_level, collect)


def fp_tile_post(a, e_in, cells, cell_exp, mult_mask, adder_mask,
                 ga_exp_mask, ga_off_mask, bias, emax, pw, depth, ga_level,
                 group, collect=None):
    """Post-aligned paradigm: raw products are locally aligned after multiply.

    ``a``: (N, ic) unshifted signed mantissas with per-element exponents
    ``e_in``; ``cell_exp`` holds the stored per-cell weight exponents.
    """
    s = _products(a, cells, mult_mask, pw, collect)
    pe = np.clip(e_in[:, :, None] + cell_exp[None, :, :] - bias, 0, emax)
    n, ic, oc = s.shape
    gn = ic // group
    pe4 = pe.reshape(n, gn, group, oc)
    gmax = pe4.max(axis=2)
    off = np.clip(gmax[:, :, None, :] - pe4, 0, 15)
    s = (s.reshape(n, gn, group, oc) >> off).reshape(n, ic, oc)
    if collect is not None:
        collect["local_offsets"] = off.reshape(n, ic, oc)[0].copy()
        collect["aligned_products"] = s[0].copy()
    return _reduce(s, gmax, adder_mask, ga_exp_mask, ga_off_mask,
                   pw, depth, ga_level, collect)


def int_tile(a, cells, mult_mask, adder_mask, pw, depth, collect=None):
    """Integer datapath: products plus a plain adder tree, no alignment."""
    s = _products(a, cells, mult_mask, pw, collect)
    n, _, oc = s.shape
    eg = np.zeros((n, 1, oc), np.int64)
    zeros = np.zeros((1, oc), np.int64)
    sums, _ = _reduce(s, eg, adder_mask, zeros, zeros, pw, depth, 0, collect)
    return sums
