"""A deliberately naive, loop-per-element re-implementation of the pipeline.

This module exists only for differential testing: it re-derives the whole
matvec from the written rules (decode, group alignment, two's-complement
products, fault XORs, adder tree, mid-tree global alignment, normalization,
tile merge) in straight-line Python without touching the datapath or codec
internals.  Keep it slow and obvious; do not share helpers with the
production path.
"""

from __future__ import annotations

import math
from typing import Sequence

from .config import NO_ALIGNMENT, PRE, CrossbarConfig
from .errors import ConfigurationError, NonFiniteOperandError
from .faults import (ADDER_OUTPUT, GLOBAL_ALIGN_EXPONENT, GLOBAL_ALIGN_OFFSET,
                     INPUT_EXPONENT, INPUT_OFFSET, MEMORY_CELL,
                     MULTIPLIER_OUTPUT, NORMALIZED_OUTPUT, WEIGHT_EXPONENT,
                     WEIGHT_OFFSET, FaultSpec)


def _sx(pattern: int, width: int) -> int:
    pattern &= (1 << width) - 1
    return pattern - (1 << width) if pattern >= 1 << (width - 1) else pattern


def _clamp(value: int, lo: int, hi: int) -> int:
    return lo if value < lo else hi if value > hi else value


def _fault_masks(faults: Sequence[FaultSpec]) -> dict:
    table: dict[tuple, int] = {}
    for f in faults:
        key = (f.stage,) + tuple(f.coords)
        table[key] = table.get(key, 0) ^ (1 << f.bit)
    return table


def _decode(word: int, spec) -> tuple[int, int, int]:
    """(sign, biased exponent, padded mantissa); flushes subnormals."""
    sign = (word >> (spec.word_bits - 1)) & 1
    exp = (word >> spec.frac_bits) & spec.exp_max
    frac = word & ((1 << spec.frac_bits) - 1)
    if exp == spec.exp_max:
        raise NonFiniteOperandError("non-finite operand in naive pipeline")
    if exp == 0:
        return sign, 0, 0
    mant = ((1 << spec.frac_bits) | frac) << (spec.padded_width - spec.frac_bits - 1)
    return sign, exp, mant


def _word_value(word: int, spec) -> float:
    sign = (word >> (spec.word_bits - 1)) & 1
    exp = (word >> spec.frac_bits) & spec.exp_max
    frac = word & ((1 << spec.frac_bits) - 1)
    if exp == spec.exp_max:
        if frac:
            return math.nan
        return -math.inf if sign else math.inf
    if exp == 0:
        return -0.0 if sign else 0.0
    value = math.ldexp((1 << spec.frac_bits) + frac, exp - spec.bias - spec.frac_bits)
    return -value if sign else value


def _value_word(x: float, spec, rounding: str) -> int:
    wb = spec.word_bits
    fb = spec.frac_bits
    if math.isnan(x):
        return (spec.exp_max << fb) | (1 << (fb - 1))
    sign = 1 if math.copysign(1.0, x) < 0 else 0
    if math.isinf(x):
        return (sign << (wb - 1)) | (spec.exp_max << fb)
    if x == 0.0:
        return sign << (wb - 1)
    m, e = math.frexp(abs(x))
    scaled = math.ldexp(m, fb + 1)
    mant = int(math.floor(scaled))
    if rounding == "nearest_even":
        rem = scaled - math.floor(scaled)
        if rem > 0.5 or (rem == 0.5 and mant & 1):
            mant += 1
    if mant == 1 << (fb + 1):
        mant >>= 1
        e += 1
    biased = e - 1 + spec.bias
    if biased >= spec.exp_max:
        return (sign << (wb - 1)) | (spec.exp_max << fb)
    if biased <= 0:
        return sign << (wb - 1)
    return (sign << (wb - 1)) | (biased << fb) | (mant & ((1 << fb) - 1))


def _normalize(total: int, col_exp: int, spec, rounding: str) -> int:
    if total == 0:
        return 0
    sign = 1 if total < 0 else 0
    mag = -total if total < 0 else total
    p = mag.bit_length() - 1
    fb = spec.frac_bits
    if p >= fb:
        shift = p - fb
        kept = mag >> shift
        if rounding == "nearest_even" and shift >= 1:
            guard = (mag >> (shift - 1)) & 1
            sticky = (mag & ((1 << (shift - 1)) - 1)) != 0
            if guard and (sticky or kept & 1):
                kept += 1
                if kept == 1 << (fb + 1):
                    kept >>= 1
                    p += 1
    else:
        kept = mag << (fb - p)
    frac = kept & ((1 << fb) - 1)
    biased = col_exp + p - 2 * (spec.padded_width - 1)
    wb = spec.word_bits
    if biased >= spec.exp_max:
        return (sign << (wb - 1)) | (spec.exp_max << fb)
    if biased <= 0:
        return sign << (wb - 1)
    return (sign << (wb - 1)) | (biased << fb) | frac


def naive_matvec(inputs: Sequence[int], weights: Sequence[Sequence[int]],
                 config: CrossbarConfig,
                 faults: Sequence[FaultSpec] = ()) -> list[int]:
    """One input vector through the full pipeline, element by element."""
    spec = config.precision
    rows, cols = config.rows, config.cols
    if len(inputs) != rows or len(weights) != rows:
        raise ConfigurationError("naive matvec shape mismatch")
    masks = _fault_masks(faults)
    ic, oc = config.tile_rows, config.tile_cols
    pw = spec.product_width
    ow = spec.operand_width

    if config.alignment == NO_ALIGNMENT:
        return _naive_int(inputs, weights, config, masks)

    g = config.group
    depth = config.depth
    ga_level = config.global_align_level
    gpt = config.groups_per_tree

    in_sign = [0] * rows
    in_exp = [0] * rows
    in_mant = [0] * rows
    for r in range(rows):
        in_sign[r], in_exp[r], in_mant[r] = _decode(int(inputs[r]), spec)
    w_sign = [[0] * cols for _ in range(rows)]
    w_exp = [[0] * cols for _ in range(rows)]
    w_mant = [[0] * cols for _ in range(rows)]
    for r in range(rows):
        for c in range(cols):
            w_sign[r][c], w_exp[r][c], w_mant[r][c] = _decode(int(weights[r][c]), spec)

    # Input front end and weight programming.
    if config.alignment == PRE:
        n_groups = rows // g
        in_gmax = []
        for gi in range(n_groups):
            gmax = max(in_exp[gi * g + k] for k in range(g))
            gmax ^= masks.get((INPUT_EXPONENT, gi), 0)
            in_gmax.append(gmax)
        a = []
        for r in range(rows):
            off = _clamp(in_gmax[r // g] - in_exp[r], 0, 15)
            off ^= masks.get((INPUT_OFFSET, r), 0)
            mag = in_mant[r] >> off
            a.append(-mag if in_sign[r] else mag)
        w_gmax = [[0] * cols for _ in range(n_groups)]
        cells = [[0] * cols for _ in range(rows)]
        for c in range(cols):
            for gi in range(n_groups):
                gmax = max(w_exp[gi * g + k][c] for k in range(g))
                gmax ^= masks.get((WEIGHT_EXPONENT, gi, c), 0)
                w_gmax[gi][c] = gmax
            for r in range(rows):
                off = _clamp(w_gmax[r // g][c] - w_exp[r][c], 0, 15)
                off ^= masks.get((WEIGHT_OFFSET, r, c), 0)
                mag = w_mant[r][c] >> off
                cell = -mag if w_sign[r][c] else mag
                cells[r][c] = _sx(cell ^ masks.get((MEMORY_CELL, r, c), 0), ow)
    else:
        a = [-in_mant[r] if in_sign[r] else in_mant[r] for r in range(rows)]
        cells = [[0] * cols for _ in range(rows)]
        for r in range(rows):
            for c in range(cols):
                cell = -w_mant[r][c] if w_sign[r][c] else w_mant[r][c]
                cells[r][c] = _sx(cell ^ masks.get((MEMORY_CELL, r, c), 0), ow)

    # Per-tile pipeline and the float64 tile merge.
    out_words = [0] * cols
    h = config.h
    for tw in range(config.w):
        for lc in range(oc):
            col = tw * oc + lc
            tile_vals = []
            for th in range(h):
                base = th * ic
                sums = []
                for r in range(base, base + ic):
                    p = a[r] * cells[r][col]
                    p = _sx(p ^ masks.get((MULTIPLIER_OUTPUT, r, col), 0), pw)
                    sums.append(p)
                if config.alignment == PRE:
                    eg = []
                    for gj in range(gpt):
                        gi = th * gpt + gj
                        eg.append(_clamp(in_gmax[gi] + w_gmax[gi][col] - spec.bias,
                                         0, spec.exp_max))
                else:
                    pe = []
                    for r in range(base, base + ic):
                        pe.append(_clamp(in_exp[r] + w_exp[r][col] - spec.bias,
                                         0, spec.exp_max))
                    eg = []
                    for gj in range(ic // g):
                        pmax = max(pe[gj * g + k] for k in range(g))
                        eg.append(pmax)
                        for k in range(g):
                            sums[gj * g + k] >>= _clamp(pmax - pe[gj * g + k], 0, 15)
                col_exp = 0
                for level in range(1, depth + 1):
                    width = pw + level
                    half = 1 << (width - 1)
                    nxt = []
                    for j in range(len(sums) // 2):
                        v = sums[2 * j] + sums[2 * j + 1]
                        assert -half <= v <= half, "width law violated"
                        idx = th * (ic >> level) + j
                        m = masks.get((ADDER_OUTPUT, level, col, idx), 0)
                        if m:
                            v = _sx(v ^ m, width)
                        nxt.append(v)
                    sums = nxt
                    if level == ga_level:
                        for gj in range(len(eg)):
                            grp = th * gpt + gj
                            eg[gj] ^= masks.get((GLOBAL_ALIGN_EXPONENT, col, grp), 0)
                        col_exp = max(eg)
                        for gj in range(len(eg)):
                            grp = th * gpt + gj
                            off = _clamp(col_exp - eg[gj], 0, 15)
                            off ^= masks.get((GLOBAL_ALIGN_OFFSET, col, grp), 0)
                            sums[gj] >>= off
                word = _normalize(sums[0], col_exp, spec, config.rounding)
                word ^= masks.get((NORMALIZED_OUTPUT, col, th), 0)
                tile_vals.append(word)
            if h == 1:
                out_words[col] = tile_vals[0]
            else:
                acc = _word_value(tile_vals[0], spec)
                for th in range(1, h):
                    acc += _word_value(tile_vals[th], spec)
                out_words[col] = _value_word(acc, spec, config.rounding)
    return out_words


def _naive_int(inputs, weights, config, masks) -> list[int]:
    rows, cols = config.rows, config.cols
    ic = config.tile_rows
    pw = config.precision.product_width
    depth = config.depth
    out = [0] * cols
    for col in range(cols):
        total = 0
        for th in range(config.h):
            base = th * ic
            sums = []
            for r in range(base, base + ic):
                cell = _sx(int(weights[r][col]) ^ masks.get((MEMORY_CELL, r, col), 0),
                           config.precision.operand_width)
                p = int(inputs[r]) * cell
                p = _sx(p ^ masks.get((MULTIPLIER_OUTPUT, r, col), 0), pw)
                sums.append(p)
            for level in range(1, depth + 1):
                width = pw + level
                half = 1 << (width - 1)
                nxt = []
                for j in range(len(sums) // 2):
                    v = sums[2 * j] + sums[2 * j + 1]
                    assert -half <= v <= half, "width law violated"
                    idx = th * (ic >> level) + j
                    m = masks.get((ADDER_OUTPUT, level, col, idx), 0)
                    if m:
                        v = _sx(v ^ m, width)
                    nxt.append(v)
                sums = nxt
            total += sums[0]
        out[col] = total
    return out
