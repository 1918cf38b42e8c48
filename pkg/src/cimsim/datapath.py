"""The crossbar matrix-vector pipeline.

Flow for the floating-point paradigms, per tile and per column:

* ``pre``  — inputs and weights are shifted to their group maxima before the
  array; products share one exponent per group.
* ``post`` — operands enter unshifted; products are aligned locally in
  groups right after the multipliers.

Either way the partial sums pass the mid-tree global alignment at adder
level log2(group), the completed sum is normalized back into a word, and
(for tiled stencils) the per-tile words of each output channel are
accumulated in float64 in fixed row-tile order and rounded once.

Faults are dense XOR masks: a zero mask is the identity, so faulty and
fault-free runs share one code path.  Weight-side faults (offsets,
exponents, memory cells) bake into the programmed state once; all other
stages corrupt every invocation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import backends
from .backends import numpy_backend
from .alignment import local_align_products
from .codec import (NEAREST_EVEN, PrecisionSpec, as_unsigned, check_finite_words,
                    decode_fields, floats_to_words, padded_from_fields,
                    words_to_floats)
from .config import NO_ALIGNMENT, POST, PRE, CrossbarConfig
from .errors import ConfigurationError
from .faults import (ADDER_OUTPUT, GLOBAL_ALIGN_EXPONENT, GLOBAL_ALIGN_OFFSET,
                     INPUT_EXPONENT, INPUT_OFFSET, MEMORY_CELL,
                     MULTIPLIER_OUTPUT, NORMALIZED_OUTPUT, WEIGHT_EXPONENT,
                     WEIGHT_OFFSET, FaultSpec, validate_campaign)

_POW2 = np.array([1 << k for k in range(48)], dtype=np.int64)


# ---------------------------------------------------------------------------
# Fault masks
# ---------------------------------------------------------------------------

_zeros_cache: dict[tuple[int, ...], np.ndarray] = {}


def _zeros(*shape: int) -> np.ndarray:
    arr = _zeros_cache.get(shape)
    if arr is None:
        arr = np.zeros(shape, np.int64)
        _zeros_cache[shape] = arr
    return arr


class FaultMasks:
    """Dense per-stage XOR masks for one campaign against one config.

    Build once per (campaign, config) and reuse across programmings and
    matvecs; the arrays are read-only by convention.
    """

    def __init__(self, specs: Sequence[FaultSpec], config: CrossbarConfig):
        validate_campaign(specs, config)
        self.config = config
        rows, cols = config.rows, config.cols
        self.input_exp: np.ndarray | None = None
        self.input_off: np.ndarray | None = None
        self.weight_exp: np.ndarray | None = None
        self.weight_off: np.ndarray | None = None
        self.memory: np.ndarray | None = None
        self.mult: np.ndarray | None = None
        self._tiles: dict[tuple[int, int], dict[str, np.ndarray]] = {}
        for f in specs:
            bit = 1 << f.bit
            if f.stage == INPUT_OFFSET:
                self.input_off = self._alloc(self.input_off, (rows,))
                self.input_off[f.coords[0]] ^= bit
            elif f.stage == INPUT_EXPONENT:
                self.input_exp = self._alloc(self.input_exp, (config.n_row_groups,))
                self.input_exp[f.coords[0]] ^= bit
            elif f.stage == WEIGHT_OFFSET:
                self.weight_off = self._alloc(self.weight_off, (rows, cols))
                self.weight_off[f.coords] ^= bit
            elif f.stage == WEIGHT_EXPONENT:
                self.weight_exp = self._alloc(
                    self.weight_exp, (config.n_row_groups, cols))
                self.weight_exp[f.coords] ^= bit
            elif f.stage == MEMORY_CELL:
                self.memory = self._alloc(self.memory, (rows, cols))
                self.memory[f.coords] ^= bit
            elif f.stage == MULTIPLIER_OUTPUT:
                self.mult = self._alloc(self.mult, (rows, cols))
                self.mult[f.coords] ^= bit
            elif f.stage == ADDER_OUTPUT:
                level, col, idx = f.coords
                per_tile = config.tile_rows >> level
                th, j = divmod(idx, per_tile)
                tw, c = divmod(col, config.tile_cols)
                self._bundle(th, tw)["adder"][level - 1, j, c] ^= bit
            elif f.stage in (GLOBAL_ALIGN_OFFSET, GLOBAL_ALIGN_EXPONENT):
                col, grp = f.coords
                th, gj = divmod(grp, config.groups_per_tree)
                tw, c = divmod(col, config.tile_cols)
                key = "ga_off" if f.stage == GLOBAL_ALIGN_OFFSET else "ga_exp"
                self._bundle(th, tw)[key][gj, c] ^= bit
            elif f.stage == NORMALIZED_OUTPUT:
                col, th = f.coords
                tw, c = divmod(col, config.tile_cols)
                self._bundle(th, tw)["norm"][c] ^= bit

    @staticmethod
    def _alloc(current: np.ndarray | None, shape: tuple[int, ...]) -> np.ndarray:
        return current if current is not None else np.zeros(shape, np.int64)

    def _bundle(self, th: int, tw: int) -> dict[str, np.ndarray]:
        bundle = self._tiles.get((th, tw))
        if bundle is None:
            cfg = self.config
            gpt = max(cfg.groups_per_tree, 1)
            bundle = {
                "adder": np.zeros((cfg.depth, cfg.tile_rows >> 1, cfg.tile_cols),
                                  np.int64),
                "ga_exp": np.zeros((gpt, cfg.tile_cols), np.int64),
                "ga_off": np.zeros((gpt, cfg.tile_cols), np.int64),
                "norm": np.zeros(cfg.tile_cols, np.int64),
            }
            self._tiles[(th, tw)] = bundle
        return bundle

    def tile(self, th: int, tw: int) -> dict[str, np.ndarray]:
        bundle = self._tiles.get((th, tw))
        if bundle is not None:
            return bundle
        cfg = self.config
        gpt = max(cfg.groups_per_tree, 1)
        return {
            "adder": _zeros(cfg.depth, cfg.tile_rows >> 1, cfg.tile_cols),
            "ga_exp": _zeros(gpt, cfg.tile_cols),
            "ga_off": _zeros(gpt, cfg.tile_cols),
            "norm": _zeros(cfg.tile_cols),
        }

    def mult_tile(self, th: int, tw: int) -> np.ndarray:
        cfg = self.config
        if self.mult is None:
            return _zeros(cfg.tile_rows, cfg.tile_cols)
        rs = slice(th * cfg.tile_rows, (th + 1) * cfg.tile_rows)
        cs = slice(tw * cfg.tile_cols, (tw + 1) * cfg.tile_cols)
        return np.ascontiguousarray(self.mult[rs, cs])


def _as_masks(faults, config: CrossbarConfig) -> FaultMasks:
    if isinstance(faults, FaultMasks):
        if faults.config is not config and faults.config != config:
            raise ConfigurationError("fault masks built for a different config")
        return faults
    return FaultMasks(tuple(faults), config)


# ---------------------------------------------------------------------------
# Programming
# ---------------------------------------------------------------------------

@dataclass
class ProgrammedCrossbar:
    """Weights resident in the array, with any programming-time corruption.

    ``cells`` hold operand-width two's-complement mantissas (or raw INT8
    values); ``group_exps`` carries per-(group, column) weight max exponents
    for the pre paradigm, ``cell_exps`` per-cell exponents for post.
    """

    config: CrossbarConfig
    cells: np.ndarray
    group_exps: np.ndarray | None
    cell_exps: np.ndarray | None
    weight_words: np.ndarray


def program_weights(weights, config: CrossbarConfig,
                    faults: Sequence[FaultSpec] | FaultMasks = ()) -> ProgrammedCrossbar:
    """Decode, align (pre paradigm), and store a weight matrix.

    ``weights`` is (rows, cols): packed words for float formats, signed
    values in [-128, 127] for INT8.  Weight-side faults corrupt the stored
    state exactly once, here.
    """
    words = np.asarray(weights, dtype=np.int64)
    if words.shape != (config.rows, config.cols):
        raise ConfigurationError(
            f"weights shape {words.shape} does not match "
            f"{config.rows}x{config.cols} array")
    masks = _as_masks(faults, config)
    spec = config.precision
    ow = spec.operand_width

    if not spec.is_float:
        if words.min() < -(1 << (ow - 1)) or words.max() >= 1 << (ow - 1):
            raise ConfigurationError("INT8 weights outside [-128, 127]")
        cells = _apply_signed_mask(words, masks.memory, ow)
        return ProgrammedCrossbar(config, cells, None, None, words.copy())

    check_finite_words(words, spec, "weight")
    sign, exp, frac = decode_fields(words, spec)
    mant = padded_from_fields(exp, frac, spec)

    if config.alignment == PRE:
        g = config.group
        ng = config.n_row_groups
        gmax = exp.reshape(ng, g, config.cols).max(axis=1)
        if masks.weight_exp is not None:
            gmax = gmax ^ masks.weight_exp
        offs = np.clip(np.repeat(gmax, g, axis=0) - exp, 0, 15)
        if masks.weight_off is not None:
            offs = offs ^ masks.weight_off
        mag = mant >> offs
        cells = np.where(sign == 1, -mag, mag)
        cells = _apply_signed_mask(cells, masks.memory, ow)
        return ProgrammedCrossbar(config, cells, gmax, None, words.copy())

    cells = np.where(sign == 1, -mant, mant)
    cells = _apply_signed_mask(cells, masks.memory, ow)
    return ProgrammedCrossbar(config, cells, None, exp, words.copy())


def _apply_signed_mask(values: np.ndarray, mask: np.ndarray | None,
                       width: int) -> np.ndarray:
    if mask is None:
        return values.copy()
    return numpy_backend._xor_signed(values, mask, width)


# ---------------------------------------------------------------------------
# Scalar operation surfaces
# ---------------------------------------------------------------------------

def multiply(a: int, w: int, spec: PrecisionSpec) -> int:
    """Exact signed mantissa product; always fits in ``product_width`` bits."""
    half = 1 << (spec.operand_width - 1)
    if not (-half <= a < half and -half <= w < half):
        raise ConfigurationError("operand outside the signed mantissa range")
    return a * w


def normalize(total: int, column_exponent: int, config: CrossbarConfig) -> int:
    """Convert one completed adder sum back into a packed word."""
    words = normalize_batch(np.array([[total]], np.int64),
                            np.array([[column_exponent]], np.int64),
                            config.precision, config.rounding, None)
    return int(words[0, 0])


def normalize_batch(sums: np.ndarray, col_exps: np.ndarray,
                    spec: PrecisionSpec, rounding: str,
                    norm_mask: np.ndarray | None) -> np.ndarray:
    """Vectorized normalization: sign split, leading-one search, fraction
    extraction with truncate/round-to-nearest-even, exponent bookkeeping,
    saturating/flushing encode, then any normalized-output fault.
    """
    neg = sums < 0
    mag = np.abs(sums)
    nonzero = mag > 0
    p = (np.searchsorted(_POW2, mag.ravel(), side="right") - 1).reshape(mag.shape)
    fb = spec.frac_bits
    shift = p - fb
    shp = np.maximum(shift, 0)
    shn = np.maximum(-shift, 0)
    kept = np.where(shift >= 0, mag >> shp, mag << shn)
    if rounding == NEAREST_EVEN:
        rounds = shift >= 1
        gpos = np.maximum(shift - 1, 0)
        guard = (mag >> gpos) & 1
        sticky = (mag & ((1 << gpos) - 1)) != 0
        up = rounds & (guard == 1) & (sticky | ((kept & 1) == 1))
        kept = kept + up
        carry = kept == (1 << (fb + 1))
        kept = np.where(carry, kept >> 1, kept)
        p = p + carry
    frac = kept & spec.frac_mask
    # Result exponent: the column exponent corrected by where the leading
    # one landed relative to a unit product (bit 2*(padded_width-1)).
    biased = col_exps + p - 2 * (spec.padded_width - 1)
    sign = neg.astype(np.int64)
    sign_word = sign << (spec.word_bits - 1)
    word = sign_word | (biased << fb) | frac
    word = np.where(biased >= spec.exp_max,
                    sign_word | (spec.exp_max << fb), word)
    word = np.where(biased <= 0, sign_word, word)
    word = np.where(nonzero, word, 0)
    if norm_mask is not None:
        word = word ^ norm_mask
    return word


def reduce_column(products: Sequence[int], exponents: Sequence[int] | None,
                  config: CrossbarConfig,
                  faults: Sequence[FaultSpec] = ()) -> tuple[int, int]:
    """Run one tile column's adder tree on already-formed products.

    ``exponents`` is per-group (pre paradigm), per-product (post), or None
    (INT8).  Fault coordinates are interpreted against column 0 of a single
    tile; only adder and global-alignment stages apply at this point.
    """
    ic = config.tile_rows
    if len(products) != ic:
        raise ConfigurationError(f"expected {ic} products, got {len(products)}")
    spec = config.precision
    pw = spec.product_width
    s = np.array(products, np.int64).reshape(1, ic, 1)
    adder = np.zeros((config.depth, ic >> 1, 1), np.int64)
    gpt = max(config.groups_per_tree, 1)
    ga_exp = np.zeros((gpt, 1), np.int64)
    ga_off = np.zeros((gpt, 1), np.int64)
    for f in faults:
        if f.stage == ADDER_OUTPUT:
            level, _, idx = f.coords
            adder[level - 1, idx, 0] ^= 1 << f.bit
        elif f.stage == GLOBAL_ALIGN_EXPONENT:
            ga_exp[f.coords[1], 0] ^= 1 << f.bit
        elif f.stage == GLOBAL_ALIGN_OFFSET:
            ga_off[f.coords[1], 0] ^= 1 << f.bit
        else:
            raise ConfigurationError(
                f"{f.stage} faults do not apply inside reduce_column")
    if config.alignment == NO_ALIGNMENT:
        eg = np.zeros((1, 1, 1), np.int64)
        sums, _ = numpy_backend._reduce(s, eg, adder, ga_exp * 0, ga_off * 0,
                                        pw, config.depth, 0)
        return int(sums[0, 0]), 0
    if config.alignment == POST:
        aligned, group_exps = local_align_products(
            [int(v) for v in products], [int(e) for e in exponents],
            config.group)
        s = np.array(aligned, np.int64).reshape(1, ic, 1)
        eg = np.array(group_exps, np.int64).reshape(1, -1, 1)
    else:
        if exponents is None or len(exponents) != config.groups_per_tree:
            raise ConfigurationError("pre paradigm needs one exponent per group")
        eg = np.array(exponents, np.int64).reshape(1, -1, 1)
    sums, col_exps = numpy_backend._reduce(
        s, eg, adder, ga_exp, ga_off, pw, config.depth,
        config.global_align_level)
    return int(sums[0, 0]), int(col_exps[0, 0])


# ---------------------------------------------------------------------------
# Matvec
# ---------------------------------------------------------------------------

def matvec_batch(inputs, programmed: ProgrammedCrossbar,
                 faults: Sequence[FaultSpec] | FaultMasks = ()) -> np.ndarray:
    """Run a batch of input vectors: (N, rows) words -> (N, cols) words.

    For INT8 the result is raw signed column sums instead of packed words.
    """
    out, _ = _run(np.asarray(inputs, np.int64), programmed,
                  _as_masks(faults, programmed.config), collect_trace=False)
    return out


def crossbar_matvec(inputs, programmed: ProgrammedCrossbar,
                    faults: Sequence[FaultSpec] | FaultMasks = (),
                    trace: bool = False):
    """Run one input vector; optionally capture the full pipeline trace."""
    vec = np.asarray(inputs, np.int64)
    if vec.ndim != 1:
        raise ConfigurationError("crossbar_matvec expects a single input vector")
    out, tr = _run(vec.reshape(1, -1), programmed,
                   _as_masks(faults, programmed.config), collect_trace=trace)
    return out[0], tr


def tiled_matvec(inputs, weights, config: CrossbarConfig,
                 faults: Sequence[FaultSpec] = ()) -> np.ndarray:
    """Program ``weights`` and run ``inputs`` in one step."""
    masks = _as_masks(faults, config)
    programmed = program_weights(weights, config, masks)
    arr = np.asarray(inputs, np.int64)
    if arr.ndim == 1:
        out, _ = _run(arr.reshape(1, -1), programmed, masks, False)
        return out[0]
    out, _ = _run(arr, programmed, masks, False)
    return out


def int8_matvec(inputs, weights, config: CrossbarConfig,
                faults: Sequence[FaultSpec] = ()) -> np.ndarray:
    """Integer datapath: signed 8-bit operands, raw integer column sums."""
    if config.precision.is_float:
        raise ConfigurationError("int8_matvec requires the INT8 precision")
    return tiled_matvec(inputs, weights, config, faults)


def _run(inputs: np.ndarray, programmed: ProgrammedCrossbar, masks: FaultMasks,
         collect_trace: bool):
    config = programmed.config
    spec = config.precision
    if inputs.ndim != 2 or inputs.shape[1] != config.rows:
        raise ConfigurationError(
            f"inputs shape {inputs.shape} does not match {config.rows} rows")
    n = inputs.shape[0]
    ic, oc = config.tile_rows, config.tile_cols
    pw = spec.product_width
    trace: PipelineTrace | None = None
    tile_collects: dict[tuple[int, int], dict] = {}
    env: dict[str, np.ndarray] = {}

    gmax = exp = None
    if spec.is_float:
        check_finite_words(inputs, spec, "input")
        sign, exp, frac = decode_fields(inputs, spec)
        mant = padded_from_fields(exp, frac, spec)
        if config.alignment == PRE:
            g = config.group
            ng = config.n_row_groups
            gmax = exp.reshape(n, ng, g).max(axis=2)
            if masks.input_exp is not None:
                gmax = gmax ^ masks.input_exp[None, :]
            offs = np.clip(np.repeat(gmax, g, axis=1) - exp, 0, 15)
            if masks.input_off is not None:
                offs = offs ^ masks.input_off[None, :]
            mag = mant >> offs
            a = np.where(sign == 1, -mag, mag)
            env["input_group_max"] = gmax
            env["input_offsets"] = offs
        else:
            a = np.where(sign == 1, -mant, mant)
    else:
        if inputs.min(initial=0) < -128 or inputs.max(initial=0) > 127:
            raise ConfigurationError("INT8 inputs outside [-128, 127]")
        a = inputs
    env["aligned_inputs"] = a

    use_numpy = collect_trace
    be = numpy_backend if use_numpy else backends

    if spec.is_float:
        tile_words = np.empty((n, config.h, config.cols), np.int64)
        tile_exps = np.empty((n, config.h, config.cols), np.int64)
        tile_sums = np.empty((n, config.h, config.cols), np.int64)
    else:
        acc = np.zeros((n, config.cols), np.int64)

    for th in range(config.h):
        rs = slice(th * ic, (th + 1) * ic)
        a_t = np.ascontiguousarray(a[:, rs])
        for tw in range(config.w):
            cs = slice(tw * oc, (tw + 1) * oc)
            cells_t = np.ascontiguousarray(programmed.cells[rs, cs])
            mult_t = masks.mult_tile(th, tw)
            bundle = masks.tile(th, tw)
            collect = {} if collect_trace else None
            if collect is not None:
                tile_collects[(th, tw)] = collect
            if config.alignment == PRE:
                gpt = config.groups_per_tree
                in_g = np.ascontiguousarray(gmax[:, th * gpt:(th + 1) * gpt])
                wg_t = np.ascontiguousarray(programmed.group_exps[
                    th * gpt:(th + 1) * gpt, cs])
                args = (a_t, in_g, cells_t, wg_t, mult_t, bundle["adder"],
                        bundle["ga_exp"], bundle["ga_off"], spec.bias,
                        spec.exp_max, pw, config.depth,
                        config.global_align_level)
                sums, cexp = (numpy_backend.fp_tile_pre(*args, collect=collect)
                              if use_numpy else be.fp_tile_pre(*args))
            elif config.alignment == POST:
                e_t = np.ascontiguousarray(exp[:, rs])
                ce_t = np.ascontiguousarray(programmed.cell_exps[rs, cs])
                args = (a_t, e_t, cells_t, ce_t, mult_t, bundle["adder"],
                        bundle["ga_exp"], bundle["ga_off"], spec.bias,
                        spec.exp_max, pw, config.depth,
                        config.global_align_level, config.group)
                sums, cexp = (numpy_backend.fp_tile_post(*args, collect=collect)
                              if use_numpy else be.fp_tile_post(*args))
            else:
                args = (a_t, cells_t, mult_t, bundle["adder"], pw, config.depth)
                sums = (numpy_backend.int_tile(*args, collect=collect)
                        if use_numpy else be.int_tile(*args))
                acc[:, cs] += sums
                continue
            tile_sums[:, th, cs] = sums
            tile_exps[:, th, cs] = cexp
            tile_words[:, th, cs] = normalize_batch(
                sums, cexp, spec, config.rounding, bundle["norm"])

    if spec.is_float:
        out = merge_tile_words(tile_words, spec, config.rounding)
        env["tile_sums"] = tile_sums
        env["tile_exps"] = tile_exps
        env["tile_words"] = tile_words
    else:
        out = acc
    env["out"] = out

    if collect_trace:
        trace = _build_trace(config, programmed, tile_collects, env)
    return out, trace


def merge_tile_words(tile_words: np.ndarray, spec: PrecisionSpec,
                     rounding: str) -> np.ndarray:
    """Accumulate (N, h, cols) per-tile words over row tiles.

    Partials add in fixed tile-index order in float64 (exact up to ~41 bits
    of exponent spread, far beyond the formats' significands) and round once
    to the output format.  With a single row tile the words pass through
    untouched.
    """
    if tile_words.shape[1] == 1:
        return tile_words[:, 0, :]
    vals = words_to_floats(tile_words, spec)
    acc = vals[:, 0, :].copy()
    with np.errstate(invalid="ignore"):  # inf + -inf from faulted tiles is NaN
        for th in range(1, tile_words.shape[1]):
            acc += vals[:, th, :]
    return floats_to_words(acc, spec, rounding)


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

@dataclass
class PipelineTrace:
    """Every stage value of one single-vector matvec, in array form.

    Keys follow the fault-stage coordinate conventions; ``adder_levels[l-1]``
    holds the level-l outputs as (h * tile_rows >> l, cols).
    """

    config: CrossbarConfig
    stages: dict[str, np.ndarray] = field(default_factory=dict)
    adder_levels: list[np.ndarray] = field(default_factory=list)

    def dump(self) -> Iterator[str]:
        """Line-oriented text dump: stage coords width hex-pattern."""
        spec = self.config.precision
        widths = {
            "InputGroupExponent": spec.exp_bits,
            "InputOffset": 4,
            "AlignedInput": spec.operand_width,
            "MemoryCell": spec.operand_width,
            "WeightGroupExponent": spec.exp_bits,
            "CellExponent": spec.exp_bits,
            "MultiplierOutput": spec.product_width,
            "LocalOffset": 4,
            "AlignedProduct": spec.product_width,
            "GroupExponent": spec.exp_bits,
            "GlobalAlignOffset": 4,
            "ColumnExponent": spec.exp_bits,
            "FinalSum": self.config.final_width,
            "TileWord": spec.word_bits,
            "OutputWord": spec.word_bits,
            "OutputSum": self.config.final_width,
        }
        for name, arr in self.stages.items():
            width = widths[name]
            for coords in np.ndindex(arr.shape):
                pattern = as_unsigned(int(arr[coords]), width)
                text = ",".join(str(c) for c in coords)
                yield f"{name} {text} {width} 0x{pattern:x}"
        for level, arr in enumerate(self.adder_levels, start=1):
            width = spec.product_width + level
            for coords in np.ndindex(arr.shape):
                pattern = as_unsigned(int(arr[coords]), width)
                yield (f"AdderOutput {level},{coords[1]},{coords[0]} "
                       f"{width} 0x{pattern:x}")

    def dump_text(self) -> str:
        return "\n".join(self.dump()) + "\n"


def _build_trace(config, programmed, tile_collects, env) -> PipelineTrace:
    spec = config.precision
    tr = PipelineTrace(config)
    st = tr.stages
    if spec.is_float and config.alignment == PRE:
        st["InputGroupExponent"] = env["input_group_max"][0].copy()
        st["InputOffset"] = env["input_offsets"][0].copy()
    st["AlignedInput"] = env["aligned_inputs"][0].copy()
    st["MemoryCell"] = programmed.cells.copy()
    if programmed.group_exps is not None:
        st["WeightGroupExponent"] = programmed.group_exps.copy()
    if programmed.cell_exps is not None:
        st["CellExponent"] = programmed.cell_exps.copy()

    rows, cols = config.rows, config.cols
    ic, oc = config.tile_rows, config.tile_cols
    products = np.zeros((rows, cols), np.int64)
    for (th, tw), collect in tile_collects.items():
        rs = slice(th * ic, (th + 1) * ic)
        cs = slice(tw * oc, (tw + 1) * oc)
        products[rs, cs] = collect["products"]
    st["MultiplierOutput"] = products

    if config.alignment == POST:
        local_off = np.zeros((rows, cols), np.int64)
        aligned = np.zeros((rows, cols), np.int64)
        for (th, tw), collect in tile_collects.items():
            rs = slice(th * ic, (th + 1) * ic)
            cs = slice(tw * oc, (tw + 1) * oc)
            local_off[rs, cs] = collect["local_offsets"]
            aligned[rs, cs] = collect["aligned_products"]
        st["LocalOffset"] = local_off
        st["AlignedProduct"] = aligned

    for level in range(1, config.depth + 1):
        per_tile = ic >> level
        arr = np.zeros((config.h * per_tile, cols), np.int64)
        for (th, tw), collect in tile_collects.items():
            cs = slice(tw * oc, (tw + 1) * oc)
            arr[th * per_tile:(th + 1) * per_tile, cs] = \
                collect["adder_levels"][level - 1]
        tr.adder_levels.append(arr)

    if spec.is_float:
        gpt = config.groups_per_tree
        geo = np.zeros((config.h * gpt, cols), np.int64)
        goff = np.zeros((config.h * gpt, cols), np.int64)
        for (th, tw), collect in tile_collects.items():
            cs = slice(tw * oc, (tw + 1) * oc)
            geo[th * gpt:(th + 1) * gpt, cs] = collect["group_exponents"]
            goff[th * gpt:(th + 1) * gpt, cs] = collect["global_offsets"]
        st["GroupExponent"] = geo
        st["GlobalAlignOffset"] = goff
        st["ColumnExponent"] = env["tile_exps"][0].copy()
        st["FinalSum"] = env["tile_sums"][0].copy()
        st["TileWord"] = env["tile_words"][0].copy()
        st["OutputWord"] = env["out"][0].copy()
    else:
        st["OutputSum"] = env["out"][0].copy()
    return tr
