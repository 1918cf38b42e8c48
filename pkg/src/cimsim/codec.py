"""Bit-level codecs for the number formats carried by the crossbar.

Everything downstream of decode works on plain integers (Python ints or
int64 arrays): packed words are split into (sign, exponent, fraction)
fields, fractions are expanded to the padded fixed-point mantissa the
multipliers consume, and normalized results are packed back into words.

Conventions baked in here and relied on everywhere else:

* subnormal inputs flush to zero when converted for compute;
* Inf/NaN operands are rejected at ingestion (the integer pipeline has no
  representation for them);
* packing saturates overflow to +/-Inf and flushes underflow to a signed
  zero, so faulty runs surface non-finite outputs instead of trapping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, NonFiniteOperandError

# Rounding modes for fraction extraction / re-encoding.
TRUNCATE = "truncate"
NEAREST_EVEN = "nearest_even"
ROUNDINGS = (TRUNCATE, NEAREST_EVEN)

# Number classes.
NORMAL = "normal"
ZERO = "zero"
SUBNORMAL = "subnormal"
INF = "inf"
NAN = "nan"


@dataclass(frozen=True)
class PrecisionSpec:
    """Widths of one supported operand format.

    ``padded_width`` is the unsigned mantissa after the implicit leading 1
    is prepended and the low padding zeros appended; ``operand_width`` adds
    the two's-complement sign bit; products of two operands always fit in
    ``product_width = 2 * operand_width`` bits.
    """

    name: str
    exp_bits: int
    frac_bits: int
    bias: int
    padded_width: int
    operand_width: int
    product_width: int

    def __post_init__(self) -> None:
        if self.product_width != 2 * self.operand_width:
            raise ConfigurationError(
                f"{self.name}: product width must be twice the operand width"
            )
        if self.is_float and self.operand_width != self.padded_width + 1:
            raise ConfigurationError(
                f"{self.name}: operand width must be padded width + sign bit"
            )

    @property
    def is_float(self) -> bool:
        return self.exp_bits > 0

    @property
    def word_bits(self) -> int:
        return 1 + self.exp_bits + self.frac_bits

    @property
    def exp_max(self) -> int:
        return (1 << self.exp_bits) - 1

    @property
    def frac_mask(self) -> int:
        return (1 << self.frac_bits) - 1


BF16 = PrecisionSpec("BF16", exp_bits=8, frac_bits=7, bias=127,
                     padded_width=12, operand_width=13, product_width=26)
FP8_E4M3 = PrecisionSpec("FP8_E4M3", exp_bits=4, frac_bits=3, bias=7,
                         padded_width=8, operand_width=9, product_width=18)
# Plain signed bytes: no exponent machinery, no alignment or normalization.
INT8 = PrecisionSpec("INT8", exp_bits=0, frac_bits=0, bias=0,
                     padded_width=0, operand_width=8, product_width=16)

PRECISIONS = {spec.name: spec for spec in (BF16, FP8_E4M3, INT8)}


class FPComponents(NamedTuple):
    sign: int
    exponent: int  # biased
    fraction: int
    klass: str


def as_signed(pattern: int, width: int) -> int:
    """Reinterpret the low ``width`` bits of ``pattern`` as two's complement."""
    pattern &= (1 << width) - 1
    if pattern >= 1 << (width - 1):
        pattern -= 1 << width
    return pattern


def as_unsigned(value: int, width: int) -> int:
    """The ``width``-bit two's-complement pattern of ``value``."""
    return value & ((1 << width) - 1)


def decode(word: int, spec: PrecisionSpec) -> FPComponents:
    """Split a packed word into fields and classify it.

    Total over all bit patterns; subnormals are classified here and flushed
    later by :func:`padded_mantissa`.
    """
    if not spec.is_float:
        raise ConfigurationError("decode requires a floating-point format")
    if not 0 <= word < (1 << spec.word_bits):
        raise ConfigurationError(
            f"word 0x{word:x} does not fit in {spec.word_bits} bits")
    sign = (word >> (spec.word_bits - 1)) & 1
    exponent = (word >> spec.frac_bits) & spec.exp_max
    fraction = word & spec.frac_mask
    if exponent == spec.exp_max:
        klass = INF if fraction == 0 else NAN
    elif exponent == 0:
        klass = ZERO if fraction == 0 else SUBNORMAL
    else:
        klass = NORMAL
    return FPComponents(sign, exponent, fraction, klass)


def padded_mantissa(c: FPComponents, spec: PrecisionSpec) -> int:
    """Unsigned fixed-point mantissa entering the crossbar.

    Normal numbers become ``1.fraction`` shifted into ``padded_width`` bits;
    zeros and subnormals flush to 0.
    """
    if c.klass in (INF, NAN):
        raise NonFiniteOperandError("non-finite operand cannot enter the crossbar")
    if c.klass in (ZERO, SUBNORMAL):
        return 0
    mant = (1 << spec.frac_bits) | c.fraction
    return mant << (spec.padded_width - spec.frac_bits - 1)


def to_signed(mag: int, sign: int, spec: PrecisionSpec) -> int:
    """Apply the sign bit, yielding an ``operand_width``-bit two's-complement value."""
    if mag >= 1 << spec.padded_width:
        raise ConfigurationError(
            f"magnitude {mag} exceeds {spec.padded_width} bits")
    return -mag if sign else mag


def encode(sign: int, unbiased_exp: int, frac: int, spec: PrecisionSpec) -> int:
    """Pack fields into a word, saturating overflow and flushing underflow."""
    if not 0 <= frac <= spec.frac_mask:
        raise ConfigurationError(f"fraction {frac} exceeds {spec.frac_bits} bits")
    biased = unbiased_exp + spec.bias
    if biased >= spec.exp_max:
        return (sign << (spec.word_bits - 1)) | (spec.exp_max << spec.frac_bits)
    if biased <= 0:
        return sign << (spec.word_bits - 1)
    return (sign << (spec.word_bits - 1)) | (biased << spec.frac_bits) | frac


def word_to_float(word: int, spec: PrecisionSpec) -> float:
    """Real value of a word (float64 is exact for BF16/FP8 normals).

    Subnormal patterns read as 0.0, matching the flush-to-zero convention.
    """
    c = decode(word, spec)
    if c.klass == NAN:
        return float("nan")
    if c.klass == INF:
        return float("-inf") if c.sign else float("inf")
    if c.klass in (ZERO, SUBNORMAL):
        return -0.0 if c.sign else 0.0
    mant = (1 << spec.frac_bits) | c.fraction
    value = float(np.ldexp(mant, c.exponent - spec.bias - spec.frac_bits))
    return -value if c.sign else value


def float_to_word(x: float, spec: PrecisionSpec, rounding: str = NEAREST_EVEN) -> int:
    """Quantize a float64 to the nearest (or truncated) representable word."""
    return int(floats_to_words(np.array([x]), spec, rounding)[0])


# ---------------------------------------------------------------------------
# Vectorized variants used by the datapath and the inference harness.
# ---------------------------------------------------------------------------

def decode_fields(words: np.ndarray, spec: PrecisionSpec):
    """Bit-slice an int array of words into (sign, exponent, fraction) int64."""
    w = np.asarray(words, dtype=np.int64)
    sign = (w >> (spec.word_bits - 1)) & 1
    exp = (w >> spec.frac_bits) & spec.exp_max
    frac = w & spec.frac_mask
    return sign, exp, frac


def check_finite_words(words: np.ndarray, spec: PrecisionSpec, what: str) -> None:
    _, exp, _ = decode_fields(words, spec)
    if np.any(exp == spec.exp_max):
        raise NonFiniteOperandError(f"non-finite {what} word rejected at ingestion")


def padded_from_fields(exp: np.ndarray, frac: np.ndarray, spec: PrecisionSpec) -> np.ndarray:
    """Vectorized :func:`padded_mantissa`; exponent 0 (zero/subnormal) flushes."""
    mant = ((1 << spec.frac_bits) | frac) << (spec.padded_width - spec.frac_bits - 1)
    return np.where(exp == 0, 0, mant)


def words_to_floats(words: np.ndarray, spec: PrecisionSpec) -> np.ndarray:
    """Vectorized value decode; Inf/NaN patterns map to inf/nan floats."""
    sign, exp, frac = decode_fields(words, spec)
    mant = ((1 << spec.frac_bits) | frac).astype(np.float64)
    value = np.ldexp(mant, exp - spec.bias - spec.frac_bits)
    value = np.where(exp == 0, 0.0, value)  # flush subnormal patterns
    value = np.where(sign == 1, -value, value)
    special = exp == spec.exp_max
    if np.any(special):
        inf = np.where(sign == 1, -np.inf, np.inf)
        value = np.where(special & (frac == 0), inf, value)
        value = np.where(special & (frac != 0), np.nan, value)
    return value


def floats_to_words(x: np.ndarray, spec: PrecisionSpec,
                    rounding: str = NEAREST_EVEN) -> np.ndarray:
    """Vectorized float64 -> word encode with saturation and underflow flush.

    The mantissa is rounded per ``rounding`` (ties-to-even or toward zero);
    NaN packs to the canonical quiet-NaN pattern.
    """
    if rounding not in ROUNDINGS:
        raise ConfigurationError(f"unknown rounding mode {rounding!r}")
    x = np.asarray(x, dtype=np.float64)
    sign = np.signbit(x).astype(np.int64)
    sign_word = sign << (spec.word_bits - 1)
    finite = np.isfinite(x)
    m, e = np.frexp(np.where(finite, np.abs(x), 1.0))
    scaled = np.ldexp(m, spec.frac_bits + 1)  # in [2^fb, 2^(fb+1)) for finite x != 0
    low = np.floor(scaled)
    mant = low.astype(np.int64, copy=False)
    if rounding == NEAREST_EVEN:
        rem = scaled - low
        up = (rem > 0.5) | ((rem == 0.5) & ((mant & 1) == 1))
        mant = mant + up
    carry = mant == (1 << (spec.frac_bits + 1))
    mant = np.where(carry, mant >> 1, mant)
    biased = e + carry - 1 + spec.bias
    word = sign_word | (biased << spec.frac_bits) | (mant & spec.frac_mask)
    inf_word = sign_word | (spec.exp_max << spec.frac_bits)
    word = np.where(biased >= spec.exp_max, inf_word, word)
    word = np.where(biased <= 0, sign_word, word)
    word = np.where(x == 0.0, sign_word, word)
    word = np.where(np.isinf(x), inf_word, word)
    nan_word = (spec.exp_max << spec.frac_bits) | (1 << (spec.frac_bits - 1))
    word = np.where(np.isnan(x), nan_word, word)
    return word.astype(np.int64)
