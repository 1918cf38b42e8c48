"""Exact-arithmetic references and error metrics.

``exact_dot`` evaluates the mathematical dot product of decoded words as a
rational number, with no rounding anywhere; ``exact_to_word`` rounds such a
value into a packed word by first principles.  Both are kept independent of
the pipeline code they are used to judge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .codec import NEAREST_EVEN, TRUNCATE, PrecisionSpec, word_to_float
from .errors import ConfigurationError, NonFiniteOperandError


def word_to_fraction(word: int, spec: PrecisionSpec) -> Fraction:
    """Exact rational value of a finite word (subnormals flush to zero)."""
    sign = (word >> (spec.word_bits - 1)) & 1
    exp = (word >> spec.frac_bits) & spec.exp_max
    frac = word & ((1 << spec.frac_bits) - 1)
    if exp == spec.exp_max:
        raise NonFiniteOperandError("non-finite word has no rational value")
    if exp == 0:
        return Fraction(0)
    mant = (1 << spec.frac_bits) | frac
    e = exp - spec.bias - spec.frac_bits
    value = Fraction(mant) * (Fraction(2) ** e)
    return -value if sign else value


def exact_dot(inputs: Sequence[int], weights: Sequence[int],
              spec: PrecisionSpec) -> Fraction:
    """Mathematically exact sum of products of decoded values."""
    if len(inputs) != len(weights):
        raise ConfigurationError("exact_dot needs equal-length vectors")
    total = Fraction(0)
    for a, w in zip(inputs, weights):
        total += word_to_fraction(int(a), spec) * word_to_fraction(int(w), spec)
    return total


def exact_to_word(value: Fraction, spec: PrecisionSpec,
                  rounding: str = TRUNCATE) -> int:
    """Round an exact rational into a packed word (saturate/flush like encode)."""
    wb = spec.word_bits
    fb = spec.frac_bits
    if value == 0:
        return 0
    sign = 1 if value < 0 else 0
    v = -value if value < 0 else value
    e = v.numerator.bit_length() - v.denominator.bit_length()
    if Fraction(2) ** e > v:
        e -= 1
    elif Fraction(2) ** (e + 1) <= v:
        e += 1
    scaled = (v / (Fraction(2) ** e) - 1) * (1 << fb)  # fraction field, exact
    mant = int(scaled)  # floor: truncation toward zero on the magnitude
    if rounding == NEAREST_EVEN:
        rem = scaled - mant
        if rem > Fraction(1, 2) or (rem == Fraction(1, 2) and mant & 1):
            mant += 1
            if mant == 1 << fb:
                mant = 0
                e += 1
    biased = e + spec.bias
    if biased >= spec.exp_max:
        return (sign << (wb - 1)) | (spec.exp_max << fb)
    if biased <= 0:
        return sign << (wb - 1)
    return (sign << (wb - 1)) | (biased << fb) | mant


@dataclass(frozen=True)
class ErrorReport:
    absolute_error: float
    relative_error: float
    ulp_distance: float
    sign_flipped: bool
    nonfinite_produced: bool


def _ulp_key(word: int, spec: PrecisionSpec) -> int:
    """Map a word to an integer that is monotonic in the represented value."""
    mag = word & ((1 << (spec.word_bits - 1)) - 1)
    return -mag if word >> (spec.word_bits - 1) else mag


def error_report(observed: int, reference, spec: PrecisionSpec) -> ErrorReport:
    """Compare an observed output word against an exact reference value."""
    ref = float(reference)
    if not math.isfinite(ref):
        raise ConfigurationError("reference must be finite")
    obs = word_to_float(observed, spec)
    smallest_normal = math.ldexp(1.0, 1 - spec.bias)
    if not math.isfinite(obs):
        return ErrorReport(math.inf, math.inf, math.inf,
                           sign_flipped=False, nonfinite_produced=True)
    abs_err = abs(obs - ref)
    rel_err = abs_err / max(abs(ref), smallest_normal)
    ref_word = exact_to_word(
        Fraction(reference) if not isinstance(reference, Fraction) else reference,
        spec, NEAREST_EVEN)
    ulp = abs(_ulp_key(observed, spec) - _ulp_key(ref_word, spec))
    return ErrorReport(abs_err, rel_err, float(ulp),
                       sign_flipped=obs * ref < 0, nonfinite_produced=False)
