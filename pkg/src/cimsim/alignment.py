"""Mantissa alignment: group maxima, saturating offsets, barrel shifts.

Offsets are 4-bit hardware registers, so exponent gaps clamp at 15.  All
shifts are arithmetic (sign-extending) right shifts of two's-complement
values, i.e. floor division by a power of two; bits shifted out are
truncated, never rounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .codec import PrecisionSpec
from .errors import ConfigurationError

OFFSET_BITS = 4
OFFSET_MAX = (1 << OFFSET_BITS) - 1


@dataclass(frozen=True)
class AlignmentGroup:
    """One alignment group: its exponents, their maximum, and shift offsets."""

    exponents: tuple[int, ...]
    max_exponent: int
    offsets: tuple[int, ...]


def saturating_offset(max_exp: int, exp: int) -> int:
    """Shift count from a 4-bit saturating subtractor (clamped to [0, 15])."""
    return max(0, min(max_exp - exp, OFFSET_MAX))


def build_group(exponents: Sequence[int], group_size: int) -> AlignmentGroup:
    """Compute the max exponent and per-element offsets for one group."""
    exps = tuple(int(e) for e in exponents)
    if len(exps) != group_size:
        raise ConfigurationError(
            f"group expects {group_size} exponents, got {len(exps)}")
    max_exp = max(exps)
    offsets = tuple(saturating_offset(max_exp, e) for e in exps)
    return AlignmentGroup(exps, max_exp, offsets)


def shift_align(m: int, offset: int) -> int:
    """Barrel-shift a two's-complement mantissa right by ``offset`` bits."""
    if not 0 <= offset <= OFFSET_MAX:
        raise ConfigurationError(f"offset {offset} outside 4-bit range")
    return m >> offset


def group_exponent(e_in_max: int, e_w_max: int, spec: PrecisionSpec) -> int:
    """Re-biased product-group exponent, clamped to the format's exponent range.

    The raw biased sum carries one bias too many; subtracting it here keeps
    the value inside the same unsigned register width as a plain exponent.
    """
    return max(0, min(e_in_max + e_w_max - spec.bias, spec.exp_max))


def global_align(group_sums: Sequence[int],
                 group_exps: Sequence[int]) -> tuple[list[int], int]:
    """Re-align per-group partial sums to the column's maximum exponent."""
    if len(group_sums) != len(group_exps):
        raise ConfigurationError("one exponent per partial sum required")
    column_exponent = max(group_exps)
    aligned = [s >> saturating_offset(column_exponent, e)
               for s, e in zip(group_sums, group_exps)]
    return aligned, column_exponent


def local_align_products(products: Sequence[int], product_exps: Sequence[int],
                         group_size: int) -> tuple[list[int], list[int]]:
    """Align multiplier outputs within consecutive groups of ``group_size``.

    Returns the shifted products plus one group exponent (the group max) per
    group, ready for the adder tree.
    """
    if len(products) != len(product_exps):
        raise ConfigurationError("one exponent per product required")
    if len(products) % group_size != 0:
        raise ConfigurationError(
            f"{len(products)} products do not split into groups of {group_size}")
    aligned: list[int] = []
    group_exps: list[int] = []
    for base in range(0, len(products), group_size):
        exps = product_exps[base:base + group_size]
        gmax = max(exps)
        group_exps.append(gmax)
        aligned.extend(p >> saturating_offset(gmax, e)
                       for p, e in zip(products[base:base + group_size], exps))
    return aligned, group_exps
