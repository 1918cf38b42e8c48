import numpy as np
import pytest

from cimsim.alignment import (AlignmentGroup, build_group, global_align,
                              group_exponent, local_align_products,
                              saturating_offset, shift_align)
from cimsim.codec import BF16, FP8_E4M3
from cimsim.errors import ConfigurationError


def test_build_group_examples():
    exps = [130, 127, 125] + [125] * 13
    group = build_group(exps, 16)
    assert group.max_exponent == 130
    assert group.offsets[:3] == (0, 3, 5)
    assert set(group.offsets[3:]) == {5}

    flat = build_group([127] * 16, 16)
    assert flat.offsets == (0,) * 16

    saturated = build_group([140, 120] + [120] * 14, 16)
    assert saturated.offsets[1] == 15

    with pytest.raises(ConfigurationError):
        build_group([127, 127], 4)


def test_offsets_saturate_and_argmax_zero():
    rng = np.random.default_rng(1)
    for _ in range(200):
        exps = rng.integers(0, 255, 8).tolist()
        group = build_group(exps, 8)
        assert max(group.offsets) <= 15
        assert group.offsets[exps.index(max(exps))] == 0
        assert min(group.offsets) >= 0


def test_shift_align_examples():
    assert shift_align(-2048, 3) == -256
    assert shift_align(2048, 15) == 0
    assert shift_align(-1, 5) == -1  # arithmetic-shift floor semantics
    with pytest.raises(ConfigurationError):
        shift_align(1, 16)


def test_shift_align_is_floor_division():
    rng = np.random.default_rng(2)
    values = rng.integers(-(1 << 12), 1 << 12, 500)
    shifts = rng.integers(0, 16, 500)
    for m, k in zip(values, shifts):
        assert shift_align(int(m), int(k)) == int(m) // (1 << int(k))


def test_shift_commutes_with_sign_on_multiples():
    for k in range(0, 16):
        m = 3 << k if k < 10 else 1 << k
        assert shift_align(-m, k) == -shift_align(m, k)


def test_group_exponent_rebias_and_clamp():
    assert group_exponent(127, 127, BF16) == 127
    assert group_exponent(255, 255, BF16) == 255  # clamped high
    assert group_exponent(0, 0, BF16) == 0        # clamped low
    assert group_exponent(7, 7, FP8_E4M3) == 7
    assert group_exponent(15, 15, FP8_E4M3) == 15


def test_global_align_examples():
    sums, col = global_align([100, -200, 300], [120, 120, 120])
    assert (sums, col) == ([100, -200, 300], 120)

    s = 12345
    aligned, col = global_align([s, 8 * s], [130, 127])
    assert col == 130
    assert aligned == [s, s]

    aligned, _ = global_align([1 << 20, 1 << 20], [140, 120])
    assert aligned[1] == 1 << 5  # gap 20 saturates at a 15-bit shift


def test_local_align_products():
    aligned, exps = local_align_products([100, 200, 300, 400] * 2,
                                         [130] * 8, 4)
    assert aligned == [100, 200, 300, 400] * 2
    assert exps == [130, 130]

    aligned, exps = local_align_products([1 << 10, 1 << 10], [129, 126], 2)
    assert aligned == [1 << 10, 1 << 7]
    assert exps == [129]

    aligned, _ = local_align_products([1 << 20, 1 << 20], [140, 123], 2)
    assert aligned[1] == 1 << 5  # gap 17 saturates at 15


def test_no_shift_exactness():
    rng = np.random.default_rng(3)
    values = rng.integers(-(1 << 24), 1 << 24, 64).tolist()
    aligned, exps = local_align_products(values, [200] * 64, 4)
    assert aligned == values
    assert exps == [200] * 16


def test_alignment_group_is_value_type():
    g = AlignmentGroup((1, 2), 2, (1, 0))
    assert g == AlignmentGroup((1, 2), 2, (1, 0))
    assert saturating_offset(5, 9) == 0  # never negative
