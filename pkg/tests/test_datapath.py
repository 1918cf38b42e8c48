import numpy as np
import pytest

from cimsim import (crossbar_matvec, int8_matvec, matvec_batch, multiply,
                    normalize, program_weights, reduce_column, tiled_matvec)
from cimsim.codec import (BF16, INT8, NEAREST_EVEN, float_to_word,
                          floats_to_words, words_to_floats)
from cimsim.config import POST, CrossbarConfig
from cimsim.datapath import FaultMasks, merge_tile_words
from cimsim.errors import ConfigurationError, NonFiniteOperandError
from cimsim.faults import (ADDER_OUTPUT, INPUT_OFFSET, MEMORY_CELL,
                           MULTIPLIER_OUTPUT, NORMALIZED_OUTPUT, FaultSpec)

BASE = CrossbarConfig.baseline()
ONE = 0x3F80
TWO = 0x4000


def bf16(x):
    return float_to_word(float(x), BF16)


def column(words_or_values, rows=128, cols=32, value=True):
    """Weight matrix with the given column-0 entries, zero elsewhere."""
    mat = np.zeros((rows, cols), np.int64)
    vals = [bf16(v) if value else int(v) for v in words_or_values]
    mat[:len(vals), 0] = vals
    return mat


def test_baseline_architecture_constants():
    assert BASE.precision.padded_width == 12
    assert BASE.precision.operand_width == 13
    assert BASE.precision.product_width == 26
    assert BASE.depth == 7
    assert BASE.global_align_level == 4
    assert BASE.final_width == 33
    hard = CrossbarConfig.hardened()
    assert (hard.tile_rows, hard.tile_cols, hard.h, hard.w) == (8, 4, 16, 8)
    assert hard.depth == 3
    assert hard.global_align_level == 2
    assert hard.macs == BASE.macs == 4096


def test_config_validation():
    with pytest.raises(ConfigurationError):
        CrossbarConfig(rows=96, cols=32)
    with pytest.raises(ConfigurationError):
        CrossbarConfig(rows=128, cols=32, tile_rows=24)
    with pytest.raises(ConfigurationError):
        CrossbarConfig(rows=128, cols=32, group=3)
    with pytest.raises(ConfigurationError):
        CrossbarConfig(rows=128, cols=32, group=256)
    with pytest.raises(ConfigurationError):
        CrossbarConfig(rows=128, cols=32, rounding="up")


def test_program_weights_pre_examples():
    prog = program_weights(column([1.0] * 128), BASE)
    assert np.all(prog.cells[:, 0] == 2048)
    assert np.all(prog.group_exps[:, 0] == 127)

    prog = program_weights(column([2.0, 1.0]), BASE)
    assert prog.cells[0, 0] == 2048
    assert prog.cells[1, 0] == 1024  # shifted one bit toward the group max
    assert prog.group_exps[0, 0] == 128

    fault = FaultSpec(MEMORY_CELL, (0, 0), 12)
    prog = program_weights(column([1.0] * 16), BASE, (fault,))
    assert prog.cells[0, 0] == -2048  # 2048 XOR 4096 in 13-bit two's complement
    assert prog.cells[1, 0] == 2048


def test_program_weights_post_stores_unshifted():
    cfg = CrossbarConfig(rows=128, cols=32, alignment=POST, group=16)
    prog = program_weights(column([2.0, 1.0]), cfg)
    assert prog.cells[0, 0] == 2048
    assert prog.cells[1, 0] == 2048  # no pre-shift
    assert prog.cell_exps[0, 0] == 128
    assert prog.cell_exps[1, 0] == 127
    assert prog.group_exps is None


def test_program_rejects_bad_inputs():
    with pytest.raises(ConfigurationError):
        program_weights(np.zeros((4, 4), np.int64), BASE)
    bad = column([1.0] * 4)
    bad[0, 0] = 0x7F80  # Inf
    with pytest.raises(NonFiniteOperandError):
        program_weights(bad, BASE)


def test_multiply_examples():
    assert multiply(2048, 2048, BF16) == 1 << 22
    assert multiply(-2048, 2048, BF16) == -(1 << 22)
    assert multiply(4080, 4080, BF16) == 16646400
    with pytest.raises(ConfigurationError):
        multiply(1 << 13, 1, BF16)


def test_reduce_column_examples():
    total, _ = reduce_column([0] * 128, [127] * 8, BASE)
    assert total == 0
    products = [1 << 22] + [0] * 127
    total, col_exp = reduce_column(products, [127] * 8, BASE)
    assert total == 1 << 22 and col_exp == 127
    total, _ = reduce_column([1 << 22] * 128, [127] * 8, BASE)
    assert total == 1 << 29  # fits the 33-bit final width


def test_normalize_examples():
    assert normalize(0, 127, BASE) == 0
    assert normalize(1 << 22, 127, BASE) == ONE
    assert normalize(-(1 << 22), 127, BASE) == 0x8000 | ONE
    # overflow saturates, underflow flushes
    assert normalize(1 << 30, 250, BASE) == 0x7F80
    assert normalize(1 << 10, 5, BASE) == 0


def test_two_plus_two_exponent_bookkeeping():
    # {1.0, 1.0} . {1.0, 1.0} must come out as exactly +2.0
    inputs = np.zeros(128, np.int64)
    inputs[0] = inputs[1] = ONE
    prog = program_weights(column([1.0, 1.0]), BASE)
    out, _ = crossbar_matvec(inputs, prog)
    assert out[0] == TWO
    # independently: the exact dot is 2.0 and its truncation is 0x4000
    from cimsim.oracle import exact_dot, exact_to_word
    exact = exact_dot(inputs, column([1.0, 1.0])[:, 0], BF16)
    assert float(exact) == 2.0
    assert exact_to_word(exact, BF16) == TWO


def test_matvec_identity_and_zeros():
    rng = np.random.default_rng(7)
    # one-hot input selects one weight; exact when its group shares exponents
    weights = np.tile(floats_to_words(
        rng.uniform(1.0, 2.0, (1, 32)), BF16, NEAREST_EVEN), (128, 1))
    prog = program_weights(weights, BASE)
    x = np.zeros(128, np.int64)
    x[3] = ONE
    out, _ = crossbar_matvec(x, prog)
    assert np.array_equal(out, weights[3])

    out, _ = crossbar_matvec(np.zeros(128, np.int64), prog)
    assert np.all(out == 0)


def test_matvec_rejects_nonfinite_and_bad_shapes():
    prog = program_weights(column([1.0]), BASE)
    bad = np.zeros(128, np.int64)
    bad[0] = 0x7FC0
    with pytest.raises(NonFiniteOperandError):
        crossbar_matvec(bad, prog)
    with pytest.raises(ConfigurationError):
        crossbar_matvec(np.zeros(64, np.int64), prog)


def test_trivial_tiling_is_monolithic():
    rng = np.random.default_rng(8)
    weights = floats_to_words(rng.normal(0, 1, (128, 32)), BF16, NEAREST_EVEN)
    inputs = floats_to_words(rng.normal(0, 1, 128), BF16, NEAREST_EVEN)
    mono = tiled_matvec(inputs, weights, BASE)
    trivial = tiled_matvec(inputs, weights,
                           CrossbarConfig(rows=128, cols=32, tile_rows=128,
                                          tile_cols=32, group=16))
    assert np.array_equal(mono, trivial)
    zeros = tiled_matvec(inputs, np.zeros((128, 32), np.int64),
                         CrossbarConfig.hardened())
    assert np.all(zeros == 0)


def test_tiled_vs_monolithic_error_envelope():
    rng = np.random.default_rng(9)
    weights = floats_to_words(rng.normal(0, 1, (128, 32)), BF16, NEAREST_EVEN)
    inputs = floats_to_words(rng.normal(0, 1, (32, 128)), BF16, NEAREST_EVEN)
    exact = words_to_floats(inputs, BF16) @ words_to_floats(weights, BF16)
    scale = np.abs(exact).mean()
    for cfg in (BASE, CrossbarConfig.hardened()):
        got = words_to_floats(tiled_matvec(inputs, weights, cfg), BF16)
        rel = np.abs(got - exact) / np.maximum(np.abs(exact), scale)
        assert np.median(rel) < 0.01
        assert rel.max() < 0.1


def test_int8_examples():
    cfg = CrossbarConfig(rows=128, cols=32, precision=INT8)
    assert cfg.final_width == 23  # 16-bit products + 7 tree levels
    assert cfg.global_align_level == 0
    weights = np.zeros((128, 32), np.int64)
    weights[:, 0] = np.arange(128) - 64
    x = np.zeros(128, np.int64)
    x[10] = 1
    out = int8_matvec(x, weights, cfg)
    assert out[0] == weights[10, 0]

    ones = int8_matvec(np.ones(128, np.int64),
                       np.ones((128, 32), np.int64), cfg)
    assert np.all(ones == 128)

    w = np.zeros((128, 32), np.int64)
    w[0, 0] = 1
    faulted = int8_matvec(np.eye(1, 128, 0, dtype=np.int64)[0], w, cfg,
                          (FaultSpec(MULTIPLIER_OUTPUT, (0, 0), 15),))
    assert faulted[0] == 1 - (1 << 15) == -32767

    with pytest.raises(ConfigurationError):
        int8_matvec(x, weights, BASE)
    with pytest.raises(ConfigurationError):
        int8_matvec(x * 0 + 200, weights, cfg)


def test_multiplier_fault_in_trace():
    # a bit-25 flip on a product of 2^22 reads back as 2^22 - 2^25
    inputs = np.zeros(128, np.int64)
    inputs[0] = ONE
    prog = program_weights(column([1.0]), BASE)
    fault = FaultSpec(MULTIPLIER_OUTPUT, (0, 0), 25)
    _, trace = crossbar_matvec(inputs, prog, (fault,), trace=True)
    assert trace.stages["MultiplierOutput"][0, 0] == (1 << 22) - (1 << 25)


def test_adder_fault_applies_at_level_width():
    inputs = np.zeros(128, np.int64)
    prog = program_weights(column([]), BASE)
    fault = FaultSpec(ADDER_OUTPUT, (3, 0, 0), 28)
    _, trace = crossbar_matvec(inputs, prog, (fault,), trace=True)
    # flipping bit 28 of a zero 29-bit word gives its most negative value
    assert trace.adder_levels[2][0, 0] == -(1 << 28)
    with pytest.raises(ConfigurationError):
        FaultMasks((FaultSpec(ADDER_OUTPUT, (3, 0, 0), 29),), BASE)


def test_fault_locality():
    rng = np.random.default_rng(10)
    weights = floats_to_words(rng.normal(0, 1, (128, 32)), BF16, NEAREST_EVEN)
    inputs = floats_to_words(rng.normal(0, 1, (8, 128)), BF16, NEAREST_EVEN)
    prog = program_weights(weights, BASE)
    clean = matvec_batch(inputs, prog)
    col = 11
    for fault in (FaultSpec(MEMORY_CELL, (5, col), 12),
                  FaultSpec(MULTIPLIER_OUTPUT, (3, col), 25),
                  FaultSpec(ADDER_OUTPUT, (2, col, 1), 27),
                  FaultSpec(NORMALIZED_OUTPUT, (col, 0), 14)):
        got = matvec_batch(inputs, program_weights(weights, BASE, (fault,)),
                           (fault,))
        others = np.delete(np.arange(32), col)
        assert np.array_equal(got[:, others], clean[:, others])
        assert not np.array_equal(got[:, col], clean[:, col])
    # input-side faults may touch every column
    fault = FaultSpec(INPUT_OFFSET, (4,), 3)
    got = matvec_batch(inputs, prog, (fault,))
    assert not np.array_equal(got, clean)


def test_fault_persistence_every_invocation():
    rng = np.random.default_rng(11)
    weights = floats_to_words(rng.uniform(0.5, 2.0, (128, 32)), BF16,
                              NEAREST_EVEN)
    prog = program_weights(weights, BASE)
    fault = FaultSpec(MULTIPLIER_OUTPUT, (7, 3), 25)
    corrupted = 0
    for _ in range(20):
        x = floats_to_words(rng.uniform(0.5, 2.0, 128), BF16, NEAREST_EVEN)
        _, t_clean = crossbar_matvec(x, prog, trace=True)
        _, t_fault = crossbar_matvec(x, prog, (fault,), trace=True)
        diff = t_clean.stages["MultiplierOutput"] != t_fault.stages["MultiplierOutput"]
        assert diff[7, 3]
        assert diff.sum() == 1
        corrupted += 1
    assert corrupted == 20


def test_post_alignment_masks_memory_faults_by_gap():
    """The same cell fault perturbs the final sum 2^k less under post-alignment."""
    for k in (1, 3, 5, 7):
        pre = CrossbarConfig(rows=4, cols=1, alignment="pre", group=4)
        post = CrossbarConfig(rows=4, cols=1, alignment=POST, group=4)
        weights = np.array([[bf16(1.0)], [bf16(2.0 ** -k)],
                            [bf16(1.0)], [bf16(1.0)]], np.int64)
        inputs = np.array([ONE, ONE, ONE, ONE], np.int64)
        fault = (FaultSpec(MEMORY_CELL, (1, 0), 12),)
        deltas = {}
        for label, cfg in (("pre", pre), ("post", post)):
            _, clean = crossbar_matvec(inputs, program_weights(weights, cfg),
                                       trace=True)
            _, bad = crossbar_matvec(inputs,
                                     program_weights(weights, cfg, fault),
                                     fault, trace=True)
            deltas[label] = int(bad.stages["FinalSum"][0, 0]
                                - clean.stages["FinalSum"][0, 0])
        assert deltas["pre"] == deltas["post"] * (1 << k)


def test_trace_dump_format():
    inputs = np.zeros(128, np.int64)
    inputs[0] = ONE
    prog = program_weights(column([1.0]), BASE)
    out, trace = crossbar_matvec(inputs, prog, trace=True)
    assert trace.stages["OutputWord"][0] == out[0]
    # identical inputs give a bit-identical trace
    out2, trace2 = crossbar_matvec(inputs, prog, trace=True)
    assert np.array_equal(out, out2)
    assert trace.dump_text() == trace2.dump_text()
    lines = list(trace.dump())
    assert any(line.startswith("MultiplierOutput 0,0 26 0x400000")
               for line in lines)
    for line in lines:
        stage, coords, width, value = line.split()
        assert int(value, 16) < (1 << int(width))
    # level-1 words are product_width+1 bits; the final level is 33 bits wide
    assert any(line.startswith("AdderOutput 1,") and " 27 " in line
               for line in lines)
    assert any(line.startswith("AdderOutput 7,") and " 33 " in line
               for line in lines)


def test_merge_tile_words_fixed_order():
    spec = BF16
    words = np.array([[[ONE], [TWO], [bf16(4.0)], [bf16(-8.0)]]], np.int64)
    merged = merge_tile_words(words, spec, "truncate")
    assert merged[0, 0] == bf16(-1.0)
    single = merge_tile_words(words[:, :1, :], spec, "truncate")
    assert single[0, 0] == ONE
