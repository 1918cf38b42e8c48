"""Acceptance criteria, one test per criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -s`` to stream the verdicts.
The full-size randomized campaigns make this module take a few minutes.
"""

import math

import numpy as np
import pytest

from cimsim import crossbar_matvec, program_weights, tiled_matvec
from cimsim.cli import main
from cimsim.codec import (BF16, INT8, NEAREST_EVEN, TRUNCATE, float_to_word,
                          floats_to_words)
from cimsim.config import POST, PRE, CrossbarConfig, named_design
from cimsim.experiments import CSV_COLUMNS
from cimsim.faults import (ADDER_OUTPUT, MEMORY_CELL, MULTIPLIER_OUTPUT,
                           FaultSpec, ber, sample_sites)
from cimsim.harness import CrossbarExecutor, Dense, evaluate
from cimsim.oracle import exact_dot, exact_to_word

from difftools import CASE_GRID, run_grid

ONE = 0x3F80


def _verdict(number, name, ok):
    print(f"ACCEPTANCE {number:02d} {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {number} ({name}) failed"


def test_criterion_01_architecture_constants():
    cfg = CrossbarConfig.baseline()
    ok = (cfg.precision.padded_width == 12
          and cfg.precision.operand_width == 13
          and cfg.precision.product_width == 26
          and cfg.depth == 7
          and cfg.global_align_level == 4
          and cfg.final_width == 33)
    _verdict(1, "architecture-constants", ok)


def test_criterion_02_ber_arithmetic():
    ok = (math.isclose(ber(0.001, 26), 3.846e-5, rel_tol=5e-4)
          and math.isclose(ber(0.01, 13), 7.69e-4, rel_tol=5e-4)
          and ber(0.001, 26) == 0.001 / 26
          and ber(0.01, 13) == 0.01 / 13)
    _verdict(2, "ber-arithmetic", ok)


def test_criterion_03_differential_oracle():
    total = run_grid(cases_per_combo=10_000, seed=2024)
    ok = total == 10_000 * len(CASE_GRID)
    print(f"  {total} randomized cases, zero mismatches")
    _verdict(3, "differential-oracle", ok)


def test_criterion_04_exactness_gate():
    rng = np.random.default_rng(404)
    checked = 0
    for _ in range(10_000):
        rows = int(rng.choice([4, 8, 16]))
        group = int(rng.choice([g for g in (2, 4, 8) if g <= rows]))
        cfg = CrossbarConfig(rows=rows, cols=1, alignment=PRE, group=group,
                             rounding=TRUNCATE)
        e_in = int(rng.integers(64, 159))
        e_w = int(rng.integers(64, 159))
        def make(exp, n):
            sign = rng.integers(0, 2, n)
            frac = rng.integers(0, 128, n)
            w = (sign << 15) | (exp << 7) | frac
            w[rng.random(n) < 0.1] = 0  # zeros keep every group shift-free
            return w.astype(np.int64)
        inputs = make(e_in, rows)
        weights = make(e_w, rows).reshape(rows, 1)
        out = tiled_matvec(inputs, weights, cfg)
        want = exact_to_word(exact_dot(inputs, weights[:, 0], BF16),
                             BF16, TRUNCATE)
        assert int(out[0]) == want, (inputs, weights[:, 0])
        checked += 1
    print(f"  {checked} alignment-free cases bit-exact vs the rational dot")
    _verdict(4, "exactness-gate", checked == 10_000)


def test_criterion_05_fault_magnitude_law():
    # single bit-25 flip on a 2^22 product reads back exactly 2^22 - 2^25
    cfg = CrossbarConfig.baseline()
    inputs = np.zeros(128, np.int64)
    inputs[0] = ONE
    weights = np.zeros((128, 32), np.int64)
    weights[0, 0] = ONE
    fault = (FaultSpec(MULTIPLIER_OUTPUT, (0, 0), 25),)
    prog = program_weights(weights, cfg, fault)
    _, trace = crossbar_matvec(inputs, prog, fault, trace=True)
    ok = int(trace.stages["MultiplierOutput"][0, 0]) == (1 << 22) - (1 << 25)

    # post-alignment masks the same memory-cell fault by exactly 2^k
    for k in (2, 3, 5):
        weights = np.array([[float_to_word(1.0, BF16)],
                            [float_to_word(2.0 ** -k, BF16)],
                            [float_to_word(1.0, BF16)],
                            [float_to_word(1.0, BF16)]], np.int64)
        vec = np.array([ONE] * 4, np.int64)
        cell_fault = (FaultSpec(MEMORY_CELL, (1, 0), 12),)
        deltas = {}
        for paradigm in (PRE, POST):
            pcfg = CrossbarConfig(rows=4, cols=1, alignment=paradigm, group=4)
            _, clean = crossbar_matvec(vec, program_weights(weights, pcfg),
                                       trace=True)
            _, bad = crossbar_matvec(vec, program_weights(weights, pcfg,
                                                          cell_fault),
                                     cell_fault, trace=True)
            deltas[paradigm] = int(bad.stages["FinalSum"][0, 0]
                                   - clean.stages["FinalSum"][0, 0])
        ok = ok and deltas[PRE] == deltas[POST] * (1 << k)
    _verdict(5, "fault-magnitude-law", ok)


def test_criterion_06_memory_msb_faults_pre_vs_post(demo_model, demo_test_set):
    inputs, labels = demo_test_set
    drops = {}
    for name in ("baseline", "post_mono"):
        cfg = named_design(name)
        base = evaluate(demo_model, inputs, labels, cfg, ()).accuracy
        accs = []
        for seed in (1, 2, 3, 4, 5):
            campaign = sample_sites(MEMORY_CELL, 0.005, cfg, seed, bit=12)
            accs.append(evaluate(demo_model, inputs, labels, cfg,
                                 campaign.specs).accuracy)
        drops[name] = base - float(np.mean(accs))
    print(f"  pre-alignment drop {drops['baseline']:.4f}, "
          f"post-alignment drop {drops['post_mono']:.4f}")
    _verdict(6, "memory-msb-pre-vs-post",
             drops["baseline"] >= 0.10 and abs(drops["post_mono"]) <= 0.01)


def test_criterion_07_adder_fault_design_ordering(demo_model, demo_test_set):
    inputs, labels = demo_test_set
    drops = {}
    for name in ("baseline", "tiled_flat", "hardened"):
        cfg = named_design(name)
        base = evaluate(demo_model, inputs, labels, cfg, ()).accuracy
        accs = []
        for seed in (1, 2, 3, 4, 5):
            campaign = sample_sites(ADDER_OUTPUT, 1e-9, cfg, seed, bit=25,
                                    level=1)
            assert len(campaign.specs) == 1
            accs.append(evaluate(demo_model, inputs, labels, cfg,
                                 campaign.specs).accuracy)
        drops[name] = base - float(np.mean(accs))
    ratio = (drops["baseline"] / drops["hardened"]
             if drops["hardened"] > 0 else float("inf"))
    print(f"  drops: baseline {drops['baseline']:.4f} > tiled_flat "
          f"{drops['tiled_flat']:.4f} > hardened {drops['hardened']:.4f}; "
          f"desk-scale analogue of the full-scale 49x ratio: {ratio:.1f}x "
          f"(reported, not asserted)")
    _verdict(7, "adder-fault-design-ordering",
             drops["hardened"] < drops["tiled_flat"] < drops["baseline"])


def test_criterion_08_adder_msb_drift_across_levels():
    # positive operands keep low-level subtree sums sign-coherent, so the
    # injected deltas accumulate across the 8 row blocks of a wide dot
    cfg = CrossbarConfig.baseline()
    rng = np.random.default_rng(5)
    layer = Dense(floats_to_words(np.abs(rng.normal(0, 1, (32, 1024))),
                                  BF16, NEAREST_EVEN),
                  floats_to_words(np.zeros(32), BF16, NEAREST_EVEN))
    x = floats_to_words(np.abs(rng.normal(0, 1, (192, 1024))), BF16,
                        NEAREST_EVEN)
    clean = CrossbarExecutor(cfg).dense(0, layer, x)
    floor = np.abs(clean).mean()
    errs = []
    for level in range(1, 8):
        vals = []
        for seed in (1, 2, 3, 4):
            campaign = sample_sites(ADDER_OUTPUT, 1e-9, cfg, seed, bit=25,
                                    level=level)
            got = CrossbarExecutor(cfg, campaign.specs).dense(0, layer, x)
            rel = np.abs(got - clean) / np.maximum(np.abs(clean), floor)
            vals.append(rel.mean())
        errs.append(float(np.mean(vals)))
    print("  mean relative error by level: "
          + " ".join(f"L{i+1}={e:.5f}" for i, e in enumerate(errs)))
    _verdict(8, "adder-msb-drift", errs[3] < errs[0] and errs[4] > errs[3])


def test_criterion_09_int8_fragility(demo_model, demo_test_set):
    inputs, labels = demo_test_set
    fractions = (0.001, 0.0025, 0.005, 0.01, 0.025, 0.05)
    collapse = {}
    for label, cfg, bit in (
            ("BF16", named_design("baseline"), 20),       # MSB-5 of 26 bits
            ("INT8", CrossbarConfig(rows=128, cols=32, precision=INT8), 10)):
        # collapse: mean accuracy at or below 20% (chance is 10%)
        collapse[label] = float("inf")
        for fraction in fractions:
            accs = [evaluate(demo_model, inputs, labels, cfg,
                             sample_sites(MULTIPLIER_OUTPUT, fraction, cfg,
                                          seed, bit=bit).specs).accuracy
                    for seed in (1, 2, 3, 4, 5)]
            if float(np.mean(accs)) <= 0.20:
                collapse[label] = ber(fraction, cfg.precision.product_width)
                break
    print(f"  collapse BER: INT8 {collapse['INT8']:.3e}, "
          f"BF16 {collapse['BF16']:.3e}")
    _verdict(9, "int8-fragility", collapse["INT8"] < collapse["BF16"])


def test_criterion_10_determinism(tmp_path, demo_assets):
    outputs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.csv"
        cfg = tmp_path / f"{tag}.cfg"
        cfg.write_text(
            "design = hardened\n"
            f"model = {demo_assets['model']}\n"
            f"dataset = {demo_assets['test']}\n"
            "stages = MultiplierOutput, MemoryCell\n"
            "bits = 12\n"
            "fractions = 0, 0.005\n"
            "seeds = 1, 2\n"
            "samples = 128\n"
            f"out = {out}\n")
        assert main(["run", "--config", str(cfg), "--fresh"]) == 0
        idx = CSV_COLUMNS.index("wall_time_s")
        outputs.append([",".join(line.split(",")[:idx])
                        for line in out.read_text().splitlines()])
    _verdict(10, "determinism", outputs[0] == outputs[1])
