import math

import numpy as np
import pytest

from cimsim.codec import INT8, as_signed
from cimsim.config import CrossbarConfig
from cimsim.errors import ConfigurationError
from cimsim.faults import (ADDER_OUTPUT, GLOBAL_ALIGN_EXPONENT,
                           GLOBAL_ALIGN_OFFSET, INPUT_EXPONENT, INPUT_OFFSET,
                           MEMORY_CELL, MULTIPLIER_OUTPUT, NORMALIZED_OUTPUT,
                           WEIGHT_EXPONENT, FaultSpec, ber, flip,
                           load_campaign, sample_sites, save_campaign,
                           stage_units, stage_width, validate_fault)

BASE = CrossbarConfig.baseline()
HARD = CrossbarConfig.hardened()


def test_flip_examples():
    assert as_signed(flip(1 << 22, 25, 26), 26) == (1 << 22) - (1 << 25) == -29360128
    assert flip(0, 3, 4) == 8
    assert flip(0x3F80, 15, 16) == 0xBF80
    with pytest.raises(ConfigurationError):
        flip(0, 4, 4)


def test_flip_is_involution():
    rng = np.random.default_rng(4)
    for _ in range(300):
        width = int(rng.integers(1, 34))
        x = int(rng.integers(0, 1 << width))
        b = int(rng.integers(0, width))
        assert flip(flip(x, b, width), b, width) == x


def test_ber_values():
    assert math.isclose(ber(0.001, 26), 3.846e-5, rel_tol=5e-4)
    assert math.isclose(ber(0.01, 13), 7.69e-4, rel_tol=5e-4)
    assert ber(0.0, 26) == 0.0
    assert ber(1.0, 1) == 1.0
    with pytest.raises(ConfigurationError):
        ber(1.5, 8)


def test_stage_widths_baseline():
    assert stage_width(INPUT_OFFSET, BASE) == 4
    assert stage_width(INPUT_EXPONENT, BASE) == 8
    assert stage_width(MEMORY_CELL, BASE) == 13
    assert stage_width(MULTIPLIER_OUTPUT, BASE) == 26
    assert stage_width(ADDER_OUTPUT, BASE, 1) == 27
    assert stage_width(ADDER_OUTPUT, BASE, 7) == 33
    assert stage_width(NORMALIZED_OUTPUT, BASE) == 16
    with pytest.raises(ConfigurationError):
        stage_width(ADDER_OUTPUT, BASE, 8)
    with pytest.raises(ConfigurationError):
        stage_width(ADDER_OUTPUT, BASE)


def test_stage_units():
    assert stage_units(MULTIPLIER_OUTPUT, BASE) == 4096
    assert stage_units(INPUT_OFFSET, BASE) == 128
    assert stage_units(INPUT_EXPONENT, BASE) == 8
    assert stage_units(WEIGHT_EXPONENT, BASE) == 8 * 32
    assert stage_units(ADDER_OUTPUT, BASE, 1) == 64 * 32
    assert stage_units(ADDER_OUTPUT, BASE, 7) == 32
    assert stage_units(GLOBAL_ALIGN_OFFSET, BASE) == 8 * 32
    assert stage_units(NORMALIZED_OUTPUT, BASE) == 32
    # hardened: 16 row tiles of 8 rows, local groups of 4
    assert stage_units(ADDER_OUTPUT, HARD, 1) == 32 * 16 * 4
    assert stage_units(GLOBAL_ALIGN_EXPONENT, HARD) == 32 * 16 * 2
    assert stage_units(NORMALIZED_OUTPUT, HARD) == 32 * 16


def test_stage_validity_by_paradigm():
    with pytest.raises(ConfigurationError):
        stage_units(INPUT_OFFSET, HARD)  # post-alignment has no input offsets
    int8 = CrossbarConfig(rows=128, cols=32, precision=INT8)
    with pytest.raises(ConfigurationError):
        stage_units(NORMALIZED_OUTPUT, int8)
    with pytest.raises(ConfigurationError):
        stage_units(GLOBAL_ALIGN_OFFSET, int8)
    assert stage_units(MULTIPLIER_OUTPUT, int8) == 4096


def test_width_guard_rejects_out_of_range_bits():
    with pytest.raises(ConfigurationError):
        validate_fault(FaultSpec(INPUT_OFFSET, (0,), 4), BASE)
    with pytest.raises(ConfigurationError):
        validate_fault(FaultSpec(MULTIPLIER_OUTPUT, (0, 0), 26), BASE)
    with pytest.raises(ConfigurationError):
        validate_fault(FaultSpec(ADDER_OUTPUT, (1, 0, 0), 27), BASE)
    validate_fault(FaultSpec(ADDER_OUTPUT, (7, 0, 0), 32), BASE)
    with pytest.raises(ConfigurationError):
        validate_fault(FaultSpec(MEMORY_CELL, (128, 0), 0), BASE)


def test_sample_sites_counts_and_determinism():
    campaign = sample_sites(MULTIPLIER_OUTPUT, 0.001, BASE, seed=9, bit=25)
    assert len(campaign.specs) == 4  # 0.001 * 4096 rounds to 4 units
    assert len(set(campaign.specs)) == 4
    again = sample_sites(MULTIPLIER_OUTPUT, 0.001, BASE, seed=9, bit=25)
    assert campaign == again
    other = sample_sites(MULTIPLIER_OUTPUT, 0.001, BASE, seed=10, bit=25)
    assert other != campaign

    assert len(sample_sites(MULTIPLIER_OUTPUT, 0.0, BASE, 1, 25).specs) == 0
    assert len(sample_sites(MEMORY_CELL, 1.0, BASE, 1, 0).specs) == 4096
    # minimum of one site for any positive fraction
    assert len(sample_sites(NORMALIZED_OUTPUT, 1e-9, BASE, 1, 15).specs) == 1
    # half-up rounding: 0.005 * 4096 = 20.48 -> 20
    assert len(sample_sites(MEMORY_CELL, 0.005, BASE, 1, 12).specs) == 20


def test_campaign_file_roundtrip(tmp_path):
    campaign = sample_sites(ADDER_OUTPUT, 0.01, BASE, seed=3, bit=20, level=2)
    path = tmp_path / "campaign.txt"
    save_campaign(campaign.specs, str(path))
    loaded = load_campaign(str(path))
    assert loaded == campaign.specs
    bad = tmp_path / "bad.txt"
    bad.write_text("MultiplierOutput 1\n")
    with pytest.raises(ConfigurationError):
        load_campaign(str(bad))
