"""Persistent single-bit-flip faults: stages, sites, sampling, BER accounting.

A fault lives in one hardware unit and XORs one bit of that unit's output
pattern on every invocation for the lifetime of an experiment.  Weight-side
units run once per programming; everything else runs once per matvec.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .alignment import OFFSET_BITS
from .config import NO_ALIGNMENT, PRE, CrossbarConfig
from .errors import ConfigurationError

INPUT_OFFSET = "InputOffset"
INPUT_EXPONENT = "InputExponent"
WEIGHT_OFFSET = "WeightOffset"
WEIGHT_EXPONENT = "WeightExponent"
MEMORY_CELL = "MemoryCell"
MULTIPLIER_OUTPUT = "MultiplierOutput"
ADDER_OUTPUT = "AdderOutput"
GLOBAL_ALIGN_OFFSET = "GlobalAlignOffset"
GLOBAL_ALIGN_EXPONENT = "GlobalAlignExponent"
NORMALIZED_OUTPUT = "NormalizedOutput"

STAGES = (
    INPUT_OFFSET, INPUT_EXPONENT, WEIGHT_OFFSET, WEIGHT_EXPONENT,
    MEMORY_CELL, MULTIPLIER_OUTPUT, ADDER_OUTPUT,
    GLOBAL_ALIGN_OFFSET, GLOBAL_ALIGN_EXPONENT, NORMALIZED_OUTPUT,
)

# Stages that only exist when the pre-alignment front end is present.
_PRE_ONLY = (INPUT_OFFSET, INPUT_EXPONENT, WEIGHT_OFFSET, WEIGHT_EXPONENT)
# Stages that exist on the integer (INT8) datapath.
_INT_STAGES = (MEMORY_CELL, MULTIPLIER_OUTPUT, ADDER_OUTPUT)


@dataclass(frozen=True, order=True)
class FaultSpec:
    """One persistent bit flip: stage, unit coordinates, bit index.

    Coordinates by stage (all zero-based):

    ==================== =============================================
    InputOffset          (row,)
    InputExponent        (group,)            group = row // group_size
    WeightOffset         (row, col)
    WeightExponent       (group, col)
    MemoryCell           (row, col)
    MultiplierOutput     (row, col)
    AdderOutput          (level, col, idx)   idx counts adders at that
                                             level across row tiles
    GlobalAlignOffset    (col, grp)          grp across row tiles
    GlobalAlignExponent  (col, grp)
    NormalizedOutput     (col, row_tile)
    ==================== =============================================
    """

    stage: str
    coords: tuple[int, ...]
    bit: int


def flip(x: int, bit: int, width: int) -> int:
    """XOR one bit of a ``width``-bit word; the caller reinterprets the pattern."""
    if not 0 <= bit < width:
        raise ConfigurationError(f"bit {bit} outside {width}-bit word")
    return (x & ((1 << width) - 1)) ^ (1 << bit)


def ber(fraction: float, n_bits: int) -> float:
    """Bit-error rate of a stage: faulty-unit fraction spread over its word width."""
    if not 0.0 <= fraction <= 1.0:
        raise ConfigurationError(f"fraction {fraction} outside [0, 1]")
    if n_bits < 1:
        raise ConfigurationError("stage width must be at least one bit")
    return fraction / n_bits


def stage_width(stage: str, config: CrossbarConfig, level: int | None = None) -> int:
    """Output word width of one unit of ``stage`` (the N_B of its BER)."""
    spec = config.precision
    if stage in (INPUT_OFFSET, WEIGHT_OFFSET, GLOBAL_ALIGN_OFFSET):
        return OFFSET_BITS
    if stage in (INPUT_EXPONENT, WEIGHT_EXPONENT, GLOBAL_ALIGN_EXPONENT):
        return spec.exp_bits
    if stage == MEMORY_CELL:
        return spec.operand_width
    if stage == MULTIPLIER_OUTPUT:
        return spec.product_width
    if stage == ADDER_OUTPUT:
        if level is None:
            raise ConfigurationError("adder faults need a tree level")
        if not 1 <= level <= config.depth:
            raise ConfigurationError(
                f"adder level {level} outside [1, {config.depth}]")
        return spec.product_width + level
    if stage == NORMALIZED_OUTPUT:
        return spec.word_bits
    raise ConfigurationError(f"unknown fault stage {stage!r}")


def stage_units(stage: str, config: CrossbarConfig, level: int | None = None) -> int:
    """Total number of hardware units of ``stage`` in the array."""
    _check_stage_exists(stage, config)
    if stage == INPUT_OFFSET:
        return config.rows
    if stage == INPUT_EXPONENT:
        return config.n_row_groups
    if stage in (WEIGHT_OFFSET, MEMORY_CELL, MULTIPLIER_OUTPUT):
        return config.rows * config.cols
    if stage == WEIGHT_EXPONENT:
        return config.n_row_groups * config.cols
    if stage == ADDER_OUTPUT:
        if level is None:
            raise ConfigurationError("adder faults need a tree level")
        if not 1 <= level <= config.depth:
            raise ConfigurationError(
                f"adder level {level} outside [1, {config.depth}]")
        return config.cols * config.h * (config.tile_rows >> level)
    if stage in (GLOBAL_ALIGN_OFFSET, GLOBAL_ALIGN_EXPONENT):
        return config.cols * config.h * config.groups_per_tree
    if stage == NORMALIZED_OUTPUT:
        return config.cols * config.h
    raise ConfigurationError(f"unknown fault stage {stage!r}")


def _check_stage_exists(stage: str, config: CrossbarConfig) -> None:
    if stage not in STAGES:
        raise ConfigurationError(f"unknown fault stage {stage!r}")
    if config.alignment == NO_ALIGNMENT and stage not in _INT_STAGES:
        raise ConfigurationError(
            f"stage {stage} does not exist on the {config.precision.name} datapath")
    if config.alignment != PRE and stage in _PRE_ONLY:
        raise ConfigurationError(
            f"stage {stage} only exists with pre-alignment")


def unit_coords(stage: str, config: CrossbarConfig, index: int,
                level: int | None = None) -> tuple[int, ...]:
    """Coordinates of the ``index``-th unit in the stage's flat enumeration."""
    total = stage_units(stage, config, level)
    if not 0 <= index < total:
        raise ConfigurationError(f"unit index {index} outside [0, {total})")
    if stage in (INPUT_OFFSET, INPUT_EXPONENT):
        return (index,)
    if stage in (WEIGHT_OFFSET, MEMORY_CELL, MULTIPLIER_OUTPUT, WEIGHT_EXPONENT):
        return (index // config.cols, index % config.cols)
    if stage == ADDER_OUTPUT:
        per_col = config.h * (config.tile_rows >> level)
        return (level, index // per_col, index % per_col)
    if stage in (GLOBAL_ALIGN_OFFSET, GLOBAL_ALIGN_EXPONENT):
        per_col = config.h * config.groups_per_tree
        return (index // per_col, index % per_col)
    if stage == NORMALIZED_OUTPUT:
        return (index // config.h, index % config.h)
    raise ConfigurationError(f"unknown fault stage {stage!r}")


def validate_fault(fault: FaultSpec, config: CrossbarConfig) -> None:
    """Reject faults whose stage, coordinates, or bit do not fit the design."""
    _check_stage_exists(fault.stage, config)
    level = fault.coords[0] if fault.stage == ADDER_OUTPUT else None
    if fault.stage == ADDER_OUTPUT and len(fault.coords) != 3:
        raise ConfigurationError("adder faults need (level, col, idx) coordinates")
    width = stage_width(fault.stage, config, level)
    if not 0 <= fault.bit < width:
        raise ConfigurationError(
            f"bit {fault.bit} outside the {width}-bit {fault.stage} word")
    bounds = _coord_bounds(fault.stage, config, level)
    if len(fault.coords) != len(bounds):
        raise ConfigurationError(
            f"{fault.stage} expects {len(bounds)} coordinates, got {fault.coords}")
    for value, bound in zip(fault.coords, bounds):
        if not 0 <= value < bound:
            raise ConfigurationError(
                f"{fault.stage} coordinates {fault.coords} outside the array")


def _coord_bounds(stage: str, config: CrossbarConfig,
                  level: int | None) -> tuple[int, ...]:
    if stage == INPUT_OFFSET:
        return (config.rows,)
    if stage == INPUT_EXPONENT:
        return (config.n_row_groups,)
    if stage in (WEIGHT_OFFSET, MEMORY_CELL, MULTIPLIER_OUTPUT):
        return (config.rows, config.cols)
    if stage == WEIGHT_EXPONENT:
        return (config.n_row_groups, config.cols)
    if stage == ADDER_OUTPUT:
        return (config.depth + 1, config.cols,
                config.h * (config.tile_rows >> level))
    if stage in (GLOBAL_ALIGN_OFFSET, GLOBAL_ALIGN_EXPONENT):
        return (config.cols, config.h * config.groups_per_tree)
    if stage == NORMALIZED_OUTPUT:
        return (config.cols, config.h)
    raise ConfigurationError(f"unknown fault stage {stage!r}")


@dataclass(frozen=True)
class FaultCampaign:
    """A fixed set of afflicted units, immutable for a whole experiment."""

    stage: str
    bit: int
    fraction: float
    seed: int
    specs: tuple[FaultSpec, ...]
    level: int | None = None

    def __iter__(self):
        return iter(self.specs)

    def __len__(self) -> int:
        return len(self.specs)


def sample_sites(stage: str, fraction: float, config: CrossbarConfig,
                 seed: int, bit: int, level: int | None = None) -> FaultCampaign:
    """Draw distinct fault sites uniformly over the stage's unit enumeration.

    The site count is fraction x total, rounded half-up, with a floor of one
    unit whenever the fraction is positive.  Identical arguments always
    produce the identical campaign.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ConfigurationError(f"fraction {fraction} outside [0, 1]")
    total = stage_units(stage, config, level)
    width = stage_width(stage, config, level)
    if not 0 <= bit < width:
        raise ConfigurationError(f"bit {bit} outside the {width}-bit {stage} word")
    count = int(fraction * total + 0.5)
    if fraction > 0.0:
        count = max(1, count)
    count = min(count, total)
    if count == 0:
        return FaultCampaign(stage, bit, fraction, seed, (), level)
    rng = np.random.default_rng(seed)
    picks = rng.choice(total, size=count, replace=False)
    specs = tuple(sorted(
        FaultSpec(stage, unit_coords(stage, config, int(i), level), bit)
        for i in picks))
    return FaultCampaign(stage, bit, fraction, seed, specs, level)


# ---------------------------------------------------------------------------
# Campaign files: one fault per line, "stage coords bit".
# ---------------------------------------------------------------------------

def save_campaign(specs: Iterable[FaultSpec], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in specs:
            coords = ",".join(str(c) for c in f.coords)
            fh.write(f"{f.stage} {coords} {f.bit}\n")


def load_campaign(path: str) -> tuple[FaultSpec, ...]:
    specs: list[FaultSpec] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected 'stage coords bit', got {line!r}")
            stage, coords_text, bit_text = parts
            if stage not in STAGES:
                raise ConfigurationError(f"{path}:{lineno}: unknown stage {stage!r}")
            coords = tuple(int(c) for c in coords_text.split(","))
            specs.append(FaultSpec(stage, coords, int(bit_text)))
    return tuple(specs)


def validate_campaign(specs: Sequence[FaultSpec], config: CrossbarConfig) -> None:
    for f in specs:
        validate_fault(f, config)
