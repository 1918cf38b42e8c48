"""Crossbar architecture points: size, stencil, alignment paradigm, precision.

A config describes one full design: an IC x OC array of MAC units, either
monolithic (one adder tree of depth log2(IC) per column) or partitioned
into H x W tiles of ic x oc cells with per-tile trees and normalization.
The alignment paradigm places the mantissa shifts either before the
multipliers (``pre``, classic input/weight alignment in groups of ``group``)
or after them (``post``, local alignment of products in groups of ``group``).
Either way the mid-tree global alignment runs at adder level log2(group).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .codec import BF16, INT8, PRECISIONS, TRUNCATE, ROUNDINGS, PrecisionSpec
from .errors import ConfigurationError

PRE = "pre"
POST = "post"
NO_ALIGNMENT = "none"  # INT8: integer datapath, no alignment stages exist


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class CrossbarConfig:
    rows: int                    # IC, total input channels
    cols: int                    # OC, total output channels
    precision: PrecisionSpec = BF16
    alignment: str = PRE
    group: int = 16              # pre: input/weight group size; post: local group
    tile_rows: int | None = None  # ic; defaults to rows (monolithic)
    tile_cols: int | None = None  # oc; defaults to cols
    rounding: str = TRUNCATE

    def __post_init__(self) -> None:
        if self.tile_rows is None:
            object.__setattr__(self, "tile_rows", self.rows)
        if self.tile_cols is None:
            object.__setattr__(self, "tile_cols", self.cols)
        if not self.precision.is_float:
            # Alignment stages do not exist on the integer datapath.
            object.__setattr__(self, "alignment", NO_ALIGNMENT)
            object.__setattr__(self, "group", 0)
        for name, n in (("rows", self.rows), ("cols", self.cols),
                        ("tile_rows", self.tile_rows), ("tile_cols", self.tile_cols)):
            if not _is_pow2(n):
                raise ConfigurationError(f"{name}={n} must be a power of two")
        if self.rows % self.tile_rows or self.cols % self.tile_cols:
            raise ConfigurationError(
                f"tiling {self.tile_rows}x{self.tile_cols} does not divide "
                f"{self.rows}x{self.cols}")
        if self.tile_rows < 2:
            raise ConfigurationError("a tile needs at least 2 rows")
        if self.rounding not in ROUNDINGS:
            raise ConfigurationError(f"unknown rounding mode {self.rounding!r}")
        if self.precision.is_float:
            if self.alignment not in (PRE, POST):
                raise ConfigurationError(
                    f"unknown alignment paradigm {self.alignment!r}")
            if not _is_pow2(self.group) or not 2 <= self.group <= self.tile_rows:
                raise ConfigurationError(
                    f"group={self.group} must be a power of two in "
                    f"[2, {self.tile_rows}]")

    # -- derived geometry ---------------------------------------------------

    @property
    def h(self) -> int:
        """Number of row tiles."""
        return self.rows // self.tile_rows

    @property
    def w(self) -> int:
        """Number of column tiles."""
        return self.cols // self.tile_cols

    @property
    def is_tiled(self) -> bool:
        return self.h > 1 or self.w > 1

    @property
    def depth(self) -> int:
        """Adder tree levels per tile column."""
        return self.tile_rows.bit_length() - 1

    @property
    def global_align_level(self) -> int:
        """Adder level whose outputs pass through global alignment (0 = none)."""
        if not self.precision.is_float:
            return 0
        return self.group.bit_length() - 1

    @property
    def groups_per_tree(self) -> int:
        return self.tile_rows // self.group if self.group else 0

    @property
    def n_row_groups(self) -> int:
        """Alignment groups along the full input column."""
        return self.rows // self.group if self.group else 0

    @property
    def final_width(self) -> int:
        """Width of the completed per-tile adder sum."""
        return self.precision.product_width + self.depth

    @property
    def macs(self) -> int:
        return self.rows * self.cols

    def with_precision(self, spec: PrecisionSpec) -> "CrossbarConfig":
        if not spec.is_float:
            return replace(self, precision=spec, alignment=NO_ALIGNMENT, group=0)
        group = self.group if self.group else min(16, self.tile_rows)
        align = self.alignment if self.alignment != NO_ALIGNMENT else PRE
        return replace(self, precision=spec, alignment=align, group=group)

    # -- reference design points ---------------------------------------------

    @classmethod
    def baseline(cls, **kw) -> "CrossbarConfig":
        """128x32 monolithic array, input/weight alignment in groups of 16."""
        return cls(rows=128, cols=32, alignment=PRE, group=16, **kw)

    @classmethod
    def hardened(cls, **kw) -> "CrossbarConfig":
        """8x4x16x8 tiled array, post-multiply alignment in groups of 4.

        Same 4096 MAC units as the baseline, but shallow 3-level trees, local
        alignment of products, and global alignment after two adder levels.
        """
        return cls(rows=128, cols=32, tile_rows=8, tile_cols=4,
                   alignment=POST, group=4, **kw)


def named_design(name: str) -> CrossbarConfig:
    """Look up one of the stock 4096-MAC design points by name."""
    designs = {
        "baseline": CrossbarConfig.baseline(),
        # Same monolithic array, shifts moved after the multipliers.
        "post_mono": CrossbarConfig(rows=128, cols=32, alignment=POST, group=16),
        # 8x4x16x8 tiles, one full alignment right after multiply (the local
        # group spans the whole tile column, so the mid-tree stage is a no-op).
        "tiled_flat": CrossbarConfig(rows=128, cols=32, tile_rows=8, tile_cols=4,
                                     alignment=POST, group=8),
        "hardened": CrossbarConfig.hardened(),
    }
    try:
        return designs[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown design {name!r}; choose from {sorted(designs)}") from None


DESIGN_NAMES = ("baseline", "post_mono", "tiled_flat", "hardened")


def parse_design_file(path: str) -> CrossbarConfig:
    """Build a config from a ``key = value`` design file."""
    fields: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"bad design line: {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            fields[key.lower()] = value
    try:
        precision = PRECISIONS[fields.get("precision", "BF16").upper()]
    except KeyError:
        raise ConfigurationError(
            f"unknown precision {fields.get('precision')!r}") from None
    kwargs = dict(
        rows=int(fields["rows"]),
        cols=int(fields["cols"]),
        precision=precision,
        rounding=fields.get("rounding", TRUNCATE),
    )
    if precision.is_float:
        kwargs["alignment"] = fields.get("alignment", PRE)
        kwargs["group"] = int(fields.get("group", 16))
    if "tile_rows" in fields:
        kwargs["tile_rows"] = int(fields["tile_rows"])
    if "tile_cols" in fields:
        kwargs["tile_cols"] = int(fields["tile_cols"])
    return CrossbarConfig(**kwargs)


def resolve_design(name_or_path: str) -> CrossbarConfig:
    """Accept a stock design name or a path to a design file."""
    if name_or_path in DESIGN_NAMES:
        return named_design(name_or_path)
    import os
    if os.path.exists(name_or_path):
        return parse_design_file(name_or_path)
    raise ConfigurationError(
        f"{name_or_path!r} is neither a stock design nor a design file")
