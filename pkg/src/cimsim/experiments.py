"""Reproducible experiment grids: BER sweeps, design comparisons, CSV records.

A run expands (stages x bits x fractions x seeds) into grid points, samples
one fault campaign per point, measures accuracy on the configured model and
dataset, and appends CSV records in deterministic grid order.  Seeds are
explicit everywhere; re-running a config reproduces the CSV byte-for-byte
except for the wall-time column.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .config import CrossbarConfig, resolve_design
from .errors import ConfigurationError
from .faults import (ADDER_OUTPUT, STAGES, ber, sample_sites, stage_width,
                     stage_units)
from .harness import evaluate, load_dataset, load_model

CSV_COLUMNS = ("config_id", "design", "stage", "level", "bit", "fraction",
               "ber", "seed", "accuracy", "layer_errors", "nonfinite",
               "wall_time_s")


@dataclass(frozen=True)
class ExperimentRecord:
    config_id: str
    design: str
    stage: str
    level: int
    bit: int
    fraction: float
    ber: float
    seed: int
    accuracy: float
    layer_errors: tuple[float, ...]
    nonfinite: int
    wall_time_s: float

    def to_row(self) -> list[str]:
        return [self.config_id, self.design, self.stage, str(self.level),
                str(self.bit), repr(self.fraction), repr(self.ber),
                str(self.seed), repr(self.accuracy),
                ";".join(repr(e) for e in self.layer_errors),
                str(self.nonfinite), repr(self.wall_time_s)]

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "ExperimentRecord":
        errors = tuple(float(v) for v in row[9].split(";")) if row[9] else ()
        rec = cls(row[0], row[1], row[2], int(row[3]), int(row[4]),
                  float(row[5]), float(row[6]), int(row[7]), float(row[8]),
                  errors, int(row[10]), float(row[11]))
        expected = 0.0 if rec.fraction == 0 else rec.fraction / _n_bits_of(rec)
        if abs(rec.ber - expected) > 1e-15:
            raise ConfigurationError(
                f"record {rec.config_id}: BER column does not match "
                f"fraction/width")
        return rec


def _n_bits_of(rec: ExperimentRecord) -> int:
    design = resolve_design(rec.design)
    level = rec.level if rec.stage == ADDER_OUTPUT else None
    return stage_width(rec.stage, design, level)


@dataclass(frozen=True)
class ExperimentConfig:
    design: str
    model: str
    dataset: str
    stages: tuple[str, ...]
    bits: tuple[int, ...]
    fractions: tuple[float, ...]
    seeds: tuple[int, ...]
    out: str
    level: int = 0           # adder tree level for AdderOutput stages
    samples: int = 0         # 0 = whole dataset
    workers: int = 1
    rounding: str = ""       # override the design's rounding mode

    def grid(self):
        for stage in self.stages:
            for bit in self.bits:
                for fraction in self.fractions:
                    for seed in self.seeds:
                        yield stage, bit, fraction, seed


def parse_experiment_file(path: str) -> ExperimentConfig:
    """Read a flat ``key = value`` experiment description."""
    fields: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"bad config line: {line!r}")
            key, value = (p.strip() for p in line.split("=", 1))
            fields[key.lower()] = value
    def split(key, cast):
        return tuple(cast(v.strip()) for v in fields[key].split(",") if v.strip())
    try:
        cfg = ExperimentConfig(
            design=fields["design"],
            model=fields["model"],
            dataset=fields["dataset"],
            stages=split("stages", str),
            bits=split("bits", int),
            fractions=split("fractions", float),
            seeds=split("seeds", int),
            out=fields["out"],
            level=int(fields.get("level", 0)),
            samples=int(fields.get("samples", 0)),
            workers=int(fields.get("workers", 1)),
            rounding=fields.get("rounding", ""),
        )
    except KeyError as missing:
        raise ConfigurationError(f"config file misses key {missing}") from None
    for stage in cfg.stages:
        if stage not in STAGES:
            raise ConfigurationError(f"unknown stage {stage!r}")
    return cfg


def record_id(design: str, stage: str, level: int, bit: int, fraction: float,
              seed: int) -> str:
    return f"{design}:{stage}:L{level}:b{bit}:f{fraction!r}:s{seed}"


def _campaign_for(config: CrossbarConfig, stage: str, bit: int,
                  fraction: float, seed: int, level: int):
    lv = level if stage == ADDER_OUTPUT else None
    return sample_sites(stage, fraction, config, seed, bit, lv)


_WORKER_STATE: dict = {}


def _design_of(name: str, rounding: str = "") -> CrossbarConfig:
    config = resolve_design(name)
    if rounding:
        from dataclasses import replace
        config = replace(config, rounding=rounding)
    return config


def _worker_init(design_name: str, model_path: str, dataset_path: str,
                 samples: int, rounding: str = "") -> None:
    config = _design_of(design_name, rounding)
    model = load_model(model_path)
    inputs, labels = load_dataset(dataset_path)
    if samples:
        inputs, labels = inputs[:samples], labels[:samples]
    _WORKER_STATE.update(design=config, model=model, inputs=inputs,
                         labels=labels, name=design_name)


def _worker_run(task) -> ExperimentRecord:
    stage, bit, fraction, seed, level = task
    config = _WORKER_STATE["design"]
    start = time.perf_counter()
    campaign = _campaign_for(config, stage, bit, fraction, seed, level)
    result = evaluate(_WORKER_STATE["model"], _WORKER_STATE["inputs"],
                      _WORKER_STATE["labels"], config, campaign.specs)
    elapsed = time.perf_counter() - start
    lv = level if stage == ADDER_OUTPUT else 0
    width = stage_width(config=config, stage=stage,
                        level=level if stage == ADDER_OUTPUT else None)
    return ExperimentRecord(
        config_id=record_id(_WORKER_STATE["name"], stage, lv, bit, fraction, seed),
        design=_WORKER_STATE["name"], stage=stage, level=lv, bit=bit,
        fraction=fraction, ber=0.0 if fraction == 0 else ber(fraction, width),
        seed=seed, accuracy=result.accuracy,
        layer_errors=result.layer_median_errors,
        nonfinite=result.nonfinite_outputs, wall_time_s=elapsed)


def run_experiment(cfg: ExperimentConfig, resume: bool = True,
                   log=None) -> list[ExperimentRecord]:
    """Execute every grid point, skipping ids already present in the CSV."""
    config = _design_of(cfg.design, cfg.rounding)
    for stage in cfg.stages:
        level = cfg.level if stage == ADDER_OUTPUT else None
        width = stage_width(stage, config, level)
        stage_units(stage, config, level)
        for bit in cfg.bits:
            if not 0 <= bit < width:
                raise ConfigurationError(
                    f"bit {bit} outside the {width}-bit {stage} word")
    existing: dict[str, ExperimentRecord] = {}
    if resume and os.path.exists(cfg.out):
        for rec in read_records(cfg.out):
            existing[rec.config_id] = rec
    tasks = []
    for stage, bit, fraction, seed in cfg.grid():
        lv = cfg.level if stage == ADDER_OUTPUT else 0
        rid = record_id(cfg.design, stage, lv, bit, fraction, seed)
        if rid not in existing:
            tasks.append((stage, bit, fraction, seed, cfg.level))
    fresh: dict[str, ExperimentRecord] = {}
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(
                max_workers=cfg.workers, initializer=_worker_init,
                initargs=(cfg.design, cfg.model, cfg.dataset, cfg.samples,
                          cfg.rounding)) as pool:
            for rec in pool.map(_worker_run, tasks):
                fresh[rec.config_id] = rec
                if log:
                    log(f"{rec.config_id} accuracy={rec.accuracy:.4f}")
    else:
        _worker_init(cfg.design, cfg.model, cfg.dataset, cfg.samples,
                     cfg.rounding)
        for task in tasks:
            rec = _worker_run(task)
            fresh[rec.config_id] = rec
            if log:
                log(f"{rec.config_id} accuracy={rec.accuracy:.4f}")
    # Emit in deterministic grid order regardless of execution order.
    records = []
    for stage, bit, fraction, seed in cfg.grid():
        lv = cfg.level if stage == ADDER_OUTPUT else 0
        rid = record_id(cfg.design, stage, lv, bit, fraction, seed)
        records.append(existing.get(rid) or fresh[rid])
    write_records(cfg.out, records)
    return records


def write_records(path: str, records: Sequence[ExperimentRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.to_row())


def read_records(path: str) -> list[ExperimentRecord]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_COLUMNS:
            raise ConfigurationError(f"{path} is not an experiment CSV")
        return [ExperimentRecord.from_row(row) for row in reader]


# ---------------------------------------------------------------------------
# Design comparison under one shared fault scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    design: str
    baseline_accuracy: float
    faulted_accuracy: float
    drop: float
    drop_ratio_vs_first: float


def compare_designs(designs: Sequence[str], model_path: str, dataset_path: str,
                    stage: str, bit: int, fraction: float,
                    seeds: Sequence[int], level: int = 0,
                    samples: int = 0) -> list[ComparisonRow]:
    """Mean accuracy drop of each design under the same fault scenario.

    All designs must expose the same MAC count so unit fractions are
    commensurate; the first design is the reference for drop ratios.
    """
    configs = [resolve_design(name) for name in designs]
    macs = {c.macs for c in configs}
    if len(macs) != 1:
        raise ConfigurationError(
            f"designs have different MAC counts {sorted(macs)}; "
            "fault scenarios would not be commensurate")
    model = load_model(model_path)
    inputs, labels = load_dataset(dataset_path)
    if samples:
        inputs, labels = inputs[:samples], labels[:samples]
    rows: list[ComparisonRow] = []
    first_drop = None
    for name, config in zip(designs, configs):
        base = evaluate(model, inputs, labels, config, ()).accuracy
        accs = []
        for seed in seeds:
            campaign = _campaign_for(config, stage, bit, fraction, seed, level)
            accs.append(evaluate(model, inputs, labels, config,
                                 campaign.specs).accuracy)
        faulted = sum(accs) / len(accs)
        drop = base - faulted
        if first_drop is None:
            first_drop = drop
        ratio = drop / first_drop if first_drop else (0.0 if drop == 0 else float("inf"))
        rows.append(ComparisonRow(name, base, faulted, drop, ratio))
    return rows
