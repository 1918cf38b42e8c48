"""Desk-scale inference harness: map small networks onto the crossbar.

Layers supported: Dense, Conv2D (lowered to Dense via im2col), ReLU,
MaxPool, Flatten, ArgmaxHead.  Parameters live as BF16 words in the model
file; the executor re-encodes them to the configured precision (or
quantizes to INT8) when programming.  Activations between layers are stored
in the configured FP format; for INT8 each crossbar ingestion re-quantizes
dynamically with symmetric per-tensor scales.

A sample whose activations go non-finite anywhere (possible only under
faults) is poisoned: it counts as incorrect and as a non-finite output.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from math import ceil
from typing import Sequence

import numpy as np

from .codec import (BF16, NEAREST_EVEN, PrecisionSpec, check_finite_words,
                    decode_fields, floats_to_words, words_to_floats)
from .config import CrossbarConfig
from .datapath import FaultMasks, matvec_batch, program_weights
from .errors import ConfigurationError, ModelFormatError
from .faults import FaultSpec

MAGIC = b"CIMMDL1\n"
_KIND_DENSE = 0
_KIND_CONV2D = 1
_KIND_RELU = 2
_KIND_MAXPOOL = 3
_KIND_FLATTEN = 4
_KIND_ARGMAX = 5


# ---------------------------------------------------------------------------
# Layers and the model graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dense:
    weights: np.ndarray  # (out, in) BF16 words
    bias: np.ndarray     # (out,) BF16 words

    @property
    def in_features(self) -> int:
        return self.weights.shape[1]

    @property
    def out_features(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Conv2D:
    weights: np.ndarray      # (out_ch, in_ch, kh, kw) BF16 words
    bias: np.ndarray         # (out_ch,)
    in_shape: tuple[int, int, int]  # (C, H, W), stride 1, valid padding

    @property
    def out_shape(self) -> tuple[int, int, int]:
        _, kh, kw = self.weights.shape[1:]
        c, h, w = self.in_shape
        return (self.weights.shape[0], h - kh + 1, w - kw + 1)


@dataclass(frozen=True)
class ReLU:
    pass


@dataclass(frozen=True)
class MaxPool:
    size: int
    in_shape: tuple[int, int, int]

    @property
    def out_shape(self) -> tuple[int, int, int]:
        c, h, w = self.in_shape
        return (c, h // self.size, w // self.size)


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class ArgmaxHead:
    pass


Layer = Dense | Conv2D | ReLU | MaxPool | Flatten | ArgmaxHead


@dataclass(frozen=True)
class LayerGraph:
    layers: tuple[Layer, ...]

    def __post_init__(self) -> None:
        if not self.layers or not isinstance(self.layers[-1], ArgmaxHead):
            raise ModelFormatError("model must end with an ArgmaxHead")
        size = None
        for i, layer in enumerate(self.layers):
            if isinstance(layer, Dense):
                if size is not None and size != layer.in_features:
                    raise ModelFormatError(
                        f"layer {i}: expected {size} inputs, "
                        f"got {layer.in_features}")
                size = layer.out_features
            elif isinstance(layer, Conv2D):
                need = int(np.prod(layer.in_shape))
                if size is not None and size != need:
                    raise ModelFormatError(
                        f"layer {i}: expected {size} inputs, got {need}")
                c, h, w = layer.in_shape
                kh, kw = layer.weights.shape[2:]
                if layer.weights.shape[1] != c or kh > h or kw > w:
                    raise ModelFormatError(f"layer {i}: kernel does not fit input")
                size = int(np.prod(layer.out_shape))
            elif isinstance(layer, MaxPool):
                need = int(np.prod(layer.in_shape))
                if size is not None and size != need:
                    raise ModelFormatError(
                        f"layer {i}: expected {size} inputs, got {need}")
                c, h, w = layer.in_shape
                if h % layer.size or w % layer.size:
                    raise ModelFormatError(f"layer {i}: pool does not tile input")
                size = int(np.prod(layer.out_shape))
            elif isinstance(layer, ArgmaxHead) and i != len(self.layers) - 1:
                raise ModelFormatError("ArgmaxHead must be the final layer")
        for layer in self.layers:
            for words in _layer_params(layer):
                _, exp, _ = decode_fields(words, BF16)
                if np.any(exp == BF16.exp_max):
                    raise ModelFormatError("non-finite parameter in model")

    @property
    def in_features(self) -> int:
        for layer in self.layers:
            if isinstance(layer, Dense):
                return layer.in_features
            if isinstance(layer, (Conv2D, MaxPool)):
                return int(np.prod(layer.in_shape))
        raise ModelFormatError("model has no parameterized layer")

    @property
    def out_features(self) -> int:
        size = None
        for layer in self.layers:
            if isinstance(layer, Dense):
                size = layer.out_features
            elif isinstance(layer, (Conv2D, MaxPool)):
                size = int(np.prod(layer.out_shape))
        if size is None:
            raise ModelFormatError("model has no parameterized layer")
        return size


def _layer_params(layer: Layer):
    if isinstance(layer, (Dense, Conv2D)):
        yield layer.weights
        yield layer.bias


# ---------------------------------------------------------------------------
# Model file format:
#   magic, u32 layer count, then per layer a u8 kind tag, shape u32s, and
#   row-major parameter words as 16-bit little-endian values.
# ---------------------------------------------------------------------------

def save_model(model: LayerGraph, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(model.layers)))
        for layer in model.layers:
            if isinstance(layer, Dense):
                fh.write(struct.pack("<BII", _KIND_DENSE,
                                     layer.in_features, layer.out_features))
                _write_words(fh, layer.weights)
                _write_words(fh, layer.bias)
            elif isinstance(layer, Conv2D):
                oc, ic, kh, kw = layer.weights.shape
                fh.write(struct.pack("<BIIIIII", _KIND_CONV2D, *layer.in_shape,
                                     oc, kh, kw))
                _write_words(fh, layer.weights)
                _write_words(fh, layer.bias)
            elif isinstance(layer, ReLU):
                fh.write(struct.pack("<B", _KIND_RELU))
            elif isinstance(layer, MaxPool):
                fh.write(struct.pack("<BIIII", _KIND_MAXPOOL, layer.size,
                                     *layer.in_shape))
            elif isinstance(layer, Flatten):
                fh.write(struct.pack("<B", _KIND_FLATTEN))
            elif isinstance(layer, ArgmaxHead):
                fh.write(struct.pack("<B", _KIND_ARGMAX))


def _write_words(fh, words: np.ndarray) -> None:
    fh.write(np.ascontiguousarray(words, dtype="<u2").tobytes())


def _read(fh, fmt: str):
    size = struct.calcsize(fmt)
    data = fh.read(size)
    if len(data) != size:
        raise ModelFormatError("model file truncated")
    return struct.unpack(fmt, data)


def _read_words(fh, shape: tuple[int, ...]) -> np.ndarray:
    count = int(np.prod(shape))
    data = fh.read(2 * count)
    if len(data) != 2 * count:
        raise ModelFormatError("model file truncated")
    return np.frombuffer(data, dtype="<u2").astype(np.int64).reshape(shape)


def load_model(path: str) -> LayerGraph:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ModelFormatError(f"{path} is not a model file")
        (count,) = _read(fh, "<I")
        layers: list[Layer] = []
        for _ in range(count):
            (kind,) = _read(fh, "<B")
            if kind == _KIND_DENSE:
                in_f, out_f = _read(fh, "<II")
                weights = _read_words(fh, (out_f, in_f))
                bias = _read_words(fh, (out_f,))
                layers.append(Dense(weights, bias))
            elif kind == _KIND_CONV2D:
                c, h, w, oc, kh, kw = _read(fh, "<IIIIII")
                weights = _read_words(fh, (oc, c, kh, kw))
                bias = _read_words(fh, (oc,))
                layers.append(Conv2D(weights, bias, (c, h, w)))
            elif kind == _KIND_RELU:
                layers.append(ReLU())
            elif kind == _KIND_MAXPOOL:
                size, c, h, w = _read(fh, "<IIII")
                layers.append(MaxPool(size, (c, h, w)))
            elif kind == _KIND_FLATTEN:
                layers.append(Flatten())
            elif kind == _KIND_ARGMAX:
                layers.append(ArgmaxHead())
            else:
                raise ModelFormatError(f"unknown layer kind {kind}")
        if fh.read(1):
            raise ModelFormatError("trailing bytes after last layer")
    return LayerGraph(tuple(layers))


# ---------------------------------------------------------------------------
# Dataset: CSV with the label first, feature columns after.
# ---------------------------------------------------------------------------

def load_dataset(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse a CSV into (BF16 feature words (N, F), labels (N,))."""
    rows = []
    labels = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for record in csv.reader(fh):
            if not record:
                continue
            labels.append(int(record[0]))
            rows.append([float(v) for v in record[1:]])
    if not rows:
        raise ConfigurationError(f"{path} holds no samples")
    feats = np.array(rows, dtype=np.float64)
    return floats_to_words(feats, BF16, NEAREST_EVEN), np.array(labels, np.int64)


def save_dataset(path: str, features: np.ndarray, labels: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for label, row in zip(labels, features):
            writer.writerow([int(label)] + [repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# Mapping dense layers onto the physical array
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockPlan:
    """Row/column blocking of one (in_features, out_features) weight matrix."""

    in_features: int
    out_features: int
    row_blocks: int
    col_blocks: int

    @property
    def programmings(self) -> int:
        return self.row_blocks * self.col_blocks


def map_layer(in_features: int, out_features: int,
              config: CrossbarConfig) -> BlockPlan:
    """Zero-padded IC x OC blocking; partial sums merge across row blocks."""
    return BlockPlan(in_features, out_features,
                     ceil(in_features / config.rows),
                     ceil(out_features / config.cols))


def _requantize_words(words: np.ndarray, spec: PrecisionSpec) -> np.ndarray:
    """Re-encode BF16-stored parameters into the configured float format."""
    if spec is BF16 or spec.name == BF16.name:
        return words
    return floats_to_words(words_to_floats(words, BF16), spec, NEAREST_EVEN)


class CrossbarExecutor:
    """Runs Dense/Conv layers through the simulated pipeline under one campaign.

    Programmed blocks are cached per layer; a permanent fault lives in the
    physical array, so the same mask set corrupts every programming and
    every invocation.
    """

    def __init__(self, config: CrossbarConfig,
                 faults: Sequence[FaultSpec] | FaultMasks = ()):
        self.config = config
        self.spec = config.precision
        self.masks = faults if isinstance(faults, FaultMasks) \
            else FaultMasks(tuple(faults), config)
        self._blocks: dict[int, list] = {}
        self._int8_weights: dict[int, tuple] = {}

    # -- block programming -------------------------------------------------

    def _dense_blocks(self, key: int, weights: np.ndarray) -> list:
        blocks = self._blocks.get(key)
        if blocks is not None:
            return blocks
        out_f, in_f = weights.shape
        plan = map_layer(in_f, out_f, self.config)
        rows, cols = self.config.rows, self.config.cols
        mat = _requantize_words(weights, self.spec)
        blocks = []
        for cb in range(plan.col_blocks):
            for rb in range(plan.row_blocks):
                block = np.zeros((rows, cols), np.int64)
                rsl = slice(rb * rows, min((rb + 1) * rows, in_f))
                csl = slice(cb * cols, min((cb + 1) * cols, out_f))
                block[:rsl.stop - rsl.start, :csl.stop - csl.start] = \
                    mat[csl, rsl].T
                blocks.append((rb, cb, program_weights(block, self.config,
                                                       self.masks)))
        self._blocks[key] = blocks
        return blocks

    def _int8_block_values(self, key: int, weights: np.ndarray):
        cached = self._int8_weights.get(key)
        if cached is None:
            w = words_to_floats(weights, BF16)
            scale = float(np.abs(w).max())
            scale = scale / 127.0 if scale > 0 else 1.0
            wq = np.clip(np.rint(w / scale), -127, 127).astype(np.int64)
            cached = (wq, scale)
            self._int8_weights[key] = cached
        return cached

    # -- layer execution ----------------------------------------------------

    def dense(self, key: int, layer: Dense, x):
        """(N, in) activations -> (N, out) float64 linear outputs with bias."""
        bias = words_to_floats(layer.bias, BF16)
        if not self.spec.is_float:
            return self._dense_int8(key, layer, x) + bias
        out_f, in_f = layer.weights.shape
        plan = map_layer(in_f, out_f, self.config)
        rows, cols = self.config.rows, self.config.cols
        n = x.shape[0]
        padded = np.zeros((n, plan.row_blocks * rows), np.int64)
        padded[:, :in_f] = x
        merged = np.zeros((n, out_f), np.float64)
        for rb, cb, programmed in self._dense_blocks(key, layer.weights):
            words = matvec_batch(padded[:, rb * rows:(rb + 1) * rows],
                                 programmed, self.masks)
            vals = words_to_floats(words, self.spec)
            csl = slice(cb * cols, min((cb + 1) * cols, out_f))
            merged[:, csl] += vals[:, :csl.stop - csl.start]
        return merged + bias

    def _dense_int8(self, key: int, layer: Dense, x: np.ndarray) -> np.ndarray:
        wq, w_scale = self._int8_block_values(key, layer.weights)
        x_max = float(np.abs(x[np.isfinite(x)]).max(initial=0.0))
        x_scale = x_max / 127.0 if x_max > 0 else 1.0
        with np.errstate(invalid="ignore"):
            xq = np.clip(np.rint(x / x_scale), -127, 127)
        xq = np.where(np.isfinite(xq), xq, 0).astype(np.int64)
        out_f, in_f = wq.shape
        plan = map_layer(in_f, out_f, self.config)
        rows, cols = self.config.rows, self.config.cols
        n = x.shape[0]
        padded = np.zeros((n, plan.row_blocks * rows), np.int64)
        padded[:, :in_f] = xq
        sums = np.zeros((n, out_f), np.int64)
        for cb in range(plan.col_blocks):
            for rb in range(plan.row_blocks):
                block = np.zeros((rows, cols), np.int64)
                rsl = slice(rb * rows, min((rb + 1) * rows, in_f))
                csl = slice(cb * cols, min((cb + 1) * cols, out_f))
                block[:rsl.stop - rsl.start, :csl.stop - csl.start] = \
                    wq[csl, rsl].T
                programmed = program_weights(block, self.config, self.masks)
                part = matvec_batch(padded[:, rb * rows:(rb + 1) * rows],
                                    programmed, self.masks)
                sums[:, csl] += part[:, :csl.stop - csl.start]
        return sums.astype(np.float64) * (x_scale * w_scale)

    def conv(self, key: int, layer: Conv2D, x):
        """im2col lowering: every patch runs through the dense machinery."""
        oc, c, kh, kw = layer.weights.shape
        _, oh, ow = layer.out_shape
        idx = _im2col_indices(layer.in_shape, kh, kw)
        n = x.shape[0]
        patches = x[:, idx.ravel()].reshape(n * oh * ow, idx.shape[1])
        flat_w = layer.weights.reshape(oc, c * kh * kw)
        flat = Dense(flat_w, layer.bias)
        y = self.dense(key, flat, patches)        # (N*P, oc), bias included
        y = y.reshape(n, oh * ow, oc).transpose(0, 2, 1)
        return y.reshape(n, oc * oh * ow)


def _im2col_indices(in_shape: tuple[int, int, int], kh: int, kw: int) -> np.ndarray:
    c, h, w = in_shape
    oh, ow = h - kh + 1, w - kw + 1
    out = np.empty((oh * ow, c * kh * kw), np.int64)
    p = 0
    for i in range(oh):
        for j in range(ow):
            k = 0
            for ch in range(c):
                for di in range(kh):
                    base = (ch * h + i + di) * w + j
                    out[p, k:k + kw] = np.arange(base, base + kw)
                    k += kw
            p += 1
    return out


# ---------------------------------------------------------------------------
# Forward passes and accuracy measurement
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    predictions: np.ndarray          # (N,), -1 for poisoned samples
    logits: np.ndarray               # (N, classes) float64
    layer_outputs: list[np.ndarray]  # per Dense/Conv layer, float64
    nonfinite: np.ndarray            # (N,) bool


@dataclass(frozen=True)
class AccuracyResult:
    correct: int
    total: int
    accuracy: float
    layer_median_errors: tuple[float, ...]
    nonfinite_outputs: int


def run_model(model: LayerGraph, inputs: np.ndarray, config: CrossbarConfig,
              faults: Sequence[FaultSpec] | FaultMasks = ()) -> RunResult:
    """Forward pass through the simulated crossbar pipeline."""
    executor = CrossbarExecutor(config, faults)
    return _forward(model, inputs, config.precision, executor)


def run_model_software(model: LayerGraph, inputs: np.ndarray) -> RunResult:
    """Float software reference with the same BF16 inter-layer quantization."""
    return _forward(model, inputs, BF16, None)


def _forward(model: LayerGraph, inputs: np.ndarray, spec: PrecisionSpec,
             executor: CrossbarExecutor | None) -> RunResult:
    x_words = np.asarray(inputs, np.int64)
    if x_words.ndim != 2 or x_words.shape[1] != model.in_features:
        raise ConfigurationError(
            f"inputs shape {x_words.shape} does not feed {model.in_features} "
            f"features")
    check_finite_words(x_words, BF16, "activation")
    n = x_words.shape[0]
    bad = np.zeros(n, bool)
    records: list[np.ndarray] = []

    int_mode = not spec.is_float
    if int_mode:
        cur = words_to_floats(x_words, BF16)
    else:
        cur = _requantize_words(x_words, spec)

    def to_float(v):
        return v if int_mode else words_to_floats(v, spec)

    def from_float(v):
        if int_mode:
            return v
        return floats_to_words(v, spec, NEAREST_EVEN)

    for key, layer in enumerate(model.layers):
        if isinstance(layer, (Dense, Conv2D)):
            if executor is None:
                y = _software_linear(layer, to_float(cur))
            elif isinstance(layer, Dense):
                y = executor.dense(key, layer, cur)
            else:
                y = executor.conv(key, layer, cur)
            records.append(y)
            row_bad = ~np.isfinite(y).all(axis=1)
            bad |= row_bad
            y = np.where(np.isfinite(y), y, 0.0)
            y[bad] = 0.0
            cur = from_float(y)
        elif isinstance(layer, ReLU):
            cur = from_float(np.maximum(to_float(cur), 0.0))
        elif isinstance(layer, MaxPool):
            c, h, w = layer.in_shape
            k = layer.size
            vals = to_float(cur).reshape(n, c, h // k, k, w // k, k)
            pooled = vals.max(axis=(3, 5)).reshape(n, -1)
            cur = from_float(pooled)
        elif isinstance(layer, Flatten):
            pass
        else:  # ArgmaxHead
            logits = to_float(cur)
            preds = np.argmax(logits, axis=1).astype(np.int64)
            preds[bad] = -1
            return RunResult(preds, logits, records, bad)
    raise ModelFormatError("model did not end with an ArgmaxHead")


def _software_linear(layer, x: np.ndarray) -> np.ndarray:
    if isinstance(layer, Dense):
        w = words_to_floats(layer.weights, BF16)
        b = words_to_floats(layer.bias, BF16)
        return x @ w.T + b
    oc, c, kh, kw = layer.weights.shape
    _, oh, ow = layer.out_shape
    idx = _im2col_indices(layer.in_shape, kh, kw)
    n = x.shape[0]
    patches = x[:, idx.ravel()].reshape(n * oh * ow, idx.shape[1])
    w = words_to_floats(layer.weights.reshape(oc, -1), BF16)
    b = words_to_floats(layer.bias, BF16)
    y = patches @ w.T + b
    return y.reshape(n, oh * ow, oc).transpose(0, 2, 1).reshape(n, -1)


_SMALLEST_NORMAL = float(np.ldexp(1.0, 1 - BF16.bias))


def evaluate(model: LayerGraph, inputs: np.ndarray, labels: np.ndarray,
             config: CrossbarConfig,
             faults: Sequence[FaultSpec] | FaultMasks = ()) -> AccuracyResult:
    """Accuracy and per-layer error of a fault campaign on one dataset.

    The fault-free pipeline run (same config) is the reference for the
    per-layer median relative absolute errors.
    """
    labels = np.asarray(labels, np.int64)
    if not isinstance(faults, FaultMasks):
        faults = tuple(faults)
    has_faults = isinstance(faults, FaultMasks) or bool(faults)
    reference = run_model(model, inputs, config, ())
    faulted = run_model(model, inputs, config, faults) if has_faults \
        else reference
    medians = []
    for ref, got in zip(reference.layer_outputs, faulted.layer_outputs):
        err = np.abs(got - ref) / np.maximum(np.abs(ref), _SMALLEST_NORMAL)
        err = np.where(np.isfinite(got), err, np.inf)
        medians.append(float(np.median(err)))
    correct = int(np.sum(faulted.predictions == labels))
    total = int(labels.size)
    return AccuracyResult(correct, total, correct / total,
                          tuple(medians), int(faulted.nonfinite.sum()))


# ---------------------------------------------------------------------------
# Bundled desk-scale assets: a synthetic 10-class set and a trained MLP.
# ---------------------------------------------------------------------------

def make_demo_data(seed: int = 11, n_train: int = 1536, n_test: int = 1024,
                   n_features: int = 64, n_classes: int = 10,
                   noise: float = 2.2):
    """Deterministic synthetic classification data with mixed feature scales.

    Feature scales span nine binades so alignment groups see real exponent
    spreads; the noise level leaves the trained MLP around 91% test
    accuracy, with small enough margins that injected faults register.
    """
    rng = np.random.default_rng(seed)
    protos = rng.normal(0.0, 1.0, size=(n_classes, n_features))
    scales = np.ldexp(1.0, rng.integers(-4, 6, size=n_features))
    def draw(n):
        labels = rng.integers(0, n_classes, size=n)
        feats = (protos[labels] + rng.normal(0.0, noise, (n, n_features))) * scales
        return feats, labels
    x_tr, y_tr = draw(n_train)
    x_te, y_te = draw(n_test)
    return (x_tr, y_tr), (x_te, y_te)


def train_mlp(features: np.ndarray, labels: np.ndarray, hidden: int = 32,
              classes: int = 10, seed: int = 11, epochs: int = 400,
              lr: float = 3e-3) -> LayerGraph:
    """Full-batch Adam on a 1-hidden-layer softmax MLP, then BF16 quantization."""
    rng = np.random.default_rng(seed)
    n, d = features.shape
    x = words_to_floats(floats_to_words(features, BF16, NEAREST_EVEN), BF16)
    x_std = x / np.maximum(np.abs(x).max(axis=0), 1e-12)
    onehot = np.eye(classes)[labels]
    w1 = rng.normal(0, np.sqrt(2.0 / d), (d, hidden))
    b1 = np.zeros(hidden)
    w2 = rng.normal(0, np.sqrt(2.0 / hidden), (hidden, classes))
    b2 = np.zeros(classes)
    params = [w1, b1, w2, b2]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    for t in range(1, epochs + 1):
        h = np.maximum(x_std @ w1 + b1, 0.0)
        z = h @ w2 + b2
        z -= z.max(axis=1, keepdims=True)
        e = np.exp(z)
        probs = e / e.sum(axis=1, keepdims=True)
        dz = (probs - onehot) / n
        dw2 = h.T @ dz
        db2 = dz.sum(axis=0)
        dh = (dz @ w2.T) * (h > 0)
        dw1 = x_std.T @ dh
        db1 = dh.sum(axis=0)
        for p, grad, mi, vi in zip(params, [dw1, db1, dw2, db2], m, v):
            mi *= 0.9
            mi += 0.1 * grad
            vi *= 0.999
            vi += 0.001 * grad * grad
            mhat = mi / (1 - 0.9 ** t)
            vhat = vi / (1 - 0.999 ** t)
            p -= lr * mhat / (np.sqrt(vhat) + 1e-8)
    # Fold the feature standardization into the first layer.
    w1_eff = (w1.T / np.maximum(np.abs(x).max(axis=0), 1e-12)).astype(np.float64)
    layers = (
        Dense(floats_to_words(w1_eff, BF16, NEAREST_EVEN),
              floats_to_words(b1, BF16, NEAREST_EVEN)),
        ReLU(),
        Dense(floats_to_words(w2.T, BF16, NEAREST_EVEN),
              floats_to_words(b2, BF16, NEAREST_EVEN)),
        ArgmaxHead(),
    )
    return LayerGraph(layers)


def build_demo_assets(directory: str, seed: int = 11) -> dict[str, str]:
    """Write train/test CSVs plus a trained model file; returns the paths."""
    import os
    os.makedirs(directory, exist_ok=True)
    (x_tr, y_tr), (x_te, y_te) = make_demo_data(seed)
    train_path = os.path.join(directory, "demo_train.csv")
    test_path = os.path.join(directory, "demo_test.csv")
    model_path = os.path.join(directory, "demo_mlp.cimmdl")
    save_dataset(train_path, x_tr, y_tr)
    save_dataset(test_path, x_te, y_te)
    model = train_mlp(x_tr, y_tr, seed=seed)
    save_model(model, model_path)
    return {"model": model_path, "train": train_path, "test": test_path}
