import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from planar_synth import make_planar_sample  # noqa: E402


@pytest.fixture
def planar_dataset():
    """Two subsets x 12 samples with increasing chainage."""
    rng = np.random.default_rng(4242)
    samples = []
    for subset in ("SYN_A", "SYN_B"):
        for i in range(12):
            samples.append(make_planar_sample(
                rng, subset, f"{subset.lower()}_{i:02d}", chainage=10.0 * i))
    return samples
