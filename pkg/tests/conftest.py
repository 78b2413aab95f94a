import numpy as np
import pytest

import qlevy
from qlevy.fixtures import PACKAGED_NAMES, packaged_pair


@pytest.fixture(scope="session")
def packaged():
    """name -> (algebra, generating functional) for all shipped examples."""
    return {name: packaged_pair(name) for name in PACKAGED_NAMES}


@pytest.fixture(scope="session")
def pipelines(packaged):
    """name -> (algebra, gamma, triple, structure map) for all shipped examples."""
    out = {}
    for name, (B, gamma) in packaged.items():
        triple = qlevy.gns_triple(B, gamma)
        out[name] = (B, gamma, triple, qlevy.assemble_structure_map(B, triple))
    return out


def random_functional(rng, d, scale=1.0):
    return scale * (rng.standard_normal(d) + 1j * rng.standard_normal(d))


def random_element(rng, d, scale=1.0):
    return scale * (rng.standard_normal(d) + 1j * rng.standard_normal(d))


def random_step(rng, noise_dim, horizon=1.0, scale=0.5, max_breaks=3):
    nbp = int(rng.integers(0, max_breaks + 1))
    bp = np.sort(rng.uniform(0.05 * horizon, 0.95 * horizon, nbp))
    bp = bp[np.concatenate(([True], np.diff(bp) > 1e-6))] if nbp else bp
    vals = scale * (rng.standard_normal((len(bp) + 1, noise_dim))
                    + 1j * rng.standard_normal((len(bp) + 1, noise_dim)))
    return qlevy.StepFunction(bp, vals)
