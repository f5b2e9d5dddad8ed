import numpy as np
import pytest

from mlkr import make_params


@pytest.fixture
def paper_params():
    """Kick/coupling pairs highlighted throughout the study."""
    return {
        (0.2, 1.0): make_params(0.2, 1.0),
        (0.6, 2.0): make_params(0.6, 2.0),
        (2.0, 2.0): make_params(2.0, 2.0),
        (3.0, 2.0): make_params(3.0, 2.0),
        (0.6, 256.0): make_params(0.6, 256.0),
    }


def random_quantum_amps(rng, n1, n2):
    a = rng.standard_normal((n1, n2)) + 1j * rng.standard_normal((n1, n2))
    return a / np.linalg.norm(a)
