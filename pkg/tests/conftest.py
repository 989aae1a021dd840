from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def fixture_dir():
    return FIXTURES


def random_int_image(rng, h, w):
    """Integer-valued image (0..255 stored as float64), like an 8-bit capture."""
    return np.floor(rng.uniform(0, 256, (h, w)))


def random_float_image(rng, h, w):
    """Continuous-valued image; exact value ties are measure-zero events."""
    return rng.uniform(0.0, 255.0, (h, w))


def random_color_image(rng, h, w):
    return np.floor(rng.uniform(0, 256, (h, w, 3)))
