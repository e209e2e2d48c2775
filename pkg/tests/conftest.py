import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def linear_data():
    rng = np.random.default_rng(7)
    X = rng.random((200, 3))
    y = (X[:, 0] + X[:, 1] > 1).astype(np.int64)
    return X, y
