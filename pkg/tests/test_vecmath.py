import numpy as np
import pytest

from emojimap.errors import ZeroVector
from emojimap.vecmath import cosine, cosine_against_rows, derive_rng, derive_seed, log_sigmoid, sigmoid, unit_rows


def test_cosine_basic_values():
    assert cosine([1, 0], [1, 0]) == pytest.approx(1.0)
    assert cosine([1, 0], [0, 1]) == pytest.approx(0.0)
    assert cosine([1, 0], [-2, 0]) == pytest.approx(-1.0)
    assert cosine([3, 4], [6, 8]) <= 1.0


def test_cosine_zero_vector_raises():
    with pytest.raises(ZeroVector):
        cosine([0, 0], [1, 0])


def test_cosine_against_rows_marks_zero_rows():
    sims = cosine_against_rows(np.array([1.0, 0.0]), np.array([[2.0, 0.0], [0.0, 0.0], [0.0, 1.0]]))
    assert sims.tolist() == pytest.approx([1.0, -1.0, 0.0])


def test_unit_rows_rejects_zero_row():
    with pytest.raises(ZeroVector):
        unit_rows(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_sigmoid_is_stable_at_extremes():
    assert sigmoid(0.0) == pytest.approx(0.5)
    assert np.isfinite(log_sigmoid(-1000.0))
    assert log_sigmoid(1000.0) == pytest.approx(0.0)


def test_derived_rngs_are_reproducible_and_independent():
    a = derive_rng(1, "word-init").random(5)
    b = derive_rng(1, "word-init").random(5)
    c = derive_rng(1, "emoji-init").random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert derive_seed(5, "fold", 0) == derive_seed(5, "fold", 0)
    assert derive_seed(5, "threshold", 0.2) != derive_seed(5, "threshold", 0.3)
