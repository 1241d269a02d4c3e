import logging
import math

import numpy as np
import pytest

from utils.errors import DimensionMismatch, ZeroVectorError
from utils.numeric import RngSeed, cosine_lr, dot, normalize, random_orthogonal, random_unit_vector

# first eight components of random_unit_vector(8, RngSeed(42, "dimer"))
GOLDEN_DIMER_8 = [
    0.1697399555398992, 0.41827256610863045, 0.26700996129487514, -0.432524711206141,
    -0.24645706728038982, 0.030609081833592826, -0.5760646335724837, -0.37991577848705116,
]


def test_stream_is_pcg64_seeded_from_seed_words_and_label_bytes():
    seed = RngSeed(0, "default")
    assert seed.entropy() == [0, 0, *b"default"]
    assert RngSeed(2 ** 40 + 3, "").entropy() == [3, 256]
    raw = seed.stream().raw(2)
    assert raw.dtype == np.uint64
    assert raw.tolist() == [5974057054842300390, 4984074830465492294]
    direct = np.random.PCG64(np.random.SeedSequence([0, 0, *b"default"])).random_raw(2)
    assert np.array_equal(raw, direct)


def test_labels_and_children_name_distinct_streams():
    assert RngSeed(5, "a").child("b") == RngSeed(5, "a/b")
    first = RngSeed(5, "a").stream().raw(4)
    assert not np.array_equal(first, RngSeed(5, "b").stream().raw(4))
    assert not np.array_equal(first, RngSeed(6, "a").stream().raw(4))


def test_seed_must_fit_in_64_bits():
    with pytest.raises(ValueError):
        RngSeed(-1)
    with pytest.raises(ValueError):
        RngSeed(2 ** 64)


def test_random_range_and_uniform_golden():
    stream = RngSeed(3, "x").stream()
    values = stream.random(1000)
    assert values.min() >= 0.0 and values.max() < 1.0
    np.testing.assert_allclose(
        RngSeed(7, "init").stream().uniform(-1.5, 1.5, 2), [-0.08185314364339202, 1.0752857910885267], rtol=1e-15
    )


def test_permutation():
    perm = RngSeed(1, "p").stream().permutation(50)
    assert sorted(perm.tolist()) == list(range(50))
    assert RngSeed(1, "p").stream().permutation(10).tolist() == [3, 9, 0, 8, 1, 4, 2, 5, 7, 6]


def test_standard_normal_moments_and_odd_lengths():
    z = RngSeed(4, "normal").stream().standard_normal(20001)
    assert z.shape == (20001,)
    assert abs(z.mean()) < 0.05
    assert abs(z.std() - 1.0) < 0.05
    assert RngSeed(4, "normal").stream().standard_normal(0).shape == (0,)


@pytest.mark.parametrize("a, b, expected", [
    ((1, 0), (0, 1), 0.0),
    ((3, 4), (3, 4), 25.0),
    ((1, 2, 3), (4, 5, 6), 32.0),
])
def test_dot(a, b, expected):
    assert dot(np.array(a, float), np.array(b, float)) == expected


def test_dot_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        dot(np.ones(2), np.ones(3))


def test_normalize():
    np.testing.assert_allclose(normalize(np.array([3.0, 4.0])), [0.6, 0.8], rtol=1e-15)
    unit = random_unit_vector(5, RngSeed(1))
    np.testing.assert_allclose(normalize(unit), unit, atol=1e-15)
    with pytest.raises(ZeroVectorError):
        normalize(np.zeros(2))


def test_random_unit_vector():
    v = random_unit_vector(1, RngSeed(9))
    assert v.tolist() in ([1.0], [-1.0])

    a = random_unit_vector(16, RngSeed(11, "dimer"))
    b = random_unit_vector(16, RngSeed(11, "dimer"))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, random_unit_vector(16, RngSeed(12, "dimer")))

    big = random_unit_vector(1000, RngSeed(0))
    assert abs(np.linalg.norm(big) - 1.0) <= 1e-12


def test_random_unit_vector_golden():
    v = random_unit_vector(8, RngSeed(42, "dimer"))
    np.testing.assert_allclose(v, GOLDEN_DIMER_8, rtol=0, atol=1e-12)


def test_random_orthogonal():
    q = random_orthogonal(6, RngSeed(2, "basis"))
    np.testing.assert_allclose(q.T @ q, np.eye(6), atol=1e-12)


def test_cosine_lr_endpoints():
    assert cosine_lr(0, 100, 1e-3) == 1e-3
    assert cosine_lr(100, 100, 1e-3, 1e-5) == pytest.approx(1e-5, abs=1e-18)
    assert cosine_lr(50, 100, 1e-3, 1e-4) == pytest.approx((1e-3 + 1e-4) / 2, rel=1e-12)


def test_cosine_lr_clamps_past_horizon(caplog):
    with caplog.at_level(logging.WARNING, logger="utils.numeric"):
        assert cosine_lr(101, 100, 1e-3, 2e-4) == 2e-4
    assert "past the horizon" in caplog.text


def test_cosine_lr_validates():
    with pytest.raises(ValueError):
        cosine_lr(0, 0, 1e-3)
    with pytest.raises(ValueError):
        cosine_lr(0, 10, 1e-3, 1e-2)
    assert math.isclose(cosine_lr(5, 10, 0.0), 0.0)
