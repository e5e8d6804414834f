import numpy as np
import pytest

from hazefuse.errors import ShapeMismatchError
from hazefuse.evaluation import (
    CAST_PRESETS,
    METRIC_COLUMNS,
    HazeModel,
    MetricReport,
    apply_haze,
    apply_underwater_cast,
    avg_gradient,
    colorfulness,
    dark_channel_mean,
    entropy,
    local_contrast,
    report,
    rms_contrast,
    rmse,
    synthetic_corpus,
    synthetic_scene,
)
from hazefuse.image_core import Image, gray_world_correct


def test_column_order():
    assert METRIC_COLUMNS == [
        "entropy",
        "avg_gradient",
        "rms_contrast",
        "local_contrast",
        "colorfulness",
        "dark_channel_mean",
        "rmse_to_reference",
    ]


def test_entropy_examples():
    assert entropy(Image.gray(np.full((8, 8), 0.3))) == 0.0
    codes = np.arange(256).reshape(16, 16) / 255.0
    assert entropy(Image.gray(codes)) == pytest.approx(8.0, abs=1e-12)
    half = np.zeros((4, 4))
    half[:2] = 1.0
    assert entropy(Image.gray(half)) == pytest.approx(1.0, abs=1e-12)


def test_avg_gradient_examples():
    assert avg_gradient(Image.gray(np.full((5, 5), 0.7))) == 0.0
    s = 0.02
    ramp = np.tile(np.arange(12) * s, (9, 1))
    assert avg_gradient(Image.gray(ramp)) == pytest.approx(s / np.sqrt(2), abs=1e-15)
    # Hand evaluation: every difference on a 0/1 checkerboard is +-1, so
    # every stencil gives sqrt((1 + 1) / 2) = 1.
    board = (np.add.outer(np.arange(4), np.arange(4)) % 2).astype(float)
    assert avg_gradient(Image.gray(board)) == pytest.approx(1.0, abs=1e-15)


def test_colorfulness_examples():
    assert colorfulness(Image.rgb(np.full((4, 4, 3), 0.4))) == 0.0
    red = Image.rgb(np.tile([1.0, 0.0, 0.0], (4, 4, 1)))
    assert colorfulness(red) == pytest.approx(0.3 * np.sqrt(1.25), abs=1e-12)
    assert colorfulness(red) == pytest.approx(0.3354, abs=1e-4)


def test_colorfulness_grows_with_green_cast(rng):
    g = rng.uniform(0.2, 0.6, (16, 16))
    base = np.stack([g, g, g], axis=2)
    cast = base.copy()
    cast[:, :, 1] += 0.2  # shifts mu_rg without changing any variance
    assert colorfulness(Image.rgb(cast)) > colorfulness(Image.rgb(base))


def test_local_contrast_oracle(rng):
    y = rng.uniform(0, 1, (20, 18))
    expected = np.mean([y[i : i + 16, j : j + 16].std() for i in range(5) for j in range(3)])
    assert local_contrast(Image.gray(y)) == pytest.approx(expected, abs=1e-12)


def test_local_contrast_small_image(rng):
    y = rng.uniform(0, 1, (6, 9))
    assert local_contrast(Image.gray(y)) == pytest.approx(y.std(), abs=1e-12)


def test_constant_report():
    r = report(Image.rgb(np.full((20, 20, 3), 0.5)))
    assert r.entropy == 0 and r.avg_gradient == 0 and r.rms_contrast == 0
    assert r.local_contrast == 0
    assert rms_contrast(Image.gray(np.array([[0.0, 1.0]]))) == 0.5
    assert r.rmse_to_reference is None
    assert r.as_row()[-1] == ""


def test_report_reference(rng):
    img = Image.rgb(rng.uniform(0, 1, (10, 10, 3)))
    assert report(img, img).rmse_to_reference == 0.0
    hazy = apply_haze(img, HazeModel(0.5))
    assert report(hazy, img).rmse_to_reference > 0
    with pytest.raises(ShapeMismatchError):
        report(img, Image.rgb(np.zeros((10, 11, 3))))


def test_metrics_non_negative_and_bounded(rng):
    r = report(Image.rgb(rng.uniform(0, 1, (40, 40, 3))), Image.rgb(rng.uniform(0, 1, (40, 40, 3))))
    values = np.array(list(r.as_dict().values()))
    assert np.all(np.isfinite(values)) and np.all(values >= 0)
    assert r.entropy <= 8


def test_flip_invariance(rng):
    img = Image.rgb(rng.uniform(0, 1, (21, 26, 3)))
    ref = report(img).as_dict()
    for flip in (lambda d: d[:, ::-1], lambda d: d[::-1], lambda d: d[::-1, ::-1]):
        other = report(img.with_data(flip(img.data).copy())).as_dict()
        for key, value in ref.items():
            if value is not None:
                assert other[key] == pytest.approx(value, abs=1e-12), key


def test_rmse_symmetric(rng):
    a, b = (Image.rgb(rng.uniform(0, 1, (5, 5, 3))) for _ in range(2))
    assert rmse(a, b) == rmse(b, a)


def test_as_row_format():
    r = MetricReport(1.0, 0.5, 0.25, 0.125, 0.0, 1 / 3, None)
    assert r.as_row() == ["1", "0.5", "0.25", "0.125", "0", "0.3333333333", ""]


def test_haze_examples(rng):
    clean = Image.rgb(rng.uniform(0, 1, (6, 6, 3)))
    np.testing.assert_array_equal(apply_haze(clean, HazeModel(1.0)).data, clean.data)
    almost = apply_haze(clean, HazeModel(1e-9, (0.7, 0.8, 0.9))).data
    np.testing.assert_allclose(almost, np.broadcast_to([0.7, 0.8, 0.9], almost.shape), atol=1e-8)
    black = Image.rgb(np.zeros((3, 3, 3)))
    np.testing.assert_allclose(apply_haze(black, HazeModel(0.5, 1.0)).data, 0.5)


def test_haze_model_validation():
    for t in (0.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            HazeModel(t)
    with pytest.raises(ValueError):
        HazeModel(0.5, 1.2)


def test_haze_per_pixel_convex(rng):
    clean = Image.rgb(rng.uniform(0, 1, (12, 12, 3)))
    t = rng.uniform(0.05, 1.0, (12, 12))
    a = np.array([0.6, 0.8, 0.9])
    out = apply_haze(clean, HazeModel(t, tuple(a))).data
    lo = np.minimum(clean.data, a)
    hi = np.maximum(clean.data, a)
    assert np.all(out >= lo - 1e-15) and np.all(out <= hi + 1e-15)


def test_haze_raises_dark_channel():
    clean = synthetic_scene(0, 64)
    for t in (0.3, 0.7, 0.95):
        assert dark_channel_mean(apply_haze(clean, HazeModel(t, 1.0))) >= dark_channel_mean(clean)


def test_cast_examples(rng):
    clean = Image.rgb(rng.uniform(0, 1, (5, 5, 3)))
    np.testing.assert_array_equal(apply_underwater_cast(clean, (1, 1, 1)).data, clean.data)
    white = Image.rgb(np.ones((3, 3, 3)))
    np.testing.assert_allclose(apply_underwater_cast(white, CAST_PRESETS["green"]).data, np.broadcast_to([0.3, 0.9, 0.8], (3, 3, 3)))
    with pytest.raises(ValueError):
        apply_underwater_cast(clean, (0.0, 1, 1))


def test_cast_then_gray_world(rng):
    g = rng.uniform(0.2, 0.6, (16, 16))
    balanced = Image.rgb(np.stack([g, g[::-1], g.T], axis=2))
    fixed = gray_world_correct(apply_underwater_cast(balanced, CAST_PRESETS["blue"]))
    means = fixed.data.reshape(-1, 3).mean(axis=0)
    assert np.ptp(means) < 1e-12


def test_synthetic_scene_deterministic():
    a, b = synthetic_scene(4), synthetic_scene(4)
    np.testing.assert_array_equal(a.data, b.data)
    assert not np.array_equal(a.data, synthetic_scene(5).data)
    corpus = synthetic_corpus(3, 32, seed=10)
    assert len(corpus) == 3 and corpus[0].shape == (32, 32, 3)
    np.testing.assert_array_equal(corpus[1].data, synthetic_scene(11, 32).data)
    assert a.data.min() >= 0 and a.data.max() <= 1
