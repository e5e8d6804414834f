import numpy as np
import pytest

from hazefuse.errors import (
    ColorSpaceError,
    CorruptImageError,
    DegenerateInputError,
    UnreadableFileError,
    UnsupportedFormatError,
    UnwritablePathError,
    ZeroDimensionError,
)
from hazefuse.image_core import (
    ColorSpace,
    Image,
    gray_world_correct,
    load_image,
    luminance,
    percentile_stretch,
    rgb_to_xyz,
    save_image,
    xyz_to_rgb,
)

from conftest import random_rgb


def _ppm(w, h, payload, maxval=255):
    return f"P6\n{w} {h}\n{maxval}\n".encode() + bytes(payload)


# -- loading ---------------------------------------------------------------


def test_load_white_ppm(tmp_path):
    p = tmp_path / "white.ppm"
    p.write_bytes(_ppm(2, 2, [255] * 12))
    img = load_image(p)
    assert img.shape == (2, 2, 3)
    assert img.space is ColorSpace.SRGB
    assert np.all(img.data == 1.0)


def test_load_black_png(tmp_path):
    p = tmp_path / "black.png"
    save_image(Image.rgb(np.zeros((4, 5, 3))), p)
    img = load_image(p)
    assert np.all(img.data == 0.0)


def test_load_gray_pgm(tmp_path):
    p = tmp_path / "g.pgm"
    p.write_bytes(b"P5\n# comment\n3 1\n255\n" + bytes([0, 128, 255]))
    img = load_image(p)
    assert img.space is ColorSpace.GRAY
    np.testing.assert_array_equal(img.plane(0), [[0, 128 / 255, 1.0]])


def test_truncated_ppm(tmp_path):
    p = tmp_path / "t.ppm"
    p.write_bytes(_ppm(4, 4, [1] * 20))
    with pytest.raises(CorruptImageError):
        load_image(p)


def test_truncated_png(tmp_path):
    full = tmp_path / "full.png"
    save_image(Image.rgb(np.full((16, 16, 3), 0.3)), full)
    cut = tmp_path / "cut.png"
    cut.write_bytes(full.read_bytes()[:40])
    with pytest.raises(CorruptImageError):
        load_image(cut)


def test_error_kinds_are_distinct(tmp_path):
    with pytest.raises(UnreadableFileError):
        load_image(tmp_path / "missing.png")
    txt = tmp_path / "notes.txt"
    txt.write_text("hello")
    with pytest.raises(UnsupportedFormatError):
        load_image(txt)
    zero = tmp_path / "zero.ppm"
    zero.write_bytes(_ppm(0, 3, []))
    with pytest.raises(ZeroDimensionError):
        load_image(zero)
    deep = tmp_path / "deep.ppm"
    deep.write_bytes(_ppm(1, 1, [0] * 6, maxval=65535))
    with pytest.raises(UnsupportedFormatError):
        load_image(deep)


# -- saving ----------------------------------------------------------------


def test_save_half_gray_decodes_to_128(tmp_path):
    p = tmp_path / "half.png"
    save_image(Image.rgb(np.full((3, 3, 3), 0.5)), p)
    assert np.all(load_image(p).data == 128 / 255)


def test_save_clamps(tmp_path):
    p = tmp_path / "c.ppm"
    img = Image.rgb(np.array([[[1.2, -0.3, 0.5]]]))
    save_image(img, p)
    assert p.read_bytes()[-3:] == bytes([255, 0, 128])


@pytest.mark.parametrize("ext", [".png", ".ppm"])
def test_all_codes_round_trip_exactly(tmp_path, ext):
    codes = np.arange(256, dtype=np.float64).reshape(16, 16) / 255.0
    img = Image.rgb(np.stack([codes, codes[::-1], codes.T], axis=2))
    p = tmp_path / f"codes{ext}"
    save_image(img, p)
    np.testing.assert_array_equal(load_image(p).data, img.data)


def test_gray_codes_round_trip_pgm(tmp_path):
    img = Image.gray(np.arange(256.0).reshape(16, 16) / 255.0)
    p = tmp_path / "codes.pgm"
    save_image(img, p)
    np.testing.assert_array_equal(load_image(p).data, img.data)


def test_random_round_trip_error(tmp_path, rng):
    img = random_rgb(rng, 20, 30)
    p = tmp_path / "r.png"
    save_image(img, p)
    assert np.max(np.abs(load_image(p).data - img.data)) <= 1 / 510 + 1e-12


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(UnwritablePathError):
        save_image(Image.rgb(np.zeros((2, 2, 3))), blocker / "out.png")


# -- colour spaces ---------------------------------------------------------


def _xyz_of(rgb):
    return rgb_to_xyz(Image.rgb(np.array(rgb, dtype=float).reshape(1, 1, 3))).data[0, 0]


def test_xyz_reference_points():
    np.testing.assert_allclose(_xyz_of([0, 0, 0]), [0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(_xyz_of([1, 1, 1]), [0.9505, 1.0, 1.0890], atol=1e-3)
    np.testing.assert_allclose(_xyz_of([0, 1, 0]), [0.3576, 0.7152, 0.1192], atol=1e-3)


def test_xyz_round_trip(rng):
    img = random_rgb(rng, 40, 40)
    back = xyz_to_rgb(rgb_to_xyz(img))
    assert back.space is ColorSpace.SRGB
    assert np.sqrt(np.mean((back.data - img.data) ** 2)) < 1e-6
    xyz = rgb_to_xyz(img)
    again = rgb_to_xyz(xyz_to_rgb(xyz))
    assert np.sqrt(np.mean((again.data - xyz.data) ** 2)) < 1e-6


def test_xyz_black_and_out_of_gamut():
    black = xyz_to_rgb(Image(np.zeros((1, 1, 3)), ColorSpace.XYZ))
    assert np.all(black.data == 0)
    wild = Image(np.array([[[2.0, -0.5, 3.0], [0.1, 0.9, 0.0]]]), ColorSpace.XYZ)
    out = xyz_to_rgb(wild).data
    assert out.min() >= 0 and out.max() <= 1


def test_xyz_y_in_unit_range(rng):
    y = rgb_to_xyz(random_rgb(rng)).plane(1)
    assert y.min() >= 0 and y.max() <= 1 + 1e-12


def test_color_space_tag_checks():
    with pytest.raises(ColorSpaceError):
        rgb_to_xyz(Image.gray(np.zeros((2, 2))))
    with pytest.raises(ColorSpaceError):
        xyz_to_rgb(Image.rgb(np.zeros((2, 2, 3))))
    with pytest.raises(ColorSpaceError):
        Image(np.zeros((2, 2, 3)), ColorSpace.GRAY)


def test_luminance_examples():
    px = np.array([[[0.5, 0.5, 0.5], [1, 0, 0], [0, 0, 0]]])
    np.testing.assert_allclose(luminance(Image.rgb(px)).plane(0), [[0.5, 0.2126, 0.0]], atol=1e-15)
    with pytest.raises(ColorSpaceError):
        luminance(Image.gray(np.zeros((2, 2))))


# -- colour correction -----------------------------------------------------


def test_gray_world_balanced_is_unchanged(rng):
    g = rng.uniform(0.1, 0.9, (8, 8))
    img = Image.rgb(np.stack([g, g[::-1], g.T], axis=2))
    np.testing.assert_allclose(gray_world_correct(img).data, img.data, atol=1e-12)


def test_gray_world_constant_closed_form():
    img = Image.rgb(np.tile([0.2, 0.5, 0.3], (4, 4, 1)))
    np.testing.assert_allclose(gray_world_correct(img).data, 1 / 3, atol=1e-15)


def test_gray_world_zero_channel():
    data = np.full((4, 4, 3), 0.4)
    data[:, :, 1] = 0
    with pytest.raises(DegenerateInputError):
        gray_world_correct(Image.rgb(data))


def test_gray_world_idempotent(rng):
    img = Image.rgb(rng.uniform(0.1, 0.5, (16, 16, 3)))
    once = gray_world_correct(img)
    np.testing.assert_allclose(gray_world_correct(once).data, once.data, atol=1e-9)


def test_percentile_full_range():
    plane = np.linspace(0.25, 0.75, 64).reshape(8, 8)
    out = percentile_stretch(Image.gray(plane), 0, 100).plane(0)
    assert out.min() == 0.0 and out.max() == 1.0


def test_percentile_constant_channel():
    data = np.zeros((5, 5, 3))
    data[:, :, 0] = 0.3
    data[:, :, 1] = np.linspace(0, 1, 25).reshape(5, 5)
    out = percentile_stretch(Image.rgb(data)).data
    assert np.all(out[:, :, 0] == 0.3)
    assert np.all(out[:, :, 2] == 0.0)


def test_percentile_ramp_saturation():
    # Oracle: on a 101-sample ramp the 1st/99th percentiles sit exactly at
    # samples 1 and 99, so samples {0, 1} and {99, 100} saturate.
    ramp = np.linspace(0, 1, 101).reshape(1, 101)
    out = percentile_stretch(Image.gray(ramp), 1, 99).plane(0)[0]
    assert np.count_nonzero(out == 0.0) == 2
    assert np.count_nonzero(out == 1.0) == 2


def test_percentile_bad_bounds():
    with pytest.raises(ValueError):
        percentile_stretch(Image.gray(np.zeros((2, 2))), 50, 10)
