from math import comb

import numpy as np
import pytest

from hazefuse.fractional import GradientField, frac_boost_subband, frac_gradient, gl_coefficients


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_integer_orders_are_binomial_rows(n):
    coeffs = gl_coefficients(n, 7).coeffs
    expected = [(-1) ** k * comb(n, k) for k in range(n + 1)] + [0] * (7 - n)
    assert coeffs.tolist() == expected


def test_examples():
    assert gl_coefficients(1, 3).coeffs.tolist() == [1, -1, 0, 0]
    assert gl_coefficients(2, 3).coeffs.tolist() == [1, -2, 1, 0]
    np.testing.assert_allclose(gl_coefficients(0.5, 3).coeffs, [1, -0.5, -0.125, -0.0625], rtol=0, atol=1e-15)


def test_matches_textbook_recurrence():
    alpha = 0.37
    c = [1.0]
    for k in range(1, 12):
        c.append(c[-1] * (1 - (alpha + 1) / k))
    np.testing.assert_allclose(gl_coefficients(alpha, 11).coeffs, c, rtol=1e-14)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_partial_sums_decrease(alpha):
    sums = [abs(gl_coefficients(alpha, k).coeffs.sum()) for k in range(1, 65)]
    assert all(b < a for a, b in zip(sums, sums[1:]))


def test_first_order_sum_zero():
    for k in range(1, 10):
        assert gl_coefficients(1, k).coeffs.sum() == 0


def test_bad_arguments():
    with pytest.raises(ValueError):
        gl_coefficients(0.5, 0)
    with pytest.raises(ValueError):
        gl_coefficients(0.0, 3)


def test_constant_gives_zero_field():
    f = frac_gradient(np.full((6, 7), 0.8), alpha=1, taps=3)
    assert np.all(f.gx == 0) and np.all(f.gy == 0)


def test_ramp_first_difference():
    s = 0.05
    x = np.tile(np.arange(10) * s, (6, 1))
    f = frac_gradient(x, alpha=1, taps=1)
    np.testing.assert_allclose(f.gx[:, 1:], s, atol=1e-15)
    assert np.all(f.gy == 0)


def test_half_order_on_row_matches_direct_convolution():
    x = np.arange(8, dtype=float)[None, :] * 0.1 + 0.2
    c = [1, -0.5, -0.125, -0.0625]
    f = frac_gradient(x, alpha=0.5, taps=3)
    for j in range(3, 8):
        direct = sum(c[k] * x[0, j - k] for k in range(4))
        assert f.gx[0, j] == pytest.approx(direct, abs=1e-15)


def test_random_image_matches_brute_force(rng):
    x = rng.standard_normal((9, 11))
    c = gl_coefficients(0.7, 4).coeffs
    f = frac_gradient(x, alpha=0.7, taps=4)
    for i in range(4, 9):
        for j in range(4, 11):
            assert f.gx[i, j] == pytest.approx(sum(c[k] * x[i, j - k] for k in range(5)), abs=1e-13)
            assert f.gy[i, j] == pytest.approx(sum(c[k] * x[i - k, j] for k in range(5)), abs=1e-13)


def test_linearity(rng):
    x, y = rng.standard_normal((2, 20, 16))
    a, b = 1.7, -0.4
    lhs = frac_gradient(a * x + b * y)
    fx, fy = frac_gradient(x), frac_gradient(y)
    np.testing.assert_allclose(lhs.gx, a * fx.gx + b * fy.gx, atol=1e-12)
    np.testing.assert_allclose(lhs.gy, a * fx.gy + b * fy.gy, atol=1e-12)


def test_mask_longer_than_image():
    with pytest.raises(ValueError):
        frac_gradient(np.zeros((4, 5)), taps=8)


def test_field_shape_check():
    with pytest.raises(ValueError):
        GradientField(np.zeros((2, 2)), np.zeros((2, 3)))


def test_boost_gain_zero_and_zero_band(rng):
    s = rng.standard_normal((6, 6))
    np.testing.assert_array_equal(frac_boost_subband(s, 0.5, 0.0), s)
    assert np.all(frac_boost_subband(np.zeros((6, 6)), 0.5, 2.0) == 0)
    with pytest.raises(ValueError):
        frac_boost_subband(s, 0.5, -1.0)


def test_boost_impulse_response():
    s = np.zeros((5, 5))
    s[2, 2] = 1.0
    # Hand evaluation of s + (s - s shifted right) + (s - s shifted down).
    expected = np.zeros((5, 5))
    expected[2, 2] = 3.0
    expected[2, 3] = -1.0
    expected[3, 2] = -1.0
    np.testing.assert_array_equal(frac_boost_subband(s, alpha=1, gain=1), expected)


def test_boost_handles_tiny_subbands():
    out = frac_boost_subband(np.full((2, 3), 0.5), 0.5, 0.3, taps=8)
    assert out.shape == (2, 3) and np.all(np.isfinite(out))
