import numpy as np
import pytest

from sfda.errors import ValidationError
from sfda.features import (MultichannelRecord, WaveletFamily, dwt64, featurize,
                           inverse_wavelet_transform, spectrum,
                           wavelet_transform)


def test_spectrum_constant_curve_dc_only():
    out = spectrum(np.full(64, 3.0), 4)
    np.testing.assert_allclose(out, [192.0, 0.0, 0.0, 0.0], atol=1e-9)


def test_spectrum_pure_cosine_concentrates():
    t = np.arange(64)
    curve = np.cos(2 * np.pi * 5 * t / 64)
    out = spectrum(curve, 32)
    assert out[5] == pytest.approx(32.0, rel=1e-9)
    others = np.delete(out, 5)
    assert others.max() <= 1e-9


def test_spectrum_triangle_inequality():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=100), rng.normal(size=100)
    sa, sb, sab = spectrum(a, 64), spectrum(b, 64), spectrum(a + b, 64)
    assert (sab <= sa + sb + 1e-10).all()


def test_spectrum_zero_pads_to_power_of_two():
    curve = np.ones(125)
    out = spectrum(curve, 64)  # padded to 128
    assert out.shape == (64,)
    assert out[0] == pytest.approx(125.0)
    with pytest.raises(ValidationError):
        spectrum(curve, 129)


def test_haar_constant_signal_single_coarse_coefficient():
    out = dwt64(np.ones(64))
    assert out[0] == pytest.approx(8.0)  # sqrt(64)
    np.testing.assert_allclose(out[1:], 0.0, atol=1e-12)


@pytest.mark.parametrize("family", [WaveletFamily.HAAR, WaveletFamily.D4])
def test_wavelet_round_trip(family):
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.normal(size=64)
        rec = inverse_wavelet_transform(wavelet_transform(x, family), family)
        np.testing.assert_allclose(rec, x, atol=1e-10)


@pytest.mark.parametrize("family", [WaveletFamily.HAAR, WaveletFamily.D4])
def test_wavelet_parseval(family):
    rng = np.random.default_rng(2)
    for _ in range(100):
        x = rng.normal(size=64)
        w = wavelet_transform(x, family)
        assert np.sum(w ** 2) == pytest.approx(np.sum(x ** 2), rel=1e-10)
        assert np.linalg.norm(w) == pytest.approx(np.linalg.norm(x), rel=1e-10)


def test_dwt64_length_check():
    with pytest.raises(ValidationError):
        dwt64(np.ones(32))


def test_wavelet_requires_power_of_two():
    with pytest.raises(ValidationError):
        wavelet_transform(np.ones(48))


def test_featurize_standard_sensor_shape():
    rng = np.random.default_rng(3)
    rec = MultichannelRecord(rng.normal(size=(45, 125)))
    feats = featurize(rec, n_coeff=64)
    assert feats.shape == (2880,)


def test_featurize_narrow_pipeline_shape():
    rng = np.random.default_rng(4)
    rec = MultichannelRecord(rng.normal(size=(22, 90)))
    feats = featurize(rec, n_coeff=16)
    assert feats.shape == (352,)


def test_featurize_single_channel_is_composition():
    rng = np.random.default_rng(5)
    curve = rng.normal(size=125)
    rec = MultichannelRecord(curve[None, :])
    np.testing.assert_array_equal(featurize(rec, 64),
                                  dwt64(spectrum(curve, 64)))


def test_featurize_deterministic():
    rng = np.random.default_rng(6)
    rec = MultichannelRecord(rng.normal(size=(5, 77)))
    np.testing.assert_array_equal(featurize(rec, 32, WaveletFamily.D4),
                                  featurize(rec, 32, WaveletFamily.D4))


def test_record_validation():
    with pytest.raises(ValidationError):
        MultichannelRecord(np.ones((3, 1)))
    with pytest.raises(ValidationError):
        MultichannelRecord(np.array([[1.0, np.inf]]))
