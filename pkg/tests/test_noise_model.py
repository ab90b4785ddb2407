import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from zeno_sim.errors import DomainError
from zeno_sim.noise_model import (
    SERIES_THRESHOLD,
    LorentzianComponent,
    NoiseSpectrum,
    _shape_factor,
    decoherence_exponent,
    decoherence_rate,
    lorentzian_psd,
    make_arithmetic_spectrum,
    mixture_correlation,
    mixture_psd,
    psd_slope_fit,
    reference_power_law,
)

# Frozen from a 40-digit mpmath term-by-term summation over the
# 1000-component grid (gamma_k = k, alpha = 1.5, Delta = 200).
REF_CORR_1MS = 38529.280218474630878
REF_RATE = {
    1e-4: 1.9968213728549642236,
    1e-3: 19.721250565919079588,
    5e-3: 95.099282402020302833,
    1e-2: 184.58631753850692084,
    1e-1: 1461.9195880717159157,
    1.0: 6642.2588726767227594,
}
# Same spectrum, cosine transform of the correlation function at f = 10/pi Hz
# (scipy QAWF quadrature, abs. error ~2e-10).
REF_PSD_10_OVER_PI = 872.8585766540328

spectra = st.builds(
    make_arithmetic_spectrum,
    amplitude_delta=st.floats(0.1, 1e3),
    alpha=st.floats(0.05, 1.95),
    gamma1=st.floats(0.01, 1e3),
    step_delta=st.floats(0.01, 1e3),
    count_m=st.integers(1, 40),
)


def test_default_grid(default_spec):
    assert default_spec.size == 1000
    np.testing.assert_array_equal(default_spec.gammas, np.arange(1, 1001))
    assert default_spec.amplitude_delta == 200.0
    assert default_spec.alpha == 1.5


def test_single_component():
    s = make_arithmetic_spectrum(1.0, 1.0, 5.0, 1.0, 1)
    assert s.components == (LorentzianComponent(5.0, 0.2),)
    assert s.normalization == pytest.approx(0.2, rel=1e-15)
    np.testing.assert_allclose(s.norm_weights, [1.0])


def test_two_components():
    s = make_arithmetic_spectrum(1.0, 1.5, 1.0, 1.0, 2)
    np.testing.assert_allclose([c.weight for c in s.components], [1.0, 2**-1.5], rtol=1e-15)
    assert s.normalization == pytest.approx(1 + 2**-1.5, rel=1e-15)


@pytest.mark.parametrize(
    "args",
    [
        (0.0, 1.5, 1, 1, 10),
        (1.0, 0.0, 1, 1, 10),
        (1.0, 2.0, 1, 1, 10),
        (1.0, 2.5, 1, 1, 10),
        (1.0, 1.5, 0, 1, 10),
        (1.0, 1.5, 1, -1, 10),
        (1.0, 1.5, 1, 1, 0),
        (1.0, 1.5, 1, 1, 2.5),
    ],
)
def test_make_spectrum_rejects_bad_parameters(args):
    with pytest.raises(DomainError):
        make_arithmetic_spectrum(*args)


def test_spectrum_requires_increasing_gammas():
    comps = (LorentzianComponent(2.0, 1.0), LorentzianComponent(1.0, 1.0))
    with pytest.raises(DomainError):
        NoiseSpectrum(1.0, 1.0, comps)
    with pytest.raises(DomainError):
        LorentzianComponent(-1.0, 1.0)


def test_lorentzian_psd_examples():
    c = LorentzianComponent(100.0, 1.0)
    assert lorentzian_psd(c, 200.0, 0.0) == pytest.approx(400.0, rel=1e-15)
    assert lorentzian_psd(c, 200.0, 100.0 / np.pi) == pytest.approx(200.0, rel=1e-14)
    assert lorentzian_psd(c, 200.0, 3.0) == lorentzian_psd(c, 200.0, -3.0)
    # tail ~ (gamma / pi**2) f**-2
    one = LorentzianComponent(1.0, 1.0)
    f = 1e6
    assert lorentzian_psd(one, 1.0, f) * f**2 == pytest.approx(1 / np.pi**2, rel=1e-10)


def test_correlation_examples(single, default_spec):
    assert mixture_correlation(single, 0.3, 0.3) == pytest.approx(1.0, rel=1e-15)
    assert mixture_correlation(single, 0.0, 0.1) == pytest.approx(math.exp(-1), rel=1e-15)
    assert mixture_correlation(default_spec, 0.2, 0.2) == pytest.approx(4e4, rel=1e-12)
    assert mixture_correlation(default_spec, 0.0, 1e-3) == pytest.approx(REF_CORR_1MS, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(spectra, st.floats(-10, 10), st.floats(-10, 10))
def test_correlation_normalized_and_stationary(spec, t1, t2):
    d2 = spec.amplitude_delta**2
    assert mixture_correlation(spec, t1, t1) == pytest.approx(d2, rel=1e-12)
    c12 = mixture_correlation(spec, t1, t2)
    assert c12 == mixture_correlation(spec, t2, t1)
    assert c12 == mixture_correlation(spec, 0.0, abs(t1 - t2))
    assert c12 >= 0


@settings(max_examples=40, deadline=None)
@given(spectra)
def test_normalization_matches_weight_sum(spec):
    raw = math.fsum(c.weight for c in spec.components)
    assert spec.normalization == pytest.approx(raw, rel=1e-12)


def test_mixture_psd_degenerate(single):
    f = np.array([0.0, 0.7, 3.0, 40.0])
    np.testing.assert_allclose(
        mixture_psd(single, f), lorentzian_psd(single.components[0], 1.0, f), rtol=1e-15
    )
    np.testing.assert_array_equal(mixture_psd(single, f), mixture_psd(single, -f))


def _cosine_transform(spec, f):
    """Independent oracle: S(f) = 2 * int_0^inf C(s) cos(2 pi f s) ds."""
    val, _ = integrate.quad(
        lambda s: float(spec.correlation(s)), 0, np.inf, weight="cos", wvar=2 * np.pi * f, limlst=200
    )
    return 2 * val


def test_mixture_psd_frozen_fourier_value(default_spec):
    assert mixture_psd(default_spec, 10 / np.pi) == pytest.approx(REF_PSD_10_OVER_PI, rel=1e-10)


@pytest.mark.parametrize("f", [1 / np.pi, 10 / np.pi, 50 / np.pi, 300 / np.pi, 1000 / np.pi])
def test_wiener_khinchin_spot_check(default_spec, f):
    assert mixture_psd(default_spec, f) == pytest.approx(_cosine_transform(default_spec, f), rel=1e-2)


def test_psd_slope_examples(default_spec, single):
    assert psd_slope_fit(default_spec, 1 / np.pi, 1000 / np.pi, 50) == pytest.approx(-1.5, abs=0.1)
    # deep in the f^-2 tail of a gamma = 5 Lorentzian
    assert psd_slope_fit(single, 1e3, 1e5, 30) == pytest.approx(-2.0, abs=1e-3)
    # far below the knee gamma/pi
    assert psd_slope_fit(single, 1e-4, 1e-2, 30) == pytest.approx(0.0, abs=1e-3)


@pytest.mark.parametrize("lo,hi,n", [(0, 1, 10), (2, 1, 10), (1, 2, 1), (-1, 2, 5)])
def test_psd_slope_rejects_bad_range(single, lo, hi, n):
    with pytest.raises(DomainError):
        psd_slope_fit(single, lo, hi, n)


def test_reference_power_law_anchor(default_spec):
    lo, hi = 1 / np.pi, 1000 / np.pi
    mid = np.sqrt(lo * hi)
    assert reference_power_law(default_spec, mid, lo, hi) == pytest.approx(float(default_spec.psd(mid)), rel=1e-14)
    r = reference_power_law(default_spec, np.array([1.0, 10.0]), lo, hi)
    assert np.log10(r[1] / r[0]) == pytest.approx(-1.5, rel=1e-12)


# -- decoherence rate -------------------------------------------------------

@pytest.mark.parametrize("t,expected", sorted(REF_RATE.items()))
def test_rate_matches_high_precision_sum(default_spec, t, expected):
    assert decoherence_rate(default_spec, t) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("t", [1e-4, 2e-3, 3e-2])
def test_rate_matches_double_integral_definition(default_spec, t):
    # Gamma(t) = (1/2t) int_0^t int_0^t C(t1 - t2) = (1/t) int_0^t (t - s) C(s) ds
    val, _ = integrate.quad(lambda s: (t - s) * float(default_spec.correlation(s)), 0, t,
                            limit=200, epsabs=0, epsrel=1e-12)
    assert decoherence_rate(default_spec, t) == pytest.approx(val / t, rel=1e-9)


def test_rate_limits():
    gamma, delta = 5.0, 3.0
    s = make_arithmetic_spectrum(delta, 1.0, gamma, 1.0, 1)
    assert decoherence_rate(s, 1e6) == pytest.approx(delta**2 / (2 * gamma), rel=1e-6)
    t = 1e-9
    assert decoherence_rate(s, t) / t == pytest.approx(delta**2 / 2, rel=1e-8)


def test_rate_short_time_limit_default(default_spec):
    # max_k 2 gamma_k t = 2e-5 <= 1e-4
    t = 1e-8
    assert decoherence_rate(default_spec, t) / t == pytest.approx(200.0**2 / 2, rel=1e-6)


def test_rate_long_time_limit_general(default_spec):
    t = 1e3 / (2 * default_spec.gammas[0])
    assert decoherence_rate(default_spec, t) == pytest.approx(default_spec.long_time_rate, rel=1e-3)


def test_rate_rejects_non_positive_time(default_spec):
    with pytest.raises(DomainError):
        decoherence_rate(default_spec, 0.0)
    with pytest.raises(DomainError):
        decoherence_rate(default_spec, -1.0)


def test_rate_monotone_on_grid(default_spec):
    r = decoherence_rate(default_spec, np.geomspace(1e-6, 10, 400))
    assert np.all(np.diff(r) > 0)


@settings(max_examples=50, deadline=None)
@given(spectra, st.floats(1e-7, 10), st.floats(1.0001, 100))
def test_rate_monotone_property(spec, t1, factor):
    assert decoherence_rate(spec, t1 * factor) >= decoherence_rate(spec, t1)
    assert decoherence_rate(spec, t1) > 0


def test_series_and_direct_agree_at_threshold():
    x = SERIES_THRESHOLD
    direct = (x + np.expm1(-x)) / x**2
    below = float(_shape_factor(np.nextafter(x, 0), 1.0))
    at = float(_shape_factor(x, 1.0))
    assert at == pytest.approx(direct, rel=1e-10)
    assert below == pytest.approx(direct, rel=1e-10)


def test_exponent_examples(default_spec, single):
    assert decoherence_exponent(default_spec, 0.0) == 0.0
    t = 1e-7
    assert decoherence_exponent(default_spec, t) == pytest.approx(200.0**2 * t**2 / 2, rel=1e-4)
    assert decoherence_exponent(default_spec, 5e-3) == pytest.approx(REF_RATE[5e-3] * 5e-3, rel=1e-12)
    t = np.linspace(0, 0.1, 101)
    e = decoherence_exponent(single, t)
    assert np.all(np.diff(e) >= 0) and e[0] == 0
    with pytest.raises(DomainError):
        decoherence_exponent(default_spec, -1e-3)


def test_spectrum_is_immutable(default_spec):
    with pytest.raises(Exception):
        default_spec.alpha = 1.0
    with pytest.raises(ValueError):
        default_spec.gammas[0] = 3.0
