#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "support/helpers.hpp"
#include "support/oracles.hpp"
#include "vitalcep/dsp.hpp"
#include "vitalcep/errors.hpp"

using namespace vitalcep;
using namespace vitalcep::dsp;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> sine(double hz, double fs, size_t n, double amp = 1.0) {
    std::vector<double> x(n);
    for (size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * hz * i / fs);
    return x;
}

double rms(std::span<const double> x, size_t from = 0) {
    double acc = 0.0;
    for (size_t i = from; i < x.size(); ++i) acc += x[i] * x[i];
    return std::sqrt(acc / static_cast<double>(x.size() - from));
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("minmax_normalize maps onto [0,1]") {
    auto y = minmax_normalize(std::vector<double>{1, 2, 3});
    CHECK(y == std::vector<double>{0.0, 0.5, 1.0});

    CHECK_THROWS_AS(minmax_normalize(std::vector<double>{5, 5, 5}), DegenerateSignal);
    CHECK_THROWS_AS(minmax_normalize(std::vector<double>{5}), InsufficientData);

    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::vector<double> x(257);
    for (auto& v : x) v = u(testutil::rng());
    auto n = minmax_normalize(x);
    CHECK(*std::min_element(n.begin(), n.end()) == 0.0);
    CHECK(*std::max_element(n.begin(), n.end()) == 1.0);
    // order statistics preserved
    for (size_t i = 1; i < x.size(); ++i)
        CHECK((x[i] < x[i - 1]) == (n[i] < n[i - 1]));
    // idempotent
    auto nn = minmax_normalize(n);
    for (size_t i = 0; i < n.size(); ++i) CHECK(nn[i] == doctest::Approx(n[i]).epsilon(1e-12));
}

TEST_CASE("znormalize centers and scales") {
    auto y = znormalize(std::vector<double>{0, 2});
    CHECK(y[0] == doctest::Approx(-1.0));
    CHECK(y[1] == doctest::Approx(1.0));

    std::vector<double> x(500);
    std::normal_distribution<double> g(3.0, 7.0);
    for (auto& v : x) v = g(testutil::rng());
    auto z = znormalize(x);
    double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= z.size();
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(var - 1.0) < 1e-12);

    CHECK_THROWS_AS(znormalize(std::vector<double>{4, 4, 4}), DegenerateSignal);
    CHECK_THROWS_AS(znormalize(std::vector<double>{}), InsufficientData);
}

TEST_CASE("first_difference") {
    CHECK(first_difference(std::vector<double>{1, 1, 1}) == std::vector<double>{0, 0});
    CHECK(first_difference(std::vector<double>{0, 1, 2, 3}) == std::vector<double>{1, 1, 1});

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(100);
    for (auto& v : x) v = u(testutil::rng());
    auto d = first_difference(x);
    REQUIRE(d.size() == 99);
    CHECK(std::accumulate(d.begin(), d.end(), 0.0) ==
          doctest::Approx(x.back() - x.front()).epsilon(1e-12));
}

TEST_CASE("zero_crossing_extrema finds sign changes") {
    auto e = zero_crossing_extrema(std::vector<double>{1, -1});
    CHECK(e.maxima == std::vector<size_t>{1});
    CHECK(e.minima.empty());

    CHECK(zero_crossing_extrema(std::vector<double>{1, 1, 1}).maxima.empty());
    CHECK(zero_crossing_extrema(std::vector<double>{1, 1, 1}).minima.empty());

    // plateau reports its first sample: x = 0 1 1 1 0
    auto p = zero_crossing_extrema(std::vector<double>{1, 0, 0, -1});
    CHECK(p.maxima == std::vector<size_t>{1});

    // two periods of a sine: extrema at quarter periods +-1 sample
    auto x = sine(2.0, 100.0, 100);
    auto d = first_difference(x);
    auto s = zero_crossing_extrema(d);
    REQUIRE(s.maxima.size() == 2);
    REQUIRE(s.minima.size() == 2);
    CHECK(std::abs(static_cast<double>(s.maxima[0]) - 12.5) <= 1.0);
    CHECK(std::abs(static_cast<double>(s.minima[0]) - 37.5) <= 1.0);
    CHECK(std::abs(static_cast<double>(s.maxima[1]) - 62.5) <= 1.0);
}

TEST_CASE("peaks_above keeps the larger peak inside the refractory span") {
    std::vector<double> x(200, 0.0);
    x[50] = 1.0;
    CHECK(peaks_above(x, 0.9, 100) == std::vector<size_t>{50});

    std::vector<double> pair(200, 0.0);
    pair[30] = 0.95;
    pair[55] = 0.92;  // 25 samples = 50 ms at 500 Hz, inside a 200 ms refractory
    CHECK(peaks_above(pair, 0.9, 100) == std::vector<size_t>{30});

    std::vector<double> low(64, 0.0);
    low[10] = 0.85;
    CHECK(peaks_above(low, 0.9, 8).empty());
}

TEST_CASE("peaks_above output is sorted with enforced spacing") {
    std::vector<double> x(2000, 0.0);
    std::uniform_int_distribution<size_t> pos(1, 1998);
    std::uniform_real_distribution<double> amp(0.5, 1.0);
    for (int i = 0; i < 60; ++i) x[pos(testutil::rng())] = amp(testutil::rng());
    auto peaks = peaks_above(x, 0.9, 50);
    for (size_t i = 0; i < peaks.size(); ++i) {
        CHECK(x[peaks[i]] > 0.9);
        if (i) CHECK(peaks[i] - peaks[i - 1] >= 50);
    }
}

TEST_CASE("psd matches a direct DFT evaluation") {
    auto check_against_oracle = [](const std::vector<double>& x, double fs) {
        auto fast = psd(x, fs);
        auto slow = oracle::psd(x, fs);
        REQUIRE(fast.power.size() == slow.power.size());
        for (size_t k = 0; k < fast.power.size(); ++k) {
            CHECK(fast.freqs_hz[k] == doctest::Approx(slow.freqs_hz[k]).epsilon(1e-12));
            CHECK(close(fast.power[k], slow.power[k], 1e-9));
        }
    };

    check_against_oracle(sine(7.5, 64.0, 256), 64.0);  // exact bin, no padding

    std::vector<double> noisy(100);  // padded to 128
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& v : noisy) v = g(testutil::rng());
    check_against_oracle(noisy, 10.0);

    std::vector<double> mixed(300);  // padded to 512, multiple tones + offset
    for (size_t i = 0; i < mixed.size(); ++i)
        mixed[i] = 5.0 + std::sin(2 * kPi * 3.0 * i / 50.0) + 0.4 * std::cos(2 * kPi * 11.0 * i / 50.0);
    check_against_oracle(mixed, 50.0);
}

TEST_CASE("psd concentrates a pure tone in one bin") {
    auto s = psd(sine(7.5, 64.0, 256), 64.0);
    size_t peak = std::max_element(s.power.begin(), s.power.end()) - s.power.begin();
    CHECK(s.freqs_hz[peak] == doctest::Approx(7.5));
    double total = std::accumulate(s.power.begin(), s.power.end(), 0.0);
    double near = s.power[peak - 1] + s.power[peak] + s.power[peak + 1];
    CHECK(near / total > 0.99);
}

TEST_CASE("psd is Parseval-consistent for noise") {
    std::vector<double> x(4096);
    std::normal_distribution<double> g(0.0, 2.0);
    for (auto& v : x) v = g(testutil::rng());
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= x.size();
    auto s = psd(x, 100.0);
    CHECK(s.total_power() == doctest::Approx(var).epsilon(0.15));
}

TEST_CASE("psd edge conditions") {
    CHECK_THROWS_AS(psd(std::vector<double>(15, 1.0), 10.0), InsufficientData);
    auto flat = psd(std::vector<double>(64, 3.25), 10.0);  // constant: mean removal zeroes it
    for (double p : flat.power) CHECK(p == 0.0);
    auto s = psd(sine(5.0, 50.0, 128), 50.0);
    for (double p : s.power) CHECK(p >= 0.0);
}

TEST_CASE("band_power integrates exactly and additively") {
    auto s = psd(sine(5.0, 50.0, 512, 2.0), 50.0);

    double lo = 2.0, mid = 7.5, hi = 20.0;
    double left = band_power(s, lo, mid);
    double right = band_power(s, mid, hi);
    CHECK(close(left + right, band_power(s, lo, hi), 1e-12));

    CHECK(band_power(s, 0.0, s.nyquist_hz()) == doctest::Approx(s.total_power()));
    CHECK(band_power(s, lo, hi) >= band_power(s, lo, hi - 1.0));

    // sub-bin interval: trapezoid of the linear interpolation, hand-computed
    double f0 = s.freqs_hz[10], df = s.bin_hz();
    double a = f0 + 0.25 * df, b = f0 + 0.75 * df;
    double pa = s.power[10] + 0.25 * (s.power[11] - s.power[10]);
    double pb = s.power[10] + 0.75 * (s.power[11] - s.power[10]);
    CHECK(band_power(s, a, b) == doctest::Approx(0.5 * (pa + pb) * (b - a)).epsilon(1e-12));
}

TEST_CASE("filter spec validation") {
    CHECK_THROWS_AS(SosFilter(FilterSpec::lowpass(40.0, 3, 500.0)), ConfigError);   // odd order
    CHECK_THROWS_AS(SosFilter(FilterSpec::lowpass(40.0, 0, 500.0)), ConfigError);
    CHECK_THROWS_AS(SosFilter(FilterSpec::lowpass(0.0, 4, 500.0)), ConfigError);    // cutoff at DC
    CHECK_THROWS_AS(SosFilter(FilterSpec::lowpass(250.0, 4, 500.0)), ConfigError);  // at Nyquist
    CHECK_THROWS_AS(SosFilter(FilterSpec::bandpass(40.0, 0.5, 4, 500.0)), ConfigError);
    CHECK_THROWS_AS(SosFilter(FilterSpec::bandpass(0.5, 40.0, 4, 0.0)), ConfigError);
}

TEST_CASE("lowpass passes DC") {
    SosFilter f(FilterSpec::lowpass(40.0, 4, 500.0));
    std::vector<double> dc(2000, 1.0);
    auto y = f.apply(dc);
    REQUIRE(y.size() == dc.size());
    CHECK(y.back() == doctest::Approx(1.0).epsilon(1e-6));

    auto z = f.apply(std::vector<double>(100, 0.0));
    for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("filtering is linear") {
    SosFilter f(FilterSpec::bandpass(0.5, 40.0, 4, 500.0));
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(500), y(500), mix(500);
    for (size_t i = 0; i < 500; ++i) {
        x[i] = g(testutil::rng());
        y[i] = g(testutil::rng());
        mix[i] = 2.5 * x[i] - 1.25 * y[i];
    }
    auto fx = f.apply(x), fy = f.apply(y), fmix = f.apply(mix);
    for (size_t i = 0; i < 500; ++i)
        CHECK(fmix[i] == doctest::Approx(2.5 * fx[i] - 1.25 * fy[i]).epsilon(1e-9));
}

TEST_CASE("bandpass magnitude response") {
    SosFilter f(FilterSpec::bandpass(0.5, 40.0, 4, 500.0));
    CHECK(std::abs(f.response(0.5, 500.0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(std::abs(f.response(40.0, 500.0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(std::abs(f.response(10.0, 500.0)) > 0.99);
    CHECK(std::abs(f.response(0.05, 500.0)) < 0.1);
}

TEST_CASE("mains-frequency attenuation, derived from the analog prototype") {
    // Order-4 bandpass 0.5-40 at 500 Hz comes from an order-2 lowpass
    // prototype. At 60 Hz the normalized detune is
    //   omega = (f^2 - fl*fh) / (f * (fh - fl))
    // and |H| = 1/sqrt(1 + omega^(2*2)) ~ 0.40: a gentle skirt, nowhere near
    // a stopband. The digital (bilinear, prewarped) design lands close by.
    double omega = (60.0 * 60.0 - 0.5 * 40.0) / (60.0 * (40.0 - 0.5));
    double analog = 1.0 / std::sqrt(1.0 + std::pow(omega, 4.0));
    CHECK(analog == doctest::Approx(0.4014).epsilon(1e-3));

    SosFilter f4(FilterSpec::bandpass(0.5, 40.0, 4, 500.0));
    double h60 = std::abs(f4.response(60.0, 500.0));
    CHECK(h60 == doctest::Approx(analog).epsilon(0.06));

    // measured steady-state RMS agrees with the frequency response
    auto x = sine(60.0, 500.0, 5000);
    auto y = f4.apply(x);
    double ratio = rms(std::span(y).subspan(1000)) / rms(std::span(x).subspan(1000));
    CHECK(ratio == doctest::Approx(h60).epsilon(2e-3));
    CHECK(ratio > 0.3);  // order 4 genuinely does not suppress mains hum

    // a 10x rejection at 60 Hz needs an order-12 design
    SosFilter f12(FilterSpec::bandpass(0.5, 40.0, 12, 500.0));
    CHECK(std::abs(f12.response(60.0, 500.0)) < 0.1);
}

TEST_CASE("odd half-order bandpass designs work") {
    SosFilter f6(FilterSpec::bandpass(0.5, 40.0, 6, 500.0));  // prototype order 3
    CHECK(std::abs(f6.response(10.0, 500.0)) > 0.99);
    CHECK(std::abs(f6.response(0.5, 500.0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("unstable sections are rejected") {
    // complex pole pair with radius sqrt(1.00001) > 1
    CHECK_THROWS_AS(SosFilter({Biquad{1.0, 0.0, 0.0, -2.0, 1.00001}}), UnstableDesign);
    CHECK_NOTHROW(SosFilter({Biquad{1.0, 0.0, 0.0, -1.0, 0.25}}));
}

TEST_CASE("butterworth convenience wrapper") {
    auto spec = FilterSpec::bandpass(0.5, 40.0, 4, 500.0);
    auto x = sine(10.0, 500.0, 300);
    CHECK(butterworth(x, spec) == SosFilter(spec).apply(x));
}

}  // TEST_SUITE
