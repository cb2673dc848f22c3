#include "vitalcep/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "vitalcep/errors.hpp"

namespace vitalcep::dsp {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

// ---------------------------------------------------------------- filters

FilterSpec FilterSpec::lowpass(double cutoff_hz, int order, double sample_rate_hz) {
    FilterSpec s{FilterKind::lowpass, order, cutoff_hz, 0.0, sample_rate_hz};
    s.validate();
    return s;
}

FilterSpec FilterSpec::highpass(double cutoff_hz, int order, double sample_rate_hz) {
    FilterSpec s{FilterKind::highpass, order, cutoff_hz, 0.0, sample_rate_hz};
    s.validate();
    return s;
}

FilterSpec FilterSpec::bandpass(double low_hz, double high_hz, int order, double sample_rate_hz) {
    FilterSpec s{FilterKind::bandpass, order, low_hz, high_hz, sample_rate_hz};
    s.validate();
    return s;
}

void FilterSpec::validate() const {
    if (sample_rate_hz <= 0.0) throw ConfigError("filter: sample rate must be positive");
    if (order <= 0 || order % 2 != 0) throw ConfigError("filter: order must be a positive even integer");
    double nyq = sample_rate_hz / 2.0;
    if (low_hz <= 0.0 || low_hz >= nyq) throw ConfigError("filter: cutoff must lie in (0, Nyquist)");
    if (kind == FilterKind::bandpass) {
        if (high_hz <= 0.0 || high_hz >= nyq) throw ConfigError("filter: cutoff must lie in (0, Nyquist)");
        if (low_hz >= high_hz) throw ConfigError("filter: bandpass needs low < high");
    }
}

namespace {

// Left-half-plane Butterworth prototype poles, cutoff 1 rad/s.
std::vector<cd> prototype_poles(int n) {
    std::vector<cd> poles;
    poles.reserve(n);
    for (int k = 0; k < n; ++k) {
        double theta = kPi * (2.0 * k + 1.0) / (2.0 * n);
        poles.emplace_back(-std::sin(theta), std::cos(theta));
    }
    return poles;
}

cd bilinear(cd s) { return (1.0 + s) / (1.0 - s); }

// Group a conjugate-closed pole set into pairs for second-order sections.
std::vector<std::pair<cd, cd>> pair_poles(const std::vector<cd>& poles) {
    constexpr double eps = 1e-12;
    std::vector<cd> upper, real;
    for (const cd& p : poles) {
        if (p.imag() > eps)
            upper.push_back(p);
        else if (std::abs(p.imag()) <= eps)
            real.push_back(p);
    }
    std::sort(real.begin(), real.end(), [](cd a, cd b) { return a.real() < b.real(); });
    std::vector<std::pair<cd, cd>> pairs;
    for (const cd& p : upper) pairs.emplace_back(p, std::conj(p));
    for (size_t i = 0; i + 1 < real.size(); i += 2) pairs.emplace_back(real[i], real[i + 1]);
    return pairs;
}

cd eval_section(const Biquad& s, cd z_inv) {
    return (s.b0 + s.b1 * z_inv + s.b2 * z_inv * z_inv) / (1.0 + s.a1 * z_inv + s.a2 * z_inv * z_inv);
}

std::vector<Biquad> design(const FilterSpec& spec) {
    spec.validate();
    double fs = spec.sample_rate_hz;
    double wl = std::tan(kPi * spec.low_hz / fs);  // prewarped

    std::vector<cd> zpoles;
    double b_template[3];
    double ref_omega;  // digital frequency where gain is normalized to 1

    if (spec.kind == FilterKind::lowpass || spec.kind == FilterKind::highpass) {
        bool lp = spec.kind == FilterKind::lowpass;
        for (cd p : prototype_poles(spec.order)) zpoles.push_back(bilinear(lp ? wl * p : wl / p));
        if (lp) {
            b_template[0] = 1.0, b_template[1] = 2.0, b_template[2] = 1.0;  // zeros at z = -1
            ref_omega = 0.0;
        } else {
            b_template[0] = 1.0, b_template[1] = -2.0, b_template[2] = 1.0;  // zeros at z = +1
            ref_omega = kPi;
        }
    } else {
        double wh = std::tan(kPi * spec.high_hz / fs);
        double bw = wh - wl;
        double w0sq = wl * wh;
        // s -> (s^2 + w0^2) / (bw * s) applied to a half-order prototype
        for (cd p : prototype_poles(spec.order / 2)) {
            cd bp = bw * p / 2.0;
            cd d = std::sqrt(bp * bp - w0sq);
            zpoles.push_back(bilinear(bp + d));
            zpoles.push_back(bilinear(bp - d));
        }
        b_template[0] = 1.0, b_template[1] = 0.0, b_template[2] = -1.0;  // zeros at z = +/-1
        ref_omega = 2.0 * std::atan(std::sqrt(w0sq));
    }

    std::vector<Biquad> sections;
    for (auto [p1, p2] : pair_poles(zpoles)) {
        Biquad s{};
        s.b0 = b_template[0];
        s.b1 = b_template[1];
        s.b2 = b_template[2];
        s.a1 = -(p1 + p2).real();
        s.a2 = (p1 * p2).real();
        sections.push_back(s);
    }

    // Spread the normalization gain evenly across sections.
    cd z_inv = std::exp(cd(0.0, -ref_omega));
    cd h = 1.0;
    for (const Biquad& s : sections) h *= eval_section(s, z_inv);
    double g = std::pow(1.0 / std::abs(h), 1.0 / sections.size());
    for (Biquad& s : sections) {
        s.b0 *= g;
        s.b1 *= g;
        s.b2 *= g;
    }
    return sections;
}

void check_stable(const std::vector<Biquad>& sections) {
    for (const Biquad& s : sections) {
        // roots of z^2 + a1 z + a2: product a2, so radius^2 bound is |a2|;
        // check the actual root magnitudes.
        double disc = s.a1 * s.a1 - 4.0 * s.a2;
        double r;
        if (disc >= 0.0) {
            double root = (-s.a1 + (s.a1 >= 0 ? -std::sqrt(disc) : std::sqrt(disc))) / 2.0;
            double other = root != 0.0 ? s.a2 / root : 0.0;
            r = std::max(std::abs(root), std::abs(other));
        } else {
            r = std::sqrt(s.a2);
        }
        if (!(r < 1.0)) throw UnstableDesign("section pole magnitude >= 1");
    }
}

}  // namespace

SosFilter::SosFilter(const FilterSpec& spec) : sections_(design(spec)) { check_stable(sections_); }

SosFilter::SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {
    if (sections_.empty()) throw std::invalid_argument("SosFilter: no sections");
    check_stable(sections_);
}

std::vector<double> SosFilter::apply(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    for (const Biquad& s : sections_) {
        double s1 = 0.0, s2 = 0.0;  // transposed direct form II state
        for (double& v : y) {
            double in = v;
            double out = s.b0 * in + s1;
            s1 = s.b1 * in - s.a1 * out + s2;
            s2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

std::complex<double> SosFilter::response(double hz, double sample_rate_hz) const {
    cd z_inv = std::exp(cd(0.0, -2.0 * kPi * hz / sample_rate_hz));
    cd h = 1.0;
    for (const Biquad& s : sections_) h *= eval_section(s, z_inv);
    return h;
}

std::vector<double> butterworth(std::span<const double> x, const FilterSpec& spec) {
    return SosFilter(spec).apply(x);
}

// ---------------------------------------------------------------- series ops

std::vector<double> minmax_normalize(std::span<const double> x) {
    if (x.size() < 2) throw InsufficientData("minmax_normalize: need at least 2 samples");
    auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
    double mn = *mn_it, mx = *mx_it;
    if (mx == mn) throw DegenerateSignal("minmax_normalize: constant signal");
    std::vector<double> out(x.size());
    double scale = 1.0 / (mx - mn);
    for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mn) * scale;
    return out;
}

std::vector<double> znormalize(std::span<const double> x) {
    if (x.empty()) throw InsufficientData("znormalize: empty input");
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= x.size();
    if (var == 0.0) throw DegenerateSignal("znormalize: zero variance");
    double inv_std = 1.0 / std::sqrt(var);
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv_std;
    return out;
}

std::vector<double> first_difference(std::span<const double> x) {
    if (x.empty()) return {};
    std::vector<double> d(x.size() - 1);
    for (size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
    return d;
}

Extrema zero_crossing_extrema(std::span<const double> d) {
    Extrema ex;
    int last_sign = 0;
    size_t last_nonzero = 0;
    for (size_t i = 0; i < d.size(); ++i) {
        int s = sign_of(d[i]);
        if (s == 0) continue;
        if (last_sign != 0 && s != last_sign) {
            size_t idx = last_nonzero + 1;  // first plateau sample
            if (last_sign > 0)
                ex.maxima.push_back(idx);
            else
                ex.minima.push_back(idx);
        }
        last_sign = s;
        last_nonzero = i;
    }
    return ex;
}

std::vector<size_t> peaks_above(std::span<const double> x, double threshold, size_t refractory_samples) {
    std::vector<double> d = first_difference(x);
    Extrema ex = zero_crossing_extrema(d);
    std::vector<size_t> kept;
    for (size_t i : ex.maxima) {
        if (x[i] <= threshold) continue;
        if (!kept.empty() && i - kept.back() < refractory_samples) {
            if (x[i] > x[kept.back()]) kept.back() = i;
        } else {
            kept.push_back(i);
        }
    }
    return kept;
}

// ---------------------------------------------------------------- spectra

namespace {

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_inplace(std::vector<cd>& a) {
    size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * kPi / static_cast<double>(len);
        cd wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cd w = 1.0;
            for (size_t k = 0; k < len / 2; ++k) {
                cd u = a[i + k];
                cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

}  // namespace

double Spectrum::total_power() const { return band_power(*this, 0.0, nyquist_hz()); }

Spectrum psd(std::span<const double> x, double sample_rate_hz) {
    if (x.size() < 16) throw InsufficientData("psd: need at least 16 samples");
    if (sample_rate_hz <= 0.0) throw std::invalid_argument("psd: sample rate must be positive");
    size_t n = x.size();
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;

    size_t nfft = next_pow2(n);
    std::vector<cd> buf(nfft, cd(0.0, 0.0));
    double wsum_sq = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double w = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n));  // periodic Hann
        wsum_sq += w * w;
        buf[i] = cd((x[i] - mean) * w, 0.0);
    }
    fft_inplace(buf);

    size_t half = nfft / 2;
    Spectrum s;
    s.freqs_hz.resize(half + 1);
    s.power.resize(half + 1);
    double scale = 1.0 / (sample_rate_hz * wsum_sq);
    for (size_t k = 0; k <= half; ++k) {
        double p = std::norm(buf[k]) * scale;
        if (k != 0 && k != half) p *= 2.0;  // one-sided
        s.freqs_hz[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(nfft);
        s.power[k] = p;
    }
    return s;
}

double band_power(const Spectrum& s, double lo_hz, double hi_hz) {
    if (s.freqs_hz.size() < 2) throw InsufficientData("band_power: empty spectrum");
    if (lo_hz < 0.0 || lo_hz >= hi_hz || hi_hz > s.nyquist_hz() + 1e-12)
        throw std::invalid_argument("band_power: need 0 <= lo < hi <= Nyquist");
    hi_hz = std::min(hi_hz, s.nyquist_hz());

    auto value_at = [&](double f, size_t seg) {
        double f0 = s.freqs_hz[seg], f1 = s.freqs_hz[seg + 1];
        double t = (f - f0) / (f1 - f0);
        return s.power[seg] + t * (s.power[seg + 1] - s.power[seg]);
    };

    size_t nseg = s.freqs_hz.size() - 1;
    double total = 0.0;
    for (size_t seg = 0; seg < nseg; ++seg) {
        double f0 = s.freqs_hz[seg], f1 = s.freqs_hz[seg + 1];
        double a = std::max(f0, lo_hz), b = std::min(f1, hi_hz);
        if (a >= b) continue;
        double pa = a == f0 ? s.power[seg] : value_at(a, seg);
        double pb = b == f1 ? s.power[seg + 1] : value_at(b, seg);
        total += (b - a) * (pa + pb) / 2.0;
    }
    return total;
}

}  // namespace vitalcep::dsp
