#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vitalcep::dsp {

enum class FilterKind { lowpass, highpass, bandpass };

// Butterworth design request. `order` is the number of poles of the final
// digital filter and must be even (bandpass additionally needs order % 4 == 0
// or an odd half-order prototype, both are supported).
struct FilterSpec {
    FilterKind kind = FilterKind::lowpass;
    int order = 4;
    double low_hz = 0.0;   // lowpass/highpass: the cutoff; bandpass: lower edge
    double high_hz = 0.0;  // bandpass only: upper edge
    double sample_rate_hz = 0.0;

    static FilterSpec lowpass(double cutoff_hz, int order, double sample_rate_hz);
    static FilterSpec highpass(double cutoff_hz, int order, double sample_rate_hz);
    static FilterSpec bandpass(double low_hz, double high_hz, int order, double sample_rate_hz);

    void validate() const;  // throws ConfigError on violated invariants
};

struct Biquad {
    double b0, b1, b2;  // numerator
    double a1, a2;      // denominator (a0 == 1)
};

// Cascaded second-order-section IIR filter, causal, zero initial state.
class SosFilter {
public:
    explicit SosFilter(const FilterSpec& spec);           // throws UnstableDesign
    explicit SosFilter(std::vector<Biquad> sections);     // validates pole radii

    std::vector<double> apply(std::span<const double> x) const;
    const std::vector<Biquad>& sections() const { return sections_; }
    std::complex<double> response(double hz, double sample_rate_hz) const;

private:
    std::vector<Biquad> sections_;
};

// One-shot convenience over SosFilter.
std::vector<double> butterworth(std::span<const double> x, const FilterSpec& spec);

// Affine map onto [0,1]; throws InsufficientData (length < 2) or
// DegenerateSignal (constant input).
std::vector<double> minmax_normalize(std::span<const double> x);

// Mean 0, population std 1; throws DegenerateSignal on zero variance.
std::vector<double> znormalize(std::span<const double> x);

// d[i] = x[i+1] - x[i]; length n-1.
std::vector<double> first_difference(std::span<const double> x);

// Sign-change positions of a difference series. A reported index i is the
// position of the extremum in the original series; plateaus report the first
// plateau sample.
struct Extrema {
    std::vector<size_t> maxima;
    std::vector<size_t> minima;
};
Extrema zero_crossing_extrema(std::span<const double> d);

// Local maxima of a [0,1]-normalized series with amplitude > threshold,
// thinned so surviving peaks are >= refractory_samples apart (larger wins).
std::vector<size_t> peaks_above(std::span<const double> x, double threshold, size_t refractory_samples);

// One-sided power spectral density on a uniform frequency grid [0, Nyquist].
struct Spectrum {
    std::vector<double> freqs_hz;
    std::vector<double> power;  // units^2 / Hz

    double bin_hz() const { return freqs_hz.size() > 1 ? freqs_hz[1] - freqs_hz[0] : 0.0; }
    double nyquist_hz() const { return freqs_hz.empty() ? 0.0 : freqs_hz.back(); }
    double total_power() const;
};

// Periodogram of the mean-removed, Hann-windowed series, zero-padded to a
// power of two. Parseval-consistent: band_power over the full band
// approximates the series variance (within window-gain correction).
Spectrum psd(std::span<const double> x, double sample_rate_hz);  // throws InsufficientData (< 16)

// Integral of the piecewise-linear interpolated PSD over [lo_hz, hi_hz].
// Exactly additive across adjacent bands.
double band_power(const Spectrum& s, double lo_hz, double hi_hz);

}  // namespace vitalcep::dsp
