#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace vitalcep::synth {

// One PQRST complex as a sum of Gaussian bumps relative to the R instant.
struct EcgBump {
    double center_ms;
    double width_ms;
    double amplitude;
};

inline const std::vector<EcgBump>& pqrst_template() {
    static const std::vector<EcgBump> bumps = {
        {-160.0, 25.0, 0.17},  // P
        {-22.0, 6.0, -0.20},   // Q
        {0.0, 9.0, 1.00},      // R
        {25.0, 7.0, -0.25},    // S
        {220.0, 45.0, 0.35},   // T
    };
    return bumps;
}

// ECG trace with beats at the given R instants (ms).
inline std::vector<double> ecg_from_beats(const std::vector<double>& r_instants_ms,
                                          double sample_rate_hz, double duration_ms,
                                          double amplitude = 1.0) {
    auto n = static_cast<size_t>(std::llround(duration_ms * sample_rate_hz / 1000.0));
    std::vector<double> x(n, 0.0);
    for (double r : r_instants_ms) {
        for (const EcgBump& b : pqrst_template()) {
            double c = r + b.center_ms;
            // bump support: +-5 sigma
            auto lo = static_cast<int64_t>(std::floor((c - 5 * b.width_ms) * sample_rate_hz / 1000.0));
            auto hi = static_cast<int64_t>(std::ceil((c + 5 * b.width_ms) * sample_rate_hz / 1000.0));
            lo = std::max<int64_t>(lo, 0);
            hi = std::min<int64_t>(hi, static_cast<int64_t>(n) - 1);
            for (int64_t i = lo; i <= hi; ++i) {
                double t = static_cast<double>(i) * 1000.0 / sample_rate_hz;
                double z = (t - c) / b.width_ms;
                x[static_cast<size_t>(i)] += amplitude * b.amplitude * std::exp(-0.5 * z * z);
            }
        }
    }
    return x;
}

// Fixed-rate beats; first R at first_r_ms, then every 60000/hr ms.
inline std::vector<double> ecg_fixed_hr(double hr_bpm, double sample_rate_hz, double duration_ms,
                                        double first_r_ms = 500.0, double amplitude = 1.0) {
    std::vector<double> beats;
    double rr = 60000.0 / hr_bpm;
    for (double t = first_r_ms; t < duration_ms; t += rr) beats.push_back(t);
    return ecg_from_beats(beats, sample_rate_hz, duration_ms, amplitude);
}

// Beats whose RR wanders sinusoidally: rr(t) = base + depth*sin(2*pi*f*t).
// Gives every analysis window a different RMSSD so the stress index moves.
inline std::vector<double> ecg_modulated_rr(double base_rr_ms, double depth_ms, double mod_hz,
                                            double sample_rate_hz, double duration_ms,
                                            double first_r_ms = 400.0) {
    std::vector<double> beats;
    double t = first_r_ms;
    while (t < duration_ms) {
        beats.push_back(t);
        t += base_rr_ms + depth_ms * std::sin(2.0 * M_PI * mod_hz * t / 1000.0);
    }
    return ecg_from_beats(beats, sample_rate_hz, duration_ms);
}

// Arterial-pressure stand-in: sinusoid swinging between DBP and SBP.
inline std::vector<double> bp_series(double sbp, double dbp, double pulse_hz,
                                     double sample_rate_hz, double duration_ms) {
    auto n = static_cast<size_t>(std::llround(duration_ms * sample_rate_hz / 1000.0));
    std::vector<double> x(n);
    double mid = 0.5 * (sbp + dbp);
    double amp = 0.5 * (sbp - dbp);
    for (size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / sample_rate_hz;
        x[i] = mid + amp * std::sin(2.0 * M_PI * pulse_hz * t);
    }
    return x;
}

}  // namespace vitalcep::synth
