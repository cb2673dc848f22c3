#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vitalcep/windowing.hpp"

namespace vitalcep::delineate {

// Sentinel convention: invalid indices are -1, invalid amplitudes, intervals
// and features are -1.0. No NaN leaves this module.
inline constexpr int kInvalidIndex = -1;
inline constexpr double kInvalid = -1.0;

inline bool is_valid(double v) { return v >= 0.0; }
inline bool is_valid(int idx) { return idx >= 0; }

enum class Ternary : int8_t { no = 0, yes = 1, invalid = -1 };

struct DelineateConfig {
    double r_threshold = 0.90;    // normalized amplitude for R-peak candidates
    double refractory_ms = 200.0; // minimum R-to-R spacing
    double q_window_ms = 50.0;    // Q searched in (R - q_window, R)
    double s_window_ms = 50.0;    // S searched in (R, R + s_window)
    double p_lo_ms = 250.0;       // P searched in (R - p_lo, R - p_hi)
    double p_hi_ms = 80.0;
    double t_lo_ms = 80.0;        // T searched in (R + t_lo, R + t_hi)
    double t_hi_ms = 400.0;
    double st_offset_ms = 80.0;   // ST level measured at S + st_offset
    double theta_st = 0.04;       // ST deviation threshold, normalized units
    double theta_t = 0.0;         // inverted-T threshold, normalized units
};

// One detected beat. Indices are sample positions in the window; amplitudes
// are in normalized [0,1] units.
struct Beat {
    int r = kInvalidIndex, p = kInvalidIndex, q = kInvalidIndex, s = kInvalidIndex, t = kInvalidIndex;
    double r_amp = kInvalid, p_amp = kInvalid, q_amp = kInvalid, s_amp = kInvalid, t_amp = kInvalid;
};

struct EcgKeyPoints {
    std::vector<Beat> beats;
};

// Per-beat intervals plus window aggregates, ms. rr_ms[i] is the interval
// ending at beat i (index 0 has none).
struct BeatIntervals {
    std::vector<double> rr_ms;
    std::vector<double> qrs_ms;
    std::vector<double> qt_ms;
    double hr_bpm = kInvalid;
    double mean_qrs_ms = kInvalid;
    double mean_qt_ms = kInvalid;

    std::vector<double> valid_rr() const;
};

struct MorphologyFlags {
    Ternary st_depression = Ternary::invalid;
    Ternary st_elevation = Ternary::invalid;
    Ternary inverted_t = Ternary::invalid;
};

struct BpFeatures {
    double sbp_mmhg = kInvalid;
    double dbp_mmhg = kInvalid;
};

// R-peak detection plus P/Q/S/T search around each R, all candidates drawn
// from the zero-crossing extrema of the first difference. Search windows
// truncated by the window edge, or empty of candidates, leave that key-point
// INVALID. A constant (degenerate) window yields zero beats.
EcgKeyPoints delineate_ecg(std::span<const double> x, double sample_rate_hz,
                           const DelineateConfig& cfg = {});
EcgKeyPoints delineate_ecg(const windowing::SignalWindow& w, const DelineateConfig& cfg = {});

BeatIntervals beat_intervals(const EcgKeyPoints& k, double sample_rate_hz);

MorphologyFlags morphology(const EcgKeyPoints& k, std::span<const double> x, double sample_rate_hz,
                           const DelineateConfig& cfg = {});

// SBP = mean of local maxima, DBP = mean of local minima, raw units (mmHg).
// Fewer than 2 extrema of a kind leaves that field INVALID.
BpFeatures bp_features(std::span<const double> x);
BpFeatures bp_features(const windowing::SignalWindow& w);

}  // namespace vitalcep::delineate
