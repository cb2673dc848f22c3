#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vitalcep/delineate.hpp"
#include "vitalcep/windowing.hpp"

namespace vitalcep::stress {

using delineate::is_valid;
using delineate::kInvalid;

struct StressConfig {
    double initial_index = 0.1;
    double step = 0.1;
    double tachogram_rate_hz = 4.0;
    double lf_lo_hz = 0.04;
    double lf_hi_hz = 0.15;
    double hf_lo_hz = 0.15;
    double hf_hi_hz = 0.40;
    double hf_epsilon = 1e-12;
    size_t rr_capacity = 512;
    int64_t rr_full_span_ms = 60'000;
};

// RMSSD over successive differences of the RR series; needs >= 3 intervals.
double rmssd(std::span<const double> rr_ms);

// Same quantity when only the successive differences survive (circular
// buffer); the divisor is the difference count, matching rmssd above.
double rmssd_from_diffs(std::span<const double> diffs_ms);

struct LfHf {
    double lf = kInvalid;
    double hf = kInvalid;
    double ratio = kInvalid;
};

// RR series -> evenly resampled tachogram -> spectral band powers.
// Throws InsufficientData for series too short to resolve the bands and
// DegenerateSpectrum when the HF band is empty (ratio undefined).
LfHf lf_hf_ratio(std::span<const double> rr_ms, const StressConfig& cfg = {});

struct StressResult {
    double hr_bpm = kInvalid;
    double hrv_ms = kInvalid;
    double lf = kInvalid;
    double hf = kInvalid;
    double lf_hf = kInvalid;
    double index = 0.0;
};

// Per-user stepped stress index: each window's HRV is compared with the
// previous window's (the baseline) and the index walks by one step, clamped
// to [0, 1]. The index is held in integer micro-units so a long walk never
// accumulates float drift.
class StressState {
  public:
    explicit StressState(const StressConfig& cfg = {});

    StressResult update(std::span<const double> window_rr_ms);

    double index() const { return static_cast<double>(index_u_) / 1'000'000.0; }
    double baseline_hrv() const { return baseline_; }  // INVALID until first HRV
    const windowing::RrBuffer& buffer() const { return buffer_; }

  private:
    StressConfig cfg_;
    windowing::RrBuffer buffer_;
    int64_t index_u_;
    int64_t step_u_;
    double baseline_ = kInvalid;
    double last_rr_ = kInvalid;  // final interval of the previous window
};

}  // namespace vitalcep::stress
