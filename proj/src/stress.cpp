#include "vitalcep/stress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vitalcep/dsp.hpp"
#include "vitalcep/errors.hpp"

namespace vitalcep::stress {

double rmssd(std::span<const double> rr_ms) {
    if (rr_ms.size() < 3)
        throw InsufficientData("rmssd needs at least 3 RR intervals, got " +
                               std::to_string(rr_ms.size()));
    double sum = 0.0;
    for (size_t i = 1; i < rr_ms.size(); ++i) {
        double d = rr_ms[i] - rr_ms[i - 1];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(rr_ms.size() - 1));
}

double rmssd_from_diffs(std::span<const double> diffs_ms) {
    if (diffs_ms.size() < 2)
        throw InsufficientData("rmssd needs at least 2 successive differences, got " +
                               std::to_string(diffs_ms.size()));
    double sum = 0.0;
    for (double d : diffs_ms) sum += d * d;
    return std::sqrt(sum / static_cast<double>(diffs_ms.size()));
}

LfHf lf_hf_ratio(std::span<const double> rr_ms, const StressConfig& cfg) {
    if (rr_ms.size() < 3)
        throw InsufficientData("tachogram needs at least 3 RR intervals, got " +
                               std::to_string(rr_ms.size()));

    // Beat instants from cumulative intervals; the instantaneous RR value at
    // beat k is the interval that ended there.
    std::vector<double> beat_s(rr_ms.size() + 1, 0.0);
    for (size_t i = 0; i < rr_ms.size(); ++i) beat_s[i + 1] = beat_s[i] + rr_ms[i] / 1000.0;

    double t0 = beat_s[1];
    double t1 = beat_s.back();
    auto count = static_cast<size_t>(std::floor((t1 - t0) * cfg.tachogram_rate_hz)) + 1;

    std::vector<double> tachogram(count);
    size_t seg = 1;
    for (size_t j = 0; j < count; ++j) {
        double t = t0 + static_cast<double>(j) / cfg.tachogram_rate_hz;
        while (seg + 1 < beat_s.size() && beat_s[seg + 1] < t) ++seg;
        if (seg + 1 >= beat_s.size()) {
            tachogram[j] = rr_ms.back();
            continue;
        }
        double lo = beat_s[seg], hi = beat_s[seg + 1];
        double frac = hi > lo ? (t - lo) / (hi - lo) : 0.0;
        tachogram[j] = rr_ms[seg - 1] + frac * (rr_ms[seg] - rr_ms[seg - 1]);
    }

    dsp::Spectrum s = dsp::psd(tachogram, cfg.tachogram_rate_hz);
    LfHf out;
    out.lf = dsp::band_power(s, cfg.lf_lo_hz, cfg.lf_hi_hz);
    out.hf = dsp::band_power(s, cfg.hf_lo_hz, cfg.hf_hi_hz);
    if (out.hf < cfg.hf_epsilon)
        throw DegenerateSpectrum("HF band power is empty; LF/HF undefined");
    out.ratio = out.lf / out.hf;
    return out;
}

StressState::StressState(const StressConfig& cfg)
    : cfg_(cfg),
      buffer_(cfg.rr_capacity, cfg.rr_full_span_ms),
      index_u_(std::llround(cfg.initial_index * 1e6)),
      step_u_(std::llround(cfg.step * 1e6)) {}

StressResult StressState::update(std::span<const double> window_rr_ms) {
    for (double rr : window_rr_ms) {
        if (is_valid(last_rr_)) buffer_.push({rr - last_rr_, rr});
        last_rr_ = rr;
    }

    StressResult out;
    if (!window_rr_ms.empty()) {
        double mean = std::accumulate(window_rr_ms.begin(), window_rr_ms.end(), 0.0) /
                      static_cast<double>(window_rr_ms.size());
        if (mean > 0.0) out.hr_bpm = 60'000.0 / mean;
    }

    double hrv = kInvalid;
    if (buffer_.full()) {
        std::vector<double> d = buffer_.diffs();
        hrv = rmssd_from_diffs(d);
        try {
            LfHf x = lf_hf_ratio(buffer_.intervals(), cfg_);
            out.lf = x.lf;
            out.hf = x.hf;
            out.lf_hf = x.ratio;
        } catch (const Error&) {
            // spectrum not computable for this minute; fields stay INVALID
        }
    } else if (window_rr_ms.size() >= 3) {
        hrv = rmssd(window_rr_ms);
    }
    out.hrv_ms = hrv;

    if (is_valid(hrv)) {
        if (is_valid(baseline_)) {
            if (hrv < baseline_)
                index_u_ += step_u_;
            else if (hrv > baseline_)
                index_u_ -= step_u_;
            index_u_ = std::clamp<int64_t>(index_u_, 0, 1'000'000);
        }
        baseline_ = hrv;
    }
    out.index = index();
    return out;
}

}  // namespace vitalcep::stress
