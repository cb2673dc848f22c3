#include "vitalcep/delineate.hpp"

#include <cmath>

#include "vitalcep/dsp.hpp"
#include "vitalcep/errors.hpp"

namespace vitalcep::delineate {

namespace {

int to_samples(double ms, double fs) { return static_cast<int>(std::llround(ms * fs / 1000.0)); }

// Best extremum candidate strictly inside (lo, hi); INVALID when the
// interval is truncated by a window edge or holds no candidate.
struct Pick {
    int idx = kInvalidIndex;
    double amp = kInvalid;
};

Pick pick_extremum(const std::vector<size_t>& candidates, std::span<const double> x, int lo, int hi,
                   bool want_max) {
    Pick out;
    int n = static_cast<int>(x.size());
    if (lo < 0 || hi > n - 1) return out;  // truncated
    for (size_t c : candidates) {
        int i = static_cast<int>(c);
        if (i <= lo || i >= hi) continue;
        if (out.idx == kInvalidIndex || (want_max ? x[i] > out.amp : x[i] < out.amp)) {
            out.idx = i;
            out.amp = x[i];
        }
    }
    return out;
}

double mean_valid(const std::vector<double>& v) {
    double sum = 0.0;
    size_t n = 0;
    for (double x : v)
        if (is_valid(x)) {
            sum += x;
            ++n;
        }
    return n == 0 ? kInvalid : sum / n;
}

}  // namespace

std::vector<double> BeatIntervals::valid_rr() const {
    std::vector<double> out;
    for (double v : rr_ms)
        if (is_valid(v)) out.push_back(v);
    return out;
}

EcgKeyPoints delineate_ecg(std::span<const double> x, double sample_rate_hz, const DelineateConfig& cfg) {
    EcgKeyPoints out;
    if (x.size() < static_cast<size_t>(sample_rate_hz)) return out;  // under one second

    std::vector<double> norm;
    try {
        norm = dsp::minmax_normalize(x);
    } catch (const DegenerateSignal&) {
        return out;  // constant window: zero beats, everything INVALID downstream
    }

    dsp::Extrema ex = dsp::zero_crossing_extrema(dsp::first_difference(norm));
    size_t refractory = static_cast<size_t>(to_samples(cfg.refractory_ms, sample_rate_hz));
    std::vector<size_t> rpeaks = dsp::peaks_above(norm, cfg.r_threshold, refractory);

    for (size_t rp : rpeaks) {
        int r = static_cast<int>(rp);
        Beat b;
        b.r = r;
        b.r_amp = norm[rp];

        Pick q = pick_extremum(ex.minima, norm, r - to_samples(cfg.q_window_ms, sample_rate_hz), r, false);
        Pick s = pick_extremum(ex.minima, norm, r, r + to_samples(cfg.s_window_ms, sample_rate_hz), false);
        Pick p = pick_extremum(ex.maxima, norm, r - to_samples(cfg.p_lo_ms, sample_rate_hz),
                               r - to_samples(cfg.p_hi_ms, sample_rate_hz), true);
        Pick t = pick_extremum(ex.maxima, norm, r + to_samples(cfg.t_lo_ms, sample_rate_hz),
                               r + to_samples(cfg.t_hi_ms, sample_rate_hz), true);
        b.q = q.idx, b.q_amp = q.amp;
        b.s = s.idx, b.s_amp = s.amp;
        b.p = p.idx, b.p_amp = p.amp;
        b.t = t.idx, b.t_amp = t.amp;
        out.beats.push_back(b);
    }
    return out;
}

EcgKeyPoints delineate_ecg(const windowing::SignalWindow& w, const DelineateConfig& cfg) {
    return delineate_ecg(w.values(), w.sample_rate_hz, cfg);
}

BeatIntervals beat_intervals(const EcgKeyPoints& k, double sample_rate_hz) {
    BeatIntervals bi;
    double ms_per_sample = 1000.0 / sample_rate_hz;
    const auto& beats = k.beats;
    for (size_t i = 0; i < beats.size(); ++i) {
        bi.rr_ms.push_back(i == 0 ? kInvalid : (beats[i].r - beats[i - 1].r) * ms_per_sample);
        bool qs = is_valid(beats[i].q) && is_valid(beats[i].s);
        bi.qrs_ms.push_back(qs ? (beats[i].s - beats[i].q) * ms_per_sample : kInvalid);
        bool qt = is_valid(beats[i].q) && is_valid(beats[i].t);
        bi.qt_ms.push_back(qt ? (beats[i].t - beats[i].q) * ms_per_sample : kInvalid);
    }
    double mean_rr = mean_valid(bi.rr_ms);
    bi.hr_bpm = is_valid(mean_rr) ? 60000.0 / mean_rr : kInvalid;
    bi.mean_qrs_ms = mean_valid(bi.qrs_ms);
    bi.mean_qt_ms = mean_valid(bi.qt_ms);
    return bi;
}

MorphologyFlags morphology(const EcgKeyPoints& k, std::span<const double> x, double sample_rate_hz,
                           const DelineateConfig& cfg) {
    MorphologyFlags flags;
    if (k.beats.empty()) return flags;

    std::vector<double> norm;
    try {
        norm = dsp::minmax_normalize(x);
    } catch (const DegenerateSignal&) {
        return flags;
    }

    int n = static_cast<int>(norm.size());
    int st_offset = to_samples(cfg.st_offset_ms, sample_rate_hz);

    int dep_valid = 0, dep_yes = 0;
    int elev_valid = 0, elev_yes = 0;
    int inv_valid = 0, inv_yes = 0;

    for (const Beat& b : k.beats) {
        bool has_baseline = is_valid(b.p) && is_valid(b.q);
        double baseline = has_baseline ? norm[(b.p + b.q) / 2] : kInvalid;  // PQ midpoint

        int st_idx = is_valid(b.s) ? b.s + st_offset : kInvalidIndex;
        bool has_st = has_baseline && st_idx >= 0 && st_idx < n;
        if (has_st) {
            double st = norm[st_idx];
            ++dep_valid;
            ++elev_valid;
            if (baseline - st > cfg.theta_st) ++dep_yes;
            if (st - baseline > cfg.theta_st) ++elev_yes;
        }
        if (has_baseline && is_valid(b.t)) {
            ++inv_valid;
            if (b.t_amp - baseline < -cfg.theta_t) ++inv_yes;
        }
    }

    auto majority = [](int yes, int valid) {
        if (valid == 0) return Ternary::invalid;
        return 2 * yes > valid ? Ternary::yes : Ternary::no;
    };
    flags.st_depression = majority(dep_yes, dep_valid);
    flags.st_elevation = majority(elev_yes, elev_valid);
    flags.inverted_t = majority(inv_yes, inv_valid);
    return flags;
}

BpFeatures bp_features(std::span<const double> x) {
    BpFeatures f;
    if (x.size() < 2) return f;
    dsp::Extrema ex = dsp::zero_crossing_extrema(dsp::first_difference(x));
    if (ex.maxima.size() >= 2) {
        double sum = 0.0;
        for (size_t i : ex.maxima) sum += x[i];
        f.sbp_mmhg = sum / ex.maxima.size();
    }
    if (ex.minima.size() >= 2) {
        double sum = 0.0;
        for (size_t i : ex.minima) sum += x[i];
        f.dbp_mmhg = sum / ex.minima.size();
    }
    return f;
}

BpFeatures bp_features(const windowing::SignalWindow& w) { return bp_features(w.values()); }

}  // namespace vitalcep::delineate
