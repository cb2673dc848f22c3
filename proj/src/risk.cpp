#include "vitalcep/risk.hpp"

#include <cmath>
#include <sstream>

#include "vitalcep/config.hpp"
#include "vitalcep/errors.hpp"

namespace vitalcep::risk {

using delineate::Ternary;

const std::array<std::string, kFeatureCount> kFeatureNames = {
    "hr_gt_80", "qrs_gt_100", "qrs_gt_120", "qt_gt_410",
    "st_depression", "st_elevation", "inverted_t",
};

size_t ChfFeatureVector::valid_count() const {
    size_t n = 0;
    for (Ternary t : f)
        if (t != Ternary::invalid) ++n;
    return n;
}

ChfFeatureVector extract_features(const delineate::BeatIntervals& intervals,
                                  const delineate::MorphologyFlags& morph) {
    using delineate::is_valid;
    auto cmp = [](double v, double thr) {
        return is_valid(v) ? (v > thr ? Ternary::yes : Ternary::no) : Ternary::invalid;
    };
    ChfFeatureVector fv;
    fv[0] = cmp(intervals.hr_bpm, kHrThresholdBpm);
    fv[1] = cmp(intervals.mean_qrs_ms, kQrsWideMs);
    fv[2] = cmp(intervals.mean_qrs_ms, kQrsVeryWideMs);
    fv[3] = cmp(intervals.mean_qt_ms, kQtLongMs);
    fv[4] = morph.st_depression;
    fv[5] = morph.st_elevation;
    fv[6] = morph.inverted_t;
    return fv;
}

NaiveBayesModel::NaiveBayesModel()
    : prior_(0.1),
      params_{{{0.60, 0.30},
               {0.50, 0.20},
               {0.35, 0.08},
               {0.45, 0.15},
               {0.40, 0.10},
               {0.30, 0.08},
               {0.40, 0.12}}} {
    validate();
}

NaiveBayesModel NaiveBayesModel::from_file(const std::string& path) {
    Config cfg = Config::from_file(path);
    NaiveBayesModel m;
    m.prior_ = cfg.get_double("prior", m.prior_);
    for (size_t i = 0; i < kFeatureCount; ++i) {
        std::string raw = cfg.get(kFeatureNames[i], "");
        if (raw.empty()) continue;
        std::istringstream ss(raw);
        FeatureParams fp{};
        if (!(ss >> fp.p >> fp.q))
            throw InvalidModel("model entry '" + kFeatureNames[i] + "' needs two probabilities");
        m.params_[i] = fp;
    }
    m.validate();
    return m;
}

void NaiveBayesModel::validate() const {
    if (!(prior_ > 0.0 && prior_ < 1.0))
        throw InvalidModel("prior must lie strictly inside (0, 1)");
    for (size_t i = 0; i < kFeatureCount; ++i) {
        const FeatureParams& fp = params_[i];
        if (!(fp.q > 0.0 && fp.p < 1.0 && fp.q < fp.p))
            throw InvalidModel("likelihoods for '" + kFeatureNames[i] +
                               "' must satisfy 0 < q < p < 1");
    }
}

std::optional<double> NaiveBayesModel::log_odds(const ChfFeatureVector& fv) const {
    if (fv.valid_count() == 0) return std::nullopt;
    double l = std::log(prior_ / (1.0 - prior_));
    for (size_t i = 0; i < kFeatureCount; ++i) {
        if (fv[i] == Ternary::invalid) continue;
        const FeatureParams& fp = params_[i];
        l += fv[i] == Ternary::yes ? std::log(fp.p / fp.q)
                                   : std::log((1.0 - fp.p) / (1.0 - fp.q));
    }
    return l;
}

std::optional<double> NaiveBayesModel::score(const ChfFeatureVector& fv) const {
    std::optional<double> l = log_odds(fv);
    if (!l) return std::nullopt;
    // Extremes of the attainable log-odds for this valid subset: every valid
    // feature pushed to yes (p > q raises the odds) or to no.
    double lo = std::log(prior_ / (1.0 - prior_));
    double hi = lo;
    for (size_t i = 0; i < kFeatureCount; ++i) {
        if (fv[i] == Ternary::invalid) continue;
        hi += std::log(params_[i].p / params_[i].q);
        lo += std::log((1.0 - params_[i].p) / (1.0 - params_[i].q));
    }
    // the ratio first: extremes then hit exactly 0 and 1, so the scale's
    // endpoints are exactly 0.0 and 100.0
    return 100.0 * ((*l - lo) / (hi - lo));
}

}  // namespace vitalcep::risk
