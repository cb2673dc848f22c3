#pragma once

#include <array>
#include <optional>
#include <string>

#include "vitalcep/delineate.hpp"

namespace vitalcep::risk {

// Interval thresholds feeding the binary feature vector.
inline constexpr double kHrThresholdBpm = 80.0;
inline constexpr double kQrsWideMs = 100.0;
inline constexpr double kQrsVeryWideMs = 120.0;
inline constexpr double kQtLongMs = 410.0;

inline constexpr size_t kFeatureCount = 7;

extern const std::array<std::string, kFeatureCount> kFeatureNames;

// One window's evidence. Each entry is yes/no/invalid; invalid features are
// skipped by the scorer rather than treated as absent.
struct ChfFeatureVector {
    std::array<delineate::Ternary, kFeatureCount> f{};

    ChfFeatureVector() { f.fill(delineate::Ternary::invalid); }

    delineate::Ternary& operator[](size_t i) { return f[i]; }
    delineate::Ternary operator[](size_t i) const { return f[i]; }
    size_t valid_count() const;
};

ChfFeatureVector extract_features(const delineate::BeatIntervals& intervals,
                                  const delineate::MorphologyFlags& morph);

struct FeatureParams {
    double p;  // P(feature | CHF)
    double q;  // P(feature | healthy)
};

class NaiveBayesModel {
  public:
    // Hand-tuned default likelihoods; any real deployment should load
    // population-fitted values from a model file.
    NaiveBayesModel();

    static NaiveBayesModel from_file(const std::string& path);

    double prior() const { return prior_; }
    const FeatureParams& params(size_t i) const { return params_[i]; }

    // Log-odds of CHF given the valid features; nullopt when none are valid.
    std::optional<double> log_odds(const ChfFeatureVector& fv) const;

    // Log-odds rescaled to [0, 100] over the attainable range for the same
    // valid subset, so a window with fewer readable features still spans the
    // full scale. nullopt when every feature is invalid.
    std::optional<double> score(const ChfFeatureVector& fv) const;

  private:
    void validate() const;

    double prior_;
    std::array<FeatureParams, kFeatureCount> params_;
};

}  // namespace vitalcep::risk
