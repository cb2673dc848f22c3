#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vitalcep/broker.hpp"
#include "vitalcep/config.hpp"
#include "vitalcep/delineate.hpp"
#include "vitalcep/dsp.hpp"
#include "vitalcep/producer.hpp"
#include "vitalcep/risk.hpp"
#include "vitalcep/store.hpp"
#include "vitalcep/stress.hpp"
#include "vitalcep/windowing.hpp"

namespace vitalcep::runtime {

// Everything both jobs need, loadable from one flat config file.
struct PipelineConfig {
    std::string ecg_topic = "ecg";
    std::string bp_topic = "bp";
    std::string risk_topic = "results.chf";
    std::string stress_topic = "results.stress";
    int64_t retention_ms = broker::kInfiniteRetentionMs;

    int64_t window_ms = 5000;
    int64_t lateness_ms = 500;
    double ecg_rate_hz = 500.0;
    double bp_rate_hz = 50.0;

    bool ecg_filter_enabled = true;
    double ecg_low_hz = 0.5;
    double ecg_high_hz = 40.0;
    int ecg_order = 4;

    std::string store_dir = "results";
    std::string model_path;    // empty: built-in model
    std::string broker_addr;   // empty: embedded broker
    std::string broker_data_dir;

    stress::StressConfig stress;
    delineate::DelineateConfig delineate;
    size_t poll_batch = 2048;

    static PipelineConfig from(const Config& cfg);  // throws ConfigError
};

struct JobStats {
    uint64_t records = 0;  // samples consumed from input topics
    uint64_t malformed = 0;
    uint64_t windows = 0;
    uint64_t results = 0;
    uint64_t diags = 0;
    uint64_t late_dropped = 0;
    uint64_t duplicate_dropped = 0;

    std::string line(const std::string& job) const;
};

// Common skeleton: poll input topics in batches, decode, process, commit
// after each fully processed batch (at-least-once across crashes, no
// reprocessing after a clean commit).
class Job {
  public:
    Job(broker::BrokerApi& api, PipelineConfig cfg, ResultStore& store);
    virtual ~Job() = default;

    // One poll round over the input topics; returns records consumed.
    size_t step();

    // Emit everything still buffered (trailing partial windows). Call once,
    // after the final step of a drained stream or at shutdown.
    virtual void finish() = 0;

    // Poll until `stop`, with a stats line every 10 s and one at the end;
    // calls finish() on the way out.
    void run(const std::atomic<bool>& stop);

    // step() until two consecutive idle rounds; does not finish().
    void drain();

    const JobStats& stats() const { return stats_; }
    virtual std::string name() const = 0;

  protected:
    virtual const std::vector<std::string>& input_topics() const = 0;
    virtual void on_record(const std::string& topic, const wire::SampleRecord& r) = 0;

    void publish_and_store(const std::string& topic, const std::string& user,
                           const std::string& line);

    broker::BrokerApi& api_;
    PipelineConfig cfg_;
    ResultStore& store_;
    JobStats stats_;
};

// CHF risk per ECG window, joined with the same-index BP window. A completed
// ECG window is held until its BP partner arrives or the BP stream's
// watermark proves no partner is coming, so output never depends on poll
// interleaving.
class RiskJob : public Job {
  public:
    RiskJob(broker::BrokerApi& api, const PipelineConfig& cfg, ResultStore& store);

    void finish() override;
    std::string name() const override { return "chf_risk"; }

  private:
    const std::vector<std::string>& input_topics() const override { return topics_; }
    void on_record(const std::string& topic, const wire::SampleRecord& r) override;
    void pump(const std::string& user, bool finishing);
    void emit(const windowing::SignalWindow& w, const delineate::BpFeatures& bp);

    std::vector<std::string> topics_;
    windowing::WindowAssembler ecg_win_;
    windowing::WindowAssembler bp_win_;
    std::optional<dsp::SosFilter> filter_;
    risk::NaiveBayesModel model_;
    std::map<std::string, std::deque<windowing::SignalWindow>> held_;
    std::map<std::string, std::map<int64_t, delineate::BpFeatures>> bp_feats_;
};

// Stress index per ECG window per user.
class StressJob : public Job {
  public:
    StressJob(broker::BrokerApi& api, const PipelineConfig& cfg, ResultStore& store);

    void finish() override;
    std::string name() const override { return "stress"; }

  private:
    const std::vector<std::string>& input_topics() const override { return topics_; }
    void on_record(const std::string& topic, const wire::SampleRecord& r) override;
    void emit(const windowing::SignalWindow& w);

    std::vector<std::string> topics_;
    windowing::WindowAssembler ecg_win_;
    std::map<std::string, stress::StressState> states_;
};

// Creates the four pipeline topics against `api` (idempotent).
void create_pipeline_topics(broker::BrokerApi& api, const PipelineConfig& cfg);

struct RunReport {
    ProducerStats produced;
    JobStats risk;
    JobStats stress;
};

// Whole pipeline in one process: producers on threads, both jobs stepped
// until the drained streams are fully processed, then finished. The
// deterministic backbone of as-fast-as-possible replays.
RunReport run_pipeline(broker::BrokerApi& api, const PipelineConfig& cfg,
                       const std::vector<ReplaySpec>& specs);

}  // namespace vitalcep::runtime
