#include "vitalcep/job.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <thread>

#include "vitalcep/errors.hpp"

namespace vitalcep::runtime {

PipelineConfig PipelineConfig::from(const Config& cfg) {
    PipelineConfig p;
    p.ecg_topic = cfg.get("topic.ecg", p.ecg_topic);
    p.bp_topic = cfg.get("topic.bp", p.bp_topic);
    p.risk_topic = cfg.get("topic.risk", p.risk_topic);
    p.stress_topic = cfg.get("topic.stress", p.stress_topic);
    p.retention_ms = cfg.get_int("retention.ms", p.retention_ms);

    p.window_ms = cfg.get_int("window.ms", p.window_ms);
    p.lateness_ms = cfg.get_int("window.lateness_ms", p.lateness_ms);
    p.ecg_rate_hz = cfg.get_double("sample.ecg_rate_hz", p.ecg_rate_hz);
    p.bp_rate_hz = cfg.get_double("sample.bp_rate_hz", p.bp_rate_hz);

    p.ecg_filter_enabled = cfg.get_bool("filter.ecg.enabled", p.ecg_filter_enabled);
    p.ecg_low_hz = cfg.get_double("filter.ecg.low_hz", p.ecg_low_hz);
    p.ecg_high_hz = cfg.get_double("filter.ecg.high_hz", p.ecg_high_hz);
    p.ecg_order = static_cast<int>(cfg.get_int("filter.ecg.order", p.ecg_order));

    p.store_dir = cfg.get("store.dir", p.store_dir);
    p.model_path = cfg.get("risk.model.path", p.model_path);
    p.broker_addr = cfg.get("broker.addr", p.broker_addr);
    p.broker_data_dir = cfg.get("broker.data_dir", p.broker_data_dir);

    p.stress.initial_index = cfg.get_double("stress.initial", p.stress.initial_index);
    p.stress.step = cfg.get_double("stress.step", p.stress.step);
    p.stress.tachogram_rate_hz =
        cfg.get_double("stress.tachogram_rate_hz", p.stress.tachogram_rate_hz);
    p.stress.lf_lo_hz = cfg.get_double("stress.lf_lo_hz", p.stress.lf_lo_hz);
    p.stress.lf_hi_hz = cfg.get_double("stress.lf_hi_hz", p.stress.lf_hi_hz);
    p.stress.hf_lo_hz = cfg.get_double("stress.hf_lo_hz", p.stress.hf_lo_hz);
    p.stress.hf_hi_hz = cfg.get_double("stress.hf_hi_hz", p.stress.hf_hi_hz);
    p.stress.hf_epsilon = cfg.get_double("stress.hf_epsilon", p.stress.hf_epsilon);
    p.stress.rr_capacity =
        static_cast<size_t>(cfg.get_int("stress.rr_capacity", static_cast<int64_t>(p.stress.rr_capacity)));
    p.stress.rr_full_span_ms = cfg.get_int("stress.full_span_ms", p.stress.rr_full_span_ms);

    p.poll_batch = static_cast<size_t>(cfg.get_int("job.poll_batch", static_cast<int64_t>(p.poll_batch)));

    if (p.window_ms <= 0) throw ConfigError("window.ms must be positive");
    if (p.lateness_ms < 0) throw ConfigError("window.lateness_ms must be nonnegative");
    if (p.ecg_rate_hz <= 0 || p.bp_rate_hz <= 0) throw ConfigError("sample rates must be positive");
    if (p.stress.step < 0 || p.stress.initial_index < 0 || p.stress.initial_index > 1)
        throw ConfigError("stress.initial must lie in [0,1] and stress.step be nonnegative");
    if (p.poll_batch == 0) throw ConfigError("job.poll_batch must be positive");
    return p;
}

std::string JobStats::line(const std::string& job) const {
    return "[" + job + "] records=" + std::to_string(records) +
           " malformed=" + std::to_string(malformed) + " windows=" + std::to_string(windows) +
           " results=" + std::to_string(results) + " diags=" + std::to_string(diags) +
           " late=" + std::to_string(late_dropped) +
           " dup=" + std::to_string(duplicate_dropped);
}

Job::Job(broker::BrokerApi& api, PipelineConfig cfg, ResultStore& store)
    : api_(api), cfg_(std::move(cfg)), store_(store) {}

size_t Job::step() {
    size_t consumed = 0;
    for (const std::string& topic : input_topics()) {
        broker::PollResult res = api_.poll(topic, name(), cfg_.poll_batch);
        if (res.records.empty()) continue;
        for (const broker::PolledRecord& rec : res.records) {
            try {
                on_record(topic, wire::decode_sample(rec.payload));
                ++stats_.records;
            } catch (const MalformedRecord&) {
                ++stats_.malformed;
            }
        }
        consumed += res.records.size();
        api_.commit(topic, name(), res.records.back().offset + 1);
    }
    return consumed;
}

void Job::run(const std::atomic<bool>& stop) {
    using clock = std::chrono::steady_clock;
    auto last_report = clock::now();
    while (!stop.load()) {
        if (step() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));
        auto now = clock::now();
        if (now - last_report >= std::chrono::seconds(10)) {
            std::cerr << stats_.line(name()) << "\n";
            last_report = now;
        }
    }
    finish();
    std::cerr << stats_.line(name()) << "\n";
}

void Job::drain() {
    size_t idle = 0;
    while (idle < 2) idle = step() == 0 ? idle + 1 : 0;
}

void Job::publish_and_store(const std::string& topic, const std::string& user,
                            const std::string& line) {
    api_.publish(topic, line);
    store_.append(name(), user, line);
}

RiskJob::RiskJob(broker::BrokerApi& api, const PipelineConfig& cfg, ResultStore& store)
    : Job(api, cfg, store),
      topics_{cfg.ecg_topic, cfg.bp_topic},
      ecg_win_(cfg.window_ms, cfg.lateness_ms, cfg.ecg_rate_hz),
      bp_win_(cfg.window_ms, cfg.lateness_ms, cfg.bp_rate_hz),
      model_(cfg.model_path.empty() ? risk::NaiveBayesModel()
                                    : risk::NaiveBayesModel::from_file(cfg.model_path)) {
    if (cfg.ecg_filter_enabled)
        filter_.emplace(dsp::FilterSpec::bandpass(cfg.ecg_low_hz, cfg.ecg_high_hz, cfg.ecg_order,
                                                  cfg.ecg_rate_hz));
}

void RiskJob::on_record(const std::string& topic, const wire::SampleRecord& r) {
    if (topic == cfg_.ecg_topic) {
        windowing::OfferResult res = ecg_win_.offer(r);
        for (windowing::SignalWindow& w : res.emitted) held_[w.user_id].push_back(std::move(w));
        if (!res.emitted.empty()) pump(r.user_id, false);
    } else {
        windowing::OfferResult res = bp_win_.offer(r);
        for (const windowing::SignalWindow& w : res.emitted)
            bp_feats_[w.user_id][w.index()] = delineate::bp_features(w);
        pump(r.user_id, false);  // a BP watermark advance may release held windows
    }
    JobStats& s = stats_;
    s.late_dropped = ecg_win_.stats().dropped_late + bp_win_.stats().dropped_late;
    s.duplicate_dropped = ecg_win_.stats().dropped_duplicate + bp_win_.stats().dropped_duplicate;
}

// Release the user's held ECG windows, oldest first. A window goes out once
// its BP partner exists, or once the BP watermark shows the partner window
// has already closed without appearing — both conditions depend only on
// stream content, never on poll interleaving.
void RiskJob::pump(const std::string& user, bool finishing) {
    auto held_it = held_.find(user);
    if (held_it == held_.end()) return;
    std::deque<windowing::SignalWindow>& q = held_it->second;
    std::map<int64_t, delineate::BpFeatures>& feats = bp_feats_[user];
    int64_t bp_mark = bp_win_.watermark(user, wire::DataType::BP);

    while (!q.empty()) {
        const windowing::SignalWindow& w = q.front();
        auto f = feats.find(w.index());
        bool partner_closed =
            bp_mark != INT64_MIN && bp_mark - cfg_.lateness_ms >= w.window_end_ms();
        if (f != feats.end()) {
            emit(w, f->second);
        } else if (partner_closed || finishing) {
            emit(w, delineate::BpFeatures{});
        } else {
            break;
        }
        feats.erase(feats.begin(), feats.upper_bound(w.index()));
        q.pop_front();
    }
}

void RiskJob::emit(const windowing::SignalWindow& w, const delineate::BpFeatures& bp) {
    ++stats_.windows;
    std::vector<double> x = w.values();
    if (filter_) x = filter_->apply(x);

    delineate::EcgKeyPoints kp = delineate::delineate_ecg(x, w.sample_rate_hz, cfg_.delineate);
    delineate::BeatIntervals bi = delineate::beat_intervals(kp, w.sample_rate_hz);
    delineate::MorphologyFlags morph = delineate::morphology(kp, x, w.sample_rate_hz, cfg_.delineate);
    risk::ChfFeatureVector fv = risk::extract_features(bi, morph);
    std::optional<double> score = model_.score(fv);

    if (score) {
        std::map<std::string, double> aux{{"hr_bpm", bi.hr_bpm},
                                          {"qrs_ms", bi.mean_qrs_ms},
                                          {"qt_ms", bi.mean_qt_ms},
                                          {"sbp_mmhg", bp.sbp_mmhg},
                                          {"dbp_mmhg", bp.dbp_mmhg}};
        wire::ResultRecord rec =
            wire::ResultRecord::make(w.user_id, wire::ResultKind::CHF_RISK, w.window_start_ms,
                                     w.window_end_ms(), std::clamp(*score, 0.0, 100.0), std::move(aux));
        publish_and_store(cfg_.risk_topic, w.user_id, wire::encode_result(rec));
        ++stats_.results;
    } else {
        wire::DiagRecord d{w.user_id, name(), w.window_start_ms, w.window_end_ms(),
                           "score_withheld"};
        publish_and_store(cfg_.risk_topic, w.user_id, wire::encode_diag(d));
        ++stats_.diags;
    }
}

void RiskJob::finish() {
    for (windowing::SignalWindow& w : bp_win_.flush())
        bp_feats_[w.user_id][w.index()] = delineate::bp_features(w);
    for (windowing::SignalWindow& w : ecg_win_.flush()) held_[w.user_id].push_back(std::move(w));
    for (auto& [user, q] : held_) pump(user, true);
}

StressJob::StressJob(broker::BrokerApi& api, const PipelineConfig& cfg, ResultStore& store)
    : Job(api, cfg, store),
      topics_{cfg.ecg_topic},
      ecg_win_(cfg.window_ms, cfg.lateness_ms, cfg.ecg_rate_hz) {}

void StressJob::on_record(const std::string&, const wire::SampleRecord& r) {
    windowing::OfferResult res = ecg_win_.offer(r);
    for (const windowing::SignalWindow& w : res.emitted) emit(w);
    stats_.late_dropped = ecg_win_.stats().dropped_late;
    stats_.duplicate_dropped = ecg_win_.stats().dropped_duplicate;
}

void StressJob::emit(const windowing::SignalWindow& w) {
    ++stats_.windows;
    delineate::EcgKeyPoints kp = delineate::delineate_ecg(w, cfg_.delineate);
    delineate::BeatIntervals bi = delineate::beat_intervals(kp, w.sample_rate_hz);
    std::vector<double> rr = bi.valid_rr();

    auto st = states_.try_emplace(w.user_id, cfg_.stress).first;
    stress::StressResult res = st->second.update(rr);

    std::map<std::string, double> aux{{"hr_bpm", res.hr_bpm},
                                      {"hrv_ms", res.hrv_ms},
                                      {"lf", res.lf},
                                      {"hf", res.hf},
                                      {"lf_hf", res.lf_hf}};
    wire::ResultRecord rec = wire::ResultRecord::make(
        w.user_id, wire::ResultKind::STRESS, w.window_start_ms, w.window_end_ms(), res.index,
        std::move(aux));
    publish_and_store(cfg_.stress_topic, w.user_id, wire::encode_result(rec));
    ++stats_.results;
}

void StressJob::finish() {
    for (const windowing::SignalWindow& w : ecg_win_.flush()) emit(w);
}

void create_pipeline_topics(broker::BrokerApi& api, const PipelineConfig& cfg) {
    api.create_topic(cfg.ecg_topic, cfg.retention_ms);
    api.create_topic(cfg.bp_topic, cfg.retention_ms);
    api.create_topic(cfg.risk_topic, cfg.retention_ms);
    api.create_topic(cfg.stress_topic, cfg.retention_ms);
}

RunReport run_pipeline(broker::BrokerApi& api, const PipelineConfig& cfg,
                       const std::vector<ReplaySpec>& specs) {
    create_pipeline_topics(api, cfg);
    ResultStore store(cfg.store_dir);
    RiskJob risk(api, cfg, store);
    StressJob stress(api, cfg, store);

    std::vector<std::thread> producers;
    std::vector<ProducerStats> produced(specs.size());
    std::atomic<size_t> live{specs.size()};
    for (size_t i = 0; i < specs.size(); ++i)
        producers.emplace_back([&, i] {
            produced[i] = run_producer(api, specs[i]);
            --live;
        });

    while (live.load() > 0) {
        if (risk.step() + stress.step() == 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    for (std::thread& t : producers) t.join();
    risk.drain();
    stress.drain();
    risk.finish();
    stress.finish();

    RunReport report;
    for (const ProducerStats& p : produced) {
        report.produced.published += p.published;
        report.produced.skipped += p.skipped;
    }
    report.risk = risk.stats();
    report.stress = stress.stats();
    return report;
}

}  // namespace vitalcep::runtime
