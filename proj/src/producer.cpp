#include "vitalcep/producer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>
#include <vector>

#include "vitalcep/errors.hpp"

namespace vitalcep::runtime {

ClockMode clock_mode_from_string(const std::string& s) {
    if (s == "realtime") return ClockMode::realtime;
    if (s == "accelerated") return ClockMode::accelerated;
    if (s == "afap") return ClockMode::afap;
    throw ConfigError("unknown clock mode '" + s + "' (realtime|accelerated|afap)");
}

namespace {

struct Row {
    bool has_ts;
    int64_t ts;
    double value;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_row(std::string_view line, bool ts_in_seconds, Row& out) {
    line = trim(line);
    size_t comma = line.find(',');
    try {
        if (comma == std::string_view::npos) {
            out.has_ts = false;
            out.ts = 0;
            size_t used = 0;
            out.value = std::stod(std::string(line), &used);
            if (used != line.size()) return false;
        } else {
            out.has_ts = true;
            std::string ts_text(trim(line.substr(0, comma)));
            std::string val_text(trim(line.substr(comma + 1)));
            size_t used = 0;
            if (ts_in_seconds) {
                double sec = std::stod(ts_text, &used);
                if (used != ts_text.size()) return false;
                out.ts = std::llround(sec * 1000.0);
            } else {
                out.ts = std::stoll(ts_text, &used);
                if (used != ts_text.size()) return false;
            }
            out.value = std::stod(val_text, &used);
            if (used != val_text.size()) return false;
        }
    } catch (const std::exception&) {
        return false;
    }
    return !std::isnan(out.value) && !std::isinf(out.value) && out.ts >= 0;
}

}  // namespace

ProducerStats run_producer(broker::BrokerApi& api, const ReplaySpec& spec,
                           const std::atomic<bool>* stop) {
    std::ifstream in(spec.path);
    if (!in) throw SourceUnreadable("cannot open signal file: " + spec.path);
    if (spec.sample_rate_hz <= 0) throw ConfigError("sample rate must be positive");

    ProducerStats stats;
    std::vector<Row> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view l = trim(line);
        if (l.empty() || l.front() == '#') continue;
        Row r{};
        if (parse_row(l, spec.timestamps_in_seconds, r))
            rows.push_back(r);
        else
            ++stats.skipped;
    }
    if (rows.empty()) return stats;

    double spacing_ms = 1000.0 / spec.sample_rate_hz;
    double speed = spec.clock == ClockMode::accelerated ? spec.accel_factor : 1.0;
    auto wall_start = std::chrono::steady_clock::now();

    int64_t pass_offset = 0;
    int64_t first_emitted_ts = -1;
    int64_t last_emitted_ts = 0;
    for (uint64_t pass = 0; pass < spec.loop_count; ++pass) {
        for (size_t i = 0; i < rows.size(); ++i) {
            if (stop && stop->load()) return stats;
            const Row& r = rows[i];
            int64_t raw = r.has_ts ? r.ts : static_cast<int64_t>(std::llround(i * spacing_ms));
            int64_t ts = raw + pass_offset;
            if (first_emitted_ts < 0) first_emitted_ts = ts;
            last_emitted_ts = ts;

            if (spec.clock != ClockMode::afap) {
                auto due = wall_start + std::chrono::milliseconds(static_cast<int64_t>(
                                            (ts - first_emitted_ts) / speed));
                std::this_thread::sleep_until(due);
            }
            try {
                wire::SampleRecord rec =
                    wire::SampleRecord::make(spec.user_id, spec.data_type, r.value, ts);
                api.publish(spec.topic, wire::encode_sample(rec));
                ++stats.published;
            } catch (const MalformedRecord&) {
                ++stats.skipped;
            }
        }
        // restart the next pass just past where this one ended
        int64_t first_raw = rows.front().has_ts ? rows.front().ts : 0;
        pass_offset = last_emitted_ts - first_raw + static_cast<int64_t>(std::llround(spacing_ms));
    }
    return stats;
}

}  // namespace vitalcep::runtime
