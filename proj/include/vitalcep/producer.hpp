#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "vitalcep/broker.hpp"
#include "vitalcep/wire.hpp"

namespace vitalcep::runtime {

enum class ClockMode { realtime, accelerated, afap };

ClockMode clock_mode_from_string(const std::string& s);  // throws ConfigError

// Replays a recorded signal file as a live stream. Rows are either
// "timestamp_ms,value" or a bare value per line; when the file carries no
// timestamps they are synthesized at 1000/rate spacing. Looped replay keeps
// timestamps monotone by restarting each pass where the previous one ended.
struct ReplaySpec {
    std::string path;
    std::string topic;
    std::string user_id;
    wire::DataType data_type = wire::DataType::ECG;
    double sample_rate_hz = 500.0;
    ClockMode clock = ClockMode::afap;
    double accel_factor = 1.0;  // accelerated mode: wall time shrinks by this
    uint64_t loop_count = 1;    // passes over the file
    bool timestamps_in_seconds = false;
};

struct ProducerStats {
    uint64_t published = 0;
    uint64_t skipped = 0;  // malformed rows
};

// Blocks until the source is exhausted (or `stop` goes true). The topic must
// already exist or be creatable by the caller beforehand.
ProducerStats run_producer(broker::BrokerApi& api, const ReplaySpec& spec,
                           const std::atomic<bool>* stop = nullptr);

}  // namespace vitalcep::runtime
