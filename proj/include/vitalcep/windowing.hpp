#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vitalcep/wire.hpp"

namespace vitalcep::windowing {

// A contiguous fixed-duration buffer of samples for one (user, signal type).
struct SignalWindow {
    std::string user_id;
    wire::DataType data_type = wire::DataType::ECG;
    int64_t window_start_ms = 0;
    int64_t window_length_ms = 0;
    double sample_rate_hz = 0.0;
    std::vector<std::pair<int64_t, double>> samples;  // (timestamp, value), sorted

    int64_t window_end_ms() const { return window_start_ms + window_length_ms; }
    int64_t index() const { return window_start_ms / window_length_ms; }
    std::vector<double> values() const;
};

// Tumbling window index for a timestamp; pure floor division.
int64_t assign_index(int64_t timestamp_ms, int64_t window_length_ms);

struct AssemblerStats {
    uint64_t accepted = 0;
    uint64_t dropped_late = 0;
    uint64_t dropped_duplicate = 0;
    uint64_t windows_emitted = 0;
};

struct OfferResult {
    bool accepted = false;  // false: the record was dropped (late or duplicate)
    std::vector<SignalWindow> emitted;
};

// Assembles per-(user, signal) tumbling event-time windows. A window is
// emitted once its end passes the per-key watermark (max timestamp seen)
// minus the lateness allowance; records for already-emittable windows are
// counted and dropped. Partial windows come out only through flush().
class WindowAssembler {
public:
    WindowAssembler(int64_t window_ms, int64_t lateness_ms, double sample_rate_hz);

    OfferResult offer(const wire::SampleRecord& r);
    std::vector<SignalWindow> flush();
    const AssemblerStats& stats() const { return stats_; }

    // Max event time seen for one key; INT64_MIN before any record.
    int64_t watermark(const std::string& user, wire::DataType type) const;

private:
    struct Key {
        std::string user;
        wire::DataType type;
        auto operator<=>(const Key&) const = default;
    };
    struct KeyState {
        int64_t watermark = INT64_MIN;
        std::map<int64_t, std::map<int64_t, double>> pending;  // index -> ts -> value
    };

    SignalWindow build(const Key& key, int64_t index, std::map<int64_t, double>&& samples) const;

    int64_t window_ms_;
    int64_t lateness_ms_;
    double sample_rate_hz_;
    std::map<Key, KeyState> keys_;
    AssemblerStats stats_;
};

// Circular buffer of successive RR-interval differences. Each entry carries
// the difference and the duration of the RR interval it terminates, so the
// buffer can account for how much RR data it represents.
struct RrEntry {
    double diff_ms = 0.0;
    double span_ms = 0.0;
};

class RrBuffer {
public:
    explicit RrBuffer(size_t capacity, double full_span_ms = 60000.0);

    void push(RrEntry e);
    void push(std::span<const RrEntry> entries);

    bool full() const { return total_span_ms_ >= full_span_ms_; }
    double total_span_ms() const { return total_span_ms_; }
    size_t size() const { return entries_.size(); }
    size_t capacity() const { return capacity_; }

    std::vector<double> diffs() const;      // oldest -> newest
    std::vector<double> intervals() const;  // the spans, oldest -> newest

private:
    size_t capacity_;
    double full_span_ms_;
    double total_span_ms_ = 0.0;
    std::deque<RrEntry> entries_;
};

}  // namespace vitalcep::windowing
