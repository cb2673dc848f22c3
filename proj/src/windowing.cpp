#include "vitalcep/windowing.hpp"

#include <stdexcept>

namespace vitalcep::windowing {

std::vector<double> SignalWindow::values() const {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& [ts, val] : samples) v.push_back(val);
    return v;
}

int64_t assign_index(int64_t timestamp_ms, int64_t window_length_ms) {
    if (window_length_ms <= 0) throw std::invalid_argument("window length must be positive");
    if (timestamp_ms >= 0) return timestamp_ms / window_length_ms;
    return -((-timestamp_ms + window_length_ms - 1) / window_length_ms);
}

WindowAssembler::WindowAssembler(int64_t window_ms, int64_t lateness_ms, double sample_rate_hz)
    : window_ms_(window_ms), lateness_ms_(lateness_ms), sample_rate_hz_(sample_rate_hz) {
    if (window_ms <= 0) throw std::invalid_argument("window_ms must be positive");
    if (lateness_ms < 0) throw std::invalid_argument("lateness_ms must be nonnegative");
}

SignalWindow WindowAssembler::build(const Key& key, int64_t index, std::map<int64_t, double>&& samples) const {
    SignalWindow w;
    w.user_id = key.user;
    w.data_type = key.type;
    w.window_start_ms = index * window_ms_;
    w.window_length_ms = window_ms_;
    w.sample_rate_hz = sample_rate_hz_;
    w.samples.assign(samples.begin(), samples.end());
    return w;
}

OfferResult WindowAssembler::offer(const wire::SampleRecord& r) {
    OfferResult res;
    Key key{r.user_id, r.data_type};
    KeyState& st = keys_[key];
    st.watermark = std::max(st.watermark, r.timestamp_ms);

    int64_t idx = assign_index(r.timestamp_ms, window_ms_);
    int64_t emit_horizon = st.watermark - lateness_ms_;  // windows ending at or before this are closed
    int64_t window_end = (idx + 1) * window_ms_;
    if (window_end <= emit_horizon) {
        ++stats_.dropped_late;
        return res;
    }

    auto [it, inserted] = st.pending[idx].emplace(r.timestamp_ms, r.value);
    if (!inserted) {
        ++stats_.dropped_duplicate;
        return res;
    }
    ++stats_.accepted;
    res.accepted = true;

    while (!st.pending.empty()) {
        auto first = st.pending.begin();
        if ((first->first + 1) * window_ms_ > emit_horizon) break;
        res.emitted.push_back(build(key, first->first, std::move(first->second)));
        ++stats_.windows_emitted;
        st.pending.erase(first);
    }
    return res;
}

int64_t WindowAssembler::watermark(const std::string& user, wire::DataType type) const {
    auto it = keys_.find(Key{user, type});
    return it == keys_.end() ? INT64_MIN : it->second.watermark;
}

std::vector<SignalWindow> WindowAssembler::flush() {
    std::vector<SignalWindow> out;
    for (auto& [key, st] : keys_) {
        for (auto& [idx, samples] : st.pending) {
            out.push_back(build(key, idx, std::move(samples)));
            ++stats_.windows_emitted;
        }
        st.pending.clear();
    }
    return out;
}

RrBuffer::RrBuffer(size_t capacity, double full_span_ms)
    : capacity_(capacity), full_span_ms_(full_span_ms) {
    if (capacity == 0) throw std::invalid_argument("RrBuffer capacity must be positive");
}

void RrBuffer::push(RrEntry e) {
    entries_.push_back(e);
    total_span_ms_ += e.span_ms;
    while (entries_.size() > capacity_) {
        total_span_ms_ -= entries_.front().span_ms;
        entries_.pop_front();
    }
}

void RrBuffer::push(std::span<const RrEntry> entries) {
    for (const RrEntry& e : entries) push(e);
}

std::vector<double> RrBuffer::diffs() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const RrEntry& e : entries_) out.push_back(e.diff_ms);
    return out;
}

std::vector<double> RrBuffer::intervals() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const RrEntry& e : entries_) out.push_back(e.span_ms);
    return out;
}

}  // namespace vitalcep::windowing
