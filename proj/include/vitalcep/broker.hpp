#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace vitalcep::broker {

inline constexpr int64_t kInfiniteRetentionMs = -1;

struct PolledRecord {
    int64_t offset;
    std::string payload;
};

// `gap` is set when records between the committed offset and the first
// returned one were lost to retention pruning.
struct PollResult {
    std::vector<PolledRecord> records;
    bool gap = false;
};

// The surface jobs and producers program against; implemented by the
// embedded Broker and by the socket client, so either can sit behind a job.
class BrokerApi {
  public:
    virtual ~BrokerApi() = default;
    virtual void create_topic(const std::string& name, int64_t retention_ms) = 0;
    virtual int64_t publish(const std::string& topic, const std::string& payload) = 0;
    virtual PollResult poll(const std::string& topic, const std::string& group,
                            size_t max_records) = 0;
    virtual void commit(const std::string& topic, const std::string& group, int64_t offset) = 0;
    virtual int64_t prune(const std::string& topic, int64_t now_ms) = 0;
};

// Embedded append-only log broker. One mutex guards everything: the record
// volumes here are far below the point where per-topic locking would pay.
// With an empty data_dir the broker is memory-only; otherwise each topic
// owns a directory under data_dir and is made durable on commit and sync.
class Broker : public BrokerApi {
  public:
    explicit Broker(std::string data_dir = "");
    ~Broker() override;

    Broker(const Broker&) = delete;
    Broker& operator=(const Broker&) = delete;

    void create_topic(const std::string& name, int64_t retention_ms) override;
    int64_t publish(const std::string& topic, const std::string& payload) override;
    int64_t publish(const std::string& topic, const std::string& payload, int64_t arrival_ms);
    PollResult poll(const std::string& topic, const std::string& group,
                    size_t max_records) override;
    void commit(const std::string& topic, const std::string& group, int64_t offset) override;
    int64_t prune(const std::string& topic, int64_t now_ms) override;

    // Read records at offset >= from_offset without touching any cursor;
    // gap is set when from_offset points into a pruned range.
    PollResult fetch(const std::string& topic, int64_t from_offset, size_t max_records) const;

    // Flush every dirty topic to disk. No-op in memory-only mode.
    void sync();

    std::vector<std::string> topic_names() const;
    int64_t next_offset(const std::string& topic) const;
    int64_t committed(const std::string& topic, const std::string& group) const;

    static int64_t now_ms();

  private:
    struct Rec {
        int64_t offset;
        int64_t arrival_ms;
        std::string payload;
    };
    struct Topic {
        int64_t retention_ms = kInfiniteRetentionMs;
        int64_t next_offset = 0;
        std::deque<Rec> records;
        std::map<std::string, int64_t> cursors;
        size_t flushed = 0;         // records[0..flushed) already appended on disk
        bool need_rewrite = false;  // prune invalidated the on-disk log
        bool cursors_dirty = false;
        bool meta_dirty = false;
    };

    Topic& find(const std::string& name);
    const Topic& find(const std::string& name) const;
    static PollResult read_locked(const Topic& t, int64_t from, size_t max_records);
    std::string topic_dir(const std::string& name) const;
    void flush_topic(const std::string& name, Topic& t);
    void restore();

    std::string data_dir_;
    mutable std::mutex mu_;
    std::map<std::string, Topic> topics_;
};

}  // namespace vitalcep::broker
