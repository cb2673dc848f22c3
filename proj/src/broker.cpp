#include "vitalcep/broker.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "vitalcep/errors.hpp"

namespace fs = std::filesystem;

namespace vitalcep::broker {

namespace {

bool valid_topic_name(const std::string& name) {
    if (name.empty() || name.size() > 128) return false;
    for (char c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-')
            return false;
    return true;
}

// Whole-file rewrite through a temp + rename so readers never see a torn file.
void write_atomic(const fs::path& path, const std::string& contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw SourceUnreadable("cannot write " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, path);
}

}  // namespace

int64_t Broker::now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Broker::Broker(std::string data_dir) : data_dir_(std::move(data_dir)) {
    if (!data_dir_.empty()) {
        fs::create_directories(data_dir_);
        restore();
    }
}

Broker::~Broker() {
    try {
        sync();
    } catch (...) {
        // nothing sane to do in a destructor; data loss is limited to the
        // un-synced tail
    }
}

std::string Broker::topic_dir(const std::string& name) const {
    return (fs::path(data_dir_) / name).string();
}

Broker::Topic& Broker::find(const std::string& name) {
    auto it = topics_.find(name);
    if (it == topics_.end()) throw UnknownTopic("no such topic: " + name);
    return it->second;
}

const Broker::Topic& Broker::find(const std::string& name) const {
    auto it = topics_.find(name);
    if (it == topics_.end()) throw UnknownTopic("no such topic: " + name);
    return it->second;
}

void Broker::create_topic(const std::string& name, int64_t retention_ms) {
    if (!valid_topic_name(name))
        throw std::invalid_argument("topic name must be nonempty [A-Za-z0-9._-]: '" + name + "'");
    if (retention_ms < 0 && retention_ms != kInfiniteRetentionMs)
        throw std::invalid_argument("retention must be >= 0 ms or infinite");
    std::lock_guard lk(mu_);
    auto it = topics_.find(name);
    if (it != topics_.end()) {
        if (it->second.retention_ms != retention_ms)
            throw ConflictingRetention("topic '" + name + "' already exists with retention " +
                                       std::to_string(it->second.retention_ms) + " ms");
        return;  // idempotent re-create
    }
    Topic t;
    t.retention_ms = retention_ms;
    t.meta_dirty = true;
    topics_.emplace(name, std::move(t));
}

int64_t Broker::publish(const std::string& topic, const std::string& payload) {
    return publish(topic, payload, now_ms());
}

int64_t Broker::publish(const std::string& topic, const std::string& payload, int64_t arrival_ms) {
    std::lock_guard lk(mu_);
    Topic& t = find(topic);
    int64_t off = t.next_offset++;
    t.records.push_back({off, arrival_ms, payload});
    t.meta_dirty = true;
    return off;
}

PollResult Broker::poll(const std::string& topic, const std::string& group, size_t max_records) {
    std::lock_guard lk(mu_);
    Topic& t = find(topic);
    int64_t committed = 0;
    if (auto it = t.cursors.find(group); it != t.cursors.end()) committed = it->second;
    return read_locked(t, committed, max_records);
}

PollResult Broker::fetch(const std::string& topic, int64_t from_offset, size_t max_records) const {
    std::lock_guard lk(mu_);
    return read_locked(find(topic), from_offset, max_records);
}

PollResult Broker::read_locked(const Topic& t, int64_t from, size_t max_records) {
    auto first = std::partition_point(t.records.begin(), t.records.end(),
                                      [&](const Rec& r) { return r.offset < from; });
    PollResult out;
    if (first == t.records.end()) {
        out.gap = from < t.next_offset;  // the unread tail was pruned away
        return out;
    }
    out.gap = first->offset > from;
    for (auto it = first; it != t.records.end() && out.records.size() < max_records; ++it)
        out.records.push_back({it->offset, it->payload});
    return out;
}

void Broker::commit(const std::string& topic, const std::string& group, int64_t offset) {
    std::lock_guard lk(mu_);
    Topic& t = find(topic);
    if (offset > t.next_offset)
        throw OffsetAhead("commit " + std::to_string(offset) + " is past the log head " +
                          std::to_string(t.next_offset) + " on topic '" + topic + "'");
    int64_t& cur = t.cursors[group];
    cur = std::max(cur, offset);
    t.cursors_dirty = true;
    if (!data_dir_.empty()) flush_topic(topic, t);  // commit is the durability point
}

int64_t Broker::prune(const std::string& topic, int64_t now_ms) {
    std::lock_guard lk(mu_);
    Topic& t = find(topic);
    if (t.retention_ms == kInfiniteRetentionMs) return 0;
    int64_t cutoff = now_ms - t.retention_ms;
    size_t before = t.records.size();
    std::erase_if(t.records, [&](const Rec& r) { return r.arrival_ms < cutoff; });
    size_t removed = before - t.records.size();
    if (removed > 0) {
        t.need_rewrite = true;
        t.meta_dirty = true;
    }
    return static_cast<int64_t>(removed);
}

void Broker::sync() {
    if (data_dir_.empty()) return;
    std::lock_guard lk(mu_);
    for (auto& [name, t] : topics_) flush_topic(name, t);
}

std::vector<std::string> Broker::topic_names() const {
    std::lock_guard lk(mu_);
    std::vector<std::string> out;
    for (const auto& [name, _] : topics_) out.push_back(name);
    return out;
}

int64_t Broker::next_offset(const std::string& topic) const {
    std::lock_guard lk(mu_);
    return find(topic).next_offset;
}

int64_t Broker::committed(const std::string& topic, const std::string& group) const {
    std::lock_guard lk(mu_);
    const Topic& t = find(topic);
    auto it = t.cursors.find(group);
    return it == t.cursors.end() ? 0 : it->second;
}

// Layout per topic directory:
//   records.jsonl  — payload lines, one record per line, log order
//   arrivals.tsv   — "<offset>\t<arrival_ms>" lines, parallel to records.jsonl
//   cursors.tsv    — "<group>\t<offset>" lines
//   meta           — retention_ms / next_offset, key=value
void Broker::flush_topic(const std::string& name, Topic& t) {
    fs::path dir(topic_dir(name));
    fs::create_directories(dir);

    if (t.need_rewrite) {
        std::string recs, arrs;
        for (const Rec& r : t.records) {
            recs += r.payload;
            recs += '\n';
            arrs += std::to_string(r.offset) + '\t' + std::to_string(r.arrival_ms) + '\n';
        }
        write_atomic(dir / "records.jsonl", recs);
        write_atomic(dir / "arrivals.tsv", arrs);
        t.flushed = t.records.size();
        t.need_rewrite = false;
    } else if (t.flushed < t.records.size()) {
        std::ofstream recs(dir / "records.jsonl", std::ios::app);
        std::ofstream arrs(dir / "arrivals.tsv", std::ios::app);
        if (!recs || !arrs) throw SourceUnreadable("cannot append to log in " + dir.string());
        for (size_t i = t.flushed; i < t.records.size(); ++i) {
            const Rec& r = t.records[i];
            recs << r.payload << '\n';
            arrs << r.offset << '\t' << r.arrival_ms << '\n';
        }
        t.flushed = t.records.size();
    }

    if (t.meta_dirty) {
        write_atomic(dir / "meta", "retention_ms = " + std::to_string(t.retention_ms) +
                                       "\nnext_offset = " + std::to_string(t.next_offset) + "\n");
        t.meta_dirty = false;
    }
    if (t.cursors_dirty) {
        std::string cur;
        for (const auto& [group, off] : t.cursors)
            cur += group + '\t' + std::to_string(off) + '\n';
        write_atomic(dir / "cursors.tsv", cur);
        t.cursors_dirty = false;
    }
}

void Broker::restore() {
    for (const auto& entry : fs::directory_iterator(data_dir_)) {
        if (!entry.is_directory()) continue;
        fs::path dir = entry.path();
        if (!fs::exists(dir / "meta")) continue;
        std::string name = dir.filename().string();

        Topic t;
        {
            std::ifstream meta(dir / "meta");
            std::string key, eq;
            int64_t val;
            while (meta >> key >> eq >> val) {
                if (key == "retention_ms") t.retention_ms = val;
                if (key == "next_offset") t.next_offset = val;
            }
        }
        {
            std::ifstream recs(dir / "records.jsonl");
            std::ifstream arrs(dir / "arrivals.tsv");
            std::string payload, arrline;
            while (std::getline(recs, payload)) {
                if (!std::getline(arrs, arrline))
                    throw SourceUnreadable("arrivals.tsv shorter than records.jsonl in " +
                                           dir.string());
                size_t tab = arrline.find('\t');
                if (tab == std::string::npos)
                    throw SourceUnreadable("bad arrivals line in " + dir.string());
                Rec r;
                r.offset = std::stoll(arrline.substr(0, tab));
                r.arrival_ms = std::stoll(arrline.substr(tab + 1));
                r.payload = payload;
                t.records.push_back(std::move(r));
            }
        }
        t.flushed = t.records.size();
        if (!t.records.empty()) t.next_offset = std::max(t.next_offset, t.records.back().offset + 1);
        {
            std::ifstream curs(dir / "cursors.tsv");
            std::string line;
            while (std::getline(curs, line)) {
                size_t tab = line.find('\t');
                if (tab == std::string::npos) continue;
                t.cursors[line.substr(0, tab)] = std::stoll(line.substr(tab + 1));
            }
        }
        topics_.emplace(std::move(name), std::move(t));
    }
}

}  // namespace vitalcep::broker
