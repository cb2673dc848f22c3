#include "vitalcep/store.hpp"

#include <cctype>
#include <filesystem>

#include "vitalcep/errors.hpp"

namespace vitalcep::runtime {

namespace {

// Anything outside the filename-safe set is folded to '_' so a hostile
// user_id cannot escape the store directory.
std::string sanitize(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
    return out.empty() ? "_" : out;
}

}  // namespace

ResultStore::ResultStore(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string ResultStore::file_name(const std::string& job, const std::string& user_id) {
    return sanitize(job) + "_" + sanitize(user_id) + ".jsonl";
}

std::string ResultStore::path_for(const std::string& job, const std::string& user_id) const {
    return (std::filesystem::path(dir_) / file_name(job, user_id)).string();
}

void ResultStore::append(const std::string& job, const std::string& user_id,
                         const std::string& line) {
    std::string path = path_for(job, user_id);
    auto it = files_.find(path);
    if (it == files_.end()) {
        std::ofstream f(path, std::ios::app);
        if (!f) throw SourceUnreadable("cannot open result file: " + path);
        it = files_.emplace(path, std::move(f)).first;
    }
    it->second << line << '\n';
    it->second.flush();
}

std::vector<std::string> ResultStore::read(const std::string& job, const std::string& user_id) const {
    std::vector<std::string> out;
    std::ifstream f(path_for(job, user_id));
    std::string line;
    while (std::getline(f, line)) out.push_back(line);
    return out;
}

}  // namespace vitalcep::runtime
