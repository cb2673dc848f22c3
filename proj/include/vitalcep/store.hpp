#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace vitalcep::runtime {

// Append-only result persistence: one line-delimited file per (job, user)
// under a single directory. Lines are flushed as they land so a tail reader
// and a post-run byte comparison both see complete records.
class ResultStore {
  public:
    explicit ResultStore(std::string dir);

    void append(const std::string& job, const std::string& user_id, const std::string& line);

    static std::string file_name(const std::string& job, const std::string& user_id);
    std::string path_for(const std::string& job, const std::string& user_id) const;

    // All lines currently in one (job, user) file; empty if absent.
    std::vector<std::string> read(const std::string& job, const std::string& user_id) const;

    const std::string& dir() const { return dir_; }

  private:
    std::string dir_;
    std::map<std::string, std::ofstream> files_;
};

}  // namespace vitalcep::runtime
