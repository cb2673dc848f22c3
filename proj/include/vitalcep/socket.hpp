#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vitalcep/broker.hpp"

namespace vitalcep::runtime {

// Line protocol spoken over TCP, one command per line, every response line
// LF-terminated:
//
//   CREATE <topic> <retention_ms|inf>          -> OK
//   PUB <topic>                                -> OK <offset>
//     <payload line>
//   POLL <topic> <group> <max>                 -> OK <count> <gap 0|1>, then
//     count repetitions of: MSG <offset> / <payload line>
//   COMMIT <topic> <group> <offset>            -> OK
//   PRUNE <topic> <now_ms>                     -> OK <removed>
//   SUB <topic> <group>                        -> OK, then an endless stream of
//     MSG <offset> / <payload line> pairs as records become available
//
// Errors answer `ERR <Kind> <message>` where Kind names the broker error
// (UnknownTopic, ConflictingRetention, OffsetAhead, BadRequest, Internal),
// so a remote caller sees the same failure taxonomy as an embedded one.

// Serves one embedded broker to remote clients; thread per connection.
class BrokerServer {
  public:
    // addr is "host:port"; port 0 binds an ephemeral port (see bound_port()).
    BrokerServer(broker::Broker& broker, const std::string& addr);
    ~BrokerServer();

    void start();
    void stop();
    int bound_port() const { return port_; }

  private:
    void accept_loop();
    void serve_connection(int fd);

    broker::Broker& broker_;
    std::string host_;
    int port_ = 0;
    int listen_fd_ = -1;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex conn_mu_;
    std::vector<int> conn_fds_;
    std::vector<std::thread> conn_threads_;
};

// Remote handle on a served broker; satisfies the same interface as the
// embedded one so jobs, producers, and the broker test suite run unchanged
// against it. Safe for concurrent use (requests are serialized).
class BrokerClient : public broker::BrokerApi {
  public:
    explicit BrokerClient(const std::string& addr);
    ~BrokerClient() override;

    void create_topic(const std::string& name, int64_t retention_ms) override;
    int64_t publish(const std::string& topic, const std::string& payload) override;
    broker::PollResult poll(const std::string& topic, const std::string& group,
                            size_t max_records) override;
    void commit(const std::string& topic, const std::string& group, int64_t offset) override;
    int64_t prune(const std::string& topic, int64_t now_ms) override;

    // Streaming subscription on a dedicated connection.
    class Subscription {
      public:
        Subscription(const std::string& addr, const std::string& topic, const std::string& group);
        ~Subscription();
        // Next record, or nullopt once `timeout_ms` passes with nothing new.
        std::optional<broker::PolledRecord> next(int timeout_ms);

      private:
        int fd_ = -1;
        std::string buf_;
        std::optional<std::string> read_line(int timeout_ms);
    };

    std::unique_ptr<Subscription> subscribe(const std::string& topic, const std::string& group);

  private:
    std::string request(const std::string& command, const std::string* payload_line = nullptr);
    std::string read_line();

    std::string addr_;
    std::mutex mu_;
    int fd_ = -1;
    std::string buf_;
};

}  // namespace vitalcep::runtime
