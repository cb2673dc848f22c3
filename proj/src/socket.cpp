#include "vitalcep/socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <sstream>
#include <thread>

#include "vitalcep/errors.hpp"

namespace vitalcep::runtime {

namespace {

std::pair<std::string, int> parse_addr(const std::string& addr) {
    size_t colon = addr.rfind(':');
    std::string host = colon == std::string::npos ? "" : addr.substr(0, colon);
    std::string port_text = colon == std::string::npos ? addr : addr.substr(colon + 1);
    if (host.empty()) host = "127.0.0.1";
    try {
        size_t used = 0;
        int port = std::stoi(port_text, &used);
        if (used != port_text.size() || port < 0 || port > 65535) throw std::exception();
        return {host, port};
    } catch (const std::exception&) {
        throw ConfigError("bad listen address '" + addr + "', want host:port");
    }
}

bool send_all(int fd, std::string_view data) {
    while (!data.empty()) {
        ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n <= 0) return false;
        data.remove_prefix(static_cast<size_t>(n));
    }
    return true;
}

// Pull one LF-terminated line out of (fd, buf); false on EOF/error.
bool recv_line(int fd, std::string& buf, std::string& line) {
    for (;;) {
        size_t nl = buf.find('\n');
        if (nl != std::string::npos) {
            line = buf.substr(0, nl);
            buf.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        char chunk[4096];
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) return false;
        buf.append(chunk, static_cast<size_t>(n));
    }
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

int64_t parse_i64(const std::string& s) {
    size_t used = 0;
    int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad integer: " + s);
    return v;
}

int connect_to(const std::string& addr) {
    auto [host, port] = parse_addr(addr);
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
        throw Error("cannot resolve broker address " + addr);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
        ::freeaddrinfo(res);
        if (fd >= 0) ::close(fd);
        throw Error("cannot connect to broker at " + addr);
    }
    ::freeaddrinfo(res);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return fd;
}

[[noreturn]] void throw_remote(const std::string& kind, const std::string& message) {
    if (kind == "UnknownTopic") throw UnknownTopic(message);
    if (kind == "ConflictingRetention") throw ConflictingRetention(message);
    if (kind == "OffsetAhead") throw OffsetAhead(message);
    if (kind == "BadRequest") throw std::invalid_argument(message);
    throw Error(kind + ": " + message);
}

}  // namespace

BrokerServer::BrokerServer(broker::Broker& broker, const std::string& addr) : broker_(broker) {
    std::tie(host_, port_) = parse_addr(addr);
}

BrokerServer::~BrokerServer() { stop(); }

void BrokerServer::start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error("socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(static_cast<uint16_t>(port_));
    if (::inet_pton(AF_INET, host_.c_str(), &sa.sin_addr) != 1)
        throw ConfigError("listen host must be an IPv4 address, got '" + host_ + "'");
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0)
        throw Error("cannot bind " + host_ + ":" + std::to_string(port_) + ": " +
                    std::strerror(errno));
    if (::listen(listen_fd_, 64) != 0) throw Error("listen() failed");

    socklen_t len = sizeof sa;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);

    accept_thread_ = std::thread([this] { accept_loop(); });
}

void BrokerServer::stop() {
    if (listen_fd_ < 0) return;
    stopping_ = true;
    ::shutdown(listen_fd_, SHUT_RDWR);
    if (accept_thread_.joinable()) accept_thread_.join();
    {
        std::lock_guard lk(conn_mu_);
        for (int fd : conn_fds_)
            if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
    }
    for (auto& t : conn_threads_)
        if (t.joinable()) t.join();
    {
        std::lock_guard lk(conn_mu_);
        for (int fd : conn_fds_)
            if (fd >= 0) ::close(fd);
        conn_fds_.clear();
        conn_threads_.clear();
    }
    ::close(listen_fd_);
    listen_fd_ = -1;
    broker_.sync();
}

void BrokerServer::accept_loop() {
    for (;;) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (stopping_) return;
            continue;
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        std::lock_guard lk(conn_mu_);
        if (stopping_) {
            ::close(fd);
            return;
        }
        conn_fds_.push_back(fd);
        conn_threads_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void BrokerServer::serve_connection(int fd) {
    // Connections that end on their own release their fd eagerly; the slot is
    // tombstoned so stop() never touches a number the OS may have reused.
    struct Release {
        BrokerServer* srv;
        int fd;
        ~Release() {
            std::lock_guard lk(srv->conn_mu_);
            for (int& f : srv->conn_fds_)
                if (f == fd) {
                    ::close(f);
                    f = -1;
                    break;
                }
        }
    } release{this, fd};

    std::string buf, line;
    while (!stopping_ && recv_line(fd, buf, line)) {
        std::vector<std::string> tok = split_ws(line);
        if (tok.empty()) continue;
        std::string reply;
        try {
            if (tok[0] == "CREATE" && tok.size() == 3) {
                int64_t ret = tok[2] == "inf" ? broker::kInfiniteRetentionMs : parse_i64(tok[2]);
                broker_.create_topic(tok[1], ret);
                reply = "OK\n";
            } else if (tok[0] == "PUB" && tok.size() == 2) {
                std::string payload;
                if (!recv_line(fd, buf, payload)) return;
                reply = "OK " + std::to_string(broker_.publish(tok[1], payload)) + "\n";
            } else if (tok[0] == "POLL" && tok.size() == 4) {
                auto res = broker_.poll(tok[1], tok[2], static_cast<size_t>(parse_i64(tok[3])));
                reply = "OK " + std::to_string(res.records.size()) + (res.gap ? " 1\n" : " 0\n");
                for (const auto& r : res.records)
                    reply += "MSG " + std::to_string(r.offset) + "\n" + r.payload + "\n";
            } else if (tok[0] == "COMMIT" && tok.size() == 4) {
                broker_.commit(tok[1], tok[2], parse_i64(tok[3]));
                reply = "OK\n";
            } else if (tok[0] == "PRUNE" && tok.size() == 3) {
                reply = "OK " + std::to_string(broker_.prune(tok[1], parse_i64(tok[2]))) + "\n";
            } else if (tok[0] == "SUB" && tok.size() == 3) {
                int64_t pos = broker_.committed(tok[1], tok[2]);  // throws on unknown topic
                if (!send_all(fd, "OK\n")) return;
                while (!stopping_) {
                    auto res = broker_.fetch(tok[1], pos, 256);
                    if (res.records.empty()) {
                        pollfd pfd{fd, POLLIN | POLLRDHUP, 0};
                        if (::poll(&pfd, 1, 5) > 0 &&
                            (pfd.revents & (POLLHUP | POLLRDHUP | POLLERR)))
                            return;  // subscriber went away
                        continue;
                    }
                    std::string batch;
                    for (const auto& r : res.records)
                        batch += "MSG " + std::to_string(r.offset) + "\n" + r.payload + "\n";
                    if (!send_all(fd, batch)) return;
                    pos = res.records.back().offset + 1;
                }
                return;
            } else {
                reply = "ERR BadRequest unrecognized command\n";
            }
        } catch (const UnknownTopic& e) {
            reply = std::string("ERR UnknownTopic ") + e.what() + "\n";
        } catch (const ConflictingRetention& e) {
            reply = std::string("ERR ConflictingRetention ") + e.what() + "\n";
        } catch (const OffsetAhead& e) {
            reply = std::string("ERR OffsetAhead ") + e.what() + "\n";
        } catch (const std::invalid_argument& e) {
            reply = std::string("ERR BadRequest ") + e.what() + "\n";
        } catch (const std::exception& e) {
            reply = std::string("ERR Internal ") + e.what() + "\n";
        }
        if (!send_all(fd, reply)) break;
    }
}

BrokerClient::BrokerClient(const std::string& addr) : addr_(addr) { fd_ = connect_to(addr); }

BrokerClient::~BrokerClient() {
    if (fd_ >= 0) ::close(fd_);
}

std::string BrokerClient::read_line() {
    std::string line;
    if (!recv_line(fd_, buf_, line)) throw Error("broker connection closed");
    return line;
}

// Sends one command (plus optional payload line) and returns the body of the
// OK response; remote errors re-throw as their local exception types.
std::string BrokerClient::request(const std::string& command, const std::string* payload_line) {
    std::string msg = command + "\n";
    if (payload_line) msg += *payload_line + "\n";
    if (!send_all(fd_, msg)) throw Error("broker connection lost");
    std::string line = read_line();
    if (line.rfind("OK", 0) == 0) return line.size() > 3 ? line.substr(3) : "";
    if (line.rfind("ERR ", 0) == 0) {
        std::string rest = line.substr(4);
        size_t sp = rest.find(' ');
        throw_remote(rest.substr(0, sp), sp == std::string::npos ? "" : rest.substr(sp + 1));
    }
    throw Error("malformed broker response: " + line);
}

void BrokerClient::create_topic(const std::string& name, int64_t retention_ms) {
    std::lock_guard lk(mu_);
    request("CREATE " + name + " " +
            (retention_ms == broker::kInfiniteRetentionMs ? std::string("inf")
                                                          : std::to_string(retention_ms)));
}

int64_t BrokerClient::publish(const std::string& topic, const std::string& payload) {
    std::lock_guard lk(mu_);
    return parse_i64(request("PUB " + topic, &payload));
}

broker::PollResult BrokerClient::poll(const std::string& topic, const std::string& group,
                                      size_t max_records) {
    std::lock_guard lk(mu_);
    std::string body =
        request("POLL " + topic + " " + group + " " + std::to_string(max_records));
    std::vector<std::string> tok = split_ws(body);
    if (tok.size() != 2) throw Error("malformed POLL response: " + body);
    broker::PollResult out;
    out.gap = tok[1] == "1";
    size_t count = static_cast<size_t>(parse_i64(tok[0]));
    for (size_t i = 0; i < count; ++i) {
        std::string head = read_line();
        if (head.rfind("MSG ", 0) != 0) throw Error("malformed POLL stream: " + head);
        broker::PolledRecord r;
        r.offset = parse_i64(head.substr(4));
        r.payload = read_line();
        out.records.push_back(std::move(r));
    }
    return out;
}

void BrokerClient::commit(const std::string& topic, const std::string& group, int64_t offset) {
    std::lock_guard lk(mu_);
    request("COMMIT " + topic + " " + group + " " + std::to_string(offset));
}

int64_t BrokerClient::prune(const std::string& topic, int64_t now_ms) {
    std::lock_guard lk(mu_);
    return parse_i64(request("PRUNE " + topic + " " + std::to_string(now_ms)));
}

std::unique_ptr<BrokerClient::Subscription> BrokerClient::subscribe(const std::string& topic,
                                                                    const std::string& group) {
    return std::make_unique<Subscription>(addr_, topic, group);
}

BrokerClient::Subscription::Subscription(const std::string& addr, const std::string& topic,
                                         const std::string& group) {
    fd_ = connect_to(addr);
    std::string msg = "SUB " + topic + " " + group + "\n";
    if (!send_all(fd_, msg)) throw Error("broker connection lost");
    auto line = read_line(5000);
    if (!line) throw Error("no response to SUB");
    if (line->rfind("OK", 0) != 0) {
        if (line->rfind("ERR ", 0) == 0) {
            std::string rest = line->substr(4);
            size_t sp = rest.find(' ');
            throw_remote(rest.substr(0, sp), sp == std::string::npos ? "" : rest.substr(sp + 1));
        }
        throw Error("malformed SUB response: " + *line);
    }
}

BrokerClient::Subscription::~Subscription() {
    if (fd_ >= 0) ::close(fd_);
}

std::optional<std::string> BrokerClient::Subscription::read_line(int timeout_ms) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        size_t nl = buf_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buf_.substr(0, nl);
            buf_.erase(0, nl + 1);
            return line;
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now())
                        .count();
        if (left <= 0) return std::nullopt;
        pollfd pfd{fd_, POLLIN, 0};
        int rc = ::poll(&pfd, 1, static_cast<int>(left));
        if (rc <= 0) return std::nullopt;
        char chunk[4096];
        ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n <= 0) throw Error("subscription connection closed");
        buf_.append(chunk, static_cast<size_t>(n));
    }
}

std::optional<broker::PolledRecord> BrokerClient::Subscription::next(int timeout_ms) {
    auto head = read_line(timeout_ms);
    if (!head) return std::nullopt;
    if (head->rfind("MSG ", 0) != 0) throw Error("malformed subscription stream: " + *head);
    broker::PolledRecord r;
    r.offset = parse_i64(head->substr(4));
    auto payload = read_line(timeout_ms);
    if (!payload) throw Error("subscription stream truncated");
    r.payload = *payload;
    return r;
}

}  // namespace vitalcep::runtime
