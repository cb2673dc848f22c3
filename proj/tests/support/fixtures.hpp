#pragma once

#include <functional>
#include <memory>
#include <string>

#include "broker_suite.hpp"
#include "helpers.hpp"
#include "vitalcep/broker.hpp"
#include "vitalcep/socket.hpp"

namespace testutil {

// Delegates every call to whatever broker the owner currently holds, so a
// handle made before restart() keeps working afterwards.
class ForwardingApi : public vitalcep::broker::BrokerApi {
  public:
    explicit ForwardingApi(std::function<vitalcep::broker::BrokerApi&()> target)
        : target_(std::move(target)) {}

    void create_topic(const std::string& name, int64_t retention_ms) override {
        target_().create_topic(name, retention_ms);
    }
    int64_t publish(const std::string& topic, const std::string& payload) override {
        return target_().publish(topic, payload);
    }
    vitalcep::broker::PollResult poll(const std::string& topic, const std::string& group,
                                      size_t max_records) override {
        return target_().poll(topic, group, max_records);
    }
    void commit(const std::string& topic, const std::string& group, int64_t offset) override {
        target_().commit(topic, group, offset);
    }
    int64_t prune(const std::string& topic, int64_t now_ms) override {
        return target_().prune(topic, now_ms);
    }

  private:
    std::function<vitalcep::broker::BrokerApi&()> target_;
};

class EmbeddedFixture : public broker_suite::Fixture {
  public:
    EmbeddedFixture() { boot(); }

    vitalcep::broker::BrokerApi& api() override { return *broker_; }
    vitalcep::broker::Broker& broker() { return *broker_; }

    std::unique_ptr<vitalcep::broker::BrokerApi> make_client() override {
        return std::make_unique<ForwardingApi>(
            [this]() -> vitalcep::broker::BrokerApi& { return *broker_; });
    }

    bool can_restart() const override { return true; }
    void restart() override {
        broker_.reset();  // destructor syncs; reopen restores
        boot();
    }

  private:
    void boot() { broker_ = std::make_unique<vitalcep::broker::Broker>(dir_.sub("broker")); }

    TempDir dir_;
    std::unique_ptr<vitalcep::broker::Broker> broker_;
};

class SocketFixture : public broker_suite::Fixture {
  public:
    SocketFixture() { boot(); }
    ~SocketFixture() override {
        client_.reset();
        if (server_) server_->stop();
    }

    vitalcep::broker::BrokerApi& api() override { return *client_; }
    vitalcep::runtime::BrokerClient& client() { return *client_; }
    vitalcep::broker::Broker& broker() { return *broker_; }
    std::string addr() const {
        return "127.0.0.1:" + std::to_string(server_->bound_port());
    }

    std::unique_ptr<vitalcep::broker::BrokerApi> make_client() override {
        return std::make_unique<vitalcep::runtime::BrokerClient>(addr());
    }

    bool can_restart() const override { return true; }
    void restart() override {
        client_.reset();
        server_->stop();
        server_.reset();
        broker_.reset();
        boot();
    }

  private:
    void boot() {
        broker_ = std::make_unique<vitalcep::broker::Broker>(dir_.sub("broker"));
        server_ = std::make_unique<vitalcep::runtime::BrokerServer>(*broker_, "127.0.0.1:0");
        server_->start();
        client_ = std::make_unique<vitalcep::runtime::BrokerClient>(addr());
    }

    TempDir dir_;
    std::unique_ptr<vitalcep::broker::Broker> broker_;
    std::unique_ptr<vitalcep::runtime::BrokerServer> server_;
    std::unique_ptr<vitalcep::runtime::BrokerClient> client_;
};

}  // namespace testutil
