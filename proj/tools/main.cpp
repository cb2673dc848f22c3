#include <atomic>
#include <cctype>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include "CLI11.hpp"
#include "vitalcep/broker.hpp"
#include "vitalcep/config.hpp"
#include "vitalcep/errors.hpp"
#include "vitalcep/job.hpp"
#include "vitalcep/producer.hpp"
#include "vitalcep/socket.hpp"
#include "vitalcep/store.hpp"
#include "vitalcep/synth.hpp"
#include "vitalcep/wire.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void install_signal_handlers() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

using namespace vitalcep;

wire::DataType parse_type_name(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return wire::data_type_from_string(s);
}

// The CLI talks to a served broker when an address is configured, otherwise
// it owns an embedded one (single-process operation).
struct ApiHandle {
    std::unique_ptr<broker::Broker> embedded;
    std::unique_ptr<runtime::BrokerClient> remote;
    broker::BrokerApi& get() { return remote ? static_cast<broker::BrokerApi&>(*remote) : *embedded; }
};

ApiHandle open_api(const std::string& addr, const std::string& data_dir) {
    ApiHandle h;
    if (!addr.empty())
        h.remote = std::make_unique<runtime::BrokerClient>(addr);
    else
        h.embedded = std::make_unique<broker::Broker>(data_dir);
    return h;
}

int cmd_broker(const std::string& listen, const std::string& data_dir, int64_t prune_every_s) {
    broker::Broker b(data_dir);
    runtime::BrokerServer server(b, listen);
    server.start();
    std::cerr << "broker listening on port " << server.bound_port()
              << (data_dir.empty() ? " (memory only)" : " data-dir " + data_dir) << "\n";
    auto last_prune = std::chrono::steady_clock::now();
    while (!g_stop) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        auto now = std::chrono::steady_clock::now();
        if (prune_every_s > 0 && now - last_prune >= std::chrono::seconds(prune_every_s)) {
            for (const std::string& t : b.topic_names()) b.prune(t, broker::Broker::now_ms());
            last_prune = now;
        }
    }
    server.stop();
    b.sync();
    std::cerr << "broker stopped\n";
    return 0;
}

int cmd_produce(const runtime::ReplaySpec& spec, const std::string& addr,
                const std::string& data_dir, int64_t retention_ms) {
    ApiHandle api = open_api(addr, data_dir);
    api.get().create_topic(spec.topic, retention_ms);
    runtime::ProducerStats stats = runtime::run_producer(api.get(), spec, &g_stop);
    std::cerr << "published=" << stats.published << " skipped=" << stats.skipped << "\n";
    return 0;
}

int cmd_job(const std::string& kind, const std::string& config_path, const std::string& addr_flag) {
    Config file_cfg = config_path.empty() ? Config() : Config::from_file(config_path);
    runtime::PipelineConfig cfg = runtime::PipelineConfig::from(file_cfg);
    if (!addr_flag.empty()) cfg.broker_addr = addr_flag;

    ApiHandle api = open_api(cfg.broker_addr, cfg.broker_data_dir);
    runtime::create_pipeline_topics(api.get(), cfg);
    runtime::ResultStore store(cfg.store_dir);

    std::unique_ptr<runtime::Job> job;
    if (kind == "risk")
        job = std::make_unique<runtime::RiskJob>(api.get(), cfg, store);
    else
        job = std::make_unique<runtime::StressJob>(api.get(), cfg, store);
    std::cerr << job->name() << " job consuming from broker"
              << (cfg.broker_addr.empty() ? " (embedded)" : " at " + cfg.broker_addr) << "\n";
    job->run(g_stop);
    return 0;
}

int cmd_results_tail(const std::string& store_dir, const std::string& job,
                     const std::string& user, bool follow) {
    runtime::ResultStore store(store_dir);
    std::string path = store.path_for(job, user);
    std::ifstream f(path);
    if (!f && !follow) {
        std::cerr << "no results at " << path << "\n";
        return 1;
    }
    std::string line;
    std::streampos pos = 0;
    do {
        if (!f.is_open()) f.open(path);
        if (f.is_open()) {
            f.clear();
            f.seekg(pos);
            while (std::getline(f, line)) {
                std::cout << line << "\n";
                pos = f.tellg();
            }
        }
        if (follow) std::this_thread::sleep_for(std::chrono::milliseconds(200));
    } while (follow && !g_stop);
    return 0;
}

int cmd_run(const std::string& config_path) {
    Config file_cfg = Config::from_file(config_path);
    runtime::PipelineConfig cfg = runtime::PipelineConfig::from(file_cfg);

    // producer.N.file / .user / .type / .rate / .clock / .speed / .loop
    std::vector<runtime::ReplaySpec> specs;
    for (int i = 0; i < 64; ++i) {
        std::string prefix = "producer." + std::to_string(i) + ".";
        if (!file_cfg.has(prefix + "file")) continue;
        runtime::ReplaySpec s;
        s.path = file_cfg.get(prefix + "file");
        s.user_id = file_cfg.get(prefix + "user", "user" + std::to_string(i));
        std::string type = file_cfg.get(prefix + "type", "ecg");
        s.data_type = parse_type_name(type);
        s.topic = file_cfg.get(prefix + "topic",
                               s.data_type == wire::DataType::ECG ? cfg.ecg_topic : cfg.bp_topic);
        s.sample_rate_hz = file_cfg.get_double(
            prefix + "rate", s.data_type == wire::DataType::ECG ? cfg.ecg_rate_hz : cfg.bp_rate_hz);
        s.clock = runtime::clock_mode_from_string(file_cfg.get(prefix + "clock", "afap"));
        s.accel_factor = file_cfg.get_double(prefix + "speed", 1.0);
        s.loop_count = static_cast<uint64_t>(file_cfg.get_int(prefix + "loop", 1));
        s.timestamps_in_seconds = file_cfg.get_bool(prefix + "seconds_ts", false);
        specs.push_back(std::move(s));
    }
    if (specs.empty()) throw ConfigError("config defines no producer.N.file entries");

    ApiHandle api = open_api(cfg.broker_addr, cfg.broker_data_dir);
    runtime::RunReport report = runtime::run_pipeline(api.get(), cfg, specs);
    std::cerr << "produced=" << report.produced.published
              << " skipped=" << report.produced.skipped << "\n"
              << report.risk.line("chf_risk") << "\n"
              << report.stress.line("stress") << "\n"
              << "results in " << cfg.store_dir << "\n";
    return 0;
}

int cmd_gen(const std::string& out_dir, int users, double seconds, double ecg_rate, double bp_rate) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    double ms = seconds * 1000.0;
    for (int u = 0; u < users; ++u) {
        std::string uid = std::to_string(101 + u);
        double hr = 66.0 + 14.0 * u;
        std::vector<double> ecg =
            synth::ecg_modulated_rr(60000.0 / hr, 35.0, 0.05 + 0.02 * u, ecg_rate, ms);
        std::vector<double> bp =
            synth::bp_series(118.0 + 6.0 * u, 76.0 + 4.0 * u, hr / 60.0, bp_rate, ms);

        std::ofstream fe(fs::path(out_dir) / ("user" + uid + "_ecg.csv"));
        for (double v : ecg) fe << v << "\n";
        std::ofstream fb(fs::path(out_dir) / ("user" + uid + "_bp.csv"));
        for (double v : bp) fb << v << "\n";
        std::cerr << "user " << uid << ": " << ecg.size() << " ecg samples, " << bp.size()
                  << " bp samples\n";
    }
    std::cerr << "wrote signal files to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    install_signal_handlers();
    CLI::App app{"vitalcep: streaming physiological analytics over an embedded pub/sub log"};
    app.require_subcommand(1);

    // broker
    auto* broker_cmd = app.add_subcommand("broker", "serve a broker over a TCP line protocol");
    std::string listen = "127.0.0.1:7781", broker_data;
    int64_t prune_every = 60;
    broker_cmd->add_option("--listen", listen, "host:port to bind (port 0 = ephemeral)");
    broker_cmd->add_option("--data-dir", broker_data, "persistence directory (empty = memory only)");
    broker_cmd->add_option("--prune-every", prune_every, "seconds between retention sweeps (0 = never)");

    // produce
    auto* produce_cmd = app.add_subcommand("produce", "replay a signal file into a topic");
    runtime::ReplaySpec spec;
    std::string produce_addr, produce_data, clock_name = "afap", type_name = "ecg";
    int64_t produce_retention = broker::kInfiniteRetentionMs;
    produce_cmd->add_option("--file", spec.path, "CSV source: timestamp_ms,value or value-per-line")
        ->required();
    produce_cmd->add_option("--topic", spec.topic, "destination topic")->required();
    produce_cmd->add_option("--user", spec.user_id, "user id stamped on records")->required();
    produce_cmd->add_option("--type", type_name, "signal type: ecg|bp");
    produce_cmd->add_option("--rate", spec.sample_rate_hz, "sample rate in Hz");
    produce_cmd->add_option("--clock", clock_name, "realtime|accelerated|afap");
    produce_cmd->add_option("--speed", spec.accel_factor, "speedup for accelerated clock");
    produce_cmd->add_option("--loop", spec.loop_count, "number of passes over the file");
    produce_cmd->add_flag("--seconds-ts", spec.timestamps_in_seconds,
                          "file timestamps are seconds, not ms");
    produce_cmd->add_option("--addr", produce_addr, "served broker host:port (default embedded)");
    produce_cmd->add_option("--data-dir", produce_data, "embedded broker persistence dir");
    produce_cmd->add_option("--retention", produce_retention, "retention ms for topic creation");

    // job
    auto* job_cmd = app.add_subcommand("job", "run an analytics job");
    std::string job_kind, job_config, job_addr;
    job_cmd->add_option("kind", job_kind, "risk|stress")
        ->required()
        ->check(CLI::IsMember({"risk", "stress"}));
    job_cmd->add_option("--config", job_config, "pipeline config file");
    job_cmd->add_option("--addr", job_addr, "served broker host:port (overrides config)");

    // results
    auto* results_cmd = app.add_subcommand("results", "inspect the result store");
    auto* tail_cmd = results_cmd->add_subcommand("tail", "print results for one job and user");
    std::string tail_store = "results", tail_job = "stress", tail_user;
    bool tail_follow = false;
    tail_cmd->add_option("--store", tail_store, "result store directory");
    tail_cmd->add_option("--kind", tail_job, "job name: chf_risk|stress");
    tail_cmd->add_option("--user", tail_user, "user id")->required();
    tail_cmd->add_flag("--follow", tail_follow, "keep watching for new lines");
    results_cmd->require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "run producers and both jobs from one config");
    std::string run_config;
    run_cmd->add_option("--config", run_config, "pipeline + producer config file")->required();

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "write synthetic ECG/BP signal files");
    std::string gen_out = "data";
    int gen_users = 2;
    double gen_seconds = 600.0, gen_ecg_rate = 500.0, gen_bp_rate = 50.0;
    gen_cmd->add_option("--out", gen_out, "output directory");
    gen_cmd->add_option("--users", gen_users, "number of users");
    gen_cmd->add_option("--seconds", gen_seconds, "signal duration in seconds");
    gen_cmd->add_option("--ecg-rate", gen_ecg_rate, "ECG sample rate Hz");
    gen_cmd->add_option("--bp-rate", gen_bp_rate, "BP sample rate Hz");

    CLI11_PARSE(app, argc, argv);

    try {
        if (broker_cmd->parsed()) return cmd_broker(listen, broker_data, prune_every);
        if (produce_cmd->parsed()) {
            spec.clock = runtime::clock_mode_from_string(clock_name);
            spec.data_type = parse_type_name(type_name);
            return cmd_produce(spec, produce_addr, produce_data, produce_retention);
        }
        if (job_cmd->parsed()) return cmd_job(job_kind, job_config, job_addr);
        if (results_cmd->parsed())
            return cmd_results_tail(tail_store, tail_job, tail_user, tail_follow);
        if (run_cmd->parsed()) return cmd_run(run_config);
        if (gen_cmd->parsed())
            return cmd_gen(gen_out, gen_users, gen_seconds, gen_ecg_rate, gen_bp_rate);
    } catch (const vitalcep::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
