#include "vitalcep/wire.hpp"

#include <cmath>

#include <json.hpp>

#include "vitalcep/errors.hpp"

namespace vitalcep::wire {

using json = nlohmann::ordered_json;

std::string to_string(DataType t) { return t == DataType::ECG ? "ECG" : "BP"; }

std::string to_string(ResultKind k) { return k == ResultKind::CHF_RISK ? "CHF_RISK" : "STRESS"; }

DataType data_type_from_string(const std::string& s) {
    if (s == "ECG") return DataType::ECG;
    if (s == "BP") return DataType::BP;
    throw MalformedRecord("unknown DataType: " + s);
}

SampleRecord SampleRecord::make(std::string user_id, DataType type, double value, int64_t timestamp_ms) {
    if (!std::isfinite(value)) throw MalformedRecord("sample value must be finite");
    if (timestamp_ms < 0) throw MalformedRecord("sample timestamp must be nonnegative");
    return SampleRecord{std::move(user_id), type, ValueType::DOUBLE, value, timestamp_ms};
}

ResultRecord ResultRecord::make(std::string user_id, ResultKind kind, int64_t window_start_ms,
                                int64_t window_end_ms, double value, std::map<std::string, double> aux) {
    if (window_start_ms >= window_end_ms) throw MalformedRecord("result window_start must precede window_end");
    if (!std::isfinite(value)) throw MalformedRecord("result value must be finite");
    double lo = 0.0;
    double hi = kind == ResultKind::CHF_RISK ? 100.0 : 1.0;
    if (value < lo || value > hi)
        throw MalformedRecord("result value " + std::to_string(value) + " outside [" + std::to_string(lo) +
                              "," + std::to_string(hi) + "] for kind " + to_string(kind));
    for (const auto& [k, v] : aux)
        if (!std::isfinite(v)) throw MalformedRecord("aux '" + k + "' must be finite");
    return ResultRecord{std::move(user_id), kind, window_start_ms, window_end_ms, value, std::move(aux)};
}

namespace {

json parse_object(std::string_view text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) throw MalformedRecord("not a JSON object");
    return j;
}

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw MalformedRecord(std::string("missing key: ") + key);
    return *it;
}

std::string require_string(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_string()) throw MalformedRecord(std::string(key) + " must be a string");
    return v.get<std::string>();
}

double require_finite_number(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number()) throw MalformedRecord(std::string(key) + " must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw MalformedRecord(std::string(key) + " must be finite");
    return d;
}

int64_t require_integer(const json& j, const char* key) {
    const json& v = require(j, key);
    if (v.is_number_integer()) return v.get<int64_t>();
    throw MalformedRecord(std::string(key) + " must be an integer");
}

}  // namespace

std::string encode_sample(const SampleRecord& r) {
    json j;
    j["UserID"] = r.user_id;
    j["DataType"] = to_string(r.data_type);
    j["ValueType"] = "DOUBLE";
    j["Value"] = r.value;
    j["TimeStamp"] = r.timestamp_ms;
    return j.dump();
}

SampleRecord decode_sample(std::string_view text, const DecodeOptions& opts) {
    json j = parse_object(text);
    std::string user = require_string(j, "UserID");
    DataType type = data_type_from_string(require_string(j, "DataType"));
    std::string vt = require_string(j, "ValueType");
    if (vt != "DOUBLE") throw MalformedRecord("unsupported ValueType: " + vt);
    double value = require_finite_number(j, "Value");
    int64_t ts = require_integer(j, "TimeStamp");
    if (opts.timestamps_in_seconds) {
        if (ts > INT64_MAX / 1000) throw MalformedRecord("TimeStamp overflows milliseconds");
        ts *= 1000;
    }
    return SampleRecord::make(std::move(user), type, value, ts);
}

std::string encode_result(const ResultRecord& r) {
    json j;
    j["UserID"] = r.user_id;
    j["Kind"] = to_string(r.kind);
    j["WindowStart"] = r.window_start_ms;
    j["WindowEnd"] = r.window_end_ms;
    j["Value"] = r.value;
    json aux = json::object();
    for (const auto& [k, v] : r.aux) aux[k] = v;
    j["Aux"] = std::move(aux);
    return j.dump();
}

ResultRecord decode_result(std::string_view text) {
    json j = parse_object(text);
    std::string user = require_string(j, "UserID");
    std::string kind_s = require_string(j, "Kind");
    ResultKind kind;
    if (kind_s == "CHF_RISK")
        kind = ResultKind::CHF_RISK;
    else if (kind_s == "STRESS")
        kind = ResultKind::STRESS;
    else
        throw MalformedRecord("unknown Kind: " + kind_s);
    int64_t ws = require_integer(j, "WindowStart");
    int64_t we = require_integer(j, "WindowEnd");
    double value = require_finite_number(j, "Value");
    std::map<std::string, double> aux;
    if (auto it = j.find("Aux"); it != j.end()) {
        if (!it->is_object()) throw MalformedRecord("Aux must be an object");
        for (auto& [k, v] : it->items()) {
            if (!v.is_number()) throw MalformedRecord("Aux entry '" + k + "' must be a number");
            double d = v.get<double>();
            if (!std::isfinite(d)) throw MalformedRecord("Aux entry '" + k + "' must be finite");
            aux[k] = d;
        }
    }
    return ResultRecord::make(std::move(user), kind, ws, we, value, std::move(aux));
}

std::string encode_diag(const DiagRecord& r) {
    json j;
    j["UserID"] = r.user_id;
    j["Kind"] = "DIAG";
    j["Job"] = r.job;
    j["WindowStart"] = r.window_start_ms;
    j["WindowEnd"] = r.window_end_ms;
    j["Reason"] = r.reason;
    return j.dump();
}

DiagRecord decode_diag(std::string_view text) {
    json j = parse_object(text);
    if (require_string(j, "Kind") != "DIAG") throw MalformedRecord("not a DIAG record");
    DiagRecord r;
    r.user_id = require_string(j, "UserID");
    r.job = require_string(j, "Job");
    r.window_start_ms = require_integer(j, "WindowStart");
    r.window_end_ms = require_integer(j, "WindowEnd");
    r.reason = require_string(j, "Reason");
    if (r.window_start_ms >= r.window_end_ms) throw MalformedRecord("diag window_start must precede window_end");
    return r;
}

bool is_diag_line(std::string_view text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) return false;
    auto it = j.find("Kind");
    return it != j.end() && it->is_string() && it->get<std::string>() == "DIAG";
}

}  // namespace vitalcep::wire
