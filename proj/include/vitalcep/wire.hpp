#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace vitalcep::wire {

enum class DataType { ECG, BP };
enum class ValueType { DOUBLE };
enum class ResultKind { CHF_RISK, STRESS };

std::string to_string(DataType t);
std::string to_string(ResultKind k);
DataType data_type_from_string(const std::string& s);  // throws MalformedRecord

// One timestamped sensor sample, the broker's unit of transport.
struct SampleRecord {
    std::string user_id;
    DataType data_type = DataType::ECG;
    ValueType value_type = ValueType::DOUBLE;
    double value = 0.0;
    int64_t timestamp_ms = 0;

    // Validating factory: value must be finite, timestamp nonnegative.
    static SampleRecord make(std::string user_id, DataType type, double value, int64_t timestamp_ms);

    bool operator==(const SampleRecord&) const = default;
};

// Per-window analytic output published back and persisted.
struct ResultRecord {
    std::string user_id;
    ResultKind kind = ResultKind::CHF_RISK;
    int64_t window_start_ms = 0;
    int64_t window_end_ms = 0;
    double value = 0.0;  // CHF_RISK: percent in [0,100]; STRESS: index in [0,1]
    std::map<std::string, double> aux;

    static ResultRecord make(std::string user_id, ResultKind kind, int64_t window_start_ms,
                             int64_t window_end_ms, double value,
                             std::map<std::string, double> aux = {});

    bool operator==(const ResultRecord&) const = default;
};

// Emitted instead of a ResultRecord when a window's score is withheld.
struct DiagRecord {
    std::string user_id;
    std::string job;
    int64_t window_start_ms = 0;
    int64_t window_end_ms = 0;
    std::string reason;

    bool operator==(const DiagRecord&) const = default;
};

struct DecodeOptions {
    // Multiply decoded TimeStamp by 1000 on ingest (some recorded exports carry seconds).
    bool timestamps_in_seconds = false;
};

// Codecs. Encoded text is a single line of JSON with no interior newline;
// callers append the LF terminator when writing to a stream or file.
// Decoders throw MalformedRecord; callers skip the record and count the drop.
std::string encode_sample(const SampleRecord& r);
SampleRecord decode_sample(std::string_view text, const DecodeOptions& opts = {});

std::string encode_result(const ResultRecord& r);
ResultRecord decode_result(std::string_view text);

std::string encode_diag(const DiagRecord& r);
DiagRecord decode_diag(std::string_view text);

// Peek at the Kind field so stores mixing results and diagnostics can dispatch.
bool is_diag_line(std::string_view text);

}  // namespace vitalcep::wire
