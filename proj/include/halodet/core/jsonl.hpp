#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "halodet/core/error.hpp"
#include "halodet/core/types.hpp"

namespace halodet::core {

void to_json(nlohmann::json& j, const Claim& c);
void from_json(const nlohmann::json& j, Claim& c);
void to_json(nlohmann::json& j, const TokenScore& t);
void from_json(const nlohmann::json& j, TokenScore& t);
void to_json(nlohmann::json& j, const DetectorScore& s);
void from_json(const nlohmann::json& j, DetectorScore& s);
void to_json(nlohmann::json& j, const FineTuneExample& e);
void from_json(const nlohmann::json& j, FineTuneExample& e);
void to_json(nlohmann::json& j, const DatasetSplit& s);
void from_json(const nlohmann::json& j, DatasetSplit& s);
void to_json(nlohmann::json& j, const Histogram& h);
void from_json(const nlohmann::json& j, Histogram& h);
void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);

struct JsonlRecord {
    std::size_t line = 0; // 1-based line number in the source file
    nlohmann::json value;
};

// Reads one JSON record per line, skipping blank lines. Malformed records are
// reported as "path:line: <reason>".
std::vector<JsonlRecord> read_jsonl_raw(const std::string& path);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

template <typename T>
std::vector<T> read_jsonl(const std::string& path) {
    std::vector<T> out;
    for (const auto& rec : read_jsonl_raw(path)) {
        try {
            out.push_back(rec.value.get<T>());
        } catch (const Error& e) {
            throw parse_error(path + ":" + std::to_string(rec.line) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(path + ":" + std::to_string(rec.line) + ": " + e.what());
        }
    }
    return out;
}

template <typename T>
void write_jsonl(const std::string& path, const std::vector<T>& records) {
    std::vector<std::string> lines;
    lines.reserve(records.size());
    for (const auto& r : records) {
        lines.push_back(nlohmann::json(r).dump());
    }
    write_lines(path, lines);
}

std::vector<Claim> read_claims(const std::string& path);
void write_claims(const std::string& path, const std::vector<Claim>& claims);

std::vector<DetectorScore> read_detector_scores(const std::string& path);
void write_detector_scores(const std::string& path, const std::vector<DetectorScore>& scores);

std::vector<FineTuneExample> read_finetune_examples(const std::string& path);
void write_finetune_examples(const std::string& path, const std::vector<FineTuneExample>& examples);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace halodet::core
