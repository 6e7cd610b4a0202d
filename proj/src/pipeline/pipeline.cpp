#include "halodet/pipeline/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <sstream>

#include "halodet/core/error.hpp"
#include "halodet/core/hash.hpp"
#include "halodet/core/jsonl.hpp"
#include "halodet/prompts.hpp"

namespace halodet::pipeline {

void to_json(nlohmann::json& j, const PromptRecord& r) {
    j = nlohmann::json{{"prompt_id", r.prompt_id}, {"prompt", r.prompt}, {"response", r.response}};
}

void from_json(const nlohmann::json& j, PromptRecord& r) {
    if (!j.contains("prompt_id")) throw parse_error("missing field 'prompt_id'");
    if (!j.contains("prompt")) throw parse_error("missing field 'prompt'");
    if (!j.contains("response")) throw parse_error("missing field 'response'");
    r.prompt_id = j.at("prompt_id").get<std::string>();
    r.prompt = j.at("prompt").get<std::string>();
    r.response = j.at("response").get<std::string>();
}

std::vector<PromptRecord> read_prompt_records(const std::string& path) {
    return core::read_jsonl<PromptRecord>(path);
}

void write_prompt_records(const std::string& path, const std::vector<PromptRecord>& records) {
    core::write_jsonl(path, records);
}

PipelineConfig default_pipeline_config() {
    PipelineConfig config;
    config.decompose_template = std::string(prompts::kDecomposeTemplate);
    config.relevance_template = std::string(prompts::kRelevanceTemplate);
    config.extraction_template = std::string(prompts::kExtractionTemplate);
    return config;
}

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    bool in_space = true; // trims leading whitespace
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(c);
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

// Strips "1." / "2)" / "-" / "*" list markers the model may prepend.
std::string strip_list_marker(const std::string& line) {
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
        return trim(line.substr(i + 1));
    }
    if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
        return trim(line.substr(1));
    }
    return line;
}

// First word of a reply, lowercased, punctuation stripped.
std::string first_word_lower(const std::string& reply) {
    std::string word;
    for (char c : reply) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!word.empty()) {
            break;
        }
    }
    return word;
}

constexpr std::size_t kMaxDecompositionLines = 500;
constexpr std::size_t kMinSpanOverlap = 10;

} // namespace

std::vector<core::Claim> decompose(gateway::Backend& backend, const PipelineConfig& config,
                                   const std::string& prompt_id, const std::string& prompt,
                                   const std::string& response) {
    if (response.empty()) {
        throw invalid_input("decompose: response must be non-empty");
    }
    const std::string request = prompts::render(config.decompose_template,
                                                {{"prompt", prompt}, {"response", response}});
    const std::string reply = gateway::complete_text(backend, request, 2048);

    std::vector<core::Claim> claims;
    std::istringstream lines(reply);
    std::string line;
    std::size_t line_count = 0;
    while (std::getline(lines, line)) {
        if (++line_count > kMaxDecompositionLines) {
            throw Error(ErrorKind::parse,
                        "decompose: runaway model reply (> " +
                            std::to_string(kMaxDecompositionLines) + " lines); raw reply: " +
                            reply.substr(0, 500));
        }
        const std::string text = strip_list_marker(trim(line));
        if (text.empty()) continue;
        core::Claim claim;
        claim.prompt_id = prompt_id;
        claim.text = text;
        claim.id = core::hex64(
            core::fnv1a64(prompt_id + "#" + std::to_string(claims.size())));
        claims.push_back(std::move(claim));
    }
    return claims;
}

std::vector<core::Claim> filter_relevant(gateway::Backend& backend, const PipelineConfig& config,
                                         const std::string& prompt,
                                         std::vector<core::Claim> claims) {
    std::vector<core::Claim> kept;
    for (auto& claim : claims) {
        const std::string request = prompts::render(config.relevance_template,
                                                    {{"prompt", prompt}, {"claim", claim.text}});
        const std::string reply = gateway::complete_text(backend, request, 8);
        const std::string word = first_word_lower(reply);
        if (word == "no") {
            claim.relevant = false;
            continue;
        }
        if (word != "yes") {
            std::cerr << "halodet: ambiguous relevance reply for claim " << claim.id << " ('"
                      << reply.substr(0, 80) << "'); keeping claim\n";
        }
        claim.relevant = true;
        kept.push_back(std::move(claim));
    }
    return kept;
}

std::string longest_common_substring(const std::string& a, const std::string& b) {
    if (a.empty() || b.empty()) return {};
    // Rolling DP over b for each position of a.
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    std::size_t best_len = 0, best_end_a = 0;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                cur[j] = prev[j - 1] + 1;
                if (cur[j] > best_len) {
                    best_len = cur[j];
                    best_end_a = i;
                }
            } else {
                cur[j] = 0;
            }
        }
        std::swap(prev, cur);
    }
    return a.substr(best_end_a - best_len, best_len);
}

core::Claim extract_original_span(gateway::Backend& backend, const PipelineConfig& config,
                                  const std::string& response, core::Claim claim,
                                  SpanStatus* status) {
    const std::string request = prompts::render(
        config.extraction_template, {{"response", response}, {"claim", claim.text}});
    const std::string proposal = trim(gateway::complete_text(backend, request, 512));

    if (!proposal.empty() && response.find(proposal) != std::string::npos) {
        claim.original_span = proposal;
        if (status) *status = SpanStatus::exact;
        return claim;
    }
    const std::string overlap = longest_common_substring(proposal, response);
    if (overlap.size() >= kMinSpanOverlap) {
        claim.original_span = overlap;
        if (status) *status = SpanStatus::overlap;
        std::cerr << "halodet: span for claim " << claim.id
                  << " did not match the response verbatim; using a " << overlap.size()
                  << "-char overlap\n";
    } else {
        claim.original_span.reset();
        if (status) *status = SpanStatus::none;
        std::cerr << "halodet: no usable span found in the response for claim " << claim.id
                  << "\n";
    }
    return claim;
}

FileLabeler::FileLabeler(const std::string& label_file) {
    for (const auto& rec : core::read_jsonl_raw(label_file)) {
        try {
            const std::string text = rec.value.at("claim_text").get<std::string>();
            const auto label =
                core::label_from_string(rec.value.at("label").get<std::string>());
            entries_.emplace(normalize_whitespace(text), label);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(label_file + ":" + std::to_string(rec.line) + ": " + e.what());
        }
    }
}

std::vector<core::Claim> FileLabeler::label_claims(std::vector<core::Claim> claims) {
    for (auto& claim : claims) {
        const auto it = entries_.find(normalize_whitespace(claim.text));
        if (it != entries_.end()) {
            claim.label = it->second;
        }
    }
    return claims;
}

std::vector<core::Claim> SearchLabeler::label_claims(std::vector<core::Claim>) {
    throw capability_error(
        "search-based labeling is a stub: this toolkit ships no web-search client; "
        "use the file labeler with pre-labeled claims");
}

std::unique_ptr<Labeler> make_labeler(const PipelineConfig& config) {
    if (config.labeler == "none" || (config.labeler == "file" && config.label_file.empty())) {
        return nullptr;
    }
    if (config.labeler == "file") {
        return std::make_unique<FileLabeler>(config.label_file);
    }
    if (config.labeler == "search") {
        return std::make_unique<SearchLabeler>();
    }
    throw invalid_input("unknown labeler '" + config.labeler + "' (expected file|search|none)");
}

std::vector<core::Claim> run_pipeline(gateway::Backend& backend, const PipelineConfig& config,
                                      const PromptRecord& record, Labeler* labeler) {
    auto claims = decompose(backend, config, record.prompt_id, record.prompt, record.response);
    claims = filter_relevant(backend, config, record.prompt, std::move(claims));
    for (auto& claim : claims) {
        claim = extract_original_span(backend, config, record.response, std::move(claim));
    }
    if (labeler) {
        claims = labeler->label_claims(std::move(claims));
    }
    return claims;
}

} // namespace halodet::pipeline
