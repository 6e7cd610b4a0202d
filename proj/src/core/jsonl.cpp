#include "halodet/core/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "halodet/core/hash.hpp"

namespace halodet::core {

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) {
        throw parse_error(std::string("missing field '") + name + "'");
    }
    return *it;
}

} // namespace

void to_json(nlohmann::json& j, const Claim& c) {
    j = nlohmann::json{
        {"id", c.id},
        {"prompt_id", c.prompt_id},
        {"text", c.text},
        {"label", to_string(c.label)},
        {"relevant", c.relevant},
    };
    if (c.original_span) j["original_span"] = *c.original_span;
}

void from_json(const nlohmann::json& j, Claim& c) {
    c.id = require_field(j, "id").get<std::string>();
    c.prompt_id = require_field(j, "prompt_id").get<std::string>();
    c.text = require_field(j, "text").get<std::string>();
    c.label = j.contains("label") ? label_from_string(j.at("label").get<std::string>())
                                  : Label::unlabeled;
    c.relevant = j.value("relevant", true);
    if (j.contains("original_span") && !j.at("original_span").is_null()) {
        c.original_span = j.at("original_span").get<std::string>();
    } else {
        c.original_span.reset();
    }
}

void to_json(nlohmann::json& j, const TokenScore& t) {
    j = nlohmann::json{
        {"token_text", t.token_text},
        {"probability", t.probability},
        {"entropy", t.entropy},
        {"is_entity", t.is_entity},
    };
}

void from_json(const nlohmann::json& j, TokenScore& t) {
    t.token_text = require_field(j, "token_text").get<std::string>();
    t.probability = require_field(j, "probability").get<double>();
    t.entropy = require_field(j, "entropy").get<double>();
    t.is_entity = j.value("is_entity", false);
    if (!(t.probability > 0.0 && t.probability <= 1.0)) {
        throw parse_error("field 'probability' out of range (0,1]");
    }
    if (t.entropy < 0.0) {
        throw parse_error("field 'entropy' must be >= 0");
    }
}

void to_json(nlohmann::json& j, const DetectorScore& s) {
    j = nlohmann::json{
        {"claim_id", s.claim_id},
        {"detector_id", s.detector_id},
        {"p_factual", s.p_factual},
    };
    if (s.rationale) j["rationale"] = *s.rationale;
}

void from_json(const nlohmann::json& j, DetectorScore& s) {
    s.claim_id = require_field(j, "claim_id").get<std::string>();
    s.detector_id = require_field(j, "detector_id").get<std::string>();
    s.p_factual = require_field(j, "p_factual").get<double>();
    if (s.p_factual < 0.0 || s.p_factual > 1.0) {
        throw parse_error("field 'p_factual' out of range [0,1]");
    }
    if (j.contains("rationale") && !j.at("rationale").is_null()) {
        s.rationale = j.at("rationale").get<std::string>();
    } else {
        s.rationale.reset();
    }
}

void to_json(nlohmann::json& j, const FineTuneExample& e) {
    j = nlohmann::json{
        {"instruction", e.instruction},
        {"input", e.input},
        {"output", e.output},
        {"task", to_string(e.task)},
        {"source_claim_id", e.source_claim_id},
    };
}

void from_json(const nlohmann::json& j, FineTuneExample& e) {
    e.instruction = require_field(j, "instruction").get<std::string>();
    e.input = require_field(j, "input").get<std::string>();
    e.output = require_field(j, "output").get<std::string>();
    e.task = task_from_string(require_field(j, "task").get<std::string>());
    e.source_claim_id = require_field(j, "source_claim_id").get<std::string>();
}

void to_json(nlohmann::json& j, const DatasetSplit& s) {
    j = nlohmann::json{
        {"train", s.train},
        {"validation", s.validation},
        {"test", s.test},
        {"seed", s.seed},
    };
}

void from_json(const nlohmann::json& j, DatasetSplit& s) {
    s.train = require_field(j, "train").get<std::vector<std::string>>();
    s.validation = require_field(j, "validation").get<std::vector<std::string>>();
    s.test = require_field(j, "test").get<std::vector<std::string>>();
    s.seed = j.value("seed", std::int64_t{0});
}

void to_json(nlohmann::json& j, const Histogram& h) {
    j = nlohmann::json{
        {"bin_edges", h.bin_edges},
        {"factual_counts", h.factual_counts},
        {"hallucinated_counts", h.hallucinated_counts},
    };
}

void from_json(const nlohmann::json& j, Histogram& h) {
    h.bin_edges = require_field(j, "bin_edges").get<std::vector<double>>();
    h.factual_counts = require_field(j, "factual_counts").get<std::vector<std::int64_t>>();
    h.hallucinated_counts =
        require_field(j, "hallucinated_counts").get<std::vector<std::int64_t>>();
}

void to_json(nlohmann::json& j, const EvalReport& r) {
    j = nlohmann::json{
        {"tp", r.tp}, {"fn", r.fn}, {"tn", r.tn}, {"fp", r.fp},
        {"n_unknown", r.n_unknown},
        {"bacc", r.bacc},
    };
    if (r.bacc_unknown) j["bacc_unknown"] = *r.bacc_unknown;
    nlohmann::json thresholds = nlohmann::json::object();
    if (r.tau) thresholds["tau"] = *r.tau;
    if (r.alpha_low) thresholds["alpha_low"] = *r.alpha_low;
    if (r.alpha_high) thresholds["alpha_high"] = *r.alpha_high;
    if (!thresholds.empty()) j["thresholds"] = thresholds;
    if (!r.strata.empty()) j["strata"] = r.strata;
    if (r.histogram) j["histogram"] = *r.histogram;
    if (r.length_source) j["length_source"] = *r.length_source;
}

void from_json(const nlohmann::json& j, EvalReport& r) {
    r.tp = require_field(j, "tp").get<std::int64_t>();
    r.fn = require_field(j, "fn").get<std::int64_t>();
    r.tn = require_field(j, "tn").get<std::int64_t>();
    r.fp = require_field(j, "fp").get<std::int64_t>();
    r.n_unknown = j.value("n_unknown", std::int64_t{0});
    r.bacc = require_field(j, "bacc").get<double>();
    r.bacc_unknown.reset();
    if (j.contains("bacc_unknown")) r.bacc_unknown = j.at("bacc_unknown").get<double>();
    r.tau.reset();
    r.alpha_low.reset();
    r.alpha_high.reset();
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        if (t.contains("tau")) r.tau = t.at("tau").get<double>();
        if (t.contains("alpha_low")) r.alpha_low = t.at("alpha_low").get<double>();
        if (t.contains("alpha_high")) r.alpha_high = t.at("alpha_high").get<double>();
    }
    r.strata.clear();
    if (j.contains("strata")) {
        r.strata = j.at("strata").get<std::map<std::string, EvalReport>>();
    }
    r.histogram.reset();
    if (j.contains("histogram")) r.histogram = j.at("histogram").get<Histogram>();
    r.length_source.reset();
    if (j.contains("length_source")) r.length_source = j.at("length_source").get<std::string>();
}

std::vector<JsonlRecord> read_jsonl_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw invalid_input("cannot open '" + path + "' for reading");
    }
    std::vector<JsonlRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            records.push_back({line_no, nlohmann::json::parse(line)});
        } catch (const nlohmann::json::parse_error& e) {
            throw parse_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw invalid_input("cannot open '" + path + "' for writing");
    }
    for (const auto& l : lines) {
        out << l << '\n';
    }
    if (!out) {
        throw invalid_input("failed writing '" + path + "'");
    }
}

std::vector<Claim> read_claims(const std::string& path) { return read_jsonl<Claim>(path); }

void write_claims(const std::string& path, const std::vector<Claim>& claims) {
    write_jsonl(path, claims);
}

std::vector<DetectorScore> read_detector_scores(const std::string& path) {
    return read_jsonl<DetectorScore>(path);
}

void write_detector_scores(const std::string& path, const std::vector<DetectorScore>& scores) {
    write_jsonl(path, scores);
}

std::vector<FineTuneExample> read_finetune_examples(const std::string& path) {
    return read_jsonl<FineTuneExample>(path);
}

void write_finetune_examples(const std::string& path, const std::vector<FineTuneExample>& examples) {
    write_jsonl(path, examples);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw invalid_input("cannot open '" + path + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw invalid_input("cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out) {
        throw invalid_input("failed writing '" + path + "'");
    }
}

} // namespace halodet::core
