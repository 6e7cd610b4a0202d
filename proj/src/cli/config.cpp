#include "halodet/cli/config.hpp"

#include "halodet/core/error.hpp"
#include "halodet/core/jsonl.hpp"

namespace halodet::cli {

namespace {

using nlohmann::json;

void read_backend(const json& j, BackendConfig& out) {
    out.kind = j.value("kind", out.kind);
    out.mock_script = j.value("mock_script", out.mock_script);
    out.mock_seed = j.value("mock_seed", out.mock_seed);
    out.http.base_url = j.value("base_url", out.http.base_url);
    out.http.model = j.value("model", out.http.model);
    out.http.api_key_env = j.value("api_key_env", out.http.api_key_env);
    out.http.timeout = std::chrono::seconds(j.value("timeout_s", out.http.timeout.count()));
    out.http.max_in_flight = j.value("max_in_flight", out.http.max_in_flight);
    out.http.completion_scoring = j.value("completion_scoring", out.http.completion_scoring);
    out.http.hidden_states = j.value("hidden_states", out.http.hidden_states);
    if (j.contains("vocab_size") && !j.at("vocab_size").is_null()) {
        out.http.vocab_size = j.at("vocab_size").get<int>();
    }
    out.http.id = j.value("id", out.http.id);
    if (j.contains("retry")) {
        const auto& r = j.at("retry");
        out.http.retry.max_attempts = r.value("max_attempts", out.http.retry.max_attempts);
        out.http.retry.base_delay =
            std::chrono::milliseconds(r.value("base_ms", out.http.retry.base_delay.count()));
        out.http.retry.factor = r.value("factor", out.http.retry.factor);
    }
}

json backend_json(const BackendConfig& b) {
    return json{
        {"kind", b.kind},
        {"mock_script", b.mock_script},
        {"mock_seed", b.mock_seed},
        {"base_url", b.http.base_url},
        {"model", b.http.model},
        {"api_key_env", b.http.api_key_env},
        {"timeout_s", b.http.timeout.count()},
        {"max_in_flight", b.http.max_in_flight},
        {"completion_scoring", b.http.completion_scoring},
        {"hidden_states", b.http.hidden_states},
        {"vocab_size", b.http.vocab_size ? json(*b.http.vocab_size) : json(nullptr)},
        {"retry",
         {{"max_attempts", b.http.retry.max_attempts},
          {"base_ms", b.http.retry.base_delay.count()},
          {"factor", b.http.retry.factor}}},
    };
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    RunConfig config;
    json j;
    try {
        j = json::parse(core::read_text_file(path));
    } catch (const json::parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }

    if (j.contains("backend")) read_backend(j.at("backend"), config.backend);
    if (j.contains("finetuned_backend")) {
        read_backend(j.at("finetuned_backend"), config.finetuned_backend);
        config.has_finetuned_backend = true;
    }
    config.seed = j.value("seed", config.seed);

    if (j.contains("split")) {
        const auto& s = j.at("split");
        config.ratios.train = s.value("train", config.ratios.train);
        config.ratios.validation = s.value("validation", config.ratios.validation);
        config.ratios.test = s.value("test", config.ratios.test);
        config.stratified_split = s.value("stratified", config.stratified_split);
    }

    if (j.contains("templates")) {
        const auto& t = j.at("templates");
        config.pipeline.decompose_template =
            t.value("decompose", config.pipeline.decompose_template);
        config.pipeline.relevance_template =
            t.value("relevance", config.pipeline.relevance_template);
        config.pipeline.extraction_template =
            t.value("extraction", config.pipeline.extraction_template);
        config.entity_template = t.value("entity", config.entity_template);
        config.tf_template = t.value("prompt_tf", config.tf_template);
        config.prob_template = t.value("prompt_prob", config.prob_template);
        config.cot_template = t.value("prompt_cot_tf", config.cot_template);
        config.support_template = t.value("selfcheck_support", config.support_template);
    }
    config.pipeline.labeler = j.value("labeler", config.pipeline.labeler);

    if (j.contains("detectors")) {
        const auto& d = j.at("detectors");
        config.selfcheck_samples = d.value("selfcheck_samples", config.selfcheck_samples);
        config.selfcheck_temperature =
            d.value("selfcheck_temperature", config.selfcheck_temperature);
        config.normalize_label_probs =
            d.value("normalize_label_probs", config.normalize_label_probs);
        config.entity_strategy = d.value("entity_strategy", config.entity_strategy);
    }

    if (j.contains("probe")) {
        const auto& p = j.at("probe");
        config.probe.learning_rate = p.value("learning_rate", config.probe.learning_rate);
        config.probe.epochs = p.value("epochs", config.probe.epochs);
        config.probe.batch_size = p.value("batch_size", config.probe.batch_size);
        config.probe.seed = p.value("seed", config.probe.seed);
        config.probe.patience = p.value("patience", config.probe.patience);
        config.probe.hidden_width = p.value("hidden_width", config.probe.hidden_width);
        config.probe.class_weights = p.value("class_weights", config.probe.class_weights);
        if (p.contains("optimizer")) {
            config.probe.optimizer =
                probe::optimizer_from_string(p.at("optimizer").get<std::string>());
        }
        config.include_embedding_layer =
            p.value("include_embedding_layer", config.include_embedding_layer);
    }

    if (j.contains("build")) {
        const auto& b = j.at("build");
        config.build.include_rationales =
            b.value("include_rationales", config.build.include_rationales);
        config.build.include_aux_qa = b.value("include_aux_qa", config.build.include_aux_qa);
        config.build.include_paraphrase =
            b.value("include_paraphrase", config.build.include_paraphrase);
        config.build.half_data = b.value("half_data", config.build.half_data);
        config.build.seed = b.value("seed", config.build.seed);
    }

    if (j.contains("threshold")) {
        config.min_bacc = j.at("threshold").value("min_bacc", config.min_bacc);
    }
    return config;
}

nlohmann::json run_config_json(const RunConfig& config) {
    return json{
        {"backend", backend_json(config.backend)},
        {"finetuned_backend",
         config.has_finetuned_backend ? backend_json(config.finetuned_backend) : json(nullptr)},
        {"seed", config.seed},
        {"split",
         {{"train", config.ratios.train},
          {"validation", config.ratios.validation},
          {"test", config.ratios.test},
          {"stratified", config.stratified_split}}},
        {"templates",
         {{"decompose", config.pipeline.decompose_template},
          {"relevance", config.pipeline.relevance_template},
          {"extraction", config.pipeline.extraction_template},
          {"entity", config.entity_template},
          {"prompt_tf", config.tf_template},
          {"prompt_prob", config.prob_template},
          {"prompt_cot_tf", config.cot_template},
          {"selfcheck_support", config.support_template}}},
        {"labeler", config.pipeline.labeler},
        {"detectors",
         {{"selfcheck_samples", config.selfcheck_samples},
          {"selfcheck_temperature", config.selfcheck_temperature},
          {"normalize_label_probs", config.normalize_label_probs},
          {"entity_strategy", config.entity_strategy}}},
        {"probe",
         {{"learning_rate", config.probe.learning_rate},
          {"epochs", config.probe.epochs},
          {"batch_size", config.probe.batch_size},
          {"seed", config.probe.seed},
          {"patience", config.probe.patience},
          {"hidden_width", config.probe.hidden_width},
          {"class_weights", config.probe.class_weights},
          {"optimizer", probe::to_string(config.probe.optimizer)},
          {"include_embedding_layer", config.include_embedding_layer}}},
        {"build",
         {{"include_rationales", config.build.include_rationales},
          {"include_aux_qa", config.build.include_aux_qa},
          {"include_paraphrase", config.build.include_paraphrase},
          {"half_data", config.build.half_data},
          {"seed", config.build.seed}}},
        {"threshold", {{"min_bacc", config.min_bacc}}},
    };
}

std::unique_ptr<gateway::Backend> make_backend(const BackendConfig& config) {
    if (config.kind == "mock") {
        if (config.mock_script.empty()) {
            return gateway::MockBackend::from_records({}, config.mock_seed);
        }
        return gateway::MockBackend::from_file(config.mock_script, config.mock_seed);
    }
    if (config.kind == "http") {
        return std::make_unique<gateway::HttpBackend>(config.http);
    }
    throw invalid_input("unknown backend kind '" + config.kind + "' (expected mock|http)");
}

} // namespace halodet::cli
