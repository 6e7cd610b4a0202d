#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "halodet/core/split.hpp"
#include "halodet/ftdata/builder.hpp"
#include "halodet/gateway/http.hpp"
#include "halodet/gateway/mock.hpp"
#include "halodet/pipeline/pipeline.hpp"
#include "halodet/probe/mlp.hpp"

namespace halodet::cli {

struct BackendConfig {
    std::string kind = "mock"; // mock | http
    std::string mock_script;
    std::uint64_t mock_seed = 0;
    gateway::HttpBackendConfig http;
};

// One structured config file drives every command; CLI flags override.
struct RunConfig {
    BackendConfig backend;
    BackendConfig finetuned_backend; // consulted by the finetuned detector
    bool has_finetuned_backend = false;
    std::int64_t seed = 0;

    core::SplitRatios ratios;
    bool stratified_split = false;

    pipeline::PipelineConfig pipeline = pipeline::default_pipeline_config();

    int selfcheck_samples = 20;
    double selfcheck_temperature = 1.0;
    bool normalize_label_probs = true;
    std::string entity_strategy = "llm"; // llm | heuristic
    std::string entity_template;
    std::string tf_template;      // template overrides; empty keeps the default
    std::string prob_template;
    std::string cot_template;
    std::string support_template;

    probe::TrainConfig probe;
    bool include_embedding_layer = false;

    ftdata::BuildOptions build;
    double min_bacc = 0.70;
};

RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_json(const RunConfig& config);

std::unique_ptr<gateway::Backend> make_backend(const BackendConfig& config);

} // namespace halodet::cli
