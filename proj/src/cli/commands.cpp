#include "halodet/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "halodet/cli/config.hpp"
#include "halodet/core/error.hpp"
#include "halodet/core/hash.hpp"
#include "halodet/core/jsonl.hpp"
#include "halodet/detectors/detectors.hpp"
#include "halodet/estimators/estimators.hpp"
#include "halodet/eval/report.hpp"
#include "halodet/eval/threshold.hpp"
#include "halodet/ftdata/builder.hpp"
#include "halodet/probe/embedding.hpp"
#include "halodet/prompts.hpp"

namespace halodet::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

struct GlobalOptions {
    std::string config_path;
    std::string backend_kind; // override
    std::string mock_script;  // override
    std::optional<std::int64_t> seed;
    std::string out_dir;
};

RunConfig resolve_config(const GlobalOptions& global) {
    RunConfig config;
    if (!global.config_path.empty()) {
        config = load_run_config(global.config_path);
    }
    if (!global.backend_kind.empty()) config.backend.kind = global.backend_kind;
    if (!global.mock_script.empty()) config.backend.mock_script = global.mock_script;
    if (global.seed) {
        config.seed = *global.seed;
        config.backend.mock_seed = static_cast<std::uint64_t>(*global.seed);
        config.probe.seed = static_cast<std::uint64_t>(*global.seed);
        config.build.seed = *global.seed;
    }
    return config;
}

std::string resolve_out(const GlobalOptions& global, const std::string& explicit_path,
                        const std::string& default_name) {
    if (!explicit_path.empty()) return explicit_path;
    if (!global.out_dir.empty()) {
        fs::create_directories(global.out_dir);
        return (fs::path(global.out_dir) / default_name).string();
    }
    return default_name;
}

void require_readable(const std::string& path, const std::string& what) {
    if (path.empty()) {
        throw invalid_input(what + " path is required");
    }
    if (!fs::exists(path)) {
        throw invalid_input(what + " path '" + path + "' does not exist");
    }
}

void write_manifest(const std::string& primary_output, const std::string& command,
                    const RunConfig& config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, json extra) {
    const json config_json = run_config_json(config);
    json manifest{
        {"command", command},
        {"tool_version", kToolVersion},
        {"seed", config.seed},
        {"config", config_json},
        {"config_hash", core::hex64(core::fnv1a64(config_json.dump()))},
        {"extra", std::move(extra)},
    };
    json input_hashes = json::object();
    for (const auto& path : inputs) {
        input_hashes[path] = core::hex64(core::fnv1a64_file(path));
    }
    json output_hashes = json::object();
    for (const auto& path : outputs) {
        output_hashes[path] = core::hex64(core::fnv1a64_file(path));
    }
    manifest["inputs"] = input_hashes;
    manifest["outputs"] = output_hashes;
    core::write_text_file(primary_output + ".manifest.json", manifest.dump(2) + "\n");
}

std::map<std::string, pipeline::PromptRecord> prompt_index(const std::string& path) {
    std::map<std::string, pipeline::PromptRecord> index;
    for (auto& record : pipeline::read_prompt_records(path)) {
        index[record.prompt_id] = std::move(record);
    }
    return index;
}

std::set<std::string> subset_ids(const core::DatasetSplit& split, const std::string& subset) {
    auto as_set = [](const std::vector<std::string>& ids) {
        return std::set<std::string>(ids.begin(), ids.end());
    };
    if (subset == "train") return as_set(split.train);
    if (subset == "validation") return as_set(split.validation);
    if (subset == "test") return as_set(split.test);
    if (subset == "all") {
        std::set<std::string> all = as_set(split.train);
        all.insert(split.validation.begin(), split.validation.end());
        all.insert(split.test.begin(), split.test.end());
        return all;
    }
    throw invalid_input("unknown subset '" + subset + "' (expected train|validation|test|all)");
}

// Joins detector scores with claim labels over a subset of claim ids.
std::vector<eval::ScoredClaim> join_scores(const std::vector<core::DetectorScore>& scores,
                                           const std::vector<core::Claim>& claims,
                                           const std::set<std::string>& ids) {
    std::map<std::string, const core::Claim*> by_id;
    for (const auto& c : claims) by_id[c.id] = &c;

    std::vector<eval::ScoredClaim> joined;
    std::size_t skipped_unlabeled = 0;
    for (const auto& s : scores) {
        if (!ids.empty() && !ids.count(s.claim_id)) continue;
        const auto it = by_id.find(s.claim_id);
        if (it == by_id.end()) {
            throw invalid_input("score references unknown claim id '" + s.claim_id + "'");
        }
        if (it->second->label == core::Label::unlabeled) {
            ++skipped_unlabeled;
            continue;
        }
        eval::ScoredClaim sc;
        sc.claim_id = s.claim_id;
        sc.score = s.p_factual;
        sc.gold_factual = it->second->label == core::Label::factual;
        joined.push_back(std::move(sc));
    }
    if (skipped_unlabeled > 0) {
        std::cerr << "halodet: skipped " << skipped_unlabeled << " unlabeled claims\n";
    }
    if (joined.empty()) {
        throw invalid_input("no labeled scored claims in the selected subset");
    }
    return joined;
}

// Filters a mixed score file down to one detector, or verifies uniqueness.
std::vector<core::DetectorScore> select_detector(std::vector<core::DetectorScore> scores,
                                                 const std::string& detector) {
    std::set<std::string> present;
    for (const auto& s : scores) present.insert(s.detector_id);
    if (!detector.empty()) {
        if (!present.count(detector)) {
            std::ostringstream msg;
            msg << "detector '" << detector << "' not present in the score file; found:";
            for (const auto& d : present) msg << ' ' << d;
            throw invalid_input(msg.str());
        }
        std::erase_if(scores,
                      [&](const core::DetectorScore& s) { return s.detector_id != detector; });
        return scores;
    }
    if (present.size() > 1) {
        std::ostringstream msg;
        msg << "score file contains multiple detectors, pass --detector to choose one of:";
        for (const auto& d : present) msg << ' ' << d;
        throw invalid_input(msg.str());
    }
    return scores;
}

core::DatasetSplit resolve_split(const std::string& split_file,
                                 std::optional<std::int64_t> split_seed,
                                 const std::vector<core::Claim>& claims,
                                 const RunConfig& config) {
    if (!split_file.empty()) {
        require_readable(split_file, "split file");
        core::DatasetSplit split;
        try {
            split = json::parse(core::read_text_file(split_file)).get<core::DatasetSplit>();
        } catch (const json::exception& e) {
            throw parse_error(split_file + ": " + e.what());
        }
        return split;
    }
    std::vector<core::Claim> labeled;
    for (const auto& c : claims) {
        if (c.label != core::Label::unlabeled) labeled.push_back(c);
    }
    return core::split_dataset(labeled, config.ratios,
                               split_seed.value_or(config.seed), config.stratified_split);
}

std::vector<std::string> split_csv_list(const std::string& list) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(list);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

struct DecomposeOptions {
    std::string in_path;
    std::string out_path;
    std::string label_file;
};

int cmd_decompose(const GlobalOptions& global, const DecomposeOptions& opt) {
    RunConfig config = resolve_config(global);
    require_readable(opt.in_path, "input");
    const std::string out = resolve_out(global, opt.out_path, "claims.jsonl");
    if (!opt.label_file.empty()) {
        require_readable(opt.label_file, "label file");
        config.pipeline.label_file = opt.label_file;
        config.pipeline.labeler = "file";
    }

    auto backend = make_backend(config.backend);
    auto labeler = make_labeler(config.pipeline);

    const auto records = pipeline::read_prompt_records(opt.in_path);
    std::vector<core::Claim> all_claims;
    for (const auto& record : records) {
        auto claims = pipeline::run_pipeline(*backend, config.pipeline, record, labeler.get());
        std::cout << "prompt " << record.prompt_id << ": " << claims.size() << " claims\n";
        all_claims.insert(all_claims.end(), std::make_move_iterator(claims.begin()),
                          std::make_move_iterator(claims.end()));
    }
    core::write_claims(out, all_claims);
    std::cout << "decompose: " << all_claims.size() << " claims from " << records.size()
              << " prompts -> " << out << "\n";

    std::vector<std::string> inputs{opt.in_path};
    if (!opt.label_file.empty()) inputs.push_back(opt.label_file);
    write_manifest(out, "decompose", config, inputs, {out},
                   json{{"claims", all_claims.size()}, {"prompts", records.size()}});
    return kExitOk;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreOptions {
    std::string claims_path;
    std::string out_path;
    std::string detector_list;
    bool panel = false;
    std::string panel_out;
    std::string prompts_path;
    std::string probe_model;
    std::string embedding_type = "type4";
    std::string entity_strategy; // override
};

const std::vector<std::string>& known_detectors() {
    static const std::vector<std::string> names{"prompt_tf",  "prompt_prob", "prompt_cot_tf",
                                                "selfcheck",  "finetuned",   "probe"};
    return names;
}

int cmd_score(const GlobalOptions& global, const ScoreOptions& opt) {
    RunConfig config = resolve_config(global);
    require_readable(opt.claims_path, "claims");
    const std::string out = resolve_out(global, opt.out_path, "scores.jsonl");

    const auto detector_names = split_csv_list(opt.detector_list);
    for (const auto& name : detector_names) {
        if (std::find(known_detectors().begin(), known_detectors().end(), name) ==
            known_detectors().end()) {
            std::ostringstream msg;
            msg << "unknown detector '" << name << "'; valid names:";
            for (const auto& d : known_detectors()) msg << ' ' << d;
            throw invalid_input(msg.str());
        }
    }
    if (detector_names.empty() && !opt.panel) {
        throw invalid_input("nothing to score: pass --detector and/or --panel");
    }

    auto backend = make_backend(config.backend);
    const auto claims = core::read_claims(opt.claims_path);

    std::map<std::string, pipeline::PromptRecord> prompts;
    const bool needs_prompts =
        std::find(detector_names.begin(), detector_names.end(), "selfcheck") !=
        detector_names.end();
    if (!opt.prompts_path.empty()) {
        require_readable(opt.prompts_path, "prompts");
        prompts = prompt_index(opt.prompts_path);
    } else if (needs_prompts) {
        throw invalid_input("selfcheck needs --prompts to recover each claim's source prompt");
    }

    std::unique_ptr<gateway::Backend> finetuned;
    if (std::find(detector_names.begin(), detector_names.end(), "finetuned") !=
        detector_names.end()) {
        if (!config.has_finetuned_backend) {
            throw invalid_input(
                "the finetuned detector needs a finetuned_backend section in the config");
        }
        finetuned = make_backend(config.finetuned_backend);
    }

    std::optional<probe::ProbeModel> probe_model;
    probe::EmbeddingType embedding_type = probe::EmbeddingType::type4;
    if (std::find(detector_names.begin(), detector_names.end(), "probe") !=
        detector_names.end()) {
        require_readable(opt.probe_model, "probe model");
        probe_model = probe::load_probe(opt.probe_model);
        embedding_type = probe::embedding_type_from_string(opt.embedding_type);
    }

    auto tf_config = detectors::default_tf_config();
    auto prob_config = detectors::default_prob_config();
    auto cot_config = detectors::default_cot_tf_config();
    auto selfcheck_config = detectors::default_selfcheck_config();
    auto finetuned_config = detectors::default_finetuned_config();
    tf_config.normalize_label_probs = config.normalize_label_probs;
    finetuned_config.normalize_label_probs = config.normalize_label_probs;
    selfcheck_config.n_samples = config.selfcheck_samples;
    selfcheck_config.temperature = config.selfcheck_temperature;
    if (!config.tf_template.empty()) tf_config.template_text = config.tf_template;
    if (!config.tf_template.empty()) finetuned_config.template_text = config.tf_template;
    if (!config.prob_template.empty()) prob_config.template_text = config.prob_template;
    if (!config.cot_template.empty()) cot_config.template_text = config.cot_template;
    if (!config.support_template.empty()) {
        selfcheck_config.support_template = config.support_template;
    }

    const std::string entity_strategy_name =
        opt.entity_strategy.empty() ? config.entity_strategy : opt.entity_strategy;
    const auto entity_strategy = [&] {
        if (entity_strategy_name == "llm") return estimators::EntityStrategy::llm;
        if (entity_strategy_name == "heuristic") return estimators::EntityStrategy::heuristic;
        throw invalid_input("unknown entity strategy '" + entity_strategy_name +
                            "' (expected llm|heuristic)");
    }();

    std::vector<core::DetectorScore> scores;
    std::vector<estimators::PanelRow> panel_rows;
    for (const auto& claim : claims) {
        for (const auto& name : detector_names) {
            if (name == "prompt_tf") {
                scores.push_back(detectors::prompt_tf(*backend, tf_config, claim));
            } else if (name == "prompt_prob") {
                scores.push_back(detectors::prompt_prob(*backend, prob_config, claim));
            } else if (name == "prompt_cot_tf") {
                scores.push_back(detectors::prompt_cot_tf(*backend, cot_config, claim));
            } else if (name == "selfcheck") {
                const auto it = prompts.find(claim.prompt_id);
                if (it == prompts.end()) {
                    throw invalid_input("prompts file lacks prompt_id '" + claim.prompt_id +
                                        "' needed by selfcheck");
                }
                scores.push_back(
                    detectors::selfcheck(*backend, selfcheck_config, claim, it->second.prompt));
            } else if (name == "finetuned") {
                scores.push_back(
                    detectors::finetuned_detect(*finetuned, finetuned_config, claim));
            } else if (name == "probe") {
                const auto hidden = backend->hidden_states(claim.text);
                const auto features = probe::build_embedding(hidden, embedding_type,
                                                             config.include_embedding_layer);
                core::DetectorScore score;
                score.claim_id = claim.id;
                score.detector_id = "probe";
                score.p_factual = probe::probe_score(*probe_model, features);
                scores.push_back(std::move(score));
            }
        }

        if (opt.panel) {
            const auto it = prompts.find(claim.prompt_id);
            const std::string context = it == prompts.end() ? std::string{} : it->second.prompt;
            auto scored = backend->score_tokens(context, claim.text);
            auto tokens = estimators::mark_entity_tokens(claim.text, std::move(scored.tokens),
                                                         entity_strategy, backend.get(),
                                                         config.entity_template);
            for (const auto& entry : estimators::run_estimator_panel(tokens)) {
                panel_rows.push_back(
                    {claim.id, entry.spec.key(), entry.score, entry.available});
            }
        }
    }

    core::write_detector_scores(out, scores);
    std::vector<std::string> outputs{out};
    std::string panel_path;
    if (opt.panel) {
        panel_path = opt.panel_out.empty() ? resolve_out(global, "", "panel.jsonl")
                                           : opt.panel_out;
        core::write_jsonl(panel_path, panel_rows);
        outputs.push_back(panel_path);
    }
    std::cout << "score: " << scores.size() << " detector rows";
    if (opt.panel) std::cout << ", " << panel_rows.size() << " panel rows";
    std::cout << " for " << claims.size() << " claims -> " << out << "\n";

    std::vector<std::string> inputs{opt.claims_path};
    if (!opt.prompts_path.empty()) inputs.push_back(opt.prompts_path);
    if (!opt.probe_model.empty()) inputs.push_back(opt.probe_model);
    write_manifest(out, "score", config, inputs, outputs,
                   json{{"detectors", detector_names},
                        {"panel", opt.panel},
                        {"rows", scores.size()},
                        {"panel_rows", panel_rows.size()}});
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train-probe
// ---------------------------------------------------------------------------

struct TrainProbeOptions {
    std::string claims_path;
    std::string out_path;
    std::string embedding_type = "type4";
    bool search_embedding = false;
    std::optional<std::int64_t> split_seed;
    std::string split_file;
    bool binary = false;
    bool run_gradient_check = false;
    std::string embedding_cache;
};

struct EmbeddingRow {
    std::string claim_id;
    std::string embedding_type;
    std::vector<double> vector;
};

void to_json(json& j, const EmbeddingRow& r) {
    j = json{{"claim_id", r.claim_id}, {"embedding_type", r.embedding_type},
             {"vector", r.vector}};
}

void from_json(const json& j, EmbeddingRow& r) {
    r.claim_id = j.at("claim_id").get<std::string>();
    r.embedding_type = j.at("embedding_type").get<std::string>();
    r.vector = j.at("vector").get<std::vector<double>>();
}

int cmd_train_probe(const GlobalOptions& global, const TrainProbeOptions& opt) {
    RunConfig config = resolve_config(global);
    require_readable(opt.claims_path, "claims");
    const std::string out = resolve_out(global, opt.out_path, "probe.model");

    auto backend = make_backend(config.backend);
    const auto all_claims = core::read_claims(opt.claims_path);
    std::vector<core::Claim> labeled;
    for (const auto& c : all_claims) {
        if (c.label != core::Label::unlabeled) labeled.push_back(c);
    }
    if (labeled.size() < 3) {
        throw invalid_input("train-probe needs at least 3 labeled claims, got " +
                            std::to_string(labeled.size()));
    }

    const auto split = resolve_split(opt.split_file, opt.split_seed, labeled, config);
    const auto train_ids = subset_ids(split, "train");
    const auto validation_ids = subset_ids(split, "validation");

    // Embedding cache: reuse rows when present, append what had to be computed.
    std::map<std::pair<std::string, std::string>, std::vector<double>> cache;
    if (!opt.embedding_cache.empty() && fs::exists(opt.embedding_cache)) {
        for (auto& row : core::read_jsonl<EmbeddingRow>(opt.embedding_cache)) {
            cache[{row.claim_id, row.embedding_type}] = std::move(row.vector);
        }
    }

    const auto types = opt.search_embedding
                           ? probe::all_embedding_types()
                           : std::vector<probe::EmbeddingType>{
                                 probe::embedding_type_from_string(opt.embedding_type)};

    // One hidden-state fetch per claim: all requested embedding types are
    // derived immediately so the raw per-layer activations never pile up.
    for (const auto& claim : labeled) {
        bool missing = false;
        for (const auto type : types) {
            missing |= !cache.count({claim.id, probe::to_string(type)});
        }
        if (!missing) continue;
        const auto hidden = backend->hidden_states(claim.text);
        for (const auto type : types) {
            const auto key = std::make_pair(claim.id, probe::to_string(type));
            if (!cache.count(key)) {
                cache[key] =
                    probe::build_embedding(hidden, type, config.include_embedding_layer);
            }
        }
    }
    auto embedding_for = [&](const core::Claim& claim,
                             probe::EmbeddingType type) -> const std::vector<double>& {
        return cache.at({claim.id, probe::to_string(type)});
    };

    struct TypeRun {
        probe::EmbeddingType type;
        probe::TrainResult result;
    };
    std::vector<TypeRun> runs;
    for (const auto type : types) {
        std::vector<probe::TrainExample> train_set, validation_set;
        for (const auto& claim : labeled) {
            probe::TrainExample example;
            example.features = embedding_for(claim, type);
            example.factual = claim.label == core::Label::factual;
            if (train_ids.count(claim.id)) {
                train_set.push_back(std::move(example));
            } else if (validation_ids.count(claim.id)) {
                validation_set.push_back(std::move(example));
            }
        }
        runs.push_back({type, probe::train_probe(train_set, validation_set, config.probe)});
        std::cout << "train-probe: " << probe::to_string(type) << " validation BAcc "
                  << (runs.back().result.validation_bacc
                          ? eval::format_double(*runs.back().result.validation_bacc)
                          : std::string("n/a"))
                  << " (best epoch " << runs.back().result.best_epoch << ")\n";
    }

    const auto best = std::max_element(
        runs.begin(), runs.end(), [](const TypeRun& a, const TypeRun& b) {
            return a.result.validation_bacc.value_or(-1.0) <
                   b.result.validation_bacc.value_or(-1.0);
        });
    probe::save_probe(best->result.model, out, opt.binary);

    if (!opt.embedding_cache.empty()) {
        std::vector<EmbeddingRow> rows;
        for (const auto& [key, vec] : cache) {
            rows.push_back({key.first, key.second, vec});
        }
        core::write_jsonl(opt.embedding_cache, rows);
    }

    json extra{
        {"embedding_type", probe::to_string(best->type)},
        {"validation_bacc", best->result.validation_bacc
                                ? json(*best->result.validation_bacc)
                                : json(nullptr)},
        {"best_epoch", best->result.best_epoch},
        {"split_sizes",
         {{"train", split.train.size()},
          {"validation", split.validation.size()},
          {"test", split.test.size()}}},
        {"format", opt.binary ? "binary64" : "text"},
    };
    if (opt.search_embedding) {
        json searched = json::object();
        for (const auto& run : runs) {
            searched[probe::to_string(run.type)] =
                run.result.validation_bacc ? json(*run.result.validation_bacc) : json(nullptr);
        }
        extra["searched"] = searched;
    }

    int exit_code = kExitOk;
    if (opt.run_gradient_check) {
        // Re-derive the first train example for the winning type.
        const core::Claim* first_train = nullptr;
        for (const auto& claim : labeled) {
            if (train_ids.count(claim.id)) {
                first_train = &claim;
                break;
            }
        }
        probe::TrainExample example;
        example.features = embedding_for(*first_train, best->type);
        example.factual = first_train->label == core::Label::factual;
        const double max_rel = probe::gradient_check(best->result.model, example);
        const bool pass = max_rel < 1e-4;
        std::cout << "gradient check: " << (pass ? "PASS" : "FAIL")
                  << " max_relative_error=" << eval::format_double(max_rel) << "\n";
        extra["gradient_check"] = {{"max_relative_error", max_rel}, {"pass", pass}};
        if (!pass) exit_code = kExitError;
    }

    std::cout << "train-probe: saved " << probe::to_string(best->type) << " model -> " << out
              << "\n";
    write_manifest(out, "train-probe", config, {opt.claims_path}, {out}, extra);
    return exit_code;
}

// ---------------------------------------------------------------------------
// build-ft-data
// ---------------------------------------------------------------------------

struct BuildFtOptions {
    std::string claims_path;
    std::string out_path;
    bool no_rationale = false;
    bool no_aux = false;
    bool paraphrase = false;
    bool half = false;
    std::optional<std::int64_t> seed;
};

int cmd_build_ft_data(const GlobalOptions& global, const BuildFtOptions& opt) {
    RunConfig config = resolve_config(global);
    require_readable(opt.claims_path, "claims");
    const std::string out = resolve_out(global, opt.out_path, "ftdata.jsonl");

    ftdata::BuildOptions options = config.build;
    if (opt.no_rationale) options.include_rationales = false;
    if (opt.no_aux) options.include_aux_qa = false;
    if (opt.paraphrase) options.include_paraphrase = true;
    if (opt.half) options.half_data = true;
    if (opt.seed) options.seed = *opt.seed;

    auto backend = make_backend(config.backend);
    const auto all_claims = core::read_claims(opt.claims_path);
    std::vector<core::Claim> labeled;
    for (const auto& c : all_claims) {
        if (c.label != core::Label::unlabeled) labeled.push_back(c);
    }
    if (labeled.empty()) {
        throw invalid_input("build-ft-data needs labeled claims");
    }

    const auto used = options.half_data ? ftdata::stratified_half(labeled, options.seed)
                                        : labeled;
    const auto examples = ftdata::build_dataset(*backend, labeled, options);
    core::write_finetune_examples(out, examples);

    json extra = ftdata::dataset_manifest(examples, options, labeled.size(), used.size());
    std::cout << "build-ft-data: " << examples.size() << " examples from " << used.size()
              << " claims -> " << out << "\n";
    write_manifest(out, "build-ft-data", config, {opt.claims_path}, {out}, extra);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// calibrate / evaluate
// ---------------------------------------------------------------------------

struct CalibrateOptions {
    std::string scores_path;
    std::string panel_path; // per-estimator mode: calibrate every panel spec
    std::string claims_path;
    std::string detector;
    std::string split_file;
    std::optional<std::int64_t> split_seed;
    std::string subset = "validation";
    std::string mode = "single";
    std::optional<double> min_bacc;
    std::string out_path;
};

// Per-spec threshold search over estimator-panel rows; emits a BAcc table.
int calibrate_panel(const GlobalOptions& global, const CalibrateOptions& opt,
                    RunConfig& config) {
    require_readable(opt.panel_path, "panel");
    require_readable(opt.claims_path, "claims");
    const std::string out = resolve_out(global, opt.out_path, "panel_bacc.csv");

    const auto claims = core::read_claims(opt.claims_path);
    const auto split = resolve_split(opt.split_file, opt.split_seed, claims, config);
    const auto ids = subset_ids(split, opt.subset);
    std::map<std::string, const core::Claim*> by_id;
    for (const auto& c : claims) by_id[c.id] = &c;

    std::map<std::string, std::pair<std::vector<double>, std::vector<bool>>> by_spec;
    for (const auto& row : core::read_jsonl<estimators::PanelRow>(opt.panel_path)) {
        if (!row.available) continue;
        if (!ids.empty() && !ids.count(row.claim_id)) continue;
        const auto it = by_id.find(row.claim_id);
        if (it == by_id.end() || it->second->label == core::Label::unlabeled) continue;
        auto& [values, gold] = by_spec[row.spec_key];
        values.push_back(row.score);
        gold.push_back(it->second->label == core::Label::factual);
    }
    if (by_spec.empty()) {
        throw invalid_input("no labeled panel rows in the selected subset");
    }

    std::ostringstream csv;
    csv << "spec,tau,bacc,claims\n";
    std::size_t searched = 0;
    for (const auto& [spec, data] : by_spec) {
        const auto& [values, gold] = data;
        const bool has_factual = std::find(gold.begin(), gold.end(), true) != gold.end();
        const bool has_hallucinated = std::find(gold.begin(), gold.end(), false) != gold.end();
        if (!has_factual || !has_hallucinated) continue;
        const auto found = eval::search_threshold(values, gold);
        csv << spec << ',' << eval::format_double(found.tau) << ','
            << eval::format_double(found.bacc) << ',' << values.size() << '\n';
        ++searched;
    }
    core::write_text_file(out, csv.str());
    std::cout << "calibrate: per-estimator BAcc table with " << searched << " specs -> " << out
              << "\n";
    write_manifest(out, "calibrate", config, {opt.panel_path, opt.claims_path}, {out},
                   json{{"mode", "panel"}, {"subset", opt.subset}, {"specs", searched}});
    return kExitOk;
}

int cmd_calibrate(const GlobalOptions& global, const CalibrateOptions& opt) {
    RunConfig config = resolve_config(global);
    if (!opt.panel_path.empty()) {
        return calibrate_panel(global, opt, config);
    }
    require_readable(opt.scores_path, "scores");
    require_readable(opt.claims_path, "claims");
    const std::string out = resolve_out(global, opt.out_path, "calibration.json");

    const auto claims = core::read_claims(opt.claims_path);
    const auto scores =
        select_detector(core::read_detector_scores(opt.scores_path), opt.detector);
    const auto split = resolve_split(opt.split_file, opt.split_seed, claims, config);
    const auto joined = join_scores(scores, claims, subset_ids(split, opt.subset));

    std::vector<double> values;
    std::vector<bool> gold;
    for (const auto& sc : joined) {
        values.push_back(sc.score);
        gold.push_back(sc.gold_factual);
    }

    core::EvalReport report;
    if (opt.mode == "single") {
        const auto found = eval::search_threshold(values, gold);
        report = eval::build_report(joined, found.tau, found.tau, false);
        std::cout << "calibrate: tau=" << eval::format_double(found.tau)
                  << " bacc=" << eval::format_double(found.bacc) << " on " << joined.size()
                  << " claims\n";
    } else if (opt.mode == "dual") {
        const double floor = opt.min_bacc.value_or(config.min_bacc);
        const auto found = eval::search_dual_thresholds(values, gold, floor);
        report = eval::build_report(joined, found.alpha_low, found.alpha_high, true);
        std::cout << "calibrate: alpha_low=" << eval::format_double(found.alpha_low)
                  << " alpha_high=" << eval::format_double(found.alpha_high)
                  << " bacc_unknown=" << eval::format_double(found.bacc_unknown)
                  << " unknowns=" << found.n_unknown << " on " << joined.size() << " claims\n";
    } else {
        throw invalid_input("unknown mode '" + opt.mode + "' (expected single|dual)");
    }

    core::write_text_file(out, json(report).dump(2) + "\n");
    write_manifest(out, "calibrate", config, {opt.scores_path, opt.claims_path}, {out},
                   json{{"mode", opt.mode},
                        {"subset", opt.subset},
                        {"claims", joined.size()},
                        {"detector", opt.detector}});
    return kExitOk;
}

struct EvaluateOptions {
    std::string scores_path;
    std::string claims_path;
    std::string detector;
    std::string split_file;
    std::optional<std::int64_t> split_seed;
    std::string subset = "test";
    std::string calibration_path;
    std::optional<double> tau;
    std::optional<double> alpha_low;
    std::optional<double> alpha_high;
    bool stratify_length = false;
    std::string prompts_path;
    bool histogram = false;
    int bins = 20;
    std::string out_path;
};

int cmd_evaluate(const GlobalOptions& global, const EvaluateOptions& opt) {
    RunConfig config = resolve_config(global);
    require_readable(opt.scores_path, "scores");
    require_readable(opt.claims_path, "claims");
    const std::string out = resolve_out(global, opt.out_path, "report.json");

    double alpha_low = 0.5, alpha_high = 0.5;
    bool dual = false;
    if (!opt.calibration_path.empty()) {
        require_readable(opt.calibration_path, "calibration report");
        core::EvalReport calibration;
        try {
            calibration =
                json::parse(core::read_text_file(opt.calibration_path)).get<core::EvalReport>();
        } catch (const json::exception& e) {
            throw parse_error(opt.calibration_path + ": " + e.what());
        }
        if (calibration.alpha_low && calibration.alpha_high) {
            alpha_low = *calibration.alpha_low;
            alpha_high = *calibration.alpha_high;
            dual = true;
        } else if (calibration.tau) {
            alpha_low = alpha_high = *calibration.tau;
        } else {
            throw invalid_input(opt.calibration_path + " carries no thresholds");
        }
    } else if (opt.alpha_low && opt.alpha_high) {
        alpha_low = *opt.alpha_low;
        alpha_high = *opt.alpha_high;
        dual = true;
    } else if (opt.tau) {
        alpha_low = alpha_high = *opt.tau;
    } else {
        throw invalid_input("pass --calibration, --tau, or --alpha-low/--alpha-high");
    }
    if (alpha_low > alpha_high) {
        throw invalid_input("alpha_low must be <= alpha_high");
    }

    const auto claims = core::read_claims(opt.claims_path);
    const auto scores =
        select_detector(core::read_detector_scores(opt.scores_path), opt.detector);
    const auto split = resolve_split(opt.split_file, opt.split_seed, claims, config);
    auto joined = join_scores(scores, claims, subset_ids(split, opt.subset));
    bool has_factual = false, has_hallucinated = false;
    for (const auto& sc : joined) {
        (sc.gold_factual ? has_factual : has_hallucinated) = true;
    }
    if (!has_factual || !has_hallucinated) {
        throw invalid_input("balanced accuracy is undefined: subset '" + opt.subset +
                            "' contains a single class");
    }

    std::string length_source;
    if (opt.stratify_length) {
        if (opt.prompts_path.empty()) {
            throw invalid_input("--stratify-length needs --prompts for response texts");
        }
        require_readable(opt.prompts_path, "prompts");
        const auto prompts = prompt_index(opt.prompts_path);
        std::map<std::string, const core::Claim*> by_id;
        for (const auto& c : claims) by_id[c.id] = &c;

        auto backend = make_backend(config.backend);
        const bool can_tokenize = backend->capabilities().tokenize;
        length_source = can_tokenize ? backend->capabilities().id + "-tokenizer" : "whitespace";
        std::map<std::string, std::int64_t> response_length; // prompt_id -> tokens
        for (auto& sc : joined) {
            const auto* claim = by_id.at(sc.claim_id);
            const auto it = prompts.find(claim->prompt_id);
            if (it == prompts.end()) {
                throw invalid_input("prompts file lacks prompt_id '" + claim->prompt_id + "'");
            }
            auto cached = response_length.find(claim->prompt_id);
            if (cached == response_length.end()) {
                std::int64_t length;
                if (can_tokenize) {
                    length = static_cast<std::int64_t>(
                        backend->count_tokens(it->second.response));
                } else {
                    std::istringstream in(it->second.response);
                    std::string word;
                    length = 0;
                    while (in >> word) ++length;
                }
                cached = response_length.emplace(claim->prompt_id, length).first;
            }
            sc.response_length = cached->second;
        }
    }

    core::EvalReport report = eval::build_report(joined, alpha_low, alpha_high, dual);
    if (opt.stratify_length) {
        eval::add_length_strata(report, joined, alpha_low, alpha_high, dual);
        report.length_source = length_source;
    }
    if (opt.histogram) {
        report.histogram = eval::score_histogram(joined, opt.bins);
    }

    core::write_text_file(out, json(report).dump(2) + "\n");
    std::vector<std::string> outputs{out};
    const std::string csv_path = out + ".csv";
    core::write_text_file(csv_path, eval::report_csv(report));
    outputs.push_back(csv_path);
    if (report.histogram) {
        const std::string hist_path = out + ".histogram.csv";
        core::write_text_file(hist_path, eval::histogram_csv(*report.histogram));
        outputs.push_back(hist_path);
    }

    std::cout << "evaluate: bacc=" << eval::format_double(report.bacc);
    if (report.bacc_unknown) {
        std::cout << " bacc_unknown=" << eval::format_double(*report.bacc_unknown);
    }
    std::cout << " on " << joined.size() << " claims (" << opt.subset << ") -> " << out << "\n";

    std::vector<std::string> inputs{opt.scores_path, opt.claims_path};
    if (!opt.calibration_path.empty()) inputs.push_back(opt.calibration_path);
    if (!opt.prompts_path.empty()) inputs.push_back(opt.prompts_path);
    write_manifest(out, "evaluate", config, inputs, outputs,
                   json{{"subset", opt.subset},
                        {"claims", joined.size()},
                        {"dual", dual},
                        {"detector", opt.detector}});
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOptions {
    std::string in_path;
    std::string out_dir;
};

int cmd_report(const GlobalOptions& global, const ReportOptions& opt) {
    RunConfig config = resolve_config(global);
    require_readable(opt.in_path, "report");
    const std::string dir = opt.out_dir.empty()
                                ? (global.out_dir.empty() ? "." : global.out_dir)
                                : opt.out_dir;
    fs::create_directories(dir);

    core::EvalReport report;
    try {
        report = json::parse(core::read_text_file(opt.in_path)).get<core::EvalReport>();
    } catch (const json::exception& e) {
        throw parse_error(opt.in_path + ": " + e.what());
    }

    const std::string metrics_path = (fs::path(dir) / "metrics.csv").string();
    core::write_text_file(metrics_path, eval::report_csv(report));
    std::vector<std::string> outputs{metrics_path};
    if (report.histogram) {
        const std::string hist_path = (fs::path(dir) / "histogram.csv").string();
        core::write_text_file(hist_path, eval::histogram_csv(*report.histogram));
        outputs.push_back(hist_path);
    }

    std::cout << "report: bacc=" << eval::format_double(report.bacc);
    if (report.bacc_unknown) {
        std::cout << " bacc_unknown=" << eval::format_double(*report.bacc_unknown);
    }
    std::cout << " tp=" << report.tp << " fn=" << report.fn << " tn=" << report.tn
              << " fp=" << report.fp << " unknown=" << report.n_unknown << "\n";
    for (const auto& [key, sub] : report.strata) {
        std::cout << "  stratum " << key << ": bacc=" << eval::format_double(sub.bacc)
                  << " n=" << sub.total() << "\n";
    }
    std::cout << "report: wrote " << outputs.size() << " files -> " << dir << "\n";
    write_manifest(metrics_path, "report", config, {opt.in_path}, outputs, json::object());
    return kExitOk;
}

} // namespace

// ---------------------------------------------------------------------------
// argument wiring
// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"reference-free hallucination detection toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    GlobalOptions global;
    app.add_option("--config", global.config_path, "structured run config (JSON)");
    app.add_option("--backend", global.backend_kind, "backend kind: mock|http");
    app.add_option("--mock-script", global.mock_script, "mock backend script (JSONL)");
    std::int64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "master seed override");
    app.add_option("--out-dir", global.out_dir, "directory for default output paths");

    DecomposeOptions decompose_opt;
    auto* decompose = app.add_subcommand("decompose", "atomize responses into claims");
    decompose->add_option("--in", decompose_opt.in_path, "prompts/responses JSONL")->required();
    decompose->add_option("--out", decompose_opt.out_path, "claims JSONL output");
    decompose->add_option("--label-file", decompose_opt.label_file,
                          "pre-labeled (claim_text, label) JSONL");

    ScoreOptions score_opt;
    auto* score = app.add_subcommand("score", "run detectors and/or the estimator panel");
    score->add_option("--in", score_opt.claims_path, "claims JSONL")->required();
    score->add_option("--out", score_opt.out_path, "detector scores JSONL output");
    score->add_option("--detector", score_opt.detector_list,
                      "comma list: prompt_tf,prompt_prob,prompt_cot_tf,selfcheck,finetuned,probe");
    score->add_flag("--panel", score_opt.panel, "emit the 32-estimator panel");
    score->add_option("--panel-out", score_opt.panel_out, "panel JSONL output");
    score->add_option("--prompts", score_opt.prompts_path,
                      "prompts/responses JSONL (selfcheck, panel context)");
    score->add_option("--probe-model", score_opt.probe_model, "trained probe model file");
    score->add_option("--embedding-type", score_opt.embedding_type,
                      "probe embedding type (type1..type4)");
    score->add_option("--entity-strategy", score_opt.entity_strategy,
                      "entity marking: llm|heuristic");

    TrainProbeOptions train_opt;
    auto* train = app.add_subcommand("train-probe", "train the hidden-state probe");
    train->add_option("--claims", train_opt.claims_path, "labeled claims JSONL")->required();
    train->add_option("--out", train_opt.out_path, "model file output");
    train->add_option("--embedding-type", train_opt.embedding_type, "type1..type4");
    train->add_flag("--search-embedding", train_opt.search_embedding,
                    "train all four embedding types, keep the best by validation BAcc");
    std::int64_t train_split_seed = 0;
    auto* train_split_seed_opt =
        train->add_option("--split-seed", train_split_seed, "dataset split seed");
    train->add_option("--split-file", train_opt.split_file, "explicit DatasetSplit JSON");
    train->add_flag("--binary", train_opt.binary, "save raw little-endian weights");
    train->add_flag("--gradient-check", train_opt.run_gradient_check,
                    "verify backprop against finite differences");
    train->add_option("--embedding-cache", train_opt.embedding_cache,
                      "embedding cache JSONL (read and updated)");

    BuildFtOptions build_opt;
    auto* build = app.add_subcommand("build-ft-data", "emit fine-tuning datasets");
    build->add_option("--claims", build_opt.claims_path, "labeled claims JSONL")->required();
    build->add_option("--out", build_opt.out_path, "instruction-tuning JSONL output");
    build->add_flag("--no-rationale", build_opt.no_rationale, "bare labels, no rationales");
    build->add_flag("--no-aux", build_opt.no_aux, "skip auxiliary QA examples");
    build->add_flag("--paraphrase", build_opt.paraphrase, "add paraphrase detection examples");
    build->add_flag("--half", build_opt.half, "stratified half of the claims");
    std::int64_t build_seed = 0;
    auto* build_seed_opt = build->add_option("--build-seed", build_seed, "subsampling seed");

    CalibrateOptions calibrate_opt;
    auto* calibrate = app.add_subcommand("calibrate", "search thresholds on a subset");
    calibrate->add_option("--scores", calibrate_opt.scores_path, "detector scores JSONL");
    calibrate->add_option("--panel-in", calibrate_opt.panel_path,
                          "estimator panel JSONL: emit the per-spec BAcc table instead");
    calibrate->add_option("--claims", calibrate_opt.claims_path, "labeled claims JSONL")
        ->required();
    calibrate->add_option("--detector", calibrate_opt.detector, "detector id to calibrate");
    calibrate->add_option("--split-file", calibrate_opt.split_file, "DatasetSplit JSON");
    std::int64_t calibrate_split_seed = 0;
    auto* calibrate_split_seed_opt =
        calibrate->add_option("--split-seed", calibrate_split_seed, "dataset split seed");
    calibrate->add_option("--subset", calibrate_opt.subset, "train|validation|test|all");
    calibrate->add_option("--mode", calibrate_opt.mode, "single|dual");
    double calibrate_min_bacc = 0.70;
    auto* min_bacc_opt = calibrate->add_option("--min-bacc", calibrate_min_bacc,
                                               "decided-claims BAcc floor (dual mode)");
    calibrate->add_option("--out", calibrate_opt.out_path, "calibration report JSON output");

    EvaluateOptions evaluate_opt;
    auto* evaluate = app.add_subcommand("evaluate", "apply thresholds and report metrics");
    evaluate->add_option("--scores", evaluate_opt.scores_path, "detector scores JSONL")
        ->required();
    evaluate->add_option("--claims", evaluate_opt.claims_path, "labeled claims JSONL")
        ->required();
    evaluate->add_option("--detector", evaluate_opt.detector, "detector id to evaluate");
    evaluate->add_option("--split-file", evaluate_opt.split_file, "DatasetSplit JSON");
    std::int64_t evaluate_split_seed = 0;
    auto* evaluate_split_seed_opt =
        evaluate->add_option("--split-seed", evaluate_split_seed, "dataset split seed");
    evaluate->add_option("--subset", evaluate_opt.subset, "train|validation|test|all");
    evaluate->add_option("--calibration", evaluate_opt.calibration_path,
                         "calibration report JSON with thresholds");
    double tau_value = 0.0, alpha_low_value = 0.0, alpha_high_value = 0.0;
    auto* tau_opt = evaluate->add_option("--tau", tau_value, "single threshold");
    auto* alpha_low_opt = evaluate->add_option("--alpha-low", alpha_low_value, "dual low");
    auto* alpha_high_opt = evaluate->add_option("--alpha-high", alpha_high_value, "dual high");
    evaluate->add_flag("--stratify-length", evaluate_opt.stratify_length,
                       "sub-reports by response token length");
    evaluate->add_option("--prompts", evaluate_opt.prompts_path,
                         "prompts/responses JSONL (length stratification)");
    evaluate->add_flag("--histogram", evaluate_opt.histogram, "attach a P_factual histogram");
    evaluate->add_option("--bins", evaluate_opt.bins, "histogram bin count");
    evaluate->add_option("--out", evaluate_opt.out_path, "evaluation report JSON output");

    ReportOptions report_opt;
    auto* report = app.add_subcommand("report", "render a report into plot-ready CSV files");
    report->add_option("--in", report_opt.in_path, "report JSON")->required();
    report->add_option("--out-dir", report_opt.out_dir, "directory for CSV outputs");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (*seed_opt) global.seed = seed_value;
    if (*train_split_seed_opt) train_opt.split_seed = train_split_seed;
    if (*build_seed_opt) build_opt.seed = build_seed;
    if (*calibrate_split_seed_opt) calibrate_opt.split_seed = calibrate_split_seed;
    if (*min_bacc_opt) calibrate_opt.min_bacc = calibrate_min_bacc;
    if (*evaluate_split_seed_opt) evaluate_opt.split_seed = evaluate_split_seed;
    if (*tau_opt) evaluate_opt.tau = tau_value;
    if (*alpha_low_opt) evaluate_opt.alpha_low = alpha_low_value;
    if (*alpha_high_opt) evaluate_opt.alpha_high = alpha_high_value;

    try {
        if (decompose->parsed()) return cmd_decompose(global, decompose_opt);
        if (score->parsed()) return cmd_score(global, score_opt);
        if (train->parsed()) return cmd_train_probe(global, train_opt);
        if (build->parsed()) return cmd_build_ft_data(global, build_opt);
        if (calibrate->parsed()) return cmd_calibrate(global, calibrate_opt);
        if (evaluate->parsed()) return cmd_evaluate(global, evaluate_opt);
        if (report->parsed()) return cmd_report(global, report_opt);
        throw invalid_input("no subcommand given");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::invalid_input:
            case ErrorKind::parse:
                return kExitUsage;
            case ErrorKind::backend:
            case ErrorKind::capability:
            case ErrorKind::detector:
                return kExitBackend;
            case ErrorKind::infeasible_constraint:
                return kExitInfeasible;
            default:
                return kExitError;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

} // namespace halodet::cli
