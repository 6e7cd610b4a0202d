#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "halodet/core/types.hpp"
#include "halodet/gateway/backend.hpp"

namespace halodet::estimators {

enum class Statistic { probability, entropy };
enum class Scope { all_tokens, entity_tokens };
enum class Reduction { arithmetic, geometric, top_k, top_percent };

// One member of the estimator grid: a statistic over a token scope with a
// reduction. Every estimator is oriented so that higher = more factual;
// entropy-based scores are negated once here, at the estimator boundary.
struct AggregatorSpec {
    Statistic statistic = Statistic::probability;
    Scope scope = Scope::all_tokens;
    Reduction reduction = Reduction::arithmetic;
    int k = 1;            // top_k only, >= 1
    double percent = 5.0; // top_percent only, in (0, 100]

    std::string key() const; // e.g. "probability/all/top_k_3"
};

// Reduces the scoped token statistics to one score.
//
// probability: arithmetic mean, geometric mean exp(mean(ln p)), mean of the k
// lowest, or mean of the lowest max(1, ceil(p% * n)). entropy: the same
// reductions over the k / p% highest entropies, negated.
//
// Throws an estimator-unavailable error when scoping leaves no tokens.
double aggregate(std::span<const core::TokenScore> tokens, const AggregatorSpec& spec);

// The fixed grid: {probability, entropy} x {all, entity} x
// {arithmetic, geometric, top_k 1/3/5, top_percent 5/10/15} = 32 entries.
std::vector<AggregatorSpec> panel_grid();

struct PanelEntry {
    AggregatorSpec spec;
    double score = 0.0;
    bool available = false;
};

// One score per grid member; entity-scoped entries are marked unavailable
// when the claim has no entity tokens.
std::vector<PanelEntry> run_estimator_panel(std::span<const core::TokenScore> tokens);

// Panel output row as stored in JSON Lines.
struct PanelRow {
    std::string claim_id;
    std::string spec_key;
    double score = 0.0;
    bool available = false;
};

void to_json(nlohmann::json& j, const PanelRow& r);
void from_json(const nlohmann::json& j, PanelRow& r);

enum class EntityStrategy { llm, heuristic };

// Sets is_entity per strategy. The llm strategy prompts the backend with
// entity_template ({claim} placeholder) and reads one entity per line; the
// heuristic flags tokens inside capitalized multi-word spans, digit-bearing
// words, and month names. Both are declared approximations.
std::vector<core::TokenScore> mark_entity_tokens(const std::string& claim_text,
                                                 std::vector<core::TokenScore> tokens,
                                                 EntityStrategy strategy,
                                                 gateway::Backend* backend = nullptr,
                                                 const std::string& entity_template = {});

} // namespace halodet::estimators
