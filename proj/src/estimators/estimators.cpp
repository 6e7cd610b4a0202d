#include "halodet/estimators/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "halodet/core/error.hpp"
#include "halodet/prompts.hpp"

namespace halodet::estimators {

namespace {

const char* statistic_name(Statistic s) {
    return s == Statistic::probability ? "probability" : "entropy";
}

const char* scope_name(Scope s) { return s == Scope::all_tokens ? "all" : "entity"; }

// Number of tokens selected by a top_percent reduction.
std::size_t percent_count(double percent, std::size_t n) {
    const auto raw = static_cast<std::size_t>(std::ceil(percent * static_cast<double>(n) / 100.0));
    return std::max<std::size_t>(1, raw);
}

double arithmetic_mean(const std::vector<double>& values) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

double geometric_mean(const std::vector<double>& values) {
    // exp(mean(log v)) for numerical stability; any zero forces the limit 0.
    double log_acc = 0.0;
    for (double v : values) {
        if (v <= 0.0) return 0.0;
        log_acc += std::log(v);
    }
    return std::exp(log_acc / static_cast<double>(values.size()));
}

// Mean of the `count` smallest (ascending = true) or largest values.
double tail_mean(std::vector<double> values, std::size_t count, bool ascending) {
    count = std::min(count, values.size());
    if (ascending) {
        std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(count),
                          values.end());
    } else {
        std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(count),
                          values.end(), std::greater<double>());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) acc += values[i];
    return acc / static_cast<double>(count);
}

} // namespace

std::string AggregatorSpec::key() const {
    std::ostringstream out;
    out << statistic_name(statistic) << '/' << scope_name(scope) << '/';
    switch (reduction) {
        case Reduction::arithmetic: out << "arithmetic"; break;
        case Reduction::geometric: out << "geometric"; break;
        case Reduction::top_k: out << "top_k_" << k; break;
        case Reduction::top_percent: out << "top_percent_" << percent; break;
    }
    return out.str();
}

double aggregate(std::span<const core::TokenScore> tokens, const AggregatorSpec& spec) {
    if (spec.k < 1) throw invalid_input("aggregate: k must be >= 1");
    if (!(spec.percent > 0.0 && spec.percent <= 100.0)) {
        throw invalid_input("aggregate: percent must lie in (0, 100]");
    }

    std::vector<double> values;
    values.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (spec.scope == Scope::entity_tokens && !t.is_entity) continue;
        values.push_back(spec.statistic == Statistic::probability ? t.probability : t.entropy);
    }
    if (values.empty()) {
        throw Error(ErrorKind::estimator_unavailable,
                    std::string("no tokens in scope '") + scope_name(spec.scope) + "'");
    }

    // Low probability and high entropy both signal hallucination, so
    // probability reductions look at the smallest values, entropy reductions
    // at the largest, and the entropy score is negated below.
    const bool ascending = spec.statistic == Statistic::probability;
    double reduced = 0.0;
    switch (spec.reduction) {
        case Reduction::arithmetic:
            reduced = arithmetic_mean(values);
            break;
        case Reduction::geometric:
            reduced = geometric_mean(values);
            break;
        case Reduction::top_k:
            reduced = tail_mean(std::move(values), static_cast<std::size_t>(spec.k), ascending);
            break;
        case Reduction::top_percent: {
            const std::size_t count = percent_count(spec.percent, values.size());
            reduced = tail_mean(std::move(values), count, ascending);
            break;
        }
    }
    return spec.statistic == Statistic::entropy ? -reduced : reduced;
}

std::vector<AggregatorSpec> panel_grid() {
    std::vector<AggregatorSpec> grid;
    grid.reserve(32);
    for (Statistic stat : {Statistic::probability, Statistic::entropy}) {
        for (Scope scope : {Scope::all_tokens, Scope::entity_tokens}) {
            grid.push_back({stat, scope, Reduction::arithmetic});
            grid.push_back({stat, scope, Reduction::geometric});
            for (int k : {1, 3, 5}) {
                grid.push_back({stat, scope, Reduction::top_k, k});
            }
            for (double p : {5.0, 10.0, 15.0}) {
                grid.push_back({stat, scope, Reduction::top_percent, 1, p});
            }
        }
    }
    return grid;
}

std::vector<PanelEntry> run_estimator_panel(std::span<const core::TokenScore> tokens) {
    if (tokens.empty()) {
        throw invalid_input("run_estimator_panel: token list must be non-empty");
    }
    std::vector<PanelEntry> panel;
    for (const auto& spec : panel_grid()) {
        PanelEntry entry;
        entry.spec = spec;
        try {
            entry.score = aggregate(tokens, spec);
            entry.available = true;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::estimator_unavailable) throw;
            entry.score = 0.0;
            entry.available = false;
        }
        panel.push_back(std::move(entry));
    }
    return panel;
}

void to_json(nlohmann::json& j, const PanelRow& r) {
    j = nlohmann::json{{"claim_id", r.claim_id},
                       {"spec", r.spec_key},
                       {"available", r.available}};
    if (r.available) {
        j["score"] = r.score;
    } else {
        j["score"] = nullptr;
    }
}

void from_json(const nlohmann::json& j, PanelRow& r) {
    r.claim_id = j.at("claim_id").get<std::string>();
    r.spec_key = j.at("spec").get<std::string>();
    r.available = j.at("available").get<bool>();
    r.score = r.available ? j.at("score").get<double>() : 0.0;
}

namespace {

struct CharSpan {
    std::size_t begin = 0;
    std::size_t end = 0; // half-open
};

bool overlaps(const CharSpan& a, const CharSpan& b) {
    return a.begin < b.end && b.begin < a.end;
}

struct Word {
    std::string text;
    CharSpan span;
};

std::vector<Word> split_words(const std::string& text) {
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        words.push_back({text.substr(start, i - start), {start, i}});
    }
    return words;
}

bool starts_uppercase(const std::string& word) {
    for (char c : word) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            return std::isupper(static_cast<unsigned char>(c)) != 0;
        }
    }
    return false;
}

bool has_digit(const std::string& word) {
    return std::any_of(word.begin(), word.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
}

bool is_month_name(const std::string& word) {
    static const char* months[] = {"january", "february", "march",     "april",   "may",
                                   "june",    "july",     "august",    "september",
                                   "october", "november", "december"};
    std::string lower;
    for (char c : word) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    for (const char* m : months) {
        if (lower == m) return true;
    }
    return false;
}

std::vector<CharSpan> heuristic_entity_spans(const std::string& claim_text) {
    const auto words = split_words(claim_text);
    std::vector<CharSpan> spans;
    std::size_t i = 0;
    while (i < words.size()) {
        if (starts_uppercase(words[i].text)) {
            std::size_t j = i;
            while (j + 1 < words.size() && starts_uppercase(words[j + 1].text)) ++j;
            if (j > i) { // capitalized multi-word span
                spans.push_back({words[i].span.begin, words[j].span.end});
            }
            i = j + 1;
            continue;
        }
        ++i;
    }
    for (const auto& w : words) {
        if (has_digit(w.text) || is_month_name(w.text)) {
            spans.push_back(w.span);
        }
    }
    return spans;
}

std::vector<CharSpan> llm_entity_spans(const std::string& claim_text, gateway::Backend& backend,
                                       const std::string& entity_template) {
    const std::string tmpl =
        entity_template.empty() ? std::string(prompts::kEntityTemplate) : entity_template;
    const std::string prompt = prompts::render(tmpl, {{"claim", claim_text}});
    const std::string reply = gateway::complete_text(backend, prompt, 256);

    std::vector<CharSpan> spans;
    std::istringstream lines(reply);
    std::string line;
    while (std::getline(lines, line)) {
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
            line.pop_back();
        }
        std::size_t start = 0;
        while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) {
            ++start;
        }
        const std::string entity = line.substr(start);
        if (entity.empty()) continue;
        for (std::size_t pos = claim_text.find(entity); pos != std::string::npos;
             pos = claim_text.find(entity, pos + 1)) {
            spans.push_back({pos, pos + entity.size()});
        }
    }
    return spans;
}

// Greedy left-to-right alignment of token texts onto the claim text; tokens
// that cannot be located get an empty span and stay non-entity.
std::vector<CharSpan> align_tokens(const std::string& claim_text,
                                   const std::vector<core::TokenScore>& tokens) {
    std::vector<CharSpan> spans(tokens.size());
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string needle = tokens[i].token_text;
        // leading-space markers used by common BPE tokenizers
        if (needle.rfind("\xC4\xA0", 0) == 0 || needle.rfind("\xE2\x96\x81", 0) == 0) {
            needle.erase(0, needle[0] == '\xC4' ? 2 : 3);
        }
        const auto first = needle.find_first_not_of(" \t\n");
        if (first == std::string::npos) continue;
        const auto last = needle.find_last_not_of(" \t\n");
        needle = needle.substr(first, last - first + 1);
        const auto pos = claim_text.find(needle, cursor);
        if (pos == std::string::npos) continue;
        spans[i] = {pos, pos + needle.size()};
        cursor = pos + needle.size();
    }
    return spans;
}

} // namespace

std::vector<core::TokenScore> mark_entity_tokens(const std::string& claim_text,
                                                 std::vector<core::TokenScore> tokens,
                                                 EntityStrategy strategy,
                                                 gateway::Backend* backend,
                                                 const std::string& entity_template) {
    std::vector<CharSpan> entity_spans;
    if (strategy == EntityStrategy::llm) {
        if (!backend) {
            throw invalid_input("mark_entity_tokens: llm strategy requires a backend");
        }
        entity_spans = llm_entity_spans(claim_text, *backend, entity_template);
    } else {
        entity_spans = heuristic_entity_spans(claim_text);
    }

    const auto token_spans = align_tokens(claim_text, tokens);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        bool entity = false;
        if (token_spans[i].end > token_spans[i].begin) {
            for (const auto& span : entity_spans) {
                if (overlaps(token_spans[i], span)) {
                    entity = true;
                    break;
                }
            }
        }
        tokens[i].is_entity = entity;
    }
    return tokens;
}

} // namespace halodet::estimators
