#include "support/fixtures.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "halodet/core/hash.hpp"
#include "halodet/core/jsonl.hpp"
#include "halodet/core/rng.hpp"

#if defined(_WIN32)
#include <process.h>
#else
#include <unistd.h>
#endif

namespace halodet::testing {

namespace fs = std::filesystem;
using nlohmann::json;

std::string make_temp_dir(const std::string& tag) {
    static std::atomic<std::uint64_t> counter{0};
#if defined(_WIN32)
    const int pid = _getpid();
#else
    const int pid = getpid();
#endif
    const auto dir = fs::temp_directory_path() /
                     ("halodet_" + tag + "_" + std::to_string(pid) + "_" +
                      std::to_string(counter++));
    fs::create_directories(dir);
    return dir.string();
}

void remove_dir(const std::string& path) {
    std::error_code ec;
    fs::remove_all(path, ec);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

std::string pad2(int value) {
    return (value < 10 ? "0" : "") + std::to_string(value);
}

std::string prompt_text(int k) { return "Tell me about subject " + pad2(k) + "."; }

std::string claim_text(int k, int j) {
    const std::string code = "P" + pad2(k) + "C" + std::to_string(j);
    const int year = 1900 + (k * 3 + j) % 100;
    return "Project " + code + " Alpha began in " + std::to_string(year) + " at Site " + code +
           " Beta.";
}

// Deterministic uniform in [0,1) from a string key.
double key_uniform(const std::string& key, std::uint64_t seed) {
    core::Rng rng(core::fnv1a64(key, seed));
    return rng.uniform_real();
}

constexpr int kClaimsPerPrompt = 3;
constexpr int kSampleCount = 20;

} // namespace

std::vector<core::Claim> fixture_claims(int n_prompts, std::uint64_t seed) {
    std::vector<core::Claim> claims;
    for (int k = 0; k < n_prompts; ++k) {
        for (int j = 0; j < kClaimsPerPrompt; ++j) {
            core::Claim claim;
            claim.prompt_id = "p" + pad2(k);
            claim.text = claim_text(k, j);
            claim.id = core::hex64(
                core::fnv1a64(claim.prompt_id + "#" + std::to_string(j)));
            // Matches the parity signal the mock plants in hidden-state dim 0.
            claim.label = (core::fnv1a64(claim.text, seed) & 1) ? core::Label::factual
                                                                : core::Label::hallucinated;
            claim.relevant = true;
            claim.original_span = claim.text;
            claims.push_back(std::move(claim));
        }
    }
    return claims;
}

BenchmarkFixture write_benchmark_fixture(const std::string& dir, int n_prompts,
                                         std::uint64_t seed) {
    BenchmarkFixture fixture;
    fixture.prompts_path = (fs::path(dir) / "prompts.jsonl").string();
    fixture.mock_script_path = (fs::path(dir) / "mock_script.jsonl").string();
    fixture.labels_path = (fs::path(dir) / "labels.jsonl").string();

    const auto claims = fixture_claims(n_prompts, seed);
    fixture.n_claims = claims.size();

    // prompts.jsonl: responses embed the claim sentences verbatim, padded with
    // filler to hit <500 / 500..1000 / >1000 token lengths round-robin.
    {
        std::vector<std::string> lines;
        for (int k = 0; k < n_prompts; ++k) {
            const int target_words = k % 3 == 0 ? 100 : (k % 3 == 1 ? 700 : 1500);
            std::string response;
            int words = 0;
            for (int j = 0; j < kClaimsPerPrompt; ++j) {
                const std::string text = claim_text(k, j);
                response += text;
                response += ' ';
                words += 11; // words per claim sentence
                while (words < target_words * (j + 1) / kClaimsPerPrompt) {
                    response += "further archive background notes follow here. ";
                    words += 6;
                }
            }
            json record{{"prompt_id", "p" + pad2(k)},
                        {"prompt", prompt_text(k)},
                        {"response", response}};
            lines.push_back(record.dump());
        }
        core::write_lines(fixture.prompts_path, lines);
    }

    // labels.jsonl
    {
        std::vector<std::string> lines;
        for (const auto& claim : claims) {
            lines.push_back(json{{"claim_text", claim.text},
                                 {"label", core::to_string(claim.label)}}
                                .dump());
        }
        core::write_lines(fixture.labels_path, lines);
    }

    // mock_script.jsonl
    {
        std::vector<std::string> lines;
        lines.push_back(json{{"config",
                              {{"hidden_layers", 4},
                               {"hidden_width", 16},
                               {"vocab_size", 1000}}}}
                            .dump());
        lines.push_back(json{{"match", "Is the claim relevant"}, {"response", "yes"}}.dump());

        for (int k = 0; k < n_prompts; ++k) {
            std::string decomposition;
            for (int j = 0; j < kClaimsPerPrompt; ++j) {
                decomposition += claim_text(k, j);
                decomposition += '\n';
            }
            lines.push_back(json{{"match_all", json::array({"Claims:", prompt_text(k)})},
                                 {"response", decomposition}}
                                .dump());
        }

        for (const auto& claim : claims) {
            // span extraction: the claim sentence is verbatim in the response
            lines.push_back(
                json{{"match_all", json::array({"Quote the exact passage", claim.text})},
                     {"response", claim.text}}
                    .dump());

            // true/false with first-token candidates correlated with the label
            const bool factual = claim.label == core::Label::factual;
            const double u = key_uniform("tf:" + claim.id, seed);
            const double p_true = factual ? 0.45 + 0.52 * u : 0.03 + 0.52 * u;
            const double p_false = 1.0 - p_true - 0.02;
            const bool greedy_true = p_true >= p_false;
            json tf_tokens = json::array();
            tf_tokens.push_back(
                json{{"text", greedy_true ? "True" : "False"},
                     {"logprob", std::log(greedy_true ? p_true : p_false)},
                     {"top", json::array({json::array({"True", std::log(p_true)}),
                                          json::array({"False", std::log(p_false)}),
                                          json::array({"Perhaps", std::log(0.02)})})}});
            lines.push_back(
                json{{"match_all", json::array({"exactly one word", claim.text})},
                     {"response", greedy_true ? "True" : "False"},
                     {"tokens", tf_tokens}}
                    .dump());

            // reasoning detector
            lines.push_back(
                json{{"match_all", json::array({"Reason step by step", claim.text})},
                     {"response", std::string("The registry entries are consistent with the "
                                              "claim being checked. ") +
                                      (factual ? "True" : "False")}}
                    .dump());

            // sampling support judgment (yes-records before the generic no)
            lines.push_back(
                json{{"match_all",
                      json::array({"Does the context support", "Claim: " + claim.text,
                                   "SUPPORTS[" + claim.id + "]"})},
                     {"response", "yes"}}
                    .dump());
        }

        for (int k = 0; k < n_prompts; ++k) {
            json samples = json::array();
            for (int i = 0; i < kSampleCount; ++i) {
                std::string sample = "Sampled notes v" + std::to_string(i) + " for subject " +
                                     pad2(k) + ":";
                for (int j = 0; j < kClaimsPerPrompt; ++j) {
                    const auto& claim = claims[static_cast<std::size_t>(k * kClaimsPerPrompt + j)];
                    const double p_support =
                        claim.label == core::Label::factual ? 0.8 : 0.2;
                    const double u = key_uniform(
                        "support:" + claim.id + ":" + std::to_string(i), seed);
                    if (u < p_support) {
                        sample += " SUPPORTS[" + claim.id + "]";
                    }
                }
                sample += " end of notes.";
                samples.push_back(sample);
            }
            lines.push_back(json{{"match", prompt_text(k)}, {"samples", samples}}.dump());
        }

        lines.push_back(json{{"match", "Does the context support"}, {"response", "no"}}.dump());
        lines.push_back(json{{"match", "Explain in one short paragraph"},
                             {"response", "The archival records and registry entries settle the "
                                          "stated details."}}
                            .dump());
        lines.push_back(json{{"match", "Write one question"},
                             {"response", "What does the claim record about the project?"}}
                            .dump());
        lines.push_back(json{{"match", "Answer the question using only the claim"},
                             {"response", "It began as recorded in the claim. The claim itself "
                                          "carries the stated value."}}
                            .dump());
        lines.push_back(json{{"match", "The claim below is inaccurate"},
                             {"response", "The documented value differs from the claim; the "
                                          "registry gives the corrected figure."}}
                            .dump());
        lines.push_back(json{{"match", "Paraphrase the claim below"},
                             {"response", "A rewording of the stated fact with the same "
                                          "meaning."}}
                            .dump());
        core::write_lines(fixture.mock_script_path, lines);
    }

    return fixture;
}

} // namespace halodet::testing
