#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "halodet/core/types.hpp"

namespace halodet::testing {

// Fresh unique directory under the system temp dir.
std::string make_temp_dir(const std::string& tag);

void remove_dir(const std::string& path);

std::string read_file(const std::string& path);

// Deterministic end-to-end fixture: prompts/responses, a mock script driving
// the full pipeline (decomposition, relevance, span extraction, true/false
// scoring, sampling with support markers, fine-tune builders), and a label
// file. Everything derives from (n_prompts, seed).
struct BenchmarkFixture {
    std::string prompts_path;
    std::string mock_script_path;
    std::string labels_path;
    std::size_t n_claims = 0;
};

BenchmarkFixture write_benchmark_fixture(const std::string& dir, int n_prompts,
                                         std::uint64_t seed);

// The claims the fixture's pipeline should produce, with labels.
std::vector<core::Claim> fixture_claims(int n_prompts, std::uint64_t seed);

} // namespace halodet::testing
