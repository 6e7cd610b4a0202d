#include <doctest.h>

#include "halodet/core/error.hpp"
#include "halodet/core/jsonl.hpp"
#include "halodet/gateway/mock.hpp"
#include "halodet/pipeline/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace halodet;
using nlohmann::json;

namespace {

std::unique_ptr<gateway::Backend> mock_with(std::vector<json> records) {
    return gateway::MockBackend::from_records(std::move(records));
}

const pipeline::PipelineConfig kConfig = pipeline::default_pipeline_config();

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("decompose parses one claim per line and assigns stable ids") {
    auto backend = mock_with({json{
        {"match", "Claims:"},
        {"response", "Paris is the capital of France.\n\nThe Seine runs through Paris.\n"}}});
    const auto claims =
        pipeline::decompose(*backend, kConfig, "p1", "Tell me about Paris", "Paris is...");
    REQUIRE(claims.size() == 2); // blank line dropped
    CHECK(claims[0].text == "Paris is the capital of France.");
    CHECK(claims[1].text == "The Seine runs through Paris.");
    CHECK(claims[0].prompt_id == "p1");
    CHECK(claims[0].id != claims[1].id);

    // rerun reproduces the same ids
    const auto again =
        pipeline::decompose(*backend, kConfig, "p1", "Tell me about Paris", "Paris is...");
    CHECK(claims == again);
}

TEST_CASE("decompose strips list markers and tolerates empty replies") {
    auto backend = mock_with(
        {json{{"match", "numbered"}, {"response", "1. first claim\n2) second claim\n- third"}},
         json{{"match", "Claims:"}, {"response", ""}}});
    const auto numbered =
        pipeline::decompose(*backend, kConfig, "p", "numbered", "text");
    REQUIRE(numbered.size() == 3);
    CHECK(numbered[0].text == "first claim");
    CHECK(numbered[1].text == "second claim");
    CHECK(numbered[2].text == "third");

    const auto empty = pipeline::decompose(*backend, kConfig, "p", "other", "text");
    CHECK(empty.empty());

    CHECK_THROWS_AS(pipeline::decompose(*backend, kConfig, "p", "x", ""), Error);
}

TEST_CASE("filter_relevant keeps yes and ambiguous, drops no") {
    auto backend = mock_with({
        json{{"match", "first"}, {"response", "yes"}},
        json{{"match", "second"}, {"response", "no"}},
        json{{"match", "third"}, {"response", "maybe so"}},
    });
    std::vector<core::Claim> claims(3);
    claims[0].id = "a";
    claims[0].text = "first claim";
    claims[1].id = "b";
    claims[1].text = "second claim";
    claims[2].id = "c";
    claims[2].text = "third claim";

    const auto kept = pipeline::filter_relevant(*backend, kConfig, "prompt", claims);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == "a");
    CHECK(kept[1].id == "c"); // ambiguous reply keeps the claim

    const auto none = pipeline::filter_relevant(*backend, kConfig, "prompt", {});
    CHECK(none.empty());
}

TEST_CASE("span extraction verifies exact matches and falls back to overlaps") {
    const std::string response =
        "The Amber Room was constructed in the 18th century and it was lost in 1945.";

    SUBCASE("exact proposal") {
        auto backend = mock_with({json{
            {"match", "Quote the exact passage"},
            {"response", "constructed in the 18th century"}}});
        core::Claim claim;
        claim.id = "c";
        claim.text = "The Amber Room was built in the 1700s";
        pipeline::SpanStatus status;
        const auto out =
            pipeline::extract_original_span(*backend, kConfig, response, claim, &status);
        CHECK(status == pipeline::SpanStatus::exact);
        CHECK(out.original_span == "constructed in the 18th century");
    }

    SUBCASE("overlap of at least 10 chars") {
        auto backend = mock_with({json{
            {"match", "Quote the exact passage"},
            {"response", "it was lost in 1945 forever and ever"}}});
        core::Claim claim;
        claim.id = "c";
        claim.text = "claim";
        pipeline::SpanStatus status;
        const auto out =
            pipeline::extract_original_span(*backend, kConfig, response, claim, &status);
        CHECK(status == pipeline::SpanStatus::overlap);
        REQUIRE(out.original_span.has_value());
        CHECK(out.original_span->size() >= 10);
        CHECK(response.find(*out.original_span) != std::string::npos);
    }

    SUBCASE("no usable overlap leaves the span empty") {
        auto backend = mock_with({json{
            {"match", "Quote the exact passage"}, {"response", "zzzz qqqq xxxx"}}});
        core::Claim claim;
        claim.id = "c";
        claim.text = "claim";
        pipeline::SpanStatus status;
        const auto out =
            pipeline::extract_original_span(*backend, kConfig, response, claim, &status);
        CHECK(status == pipeline::SpanStatus::none);
        CHECK_FALSE(out.original_span.has_value());
    }
}

TEST_CASE("longest_common_substring finds contiguous overlaps") {
    CHECK(pipeline::longest_common_substring("abcdef", "zzabczz") == "abc");
    CHECK(pipeline::longest_common_substring("", "abc").empty());
    CHECK(pipeline::longest_common_substring("xyz", "abc").empty());
}

TEST_CASE("file labeler joins on whitespace-normalized text") {
    const std::string dir = testing::make_temp_dir("pipeline");
    const std::string labels = dir + "/labels.jsonl";
    core::write_lines(labels,
                      {json{{"claim_text", "Paris is  the capital"}, {"label", "factual"}}.dump(),
                       json{{"claim_text", "The moon is cheese"},
                            {"label", "hallucinated"}}.dump()});

    pipeline::FileLabeler labeler(labels);
    std::vector<core::Claim> claims(3);
    claims[0].id = "a";
    claims[0].text = "Paris is the capital"; // different spacing, same key
    claims[1].id = "b";
    claims[1].text = "The moon is cheese";
    claims[2].id = "c";
    claims[2].text = "Unknown claim";

    const auto labeled = labeler.label_claims(claims);
    CHECK(labeled[0].label == core::Label::factual);
    CHECK(labeled[1].label == core::Label::hallucinated);
    CHECK(labeled[2].label == core::Label::unlabeled);
    testing::remove_dir(dir);
}

TEST_CASE("a balanced label file labels the matching claims") {
    const std::string dir = testing::make_temp_dir("pipeline");
    const std::string labels = dir + "/labels.jsonl";
    std::vector<std::string> lines;
    std::vector<core::Claim> claims;
    for (int i = 0; i < 223; ++i) {
        for (const bool factual : {true, false}) {
            const std::string text =
                std::string(factual ? "fact" : "fiction") + " number " + std::to_string(i);
            lines.push_back(json{{"claim_text", text},
                                 {"label", factual ? "factual" : "hallucinated"}}
                                .dump());
            core::Claim c;
            c.id = "c" + std::to_string(claims.size());
            c.text = text;
            claims.push_back(std::move(c));
        }
    }
    core::write_lines(labels, lines);
    pipeline::FileLabeler labeler(labels);
    const auto labeled = labeler.label_claims(claims);
    std::size_t factual = 0, hallucinated = 0;
    for (const auto& c : labeled) {
        factual += c.label == core::Label::factual;
        hallucinated += c.label == core::Label::hallucinated;
    }
    CHECK(factual == 223);
    CHECK(hallucinated == 223);
    testing::remove_dir(dir);
}

TEST_CASE("search labeler is a stub that reports its absence") {
    pipeline::SearchLabeler labeler;
    try {
        labeler.label_claims({});
        FAIL("expected capability error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::capability);
    }
}

TEST_CASE("pipeline output claims never invent text") {
    // every output claim's text must appear verbatim in a decomposition line
    auto backend = mock_with({
        json{{"match", "Claims:"}, {"response", "alpha fact one\nbeta fact two"}},
        json{{"match", "Is the claim relevant"}, {"response", "yes"}},
        json{{"match", "Quote the exact passage"}, {"response", "alpha fact"}},
    });
    pipeline::PromptRecord record{"p1", "prompt", "alpha fact one and beta fact two"};
    const auto claims = pipeline::run_pipeline(*backend, kConfig, record, nullptr);
    REQUIRE(claims.size() == 2);
    for (const auto& claim : claims) {
        CHECK((claim.text == "alpha fact one" || claim.text == "beta fact two"));
    }
}

TEST_CASE("pipeline is deterministic end-to-end on the fixture mock") {
    const std::string dir = testing::make_temp_dir("pipeline");
    const auto fixture = testing::write_benchmark_fixture(dir, 4, 0);
    auto backend = gateway::MockBackend::from_file(fixture.mock_script_path, 0);
    auto labeler = std::make_unique<pipeline::FileLabeler>(fixture.labels_path);

    const auto records = pipeline::read_prompt_records(fixture.prompts_path);
    std::vector<core::Claim> first, second;
    for (const auto& record : records) {
        auto claims = pipeline::run_pipeline(*backend, kConfig, record, labeler.get());
        first.insert(first.end(), claims.begin(), claims.end());
    }
    for (const auto& record : records) {
        auto claims = pipeline::run_pipeline(*backend, kConfig, record, labeler.get());
        second.insert(second.end(), claims.begin(), claims.end());
    }
    CHECK(first == second);
    CHECK(first.size() == fixture.n_claims);
    for (const auto& claim : first) {
        CHECK(claim.label != core::Label::unlabeled); // label file covers everything
        CHECK(claim.original_span.has_value());       // spans verified verbatim
    }
    testing::remove_dir(dir);
}

} // TEST_SUITE
