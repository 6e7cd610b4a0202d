#include <doctest.h>

#include "halodet/core/error.hpp"
#include "halodet/core/rng.hpp"
#include "halodet/ftdata/builder.hpp"
#include "halodet/gateway/mock.hpp"

using namespace halodet;
using nlohmann::json;

namespace {

core::Claim labeled_claim(const std::string& id, const std::string& text, core::Label label) {
    core::Claim claim;
    claim.id = id;
    claim.prompt_id = "p";
    claim.text = text;
    claim.label = label;
    return claim;
}

std::unique_ptr<gateway::Backend> builder_mock() {
    return gateway::MockBackend::from_records({
        json{{"match", "Explain in one short paragraph"},
             {"response", "The registry confirms the stated year beyond doubt."}},
        json{{"match", "Write one question"},
             {"response", "When was it constructed?"}},
        json{{"match", "Answer the question using only the claim"},
             {"response", "In the 18th century, as the claim itself records."}},
        json{{"match", "The claim below is inaccurate"},
             {"response", "The documented year is 1701, per the explanation."}},
        json{{"match", "Paraphrase the claim below"},
             {"response", "Construction took place during the eighteenth century."}},
    });
}

std::vector<core::Claim> mixed_claims(int n_factual, int n_hallucinated) {
    std::vector<core::Claim> claims;
    for (int i = 0; i < n_factual; ++i) {
        claims.push_back(labeled_claim("f" + std::to_string(i),
                                       "fact " + std::to_string(i), core::Label::factual));
    }
    for (int i = 0; i < n_hallucinated; ++i) {
        claims.push_back(labeled_claim("h" + std::to_string(i),
                                       "fiction " + std::to_string(i),
                                       core::Label::hallucinated));
    }
    // interleave deterministically so halving sees mixed order
    core::Rng rng(5);
    rng.shuffle(claims);
    return claims;
}

} // namespace

TEST_SUITE("ftdata") {

TEST_CASE("detection example output starts with the exact label token") {
    ftdata::BuildOptions options;
    const auto factual = ftdata::build_detection_example(
        labeled_claim("a", "The Amber Room was constructed in the 18th century.",
                      core::Label::factual),
        "It is documented.", options);
    CHECK(factual.output == "True. It is documented.");
    CHECK(factual.task == core::TaskKind::detect);
    CHECK(factual.input == "The Amber Room was constructed in the 18th century.");

    const auto hallucinated = ftdata::build_detection_example(
        labeled_claim("b", "wrong", core::Label::hallucinated), "Contradicted.", options);
    CHECK(hallucinated.output.rfind("False", 0) == 0);

    options.include_rationales = false;
    const auto bare = ftdata::build_detection_example(
        labeled_claim("a", "x", core::Label::factual), "ignored", options);
    CHECK(bare.output == "True");

    CHECK_THROWS_AS(ftdata::build_detection_example(
                        labeled_claim("u", "x", core::Label::unlabeled), "", options),
                    Error);
}

TEST_CASE("rationales come back as one bounded paragraph") {
    auto backend = builder_mock();
    const auto rationale = ftdata::generate_rationale(
        *backend, labeled_claim("a", "claim text", core::Label::factual), std::nullopt);
    CHECK(rationale == "The registry confirms the stated year beyond doubt.");

    // over-long replies are truncated at 150 words with a marker
    std::string longtext;
    for (int i = 0; i < 400; ++i) longtext += "word" + std::to_string(i) + " ";
    auto long_backend = gateway::MockBackend::from_records(
        {json{{"match", "Explain in one short paragraph"}, {"response", longtext}}});
    const auto truncated = ftdata::generate_rationale(
        *long_backend, labeled_claim("a", "claim text", core::Label::factual), std::nullopt);
    CHECK(truncated.find("[truncated]") != std::string::npos);
    // 150 words plus the marker
    std::size_t words = 0;
    for (std::size_t pos = 0; (pos = truncated.find(' ', pos)) != std::string::npos; ++pos) {
        ++words;
    }
    CHECK(words <= 151);

    // empty reply twice is an error
    auto empty_backend = gateway::MockBackend::from_records(
        {json{{"match", "Explain in one short paragraph"}, {"response", ""}}});
    CHECK_THROWS_AS(ftdata::generate_rationale(
                        *empty_backend, labeled_claim("a", "x", core::Label::factual),
                        std::nullopt),
                    Error);
}

TEST_CASE("qa examples extract answers for factual and correct hallucinated claims") {
    auto backend = builder_mock();
    const auto factual = ftdata::build_qa_example(
        *backend,
        labeled_claim("a", "The Amber Room was constructed in the 18th century.",
                      core::Label::factual),
        "rationale");
    CHECK(factual.task == core::TaskKind::qa);
    CHECK(factual.input == "When was it constructed?");
    CHECK(factual.output.find("18th century") != std::string::npos);

    const auto hallucinated = ftdata::build_qa_example(
        *backend, labeled_claim("b", "It was built in 1950.", core::Label::hallucinated),
        "The registry gives 1701.");
    CHECK(hallucinated.output.find("1701") != std::string::npos);

    // hallucinated claims need the guiding rationale
    CHECK_THROWS_AS(ftdata::build_qa_example(
                        *backend, labeled_claim("b", "x", core::Label::hallucinated), ""),
                    Error);
    CHECK_THROWS_AS(ftdata::build_qa_example(
                        *backend, labeled_claim("u", "x", core::Label::unlabeled), "r"),
                    Error);
}

TEST_CASE("paraphrase examples keep the label over the paraphrased text") {
    auto backend = builder_mock();
    const auto example = ftdata::build_paraphrase_example(
        *backend, labeled_claim("a", "Constructed in the 18th century.", core::Label::factual),
        {});
    CHECK(example.task == core::TaskKind::detect);
    CHECK(example.input == "Construction took place during the eighteenth century.");
    CHECK(example.output == "True");

    // a paraphrase identical to the original is kept after a warning
    auto echo_backend = gateway::MockBackend::from_records(
        {json{{"match", "Paraphrase the claim below"}, {"response", "Same text."}}});
    const auto kept = ftdata::build_paraphrase_example(
        *echo_backend, labeled_claim("a", "Same text.", core::Label::factual), {});
    CHECK(kept.input == "Same text.");
}

TEST_CASE("build_dataset counts follow the closed-form rule") {
    auto backend = builder_mock();
    const auto claims = mixed_claims(6, 4);

    ftdata::BuildOptions defaults;
    const auto full = ftdata::build_dataset(*backend, claims, defaults);
    CHECK(full.size() == 20); // detect + qa per claim

    ftdata::BuildOptions no_aux;
    no_aux.include_aux_qa = false;
    CHECK(ftdata::build_dataset(*backend, claims, no_aux).size() == 10);

    ftdata::BuildOptions half = defaults;
    half.half_data = true;
    // 6 factual -> 3, 4 hallucinated -> 2; 5 claims, two examples each
    CHECK(ftdata::build_dataset(*backend, claims, half).size() == 10);

    ftdata::BuildOptions everything = defaults;
    everything.include_paraphrase = true;
    CHECK(ftdata::build_dataset(*backend, claims, everything).size() == 30);
}

TEST_CASE("count rule property over random option combinations") {
    auto backend = builder_mock();
    core::Rng rng(606);
    for (int round = 0; round < 12; ++round) {
        const auto claims = mixed_claims(1 + static_cast<int>(rng.uniform_below(6)),
                                         1 + static_cast<int>(rng.uniform_below(6)));
        ftdata::BuildOptions options;
        options.include_rationales = rng.uniform_below(2) != 0;
        options.include_aux_qa = rng.uniform_below(2) != 0;
        options.include_paraphrase = rng.uniform_below(2) != 0;
        options.half_data = rng.uniform_below(2) != 0;
        options.seed = static_cast<std::int64_t>(rng.uniform_below(1000));

        const std::size_t used = options.half_data
                                     ? ftdata::stratified_half(claims, options.seed).size()
                                     : claims.size();
        const auto examples = ftdata::build_dataset(*backend, claims, options);
        CHECK(examples.size() == ftdata::expected_example_count(used, options));

        // every detection example starts with True or False
        for (const auto& e : examples) {
            if (e.task != core::TaskKind::detect) continue;
            const bool ok = e.output.rfind("True", 0) == 0 || e.output.rfind("False", 0) == 0;
            CHECK(ok);
        }
    }
}

TEST_CASE("stratified halving is seeded and per-label") {
    const auto claims = mixed_claims(6, 4);
    const auto half_a = ftdata::stratified_half(claims, 3);
    const auto half_b = ftdata::stratified_half(claims, 3);
    const auto half_c = ftdata::stratified_half(claims, 4);
    CHECK(half_a == half_b);
    CHECK(half_a.size() == 5);
    std::size_t factual = 0;
    for (const auto& c : half_a) factual += c.label == core::Label::factual;
    CHECK(factual == 3);
    // another seed usually picks a different subset but the same counts
    CHECK(half_c.size() == 5);
}

TEST_CASE("dataset order is claim-major with detect before qa") {
    auto backend = builder_mock();
    const auto claims = mixed_claims(2, 1);
    const auto examples = ftdata::build_dataset(*backend, claims, {});
    REQUIRE(examples.size() == 6);
    for (std::size_t i = 0; i < claims.size(); ++i) {
        CHECK(examples[2 * i].task == core::TaskKind::detect);
        CHECK(examples[2 * i].source_claim_id == claims[i].id);
        CHECK(examples[2 * i + 1].task == core::TaskKind::qa);
        CHECK(examples[2 * i + 1].source_claim_id == claims[i].id);
    }
}

TEST_CASE("manifest records options, counts, and a content hash") {
    auto backend = builder_mock();
    const auto claims = mixed_claims(3, 3);
    ftdata::BuildOptions options;
    const auto examples = ftdata::build_dataset(*backend, claims, options);
    const auto manifest = ftdata::dataset_manifest(examples, options, claims.size(),
                                                   claims.size());
    CHECK(manifest.at("counts").at("examples").get<std::size_t>() == examples.size());
    CHECK(manifest.at("counts").at("detect").get<std::size_t>() == 6);
    CHECK(manifest.at("counts").at("qa").get<std::size_t>() == 6);
    CHECK(manifest.at("content_hash").get<std::string>().size() == 16);
    CHECK_FALSE(manifest.at("shuffled").get<bool>());

    // deterministic: same inputs, same hash
    const auto again = ftdata::dataset_manifest(ftdata::build_dataset(*backend, claims, options),
                                                options, claims.size(), claims.size());
    CHECK(manifest.at("content_hash") == again.at("content_hash"));

    // unlabeled claims are rejected
    auto bad = claims;
    bad.push_back(labeled_claim("u", "x", core::Label::unlabeled));
    CHECK_THROWS_AS(ftdata::build_dataset(*backend, bad, options), Error);
}

} // TEST_SUITE
