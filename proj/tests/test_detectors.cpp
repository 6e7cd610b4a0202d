#include <doctest.h>

#include <cmath>

#include "halodet/core/error.hpp"
#include "halodet/detectors/detectors.hpp"
#include "halodet/gateway/mock.hpp"

using namespace halodet;
using nlohmann::json;

namespace {

core::Claim make_claim(const std::string& text) {
    core::Claim claim;
    claim.id = "c1";
    claim.prompt_id = "p1";
    claim.text = text;
    return claim;
}

// One-token record whose top candidates put p on "True" and q on "False".
json tf_record(const std::string& match, double p_true, double p_false) {
    return json{{"match", match},
                {"response", p_true >= p_false ? "True" : "False"},
                {"tokens",
                 json::array({json{
                     {"text", p_true >= p_false ? "True" : "False"},
                     {"logprob", std::log(std::max(p_true, p_false))},
                     {"top", json::array({json::array({"True", std::log(p_true)}),
                                          json::array({" false", std::log(p_false)})})}}})}};
}

} // namespace

TEST_SUITE("detectors") {

TEST_CASE("prompt_tf normalizes the label-token probabilities by default") {
    auto backend = gateway::MockBackend::from_records({tf_record("exactly one word", 0.6, 0.2)});
    const auto claim = make_claim("The sky is blue.");

    auto config = detectors::default_tf_config();
    const auto normalized = detectors::prompt_tf(*backend, config, claim);
    CHECK(normalized.p_factual == doctest::Approx(0.75).epsilon(1e-12)); // 0.6 / 0.8
    CHECK(normalized.claim_id == "c1");
    CHECK(normalized.detector_id == "prompt_tf");

    config.normalize_label_probs = false;
    const auto raw = detectors::prompt_tf(*backend, config, claim);
    CHECK(raw.p_factual == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("prompt_tf merges case and leading-space label variants") {
    // "True" and " true" both count toward P(True)
    json record{{"match", "exactly one word"},
                {"response", "True"},
                {"tokens",
                 json::array({json{
                     {"text", "True"},
                     {"logprob", std::log(0.4)},
                     {"top", json::array({json::array({"True", std::log(0.4)}),
                                          json::array({" true", std::log(0.2)}),
                                          json::array({"False", std::log(0.3)})})}}})}};
    auto backend = gateway::MockBackend::from_records({record});
    const auto score =
        detectors::prompt_tf(*backend, detectors::default_tf_config(), make_claim("x"));
    CHECK(score.p_factual == doctest::Approx(0.6 / 0.9).epsilon(1e-12));
}

TEST_CASE("prompt_tf without label candidates is a detector error with a dump") {
    json record{{"match", "exactly one word"},
                {"response", "Perhaps"},
                {"tokens",
                 json::array({json{{"text", "Perhaps"},
                                   {"logprob", std::log(0.9)},
                                   {"top", json::array({json::array({"Perhaps",
                                                                     std::log(0.9)})})}}})}};
    auto backend = gateway::MockBackend::from_records({record});
    try {
        detectors::prompt_tf(*backend, detectors::default_tf_config(), make_claim("x"));
        FAIL("expected detector error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::detector);
        CHECK(std::string(e.what()).find("Perhaps") != std::string::npos);
    }
}

TEST_CASE("prompt_tf invariance under uniform rescaling of both label probabilities") {
    auto scaled = [&](double factor) {
        auto backend = gateway::MockBackend::from_records(
            {tf_record("exactly one word", 0.5 * factor, 0.3 * factor)});
        return detectors::prompt_tf(*backend, detectors::default_tf_config(), make_claim("x"))
            .p_factual;
    };
    CHECK(scaled(1.0) == doctest::Approx(scaled(0.5)).epsilon(1e-12));
    CHECK(scaled(1.0) == doctest::Approx(scaled(0.25)).epsilon(1e-12));
}

TEST_CASE("prompt_prob parses plain numbers, percentages, and rejects prose") {
    CHECK(detectors::parse_probability_reply("0.9") == doctest::Approx(0.9));
    CHECK(detectors::parse_probability_reply("The probability is 85%.") ==
          doctest::Approx(0.85));
    CHECK(detectors::parse_probability_reply("maybe .7 at most") == doctest::Approx(0.7));
    CHECK(detectors::parse_probability_reply("5 out of ten") == doctest::Approx(1.0)); // clamped
    CHECK_THROWS_AS(detectors::parse_probability_reply("quite likely"), Error);

    auto backend = gateway::MockBackend::from_records(
        {json{{"match", "probability"}, {"response", "0.35"}}});
    const auto score =
        detectors::prompt_prob(*backend, detectors::default_prob_config(), make_claim("x"));
    CHECK(score.p_factual == doctest::Approx(0.35));
}

TEST_CASE("prompt_cot_tf takes the last standalone verdict and keeps the rationale") {
    CHECK(detectors::parse_last_verdict("It is true that dates conflict. False") == false);
    CHECK(detectors::parse_last_verdict("Verdict: True") == true);
    CHECK(detectors::parse_last_verdict("TRUE") == true);
    CHECK_THROWS_AS(detectors::parse_last_verdict("no verdict whatsoever"), Error);
    // substrings of larger words do not count
    CHECK_THROWS_AS(detectors::parse_last_verdict("untrue falsehoods abound"), Error);

    auto backend = gateway::MockBackend::from_records(
        {json{{"match", "Reason step by step"},
              {"response", "The claimed date conflicts with the record. False"}}});
    const auto score = detectors::prompt_cot_tf(*backend, detectors::default_cot_tf_config(),
                                                make_claim("x"));
    CHECK(score.p_factual == 0.0);
    REQUIRE(score.rationale.has_value());
    CHECK(score.rationale->find("conflicts") != std::string::npos);
}

TEST_CASE("selfcheck takes the supporting fraction over sampled responses") {
    // 20 samples; claim text appears in the judgment prompt, SUPPORT markers
    // drive the yes records: 15 supporting, 5 not.
    std::vector<json> records;
    json samples = json::array();
    for (int i = 0; i < 20; ++i) {
        samples.push_back("sample " + std::to_string(i) + (i < 15 ? " HIT" : " MISS"));
    }
    records.push_back(json{{"match", "source prompt"}, {"samples", samples}});
    records.push_back(json{{"match_all", json::array({"Does the context support", "HIT"})},
                           {"response", "yes"}});
    records.push_back(json{{"match", "Does the context support"}, {"response", "no"}});
    auto backend = gateway::MockBackend::from_records(records);

    auto config = detectors::default_selfcheck_config();
    const auto score = detectors::selfcheck(*backend, config, make_claim("x"), "source prompt");
    CHECK(score.p_factual == doctest::Approx(0.75).epsilon(1e-12)); // 15/20

    config.n_samples = 1;
    const auto one = detectors::selfcheck(*backend, config, make_claim("x"), "source prompt");
    CHECK(one.p_factual == 1.0); // sample 0 supports
}

TEST_CASE("selfcheck of zero supporting samples is zero") {
    std::vector<json> records;
    records.push_back(json{{"match", "source prompt"},
                           {"samples", json::array({"a", "b", "c", "d"})}});
    records.push_back(json{{"match", "Does the context support"}, {"response", "no"}});
    auto backend = gateway::MockBackend::from_records(records);
    auto config = detectors::default_selfcheck_config();
    config.n_samples = 4;
    const auto score = detectors::selfcheck(*backend, config, make_claim("x"), "source prompt");
    CHECK(score.p_factual == 0.0);
}

TEST_CASE("selfcheck propagates partial sampling failures") {
    std::vector<json> records{json{{"match", "source prompt"},
                                   {"samples", json::array({"a"})},
                                   {"fail_indices", json::array({2})},
                                   {"fail", "down"}}};
    auto backend = gateway::MockBackend::from_records(records);
    auto config = detectors::default_selfcheck_config();
    config.n_samples = 5;
    CHECK_THROWS_AS(detectors::selfcheck(*backend, config, make_claim("x"), "source prompt"),
                    Error);
}

TEST_CASE("finetuned_detect reads the first token against the fine-tuned backend") {
    auto baseline = gateway::MockBackend::from_records({tf_record("exactly one word", 0.6, 0.38)});
    auto finetuned = gateway::MockBackend::from_records({tf_record("exactly one word", 0.97, 0.02)});

    const auto claim = make_claim("The sky is blue.");
    auto config = detectors::default_finetuned_config();
    config.normalize_label_probs = false;
    const auto ft_score = detectors::finetuned_detect(*finetuned, config, claim);
    CHECK(ft_score.p_factual == doctest::Approx(0.97).epsilon(1e-12));
    CHECK(ft_score.detector_id == "finetuned");

    config.normalize_label_probs = true;
    const auto ft_norm = detectors::finetuned_detect(*finetuned, config, claim);
    CHECK(ft_norm.p_factual == doctest::Approx(0.97 / 0.99).epsilon(1e-12));

    // same claim, two backends, distinct detector ids
    const auto base_score =
        detectors::prompt_tf(*baseline, detectors::default_tf_config(), claim);
    CHECK(base_score.detector_id != ft_score.detector_id);
    CHECK(base_score.claim_id == ft_score.claim_id);
}

TEST_CASE("every detector emits p_factual inside the unit interval") {
    std::vector<json> records{
        tf_record("exactly one word", 0.5, 0.5),
        json{{"match", "probability"}, {"response", "120%"}},
        json{{"match", "Reason step by step"}, {"response", "True"}},
        json{{"match", "source"}, {"samples", json::array({"s"})}},
        json{{"match", "Does the context support"}, {"response", "yes"}},
    };
    auto backend = gateway::MockBackend::from_records(records);
    const auto claim = make_claim("x");

    auto check01 = [](const core::DetectorScore& s) {
        CHECK(s.p_factual >= 0.0);
        CHECK(s.p_factual <= 1.0);
    };
    check01(detectors::prompt_tf(*backend, detectors::default_tf_config(), claim));
    check01(detectors::prompt_prob(*backend, detectors::default_prob_config(), claim));
    check01(detectors::prompt_cot_tf(*backend, detectors::default_cot_tf_config(), claim));
    auto sc = detectors::default_selfcheck_config();
    sc.n_samples = 1;
    check01(detectors::selfcheck(*backend, sc, claim, "source"));
}

} // TEST_SUITE
