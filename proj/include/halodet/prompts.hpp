#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

// Default prompt templates. All of them are configuration with overrides in
// the run config; placeholders use {name} syntax.
namespace halodet::prompts {

// Renders {name} placeholders; unknown placeholders are left untouched.
std::string render(std::string_view template_text,
                   std::initializer_list<std::pair<std::string_view, std::string_view>> values);

inline constexpr std::string_view kDecomposeTemplate =
    "Break the response below into a list of short, self-contained factual claims. "
    "Write one claim per line, with no numbering and no extra commentary.\n\n"
    "Question: {prompt}\n\nResponse: {response}\n\nClaims:";

inline constexpr std::string_view kRelevanceTemplate =
    "Question: {prompt}\nClaim: {claim}\n\n"
    "Is the claim relevant to answering the question? Answer yes or no.";

inline constexpr std::string_view kExtractionTemplate =
    "Response: {response}\n\nClaim: {claim}\n\n"
    "Quote the exact passage of the response that expresses this claim. "
    "Reply with the passage only.";

inline constexpr std::string_view kEntityTemplate =
    "Claim: {claim}\n\n"
    "List the entities mentioned in the claim (names, places, organizations, dates, "
    "numbers), one per line. Reply with the entities only.";

// The detection instruction is shared between the true/false detector prompt
// and fine-tune detection examples so both present the task identically.
inline constexpr std::string_view kDetectInstruction =
    "Decide whether the claim below is true or false. "
    "Answer with exactly one word: True or False.";

inline constexpr std::string_view kPromptTfTemplate =
    "Decide whether the claim below is true or false. "
    "Answer with exactly one word: True or False.\n\nClaim: {claim}";

inline constexpr std::string_view kPromptProbTemplate =
    "How likely is the claim below to be correct? "
    "Answer with a single probability between 0 and 1.\n\nClaim: {claim}";

inline constexpr std::string_view kPromptCotTfTemplate =
    "Decide whether the claim below is true or false. Reason step by step about the "
    "claim first, then end your answer with a single word verdict: True or False.\n\n"
    "Claim: {claim}";

inline constexpr std::string_view kSupportTemplate =
    "Context: {response}\n\nClaim: {claim}\n\n"
    "Does the context support the claim? Answer yes or no.";

inline constexpr std::string_view kRationaleTemplate =
    "Claim: {claim}\n{evidence_block}"
    "Explain in one short paragraph why the claim is {verdict}.";

inline constexpr std::string_view kQuestionTemplate =
    "Claim: {claim}\n\n"
    "Write one question about the key information in the claim. Reply with the "
    "question only.";

inline constexpr std::string_view kFactualAnswerTemplate =
    "Claim: {claim}\nQuestion: {question}\n\n"
    "Answer the question using only the claim, quoting the answer from the claim, "
    "and add a brief explanation.";

inline constexpr std::string_view kCorrectedAnswerTemplate =
    "The claim below is inaccurate. Use the explanation to answer the question "
    "correctly, with a brief justification.\n\n"
    "Claim: {claim}\nExplanation: {rationale}\nQuestion: {question}";

inline constexpr std::string_view kParaphraseTemplate =
    "Paraphrase the claim below, keeping its exact meaning. Reply with the "
    "paraphrase only.\n\nClaim: {claim}";

inline constexpr std::string_view kQaInstruction =
    "Answer the question accurately and explain your answer briefly.";

} // namespace halodet::prompts
