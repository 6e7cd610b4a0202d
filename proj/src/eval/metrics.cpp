#include "halodet/eval/metrics.hpp"

#include "halodet/core/error.hpp"

namespace halodet::eval {

TriClass classify(double p, double tau) {
    return p > tau ? TriClass::factual : TriClass::hallucinated;
}

TriClass classify_tri(double p, double alpha_low, double alpha_high) {
    if (alpha_low > alpha_high) {
        throw invalid_input("classify_tri: alpha_low must be <= alpha_high");
    }
    if (p > alpha_high) return TriClass::factual;
    if (p < alpha_low) return TriClass::hallucinated;
    return TriClass::unknown;
}

ConfusionCounts count_confusion(const std::vector<TriClass>& predictions,
                                const std::vector<bool>& gold_factual) {
    if (predictions.size() != gold_factual.size()) {
        throw invalid_input("predictions and labels differ in length");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        switch (predictions[i]) {
            case TriClass::unknown:
                ++c.n_unknown;
                break;
            case TriClass::factual:
                gold_factual[i] ? ++c.tp : ++c.fp;
                break;
            case TriClass::hallucinated:
                gold_factual[i] ? ++c.fn : ++c.tn;
                break;
        }
    }
    return c;
}

namespace {

void require_both_classes(const std::vector<bool>& gold_factual) {
    bool any_factual = false;
    bool any_hallucinated = false;
    for (bool g : gold_factual) {
        (g ? any_factual : any_hallucinated) = true;
    }
    if (!any_factual || !any_hallucinated) {
        throw invalid_input("balanced accuracy is undefined: labels contain a single class");
    }
}

} // namespace

double bacc(const std::vector<TriClass>& predictions, const std::vector<bool>& gold_factual) {
    require_both_classes(gold_factual);
    const auto c = count_confusion(predictions, gold_factual);
    if (c.n_unknown != 0) {
        throw invalid_input("bacc expects binary predictions; use bacc_unknown for tri-way");
    }
    const double tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    const double tnr = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    return 0.5 * (tpr + tnr);
}

double bacc_unknown(const std::vector<TriClass>& predictions,
                    const std::vector<bool>& gold_factual) {
    require_both_classes(gold_factual);
    if (predictions.size() != gold_factual.size()) {
        throw invalid_input("predictions and labels differ in length");
    }
    std::int64_t correct_factual = 0, total_factual = 0;
    std::int64_t correct_hallucinated = 0, total_hallucinated = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool correct = predictions[i] == TriClass::unknown ||
                             (predictions[i] == TriClass::factual) == gold_factual[i];
        if (gold_factual[i]) {
            ++total_factual;
            correct_factual += correct;
        } else {
            ++total_hallucinated;
            correct_hallucinated += correct;
        }
    }
    return 0.5 * (static_cast<double>(correct_factual) / static_cast<double>(total_factual) +
                  static_cast<double>(correct_hallucinated) /
                      static_cast<double>(total_hallucinated));
}

} // namespace halodet::eval
