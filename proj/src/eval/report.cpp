#include "halodet/eval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "halodet/core/error.hpp"

namespace halodet::eval {

namespace {

double safe_rate(std::int64_t num, std::int64_t den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

} // namespace

core::EvalReport build_report(const std::vector<ScoredClaim>& claims, double alpha_low,
                              double alpha_high, bool dual) {
    core::EvalReport report;
    std::int64_t correct_factual = 0, total_factual = 0;
    std::int64_t correct_hallucinated = 0, total_hallucinated = 0;

    for (const auto& c : claims) {
        const TriClass pred = classify_tri(c.score, alpha_low, alpha_high);
        switch (pred) {
            case TriClass::unknown: ++report.n_unknown; break;
            case TriClass::factual: c.gold_factual ? ++report.tp : ++report.fp; break;
            case TriClass::hallucinated: c.gold_factual ? ++report.fn : ++report.tn; break;
        }
        const bool correct = pred == TriClass::unknown ||
                             (pred == TriClass::factual) == c.gold_factual;
        if (c.gold_factual) {
            ++total_factual;
            correct_factual += correct;
        } else {
            ++total_hallucinated;
            correct_hallucinated += correct;
        }
    }

    report.bacc = 0.5 * (safe_rate(report.tp, report.tp + report.fn) +
                         safe_rate(report.tn, report.tn + report.fp));
    if (dual) {
        report.alpha_low = alpha_low;
        report.alpha_high = alpha_high;
        report.bacc_unknown = 0.5 * (safe_rate(correct_factual, total_factual) +
                                     safe_rate(correct_hallucinated, total_hallucinated));
    } else {
        report.tau = alpha_low;
    }
    return report;
}

void add_length_strata(core::EvalReport& report, const std::vector<ScoredClaim>& claims,
                       double alpha_low, double alpha_high, bool dual, LengthBounds bounds) {
    std::vector<ScoredClaim> low_band, mid_band, high_band, unknown_band;
    for (const auto& c : claims) {
        if (!c.response_length) {
            unknown_band.push_back(c);
        } else if (*c.response_length < bounds.low) {
            low_band.push_back(c);
        } else if (*c.response_length <= bounds.high) {
            mid_band.push_back(c);
        } else {
            high_band.push_back(c);
        }
    }
    const std::string low_key = "lt" + std::to_string(bounds.low);
    const std::string mid_key = std::to_string(bounds.low) + "to" + std::to_string(bounds.high);
    const std::string high_key = "gt" + std::to_string(bounds.high);
    report.strata[low_key] = build_report(low_band, alpha_low, alpha_high, dual);
    report.strata[mid_key] = build_report(mid_band, alpha_low, alpha_high, dual);
    report.strata[high_key] = build_report(high_band, alpha_low, alpha_high, dual);
    if (!unknown_band.empty()) {
        report.strata["unknown_length"] = build_report(unknown_band, alpha_low, alpha_high, dual);
    }
}

core::Histogram score_histogram(const std::vector<ScoredClaim>& claims, int n_bins) {
    if (n_bins < 1) {
        throw invalid_input("score_histogram: n_bins must be >= 1");
    }
    core::Histogram hist;
    hist.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
    for (int i = 0; i <= n_bins; ++i) {
        hist.bin_edges[static_cast<std::size_t>(i)] =
            static_cast<double>(i) / static_cast<double>(n_bins);
    }
    hist.factual_counts.assign(static_cast<std::size_t>(n_bins), 0);
    hist.hallucinated_counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (const auto& c : claims) {
        auto bin = static_cast<std::int64_t>(c.score * n_bins);
        bin = std::clamp<std::int64_t>(bin, 0, n_bins - 1); // last bin right-closed
        auto& counts = c.gold_factual ? hist.factual_counts : hist.hallucinated_counts;
        ++counts[static_cast<std::size_t>(bin)];
    }
    return hist;
}

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        return std::to_string(value);
    }
    return std::string(buf, ptr);
}

namespace {

void append_report_rows(std::ostringstream& out, const std::string& stratum,
                        const core::EvalReport& r) {
    out << "tp," << stratum << ',' << r.tp << '\n';
    out << "fn," << stratum << ',' << r.fn << '\n';
    out << "tn," << stratum << ',' << r.tn << '\n';
    out << "fp," << stratum << ',' << r.fp << '\n';
    out << "n_unknown," << stratum << ',' << r.n_unknown << '\n';
    out << "bacc," << stratum << ',' << format_double(r.bacc) << '\n';
    if (r.bacc_unknown) {
        out << "bacc_unknown," << stratum << ',' << format_double(*r.bacc_unknown) << '\n';
    }
    if (r.tau) out << "tau," << stratum << ',' << format_double(*r.tau) << '\n';
    if (r.alpha_low) out << "alpha_low," << stratum << ',' << format_double(*r.alpha_low) << '\n';
    if (r.alpha_high) {
        out << "alpha_high," << stratum << ',' << format_double(*r.alpha_high) << '\n';
    }
}

} // namespace

std::string report_csv(const core::EvalReport& report) {
    std::ostringstream out;
    out << "metric,stratum,value\n";
    append_report_rows(out, "all", report);
    for (const auto& [key, sub] : report.strata) {
        append_report_rows(out, key, sub);
    }
    return out.str();
}

std::string histogram_csv(const core::Histogram& histogram) {
    std::ostringstream out;
    out << "bin_low,bin_high,factual_count,hallucinated_count\n";
    for (std::size_t i = 0; i + 1 < histogram.bin_edges.size(); ++i) {
        out << format_double(histogram.bin_edges[i]) << ','
            << format_double(histogram.bin_edges[i + 1]) << ',' << histogram.factual_counts[i]
            << ',' << histogram.hallucinated_counts[i] << '\n';
    }
    return out.str();
}

} // namespace halodet::eval
