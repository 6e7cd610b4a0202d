#include "halodet/gateway/backend.hpp"

#include <mutex>
#include <sstream>
#include <thread>

#include "halodet/core/error.hpp"

namespace halodet::gateway {

std::vector<GenerationResult> sample_n(Backend& backend, const GenerationRequest& request,
                                       int n, int max_in_flight) {
    if (n < 1) {
        throw invalid_input("sample_n: n must be >= 1");
    }
    if (request.temperature <= 0.0) {
        throw invalid_input("sample_n: temperature must be > 0");
    }
    if (max_in_flight < 1) max_in_flight = 1;

    std::vector<GenerationResult> results(static_cast<std::size_t>(n));
    std::vector<std::string> failures(static_cast<std::size_t>(n));
    std::vector<bool> failed(static_cast<std::size_t>(n), false);

    std::mutex mu;
    int next = 0;

    auto worker = [&]() {
        for (;;) {
            int index;
            {
                std::unique_lock lock(mu);
                if (next >= n) return;
                index = next++;
            }
            GenerationRequest req = request;
            req.sample_index = index;
            try {
                auto result = backend.generate(req);
                std::lock_guard lock(mu);
                results[static_cast<std::size_t>(index)] = std::move(result);
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                failed[static_cast<std::size_t>(index)] = true;
                failures[static_cast<std::size_t>(index)] = e.what();
            }
        }
    };

    const int worker_count = std::min(n, max_in_flight);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(worker_count));
    for (int i = 0; i < worker_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    std::ostringstream failed_list;
    int n_failed = 0;
    for (int i = 0; i < n; ++i) {
        if (failed[static_cast<std::size_t>(i)]) {
            if (n_failed++) failed_list << ", ";
            failed_list << i << " (" << failures[static_cast<std::size_t>(i)] << ")";
        }
    }
    if (n_failed > 0) {
        throw backend_error("sample_n: " + std::to_string(n_failed) + " of " + std::to_string(n) +
                            " requests failed: indices [" + failed_list.str() + "]");
    }
    return results;
}

std::string complete_text(Backend& backend, const std::string& prompt, int max_tokens,
                          int top_logprobs) {
    GenerationRequest req;
    req.messages = {{"user", prompt}};
    req.temperature = 0.0;
    req.max_tokens = max_tokens;
    req.top_logprobs = top_logprobs;
    return backend.generate(req).text;
}

} // namespace halodet::gateway
