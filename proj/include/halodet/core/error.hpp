#pragma once

#include <stdexcept>
#include <string>

namespace halodet {

// Error taxonomy shared across the toolkit. The CLI maps kinds to exit codes:
// input/parse -> 2, backend/capability -> 3, infeasible constraint -> 4.
enum class ErrorKind {
    invalid_input,
    parse,
    backend,
    capability,
    detector,
    estimator_unavailable,
    infeasible_constraint,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error invalid_input(std::string msg) { return {ErrorKind::invalid_input, std::move(msg)}; }
inline Error parse_error(std::string msg) { return {ErrorKind::parse, std::move(msg)}; }
inline Error backend_error(std::string msg) { return {ErrorKind::backend, std::move(msg)}; }
inline Error capability_error(std::string msg) { return {ErrorKind::capability, std::move(msg)}; }
inline Error detector_error(std::string msg) { return {ErrorKind::detector, std::move(msg)}; }

} // namespace halodet
