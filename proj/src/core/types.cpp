#include "halodet/core/types.hpp"

#include "halodet/core/error.hpp"

namespace halodet::core {

std::string to_string(Label label) {
    switch (label) {
        case Label::factual: return "factual";
        case Label::hallucinated: return "hallucinated";
        case Label::unlabeled: return "unlabeled";
    }
    throw Error(ErrorKind::internal, "unhandled label");
}

Label label_from_string(const std::string& s) {
    if (s == "factual") return Label::factual;
    if (s == "hallucinated") return Label::hallucinated;
    if (s == "unlabeled") return Label::unlabeled;
    throw parse_error("unknown label '" + s + "' (expected factual|hallucinated|unlabeled)");
}

std::string to_string(TaskKind task) {
    return task == TaskKind::detect ? "detect" : "qa";
}

TaskKind task_from_string(const std::string& s) {
    if (s == "detect") return TaskKind::detect;
    if (s == "qa") return TaskKind::qa;
    throw parse_error("unknown task '" + s + "' (expected detect|qa)");
}

} // namespace halodet::core
