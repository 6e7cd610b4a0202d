#include "halodet/probe/embedding.hpp"

#include "halodet/core/error.hpp"
#include "halodet/kernels/kernels.hpp"

namespace halodet::probe {

std::string to_string(EmbeddingType type) {
    switch (type) {
        case EmbeddingType::type1: return "type1";
        case EmbeddingType::type2: return "type2";
        case EmbeddingType::type3: return "type3";
        case EmbeddingType::type4: return "type4";
    }
    throw Error(ErrorKind::internal, "unhandled embedding type");
}

EmbeddingType embedding_type_from_string(const std::string& s) {
    if (s == "type1") return EmbeddingType::type1;
    if (s == "type2") return EmbeddingType::type2;
    if (s == "type3") return EmbeddingType::type3;
    if (s == "type4") return EmbeddingType::type4;
    throw invalid_input("unknown embedding type '" + s + "' (expected type1..type4)");
}

std::vector<EmbeddingType> all_embedding_types() {
    return {EmbeddingType::type1, EmbeddingType::type2, EmbeddingType::type3,
            EmbeddingType::type4};
}

namespace {

std::vector<double> final_token_last_layer(const gateway::HiddenStates& h) {
    const auto row = h.at(h.layer_count - 1, h.token_count - 1);
    return {row.begin(), row.end()};
}

std::vector<double> mean_tokens_last_layer(const gateway::HiddenStates& h) {
    std::vector<double> acc(h.hidden_size, 0.0);
    for (std::size_t t = 0; t < h.token_count; ++t) {
        kernels::add(acc, h.at(h.layer_count - 1, t));
    }
    kernels::scale(acc, 1.0 / static_cast<double>(h.token_count));
    return acc;
}

std::vector<double> mean_final_token_layers(const gateway::HiddenStates& h,
                                            bool include_embedding_layer) {
    const std::size_t first = (include_embedding_layer || h.layer_count == 1) ? 0 : 1;
    std::vector<double> acc(h.hidden_size, 0.0);
    for (std::size_t l = first; l < h.layer_count; ++l) {
        kernels::add(acc, h.at(l, h.token_count - 1));
    }
    kernels::scale(acc, 1.0 / static_cast<double>(h.layer_count - first));
    return acc;
}

} // namespace

std::vector<double> build_embedding(const gateway::HiddenStates& h, EmbeddingType type,
                                    bool include_embedding_layer) {
    if (h.layer_count == 0 || h.token_count == 0 || h.hidden_size == 0) {
        throw invalid_input("build_embedding: hidden states are empty");
    }
    switch (type) {
        case EmbeddingType::type1:
            return final_token_last_layer(h);
        case EmbeddingType::type2:
            return mean_tokens_last_layer(h);
        case EmbeddingType::type3:
            return mean_final_token_layers(h, include_embedding_layer);
        case EmbeddingType::type4: {
            std::vector<double> combined = final_token_last_layer(h);
            kernels::add(combined, mean_tokens_last_layer(h));
            kernels::scale(combined, 0.5);
            return combined;
        }
    }
    throw Error(ErrorKind::internal, "unhandled embedding type");
}

} // namespace halodet::probe
