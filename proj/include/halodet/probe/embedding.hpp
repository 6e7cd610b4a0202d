#pragma once

#include <string>
#include <vector>

#include "halodet/gateway/types.hpp"

namespace halodet::probe {

// The four contextualized-embedding constructions probed for classification.
enum class EmbeddingType {
    type1, // final token, last layer
    type2, // mean of all tokens, last layer
    type3, // mean of the final token across layers
    type4, // elementwise mean of type1 and type2
};

std::string to_string(EmbeddingType type);
EmbeddingType embedding_type_from_string(const std::string& s);
std::vector<EmbeddingType> all_embedding_types();

// type3 skips the embedding (pre-transformer) layer, assumed to be layer 0,
// unless include_embedding_layer is set or there is only one layer.
std::vector<double> build_embedding(const gateway::HiddenStates& h, EmbeddingType type,
                                    bool include_embedding_layer = false);

} // namespace halodet::probe
