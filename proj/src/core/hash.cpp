#include "halodet/core/hash.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "halodet/core/error.hpp"

namespace halodet::core {

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw invalid_input("cannot open '" + path + "' for hashing");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a64(buf.str());
}

} // namespace halodet::core
