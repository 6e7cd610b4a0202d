#include "halodet/prompts.hpp"

namespace halodet::prompts {

std::string render(std::string_view template_text,
                   std::initializer_list<std::pair<std::string_view, std::string_view>> values) {
    std::string out(template_text);
    for (const auto& [name, value] : values) {
        const std::string placeholder = "{" + std::string(name) + "}";
        std::size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return out;
}

} // namespace halodet::prompts
