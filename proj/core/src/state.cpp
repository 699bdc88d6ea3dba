#include "trajseq/state.hpp"

#include <cctype>

namespace trajseq {

std::optional<State> parse_state(std::string_view text) noexcept {
    if (text.size() != 2) return std::nullopt;
    const char a = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    const char b = static_cast<char>(std::toupper(static_cast<unsigned char>(text[1])));
    for (State s : kAllStates) {
        const auto name = to_string(s);
        if (name[0] == a && name[1] == b) return s;
    }
    return std::nullopt;
}

}  // namespace trajseq
