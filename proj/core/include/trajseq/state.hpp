#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "trajseq/error.hpp"

namespace trajseq {

/// Five-symbol conflict state alphabet. NC is the only non-violent symbol.
///
/// The numeric values are stable: they index every 5x5 matrix in the
/// library and are written to the binary and CSV artifacts.
enum class State : std::uint8_t {
    NC = 0,  ///< no conflict
    CL = 1,  ///< clustered, low intensity
    CH = 2,  ///< clustered, high intensity
    DL = 3,  ///< dispersed, low intensity
    DH = 4,  ///< dispersed, high intensity
};

inline constexpr std::size_t kNumStates = 5;

inline constexpr std::array<State, kNumStates> kAllStates{
    State::NC, State::CL, State::CH, State::DL, State::DH};

inline constexpr std::array<State, 4> kViolentStates{
    State::CL, State::CH, State::DL, State::DH};

constexpr std::size_t index(State s) noexcept { return static_cast<std::size_t>(s); }

constexpr bool is_violent(State s) noexcept { return s != State::NC; }

constexpr State state_from_index(std::size_t i) {
    if (i >= kNumStates) throw Error("state index out of range: " + std::to_string(i));
    return static_cast<State>(i);
}

constexpr std::string_view to_string(State s) noexcept {
    switch (s) {
        case State::NC: return "NC";
        case State::CL: return "CL";
        case State::CH: return "CH";
        case State::DL: return "DL";
        case State::DH: return "DH";
    }
    return "??";
}

/// Parses "NC", "CL", ... (case-insensitive). Returns nullopt otherwise.
std::optional<State> parse_state(std::string_view text) noexcept;

template <typename T>
using StateMatrix = std::array<std::array<T, kNumStates>, kNumStates>;

template <typename T>
using StateVector = std::array<T, kNumStates>;

}  // namespace trajseq
