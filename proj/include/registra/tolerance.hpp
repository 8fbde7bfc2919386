/**
 * @file tolerance.hpp
 * @brief Inclusive tolerance bands and verdict values
 */
#pragma once

#include <string>
#include <string_view>

namespace registra {

struct Tolerance {
    std::string measurement;
    double min = 0.0;
    double max = 0.0;

    friend bool operator==(const Tolerance&, const Tolerance&) = default;
};

/// min <= value <= max; NaN is never in band.
[[nodiscard]] inline bool in_band(double value, const Tolerance& t) noexcept {
    return value >= t.min && value <= t.max;
}

enum class Verdict { Pass, Fail, RejectNoRegistration, IoError };

[[nodiscard]] std::string_view to_string(Verdict v) noexcept;

}  // namespace registra
