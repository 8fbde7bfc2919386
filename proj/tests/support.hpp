#pragma once

#include <registra/geometry.hpp>
#include <registra/raster.hpp>
#include <registra/synth.hpp>

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace testing {

inline registra::Transform random_similarity(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> t(-500.0, 500.0), r(-180.0, 180.0), s(0.05, 20.0);
    return registra::from_similarity(t(rng), t(rng), r(rng), s(rng));
}

inline registra::Point2 random_point(std::mt19937_64& rng, double range = 1000.0) {
    std::uniform_real_distribution<double> u(-range, range);
    return {u(rng), u(rng)};
}

inline double max_abs_diff(const registra::Transform& a, const registra::Transform& b) {
    double m = 0.0;
    for (int k = 0; k < 16; ++k) m = std::max(m, std::abs(a.matrix()[k] - b.matrix()[k]));
    return m;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("registra_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
