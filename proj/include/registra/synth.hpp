/**
 * @file synth.hpp
 * @brief Synthetic scenes and targets for tests, demos and the synth command
 */
#pragma once

#include <registra/geometry.hpp>
#include <registra/raster.hpp>

#include <cstdint>
#include <vector>

namespace registra::synth {

/// Filled shape drawn with coverage-weighted blending (4x4 supersampling).
struct Shape {
    enum class Kind { Polygon, Circle };
    Kind kind = Kind::Polygon;
    std::vector<Point2> vertices;   ///< polygon outline in pixel coordinates
    Point2 center;                  ///< circle
    double radius = 0.0;
    float value = 1.0f;
};

[[nodiscard]] Shape rectangle(double x0, double y0, double x1, double y1, float value);
[[nodiscard]] Shape polygon(std::vector<Point2> vertices, float value);
[[nodiscard]] Shape circle(Point2 center, double radius, float value);

/// Renders shapes in order over a constant background, plus optional smooth texture.
struct Scene {
    int width = 0;
    int height = 0;
    float background = 0.0f;
    std::vector<Shape> shapes;
    double texture_amplitude = 0.0;   ///< peak deviation of the smooth texture field
    std::uint64_t texture_seed = 0;
};

[[nodiscard]] Image render(const Scene& scene);

/// Smooth random field in [-1, 1]: bilinearly upsampled coarse noise (cell px) plus finer detail.
[[nodiscard]] std::vector<float> smooth_noise(int width, int height, int cell, std::uint64_t seed);

/// Additive Gaussian noise, clamped to [0, 1]. sigma == 0 returns the input unchanged.
[[nodiscard]] Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed);

/// Random textured image (registration tests).
[[nodiscard]] Image textured_image(int width, int height, std::uint64_t seed);

/// Similarity about a pivot: p -> pivot + shift + s R(theta) (p - pivot).
[[nodiscard]] Transform similarity_about(Point2 pivot, double shift_x, double shift_y, double theta_deg, double scale);

}  // namespace registra::synth
