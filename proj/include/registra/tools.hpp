/**
 * @file tools.hpp
 * @brief Measurement tools evaluated in source-frame ROIs mapped onto the target
 *
 * A tool never resamples the target: it evaluates the target at the points
 * T * roi_to_parent(roi) * local for a local grid, using bilinear point
 * samples. Every geometric output is expressed in source-frame pixels, so
 * tolerances drawn on the reference image apply unchanged.
 */
#pragma once

#include <registra/geometry.hpp>
#include <registra/raster.hpp>

#include <string>
#include <vector>

namespace registra {

/// Engine-provided context for every tool block.
struct ToolContext {
    Transform transform;      ///< T: source -> target
    Image target;             ///< shares the caller's buffer
    double scale_hint = 1.0;  ///< decompose(T).scale

    ToolContext() = default;
    ToolContext(const Transform& t, const Image& image)
        : transform(t), target(image), scale_hint(decompose(t).scale) {}
};

enum class Polarity { DarkToLight, LightToDark, Any };
enum class Smoothing { None, Binomial3 };

struct EdgeParams {
    Polarity polarity = Polarity::Any;
    double min_contrast = 0.1;   ///< minimum |gradient| per pixel
    int num_scanlines = 16;
    Smoothing smoothing = Smoothing::Binomial3;

    friend bool operator==(const EdgeParams&, const EdgeParams&) = default;
};

void validate(const EdgeParams& params);

struct LineModel {
    Point2 point;          ///< centroid of the edge points (source frame)
    Point2 dir;            ///< unit direction, oriented along the ROI's local +y
    int support = 0;
    double rms_residual = 0.0;
};

/// Line plus the accepted edge points in ROI-local coordinates (for overlays).
struct LineExtraction {
    LineModel line;
    std::vector<Point2> local_edges;
};

enum class MeasurementKind { AngleDeg, DistancePx, IntensityMean, BlobCount, BlobAreaPx2, Score };

[[nodiscard]] std::string_view to_string(MeasurementKind kind) noexcept;

struct Measurement {
    std::string name;
    MeasurementKind kind = MeasurementKind::Score;
    double value = 0.0;
};

struct IntensityStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    int samples = 0;
};

struct Blob {
    double area = 0.0;     ///< source-frame px^2
    Point2 centroid;       ///< source frame
    Point2 local_centroid; ///< ROI-local frame
    Roi bbox;              ///< axis-aligned bounding box in the target (informational)
    bool touches_border = false;
};

enum class BlobPolarity { Bright, Dark };

struct BlobParams {
    double threshold = 0.5;
    BlobPolarity polarity = BlobPolarity::Bright;
    bool exclude_border = false;

    friend bool operator==(const BlobParams&, const BlobParams&) = default;
};

void validate(const BlobParams& params);

/// Error(RoiOutsideTarget) unless every mapped corner of roi lies inside the target.
void check_roi_inside(const ToolContext& ctx, const Roi& roi);

/**
 * @brief Caliper line extraction
 *
 * Scanlines are spaced evenly along the ROI's local y-axis; each profile runs
 * along local x at 1 px pitch. Per profile: optional [1,2,1]/4 smoothing,
 * central-difference gradient, strongest extremum of the requested polarity
 * with |g| >= min_contrast, parabola subpixel refinement. Edge points go back
 * to the source frame through T^-1 and a total-least-squares line is fitted.
 *
 * Errors: RoiOutsideTarget, InsufficientEdgePoints, DegenerateFit.
 */
[[nodiscard]] LineExtraction extract_line(const ToolContext& ctx, const Roi& roi, const EdgeParams& params);

enum class AngleMode { Undirected, Directed };

/// Undirected: [0, 90]; directed: angle from a to b in [0, 180).
[[nodiscard]] double angle_between(const LineModel& a, const LineModel& b, AngleMode mode = AngleMode::Undirected);
[[nodiscard]] Measurement measure_angle(std::string name, const LineModel& a, const LineModel& b,
                                        AngleMode mode = AngleMode::Undirected);

[[nodiscard]] double point_line_distance(Point2 p, const LineModel& line) noexcept;
[[nodiscard]] Measurement measure_distance(std::string name, Point2 a, Point2 b);
[[nodiscard]] Measurement measure_distance(std::string name, const LineModel& a, Point2 b);

/// Samples on the local integer grid (0..floor(w)-1) x (0..floor(h)-1). Error: RoiOutsideTarget.
[[nodiscard]] IntensityStats measure_intensity(const ToolContext& ctx, const Roi& roi);

/**
 * @brief Threshold + 8-connected labeling on the ROI's local sample grid
 *
 * Area is that of the thresholded region between samples, with threshold
 * crossings interpolated linearly along grid edges (marching squares).
 * Sorted by descending area, then centroid y, then x. Error: RoiOutsideTarget.
 */
[[nodiscard]] std::vector<Blob> extract_blobs(const ToolContext& ctx, const Roi& roi, const BlobParams& params);

/// Two-pass union-find labeling with 8-connectivity; labels 1..n in raster order of first pixel, 0 = background.
[[nodiscard]] std::vector<int> label_components(const std::vector<std::uint8_t>& mask, int width, int height,
                                                int& count);

}  // namespace registra
