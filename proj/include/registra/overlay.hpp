/**
 * @file overlay.hpp
 * @brief Non-destructive result display
 *
 * Annotations carry coordinates in their ROI-local frame together with the
 * display transform D (local -> target). Rendering maps them through D and
 * draws onto a separate RGB copy of the target.
 */
#pragma once

#include <registra/geometry.hpp>
#include <registra/raster.hpp>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace registra {

enum class AnnotationStyle { Pass, Fail, Info };

[[nodiscard]] std::string_view to_string(AnnotationStyle style) noexcept;

struct SegmentShape {
    Point2 p0, p1;
};
struct MarkerShape {
    Point2 p;
};
struct PolylineShape {
    std::vector<Point2> points;
};
struct RoiOutlineShape {
    Roi roi;   ///< expressed in the annotation's local frame
};
struct LabelShape {
    std::string text;
    Point2 anchor;
};

using AnnotationShape = std::variant<SegmentShape, MarkerShape, PolylineShape, RoiOutlineShape, LabelShape>;

struct Annotation {
    AnnotationShape shape;
    Transform display;                 ///< D: local -> target
    AnnotationStyle style = AnnotationStyle::Info;
    std::string block;                 ///< emitting block id
};

/// Target-frame counterparts; a ROI outline becomes its four mapped corners.
struct MappedRoiOutline {
    std::array<Point2, 4> corners;
};
using MappedShape = std::variant<SegmentShape, MarkerShape, PolylineShape, MappedRoiOutline, LabelShape>;

[[nodiscard]] MappedShape map_annotation(const Annotation& a);

/**
 * @brief Draw annotations over an RGB copy of the target
 *
 * 1 px Bresenham strokes, markers as 7 px crosses, labels in a 5x7 bitmap
 * font (upper case). The input image is not modified.
 */
[[nodiscard]] RgbImage render(const Image& target, std::span<const Annotation> annotations);

[[nodiscard]] Rgb style_color(AnnotationStyle style) noexcept;

/// Bresenham line from (x0,y0) to (x1,y1), clipped to the canvas.
void draw_line(RgbImage& canvas, int x0, int y0, int x1, int y1, Rgb color);
void draw_text(RgbImage& canvas, int x, int y, std::string_view text, Rgb color);

}  // namespace registra
