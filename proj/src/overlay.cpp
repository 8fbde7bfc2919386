#include <registra/overlay.hpp>

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <type_traits>

namespace registra {

namespace {

// Glyphs 0x20..0x5F, five columns each, bit 0 = top row.
constexpr std::uint8_t kFont[64][5] = {
    {0x00, 0x00, 0x00, 0x00, 0x00}, {0x00, 0x00, 0x5F, 0x00, 0x00}, {0x00, 0x07, 0x00, 0x07, 0x00},
    {0x14, 0x7F, 0x14, 0x7F, 0x14}, {0x24, 0x2A, 0x7F, 0x2A, 0x12}, {0x23, 0x13, 0x08, 0x64, 0x62},
    {0x36, 0x49, 0x56, 0x20, 0x50}, {0x00, 0x08, 0x07, 0x03, 0x00}, {0x00, 0x1C, 0x22, 0x41, 0x00},
    {0x00, 0x41, 0x22, 0x1C, 0x00}, {0x2A, 0x1C, 0x7F, 0x1C, 0x2A}, {0x08, 0x08, 0x3E, 0x08, 0x08},
    {0x00, 0x80, 0x70, 0x30, 0x00}, {0x08, 0x08, 0x08, 0x08, 0x08}, {0x00, 0x00, 0x60, 0x60, 0x00},
    {0x20, 0x10, 0x08, 0x04, 0x02}, {0x3E, 0x51, 0x49, 0x45, 0x3E}, {0x00, 0x42, 0x7F, 0x40, 0x00},
    {0x72, 0x49, 0x49, 0x49, 0x46}, {0x21, 0x41, 0x49, 0x4D, 0x33}, {0x18, 0x14, 0x12, 0x7F, 0x10},
    {0x27, 0x45, 0x45, 0x45, 0x39}, {0x3C, 0x4A, 0x49, 0x49, 0x31}, {0x41, 0x21, 0x11, 0x09, 0x07},
    {0x36, 0x49, 0x49, 0x49, 0x36}, {0x46, 0x49, 0x49, 0x29, 0x1E}, {0x00, 0x00, 0x14, 0x00, 0x00},
    {0x00, 0x40, 0x34, 0x00, 0x00}, {0x00, 0x08, 0x14, 0x22, 0x41}, {0x14, 0x14, 0x14, 0x14, 0x14},
    {0x00, 0x41, 0x22, 0x14, 0x08}, {0x02, 0x01, 0x59, 0x09, 0x06}, {0x3E, 0x41, 0x5D, 0x59, 0x4E},
    {0x7C, 0x12, 0x11, 0x12, 0x7C}, {0x7F, 0x49, 0x49, 0x49, 0x36}, {0x3E, 0x41, 0x41, 0x41, 0x22},
    {0x7F, 0x41, 0x41, 0x41, 0x3E}, {0x7F, 0x49, 0x49, 0x49, 0x41}, {0x7F, 0x09, 0x09, 0x09, 0x01},
    {0x3E, 0x41, 0x41, 0x51, 0x73}, {0x7F, 0x08, 0x08, 0x08, 0x7F}, {0x00, 0x41, 0x7F, 0x41, 0x00},
    {0x20, 0x40, 0x41, 0x3F, 0x01}, {0x7F, 0x08, 0x14, 0x22, 0x41}, {0x7F, 0x40, 0x40, 0x40, 0x40},
    {0x7F, 0x02, 0x1C, 0x02, 0x7F}, {0x7F, 0x04, 0x08, 0x10, 0x7F}, {0x3E, 0x41, 0x41, 0x41, 0x3E},
    {0x7F, 0x09, 0x09, 0x09, 0x06}, {0x3E, 0x41, 0x51, 0x21, 0x5E}, {0x7F, 0x09, 0x19, 0x29, 0x46},
    {0x26, 0x49, 0x49, 0x49, 0x32}, {0x03, 0x01, 0x7F, 0x01, 0x03}, {0x3F, 0x40, 0x40, 0x40, 0x3F},
    {0x1F, 0x20, 0x40, 0x20, 0x1F}, {0x3F, 0x40, 0x38, 0x40, 0x3F}, {0x63, 0x14, 0x08, 0x14, 0x63},
    {0x03, 0x04, 0x78, 0x04, 0x03}, {0x61, 0x59, 0x49, 0x4D, 0x43}, {0x00, 0x7F, 0x41, 0x41, 0x41},
    {0x02, 0x04, 0x08, 0x10, 0x20}, {0x00, 0x41, 0x41, 0x41, 0x7F}, {0x04, 0x02, 0x01, 0x02, 0x04},
    {0x40, 0x40, 0x40, 0x40, 0x40},
};

int to_pixel(double v) { return static_cast<int>(std::lround(v)); }

void draw_segment(RgbImage& canvas, Point2 a, Point2 b, Rgb c) {
    draw_line(canvas, to_pixel(a.x), to_pixel(a.y), to_pixel(b.x), to_pixel(b.y), c);
}

}  // namespace

std::string_view to_string(AnnotationStyle style) noexcept {
    switch (style) {
        case AnnotationStyle::Pass: return "pass";
        case AnnotationStyle::Fail: return "fail";
        case AnnotationStyle::Info: return "info";
    }
    return "info";
}

Rgb style_color(AnnotationStyle style) noexcept {
    switch (style) {
        case AnnotationStyle::Pass: return {0, 200, 0};
        case AnnotationStyle::Fail: return {230, 0, 0};
        case AnnotationStyle::Info: return {230, 200, 0};
    }
    return {230, 200, 0};
}

MappedShape map_annotation(const Annotation& a) {
    const Transform& d = a.display;
    return std::visit(
        [&](const auto& s) -> MappedShape {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, SegmentShape>) {
                return SegmentShape{apply(d, s.p0), apply(d, s.p1)};
            } else if constexpr (std::is_same_v<S, MarkerShape>) {
                return MarkerShape{apply(d, s.p)};
            } else if constexpr (std::is_same_v<S, PolylineShape>) {
                PolylineShape out;
                out.points.reserve(s.points.size());
                for (const Point2& p : s.points) out.points.push_back(apply(d, p));
                return out;
            } else if constexpr (std::is_same_v<S, RoiOutlineShape>) {
                const Transform m = compose(d, roi_to_parent(s.roi));
                MappedRoiOutline out;
                const auto corners = roi_local_corners(s.roi);
                for (std::size_t i = 0; i < 4; ++i) out.corners[i] = apply(m, corners[i]);
                return out;
            } else {
                return LabelShape{s.text, apply(d, s.anchor)};
            }
        },
        a.shape);
}

void draw_line(RgbImage& canvas, int x0, int y0, int x1, int y1, Rgb color) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    // Bounded so a far off-canvas endpoint cannot stall the loop.
    for (long guard = 0; guard < 1'000'000; ++guard) {
        canvas.set(x0, y0, color);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void draw_text(RgbImage& canvas, int x, int y, std::string_view text, Rgb color) {
    int pen = x;
    for (char ch : text) {
        int c = std::toupper(static_cast<unsigned char>(ch));
        if (c < 0x20 || c > 0x5F) c = '?';
        const auto& glyph = kFont[c - 0x20];
        for (int col = 0; col < 5; ++col) {
            for (int row = 0; row < 7; ++row) {
                if (glyph[col] & (1u << row)) canvas.set(pen + col, y + row, color);
            }
        }
        pen += 6;
    }
}

RgbImage render(const Image& target, std::span<const Annotation> annotations) {
    RgbImage canvas = to_rgb(target);
    for (const Annotation& a : annotations) {
        const Rgb color = style_color(a.style);
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, SegmentShape>) {
                    draw_segment(canvas, s.p0, s.p1, color);
                } else if constexpr (std::is_same_v<S, MarkerShape>) {
                    const int x = to_pixel(s.p.x), y = to_pixel(s.p.y);
                    draw_line(canvas, x - 3, y, x + 3, y, color);
                    draw_line(canvas, x, y - 3, x, y + 3, color);
                } else if constexpr (std::is_same_v<S, PolylineShape>) {
                    for (std::size_t i = 1; i < s.points.size(); ++i) draw_segment(canvas, s.points[i - 1], s.points[i], color);
                } else if constexpr (std::is_same_v<S, MappedRoiOutline>) {
                    for (std::size_t i = 0; i < 4; ++i) draw_segment(canvas, s.corners[i], s.corners[(i + 1) % 4], color);
                } else {
                    draw_text(canvas, to_pixel(s.anchor.x), to_pixel(s.anchor.y), s.text, color);
                }
            },
            map_annotation(a));
    }
    return canvas;
}

}  // namespace registra
