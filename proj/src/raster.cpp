#include <registra/raster.hpp>
#include <registra/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace registra {

namespace detail {
RasterCounters& mutable_raster_counters() noexcept {
    thread_local RasterCounters counters;
    return counters;
}
}  // namespace detail

RasterCounters raster_counters() noexcept { return detail::mutable_raster_counters(); }

Image::Image(int width, int height, std::vector<float> pixels) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::InvalidParams, "image dimensions must be positive");
    }
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::InvalidParams, "pixel count does not match dimensions");
    }
    for (float v : pixels) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw Error(ErrorCode::InvalidParams, "pixel value outside [0,1]");
        }
    }
    auto& c = detail::mutable_raster_counters();
    ++c.images_allocated;
    c.pixels_allocated += pixels.size();
    data_ = std::make_shared<const std::vector<float>>(std::move(pixels));
}

Image Image::filled(int width, int height, float value) {
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::InvalidParams, "image dimensions must be positive");
    }
    return Image(width, height,
                 std::vector<float>(static_cast<std::size_t>(width) * height, value));
}

Image Image::clone() const {
    if (!data_) return {};
    detail::mutable_raster_counters().pixels_copied += data_->size();
    return Image(width_, height_, *data_);
}

ImageView::ImageView(const Image& image, PixelRect rect) : image_(image), rect_(rect) {}

ImageView view(const Image& image, PixelRect rect) {
    if (rect.width <= 0 || rect.height <= 0 || rect.x < 0 || rect.y < 0 ||
        rect.x + rect.width > image.width() || rect.y + rect.height > image.height()) {
        throw Error(ErrorCode::OutOfBounds, "view rectangle outside image");
    }
    return ImageView(image, rect);
}

bool contains(const Image& image, Point2 p) noexcept {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= image.width() - 1 && p.y <= image.height() - 1;
}

float sample_bilinear_unchecked(const Image& image, Point2 p) noexcept {
    const int w = image.width();
    const int h = image.height();
    int x0 = static_cast<int>(p.x);
    int y0 = static_cast<int>(p.y);
    if (x0 > w - 2) x0 = std::max(w - 2, 0);
    if (y0 > h - 2) y0 = std::max(h - 2, 0);
    const double fx = p.x - x0;
    const double fy = p.y - y0;
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const float* r0 = image.row(y0);
    const float* r1 = image.row(y1);
    // Exact pixel at integer coordinates: zero weights drop the neighbors.
    const double top = fx == 0.0 ? r0[x0] : r0[x0] + fx * (r0[x1] - r0[x0]);
    const double bot = fx == 0.0 ? r1[x0] : r1[x0] + fx * (r1[x1] - r1[x0]);
    return static_cast<float>(fy == 0.0 ? top : top + fy * (bot - top));
}

float sample_bilinear(const Image& image, Point2 p) {
    if (!contains(image, p)) {
        throw Error(ErrorCode::OutOfBounds, "sample at (" + std::to_string(p.x) + ", " +
                                                std::to_string(p.y) + ") outside image");
    }
    return sample_bilinear_unchecked(image, p);
}

Image decimate2(const Image& image) {
    const int w = image.width() / 2;
    const int h = image.height() / 2;
    if (w < 1 || h < 1) {
        throw Error(ErrorCode::InvalidParams, "image too small to decimate");
    }
    std::vector<float> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const float* r0 = image.row(2 * y);
        const float* r1 = image.row(2 * y + 1);
        for (int x = 0; x < w; ++x) {
            out[static_cast<std::size_t>(y) * w + x] =
                0.25f * (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]);
        }
    }
    detail::mutable_raster_counters().decimated_pixels += out.size();
    return Image(w, h, std::move(out));
}

Image warp_similarity(const Image& image, const Transform& t, float fill) {
    ++detail::mutable_raster_counters().warps;
    const Transform inv = invert(t);
    const int w = image.width();
    const int h = image.height();
    std::vector<float> out(static_cast<std::size_t>(w) * h, fill);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Point2 src = apply(inv, {static_cast<double>(x), static_cast<double>(y)});
            if (contains(image, src)) {
                out[static_cast<std::size_t>(y) * w + x] = sample_bilinear_unchecked(image, src);
            }
        }
    }
    return Image(w, h, std::move(out));
}

std::uint8_t to_byte(float v) noexcept {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

RgbImage to_rgb(const Image& image) {
    RgbImage out;
    out.width = image.width();
    out.height = image.height();
    out.pixels.reserve(image.pixels().size());
    for (float v : image.pixels()) {
        const std::uint8_t b = to_byte(v);
        out.pixels.push_back({b, b, b});
    }
    auto& c = detail::mutable_raster_counters();
    ++c.rgb_renders;
    c.rgb_pixels += out.pixels.size();
    return out;
}

}  // namespace registra
