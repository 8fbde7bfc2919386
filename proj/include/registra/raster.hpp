/**
 * @file raster.hpp
 * @brief Grayscale image container, file I/O, point sampling and zero-copy views
 *
 * Pixels are row-major floats normalized to [0,1]. Images are immutable and
 * share their buffer on copy, so passing an Image by value never copies pixel
 * data. Every fresh pixel buffer is recorded in thread-local counters (see
 * RasterCounters) so the inspection path can prove it creates no transformed
 * or copied image data.
 */
#pragma once

#include <registra/geometry.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace registra {

/// Per-thread allocation counters. Deltas around a call are what tests assert.
struct RasterCounters {
    std::uint64_t images_allocated = 0;   ///< fresh grayscale buffers of any size
    std::uint64_t pixels_allocated = 0;   ///< pixels in those buffers
    std::uint64_t pixels_copied = 0;      ///< pixels duplicated by Image::clone()
    std::uint64_t warps = 0;              ///< warp_similarity() calls
    std::uint64_t decimated_pixels = 0;   ///< pixels of 2x2-mean pyramid levels
    std::uint64_t rgb_renders = 0;        ///< overlay RGB canvases created
    std::uint64_t rgb_pixels = 0;
};

[[nodiscard]] RasterCounters raster_counters() noexcept;

namespace detail {
RasterCounters& mutable_raster_counters() noexcept;
}

struct PixelRect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

class Image {
public:
    Image() = default;

    /// Takes ownership; throws Error(InvalidParams) on size mismatch or values outside [0,1].
    Image(int width, int height, std::vector<float> pixels);

    /// Constant image.
    static Image filled(int width, int height, float value);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] bool empty() const noexcept { return width_ == 0; }
    [[nodiscard]] std::span<const float> pixels() const noexcept {
        return data_ ? std::span<const float>(*data_) : std::span<const float>();
    }
    [[nodiscard]] float at(int x, int y) const noexcept {
        return (*data_)[static_cast<std::size_t>(y) * width_ + x];
    }
    [[nodiscard]] const float* row(int y) const noexcept {
        return data_->data() + static_cast<std::size_t>(y) * width_;
    }

    /// Deep copy (counted as copied pixels).
    [[nodiscard]] Image clone() const;

    /// True if both share the same pixel buffer.
    [[nodiscard]] bool shares_buffer_with(const Image& other) const noexcept {
        return data_ && data_ == other.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::shared_ptr<const std::vector<float>> data_;
};

/// Read-only window onto an Image; holds a shared reference to the buffer.
class ImageView {
public:
    ImageView(const Image& image, PixelRect rect);

    [[nodiscard]] int width() const noexcept { return rect_.width; }
    [[nodiscard]] int height() const noexcept { return rect_.height; }
    [[nodiscard]] PixelRect rect() const noexcept { return rect_; }
    [[nodiscard]] float at(int x, int y) const noexcept { return image_.at(rect_.x + x, rect_.y + y); }
    [[nodiscard]] const float* row(int y) const noexcept { return image_.row(rect_.y + y) + rect_.x; }
    [[nodiscard]] const Image& image() const noexcept { return image_; }

private:
    Image image_;
    PixelRect rect_;
};

/// Throws Error(OutOfBounds) if rect is empty or leaves the image.
[[nodiscard]] ImageView view(const Image& image, PixelRect rect);

/**
 * @brief Bilinear point sample
 *
 * p must lie in [0, width-1] x [0, height-1]; otherwise Error(OutOfBounds).
 * Integer coordinates return the stored pixel exactly.
 */
[[nodiscard]] float sample_bilinear(const Image& image, Point2 p);

/// Same as sample_bilinear without the bounds check; caller guarantees p is inside.
[[nodiscard]] float sample_bilinear_unchecked(const Image& image, Point2 p) noexcept;

[[nodiscard]] bool contains(const Image& image, Point2 p) noexcept;

/// 2x2 mean decimation, output size floor(w/2) x floor(h/2).
[[nodiscard]] Image decimate2(const Image& image);

/**
 * @brief Resample img through T: out(p) = sample(img, T^-1 p), fill outside
 *
 * Test and synthetic-target support only. The inspection path never calls it;
 * each call increments RasterCounters::warps.
 */
[[nodiscard]] Image warp_similarity(const Image& image, const Transform& t, float fill = 0.0f);

// ---------------------------------------------------------------------------
// RGB canvas for overlays
// ---------------------------------------------------------------------------

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    [[nodiscard]] Rgb at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, Rgb c) {
        if (x >= 0 && y >= 0 && x < width && y < height) pixels[static_cast<std::size_t>(y) * width + x] = c;
    }
};

/// Gray -> replicated RGB with 8-bit rounding.
[[nodiscard]] RgbImage to_rgb(const Image& image);

// ---------------------------------------------------------------------------
// File formats: PGM (P2/P5) and PNG read, PGM P5 and PNG write
// ---------------------------------------------------------------------------

[[nodiscard]] std::uint8_t to_byte(float v) noexcept;

[[nodiscard]] Image decode_image(std::span<const std::uint8_t> bytes);
[[nodiscard]] Image load_image(const std::filesystem::path& path);

[[nodiscard]] std::vector<std::uint8_t> encode_png(const Image& image);
[[nodiscard]] std::vector<std::uint8_t> encode_png(const RgbImage& image);
[[nodiscard]] std::vector<std::uint8_t> encode_pgm(const Image& image);

/// Format chosen by extension (.png, .pgm); Error(UnsupportedFormat) otherwise.
void save_image(const Image& image, const std::filesystem::path& path);
void save_png(const RgbImage& image, const std::filesystem::path& path);

[[nodiscard]] std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace registra
